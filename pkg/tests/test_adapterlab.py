import numpy as np
import pytest

from effeval.adapterlab import (
    AdapterSpec,
    bottleneck_forward,
    grad_check_bottleneck,
    ia3_forward,
    trainable_param_count,
)
from effeval.errors import DimensionMismatchError


def test_zero_down_projection_passes_residual_through():
    rng = np.random.default_rng(1)
    h = rng.standard_normal(5)
    r = rng.standard_normal(5)
    out = bottleneck_forward(h, np.zeros((2, 5)), rng.standard_normal((5, 2)), r)
    assert out.tolist() == r.tolist()


def test_identity_composition():
    h = np.array([0.5, -1.5, 2.0])
    out = bottleneck_forward(h, np.eye(3), np.eye(3), np.zeros(3), nonlinearity="identity")
    assert out.tolist() == h.tolist()


def test_bottleneck_hand_case():
    # W_down=[1,1], W_up=[[2],[3]], relu, r=(1,1), h=(1,2): z=3, out=(7,10)
    out = bottleneck_forward(
        [1.0, 2.0], [[1.0, 1.0]], [[2.0], [3.0]], [1.0, 1.0], nonlinearity="relu"
    )
    assert out.tolist() == [7.0, 10.0]


def test_bottleneck_shape_errors():
    with pytest.raises(DimensionMismatchError):
        bottleneck_forward([1.0, 2.0], [[1.0]], [[1.0], [1.0]], [0.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        bottleneck_forward([1.0, 2.0], [[1.0, 1.0]], [[1.0, 1.0]], [0.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        bottleneck_forward([1.0, 2.0], [[1.0, 1.0]], [[1.0], [1.0]], [0.0])


def test_ia3_unit_vector_is_base_layer():
    rng = np.random.default_rng(2)
    w = rng.standard_normal((4, 4))
    x = rng.standard_normal(4)
    assert ia3_forward(x, w, np.ones(4)).tolist() == (w @ x).tolist()


def test_ia3_examples():
    assert ia3_forward([1.0, 1.0], np.eye(2), [2.0, 3.0]).tolist() == [2.0, 3.0]
    rng = np.random.default_rng(3)
    w = rng.standard_normal((4, 4))
    x = rng.standard_normal(4)
    l = rng.standard_normal(4)
    expected = [l[i] * sum(w[i, j] * x[j] for j in range(4)) for i in range(4)]
    assert np.allclose(ia3_forward(x, w, l), expected, atol=1e-12)


def test_ia3_shape_error():
    with pytest.raises(DimensionMismatchError):
        ia3_forward([1.0, 2.0], np.eye(2), [1.0, 2.0, 3.0])


# ---------------------------------------------------------------------------
# parameter accounting


def test_pfeiffer_count():
    spec = AdapterSpec("pfeiffer", hidden_dim=4, bottleneck_dim=2, layer_count=1)
    counts = trainable_param_count(spec)
    assert counts["adapter_params"] == 16
    learned = AdapterSpec("pfeiffer", hidden_dim=4, bottleneck_dim=2, layer_count=1, learned_residual=True)
    assert trainable_param_count(learned)["adapter_params"] == 20


def test_ia3_count():
    spec = AdapterSpec("ia3", hidden_dim=4, layer_count=2)
    assert trainable_param_count(spec)["adapter_params"] == 24


def test_houlsby_is_twice_pfeiffer():
    for H, d, L in ((4, 2, 1), (16, 4, 3), (768, 48, 12)):
        single = trainable_param_count(AdapterSpec("pfeiffer", H, d, L))
        double = trainable_param_count(AdapterSpec("houlsby", H, d, L))
        assert double["adapter_params"] == 2 * single["adapter_params"]
        parallel = trainable_param_count(AdapterSpec("parallel", H, d, L))
        assert parallel["adapter_params"] == single["adapter_params"]


def test_compacter_accounting():
    spec = AdapterSpec("compacter", hidden_dim=8, bottleneck_dim=4, layer_count=2, phm_n=4)
    counts = trainable_param_count(spec)
    assert counts["adapter_params"] == 4**3 + 2 * 2 * (8 * 4) // 4
    with pytest.raises(ValueError):
        trainable_param_count(AdapterSpec("compacter", hidden_dim=5, bottleneck_dim=3, phm_n=4))


def test_zero_bottleneck_rejected():
    with pytest.raises(ValueError):
        AdapterSpec("pfeiffer", hidden_dim=4, bottleneck_dim=0)
    with pytest.raises(ValueError):
        AdapterSpec("pfeiffer", hidden_dim=4, bottleneck_dim=8)


def test_fraction_of_dense_baseline():
    counts = trainable_param_count(AdapterSpec("pfeiffer", 768, 48, 12))
    assert counts["baseline_params"] == 12 * 768 * 768
    assert counts["fraction_of_dense"] == pytest.approx(counts["adapter_params"] / (12 * 768 * 768))


# ---------------------------------------------------------------------------
# gradient checks


@pytest.mark.parametrize("nonlinearity", ["identity", "relu"])
@pytest.mark.parametrize("dims", [(2, 1), (4, 2), (8, 3)])
def test_grad_check(nonlinearity, dims):
    H, d = dims
    spec = AdapterSpec("pfeiffer", hidden_dim=H, bottleneck_dim=d, nonlinearity=nonlinearity)
    assert grad_check_bottleneck(spec, seed=42) < 1e-6
