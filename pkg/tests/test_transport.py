import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effeval.core import EmbeddingMatrix, uniform_document, document
from effeval.errors import (
    DimensionMismatchError,
    EmptyDocumentError,
    ZeroVectorError,
)
from effeval.transport import (
    cost_matrix,
    rwmd,
    rwmd_many,
    solve_transport,
    wcd,
    wcd_many,
    wmd,
)

from _oracles import mcmf_transport, random_feasible_plan


def emb(rows):
    return EmbeddingMatrix(np.array(rows, dtype=float))


def random_pair(rng, max_tokens=6, max_dim=8, alpha=1.0):
    dim = int(rng.integers(1, max_dim + 1))
    na = int(rng.integers(1, max_tokens + 1))
    nb = int(rng.integers(1, max_tokens + 1))
    a = document(
        [f"a{i}" for i in range(na)], rng.dirichlet(np.full(na, alpha)), rng.standard_normal((na, dim))
    )
    b = document(
        [f"b{i}" for i in range(nb)], rng.dirichlet(np.full(nb, alpha)), rng.standard_normal((nb, dim))
    )
    return a, b


# ---------------------------------------------------------------------------
# cost matrices


def test_cost_matrix_345_triangle():
    c = cost_matrix(emb([[0.0, 0.0]]), emb([[3.0, 4.0]]), "euclidean")
    assert c.values.tolist() == [[5.0]]


def test_cost_matrix_cosine_identical_direction():
    c = cost_matrix(emb([[1.0, 0.0]]), emb([[1.0, 0.0]]), "cosine")
    assert c.values.tolist() == [[0.0]]


def test_cost_matrix_two_by_one():
    # hand evaluation of the norm definition
    c = cost_matrix(emb([[1.0, 0.0], [0.0, 1.0]]), emb([[1.0, 1.0]]), "euclidean")
    assert c.values.tolist() == [[1.0], [1.0]]


def test_cost_matrix_matches_recomputation():
    rng = np.random.default_rng(7)
    a, b = rng.standard_normal((5, 4)), rng.standard_normal((3, 4))
    c = cost_matrix(emb(a), emb(b), "euclidean")
    for i in range(5):
        for j in range(3):
            assert abs(c.values[i, j] - np.linalg.norm(a[i] - b[j])) <= 1e-12
    cc = cost_matrix(emb(a), emb(b), "cosine")
    for i in range(5):
        for j in range(3):
            ref = 1.0 - a[i] @ b[j] / (np.linalg.norm(a[i]) * np.linalg.norm(b[j]))
            assert abs(cc.values[i, j] - max(ref, 0.0)) <= 1e-12
    assert (c.values >= 0).all() and (cc.values >= 0).all()


def test_cost_matrix_errors():
    with pytest.raises(DimensionMismatchError):
        cost_matrix(emb([[1.0, 0.0]]), emb([[1.0]]))
    with pytest.raises(EmptyDocumentError):
        cost_matrix(EmbeddingMatrix(np.zeros((0, 2))), emb([[1.0, 0.0]]))
    with pytest.raises(ZeroVectorError):
        cost_matrix(emb([[0.0, 0.0]]), emb([[1.0, 0.0]]), "cosine")


# ---------------------------------------------------------------------------
# exact distance


def test_wmd_single_edge():
    a = uniform_document(["x"], [[0.0, 0.0]])
    b = uniform_document(["y"], [[3.0, 4.0]])
    dist, plan = wmd(a, b)
    assert dist == pytest.approx(5.0, abs=1e-12)
    assert plan.flows == ((0, 0, 1.0),)


def test_wmd_identity():
    d = uniform_document(["x", "y"], [[0.0, 1.0], [2.0, 3.0]])
    dist, _ = wmd(d, d)
    assert abs(dist) <= 1e-12


def test_wmd_two_by_two_uniform():
    # brute-force enumeration of the 2x2 transportation polytope: plans are
    # parametrized by t in [0, 0.5]; costs here are constant 1 along the
    # matched edges and sqrt(2) across, so the optimum pairs each token
    # with its vertical neighbor.
    a = uniform_document(["p", "q"], [[0.0, 0.0], [1.0, 0.0]])
    b = uniform_document(["r", "s"], [[0.0, 1.0], [1.0, 1.0]])
    dist, _ = wmd(a, b)
    assert dist == pytest.approx(1.0, abs=1e-12)


def test_wmd_matches_min_cost_flow_oracle():
    rng = np.random.default_rng(42)
    for _ in range(60):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        dim = int(rng.integers(1, 6))
        sup = rng.integers(1, 9, n)
        dem = np.zeros(m, dtype=int)
        rem = int(sup.sum())
        for j in range(m - 1):
            dem[j] = int(rng.integers(0, rem + 1))
            rem -= dem[j]
        dem[m - 1] = rem
        if (dem == 0).any():
            dem = dem + 1
            sup[int(rng.integers(0, n))] += m
        ea = rng.standard_normal((n, dim))
        eb = rng.standard_normal((m, dim))
        a = document([f"a{i}" for i in range(n)], sup / sup.sum(), ea)
        b = document([f"b{j}" for j in range(m)], dem / dem.sum(), eb)
        dist, _ = wmd(a, b)
        cost = cost_matrix(a.embedding, b.embedding).values
        expected = mcmf_transport(sup, dem, cost) / sup.sum()
        assert dist == pytest.approx(expected, abs=1e-9)


def test_plan_feasibility_and_objective():
    rng = np.random.default_rng(3)
    for _ in range(40):
        a, b = random_pair(rng)
        dist, plan = wmd(a, b)
        assert all(f >= 0 for _, _, f in plan.flows)
        assert np.abs(plan.row_marginals(len(a)) - a.weights).max() <= 1e-9
        assert np.abs(plan.col_marginals(len(b)) - b.weights).max() <= 1e-9
        cost = cost_matrix(a.embedding, b.embedding).values
        recomputed = sum(f * cost[i, j] for i, j, f in plan.flows)
        assert abs(recomputed - plan.objective) <= 1e-9 * max(1.0, abs(plan.objective))
        assert dist == plan.objective


def test_wmd_not_above_any_feasible_plan():
    rng = np.random.default_rng(11)
    a, b = random_pair(rng, max_tokens=5, max_dim=5)
    dist, _ = wmd(a, b)
    cost = cost_matrix(a.embedding, b.embedding).values
    for _ in range(100):
        plan = random_feasible_plan(rng, a.weights, b.weights)
        assert dist <= float((plan * cost).sum()) + 1e-12


# ---------------------------------------------------------------------------
# relaxations


def test_rwmd_identity():
    d = uniform_document(["x", "y"], [[0.0, 1.0], [2.0, 3.0]])
    assert rwmd(d, d) == 0.0


def test_rwmd_single_target_equals_wmd():
    rng = np.random.default_rng(5)
    for _ in range(20):
        na, dim = int(rng.integers(1, 7)), int(rng.integers(1, 6))
        a = document([f"a{i}" for i in range(na)], rng.dirichlet(np.ones(na)), rng.standard_normal((na, dim)))
        b = uniform_document(["b"], rng.standard_normal((1, dim)))
        assert rwmd(a, b) == pytest.approx(wmd(a, b)[0], abs=1e-12)


def test_wcd_identity_and_mean_offset():
    d = uniform_document(["x", "y"], [[0.0, 1.0], [2.0, 3.0]])
    assert wcd(d, d) == 0.0
    a = uniform_document(["p", "q"], [[0.0, 0.0], [2.0, 0.0]])
    b = uniform_document(["r"], [[1.0, 1.0]])
    assert wcd(a, b) == pytest.approx(1.0, abs=1e-12)


def test_lower_bounds_of_exact_distance():
    # both relaxations are provable lower bounds of the exact optimum
    rng = np.random.default_rng(42)
    slack_rwmd = []
    slack_wcd = []
    for _ in range(300):
        a, b = random_pair(rng)
        exact, _ = wmd(a, b)
        assert wcd(a, b) <= exact + 1e-9
        assert rwmd(a, b) <= exact + 1e-9
        slack_rwmd.append(exact - rwmd(a, b))
        slack_wcd.append(exact - wcd(a, b))
    # the relaxed bound is the tighter one on average
    assert np.mean(slack_rwmd) < np.mean(slack_wcd)


def test_centroid_bound_can_exceed_relaxed_bound():
    # identical supports with different masses: every nearest-neighbor
    # distance is zero, so the relaxed bound collapses while the centroid
    # gap does not. The chain wcd <= rwmd is therefore not universal.
    pts = [[0.0, 0.0], [10.0, 0.0]]
    a = document(["x", "y"], [0.5, 0.5], pts)
    b = document(["x", "y"], [0.9, 0.1], pts)
    assert rwmd(a, b) == 0.0
    assert wcd(a, b) == pytest.approx(4.0, abs=1e-12)
    exact, _ = wmd(a, b)
    assert exact == pytest.approx(4.0, abs=1e-12)  # both stay below wmd


def test_symmetry():
    rng = np.random.default_rng(9)
    for _ in range(25):
        a, b = random_pair(rng)
        assert wmd(a, b)[0] == pytest.approx(wmd(b, a)[0], abs=1e-9)
        assert rwmd(a, b) == rwmd(b, a)
        assert wcd(a, b) == wcd(b, a)


def test_solve_transport_shape_check():
    c = cost_matrix(emb([[0.0]]), emb([[1.0]]))
    with pytest.raises(DimensionMismatchError):
        solve_transport(np.array([0.5, 0.5]), np.array([1.0]), c)


# ---------------------------------------------------------------------------
# batch kernels


def test_batch_kernels_match_single_pair():
    rng = np.random.default_rng(21)
    K, n, dim = 40, 5, 6
    ea = rng.standard_normal((K, n, dim))
    eb = rng.standard_normal((K, n, dim))
    wa = rng.dirichlet(np.ones(n), size=K)
    wb = rng.dirichlet(np.ones(n), size=K)
    wcd_vals = wcd_many(wa, ea, wb, eb)
    rwmd_vals = rwmd_many(wa, ea, wb, eb)
    for k in range(K):
        a = document([f"a{i}" for i in range(n)], wa[k], ea[k])
        b = document([f"b{i}" for i in range(n)], wb[k], eb[k])
        assert wcd_vals[k] == pytest.approx(wcd(a, b), abs=1e-12)
        assert rwmd_vals[k] == pytest.approx(rwmd(a, b), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_distance_trio_properties(seed):
    rng = np.random.default_rng(seed)
    a, b = random_pair(rng, max_tokens=4, max_dim=4)
    exact, plan = wmd(a, b)
    assert exact >= -1e-12
    assert rwmd(a, b) <= exact + 1e-9
    assert wcd(a, b) <= exact + 1e-9
    assert np.abs(plan.row_marginals(len(a)) - a.weights).max() <= 1e-9
