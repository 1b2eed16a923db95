"""Toy-scale adapter mathematics: forward transforms, parameter accounting,
gradient checks.

Two forward primitives cover the adapter families considered here:

* bottleneck:  out = W_up @ sigma(W_down @ h) + r       (pfeiffer, houlsby,
  parallel placements; r is the residual carrying the block input, not a
  learned vector)
* scaling:     out = l * (W @ x)                        (elementwise, one
  learned vector per augmented matrix multiplication)

Parameter accounting works on whole stacks of layers and reports the
fraction of a dense H x H per-layer fine-tune baseline. The compacter
family is accounted with its reported hypercomplex-product parameter
formula (shared n^3 Kronecker factors plus per-layer projections split by
a factor n); its forward pass is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

FAMILIES = ("pfeiffer", "houlsby", "parallel", "compacter", "ia3")
_BOTTLENECK_PLACEMENTS = {"pfeiffer": 1, "houlsby": 2, "parallel": 1}
NONLINEARITIES = ("identity", "relu")


@dataclass(frozen=True)
class AdapterSpec:
    """Adapter family plus the dimensions that determine its size."""

    family: str
    hidden_dim: int
    bottleneck_dim: int | None = None
    layer_count: int = 1
    nonlinearity: str = "relu"
    ia3_vectors_per_layer: int = 3
    learned_residual: bool = False
    phm_n: int = 4

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown adapter family {self.family!r}")
        if self.hidden_dim < 1 or self.layer_count < 1:
            raise ValueError("hidden_dim and layer_count must be >= 1")
        if self.nonlinearity not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.family in _BOTTLENECK_PLACEMENTS or self.family == "compacter":
            if self.bottleneck_dim is None or self.bottleneck_dim < 1:
                raise ValueError(f"{self.family} needs bottleneck_dim >= 1")
            if self.bottleneck_dim > self.hidden_dim:
                raise ValueError("bottleneck_dim must not exceed hidden_dim")
        if self.family == "ia3" and self.ia3_vectors_per_layer < 1:
            raise ValueError("ia3 needs at least one scaling vector per layer")
        if self.family == "compacter" and self.phm_n < 1:
            raise ValueError("compacter needs phm_n >= 1")


def _apply_nonlinearity(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "identity":
        return z
    if kind == "relu":
        return np.maximum(z, 0.0)
    raise ValueError(f"unknown nonlinearity {kind!r}")


def bottleneck_forward(h, w_down, w_up, residual, nonlinearity: str = "relu") -> np.ndarray:
    """Down-project, apply the nonlinearity, up-project, add the residual."""
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    w_down = np.asarray(w_down, dtype=np.float64)
    w_up = np.asarray(w_up, dtype=np.float64)
    r = np.asarray(residual, dtype=np.float64).reshape(-1)
    if w_down.ndim != 2 or w_up.ndim != 2:
        raise DimensionMismatchError("projection weights must be matrices")
    d, hd = w_down.shape
    if hd != h.size:
        raise DimensionMismatchError(f"W_down maps dim {hd}, input has dim {h.size}")
    if w_up.shape != (hd, d):
        raise DimensionMismatchError(
            f"W_up must be {hd}x{d} to invert W_down {w_down.shape}, got {w_up.shape}"
        )
    if r.size != hd:
        raise DimensionMismatchError(f"residual has dim {r.size}, expected {hd}")
    return w_up @ _apply_nonlinearity(w_down @ h, nonlinearity) + r


def ia3_forward(x, w, scaling) -> np.ndarray:
    """Elementwise rescaling of a matrix multiplication: l * (W @ x)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    w = np.asarray(w, dtype=np.float64)
    l = np.asarray(scaling, dtype=np.float64).reshape(-1)
    if w.ndim != 2 or w.shape[1] != x.size:
        raise DimensionMismatchError(f"W {w.shape} does not accept input of dim {x.size}")
    if l.size != w.shape[0]:
        raise DimensionMismatchError(f"scaling has dim {l.size}, output has dim {w.shape[0]}")
    return l * (w @ x)


def trainable_param_count(spec: AdapterSpec) -> dict:
    """Trainable parameters added by the adapter configuration.

    Returns adapter_params, a per-layer breakdown, the dense per-layer
    fine-tune baseline (layer_count * hidden_dim^2) and the fraction of it.
    """
    H, L = spec.hidden_dim, spec.layer_count
    shared = 0
    if spec.family in _BOTTLENECK_PLACEMENTS:
        d = spec.bottleneck_dim
        per_placement = 2 * H * d + (H if spec.learned_residual else 0)
        per_layer = per_placement * _BOTTLENECK_PLACEMENTS[spec.family]
    elif spec.family == "ia3":
        per_layer = spec.ia3_vectors_per_layer * H
    elif spec.family == "compacter":
        d, n = spec.bottleneck_dim, spec.phm_n
        if (H * d) % n != 0:
            raise ValueError(f"hidden_dim*bottleneck_dim={H * d} not divisible by phm_n={n}")
        per_layer = 2 * (H * d) // n
        shared = n**3
    else:  # pragma: no cover - guarded by AdapterSpec
        raise ValueError(spec.family)

    adapter_params = per_layer * L + shared
    baseline = L * H * H
    return {
        "adapter_params": adapter_params,
        "per_layer": per_layer,
        "shared": shared,
        "baseline_params": baseline,
        "fraction_of_dense": adapter_params / baseline,
    }


def grad_check_bottleneck(spec: AdapterSpec, seed: int = 42, step: float = 1e-5) -> float:
    """Max abs deviation between analytic and central-difference gradients
    of the squared-norm loss of :func:`bottleneck_forward`.

    For the relu nonlinearity, inputs are resampled until every pre-
    activation sits at least 0.05 away from the kink, where the finite
    difference is ill-defined.
    """
    if spec.bottleneck_dim is None:
        raise ValueError("gradient check needs a bottleneck family spec")
    H, d = spec.hidden_dim, spec.bottleneck_dim
    rng = np.random.default_rng(seed)

    w_down = rng.standard_normal((d, H))
    w_up = rng.standard_normal((H, d))
    h = rng.standard_normal(H)
    if spec.nonlinearity == "relu":
        for _ in range(1000):
            if np.abs(w_down @ h).min() >= 0.05:
                break
            h = rng.standard_normal(H) + 0.1
        else:  # pragma: no cover - astronomically unlikely
            raise RuntimeError("could not sample inputs away from relu kinks")
    r = h  # residual carries the block input

    def loss(wd, wu):
        y = bottleneck_forward(h, wd, wu, r, spec.nonlinearity)
        return float(y @ y)

    z = w_down @ h
    s = _apply_nonlinearity(z, spec.nonlinearity)
    y = w_up @ s + r
    g_y = 2.0 * y
    g_wup = np.outer(g_y, s)
    g_s = w_up.T @ g_y
    g_z = g_s if spec.nonlinearity == "identity" else g_s * (z > 0.0)
    g_wdown = np.outer(g_z, h)

    worst = 0.0
    for analytic, mat in ((g_wdown, w_down), (g_wup, w_up)):
        it = np.nditer(mat, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = mat[idx]
            mat[idx] = orig + step
            hi = loss(w_down, w_up)
            mat[idx] = orig - step
            lo = loss(w_down, w_up)
            mat[idx] = orig
            numeric = (hi - lo) / (2.0 * step)
            worst = max(worst, abs(numeric - analytic[idx]))
    return worst
