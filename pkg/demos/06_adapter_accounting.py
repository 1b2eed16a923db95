"""Adapter forward transforms and trainable-parameter accounting.

Shows the two forward primitives at toy scale, then counts trainable
parameters for each adapter family on a base-sized stack and checks the
analytic gradients against finite differences.
"""

import numpy as np

from effeval import (
    AdapterSpec,
    bottleneck_forward,
    grad_check_bottleneck,
    ia3_forward,
    trainable_param_count,
)

rng = np.random.default_rng(1)

h = rng.standard_normal(8)
out = bottleneck_forward(
    h,
    w_down=rng.standard_normal((2, 8)) * 0.1,
    w_up=rng.standard_normal((8, 2)) * 0.1,
    residual=h,
    nonlinearity="relu",
)
print("bottleneck keeps the input close at small init:", np.linalg.norm(out - h).round(4))

x = rng.standard_normal(8)
w = rng.standard_normal((8, 8))
print("unit scaling vector is a no-op:", np.allclose(ia3_forward(x, w, np.ones(8)), w @ x))

print("\ntrainable parameters on a 12-layer, 768-wide stack (bottleneck 48):")
print(f"{'family':>10} {'params':>12} {'fraction of dense':>18}")
for family in ("pfeiffer", "houlsby", "parallel", "compacter", "ia3"):
    spec = AdapterSpec(
        family,
        hidden_dim=768,
        bottleneck_dim=None if family == "ia3" else 48,
        layer_count=12,
    )
    counts = trainable_param_count(spec)
    print(f"{family:>10} {counts['adapter_params']:>12,} {counts['fraction_of_dense']:>17.2%}")

err = grad_check_bottleneck(AdapterSpec("pfeiffer", hidden_dim=8, bottleneck_dim=3), seed=42)
print(f"\ngradient check vs central differences: max abs error {err:.2e}")
