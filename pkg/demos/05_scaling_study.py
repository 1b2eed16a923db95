"""Empirical complexity of the three distances.

Times each distance on synthetic documents of growing token count and fits
log-log slopes: ~1 for the centroid bound, ~2 for the relaxed bound, and
super-quadratic growth for the exact solver. The exact distance costs more
than the relaxed one everywhere it matters, yet both are dwarfed by
embedding loading in end-to-end runs (see demo 04).
"""

from effeval import transport_scaling

out = transport_scaling(sizes=(16, 32, 64, 128, 256), dim=32, seed=42)

print(f"{'n':>6}", end="")
for name in ("wcd", "rwmd", "wmd"):
    print(f"{name + ' us/pair':>16}", end="")
print()
for idx, n in enumerate(out["wcd"]["sizes"]):
    print(f"{n:>6}", end="")
    for name in ("wcd", "rwmd", "wmd"):
        print(f"{out[name]['seconds_per_pair'][idx] * 1e6:>16.1f}", end="")
    print()

print()
for name in ("wcd", "rwmd", "wmd"):
    print(f"fitted log-log slope {name:5}: {out[name]['slope']:.2f}")
