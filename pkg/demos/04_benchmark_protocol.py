"""The measurement protocol end to end on a synthetic corpus.

Generates a file-backed corpus, benchmarks the mover metric over it with
per-stage attribution, sweeps batch sizes, and prices the runtime in
CO2-equivalent under explicit power and grid assumptions.
"""

import sys

from effeval import CarbonAssumptions, carbon_estimate
from effeval.cli import main

SEGMENTS = 200

print("=== single benchmark (per-stage attribution) ===")
main([
    "bench", "--metric", "mover", "--variant", "wmd",
    "--synthetic", f"{SEGMENTS}:5:256", "--runs", "3", "--format", "markdown",
])

print("\n=== batch-size sweep (values must not change) ===")
main([
    "sweep", "--metric", "greedy",
    "--synthetic", f"{SEGMENTS}:5:256", "--runs", "3", "--sizes", "1,4,16",
])

print("\n=== carbon pricing of a hypothetical full evaluation ===")
for label, hours, watts in (("gpu, large encoder", 71, 300), ("cpu, large encoder", 950, 15), ("cpu, small encoder", 45, 15)):
    kg = carbon_estimate(hours, CarbonAssumptions(power_watts=watts, grid_intensity_kg_per_kwh=0.386))
    print(f"  {label:22} {hours:5.0f} h at {watts:3.0f} W -> {kg:5.2f} kg CO2-eq")

sys.exit(0)
