"""Efficiency-evaluation protocol: timing, memory, sweeps, carbon, reports.

Measurement rules, enforced by this module rather than left to callers:

* intervals come from the monotonic high-resolution clock only; wall-clock
  time appears nowhere in a measurement;
* one warm-up run is executed and discarded before the (at least three)
  measured runs, so cold file caches do not dominate;
* per-segment cost is the mean of the per-run totals divided by the segment
  count;
* the memory probe runs outside the timed runs because the instrumented
  allocator slows execution;
* measurement is single-worker; fan-out is only allowed outside timing.

A metric under measurement is a callable ``run(segments, batch_size, stages)``
returning one value per segment and attributing its phases to the fixed
stage set via ``stages.stage(name)``.
"""

from __future__ import annotations

import hashlib
import time
import tracemalloc
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import BatchVarianceError, NonPositiveError, ProbeUnavailableError
from . import transport

STAGES = ("load_embeddings", "cost_matrix", "distance", "aggregate")

#: stage sums may fall short of the run total (unattributed overhead) but
#: may not exceed it by more than this factor
STAGE_SUM_SLACK = 1.10


class StageTimer:
    """Accumulates milliseconds per pipeline stage within one run."""

    def __init__(self):
        self.ms = {name: 0.0 for name in STAGES}

    @contextmanager
    def stage(self, name: str):
        if name not in self.ms:
            raise ValueError(f"unknown stage {name!r}; expected one of {STAGES}")
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.ms[name] += (time.perf_counter() - t0) * 1e3


@dataclass(frozen=True)
class BenchmarkRecord:
    """One measured configuration: totals, per-stage shares, peak memory."""

    metric_id: str
    dataset_id: str
    runs: int
    batch_size: int
    segment_count: int
    total_seconds: tuple
    stage_timings_ms: Mapping[str, float]
    peak_memory_bytes: int
    config_fingerprint: str

    def __post_init__(self):
        if self.runs < 3:
            raise ValueError("benchmark records require at least three measured runs")
        if len(self.total_seconds) != self.runs:
            raise ValueError("one total per run required")
        if self.segment_count < 1:
            raise ValueError("segment_count must be positive")
        total_ms = float(np.mean(self.total_seconds)) * 1e3
        stage_sum = sum(self.stage_timings_ms.values())
        if stage_sum > total_ms * STAGE_SUM_SLACK + 1e-6:
            raise ValueError(
                f"stage timings sum {stage_sum:.3f} ms exceeds run total {total_ms:.3f} ms"
            )

    @property
    def ms_per_segment(self) -> float:
        return float(np.mean(self.total_seconds)) * 1e3 / self.segment_count


MetricRunner = Callable[[Sequence, int, StageTimer], Sequence[float]]


def _fingerprint(metric_id: str, dataset_id: str, batch_size: int, runs: int, segments: int) -> str:
    text = f"{metric_id}|{dataset_id}|batch={batch_size}|runs={runs}|segments={segments}"
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def time_metric(
    run: MetricRunner,
    segments: Sequence,
    runs: int = 3,
    batch_size: int = 1,
    metric_id: str = "metric",
    dataset_id: str = "dataset",
    probe_memory: bool = True,
) -> BenchmarkRecord:
    """Measure a metric over `segments`: warm-up, then `runs` timed passes."""
    if runs < 3:
        raise ValueError("at least three measured runs are required")
    if not segments:
        raise ValueError("cannot benchmark an empty segment list")
    run(segments, batch_size, StageTimer())  # warm-up, discarded

    totals = []
    stage_ms = {name: 0.0 for name in STAGES}
    for _ in range(runs):
        stages = StageTimer()
        t0 = time.perf_counter()
        run(segments, batch_size, stages)
        totals.append(time.perf_counter() - t0)
        for name in STAGES:
            stage_ms[name] += stages.ms[name]
    stage_mean = {name: stage_ms[name] / runs for name in STAGES}

    peak = 0
    if probe_memory:
        peak = peak_memory_probe(lambda: run(segments, batch_size, StageTimer()))

    return BenchmarkRecord(
        metric_id=metric_id,
        dataset_id=dataset_id,
        runs=runs,
        batch_size=batch_size,
        segment_count=len(segments),
        total_seconds=tuple(totals),
        stage_timings_ms=stage_mean,
        peak_memory_bytes=peak,
        config_fingerprint=_fingerprint(metric_id, dataset_id, batch_size, runs, len(segments)),
    )


def peak_memory_probe(closure: Callable[[], object]) -> int:
    """High-water mark of bytes allocated by `closure` through the traced
    allocation layer, measured above the watermark at entry."""
    started_here = False
    if not tracemalloc.is_tracing():
        try:
            tracemalloc.start()
        except Exception as exc:  # pragma: no cover - platform dependent
            raise ProbeUnavailableError(f"allocation tracing unavailable: {exc}") from exc
        started_here = True
    try:
        tracemalloc.reset_peak()
        before, _ = tracemalloc.get_traced_memory()
        closure()
        _, peak = tracemalloc.get_traced_memory()
        return max(0, peak - before)
    finally:
        if started_here:
            tracemalloc.stop()


def sweep_batch_size(
    run: MetricRunner,
    segments: Sequence,
    sizes: Sequence[int] = (1, 4, 16, 64),
    runs: int = 3,
    metric_id: str = "metric",
    dataset_id: str = "dataset",
    probe_memory: bool = False,
) -> list[BenchmarkRecord]:
    """One record per batch size.

    Batching must not change metric values, so every size's values are
    checked against the batch-1 values (tolerance 1e-9). Per-segment cost is
    not asserted monotone in batch size; that ordering is scheduler and
    allocator dependent.
    """
    reference = np.asarray(run(segments, 1, StageTimer()), dtype=np.float64)
    records = []
    for size in sizes:
        values = np.asarray(run(segments, size, StageTimer()), dtype=np.float64)
        if values.shape != reference.shape or (
            values.size and float(np.abs(values - reference).max()) > 1e-9
        ):
            raise BatchVarianceError(
                f"metric values at batch size {size} differ from batch size 1"
            )
        records.append(
            time_metric(
                run,
                segments,
                runs=runs,
                batch_size=size,
                metric_id=metric_id,
                dataset_id=dataset_id,
                probe_memory=probe_memory,
            )
        )
    return records


# ---------------------------------------------------------------------------
# carbon arithmetic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CarbonAssumptions:
    """Power draw under load and grid carbon intensity; both configuration,
    neither measured."""

    power_watts: float
    grid_intensity_kg_per_kwh: float

    def __post_init__(self):
        if not (np.isfinite(self.power_watts) and self.power_watts > 0):
            raise NonPositiveError("power_watts must be positive and finite")
        if not (np.isfinite(self.grid_intensity_kg_per_kwh) and self.grid_intensity_kg_per_kwh > 0):
            raise NonPositiveError("grid intensity must be positive and finite")


def carbon_estimate(runtime_hours: float, assumptions: CarbonAssumptions) -> float:
    """kg CO2-eq = hours * kW * (kg per kWh)."""
    if not np.isfinite(runtime_hours) or runtime_hours < 0:
        raise NonPositiveError("runtime_hours must be >= 0 and finite")
    return runtime_hours * (assumptions.power_watts / 1000.0) * assumptions.grid_intensity_kg_per_kwh


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "metric_id,dataset_id,batch_size,runs,ms_per_segment,peak_bytes,"
    "stage_load_ms,stage_cost_ms,stage_distance_ms,stage_aggregate_ms"
)


def _record_cells(rec: BenchmarkRecord) -> list[str]:
    return [
        rec.metric_id,
        rec.dataset_id,
        str(rec.batch_size),
        str(rec.runs),
        repr(rec.ms_per_segment),
        str(rec.peak_memory_bytes),
        repr(rec.stage_timings_ms["load_embeddings"]),
        repr(rec.stage_timings_ms["cost_matrix"]),
        repr(rec.stage_timings_ms["distance"]),
        repr(rec.stage_timings_ms["aggregate"]),
    ]


def plot_points(records: Sequence[BenchmarkRecord], correlations: Mapping[str, float]):
    """(runtime ms/segment, correlation, label) triples for frontier plots."""
    points = []
    for rec in records:
        if rec.metric_id not in correlations:
            raise ValueError(f"no correlation value for {rec.metric_id!r}")
        points.append((rec.ms_per_segment, float(correlations[rec.metric_id]), rec.metric_id))
    return points


def emit_plotdata(points: Sequence[tuple]) -> bytes:
    """(x, y, label) triples as TSV; values render with shortest-repr
    formatting, so parsing the output recovers the inputs exactly."""
    lines = ["x\ty\tlabel"]
    for x, y, label in points:
        if "\t" in label or "\n" in label:
            raise ValueError(f"plot label may not contain tabs or newlines: {label!r}")
        lines.append(f"{repr(float(x))}\t{repr(float(y))}\t{label}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit_report(
    records: Sequence[BenchmarkRecord],
    correlations: Mapping[str, float] | None = None,
    format: str = "csv",
) -> bytes:
    """Render records deterministically; identical input, identical bytes."""
    if format == "csv":
        lines = [CSV_COLUMNS]
        for rec in records:
            cells = _record_cells(rec)
            for c in cells:
                if "," in c or "\n" in c:
                    raise ValueError(f"csv cell may not contain commas or newlines: {c!r}")
            lines.append(",".join(cells))
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "markdown":
        cols = CSV_COLUMNS.split(",")
        if correlations is not None:
            cols = cols + ["pearson_r"]
        lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
        for rec in records:
            cells = _record_cells(rec)
            if correlations is not None:
                cells.append(repr(float(correlations[rec.metric_id])) if rec.metric_id in correlations else "")
            lines.append("| " + " | ".join(cells) + " |")
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "plotdata":
        if correlations is None:
            raise ValueError("plotdata output needs correlation values")
        return emit_plotdata(plot_points(records, correlations))
    raise ValueError(f"unknown report format {format!r}")


# ---------------------------------------------------------------------------
# runtime scaling study
# ---------------------------------------------------------------------------


def fit_loglog_slope(sizes: Sequence[int], seconds: Sequence[float]) -> float:
    """Least-squares slope of log(time) against log(size)."""
    return float(np.polyfit(np.log(np.asarray(sizes, dtype=float)), np.log(np.asarray(seconds, dtype=float)), 1)[0])


def _scaling_instances(rng: np.random.Generator, n: int, dim: int, pairs: int):
    ea = rng.standard_normal((pairs, n, dim))
    eb = rng.standard_normal((pairs, n, dim))
    w = np.full((pairs, n), 1.0 / n)
    return w, ea, w, eb


def _best_of(repeats: int, fn: Callable[[], object]) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def transport_scaling(
    sizes: Sequence[int] = (16, 32, 64, 128, 256),
    dim: int = 32,
    pairs: int = 64,
    wmd_pairs: int = 4,
    seed: int = 42,
    repeats: int = 5,
    include_wmd: bool = True,
) -> dict:
    """Per-pair runtime of each distance at several token counts.

    The centroid and relaxed distances are timed through their batch
    kernels so that per-call dispatch overhead, which is flat in the token
    count, does not mask the algorithmic growth. The exact solver is timed
    pair by pair (it is sequential by nature) on fewer pairs.

    Returns {distance: {"sizes", "seconds_per_pair", "slope"}}.
    """
    rng = np.random.default_rng(seed)
    out: dict[str, dict] = {}

    for name, kernel in (("wcd", transport.wcd_many), ("rwmd", transport.rwmd_many)):
        times = []
        for n in sizes:
            wa, ea, wb, eb = _scaling_instances(rng, n, dim, pairs)
            kernel(wa, ea, wb, eb)  # warm-up
            times.append(_best_of(repeats, lambda: kernel(wa, ea, wb, eb)) / pairs)
        out[name] = {"sizes": tuple(sizes), "seconds_per_pair": tuple(times), "slope": fit_loglog_slope(sizes, times)}

    if include_wmd:
        from .core import uniform_document

        times = []
        for n in sizes:
            wa, ea, wb, eb = _scaling_instances(rng, n, dim, wmd_pairs)
            docs = [
                (
                    uniform_document([f"a{i}" for i in range(n)], ea[k]),
                    uniform_document([f"b{i}" for i in range(n)], eb[k]),
                )
                for k in range(wmd_pairs)
            ]

            def solve_all():
                for da, db in docs:
                    transport.wmd(da, db)

            solve_all()  # warm-up
            times.append(_best_of(max(1, repeats - 2), solve_all) / wmd_pairs)
        out["wmd"] = {"sizes": tuple(sizes), "seconds_per_pair": tuple(times), "slope": fit_loglog_slope(sizes, times)}

    return out
