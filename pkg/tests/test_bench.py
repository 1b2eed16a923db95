import time

import numpy as np
import pytest

from effeval.bench import (
    BenchmarkRecord,
    CarbonAssumptions,
    StageTimer,
    carbon_estimate,
    emit_report,
    fit_loglog_slope,
    peak_memory_probe,
    plot_points,
    sweep_batch_size,
    time_metric,
)
from effeval.errors import BatchVarianceError, NonPositiveError


def make_record(ms_per_segment, metric_id="m", segments=10, peak=0):
    total = ms_per_segment * segments / 1e3
    return BenchmarkRecord(
        metric_id=metric_id,
        dataset_id="d",
        runs=3,
        batch_size=1,
        segment_count=segments,
        total_seconds=(total, total, total),
        stage_timings_ms={"load_embeddings": 0.0, "cost_matrix": 0.0, "distance": 0.0, "aggregate": 0.0},
        peak_memory_bytes=peak,
        config_fingerprint="cafebabe",
    )


# ---------------------------------------------------------------------------
# timing protocol


def sleazy_metric(ms_per_segment):
    def run(segments, batch_size, stages):
        values = []
        with stages.stage("distance"):
            for _ in segments:
                time.sleep(ms_per_segment / 1e3)
                values.append(1.0)
        return values

    return run


def test_time_metric_stub_sleep():
    record = time_metric(sleazy_metric(10.0), list(range(10)), runs=3, probe_memory=False)
    assert 9.0 <= record.ms_per_segment <= 20.0
    assert record.runs == 3
    assert len(record.total_seconds) == 3


def test_time_metric_rejects_too_few_runs():
    with pytest.raises(ValueError):
        time_metric(sleazy_metric(0.0), [1], runs=2)
    with pytest.raises(ValueError):
        time_metric(sleazy_metric(0.0), [], runs=3)


def test_ms_per_segment_is_mean_total_over_segments():
    record = time_metric(sleazy_metric(1.0), list(range(5)), runs=4, probe_memory=False)
    expected = float(np.mean(record.total_seconds)) * 1e3 / 5
    assert record.ms_per_segment == expected


def test_stage_sums_bounded_by_total():
    record = time_metric(sleazy_metric(2.0), list(range(4)), runs=3, probe_memory=False)
    total_ms = float(np.mean(record.total_seconds)) * 1e3
    assert sum(record.stage_timings_ms.values()) <= total_ms * 1.10 + 1e-6
    with pytest.raises(ValueError):
        BenchmarkRecord(
            metric_id="m",
            dataset_id="d",
            runs=3,
            batch_size=1,
            segment_count=1,
            total_seconds=(0.001, 0.001, 0.001),
            stage_timings_ms={"load_embeddings": 5.0, "cost_matrix": 0.0, "distance": 0.0, "aggregate": 0.0},
            peak_memory_bytes=0,
            config_fingerprint="x",
        )


def test_stage_timer_rejects_unknown_stage():
    timer = StageTimer()
    with pytest.raises(ValueError):
        with timer.stage("tokenize"):
            pass


# ---------------------------------------------------------------------------
# memory probe


def test_peak_memory_one_mebibyte():
    def closure():
        buf = bytearray(1 << 20)
        return len(buf)

    peak = peak_memory_probe(closure)
    assert (1 << 20) <= peak < (1 << 20) + (64 << 10)


def test_peak_memory_empty_closure():
    assert peak_memory_probe(lambda: None) < (64 << 10)


def test_peak_memory_max_not_sum():
    # allocation schedule: 1 MiB dropped, then 512 KiB; the high-water mark
    # is the maximum of the schedule, not its sum
    def closure():
        big = bytearray(1 << 20)
        del big
        small = bytearray(1 << 19)
        return len(small)

    peak = peak_memory_probe(closure)
    assert (1 << 20) <= peak < (1 << 20) + (1 << 19)


# ---------------------------------------------------------------------------
# batch sweep


def test_sweep_single_size():
    records = sweep_batch_size(sleazy_metric(0.0), list(range(6)), sizes=[1], runs=3)
    assert len(records) == 1
    assert records[0].batch_size == 1


def test_sweep_values_invariant_across_sizes():
    rng = np.random.default_rng(42)
    payload = rng.standard_normal(20).tolist()

    def metric(segments, batch_size, stages):
        with stages.stage("distance"):
            return [payload[i] for i in range(len(segments))]

    records = sweep_batch_size(metric, list(range(20)), sizes=[1, 4, 16, 64], runs=3)
    assert [r.batch_size for r in records] == [1, 4, 16, 64]


def test_sweep_detects_batch_dependent_values():
    def metric(segments, batch_size, stages):
        return [float(batch_size)] * len(segments)

    with pytest.raises(BatchVarianceError):
        sweep_batch_size(metric, list(range(4)), sizes=[1, 4], runs=3)


# ---------------------------------------------------------------------------
# carbon arithmetic


def test_carbon_examples():
    grid = CarbonAssumptions(power_watts=300.0, grid_intensity_kg_per_kwh=0.386)
    assert carbon_estimate(71.0, grid) == pytest.approx(8.2218, abs=1e-9)
    cpu = CarbonAssumptions(power_watts=15.0, grid_intensity_kg_per_kwh=0.386)
    assert carbon_estimate(950.0, cpu) == pytest.approx(5.5005, abs=1e-9)
    assert carbon_estimate(0.0, cpu) == 0.0


def test_carbon_rejects_nonpositive():
    with pytest.raises(NonPositiveError):
        CarbonAssumptions(power_watts=0.0, grid_intensity_kg_per_kwh=0.4)
    with pytest.raises(NonPositiveError):
        CarbonAssumptions(power_watts=10.0, grid_intensity_kg_per_kwh=-1.0)
    with pytest.raises(NonPositiveError):
        carbon_estimate(-1.0, CarbonAssumptions(10.0, 0.4))


# ---------------------------------------------------------------------------
# reports


def test_csv_single_record():
    data = emit_report([make_record(12.5)], format="csv").decode()
    lines = data.strip().split("\n")
    assert lines[0].startswith("metric_id,dataset_id,batch_size,runs,ms_per_segment")
    assert len(lines) == 2
    assert lines[1].split(",")[4] == "12.5"


def test_empty_report_is_header_only():
    assert emit_report([], format="csv").decode().strip() == (
        "metric_id,dataset_id,batch_size,runs,ms_per_segment,peak_bytes,"
        "stage_load_ms,stage_cost_ms,stage_distance_ms,stage_aggregate_ms"
    )
    assert emit_report([], correlations={}, format="plotdata").decode() == "x\ty\tlabel\n"


def test_report_determinism():
    records = [make_record(3.25), make_record(7.5, metric_id="n")]
    a = emit_report(records, format="csv")
    b = emit_report(records, format="csv")
    assert a == b
    md = emit_report(records, correlations={"m": 0.5, "n": 0.25}, format="markdown")
    assert md == emit_report(records, correlations={"m": 0.5, "n": 0.25}, format="markdown")


def test_plotdata_roundtrips_points():
    points = [
        (422.0, 0.5856, "RoBERTa-L"),
        (15.8, 0.5300, "TinyBERT"),
    ]
    records = [make_record(x, metric_id=label) for x, _, label in points]
    correlations = {label: y for _, y, label in points}
    data = emit_report(records, correlations=correlations, format="plotdata").decode()
    lines = data.strip().split("\n")
    assert lines[0] == "x\ty\tlabel"
    parsed = [(float(a), float(b), c) for a, b, c in (l.split("\t") for l in lines[1:])]
    assert parsed == points
    assert plot_points(records, correlations) == points


def test_plotdata_requires_correlation():
    with pytest.raises(ValueError):
        emit_report([make_record(1.0)], correlations={}, format="plotdata")


def test_fit_loglog_slope_on_power_law():
    sizes = [16, 32, 64, 128]
    assert fit_loglog_slope(sizes, [1e-6 * n**2 for n in sizes]) == pytest.approx(2.0, abs=1e-9)
    assert fit_loglog_slope(sizes, [5e-7 * n for n in sizes]) == pytest.approx(1.0, abs=1e-9)
