"""Encoder-agnostic token-matching MT metrics and their efficiency protocol.

The engine never touches a transformer: it consumes pre-computed token
embeddings from binary containers (or in-memory arrays) and provides exact
word mover's distance with its linear and quadratic lower-bound
approximations, greedy-matching and composite metrics, correlation
statistics, and a benchmarking harness with per-stage timing, peak-memory
probing and carbon-footprint arithmetic.
"""

from .core import (
    EmbeddingMatrix,
    MetricScore,
    SegmentRecord,
    WeightedDocument,
    document,
    uniform_document,
    validate_document,
)
from .transport import (
    CostMatrix,
    TransportPlan,
    cost_matrix,
    rwmd,
    rwmd_many,
    solve_transport,
    wcd,
    wcd_many,
    wmd,
)
from .metrics import (
    IdfTable,
    LmPenalty,
    RemapMatrix,
    greedy_match_score,
    idf_weights,
    moverscore,
    moverscore_variant,
    sentsim,
    xmoverscore,
)
from .stats import PairedSample, kendall_tau, pearson_r
from .bench import (
    BenchmarkRecord,
    CarbonAssumptions,
    StageTimer,
    carbon_estimate,
    emit_report,
    peak_memory_probe,
    sweep_batch_size,
    time_metric,
    transport_scaling,
)
from .adapterlab import (
    AdapterSpec,
    bottleneck_forward,
    grad_check_bottleneck,
    ia3_forward,
    trainable_param_count,
)
from . import errors, ingest

__version__ = "0.1.0"

__all__ = [
    "AdapterSpec",
    "BenchmarkRecord",
    "CarbonAssumptions",
    "CostMatrix",
    "EmbeddingMatrix",
    "IdfTable",
    "LmPenalty",
    "MetricScore",
    "PairedSample",
    "RemapMatrix",
    "SegmentRecord",
    "StageTimer",
    "TransportPlan",
    "WeightedDocument",
    "bottleneck_forward",
    "carbon_estimate",
    "cost_matrix",
    "document",
    "emit_report",
    "errors",
    "grad_check_bottleneck",
    "greedy_match_score",
    "ia3_forward",
    "idf_weights",
    "ingest",
    "kendall_tau",
    "moverscore",
    "moverscore_variant",
    "peak_memory_probe",
    "pearson_r",
    "rwmd",
    "rwmd_many",
    "sentsim",
    "solve_transport",
    "sweep_batch_size",
    "time_metric",
    "trainable_param_count",
    "transport_scaling",
    "uniform_document",
    "validate_document",
    "wcd",
    "wcd_many",
    "wmd",
    "xmoverscore",
]
