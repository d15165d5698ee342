"""What-if simulator for the network scaling of data-parallel training.

Feed it a gradient trace (when each tensor becomes ready during backward,
and how big it is) plus a cluster description, and it predicts the scaling
factor you would see with the network fully utilized: fusion buffering,
ring all-reduce cost, optional gradient compression.
"""

from ._version import VERSION as __version__
from .costmodel import (
    DEFAULT_ADD_EFFECTIVE_BANDWIDTH,
    NO_COMPRESSION,
    AddCostModel,
    ClusterConfig,
    CompressionModel,
    add_est,
    allreduce_cost,
    calibrate_add_model,
    default_add_model,
    shard_size,
    transmission_time,
)
from .fusion import DEFAULT_BUFFER_CAP, DEFAULT_TIMEOUT, FlushBatch, FusionConfig, batches_csv, fuse
from .report import ReportBundle, config_digest, line_chart, make_bundle, sweep_csv
from .simengine import (
    FlushSpan,
    SimConfig,
    SimResult,
    flush_log_csv,
    format_report,
    scaling_factor,
    simulate,
)
from .sweep import (
    DEFAULT_RATIO_GRID,
    SweepError,
    SweepRow,
    SweepSpec,
    min_ratio_for_target,
    run_sweep,
)
from .trace import (
    DEFAULT_PROFILE_TIMINGS,
    SYNTH_MODELS,
    GradientEvent,
    ModelTrace,
    ReferencePoint,
    TraceFormatError,
    load_profile,
    load_reference_data,
    load_trace,
    parse_trace,
    reference_csv,
    serialize_trace,
    synth_profile,
)

__all__ = [
    "__version__",
    "AddCostModel",
    "ClusterConfig",
    "CompressionModel",
    "DEFAULT_ADD_EFFECTIVE_BANDWIDTH",
    "DEFAULT_BUFFER_CAP",
    "DEFAULT_PROFILE_TIMINGS",
    "DEFAULT_RATIO_GRID",
    "DEFAULT_TIMEOUT",
    "FlushBatch",
    "FlushSpan",
    "FusionConfig",
    "GradientEvent",
    "ModelTrace",
    "NO_COMPRESSION",
    "ReferencePoint",
    "ReportBundle",
    "SimConfig",
    "SimResult",
    "SweepError",
    "SweepRow",
    "SweepSpec",
    "SYNTH_MODELS",
    "TraceFormatError",
    "add_est",
    "allreduce_cost",
    "batches_csv",
    "calibrate_add_model",
    "config_digest",
    "default_add_model",
    "flush_log_csv",
    "format_report",
    "fuse",
    "line_chart",
    "load_profile",
    "load_reference_data",
    "load_trace",
    "make_bundle",
    "min_ratio_for_target",
    "parse_trace",
    "reference_csv",
    "run_sweep",
    "scaling_factor",
    "serialize_trace",
    "shard_size",
    "simulate",
    "sweep_csv",
    "synth_profile",
    "transmission_time",
]
