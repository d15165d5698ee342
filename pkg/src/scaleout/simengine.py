"""Backward-pass / all-reduce co-simulation on a virtual clock."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .costmodel import (
    NO_COMPRESSION,
    AddCostModel,
    ClusterConfig,
    CompressionModel,
    allreduce_cost,
    default_add_model,
    transmission_time,
)
from .fusion import FusionConfig, fuse
from .trace import ModelTrace


@dataclass(frozen=True)
class SimConfig:
    """Everything about the cluster under simulation except the model trace."""

    cluster: ClusterConfig
    fusion: FusionConfig = FusionConfig()
    compression: CompressionModel = NO_COMPRESSION
    add_model: AddCostModel = field(default_factory=default_add_model)


class FlushSpan(NamedTuple):
    """One flush batch's trip through the network: queued, served, done."""

    flush_time: float
    start_time: float
    end_time: float
    total_bytes: int


@dataclass(frozen=True)
class SimResult:
    """Outcome of one simulated training iteration."""

    t_batch: float
    t_back: float
    t_sync: float
    t_overhead: float
    f_sim: float
    flush_log: tuple[FlushSpan, ...]
    mean_utilization: float


def scaling_factor(t_batch: float, t_overhead: float) -> float:
    """Throughput retained versus perfect linear scale-out."""
    if not t_batch > 0:
        raise ValueError(f"t_batch must be positive, got {t_batch!r}")
    if t_overhead < 0:
        raise ValueError(f"t_overhead must be >= 0, got {t_overhead!r}")
    return t_batch / (t_batch + t_overhead)


def simulate(trace: ModelTrace, config: SimConfig) -> SimResult:
    """Run one iteration: fuse the trace, then serve flushes over the ring.

    Flush batches occupy a single all-reduce lane in flush order: batch i
    starts at max(its flush time, the previous batch's end) and holds the
    lane for its full all-reduce cost. Synchronization ends when the last
    batch does; overhead is whatever sticks out past the backward pass.
    On one worker every all-reduce is free, so t_sync equals t_back.
    """
    batches = fuse(trace, config.fusion)
    spans: list[FlushSpan] = []
    lane_free = 0.0
    wire_total = 0.0
    for b in batches:
        start = b.flush_time if b.flush_time >= lane_free else lane_free
        cost = allreduce_cost(b.total_bytes, config.cluster, config.add_model, config.compression)
        end = start + cost
        spans.append(FlushSpan(b.flush_time, start, end, b.total_bytes))
        lane_free = end
        wire_total += transmission_time(b.total_bytes, config.cluster, config.compression)

    t_sync = spans[-1].end_time
    t_overhead = t_sync - trace.t_back
    return SimResult(
        t_batch=trace.t_batch,
        t_back=trace.t_back,
        t_sync=t_sync,
        t_overhead=t_overhead,
        f_sim=scaling_factor(trace.t_batch, t_overhead),
        flush_log=tuple(spans),
        mean_utilization=wire_total / t_sync,
    )


def format_report(result: SimResult, label: str = "simulation") -> str:
    """Plain-text report of one run; numbers keep full precision."""
    lines = [
        label,
        f"  t_batch_s: {result.t_batch!r}",
        f"  t_back_s: {result.t_back!r}",
        f"  t_sync_s: {result.t_sync!r}",
        f"  t_overhead_s: {result.t_overhead!r}",
        f"  f_sim: {result.f_sim!r}",
        f"  flushes: {len(result.flush_log)}",
        f"  mean_utilization: {result.mean_utilization!r}",
    ]
    return "\n".join(lines) + "\n"


def flush_log_csv(result: SimResult) -> str:
    """CSV of the flush log: flush_time_s,start_s,end_s,bytes."""
    lines = ["flush_time_s,start_s,end_s,bytes"]
    for span in result.flush_log:
        lines.append(
            f"{span.flush_time!r},{span.start_time!r},{span.end_time!r},{span.total_bytes}"
        )
    return "\n".join(lines) + "\n"
