"""Gradient fusion buffering: a timeout window plus a buffer byte cap."""

from __future__ import annotations

from dataclasses import dataclass

from .trace import GradientEvent, ModelTrace

# Absolute tolerance for virtual-clock tie comparisons. Flush deadlines are
# sums of parsed floats, so an arrival meant to coincide with a deadline can
# land a few ulps away from it.
TIME_EPS = 1e-12

DEFAULT_TIMEOUT = 5e-3
DEFAULT_BUFFER_CAP = 64 * 2**20


@dataclass(frozen=True)
class FusionConfig:
    """Flush policy knobs: window length (s) and buffer capacity (bytes)."""

    timeout: float = DEFAULT_TIMEOUT
    buffer_cap_bytes: float = DEFAULT_BUFFER_CAP

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError(f"timeout must be positive, got {self.timeout!r}")
        if not self.buffer_cap_bytes > 0:
            raise ValueError(f"buffer_cap_bytes must be positive, got {self.buffer_cap_bytes!r}")


@dataclass(frozen=True)
class FlushBatch:
    """One buffer flush: when it left, how many bytes, which layers."""

    flush_time: float
    total_bytes: int
    member_layers: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "member_layers", tuple(self.member_layers))
        if not self.member_layers:
            raise ValueError("flush batch has no members")
        if self.flush_time < 0:
            raise ValueError(f"flush_time must be >= 0, got {self.flush_time!r}")
        if self.total_bytes < 0:
            raise ValueError(f"total_bytes must be >= 0, got {self.total_bytes}")


def fuse(trace: ModelTrace, config: FusionConfig) -> list[FlushBatch]:
    """Group gradient events into flush batches on a virtual clock.

    Rules, applied in event order:
      * a window opens when a gradient enters an empty buffer; when it
        expires, everything buffered flushes at the deadline. A deadline
        that lands exactly on an arrival fires before the arrival is
        processed.
      * an arrival that would push the buffer strictly past the byte cap
        first flushes the buffer at the arrival time; an event larger than
        the cap by itself flushes immediately as a singleton.
      * once the last gradient has arrived, any residue flushes at t_back.
    """
    batches: list[FlushBatch] = []
    buf: list[GradientEvent] = []
    buf_bytes = 0
    buf_start = 0.0

    def flush(at: float) -> None:
        nonlocal buf_bytes
        batches.append(
            FlushBatch(flush_time=at, total_bytes=buf_bytes,
                       member_layers=tuple(e.layer_index for e in buf))
        )
        buf.clear()
        buf_bytes = 0

    for ev in trace.events:
        now = ev.ready_time
        if buf and buf_start + config.timeout <= now + TIME_EPS:
            flush(buf_start + config.timeout)
        if buf and buf_bytes + ev.size_bytes > config.buffer_cap_bytes:
            flush(now)
        if ev.size_bytes > config.buffer_cap_bytes:
            # oversized gradient: never buffered, leaves the moment it is ready
            batches.append(FlushBatch(now, ev.size_bytes, (ev.layer_index,)))
            continue
        if not buf:
            buf_start = now
        buf.append(ev)
        buf_bytes += ev.size_bytes

    if buf:
        flush(trace.t_back)
    return batches


def batches_csv(batches: list[FlushBatch]) -> str:
    """Debug CSV of a fusion run: flush_time_s,bytes,layers."""
    lines = ["flush_time_s,bytes,layers"]
    for b in batches:
        lines.append(f"{b.flush_time!r},{b.total_bytes},{';'.join(map(str, b.member_layers))}")
    return "\n".join(lines) + "\n"
