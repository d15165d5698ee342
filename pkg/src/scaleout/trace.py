"""Gradient-ready traces: data model, file schema, bundled model profiles."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import NamedTuple

SYNTH_MODELS = ("resnet50", "resnet101", "vgg16")

# Bundled single-GPU timings (t_batch_s, t_back_s) at batch size 32, chosen
# to sit in the plausible range for V100 fp32 training of each architecture
# (roughly 290, 180 and 155 images/s), with backward taking ~65% of a batch.
# Edit and regenerate the bundled profiles to explore other hardware.
DEFAULT_PROFILE_TIMINGS: dict[str, tuple[float, float]] = {
    "resnet50": (0.110, 0.072),
    "resnet101": (0.178, 0.116),
    "vgg16": (0.206, 0.132),
}


class TraceFormatError(ValueError):
    """A trace document violates the schema; carries line/field context."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        ctx = []
        if line is not None:
            ctx.append(f"line {line}")
        if field is not None:
            ctx.append(f"field '{field}'")
        super().__init__(f"{message} ({', '.join(ctx)})" if ctx else message)


@dataclass(frozen=True)
class GradientEvent:
    """One gradient tensor becoming ready during the backward pass.

    layer_index counts from the output (0 = produced first), size_bytes is
    the wire size of the tensor, ready_time is seconds since backward start.
    """

    layer_index: int
    size_bytes: int
    ready_time: float

    def __post_init__(self):
        if self.layer_index < 0:
            raise ValueError(f"layer_index must be >= 0, got {self.layer_index}")
        if self.size_bytes < 0:
            raise ValueError(f"size_bytes must be >= 0, got {self.size_bytes}")
        if self.ready_time < 0:
            raise ValueError(f"ready_time must be >= 0, got {self.ready_time!r}")


@dataclass(frozen=True)
class ModelTrace:
    """A full backward pass worth of gradient events, plus batch timings.

    Events are stored sorted by (ready_time, layer_index). t_back is the
    backward duration and must equal the last ready_time exactly; pass
    t_back=None to derive it. Instances are immutable and safe to share.
    """

    name: str
    events: tuple[GradientEvent, ...]
    t_batch: float
    t_back: float | None = None

    def __post_init__(self):
        events = tuple(sorted(self.events, key=lambda e: (e.ready_time, e.layer_index)))
        object.__setattr__(self, "events", events)
        if not events:
            raise ValueError("trace has no gradient events")
        derived = events[-1].ready_time
        if self.t_back is None:
            object.__setattr__(self, "t_back", derived)
        elif self.t_back != derived:
            raise ValueError(
                f"declared t_back {self.t_back!r} does not match max ready_time {derived!r}"
            )
        if not self.t_back > 0:
            raise ValueError(f"t_back must be positive, got {self.t_back!r}")
        if self.t_batch < self.t_back:
            raise ValueError(f"t_batch < t_back ({self.t_batch!r} < {self.t_back!r})")
        if self.total_bytes <= 0:
            raise ValueError("trace transfers zero bytes")

    @property
    def total_bytes(self) -> int:
        return sum(e.size_bytes for e in self.events)


@dataclass(frozen=True)
class ReferencePoint:
    """A measured scaling factor for a (model, cluster size, bandwidth) point."""

    model: str
    servers: int
    bandwidth_bps: float
    measured_scaling_factor: float

    def __post_init__(self):
        if self.servers < 1:
            raise ValueError(f"servers must be >= 1, got {self.servers}")
        if not self.bandwidth_bps > 0:
            raise ValueError("bandwidth_bps must be positive")
        if not 0.0 <= self.measured_scaling_factor <= 1.0:
            raise ValueError(
                f"measured_scaling_factor must lie in [0, 1], got {self.measured_scaling_factor!r}"
            )


def _require(obj: dict, key: str, lineno: int):
    if key not in obj:
        raise TraceFormatError("missing required field", line=lineno, field=key)
    return obj[key]


def _as_number(value, key: str, lineno: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TraceFormatError(f"expected a number, got {value!r}", line=lineno, field=key)
    return value


def _as_int(value, key: str, lineno: int) -> int:
    # JSON has no integer type; accept integral floats like 1e6.
    if isinstance(value, bool):
        raise TraceFormatError(f"expected an integer, got {value!r}", line=lineno, field=key)
    if isinstance(value, float):
        if not value.is_integer():
            raise TraceFormatError(f"expected an integer, got {value!r}", line=lineno, field=key)
        return int(value)
    if not isinstance(value, int):
        raise TraceFormatError(f"expected an integer, got {value!r}", line=lineno, field=key)
    return value


def parse_trace(raw: bytes | str) -> ModelTrace:
    """Parse a trace document: a JSON header line, then one event per line.

    The header holds "name", "t_batch_s" and optionally "t_back_s" (checked
    against the recomputed maximum when present); every following non-blank
    line is an object with "layer", "bytes" and "ready_s". Raises
    TraceFormatError with line/field context on any violation.
    """
    if isinstance(raw, (bytes, bytearray)):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TraceFormatError(f"not valid UTF-8: {exc}") from exc
    else:
        text = raw

    header: dict | None = None
    header_line = 0
    events: list[GradientEvent] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"invalid JSON: {exc.msg}", line=lineno) from exc
        if not isinstance(obj, dict):
            raise TraceFormatError("expected a JSON object", line=lineno)
        if header is None:
            header, header_line = obj, lineno
            name = _require(obj, "name", lineno)
            if not isinstance(name, str) or not name:
                raise TraceFormatError("name must be a non-empty string", line=lineno, field="name")
            t_batch = _as_number(_require(obj, "t_batch_s", lineno), "t_batch_s", lineno)
            if not t_batch > 0:
                raise TraceFormatError(
                    f"t_batch_s must be positive, got {t_batch!r}", line=lineno, field="t_batch_s"
                )
            if "t_back_s" in obj:
                declared = _as_number(obj["t_back_s"], "t_back_s", lineno)
                if not declared > 0:
                    raise TraceFormatError(
                        f"t_back_s must be positive, got {declared!r}",
                        line=lineno,
                        field="t_back_s",
                    )
            continue
        layer = _as_int(_require(obj, "layer", lineno), "layer", lineno)
        size = _as_int(_require(obj, "bytes", lineno), "bytes", lineno)
        ready = _as_number(_require(obj, "ready_s", lineno), "ready_s", lineno)
        try:
            events.append(GradientEvent(layer_index=layer, size_bytes=size, ready_time=ready))
        except ValueError as exc:
            raise TraceFormatError(str(exc), line=lineno) from exc

    if header is None:
        raise TraceFormatError("empty document: missing header object")
    if not events:
        raise TraceFormatError("trace has no gradient events", line=header_line)

    derived = max(e.ready_time for e in events)
    declared = header.get("t_back_s")
    if declared is not None and declared != derived:
        raise TraceFormatError(
            f"declared t_back_s {declared!r} does not match max ready_s {derived!r}",
            line=header_line,
            field="t_back_s",
        )
    t_batch = header["t_batch_s"]
    if t_batch < derived:
        raise TraceFormatError(
            f"t_batch < t_back ({t_batch!r} < {derived!r})", line=header_line, field="t_batch_s"
        )
    try:
        return ModelTrace(name=header["name"], events=tuple(events), t_batch=t_batch, t_back=derived)
    except ValueError as exc:
        raise TraceFormatError(str(exc), line=header_line) from exc


def serialize_trace(trace: ModelTrace, notes: str | None = None) -> str:
    """Render a trace back to its on-disk form; parse(serialize(t)) == t."""
    header: dict = {"name": trace.name, "t_batch_s": trace.t_batch, "t_back_s": trace.t_back}
    if notes:
        header["notes"] = notes
    lines = [json.dumps(header)]
    for e in trace.events:
        lines.append(json.dumps({"layer": e.layer_index, "bytes": e.size_bytes, "ready_s": e.ready_time}))
    return "\n".join(lines) + "\n"


def load_trace(path) -> ModelTrace:
    """Read and parse a trace file from disk."""
    with open(path, "rb") as f:
        return parse_trace(f.read())


class _LayerRow(NamedTuple):
    layer: int
    name: str
    size_bytes: int
    cum_cost: float


@lru_cache(maxsize=None)
def _layer_table(model_name: str) -> tuple[_LayerRow, ...]:
    text = resources.files("scaleout").joinpath(f"data/layers/{model_name}.csv").read_text("utf-8")
    rows: list[_LayerRow] = []
    cum = 0.0
    for rec in csv.DictReader(io.StringIO(text)):
        cum += float(rec["cost"])
        rows.append(_LayerRow(int(rec["layer"]), rec["name"], int(rec["bytes"]), cum))
    return tuple(rows)


def synth_profile(model_name: str, t_batch: float, t_back: float) -> ModelTrace:
    """Synthesize a gradient trace for one of the bundled architectures.

    Per-tensor sizes come from the bundled layer tables (totals pinned to
    the published model sizes). Ready times walk the layers in backward
    order and advance by each layer's share of the total backward compute
    cost, so cheap-but-large tensors near the input do not eat the window.
    """
    if model_name not in SYNTH_MODELS:
        raise ValueError(f"unknown model '{model_name}' (choose from: {', '.join(SYNTH_MODELS)})")
    if not t_back > 0:
        raise ValueError(f"t_back must be positive, got {t_back!r}")
    if t_batch < t_back:
        raise ValueError(f"t_batch < t_back ({t_batch!r} < {t_back!r})")
    rows = _layer_table(model_name)
    total_cost = rows[-1].cum_cost
    events = [
        GradientEvent(r.layer, r.size_bytes, t_back * (r.cum_cost / total_cost)) for r in rows
    ]
    return ModelTrace(name=model_name, events=tuple(events), t_batch=t_batch)


def load_profile(model_name: str) -> ModelTrace:
    """Load one of the bundled synthetic model profiles."""
    if model_name not in SYNTH_MODELS:
        raise ValueError(f"unknown model '{model_name}' (choose from: {', '.join(SYNTH_MODELS)})")
    text = resources.files("scaleout").joinpath(f"data/profiles/{model_name}.trace").read_text("utf-8")
    return parse_trace(text)


def reference_csv() -> str:
    """The bundled measured-scaling-factor table, verbatim CSV."""
    return resources.files("scaleout").joinpath("data/reference_points.csv").read_text("utf-8")


def load_reference_data() -> tuple[ReferencePoint, ...]:
    """Measured scaling factors: three models at 2/4/8 servers, 100 Gbps."""
    out = []
    for rec in csv.DictReader(io.StringIO(reference_csv())):
        out.append(
            ReferencePoint(
                model=rec["model"],
                servers=int(rec["servers"]),
                bandwidth_bps=float(rec["bandwidth_bps"]),
                measured_scaling_factor=float(rec["scaling_factor"]),
            )
        )
    return tuple(out)
