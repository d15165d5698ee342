"""Report emission: sweep CSVs, self-contained SVG charts, run metadata.

Everything here is deterministic for fixed inputs; the only run-varying
output is the generated_at stamp, which lives in '#' comment lines so CSV
bodies stay byte-identical across reruns.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Sequence

from ._version import VERSION
from .sweep import SweepRow

SWEEP_COLUMNS = ("model", "n_workers", "bandwidth_bps", "compression_ratio",
                 "f_sim", "t_overhead", "reference_f")

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#e377c2", "#7f7f7f", "#bcbd22")


def config_digest(payload) -> str:
    """Stable sha256 hex digest of a JSON-serializable configuration."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ReportBundle:
    """Sweep rows plus the metadata stamped into emitted reports."""

    rows: tuple[SweepRow, ...]
    config_digest: str
    generated_at: str
    tool_version: str = VERSION


def make_bundle(rows: Sequence[SweepRow], config_payload) -> ReportBundle:
    """Bundle rows with a config digest and a UTC timestamp."""
    return ReportBundle(
        rows=tuple(rows),
        config_digest=config_digest(config_payload),
        generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def sweep_csv(bundle: ReportBundle) -> str:
    """Sweep rows as CSV; metadata rides in '#' comment lines up top."""
    lines = [
        f"# generated_at: {bundle.generated_at}",
        f"# config_digest: {bundle.config_digest}",
        f"# tool_version: {bundle.tool_version}",
        ",".join(SWEEP_COLUMNS),
    ]
    for row in bundle.rows:
        ref = "" if row.reference_f is None else repr(row.reference_f)
        lines.append(
            f"{row.model},{row.n_workers},{row.bandwidth_bps!r},"
            f"{row.compression_ratio!r},{row.f_sim!r},{row.t_overhead!r},{ref}"
        )
    return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _num_label(v: float) -> str:
    return f"{v:g}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def line_chart(
    title: str,
    x_label: str,
    y_label: str,
    series: Sequence[tuple[str, Sequence[tuple[float, float]]]],
    markers: Sequence[tuple[str, Sequence[tuple[float, float]]]] = (),
    log_x: bool = False,
    y_range: tuple[float, float] = (0.0, 1.0),
    width: int = 720,
    height: int = 460,
) -> str:
    """Render line series (plus optional point markers) as an SVG string.

    series and markers are (label, [(x, y), ...]) pairs; markers draw as
    hollow circles, which suits measured overlays on simulated curves.
    x ticks land on the swept values themselves, optionally on a log axis.
    """
    if not series:
        raise ValueError("line_chart needs at least one series")
    ml, mr, mt, mb = 64, 16, 40, 52
    plot_w, plot_h = width - ml - mr, height - mt - mb

    xs = sorted({x for _, pts in list(series) + list(markers) for x, _ in pts})
    if not xs:
        raise ValueError("line_chart got no data points")
    if log_x and xs[0] <= 0:
        raise ValueError("log-scale x needs positive x values")

    def tx(x: float) -> float:
        lo, hi = (math.log10(xs[0]), math.log10(xs[-1])) if log_x else (xs[0], xs[-1])
        v = math.log10(x) if log_x else x
        if hi == lo:
            return ml + plot_w / 2
        return ml + (v - lo) / (hi - lo) * plot_w

    y_lo, y_hi = y_range
    if not y_hi > y_lo:
        raise ValueError("y_range must be increasing")

    def ty(y: float) -> float:
        return mt + (y_hi - y) / (y_hi - y_lo) * plot_h

    x_ticks = xs if len(xs) <= 12 else xs[:: max(1, len(xs) // 12)]
    y_ticks = [y_lo + (y_hi - y_lo) * i / 5 for i in range(6)]

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{_fmt(width / 2)}" y="22" text-anchor="middle" font-size="15">{_esc(title)}</text>',
    ]
    for yt in y_ticks:
        py = ty(yt)
        out.append(
            f'<line x1="{ml}" y1="{_fmt(py)}" x2="{ml + plot_w}" y2="{_fmt(py)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{ml - 6}" y="{_fmt(py + 4)}" text-anchor="end" font-size="11">'
            f"{_num_label(yt)}</text>"
        )
    for xt in x_ticks:
        px = tx(xt)
        out.append(
            f'<line x1="{_fmt(px)}" y1="{mt}" x2="{_fmt(px)}" y2="{mt + plot_h}" '
            f'stroke="#eeeeee" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{mt + plot_h + 16}" text-anchor="middle" font-size="11">'
            f"{_num_label(xt)}</text>"
        )
    out.append(
        f'<rect x="{ml}" y="{mt}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{_fmt(ml + plot_w / 2)}" y="{height - 12}" text-anchor="middle" '
        f'font-size="12">{_esc(x_label)}</text>'
    )
    out.append(
        f'<text x="16" y="{_fmt(mt + plot_h / 2)}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_fmt(mt + plot_h / 2)})">{_esc(y_label)}</text>'
    )

    legend: list[tuple[str, str, str]] = []  # (label, color, kind)
    for i, (label, pts) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_fmt(tx(x))},{_fmt(ty(y))}" for x, y in sorted(pts))
        if coords:
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.8"/>'
            )
            for x, y in sorted(pts):
                out.append(
                    f'<circle cx="{_fmt(tx(x))}" cy="{_fmt(ty(y))}" r="2.4" fill="{color}"/>'
                )
        legend.append((label, color, "line"))
    for i, (label, pts) in enumerate(markers):
        color = PALETTE[(len(series) + i) % len(PALETTE)]
        for x, y in sorted(pts):
            out.append(
                f'<circle cx="{_fmt(tx(x))}" cy="{_fmt(ty(y))}" r="4" '
                f'fill="white" stroke="{color}" stroke-width="1.8"/>'
            )
        legend.append((label, color, "marker"))

    lx, ly = ml + 12, mt + plot_h - 14 * len(legend) - 8
    for label, color, kind in legend:
        if kind == "line":
            out.append(
                f'<line x1="{lx}" y1="{_fmt(ly - 4)}" x2="{lx + 18}" y2="{_fmt(ly - 4)}" '
                f'stroke="{color}" stroke-width="1.8"/>'
            )
        else:
            out.append(
                f'<circle cx="{lx + 9}" cy="{_fmt(ly - 4)}" r="4" fill="white" '
                f'stroke="{color}" stroke-width="1.8"/>'
            )
        out.append(f'<text x="{lx + 24}" y="{_fmt(ly)}" font-size="11">{_esc(label)}</text>')
        ly += 14
    out.append("</svg>")
    return "\n".join(out) + "\n"
