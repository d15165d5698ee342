"""Command-line front end: synth, simulate, sweep, compress-ratio, reference."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from ._version import VERSION
from .costmodel import (
    DEFAULT_ADD_EFFECTIVE_BANDWIDTH,
    AddCostModel,
    ClusterConfig,
    CompressionModel,
)
from .fusion import DEFAULT_BUFFER_CAP, DEFAULT_TIMEOUT, FusionConfig
from .report import line_chart, make_bundle, sweep_csv
from .simengine import SimConfig, flush_log_csv, format_report, simulate
from .sweep import DEFAULT_RATIO_GRID, SweepError, SweepRow, SweepSpec, min_ratio_for_target, run_sweep
from .trace import (
    DEFAULT_PROFILE_TIMINGS,
    SYNTH_MODELS,
    TraceFormatError,
    load_profile,
    load_trace,
    reference_csv,
    serialize_trace,
    synth_profile,
)

EXIT_OK = 0
EXIT_USAGE = 2  # argparse's own code for bad invocations
EXIT_VALIDATION = 3
EXIT_IO = 4


def _float_list(text: str, label: str) -> tuple[float, ...]:
    out = []
    for item in (s.strip() for s in text.split(",")):
        if not item:
            continue
        try:
            out.append(float(item))
        except ValueError:
            raise ValueError(f"invalid {label} value '{item}'") from None
    return tuple(out)


def _int_list(text: str, label: str) -> tuple[int, ...]:
    out = []
    for v in _float_list(text, label):
        if not v.is_integer():
            raise ValueError(f"invalid {label} value '{v:g}': must be an integer")
        out.append(int(v))
    return tuple(out)


def _fusion_from(args) -> FusionConfig:
    return FusionConfig(
        timeout=args.timeout_ms * 1e-3,
        buffer_cap_bytes=int(args.buffer_mib * 2**20),
    )


def _add_model_from(args) -> AddCostModel:
    if args.add_model:
        with open(args.add_model, "r", encoding="utf-8") as f:
            return AddCostModel.from_csv(f.read())
    return AddCostModel.from_effective_bandwidth(args.add_bw_gbs * 1e9)


def _one_trace_from(args):
    if args.trace:
        return load_trace(args.trace)
    return load_profile(args.model)


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def cmd_synth(args) -> int:
    default_batch, default_back = DEFAULT_PROFILE_TIMINGS[args.model]
    t_batch = default_batch if args.t_batch is None else args.t_batch
    t_back = default_back if args.t_back is None else args.t_back
    trace = synth_profile(args.model, t_batch, t_back)
    notes = (
        "synthetic profile: per-layer sizes pinned to published totals; "
        "ready times spread by relative backward compute cost"
    )
    _write_text(args.out, serialize_trace(trace, notes=notes))
    print(f"wrote {args.out}: {len(trace.events)} events, {trace.total_bytes} bytes, "
          f"t_batch={trace.t_batch!r}s t_back={trace.t_back!r}s")
    return EXIT_OK


def cmd_simulate(args) -> int:
    trace = _one_trace_from(args)
    config = SimConfig(
        cluster=ClusterConfig(n_workers=args.workers, bandwidth_bps=args.bandwidth_gbps * 1e9),
        fusion=_fusion_from(args),
        compression=CompressionModel(args.ratio),
        add_model=_add_model_from(args),
    )
    result = simulate(trace, config)
    label = (f"{trace.name}: N={args.workers} @ {args.bandwidth_gbps:g} Gbps "
             f"ratio={args.ratio:g}")
    sys.stdout.write(format_report(result, label=label))
    if args.flush_log:
        _write_text(args.flush_log, flush_log_csv(result))
        print(f"wrote {args.flush_log}")
    return EXIT_OK


# Fields accepted in a --spec JSON file; explicit flags win over the file.
SWEEP_SPEC_FIELDS = frozenset({
    "traces", "models", "workers", "bandwidths_gbps", "ratios",
    "timeout_ms", "buffer_mib", "add_model", "add_bw_gbs",
    "parallel", "plot_axis", "out_dir", "name",
})

PLOT_AXES = ("auto", "bandwidth", "ratio", "workers")


def _load_sweep_spec_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid sweep spec JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ValueError("sweep spec must be a JSON object")
    unknown = sorted(set(obj) - SWEEP_SPEC_FIELDS)
    if unknown:
        raise ValueError(f"unknown sweep spec field(s): {', '.join(unknown)}")
    return obj


def _resolve(flag_value, spec: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    return spec.get(key, default)


def _as_float_tuple(value, label: str) -> tuple[float, ...]:
    if isinstance(value, str):
        return _float_list(value, label)
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"invalid {label} value {v!r}")
            out.append(float(v))
        return tuple(out)
    raise ValueError(f"invalid {label} value {value!r}")


def _as_int_tuple(value, label: str) -> tuple[int, ...]:
    out = []
    for v in _as_float_tuple(value, label):
        if not v.is_integer():
            raise ValueError(f"invalid {label} value '{v:g}': must be an integer")
        out.append(int(v))
    return tuple(out)


def _pick_axis(plot_axis: str, bandwidths, ratios) -> str:
    if plot_axis != "auto":
        return plot_axis
    if len(bandwidths) > 1:
        return "bandwidth"
    if len(ratios) > 1:
        return "ratio"
    return "workers"


def _build_chart(rows: Sequence[SweepRow], axis: str) -> str:
    if axis == "bandwidth":
        x_of = lambda r: r.bandwidth_bps / 1e9
        x_label, log_x = "per-link bandwidth (Gbps)", True
    elif axis == "ratio":
        x_of = lambda r: r.compression_ratio
        x_label, log_x = "compression ratio", True
    else:
        x_of = lambda r: float(r.n_workers)
        x_label, log_x = "workers", False

    worker_vals = sorted({r.n_workers for r in rows})
    bw_vals = sorted({r.bandwidth_bps for r in rows})
    ratio_vals = sorted({r.compression_ratio for r in rows})

    def series_label(r: SweepRow) -> str:
        parts = [r.model]
        if axis != "workers" and len(worker_vals) > 1:
            parts.append(f"N={r.n_workers}")
        if axis != "bandwidth" and len(bw_vals) > 1:
            parts.append(f"{r.bandwidth_bps / 1e9:g}Gbps")
        if axis != "ratio" and len(ratio_vals) > 1:
            parts.append(f"r={r.compression_ratio:g}")
        return " ".join(parts)

    series_map: dict[str, list[tuple[float, float]]] = {}
    marker_map: dict[str, set[tuple[float, float]]] = {}
    for r in rows:
        series_map.setdefault(series_label(r), []).append((x_of(r), r.f_sim))
        if r.reference_f is not None:
            marker_map.setdefault(f"{r.model} measured", set()).add((x_of(r), r.reference_f))
    series = [(k, sorted(v)) for k, v in sorted(series_map.items())]
    markers = [(k, sorted(v)) for k, v in sorted(marker_map.items())]
    return line_chart(
        title=f"simulated scaling factor vs {x_label}",
        x_label=x_label,
        y_label="scaling factor f_sim",
        series=series,
        markers=markers,
        log_x=log_x,
    )


def cmd_sweep(args) -> int:
    spec_file = _load_sweep_spec_file(args.spec) if args.spec else {}
    trace_paths = [str(p) for p in (args.trace or ())]
    trace_paths += [str(p) for p in spec_file.get("traces", ())]
    model_names = [str(m) for m in (args.model or ())]
    model_names += [str(m) for m in spec_file.get("models", ())]
    traces = [load_trace(p) for p in trace_paths] + [load_profile(m) for m in model_names]
    if not traces:
        raise ValueError("no input model: pass --trace/--model or list traces/models in --spec")

    workers = _as_int_tuple(_resolve(args.workers, spec_file, "workers", "16"), "workers")
    bandwidths = tuple(
        v * 1e9
        for v in _as_float_tuple(
            _resolve(args.bandwidths_gbps, spec_file, "bandwidths_gbps", "100"),
            "bandwidths_gbps",
        )
    )
    ratios = _as_float_tuple(_resolve(args.ratios, spec_file, "ratios", "1"), "ratios")
    timeout_ms = float(_resolve(args.timeout_ms, spec_file, "timeout_ms", DEFAULT_TIMEOUT * 1e3))
    buffer_mib = float(
        _resolve(args.buffer_mib, spec_file, "buffer_mib", DEFAULT_BUFFER_CAP / 2**20)
    )
    fusion = FusionConfig(timeout=timeout_ms * 1e-3, buffer_cap_bytes=int(buffer_mib * 2**20))
    add_csv = _resolve(args.add_model, spec_file, "add_model", None)
    if add_csv:
        with open(add_csv, "r", encoding="utf-8") as f:
            add_model = AddCostModel.from_csv(f.read())
    else:
        add_bw = float(
            _resolve(args.add_bw_gbs, spec_file, "add_bw_gbs", DEFAULT_ADD_EFFECTIVE_BANDWIDTH / 1e9)
        )
        add_model = AddCostModel.from_effective_bandwidth(add_bw * 1e9)
    parallel = int(_resolve(args.parallel, spec_file, "parallel", 1))
    plot_axis = str(_resolve(args.plot_axis, spec_file, "plot_axis", "auto"))
    if plot_axis not in PLOT_AXES:
        raise ValueError(f"invalid plot_axis value {plot_axis!r} (choose from: {', '.join(PLOT_AXES)})")
    out_dir = str(_resolve(args.out_dir, spec_file, "out_dir", "."))
    name = str(_resolve(args.name, spec_file, "name", "sweep"))

    rows: list[SweepRow] = []
    for trace in traces:
        spec = SweepSpec(
            trace=trace,
            worker_counts=workers,
            bandwidths_bps=bandwidths,
            compression_ratios=ratios,
            fusion=fusion,
            add_model=add_model,
        )
        rows.extend(run_sweep(spec, max_parallel=parallel))
    rows.sort(key=lambda r: (r.model, r.n_workers, r.bandwidth_bps, r.compression_ratio))

    payload = {
        "traces": [
            {"name": t.name, "t_batch_s": t.t_batch, "t_back_s": t.t_back,
             "events": [(e.layer_index, e.size_bytes, e.ready_time) for e in t.events]}
            for t in traces
        ],
        "worker_counts": list(workers),
        "bandwidths_bps": list(bandwidths),
        "compression_ratios": list(ratios),
        "fusion": {"timeout_s": fusion.timeout, "buffer_cap_bytes": fusion.buffer_cap_bytes},
        "add_model_samples": [list(s) for s in add_model.samples],
        "tool_version": VERSION,
    }
    bundle = make_bundle(rows, payload)

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    svg_path = os.path.join(out_dir, f"{name}.svg")
    _write_text(csv_path, sweep_csv(bundle))
    axis = _pick_axis(plot_axis, bandwidths, ratios)
    _write_text(svg_path, _build_chart(rows, axis))
    print(f"wrote {csv_path}: {len(rows)} rows")
    print(f"wrote {svg_path}: axis={axis}")
    print(f"config_digest: {bundle.config_digest}")
    return EXIT_OK


def cmd_compress_ratio(args) -> int:
    trace = _one_trace_from(args)
    grid = _float_list(args.ratios, "--ratios")
    ratio = min_ratio_for_target(
        trace=trace,
        cluster=ClusterConfig(n_workers=args.workers, bandwidth_bps=args.bandwidth_gbps * 1e9),
        fusion=_fusion_from(args),
        add_model=_add_model_from(args),
        target_f=args.target,
        ratio_grid=grid,
    )
    print(f"{trace.name}: N={args.workers} @ {args.bandwidth_gbps:g} Gbps target={args.target:g}")
    if ratio is None:
        print("min_ratio: none (target unreachable on grid)")
    else:
        print(f"min_ratio: {ratio!r}")
    return EXIT_OK


def cmd_reference(args) -> int:
    text = reference_csv()
    if args.out:
        _write_text(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scaleout",
        description="What-if simulator for the network scaling of data-parallel training.",
    )
    parser.add_argument("--version", action="version", version=f"scaleout {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    fusion_p = argparse.ArgumentParser(add_help=False)
    fusion_p.add_argument("--timeout-ms", type=float, default=DEFAULT_TIMEOUT * 1e3,
                          help="fusion window in milliseconds (default: %(default)s)")
    fusion_p.add_argument("--buffer-mib", type=float, default=DEFAULT_BUFFER_CAP / 2**20,
                          help="fusion buffer capacity in MiB (default: %(default)s)")

    add_p = argparse.ArgumentParser(add_help=False)
    add_p.add_argument("--add-model", metavar="CSV",
                       help="two-column CSV (size_bytes, seconds) of measured vector-add costs")
    add_p.add_argument("--add-bw-gbs", type=float, default=DEFAULT_ADD_EFFECTIVE_BANDWIDTH / 1e9,
                       help="effective add bandwidth in GB/s when no --add-model is given "
                            "(default: %(default)s)")

    one_trace = argparse.ArgumentParser(add_help=False)
    src = one_trace.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace", help="path to a trace file")
    src.add_argument("--model", choices=SYNTH_MODELS, help="bundled model profile")

    p_synth = sub.add_parser("synth", help="write a synthetic gradient trace")
    p_synth.add_argument("--model", choices=SYNTH_MODELS, required=True)
    p_synth.add_argument("--t-batch", type=float, default=None,
                         help="seconds per training batch (default: bundled timing)")
    p_synth.add_argument("--t-back", type=float, default=None,
                         help="seconds per backward pass (default: bundled timing)")
    p_synth.add_argument("-o", "--out", required=True, help="output trace path")
    p_synth.set_defaults(func=cmd_synth)

    p_sim = sub.add_parser("simulate", parents=[one_trace, fusion_p, add_p],
                           help="simulate one configuration")
    p_sim.add_argument("--workers", type=int, required=True, help="data-parallel worker count")
    p_sim.add_argument("--bandwidth-gbps", type=float, default=100.0,
                       help="per-link bandwidth in Gbps (default: %(default)s)")
    p_sim.add_argument("--ratio", type=float, default=1.0,
                       help="gradient compression ratio (default: %(default)s)")
    p_sim.add_argument("--flush-log", help="also write the flush log CSV here")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep",
                             help="sweep workers x bandwidth x ratio, emit CSV + SVG")
    p_sweep.add_argument("--spec", help="JSON file supplying any of these options")
    p_sweep.add_argument("--trace", action="append", help="trace file (repeatable)")
    p_sweep.add_argument("--model", action="append", choices=SYNTH_MODELS,
                         help="bundled model profile (repeatable)")
    p_sweep.add_argument("--workers", default=None, help="comma list of worker counts (default: 16)")
    p_sweep.add_argument("--bandwidths-gbps", default=None,
                         help="comma list of per-link bandwidths in Gbps (default: 100)")
    p_sweep.add_argument("--ratios", default=None,
                         help="comma list of compression ratios (default: 1)")
    p_sweep.add_argument("--timeout-ms", type=float, default=None,
                         help="fusion window in milliseconds (default: 5)")
    p_sweep.add_argument("--buffer-mib", type=float, default=None,
                         help="fusion buffer capacity in MiB (default: 64)")
    p_sweep.add_argument("--add-model", metavar="CSV", default=None,
                         help="two-column CSV (size_bytes, seconds) of measured vector-add costs")
    p_sweep.add_argument("--add-bw-gbs", type=float, default=None,
                         help="effective add bandwidth in GB/s (default: 800)")
    p_sweep.add_argument("--parallel", type=int, default=None,
                         help="evaluate up to this many points concurrently")
    p_sweep.add_argument("--plot-axis", choices=PLOT_AXES, default=None,
                         help="x axis of the SVG chart (default: auto)")
    p_sweep.add_argument("--out-dir", default=None, help="directory for outputs (default: .)")
    p_sweep.add_argument("--name", default=None, help="basename for outputs (default: sweep)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cr = sub.add_parser("compress-ratio", parents=[one_trace, fusion_p, add_p],
                          help="smallest grid ratio reaching a target scaling factor")
    p_cr.add_argument("--workers", type=int, required=True)
    p_cr.add_argument("--bandwidth-gbps", type=float, default=100.0)
    p_cr.add_argument("--target", type=float, default=0.99,
                      help="target scaling factor (default: %(default)s)")
    p_cr.add_argument("--ratios", default=",".join(f"{r:g}" for r in DEFAULT_RATIO_GRID),
                      help="comma list of candidate ratios, ascending")
    p_cr.set_defaults(func=cmd_compress_ratio)

    p_ref = sub.add_parser("reference", help="print the measured reference table")
    p_ref.add_argument("-o", "--out", default=None, help="write CSV here instead of stdout")
    p_ref.set_defaults(func=cmd_reference)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TraceFormatError as exc:
        print(f"error: invalid trace: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
