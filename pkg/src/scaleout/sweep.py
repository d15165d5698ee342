"""What-if parameter sweeps and joins against measured reference points."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .costmodel import AddCostModel, ClusterConfig, CompressionModel, default_add_model
from .fusion import FusionConfig
from .simengine import SimConfig, simulate
from .trace import ModelTrace, ReferencePoint, load_reference_data

# Candidate compression ratios tried in ascending order when hunting for
# the cheapest one that still hits a scaling-factor target.
DEFAULT_RATIO_GRID = (1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 20.0, 50.0, 100.0)

# Measured reference clusters pack this many workers per server.
WORKERS_PER_SERVER = 8


class SweepError(RuntimeError):
    """A sweep point failed; the message identifies the offending point."""


@dataclass(frozen=True)
class SweepSpec:
    """A Cartesian what-if grid over one model trace."""

    trace: ModelTrace
    worker_counts: tuple[int, ...]
    bandwidths_bps: tuple[float, ...]
    compression_ratios: tuple[float, ...] = (1.0,)
    fusion: FusionConfig = FusionConfig()
    add_model: AddCostModel = field(default_factory=default_add_model)

    def __post_init__(self):
        object.__setattr__(self, "worker_counts", tuple(self.worker_counts))
        object.__setattr__(self, "bandwidths_bps", tuple(self.bandwidths_bps))
        object.__setattr__(self, "compression_ratios", tuple(self.compression_ratios))
        if not self.worker_counts:
            raise ValueError("worker_counts is empty")
        if not self.bandwidths_bps:
            raise ValueError("bandwidths_bps is empty")
        if not self.compression_ratios:
            raise ValueError("compression_ratios is empty")
        for n in self.worker_counts:
            if n < 1:
                raise ValueError(f"worker counts must be >= 1, got {n}")
        for bw in self.bandwidths_bps:
            if not bw > 0:
                raise ValueError(f"bandwidths must be positive, got {bw!r}")
        for r in self.compression_ratios:
            if not r >= 1:
                raise ValueError(f"compression ratios must be >= 1, got {r!r}")


@dataclass(frozen=True)
class SweepRow:
    """One evaluated grid point, with any matching measured reference."""

    model: str
    n_workers: int
    bandwidth_bps: float
    compression_ratio: float
    f_sim: float
    t_overhead: float
    reference_f: float | None = None


def run_sweep(
    spec: SweepSpec,
    references: Sequence[ReferencePoint] | None = None,
    max_parallel: int = 1,
) -> list[SweepRow]:
    """Evaluate every grid point; rows sorted by (workers, bandwidth, ratio).

    references defaults to the bundled measured table. A reference matches
    a row when the model name agrees, the worker count is a whole number of
    8-worker servers equal to the reference's server count, and the
    bandwidth is identical; the match is annotated regardless of the row's
    compression ratio. Results are deterministic for a given spec whether
    or not points are evaluated in parallel.
    """
    if references is None:
        references = load_reference_data()
    lookup = {
        (p.model, p.servers, p.bandwidth_bps): p.measured_scaling_factor for p in references
    }
    points = [
        (n, bw, r)
        for n in spec.worker_counts
        for bw in spec.bandwidths_bps
        for r in spec.compression_ratios
    ]

    def eval_point(point: tuple[int, float, float]) -> SweepRow:
        n, bw, r = point
        try:
            res = simulate(
                spec.trace,
                SimConfig(
                    cluster=ClusterConfig(n_workers=n, bandwidth_bps=bw),
                    fusion=spec.fusion,
                    compression=CompressionModel(r),
                    add_model=spec.add_model,
                ),
            )
        except Exception as exc:
            raise SweepError(
                f"sweep point (model={spec.trace.name}, n_workers={n}, "
                f"bandwidth_bps={bw!r}, ratio={r!r}) failed: {exc}"
            ) from exc
        ref = None
        if n % WORKERS_PER_SERVER == 0:
            ref = lookup.get((spec.trace.name, n // WORKERS_PER_SERVER, bw))
        return SweepRow(spec.trace.name, n, bw, r, res.f_sim, res.t_overhead, ref)

    if max_parallel > 1:
        with ThreadPoolExecutor(max_workers=max_parallel) as pool:
            rows = list(pool.map(eval_point, points))
    else:
        rows = [eval_point(p) for p in points]
    rows.sort(key=lambda row: (row.n_workers, row.bandwidth_bps, row.compression_ratio))
    return rows


def min_ratio_for_target(
    trace: ModelTrace,
    cluster: ClusterConfig,
    fusion: FusionConfig,
    add_model: AddCostModel,
    target_f: float,
    ratio_grid: Iterable[float] = DEFAULT_RATIO_GRID,
) -> float | None:
    """Smallest grid ratio whose f_sim reaches target_f; None if none does."""
    grid = tuple(ratio_grid)
    if not grid:
        raise ValueError("ratio grid is empty")
    if any(r < 1 for r in grid):
        raise ValueError("ratios must be >= 1")
    if list(grid) != sorted(grid):
        raise ValueError("ratio grid must be sorted ascending")
    if not 0.0 < target_f < 1.0:
        raise ValueError(f"target_f must lie strictly in (0, 1), got {target_f!r}")
    for ratio in grid:
        res = simulate(
            trace,
            SimConfig(
                cluster=cluster,
                fusion=fusion,
                compression=CompressionModel(ratio),
                add_model=add_model,
            ),
        )
        if res.f_sim >= target_f:
            return ratio
    return None
