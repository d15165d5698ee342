"""Ring all-reduce pricing: wire transmission plus reduction vector-adds."""

from __future__ import annotations

import csv
import io
import time
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

BITS_PER_BYTE = 8

# Effective memory bandwidth (bytes/s) behind the default vector-add
# estimator. An element-wise add touches ~3 bytes of memory per payload
# byte, and a V100-class accelerator sustains roughly 800 GB/s on that
# pattern. This is an assumption about the simulated cluster, not a
# property of the machine running the simulation; replace it with
# calibrate_add_model() samples when modelling other hardware.
DEFAULT_ADD_EFFECTIVE_BANDWIDTH = 800e9
ADD_TRAFFIC_FACTOR = 3.0


@dataclass(frozen=True)
class ClusterConfig:
    """Worker count and per-link bandwidth of the simulated ring."""

    n_workers: int
    bandwidth_bps: float

    def __post_init__(self):
        if self.n_workers < 1:
            raise ValueError(f"n_workers must be >= 1, got {self.n_workers}")
        if not self.bandwidth_bps > 0:
            raise ValueError(f"bandwidth_bps must be positive, got {self.bandwidth_bps!r}")


@dataclass(frozen=True)
class CompressionModel:
    """Idealized gradient compression: wire time divides by ratio."""

    ratio: float = 1.0

    def __post_init__(self):
        if not self.ratio >= 1.0:
            raise ValueError(f"compression ratio must be >= 1, got {self.ratio!r}")


NO_COMPRESSION = CompressionModel(1.0)


@dataclass(frozen=True)
class AddCostModel:
    """Piecewise-linear cost of element-wise adding a gradient shard.

    samples is a sorted table of (size_bytes, seconds) anchored at (0, 0);
    sizes strictly increase and durations never decrease. Queries between
    samples interpolate linearly; queries past the last sample extend its
    final segment's slope (zero for the single-sample model).
    """

    samples: tuple[tuple[int, float], ...]

    def __post_init__(self):
        samples = tuple((int(s), float(d)) for s, d in self.samples)
        object.__setattr__(self, "samples", samples)
        if not samples:
            raise ValueError("add cost model needs at least the (0, 0) sample")
        if samples[0] != (0, 0.0):
            raise ValueError(f"first sample must be (0, 0), got {samples[0]!r}")
        for (s0, d0), (s1, d1) in zip(samples, samples[1:]):
            if s1 <= s0:
                raise ValueError(f"sample sizes must strictly increase ({s0} then {s1})")
            if d1 < d0:
                raise ValueError(f"sample durations must not decrease ({d0!r} then {d1!r})")
        object.__setattr__(self, "_sizes", tuple(s for s, _ in samples))
        object.__setattr__(self, "_durations", tuple(d for _, d in samples))

    @classmethod
    def zero(cls) -> "AddCostModel":
        """A model under which adds are free."""
        return cls(((0, 0.0),))

    @classmethod
    def from_effective_bandwidth(
        cls,
        bandwidth_bps: float = DEFAULT_ADD_EFFECTIVE_BANDWIDTH,
        traffic_factor: float = ADD_TRAFFIC_FACTOR,
    ) -> "AddCostModel":
        """A linear model: traffic_factor bytes of memory traffic per payload byte."""
        if not bandwidth_bps > 0:
            raise ValueError(f"bandwidth_bps must be positive, got {bandwidth_bps!r}")
        if not traffic_factor > 0:
            raise ValueError(f"traffic_factor must be positive, got {traffic_factor!r}")
        anchor = 1 << 20
        return cls(((0, 0.0), (anchor, traffic_factor * anchor / bandwidth_bps)))

    @classmethod
    def from_csv(cls, text: str) -> "AddCostModel":
        """Build a model from two-column CSV text: size_bytes, seconds.

        A header row is skipped if present; a missing (0, 0) anchor is
        prepended since every physical add passes through the origin.
        """
        samples: list[tuple[int, float]] = []
        for row in csv.reader(io.StringIO(text)):
            cells = [c.strip() for c in row if c.strip()]
            if not cells:
                continue
            if len(cells) != 2:
                raise ValueError(f"expected two columns (size_bytes, seconds), got {row!r}")
            try:
                samples.append((int(float(cells[0])), float(cells[1])))
            except ValueError:
                if not samples:  # tolerate one header row
                    continue
                raise ValueError(f"non-numeric add-cost row {row!r}") from None
        if not samples:
            raise ValueError("add cost CSV holds no samples")
        samples.sort()
        if samples[0][0] != 0:
            samples.insert(0, (0, 0.0))
        return cls(tuple(samples))


def default_add_model() -> AddCostModel:
    """The shipped V100-class linear add model (see DEFAULT_ADD_EFFECTIVE_BANDWIDTH)."""
    return AddCostModel.from_effective_bandwidth()


def add_est(model: AddCostModel, size_bytes: int) -> float:
    """Estimated seconds to element-wise add a shard of size_bytes."""
    if size_bytes < 0:
        raise ValueError(f"size_bytes must be >= 0, got {size_bytes}")
    sizes: Sequence[int] = model._sizes
    durs: Sequence[float] = model._durations
    last = len(sizes) - 1
    j = bisect_right(sizes, size_bytes) - 1
    if j == last:
        if last == 0:
            return 0.0  # single-sample model: adds are free
        j = last - 1  # extrapolate along the final segment
    s0, s1 = sizes[j], sizes[j + 1]
    d0, d1 = durs[j], durs[j + 1]
    return d0 + (size_bytes - s0) * (d1 - d0) / (s1 - s0)


def transmission_time(
    size_bytes: int, cluster: ClusterConfig, compression: CompressionModel = NO_COMPRESSION
) -> float:
    """Wire time of a ring all-reduce: 2*S*(N-1)/N bytes cross each link."""
    if size_bytes < 0:
        raise ValueError(f"size_bytes must be >= 0, got {size_bytes}")
    n = cluster.n_workers
    if n == 1 or size_bytes == 0:
        return 0.0
    bits = 2.0 * size_bytes * BITS_PER_BYTE * (n - 1) / n
    return bits / cluster.bandwidth_bps / compression.ratio


def shard_size(size_bytes: int, n_workers: int) -> int:
    """Per-worker ring shard: size / N rounded half up, in whole bytes."""
    return (2 * int(size_bytes) + n_workers) // (2 * n_workers)


def allreduce_cost(
    size_bytes: int,
    cluster: ClusterConfig,
    add_model: AddCostModel,
    compression: CompressionModel = NO_COMPRESSION,
) -> float:
    """Total ring all-reduce time: transmission plus (N-1) shard adds."""
    n = cluster.n_workers
    if n == 1:
        return 0.0
    wire = transmission_time(size_bytes, cluster, compression)
    return wire + (n - 1) * add_est(add_model, shard_size(size_bytes, n))


def calibrate_add_model(
    sizes: Iterable[int] = (1 << 20, 4 << 20, 16 << 20, 64 << 20), repeats: int = 5
) -> AddCostModel:
    """Measure float32 element-wise adds on this host and build a model.

    This times the machine the simulator runs on, which is usually far
    slower than the accelerators being modelled; use it when the simulated
    workers actually are this host, or as a template for importing numbers
    measured elsewhere (see AddCostModel.from_csv).
    """
    import numpy as np  # deferred: only calibration needs it

    samples: list[tuple[int, float]] = [(0, 0.0)]
    prev = 0.0
    for size in sorted(set(int(s) for s in sizes)):
        if size <= 0:
            raise ValueError(f"calibration sizes must be positive, got {size}")
        n = max(1, size // 4)
        a = np.random.default_rng(0).random(n, dtype=np.float32)
        b = np.random.default_rng(1).random(n, dtype=np.float32)
        out = np.empty_like(a)
        best = min(_timed_add(np, a, b, out) for _ in range(max(1, repeats)))
        prev = max(prev, best)  # keep the table monotone despite timer noise
        samples.append((size, prev))
    return AddCostModel(tuple(samples))


def _timed_add(np, a, b, out) -> float:
    start = time.perf_counter()
    np.add(a, b, out=out)
    return time.perf_counter() - start
