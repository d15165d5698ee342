import math

import pytest

import scaleout.sweep
from scaleout import (
    DEFAULT_RATIO_GRID,
    AddCostModel,
    ClusterConfig,
    CompressionModel,
    FusionConfig,
    ReferencePoint,
    SimConfig,
    SweepError,
    SweepSpec,
    default_add_model,
    load_profile,
    min_ratio_for_target,
    run_sweep,
    simulate,
)


@pytest.fixture(scope="module")
def resnet50():
    return load_profile("resnet50")


@pytest.fixture(scope="module")
def vgg16():
    return load_profile("vgg16")


class TestSpecValidation:
    def test_empty_lists_rejected(self, resnet50):
        with pytest.raises(ValueError, match="worker_counts"):
            SweepSpec(resnet50, (), (100e9,))
        with pytest.raises(ValueError, match="bandwidths_bps"):
            SweepSpec(resnet50, (16,), ())
        with pytest.raises(ValueError, match="compression_ratios"):
            SweepSpec(resnet50, (16,), (100e9,), ())

    def test_bad_values_rejected(self, resnet50):
        with pytest.raises(ValueError):
            SweepSpec(resnet50, (0,), (100e9,))
        with pytest.raises(ValueError):
            SweepSpec(resnet50, (16,), (0.0,))
        with pytest.raises(ValueError):
            SweepSpec(resnet50, (16,), (100e9,), (0.5,))


class TestRunSweep:
    def test_cartesian_count_and_lexicographic_order(self, resnet50):
        spec = SweepSpec(
            trace=resnet50,
            worker_counts=(32, 16),
            bandwidths_bps=(100e9, 1e9, 25e9),
            compression_ratios=(2.0, 1.0),
        )
        rows = run_sweep(spec)
        assert len(rows) == 12
        keys = [(r.n_workers, r.bandwidth_bps, r.compression_ratio) for r in rows]
        assert keys == sorted(keys)

    def test_bandwidth_axis_gives_five_rows(self, resnet50):
        spec = SweepSpec(
            trace=resnet50,
            worker_counts=(16,),
            bandwidths_bps=tuple(g * 1e9 for g in (1, 10, 25, 40, 100)),
        )
        assert len(run_sweep(spec)) == 5

    def test_single_point_matches_direct_simulate(self, resnet50):
        spec = SweepSpec(trace=resnet50, worker_counts=(16,), bandwidths_bps=(25e9,))
        row = run_sweep(spec)[0]
        res = simulate(
            resnet50,
            SimConfig(
                cluster=ClusterConfig(16, 25e9),
                fusion=spec.fusion,
                compression=CompressionModel(1.0),
                add_model=spec.add_model,
            ),
        )
        assert row.f_sim == res.f_sim
        assert row.t_overhead == res.t_overhead

    def test_parallel_evaluation_is_order_stable(self, vgg16):
        spec = SweepSpec(
            trace=vgg16,
            worker_counts=(2, 4, 8, 16),
            bandwidths_bps=(1e9, 10e9, 100e9),
            compression_ratios=(1.0, 2.0),
        )
        assert run_sweep(spec, max_parallel=8) == run_sweep(spec, max_parallel=1)

    def test_reference_join(self, resnet50):
        spec = SweepSpec(
            trace=resnet50,
            worker_counts=(12, 16, 64),
            bandwidths_bps=(10e9, 100e9),
            compression_ratios=(1.0, 5.0),
        )
        rows = {(r.n_workers, r.bandwidth_bps, r.compression_ratio): r for r in run_sweep(spec)}
        # 16 workers = 2 servers at 100 Gbps: matched regardless of ratio
        assert rows[(16, 100e9, 1.0)].reference_f == 0.7505
        assert rows[(16, 100e9, 5.0)].reference_f == 0.7505
        assert rows[(64, 100e9, 1.0)].reference_f == 0.716
        # not a whole number of servers, or wrong bandwidth: no match
        assert rows[(12, 100e9, 1.0)].reference_f is None
        assert rows[(16, 10e9, 1.0)].reference_f is None

    def test_reference_join_with_custom_points(self, resnet50):
        refs = (ReferencePoint("resnet50", 3, 10e9, 0.42),)
        spec = SweepSpec(trace=resnet50, worker_counts=(24,), bandwidths_bps=(10e9,))
        row = run_sweep(spec, references=refs)[0]
        assert row.reference_f == 0.42

    def test_f_sim_non_decreasing_in_ratio_on_vgg16(self, vgg16):
        spec = SweepSpec(
            trace=vgg16,
            worker_counts=(16,),
            bandwidths_bps=(10e9,),
            compression_ratios=(1.0, 2.0, 5.0, 10.0),
        )
        rows = run_sweep(spec)
        assert len(rows) == 4
        fs = [r.f_sim for r in rows]
        assert fs == sorted(fs)

    def test_simulation_error_identifies_point(self, resnet50, monkeypatch):
        def boom(trace, config):
            raise ValueError("synthetic failure")

        monkeypatch.setattr(scaleout.sweep, "simulate", boom)
        spec = SweepSpec(trace=resnet50, worker_counts=(16,), bandwidths_bps=(25e9,))
        with pytest.raises(SweepError, match=r"n_workers=16") as exc_info:
            run_sweep(spec)
        assert "synthetic failure" in str(exc_info.value)


class TestMinRatio:
    def test_grid_default(self):
        assert DEFAULT_RATIO_GRID == (1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 20.0, 50.0, 100.0)

    def test_infinite_bandwidth_needs_no_compression(self, resnet50):
        got = min_ratio_for_target(
            resnet50, ClusterConfig(16, math.inf), FusionConfig(),
            AddCostModel.zero(), 0.999,
        )
        assert got == 1.0

    def test_unreachable_returns_none(self, vgg16):
        got = min_ratio_for_target(
            vgg16, ClusterConfig(16, 1e9), FusionConfig(),
            default_add_model(), 0.999, ratio_grid=(1.0, 2.0),
        )
        assert got is None

    def test_monotone_in_target(self, vgg16):
        cluster = ClusterConfig(16, 10e9)
        results = [
            min_ratio_for_target(vgg16, cluster, FusionConfig(), default_add_model(), t)
            for t in (0.5, 0.9, 0.99, 0.9999)
        ]
        ranked = [math.inf if r is None else r for r in results]
        assert ranked == sorted(ranked)

    def test_validation(self, resnet50):
        cluster = ClusterConfig(16, 10e9)
        with pytest.raises(ValueError, match="empty"):
            min_ratio_for_target(resnet50, cluster, FusionConfig(), AddCostModel.zero(),
                                 0.9, ratio_grid=())
        with pytest.raises(ValueError, match="sorted"):
            min_ratio_for_target(resnet50, cluster, FusionConfig(), AddCostModel.zero(),
                                 0.9, ratio_grid=(2.0, 1.0))
        with pytest.raises(ValueError, match=">= 1"):
            min_ratio_for_target(resnet50, cluster, FusionConfig(), AddCostModel.zero(),
                                 0.9, ratio_grid=(0.5, 1.0))
        for bad_target in (0.0, 1.0, 1.5, -0.1):
            with pytest.raises(ValueError, match="target_f"):
                min_ratio_for_target(resnet50, cluster, FusionConfig(), AddCostModel.zero(),
                                     bad_target)
