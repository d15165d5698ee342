import json
import subprocess
import sys

import pytest

from scaleout import (
    ClusterConfig,
    CompressionModel,
    FusionConfig,
    SimConfig,
    default_add_model,
    load_profile,
    load_trace,
    reference_csv,
    simulate,
)
from scaleout.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_proc(*args):
    return subprocess.run(
        [sys.executable, "-m", "scaleout", *args],
        capture_output=True,
        text=True,
    )


class TestSynth:
    def test_writes_parseable_trace_with_bundled_timings(self, tmp_path, capsys):
        out = tmp_path / "vgg16.trace"
        code, stdout, _ = run_cli(["synth", "--model", "vgg16", "-o", str(out)], capsys)
        assert code == EXIT_OK
        trace = load_trace(str(out))
        assert trace.name == "vgg16"
        assert trace.total_bytes == 527_000_000
        assert trace.t_batch == 0.206
        assert trace.t_back == 0.132
        assert len(trace.events) == 32
        assert "32 events" in stdout
        assert "527000000 bytes" in stdout

    def test_custom_timings(self, tmp_path, capsys):
        out = tmp_path / "r50.trace"
        code, _, _ = run_cli(
            ["synth", "--model", "resnet50", "--t-batch", "0.3", "--t-back", "0.2",
             "-o", str(out)],
            capsys,
        )
        assert code == EXIT_OK
        trace = load_trace(str(out))
        assert trace.t_batch == 0.3
        assert trace.t_back == 0.2

    def test_inverted_timings_fail_validation(self, tmp_path, capsys):
        out = tmp_path / "bad.trace"
        code, _, stderr = run_cli(
            ["synth", "--model", "resnet50", "--t-batch", "0.1", "--t-back", "0.2",
             "-o", str(out)],
            capsys,
        )
        assert code == EXIT_VALIDATION
        assert "error" in stderr
        assert not out.exists()


class TestSimulate:
    def test_report_matches_library_bit_for_bit(self, capsys):
        trace = load_profile("resnet50")
        res = simulate(
            trace,
            SimConfig(
                cluster=ClusterConfig(16, 25e9),
                fusion=FusionConfig(),
                compression=CompressionModel(1.0),
                add_model=default_add_model(),
            ),
        )
        code, stdout, _ = run_cli(
            ["simulate", "--model", "resnet50", "--workers", "16",
             "--bandwidth-gbps", "25"],
            capsys,
        )
        assert code == EXIT_OK
        assert f"f_sim: {res.f_sim!r}" in stdout
        assert f"t_sync_s: {res.t_sync!r}" in stdout
        assert "resnet50: N=16 @ 25 Gbps ratio=1" in stdout

    def test_single_worker_scales_perfectly(self, capsys):
        code, stdout, _ = run_cli(
            ["simulate", "--model", "vgg16", "--workers", "1"], capsys
        )
        assert code == EXIT_OK
        assert "f_sim: 1.0" in stdout
        assert "t_overhead_s: 0.0" in stdout

    def test_trace_file_input_and_flush_log(self, tmp_path, capsys):
        trace_path = tmp_path / "m.trace"
        assert run_cli(["synth", "--model", "resnet50", "-o", str(trace_path)], capsys)[0] == EXIT_OK
        log_path = tmp_path / "flush.csv"
        code, stdout, _ = run_cli(
            ["simulate", "--trace", str(trace_path), "--workers", "8",
             "--flush-log", str(log_path)],
            capsys,
        )
        assert code == EXIT_OK
        lines = log_path.read_text().splitlines()
        assert lines[0] == "flush_time_s,start_s,end_s,bytes"
        assert len(lines) > 1


class TestSweep:
    def body(self, path):
        return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]

    def test_outputs_and_row_count(self, tmp_path, capsys):
        code, stdout, _ = run_cli(
            ["sweep", "--model", "resnet50", "--workers", "16",
             "--bandwidths-gbps", "1,10,25,40,100",
             "--out-dir", str(tmp_path), "--name", "run"],
            capsys,
        )
        assert code == EXIT_OK
        body = self.body(tmp_path / "run.csv")
        assert body[0].startswith("model,")
        assert len(body) == 6
        svg = (tmp_path / "run.svg").read_text()
        assert svg.startswith("<svg ")
        assert "config_digest:" in stdout

    def test_reference_column_filled_on_match(self, tmp_path, capsys):
        run_cli(
            ["sweep", "--model", "resnet50", "--workers", "16",
             "--bandwidths-gbps", "100", "--out-dir", str(tmp_path), "--name", "ref"],
            capsys,
        )
        row = self.body(tmp_path / "ref.csv")[1]
        assert row.split(",")[-1] == "0.7505"

    def test_reruns_are_identical_apart_from_timestamps(self, tmp_path, capsys):
        argv = ["sweep", "--model", "resnet101", "--workers", "8,16",
                "--bandwidths-gbps", "10,100", "--ratios", "1,2"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_cli(argv + ["--out-dir", str(a)], capsys)[0] == EXIT_OK
        assert run_cli(argv + ["--out-dir", str(b)], capsys)[0] == EXIT_OK
        assert self.body(a / "sweep.csv") == self.body(b / "sweep.csv")
        assert (a / "sweep.svg").read_bytes() == (b / "sweep.svg").read_bytes()

    def test_spec_file_drives_run(self, tmp_path, capsys):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "models": ["resnet50"],
            "workers": [16, 32],
            "bandwidths_gbps": [10, 100],
            "name": "fromspec",
        }))
        code, _, _ = run_cli(
            ["sweep", "--spec", str(spec), "--out-dir", str(tmp_path)], capsys
        )
        assert code == EXIT_OK
        assert len(self.body(tmp_path / "fromspec.csv")) == 5

    def test_flags_override_spec_file(self, tmp_path, capsys):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "models": ["resnet50"], "workers": [16, 32], "bandwidths_gbps": [100],
        }))
        code, _, _ = run_cli(
            ["sweep", "--spec", str(spec), "--workers", "8",
             "--out-dir", str(tmp_path), "--name", "over"],
            capsys,
        )
        assert code == EXIT_OK
        body = self.body(tmp_path / "over.csv")
        assert len(body) == 2
        assert body[1].split(",")[1] == "8"

    def test_unknown_spec_field_rejected(self, tmp_path, capsys):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"models": ["resnet50"], "wrokers": [16]}))
        code, _, stderr = run_cli(["sweep", "--spec", str(spec)], capsys)
        assert code == EXIT_VALIDATION
        assert "wrokers" in stderr

    def test_no_input_model_rejected(self, capsys):
        code, _, stderr = run_cli(["sweep", "--workers", "16"], capsys)
        assert code == EXIT_VALIDATION
        assert "no input model" in stderr


class TestCompressRatio:
    def test_reports_minimum_grid_ratio(self, capsys):
        code, stdout, _ = run_cli(
            ["compress-ratio", "--model", "resnet50", "--workers", "16",
             "--bandwidth-gbps", "10", "--target", "0.99"],
            capsys,
        )
        assert code == EXIT_OK
        assert "min_ratio: 3.0" in stdout

    def test_unreachable_target_is_reported(self, capsys):
        code, stdout, _ = run_cli(
            ["compress-ratio", "--model", "vgg16", "--workers", "64",
             "--bandwidth-gbps", "1", "--target", "0.99", "--ratios", "1,2"],
            capsys,
        )
        assert code == EXIT_OK
        assert "min_ratio: none (target unreachable on grid)" in stdout

    def test_out_of_range_target_rejected(self, capsys):
        code, _, stderr = run_cli(
            ["compress-ratio", "--model", "vgg16", "--workers", "16",
             "--target", "1.0"],
            capsys,
        )
        assert code == EXIT_VALIDATION
        assert "target_f" in stderr


class TestReference:
    def test_stdout_matches_bundled_csv(self, capsys):
        code, stdout, _ = run_cli(["reference"], capsys)
        assert code == EXIT_OK
        assert stdout == reference_csv()

    def test_file_output(self, tmp_path, capsys):
        out = tmp_path / "ref.csv"
        code, _, _ = run_cli(["reference", "-o", str(out)], capsys)
        assert code == EXIT_OK
        assert out.read_text() == reference_csv()


class TestProcessExitCodes:
    """The documented contract: 0 ok, 2 usage, 3 validation, 4 i/o."""

    def test_no_arguments_is_usage_error(self):
        assert run_proc().returncode == EXIT_USAGE

    def test_unknown_subcommand_is_usage_error(self):
        assert run_proc("frobnicate").returncode == EXIT_USAGE

    def test_unknown_model_is_usage_error(self, tmp_path):
        proc = run_proc("synth", "--model", "alexnet", "-o", str(tmp_path / "x"))
        assert proc.returncode == EXIT_USAGE

    def test_missing_required_flag_is_usage_error(self):
        assert run_proc("simulate", "--model", "vgg16").returncode == EXIT_USAGE

    def test_missing_trace_file_is_io_error(self):
        proc = run_proc("simulate", "--trace", "/nonexistent/path.trace", "--workers", "4")
        assert proc.returncode == EXIT_IO
        assert "i/o error" in proc.stderr

    def test_malformed_trace_is_validation_error(self, tmp_path):
        bad = tmp_path / "bad.trace"
        bad.write_text("this is not a trace\n")
        proc = run_proc("simulate", "--trace", str(bad), "--workers", "4")
        assert proc.returncode == EXIT_VALIDATION
        assert "invalid trace" in proc.stderr

    def test_empty_bandwidth_list_is_validation_error(self):
        proc = run_proc("sweep", "--model", "resnet50", "--bandwidths-gbps", ",")
        assert proc.returncode == EXIT_VALIDATION

    def test_version_runs_clean(self):
        proc = run_proc("--version")
        assert proc.returncode == EXIT_OK
        assert proc.stdout.startswith("scaleout ")

    def test_happy_path_subprocess(self, tmp_path):
        proc = run_proc("simulate", "--model", "resnet50", "--workers", "2")
        assert proc.returncode == EXIT_OK
        assert "f_sim:" in proc.stdout


class TestEntryPoint:
    def test_console_script_installed(self):
        proc = subprocess.run(
            ["scaleout", "--version"], capture_output=True, text=True
        )
        assert proc.returncode == EXIT_OK


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
