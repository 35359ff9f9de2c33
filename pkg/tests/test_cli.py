import os

import pytest

from wptdas.cli import main

SWEEP_CONFIG = """\
[experiment]
realizations = 10
antenna_sweep = 1, 4
frequency_sweep = 1, 15
seed = 3
"""


def run(args, tmp_path, extra=()):
    return main([*args, "--out", str(tmp_path), *extra])


class TestBudget:
    def test_default_reproduces_reference_numbers(self, tmp_path, capsys):
        assert run(["budget"], tmp_path) == 0
        out = capsys.readouterr().out
        assert "63.780 uJ" in out
        assert "10.400 uJ" in out
        assert "7.680 uJ" in out
        assert "45.700 uJ" in out
        assert "71.7 %" in out
        assert (tmp_path / "budget.txt").exists()

    def test_byte_identical_reruns(self, tmp_path):
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        assert run(["budget", "--quiet"], a_dir) == 0
        assert run(["budget", "--quiet"], b_dir) == 0
        assert (a_dir / "budget.txt").read_bytes() == (b_dir / "budget.txt").read_bytes()


class TestFrame:
    def test_same_seed_identical_event_logs(self, tmp_path):
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        assert run(["frame", "--seed", "1", "--quiet"], a_dir) == 0
        assert run(["frame", "--seed", "1", "--quiet"], b_dir) == 0
        a = (a_dir / "frame_events.csv").read_bytes()
        assert a == (b_dir / "frame_events.csv").read_bytes()
        assert b"FrameEnd" in a

    def test_different_seed_differs(self, tmp_path):
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        run(["frame", "--seed", "1", "--quiet"], a_dir)
        run(["frame", "--seed", "2", "--quiet"], b_dir)
        assert (a_dir / "frame_events.csv").read_bytes() != \
            (b_dir / "frame_events.csv").read_bytes()

    def test_summary_on_stdout(self, tmp_path, capsys):
        assert run(["frame", "--seed", "1"], tmp_path) == 0
        out = capsys.readouterr().out
        assert "selected antenna" in out
        assert "5 control bytes" in out


class TestSweep:
    def test_row_count(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(SWEEP_CONFIG)
        assert run(["sweep", "--config", str(cfg), "--quiet"], tmp_path) == 0
        lines = (tmp_path / "sweep_results.csv").read_text().splitlines()
        data = [ln for ln in lines if ln and not ln.startswith("#")]
        # header + 2x2 cells x 4 strategies
        assert data[0].startswith("M,N,strategy,user")
        assert len(data) == 1 + 4 * 4

    def test_deterministic(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(SWEEP_CONFIG)
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        run(["sweep", "--config", str(cfg), "--quiet"], a_dir)
        run(["sweep", "--config", str(cfg), "--quiet"], b_dir)
        assert (a_dir / "sweep_results.csv").read_bytes() == \
            (b_dir / "sweep_results.csv").read_bytes()

    def test_seed_override_changes_results(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(SWEEP_CONFIG)
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        run(["sweep", "--config", str(cfg), "--quiet"], a_dir)
        run(["sweep", "--config", str(cfg), "--seed", "99", "--quiet"], b_dir)
        assert (a_dir / "sweep_results.csv").read_bytes() != \
            (b_dir / "sweep_results.csv").read_bytes()

    def test_protocol_pipeline(self, tmp_path):
        cfg = tmp_path / "proto.ini"
        cfg.write_text("[experiment]\npipeline = protocol\nrealizations = 3\n"
                       "antenna_sweep = 4\nfrequency_sweep = 15\nseed = 3\n")
        assert run(["sweep", "--config", str(cfg), "--quiet"], tmp_path) == 0
        text = (tmp_path / "sweep_results.csv").read_text()
        assert "# kind=protocol" in text


class TestTdma:
    def test_trace_written(self, tmp_path, capsys):
        cfg = tmp_path / "tdma.ini"
        cfg.write_text("[experiment]\nusers = 2\nframes = 4\nseed = 5\n")
        assert run(["tdma", "--config", str(cfg)], tmp_path) == 0
        lines = (tmp_path / "tdma_trace.csv").read_text().splitlines()
        data = [ln for ln in lines if not ln.startswith("#")]
        assert data[0] == "frame,user,active_flag,antenna,frequency,p_dc_watts,energy_joules"
        assert len(data) == 1 + 4 * 2
        assert "user 1" in capsys.readouterr().out


class TestValidate:
    def test_accepts_what_sweep_accepts(self, tmp_path, capsys):
        cfg = tmp_path / "ok.ini"
        cfg.write_text(SWEEP_CONFIG)
        assert run(["validate", "--config", str(cfg)], tmp_path) == 0
        assert "OK" in capsys.readouterr().out

    def test_rejects_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[experiment]\nrealisations = 10\n")
        assert run(["validate", "--config", str(cfg)], tmp_path) == 1
        assert "error" in capsys.readouterr().err

    def test_rejects_unknown_section(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[waveform]\npapr = 1\n")
        assert run(["validate", "--config", str(cfg)], tmp_path) == 1

    def test_rejects_bad_strategy(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[experiment]\nstrategies = beamforming\n")
        assert run(["validate", "--config", str(cfg)], tmp_path) == 1
        assert run(["sweep", "--config", str(cfg)], tmp_path) == 1

    def test_rejects_oversized_frequency_subset(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[experiment]\nfrequency_sweep = 20\n")
        assert run(["validate", "--config", str(cfg)], tmp_path) == 1

    def test_rejects_candidate_set_beyond_feedback_space(self, tmp_path, capsys):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[experiment]\nantenna_sweep = 5\n")  # 5 x 15 = 75 > 64
        assert run(["validate", "--config", str(cfg)], tmp_path) == 1
        assert "feedback" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert run(["validate", "--config", str(tmp_path / "nope.ini")], tmp_path) == 1
        assert "error" in capsys.readouterr().err

    def test_empty_config_ok(self, tmp_path):
        cfg = tmp_path / "empty.ini"
        cfg.write_text("")
        assert run(["validate", "--config", str(cfg)], tmp_path) == 0


class TestFlags:
    def test_unknown_flag_exits_two(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["budget", "--frobnicate"])
        assert exc.value.code == 2

    def test_quiet_suppresses_stdout(self, tmp_path, capsys):
        assert run(["budget", "--quiet"], tmp_path) == 0
        assert capsys.readouterr().out == ""

    def test_env_var_output_dir(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("WPTDAS_OUT", str(tmp_path / "envout"))
        assert main(["budget", "--quiet"]) == 0
        assert (tmp_path / "envout" / "budget.txt").exists()

    def test_bad_seed_rejected(self, tmp_path, capsys):
        assert run(["budget", "--seed", "-4"], tmp_path) == 1
        assert "seed" in capsys.readouterr().err
