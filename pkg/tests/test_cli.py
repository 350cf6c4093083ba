import json
import subprocess
import sys

import pytest

from monitoreval import cli
from monitoreval.traces import (
    Box,
    DetectionFrameRecord,
    LandingCandidate,
    LandingImageRecord,
    save_traces,
)


def run_cli(*argv):
    return cli.main(list(argv))


def test_generate_then_evaluate_table1(tmp_path, capsys):
    trace = tmp_path / "table1.jsonl"
    assert run_cli("generate", "table1", "--out", str(trace)) == 0
    assert run_cli("evaluate", str(trace), "--scheme", "clf-error") == 0
    out = capsys.readouterr().out
    assert "0.184 0.140 0.304" in out
    assert "hazard_f: 0.324" in out


def test_report_file_is_stable_and_well_formed(tmp_path, capsys):
    trace = tmp_path / "table1.jsonl"
    run_cli("generate", "table1", "--out", str(trace))
    report_a = tmp_path / "a.json"
    report_b = tmp_path / "b.json"
    assert run_cli("evaluate", str(trace), "--scheme", "clf-error", "--out", str(report_a)) == 0
    assert run_cli("evaluate", str(trace), "--scheme", "clf-error", "--out", str(report_b)) == 0
    assert report_a.read_bytes() == report_b.read_bytes()

    obj = json.loads(report_a.read_text())
    assert list(obj) == [
        "scheme", "n", "sg", "rh", "ac", "hazard_f", "params_echo", "decomposition_residual",
    ]
    assert obj["scheme"] == "clf-error"
    assert obj["n"] == 1000
    assert obj["sg"] == 0.184
    assert obj["decomposition_residual"] < 1e-12
    assert list(obj["params_echo"]) == [
        "iou_threshold", "score_threshold", "kappa", "default_action_score",
        "normalize_safety", "normalize_mission",
    ]


def test_generate_threat_then_evaluate(tmp_path, capsys):
    trace = tmp_path / "threat.jsonl"
    assert run_cli(
        "generate", "threat", "--n", "1000", "--threats", "500",
        "--detected", "344", "--false-alarms", "144", "--out", str(trace),
    ) == 0
    assert run_cli("evaluate", str(trace), "--scheme", "clf-threat") == 0
    assert "0.344 0.156 0.144" in capsys.readouterr().out


def test_generate_is_byte_deterministic(tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    run_cli("generate", "classification", "--n", "20", "--errors", "8",
            "--true-alarms", "4", "--false-alarms", "2", "--out", str(a))
    run_cli("generate", "classification", "--n", "20", "--errors", "8",
            "--true-alarms", "4", "--false-alarms", "2", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_generate_invalid_counts_is_argument_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli(
            "generate", "classification", "--n", "4", "--errors", "9",
            "--true-alarms", "0", "--false-alarms", "0",
            "--out", str(tmp_path / "x.jsonl"),
        )
    assert exc.value.code == 2


def test_scheme_file_mismatch_fails(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    run_cli("generate", "table1", "--out", str(trace))
    assert run_cli("evaluate", str(trace), "--scheme", "clf-threat") == 1
    assert "scheme" in capsys.readouterr().err


def test_missing_input_fails(tmp_path, capsys):
    assert run_cli("evaluate", str(tmp_path / "nope.jsonl"), "--scheme", "clf-error") == 1
    assert "error" in capsys.readouterr().err


def test_empty_candidate_landing_image_fails_validation(tmp_path, capsys):
    record = LandingImageRecord("img0", (), "default", "default", "default")
    trace = tmp_path / "landing.jsonl"
    save_traces([record], trace, "landing-e1")
    assert run_cli("evaluate", str(trace), "--scheme", "landing-e1") == 1
    assert "no candidates" in capsys.readouterr().err


def test_landing_e2_with_kappa_flags(tmp_path, capsys):
    record = LandingImageRecord(
        "img0",
        (LandingCandidate("c0", 0, 0.2, 0),),
        "c0",
        "default",
        "c0",
    )
    trace = tmp_path / "landing2.jsonl"
    save_traces([record], trace, "landing-e2")
    assert run_cli(
        "evaluate", str(trace), "--scheme", "landing-e2", "--kappa", "0.5"
    ) == 0
    out = capsys.readouterr().out
    assert "-0.400 0.400 0.000" in out  # monitor rejected the only safe zone


def test_det_error_end_to_end(tmp_path, capsys):
    frames = [
        DetectionFrameRecord(
            "f0",
            (Box(0.0, 0.0, 10.0, 10.0, 1),),
            (Box(0.0, 0.0, 10.0, 10.0, 1, 0.9),),
            0,
        ),
        DetectionFrameRecord("f1", (Box(0.0, 0.0, 10.0, 10.0, 1),), (), 1),
    ]
    trace = tmp_path / "det.jsonl"
    save_traces(frames, trace, "det-error")
    assert run_cli("evaluate", str(trace), "--scheme", "det-error") == 0
    assert "0.500 0.000 0.000" in capsys.readouterr().out


def test_normalization_flags(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    run_cli("generate", "table1", "--out", str(trace))
    report = tmp_path / "r.json"
    assert run_cli(
        "evaluate", str(trace), "--scheme", "clf-error",
        "--normalize-safety", "2", "--out", str(report),
    ) == 0
    obj = json.loads(report.read_text())
    assert obj["sg"] == 0.092
    assert obj["ac"] == 0.304
    assert obj["params_echo"]["normalize_safety"] == 2.0


def test_simulate_desk_then_evaluate_directory(tmp_path, capsys):
    out_dir = tmp_path / "traces"
    assert run_cli("simulate", "--suite", "desk", "--out", str(out_dir)) == 0
    assert sorted(p.name for p in out_dir.glob("*.jsonl")) == [
        "traces_f.jsonl",
        "traces_f_star.jsonl",
        "traces_f_with_monitor.jsonl",
    ]
    assert run_cli("evaluate", str(out_dir), "--scheme", "episodic") == 0
    assert "0.100 0.050 0.045" in capsys.readouterr().out


def test_simulate_default_suite_trace_count(tmp_path, capsys):
    out_dir = tmp_path / "traces"
    assert run_cli("simulate", "--out", str(out_dir)) == 0
    assert "53 scenarios x 3 variants = 159 traces" in capsys.readouterr().out


def test_simulate_same_seed_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    c = tmp_path / "c"
    run_cli("simulate", "--out", str(a), "--seed", "7")
    run_cli("simulate", "--out", str(b), "--seed", "7")
    run_cli("simulate", "--out", str(c), "--seed", "8")
    for name in ("traces_f.jsonl", "traces_f_with_monitor.jsonl", "traces_f_star.jsonl"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "traces_f.jsonl").read_bytes() != (c / "traces_f.jsonl").read_bytes()


def test_simulate_from_config_file(tmp_path, capsys):
    config = {
        "detector": {"base_miss_rate": 0.0, "ghost_rate": 0.0},
        "monitor": {"contrast_threshold": 0.5, "plausibility_window": 3},
        "scenarios": [{"seed": 1}, {"seed": 2}],
    }
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    out_dir = tmp_path / "traces"
    assert run_cli("simulate", "--config", str(path), "--out", str(out_dir)) == 0
    assert "2 scenarios x 3 variants = 6 traces" in capsys.readouterr().out


def test_self_check_gate_exits_3(tmp_path, capsys, monkeypatch):
    trace = tmp_path / "t.jsonl"
    run_cli("generate", "table1", "--out", str(trace))
    monkeypatch.setattr(cli, "decomposition_residual", lambda report: 1.0)
    assert run_cli("evaluate", str(trace), "--scheme", "clf-error") == 3
    assert "internal error" in capsys.readouterr().err


def test_console_entry_point_runs(tmp_path):
    trace = tmp_path / "t.jsonl"
    result = subprocess.run(
        [sys.executable, "-m", "monitoreval.cli", "generate", "table1", "--out", str(trace)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert trace.exists()
