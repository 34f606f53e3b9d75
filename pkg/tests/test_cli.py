"""End-to-end tests for the command line client."""

import json
import socket
import subprocess
import sys
import threading
import time
from fractions import Fraction

import httpx
import pytest
import uvicorn

from residua.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main
from residua.reports import CSV_HEADER, parse_exact_scalar
from residua.service import create_app


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- worked examples ---------------------------------------------------------


def test_ch_eval_example(capsys):
    code, out, _ = run_cli(
        capsys,
        ["ch-eval", "--factors", "z,z*w", "--weights", "3,1", "--testform", "z|dz^dw"],
    )
    assert code == EXIT_PASS
    body = json.loads(out)
    assert body["pass"] is True
    assert body["report"]["equal"] is True
    assert body["report"]["iterated"]["q"] == "0/1"


def test_duality_example_fails(capsys):
    code, out, _ = run_cli(capsys, ["duality", "--ci", "z^2,w", "--g", "z"])
    assert code == EXIT_FAIL
    assert json.loads(out)["report"]["annihilated"] is False


def test_gamma_check_example(capsys):
    code, out, _ = run_cli(
        capsys,
        ["gamma-check", "--alpha", "[[1,0],[1,1]]", "--p", "2", "--sigma", "id",
         "--mu", "3,1"],
    )
    assert code == EXIT_PASS
    body = json.loads(out)
    assert body["report"]["curve_value"] == "0/1"
    assert body["report"]["iterated_value"] == "0/1"


def test_exact_values_reparse(capsys):
    _, out, _ = run_cli(
        capsys, ["ch-eval", "--factors", "z,w", "--testform", "1|dz^dw"]
    )
    report = json.loads(out)["report"]
    value, pi_power, i_bit = parse_exact_scalar(report["iterated"])
    assert (value, pi_power, i_bit) == (Fraction(-4), 2, 0)


# -- exit codes --------------------------------------------------------------


def test_parse_error_exits_usage(capsys):
    code, out, _ = run_cli(capsys, ["ch-eval", "--factors", "x1^0", "--testform", "z|dz"])
    assert code == EXIT_USAGE
    assert json.loads(out)["error"]["type"] == "ParseError"


def test_missing_field_exits_usage(capsys):
    code, out, _ = run_cli(capsys, ["ch-eval", "--testform", "z|dz"])
    assert code == EXIT_USAGE
    assert json.loads(out)["error"]["type"] == "ValidationError"


def test_no_command_exits_usage(capsys):
    assert run_cli(capsys, [])[0] == EXIT_USAGE


def test_unknown_command_exits_usage(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["bogus"])
    assert excinfo.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.strip() == "0.1.0"


# -- output targets and formats ----------------------------------------------


def test_out_writes_file(tmp_path, capsys):
    target = tmp_path / "record.json"
    code, out, _ = run_cli(
        capsys,
        ["duality", "--ci", "z^2,w", "--g", "z*w", "--out", str(target)],
    )
    assert code == EXIT_PASS
    assert out == ""
    assert json.loads(target.read_text())["pass"] is True


def test_out_bad_path_exits_usage(tmp_path, capsys):
    code, _, err = run_cli(
        capsys,
        ["duality", "--ci", "z", "--g", "z", "--out", str(tmp_path / "no" / "dir.json")],
    )
    assert code == EXIT_USAGE
    assert "cannot write" in err


def test_csv_format_for_quad(capsys):
    code, out, _ = run_cli(
        capsys,
        ["quad-compare", "--factors", "z", "--testform", "1|dz",
         "--nu", "2", "--deltas", "0.1,0.01", "--format", "csv"],
    )
    assert code == EXIT_PASS
    lines = out.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3


def test_csv_format_rejected_elsewhere(capsys):
    code, _, err = run_cli(
        capsys,
        ["ch-eval", "--factors", "z", "--testform", "z|dz", "--format", "csv"],
    )
    assert code == EXIT_USAGE
    assert "csv format" in err


# -- config file -------------------------------------------------------------


def test_config_supplies_flags(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps(
        {"factors": "z,z*w", "weights": [3, 1], "testform": "z|dz^dw"}
    ))
    code, from_config, _ = run_cli(capsys, ["ch-eval", "--config", str(config)])
    assert code == EXIT_PASS
    _, explicit, _ = run_cli(
        capsys,
        ["ch-eval", "--factors", "z,z*w", "--weights", "3,1", "--testform", "z|dz^dw"],
    )
    assert from_config == explicit


def test_explicit_flag_beats_config(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"ci": "z^2,w", "g": "z"}))
    code, out, _ = run_cli(
        capsys, ["duality", "--config", str(config), "--g", "z^2"]
    )
    assert code == EXIT_PASS
    assert json.loads(out)["inputs"]["g"] == "z^2"


def test_config_bad_json_exits_usage(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text("{not json")
    code, _, err = run_cli(capsys, ["duality", "--config", str(config)])
    assert code == EXIT_USAGE
    assert "cannot read config" in err


def test_config_unknown_key_exits_usage(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"nu": "3,1"}))
    code, _, err = run_cli(capsys, ["duality", "--config", str(config)])
    assert code == EXIT_USAGE
    assert "not a flag" in err


# -- seeding and determinism -------------------------------------------------


def test_seed_env_overrides_flag(capsys, monkeypatch):
    _, baseline, _ = run_cli(capsys, ["gamma-check", "--random", "5", "--seed", "3"])
    monkeypatch.setenv("RESIDUA_SEED", "3")
    _, overridden, _ = run_cli(capsys, ["gamma-check", "--random", "5", "--seed", "99"])
    assert json.loads(baseline)["report"]["samples"] == (
        json.loads(overridden)["report"]["samples"]
    )
    assert json.loads(overridden)["report"]["seed"] == 3


def test_seed_env_bad_value_exits_usage(capsys, monkeypatch):
    monkeypatch.setenv("RESIDUA_SEED", "oops")
    code, _, err = run_cli(capsys, ["gamma-check", "--random", "2"])
    assert code == EXIT_USAGE
    assert "RESIDUA_SEED" in err


def test_repeat_runs_byte_identical(capsys):
    argv = ["gamma-check", "--random", "5", "--seed", "3"]
    _, first, _ = run_cli(capsys, argv)
    _, second, _ = run_cli(capsys, argv)
    assert first == second


# -- transports --------------------------------------------------------------


def test_server_flag_against_live_service(capsys):
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(200):
            try:
                httpx.get(f"{base}/v1/health", timeout=1.0)
                break
            except httpx.HTTPError:
                time.sleep(0.05)
        argv = ["duality", "--ci", "z^2,w", "--g", "z*w"]
        code, over_http, _ = run_cli(capsys, argv + ["--server", base])
        assert code == EXIT_PASS
        _, in_process, _ = run_cli(capsys, argv)
        assert over_http == in_process
    finally:
        server.should_exit = True
        thread.join(timeout=5)


def test_server_flag_unreachable_exits_usage(capsys):
    code, _, err = run_cli(
        capsys,
        ["duality", "--ci", "z", "--g", "z", "--server", "http://127.0.0.1:9"],
    )
    assert code == EXIT_USAGE
    assert "cannot reach" in err


def test_module_invocation_round_trips():
    result = subprocess.run(
        [sys.executable, "-m", "residua.cli", "duality", "--ci", "z^2,w", "--g", "w"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert result.returncode == EXIT_PASS
    assert json.loads(result.stdout)["report"]["annihilated"] is True
