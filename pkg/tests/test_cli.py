"""Command line client: exit codes, emitted files, determinism, config reuse."""

import json
import math
import threading
import time

import httpx
import pytest

from hydroblow import cli

M_STD = str(math.sqrt(3.0) / 2.0)


def read(path):
    return path.read_text()


def test_profile_writes_artifacts(tmp_path):
    code = cli.main(["profile", "--m", M_STD, "--outdir", str(tmp_path)])
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["config_resolved.json", "params.txt", "profile.csv", "report.txt"]
    resolved = json.loads(read(tmp_path / "config_resolved.json"))
    assert resolved["profile"]["N"] == 128
    assert "z,phi,dphi,ddphi" in read(tmp_path / "profile.csv")


def test_profile_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    assert cli.main(["profile", "--m", M_STD, "--outdir", str(a)]) == 0
    assert cli.main(["profile", "--m", M_STD, "--outdir", str(b)]) == 0
    for name in ("profile.csv", "params.txt", "report.txt", "config_resolved.json"):
        assert read(a / name) == read(b / name)


def test_invalid_parameter_exits_2(tmp_path, capsys):
    assert cli.main(["profile", "--m", "-1", "--outdir", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "invalid parameter" in err


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"profile": {"m": 1.0, "bogus": 3}}))
    assert cli.main(["profile", "--config", str(cfg), "--outdir", str(tmp_path)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_certification_conflict_exits_3(tmp_path):
    code = cli.main(
        ["profile", "--m", M_STD, "--grid", "uniform", "--N", "16", "--outdir", str(tmp_path)]
    )
    assert code == 3


def test_glued_profile_by_flag(tmp_path):
    assert cli.main(["profile", "--m", M_STD, "--s", "2", "--outdir", str(tmp_path)]) == 0
    resolved = json.loads(read(tmp_path / "config_resolved.json"))
    assert resolved["profile"]["s"] == 2


def test_simulate1d_blowup_run(tmp_path, capsys):
    code = cli.main(
        ["simulate1d", "--m", M_STD, "--N", "128", "--t-end", "0.5", "--outdir", str(tmp_path)]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "verdict=blowup" in out
    assert (tmp_path / "trajectory.csv").exists()
    assert (tmp_path / "blowup_fit.txt").exists()


def test_simulate1d_zero_amplitude_exits_4(tmp_path):
    code = cli.main(
        [
            "simulate1d",
            "--m", M_STD,
            "--N", "128",
            "--t-end", "0.4",
            "--amplitude", "0",
            "--outdir", str(tmp_path),
        ]
    )
    assert code == 4


def test_simulate2d_run(tmp_path, capsys):
    code = cli.main(
        [
            "simulate2d",
            "--m", M_STD,
            "--k-max", "16",
            "--Nz", "64",
            "--t-end", "0.1",
            "--snapshot-times", "0.05,0.1",
            "--outdir", str(tmp_path),
        ]
    )
    assert code == 0
    assert "verdict=pass" in capsys.readouterr().out
    for name in ("trace.csv", "energy.csv", "run.txt", "config_resolved.json"):
        assert (tmp_path / name).exists()


def test_sweep_partial_failure_exits_nonzero(tmp_path):
    code = cli.main(
        [
            "sweep",
            "--m-list", "0.5,-1,2",
            "--profile-N", "64",
            "--sim-N", "128",
            "--t-end", "0.4",
            "--outdir", str(tmp_path),
        ]
    )
    assert code == 2
    text = read(tmp_path / "sweep.csv")
    assert text.count("\n") == 4  # header + one row per m
    assert ",domain" in text


def test_sweep_all_good_exits_0(tmp_path):
    code = cli.main(
        [
            "sweep",
            "--m-list", "0.5,2",
            "--profile-N", "64",
            "--sim-N", "128",
            "--t-end", "0.4",
            "--outdir", str(tmp_path),
        ]
    )
    assert code == 0


def test_config_round_trip(tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    first.mkdir()
    second.mkdir()
    assert cli.main(["profile", "--m", M_STD, "--N", "96", "--outdir", str(first)]) == 0
    assert (
        cli.main(
            ["profile", "--config", str(first / "config_resolved.json"), "--outdir", str(second)]
        )
        == 0
    )
    for name in ("profile.csv", "params.txt", "config_resolved.json"):
        assert read(first / name) == read(second / name)


def test_missing_required_flag_exits_2(tmp_path):
    assert cli.main(["sweep", "--outdir", str(tmp_path)]) == 2


def test_http_server_mode(tmp_path):
    """The client produces identical artifacts over a real HTTP connection."""
    import uvicorn

    from hydroblow.service import create_app

    config = uvicorn.Config(create_app(), host="127.0.0.1", port=8107, log_level="critical")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.time() + 20.0
        up = False
        while time.time() < deadline:
            try:
                if httpx.get("http://127.0.0.1:8107/health", timeout=1.0).status_code == 200:
                    up = True
                    break
            except httpx.HTTPError:
                time.sleep(0.05)
        assert up, "server did not come up"

        local, remote = tmp_path / "local", tmp_path / "remote"
        local.mkdir()
        remote.mkdir()
        assert cli.main(["profile", "--m", M_STD, "--outdir", str(local)]) == 0
        assert (
            cli.main(
                [
                    "profile",
                    "--m", M_STD,
                    "--outdir", str(remote),
                    "--server", "http://127.0.0.1:8107",
                ]
            )
            == 0
        )
        for name in ("profile.csv", "params.txt", "report.txt"):
            assert read(local / name) == read(remote / name)
    finally:
        server.should_exit = True
        thread.join(timeout=10.0)
