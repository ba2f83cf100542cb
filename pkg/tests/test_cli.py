import json

import pytest

from artifact import cli_runner, experiments


def _run(tmp_path, *extra):
    out = tmp_path / "out"
    code = cli_runner.main(["spectra", "--out", str(out), *extra])
    return code, out


def test_outputs_and_manifest(tmp_path, capsys):
    code, out = _run(tmp_path, "--set", "n_scaling=5")
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    for name in manifest["files"]:
        assert (out / name).exists()
    assert manifest["config"]["params"]["n_scaling"] == 5
    assert {c["criterion"][:5] for c in manifest["checks"]} >= {"AC11a", "AC13 "}
    header = (out / "one_magnon_band.csv").read_text().splitlines()[0]
    assert header == "k,lambda,exact"
    summary = json.loads((out / "summary.json").read_text())
    assert "units" in summary
    assert "[PASS] AC13" in capsys.readouterr().out


def test_config_round_trip_is_byte_identical(tmp_path):
    code, first = _run(tmp_path, "--seed", "3", "--set", "n_scaling=5")
    assert code == 0
    second = tmp_path / "again"
    assert cli_runner.main(["spectra", "--config", str(first / "config.ini"), "--out", str(second)]) == 0
    for name in json.loads((first / "manifest.json").read_text())["files"]:
        if name.endswith(".csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()
    assert json.loads((second / "manifest.json").read_text())["config"]["seed"] == 3


def test_ini_section_per_experiment(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[spectra]\nL = 8\n[volterra]\nT = 1\n")
    out = tmp_path / "o"
    assert cli_runner.main(["spectra", "--config", str(cfg), "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["config"]["params"]["L"] == 8


@pytest.mark.parametrize(
    "args",
    [["--set", "bogus=1"], ["--set", "L=40"], ["--set", "L=abc"], ["--set", "noequals"]],
)
def test_validation_exit_code(tmp_path, args):
    code, _ = _run(tmp_path, *args)
    assert code == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    from artifact.errors import NumericalFailure

    def boom(p, seed):
        raise NumericalFailure("diverged")

    monkeypatch.setitem(experiments.RUNNERS, "spectra", boom)
    assert _run(tmp_path)[0] == 3


def test_extinction_exit_code(tmp_path, monkeypatch):
    from artifact.errors import ExtinctionError

    def boom(p, seed):
        raise ExtinctionError("all clones died", time=1.0)

    monkeypatch.setitem(experiments.RUNNERS, "spectra", boom)
    assert _run(tmp_path)[0] == 4


def test_env_var_sets_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv(cli_runner.OUT_ENV, str(tmp_path / "root"))
    assert cli_runner.main(["cloning-bench", "--set", "n_samples=2000", "--set", "bench_T=200"]) == 0
    assert (tmp_path / "root" / "cloning-bench" / "manifest.json").exists()


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit):
        cli_runner.main(["gas-qss", "--help"])
    assert "gammas" in capsys.readouterr().out


def test_threads_do_not_change_results(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    base = ["cloning-bench", "--set", "n_samples=2000", "--set", "bench_T=200"]
    assert cli_runner.main([*base, "--out", str(a), "--threads", "1"]) == 0
    assert cli_runner.main([*base, "--out", str(b)]) == 0
    assert (a / "survival.csv").read_bytes() == (b / "survival.csv").read_bytes()
