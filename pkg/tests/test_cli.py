import json

from criticlab import parse_csv, run_preset
from criticlab.cli import main


def test_run_preset_with_output(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    code = main(["run", "--preset", "vglomega0-div", "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr().out
    assert "Diverged" in captured
    assert parse_csv(out) == run_preset("vglomega0-div")


def test_run_fully_specified(tmp_path, capsys):
    code = main(
        [
            "run",
            "--algorithm", "vgl",
            "--lambda", "0",
            "--alpha", "1e-6",
            "--c1", "0.01",
            "--c2", "0.01",
            "--k", "0.01",
            "--F", "10,1,-1,-1",
            "--p0", "5.23e-5,8.53e-5",
            "--iterations", "1000",
            "--seed", "1",
            "--noise-var", "0",
            "--out", str(tmp_path / "t.csv"),
        ]
    )
    assert code == 0
    assert "Completed" in capsys.readouterr().out


def test_run_missing_flags_is_config_error(capsys):
    assert main(["run", "--algorithm", "vgl", "--lambda", "0"]) == 2
    assert "missing flags" in capsys.readouterr().err


def test_run_preset_and_algorithm_conflict(capsys):
    code = main(["run", "--preset", "vgl0-div", "--algorithm", "td"])
    assert code == 2
    assert "not both" in capsys.readouterr().err


def test_run_preset_rejects_ignored_model_flags(capsys):
    code = main(["run", "--preset", "vgl0-div", "--alpha", "1e-3"])
    assert code == 2
    assert "--alpha" in capsys.readouterr().err


def test_run_preset_unexpected_outcome_exit_code(capsys):
    # The noisy presets cannot reach their divergence marker in a short
    # run; the CLI reports the mismatch through the exit code.
    code = main(["run", "--preset", "td0-div", "--iterations", "1000"])
    assert code == 1
    assert "expected" in capsys.readouterr().err


def test_stability_text_and_json(capsys):
    assert main(["stability", "--preset", "vgl0-div"]) == 0
    text = capsys.readouterr().out
    assert "verdict: unstable" in text
    assert "117" in text

    assert main(["stability", "--preset", "vglomega1-conv", "--json"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["verdict"] == "stable"
    assert len(record["eigenvalues"]) == 2


def test_stability_refuses_value_learners(capsys):
    assert main(["stability", "--preset", "td0-div"]) == 2
    assert "no analytic" in capsys.readouterr().err


def test_stability_fully_specified(capsys):
    code = main(
        [
            "stability",
            "--algorithm", "vgl",
            "--lambda", "0",
            "--alpha", "1e-6",
            "--c1", "0.01",
            "--c2", "0.01",
            "--k", "0.01",
            "--F", "10,1,-1,-1",
            "--p0", "5.23e-5,8.53e-5",
        ]
    )
    assert code == 0
    assert "unstable" in capsys.readouterr().out


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in ("vgl0-div", "vglomega1-conv", "td0-div", "gdhp-div"):
        assert name in out


def test_config_file_merging(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text(
        "# divergence run\n"
        "algorithm=vgl\n"
        "lambda=0\n"
        "alpha=1e-6\n"
        "c1=0.01\n"
        "c2=0.01\n"
        "k=0.01\n"
        "F=10,1,-1,-1\n"
        "p0=5.23e-5,8.53e-5\n"
        "iterations=2000\n"
    )
    assert main(["run", "--config", str(config)]) == 0
    assert "Completed at iteration 2000" in capsys.readouterr().out

    # explicit flags override file values
    assert main(["run", "--config", str(config), "--iterations", "500"]) == 0
    assert "at iteration 500" in capsys.readouterr().out


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("alpha 1e-6\n")
    assert main(["run", "--config", str(bad), "--preset", "vgl0-div"]) == 2
    assert "key=value" in capsys.readouterr().err

    bad.write_text("alfa=1e-6\n")
    assert main(["run", "--config", str(bad), "--preset", "vgl0-div"]) == 2
    assert "unknown config file key" in capsys.readouterr().err


def test_bench_smoke(capsys):
    code = main(["bench", "--preset", "vglomega0-div", "--iterations", "5000"])
    out = capsys.readouterr().out
    assert code == 0
    assert "identical" in out
