import json

import pytest

from skewfd.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main


def test_build_preset_writes_json(tmp_path, capsys):
    out = tmp_path / "a.json"
    assert main(["build", "--preset", "arakawa", "--out", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert len(data["arrows"]) == 12
    assert data["scale"] == {"num": 1, "den": 12, "h_power": -2}
    assert "determinant terms: 24" in capsys.readouterr().out


def test_build_from_base(capsys):
    assert main(["build", "--base", "0,1", "--group", "translations", "--dim", "1"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "(+) 0→1" in text and "(-) 0→-1" in text


def test_build_2d_base(capsys):
    assert main(["build", "--base", "0,0;1,0;0,1", "--group", "c4", "--dim", "2"]) == EXIT_OK
    assert "arrows=12" in capsys.readouterr().out


def test_build_empty_warns(capsys):
    assert main(["build", "--base", "0,0", "--dim", "1", "--m", "1"]) == EXIT_OK
    assert "cancel" in capsys.readouterr().err


def test_build_bad_config(capsys):
    assert main(["build", "--base", "0,1", "--group", "nope"]) == EXIT_CONFIG
    assert main(["build"]) == EXIT_CONFIG
    assert main(["build", "--base", "0,x"]) == EXIT_CONFIG


def test_verify_central(tmp_path):
    assert main(["verify", "--preset", "central", "--target", "dx", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["pass"] and abs(summary["study"]["slope"] - 2) < 0.1
    assert (tmp_path / "study.csv").exists()


def test_verify_p2d1(capsys):
    assert main(["verify", "--preset", "p2d1", "--target", "jacobian-basis"]) == EXIT_OK
    assert "['3', '2']" in capsys.readouterr().out


def test_verify_corrupted_file(tmp_path, capsys):
    path = tmp_path / "st.json"
    main(["build", "--preset", "p2d1", "--out", str(path)])
    data = json.loads(path.read_text())
    data["arrows"][0]["sign"] *= -1
    path.write_text(json.dumps(data))
    assert main(["verify", "--preset", str(path)]) == EXIT_FAIL
    assert "skewness violation" in capsys.readouterr().err


def test_verify_unknown_preset():
    assert main(["verify", "--preset", "does-not-exist"]) == EXIT_CONFIG


def test_simulate_zero_steps(tmp_path):
    assert main(["simulate", "--preset", "euler2d", "--n", "8", "--steps", "0",
                 "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "trajectory.csv").read_text() == "t,enstrophy,energy,residual\n"


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["simulate", "--preset", "ode1d2", "--n", "16", "--steps", "20",
                     "--dt", "0.05", "--seed", "3", "--out", str(d)]) == EXIT_OK
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()


def test_simulate_rk4_informational(tmp_path):
    assert main(["simulate", "--preset", "euler2d", "--n", "16", "--steps", "10",
                 "--method", "rk4", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert max(summary["max_relative_drift"].values()) > 0


def test_simulate_bad_preset():
    assert main(["simulate", "--preset", "arakawa"]) == EXIT_CONFIG
