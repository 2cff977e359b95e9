import json

import pytest

from sl4zeta.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_lattice_validate(capsys):
    code, out = run(capsys, "lattice", "validate")
    data = json.loads(out)
    assert code == 0 and data["command"] == "lattice"
    assert set(data) >= {"command", "params", "verdicts", "runtime_ms"}


def test_zeta_theorem_b(capsys):
    code, out = run(capsys, "zeta", "assemble", "--check-theorem-b")
    assert code == 0
    assert all(json.loads(out)["verdicts"].values())


def test_poincare_csv(capsys):
    code, out = run(capsys, "--format", "csv", "poincare", "brute", "--lattice", "sl2", "--p", "3", "--nmax", "2")
    assert code == 0
    assert out.splitlines()[0].startswith("I,r,bruteforce,predicted,match")


def test_pretty_and_output(tmp_path, capsys):
    target = tmp_path / "o.txt"
    code, out = run(capsys, "--format", "pretty", "--output", str(target), "zeta", "abscissa")
    assert code == 0 and out == ""
    assert "ok" in target.read_text()


def test_long_refusal(capsys, monkeypatch):
    monkeypatch.delenv("SL4ZETA_LONG", raising=False)
    code, out = run(capsys, "census", "--q", "5")
    assert code == 2
    data = json.loads(out)
    assert data["verdicts"] == {"long_mode": False} and data["cost_estimate"] > 1e8


def test_bad_element_is_a_usage_error(capsys):
    code, _ = run(capsys, "shadow", "scan", "--element", "/nonexistent/file")
    assert code == 2


def test_red_verdict_sets_exit_code(capsys):
    code, out = run(capsys, "bridge", "--p", "5", "--samples", "20000")
    data = json.loads(out)
    assert data["verdicts"]["trace_bridge"] and not data["verdicts"]["transpose_bridge"]
    assert code == 1


def test_transitions_one_class(capsys):
    code, out = run(capsys, "transitions", "--q", "3", "--class", "N22")
    assert code == 0


def test_usage_error():
    with pytest.raises(SystemExit):
        main(["nonsense"])
