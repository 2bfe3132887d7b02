import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from magicfree.cli import CSV_COLUMNS, EXIT_CERT, EXIT_CONFIG, EXIT_OK, main, parse_grid
from magicfree.purification import fig2_ensembles, save_ensemble


def records(text):
    return [json.loads(ln) for ln in text.splitlines() if ln.strip()]


def test_parse_grid():
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid("0.1, 0.5") == [0.1, 0.5]
    for bad in ("0:1", "a,b", "0:1:0"):
        with pytest.raises(Exception):
            parse_grid(bad)


def test_universal_records_and_csv(tmp_path, capsys):
    out, table = tmp_path / "r.jsonl", tmp_path / "r.csv"
    code = main(["universal", "--d", "2", "--class", "cspo", "--delta-grid", "0.2,0.6",
                 "--p", "0.5", "1.0", "--out", str(out), "--csv", str(table), "--workers", "1"])
    assert code == EXIT_OK
    recs = records(out.read_text())
    assert [(r["delta"], r["p"]) for r in recs] == [(0.2, 0.5), (0.2, 1.0), (0.6, 0.5), (0.6, 1.0)]
    for r in recs:
        assert r["status"] == "Optimal" and r["class"] == "CSPO"
        assert abs(r["fidelity"] - (1 - r["delta"] / 2)) < 1e-6
        assert abs(r["gap_to_baseline"]) < 1e-6
    with open(table) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == CSV_COLUMNS and len(rows) == 4


def test_records_are_reproducible(tmp_path):
    args = ["universal", "--d", "3", "--class", "CPWP", "--delta", "0.4", "--p", "0.5",
            "--no-timing", "--workers", "1", "--out"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + [str(a)]) == EXIT_OK
    assert main(args + [str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert records(a.read_text())[0]["seconds"] == 0.0


def test_parallel_sweep_matches_serial(tmp_path):
    base = ["universal", "--d", "2", "--class", "CPTN", "--delta-grid", "0:0.9:4", "--p", "0.3",
            "--no-timing"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(base + ["--workers", "1", "--out", str(a)]) == EXIT_OK
    assert main(base + ["--workers", "2", "--out", str(b)]) == EXIT_OK
    assert a.read_text() == b.read_text()


def test_ensemble_file_compare(tmp_path, capsys):
    qubit, _ = fig2_ensembles()
    path = tmp_path / "q.json"
    save_ensemble(qubit, path)
    assert main(["ensemble", "--ensemble", str(path), "--compare", "--delta", "0.5",
                 "--p", "0.6", "--workers", "1"]) == EXIT_OK
    recs = records(capsys.readouterr().out)
    assert [r["class"] for r in recs] == ["CSPO", "CPTN"]
    assert recs[1]["fidelity"] >= recs[0]["fidelity"] - 1e-8


def test_config_errors(tmp_path, capsys):
    assert main(["universal", "--d", "4", "--class", "CPWP", "--delta", "0.1"]) == EXIT_CONFIG
    assert main(["universal", "--d", "2", "--class", "CSPO", "--copies", "3", "--delta", "0.5"]) == EXIT_CONFIG
    assert "--extended" in capsys.readouterr().err
    assert main(["ensemble", "--ensemble", "missing.json"]) == EXIT_CONFIG
    assert main(["certify", "--theorem", "cpwp", "--d", "9"]) == EXIT_CONFIG
    assert main(["universal", "--d", "2", "--class", "CSPO", "--delta-grid", "x"]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"d": 2, "states": [[[1, 0], [1, 0]]]}))
    assert main(["ensemble", "--ensemble", str(bad)]) == EXIT_CONFIG
    assert "state 0" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["universal", "--d", "2"])
    assert exc.value.code == EXIT_CONFIG


def test_certify(capsys):
    assert main(["certify", "--theorem", "cpwp", "--d", "3", "--grid", "3", "--workers", "1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "3/3 grid points pass" in out and "FAIL" not in out
    assert main(["certify", "--theorem", "cspo", "--delta-grid", "0.25,0.75", "--workers", "1"]) == EXIT_OK


def test_nogo(capsys):
    assert main(["nogo", "--d", "2", "--class", "CSPO", "--delta", "0.3", "--p", "0.5"]) == EXIT_OK
    assert "no-go confirmed" in capsys.readouterr().out
    assert main(["nogo", "--d", "2", "--class", "CPTN", "--delta", "0.5", "--p", "0.3"]) == EXIT_CERT


def test_robustness_and_wigner_tools(tmp_path, capsys):
    t = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"d": 2, "states": [[[a.real, a.imag] for a in t]]}))
    assert main(["robustness", "--state", str(path)]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert abs(rec["robustness"] - np.sqrt(2)) < 1e-7
    dens = tmp_path / "rho.json"
    dens.write_text(json.dumps({"d": 3, "density": [[[1 / 3, 0] if i == j else [0, 0]
                                                      for j in range(3)] for i in range(3)]}))
    assert main(["wigner", "--state", str(dens), "--d", "3"]) == EXIT_OK
    rows = [ln for ln in capsys.readouterr().out.splitlines() if not ln.startswith("#")]
    vals = np.array([[float(x) for x in r.split()] for r in rows])
    assert vals.shape == (3, 3) and np.allclose(vals, 1 / 9)


def test_enumerate_stab(tmp_path, capsys):
    out = tmp_path / "s.txt"
    assert main(["enumerate-stab", "--qubits", "2", "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("# stab n=2 count=60")
    assert main(["enumerate-stab", "--qubits", "4", "--out", str(out)]) == EXIT_CONFIG


def test_dump_conic(tmp_path):
    from magicfree.conic import load_conic, solve
    path = tmp_path / "p.conic"
    assert main(["universal", "--d", "2", "--class", "CPTN", "--delta", "0.5", "--p", "0.5",
                 "--dump-conic", str(path), "--out", str(tmp_path / "r")]) == EXIT_OK
    prob = load_conic(path)
    rec = records((tmp_path / "r").read_text())[0]
    assert abs(solve(prob).primal_value - rec["fidelity"]) < 1e-6


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "magicfree", "certify", "--theorem", "cspo",
                          "--grid", "2", "--workers", "1"], capture_output=True, text=True)
    assert res.returncode == EXIT_OK, res.stderr
    assert "2/2 grid points pass" in res.stdout
