import json
import subprocess
import sys

import pytest

from wfwitness.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_nom_fixture(capsys, fixtures_dir):
    code, out, _ = run(capsys, "eval", "--scenario", str(fixtures_dir / "nom_T.json"), "--witness", "T")
    rep = json.loads(out)
    assert code == 0
    assert rep["value"] == pytest.approx(1.0, abs=1e-9) and rep["bound"] == 0.5 and rep["violated"] is True


def test_eval_aom_fixture(capsys, fixtures_dir):
    code, out, _ = run(capsys, "eval", "--scenario", str(fixtures_dir / "aom_T.json"), "--witness", "T")
    rep = json.loads(out)
    assert code == 0 and rep["value"] == pytest.approx(0.5, abs=1e-9) and rep["violated"] is False


def test_eval_bad_fixture(capsys, fixtures_dir):
    code, out, err = run(capsys, "eval", "--scenario", str(fixtures_dir / "bad.json"))
    assert code == 2 and out == "" and "unitarity check failed" in err


def test_eval_bipartite_and_tq(capsys, fixtures_dir):
    code, out, _ = run(capsys, "eval", "--scenario", str(fixtures_dir / "bipartite_nom.json"))
    assert code == 0 and json.loads(out)["details"]["P1"] == pytest.approx(0.853553391, abs=1e-9)
    code, out, _ = run(
        capsys, "eval", "--scenario", str(fixtures_dir / "aom_Tq_saturating.json"), "--witness", "Tq", "--q", "0.5", "0.3", "0.2"
    )
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.5, abs=1e-9)


def test_eval_wrong_witness_for_file(capsys, fixtures_dir):
    code, _, err = run(capsys, "eval", "--scenario", str(fixtures_dir / "bipartite_nom.json"), "--witness", "T")
    assert code == 2 and "single-party" in err


def test_eval_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "eval", "--scenario", str(tmp_path / "nope.json"))
    assert code == 3 and err


def test_sweep_summary_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    code, out, _ = run(capsys, "sweep", "--witness", "PS", "--mode", "aom", "--samples", "300", "--seed", "7", "--out", str(a))
    summary = json.loads(out)
    assert code == 0 and summary["max"] <= 0.75 + 1e-9 and summary["violations"] == 0
    run(capsys, "sweep", "--witness", "PS", "--samples", "300", "--seed", "7", "--out", str(b), "--threads", "4")
    assert a.read_bytes() == b.read_bytes()


def test_sweep_nom_reaches_one(capsys):
    code, out, err = run(capsys, "sweep", "--witness", "T", "--mode", "nom", "--samples", "10")
    assert code == 0 and out.startswith("witness,value,bound,violated,seed")
    assert json.loads(err)["max"] == pytest.approx(1.0, abs=1e-9)


def test_sweep_rejects_zero_samples(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--witness", "T", "--samples", "0"])
    assert exc.value.code == 2


def test_sweep_unwritable_path(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--witness", "T", "--samples", "3", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == 3


def test_region(capsys, tmp_path):
    out_path = tmp_path / "r.csv"
    assert run(capsys, "region", "--resolution", "8", "--out", str(out_path))[0] == 0
    rows = [line.split(",") for line in out_path.read_text().splitlines()[1:]]
    pts = [(float(r[0]), float(r[1]), r[2]) for r in rows]
    assert any(abs(p0 - 0.75) < 1e-7 and abs(p1 - 0.8535534) < 1e-7 and m == "nom" for p0, p1, m in pts)
    assert any(abs(p0 - 0.8535534) < 1e-7 and abs(p1 - 0.8535534) < 1e-7 and m.startswith("boundary") for p0, p1, m in pts)
    assert all(p1 <= max(p0, 1.5 - p0) + 1e-9 for p0, p1, m in pts if m == "aom")


def test_optimize_command(capsys):
    code, out, _ = run(capsys, "optimize", "--witness", "T", "--mode", "nom", "--budget", "1")
    assert code == 0 and json.loads(out)["best_value"] == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name, needle", [("wfs", "T = 1.000000000"), ("theorem1", "max deviation"), ("bipartite", "P0=0.7500000 P1=0.8535534 PS=0.8535534")])
def test_demos(capsys, name, needle):
    code, out, _ = run(capsys, "demo", name)
    assert code == 0 and needle in out


def test_unknown_demo(capsys):
    code, _, err = run(capsys, "demo", "zeno")
    assert code == 2 and "wfs" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wfwitness", "demo", "bipartite"], capture_output=True, text=True)
    assert proc.returncode == 0 and "PS=0.8535534" in proc.stdout
