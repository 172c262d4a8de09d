import json

import pytest

from nlpsg_mzi.cli import EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION, main, read_config, ConfigError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_optimize_json(capsys):
    code, out, _ = run(capsys, "optimize", "--family", "klm", "--json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert set(doc) == {"manifest", "results"}
    assert doc["results"]["beta_sq"] == pytest.approx(0.25, abs=1e-8)
    assert doc["manifest"]["command"] == "optimize"


def test_optimize_text(capsys):
    code, out, _ = run(capsys, "optimize", "--family", "mrr", "--branch", "bottom")
    assert code == EXIT_OK and "r2* = 0.546918" in out
    code, out, _ = run(capsys, "optimize", "--family", "mrr", "--branch", "top", "--json")
    r2 = json.loads(out)["results"]["r2"]
    assert -3**-0.5 - 1e-9 <= r2 <= -0.5


def test_sweep_csv_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--input", "clspdc", "--xi", "0.85", "0.85", "0.85", "0.85", "--phi-points", "37"]
    assert run(capsys, *args, "--out", str(a))[0] == EXIT_OK
    assert run(capsys, *args, "--out", str(b))[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0] == "phi,P,P_prime,three_photon,AC,DC"
    assert len(lines) == 38
    assert all(float(row.split(",")[4]) == 0 for row in lines[1:])
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert manifest["manifest"]["outputs"][0] == str(a)
    assert manifest["manifest"]["config"]["phi_points"] == 37
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".") or p.suffix == ".tmp"]


def test_sweep_unit_efficiency_ratio(capsys):
    code, out, _ = run(capsys, "sweep", "--input", "clspdc", "--phi-points", "5")
    first = out.splitlines()[1].split(",")
    assert float(first[3]) / 0.25 == pytest.approx(1.0, abs=1e-8)


def test_manifold(tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert run(capsys, "manifold", "--tau-points", "11", "--out", str(out))[0] == EXIT_OK
    rows = [list(map(float, line.split(","))) for line in out.read_text().splitlines()[1:]]
    assert rows[0][3] == pytest.approx(0.853553, abs=1e-6)
    assert rows[-1][1] == pytest.approx(1.0)
    assert all(b[1] > a[1] for a, b in zip(rows, rows[1:]))
    assert run(capsys, "manifold", "--r-star", "1.5")[0] == EXIT_CONFIG


def test_tables_json(capsys):
    code, out, _ = run(capsys, "tables", "--phi-points", "61", "--json")
    assert code == EXIT_OK
    cells = json.loads(out)["results"]["cells"]
    assert len(cells) == 4
    assert all(c["prefactor_documented_discrepancy"] == (c["input"] == "wcs") for c in cells)


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[gate]\nfamily = mrr\n[interferometer]\nphi_points = 9\n[detectors]\nxi = 0.5 0.5 0.5 0.5\n")
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--phi-points", "7", "--json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["manifest"]["config"]["family"] == "mrr"
    assert doc["results"]["points"] == 7


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[gate]\nfamilly = klm\n")
    code, _, err = run(capsys, "sweep", "--config", str(bad))
    assert code == EXIT_CONFIG and "familly" in err
    with pytest.raises(ConfigError):
        read_config(tmp_path / "missing.ini")
    bad.write_text("[detectors]\nxi = a b c d\n")
    assert run(capsys, "sweep", "--config", str(bad))[0] == EXIT_CONFIG


def test_validate_fault_injection(capsys):
    code, out, _ = run(capsys, "validate", "--inject-fault", "--phi-points", "61", "--json")
    assert code == EXIT_VALIDATION
    checks = {c["name"]: c for c in json.loads(out)["results"]["checks"]}
    assert checks["accidentals.cross_validate"]["hard"]
    assert not checks["accidentals.cross_validate"]["passed"]
