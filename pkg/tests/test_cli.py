import csv
import json
import shutil
import subprocess
from pathlib import Path

import pytest

from bifurcat.cli import EXIT_BUDGET, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from bifurcat.exactalg import RationalPoly
from bifurcat.model import ModelParams, dump_params, load_params

PARAMS = Path(__file__).resolve().parents[1] / "params" / "zhoufan_corrected.json"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_params_file_roundtrip(tmp_path):
    text = PARAMS.read_text()
    p = load_params(PARAMS)
    assert dump_params(p) == text
    assert p == ModelParams.base()


def test_classify_region_v(capsys):
    code, out, _ = run(capsys, "classify", "--params", PARAMS, "--omega", 6, "--alpha", 6)
    assert code == EXIT_OK and out.strip() == "V"


def test_classify_json_report(capsys):
    code, out, _ = run(capsys, "classify", "--omega", "51/8", "--alpha", "43/8", "--report", "json")
    doc = json.loads(out)
    assert doc["label"] == "II"
    assert [fp["label"] for fp in doc["fixed_points"]] == ["E0", "E2"]


def test_decimal_flags_are_exact(capsys):
    _, a, _ = run(capsys, "classify", "--omega", "6.375", "--alpha", "5.375", "--report", "json")
    _, b, _ = run(capsys, "classify", "--omega", "51/8", "--alpha", "43/8", "--report", "json")
    assert a == b


def test_cycle_command(capsys, tmp_path):
    out = tmp_path / "cycle.json"
    code, _, _ = run(capsys, "cycle", "--omega", "51/8", "--alpha", "43/8", "--out", out)
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["period"] == pytest.approx(63.5036, rel=1e-2)
    assert doc["stability"] == "attracting"


def test_simulate_from_dfe_is_constant(capsys, tmp_path):
    out = tmp_path / "traj.csv"
    code, _, _ = run(capsys, "simulate", "--omega", 6, "--alpha", 5, "--x0", "400/3,0",
                     "--tmax", 50, "--out", out)
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) > 2
    assert {r["s"] for r in rows} == {rows[0]["s"]}
    assert {r["i"] for r in rows} == {"0"}


def test_atlas_outputs(capsys, tmp_path):
    code, _, _ = run(capsys, "atlas", "--res", 40, "--samples", 40, "--svg", "--out", tmp_path)
    assert code == EXIT_OK
    names = {p.name for p in tmp_path.iterdir()}
    assert {"regions.csv", "corners.json", "map.svg", "curve_R0_1.csv", "curve_Delta_0.csv",
            "curve_TrE2_0.csv", "curve_B_0.csv"} <= names
    rows = list(csv.reader((tmp_path / "regions.csv").open()))
    assert rows[0] == ["omega", "alpha", "label"] and len(rows) == 1 + 40 * 40
    corners = set(json.loads((tmp_path / "corners.json").read_text()))
    assert corners == {"H", "B1", "B2", "BT"}
    assert (tmp_path / "map.svg").read_text().startswith("<svg")


def test_points_table(capsys, tmp_path):
    code, _, _ = run(capsys, "points-table", "--out", tmp_path)
    assert code == EXIT_OK
    rows = {r["name"]: r for r in json.loads((tmp_path / "points.json").read_text())}
    assert (rows["H"]["omega"], rows["H"]["alpha"]) == pytest.approx((7.94466, 7.09723), abs=1e-5)
    assert (rows["BT"]["omega"], rows["BT"]["alpha"]) == pytest.approx((6.84183, 6.20319), abs=1e-5)
    for name in ("R1", "R2", "R3", "B1", "B2", "H"):
        assert abs(rows[name]["alpha"] - 67 / 75 * rows[name]["omega"]) < 1e-9
    assert "Q_VIa" in (tmp_path / "points.txt").read_text()


def test_variety_dump_parses_back(capsys, tmp_path):
    dump = tmp_path / "poly.txt"
    code, _, _ = run(capsys, "variety", "--kind", "detG", "--method", "resultant",
                     "--dump-poly", dump, "--out", tmp_path / "v.json")
    assert code == EXIT_OK
    poly = RationalPoly.parse(dump.read_text().strip(), ("w", "a"))
    assert poly.to_str() == dump.read_text().strip()
    names = [f["name"] for f in json.loads((tmp_path / "v.json").read_text())["factors"]]
    assert "R0-1" in names and "Delta" in names


@pytest.mark.parametrize("argv, code", [
    (["classify", "--omega", "6"], EXIT_USAGE),
    (["classify", "--omega", "0", "--alpha", "1"], EXIT_USAGE),
    (["classify", "--omega", "abc", "--alpha", "1"], EXIT_USAGE),
    (["cycle", "--omega", "6", "--alpha", "5/32"], EXIT_NUMERIC),
    (["variety", "--kind", "detG", "--budget", "5"], EXIT_BUDGET),
    (["frobnicate"], EXIT_USAGE),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_missing_params_file(capsys, tmp_path):
    code, _, err = run(capsys, "corners", "--params", tmp_path / "nope.json")
    assert code == EXIT_USAGE and "error" in err


def test_byte_reproducible(capsys, tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        run(capsys, "atlas", "--res", 30, "--samples", 30, "--out", d)
        run(capsys, "cycle", "--omega", "51/8", "--alpha", "43/8", "--samples", "--out", d / "c.json")
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1]


def test_seventeen_significant_digits(capsys, tmp_path):
    run(capsys, "corners", "--out", tmp_path / "c.json")
    text = (tmp_path / "c.json").read_text()
    assert "6.8418295121078012" in text


@pytest.mark.skipif(shutil.which("bifurcat") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["bifurcat", "classify", "--omega", "6", "--alpha", "6"],
                         capture_output=True, text=True, cwd=tmp_path)
    assert res.returncode == 0 and res.stdout.strip() == "V"
