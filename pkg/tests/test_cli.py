import csv
import json
import math

import numpy as np
import pytest

from qgspec.cli import CSV_COLUMNS, dumps, main, normalize


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    return json.loads(out), out


def test_star_three(capsys):
    data, _ = run_json(capsys, "star", "--degree", "3")
    assert data["energies"] == pytest.approx([-1 / 3], abs=1e-14)
    assert data["s_matrix_limits"]["zero_is_minus_identity"] is True


def test_star_two_is_empty(capsys):
    data, _ = run_json(capsys, "star", "--degree", "2")
    assert data["energies"] == []
    np.testing.assert_allclose(data["s_matrix_limits"]["limit_inf"], [[0, -1], [-1, 0]])


@pytest.mark.parametrize("argv", [
    ["star", "--degree", "0"],
    ["star", "--degree", "3", "--ell", "-1"],
    ["smatrix", "--degree", "3", "--k", "0"],
    ["hex", "--coupling", "minus-r"],
    ["hex", "--length", "1", "--coupling", "bogus"],
    ["hex", "--length", "nan"],
    ["hex", "--length", "1", "--workers", "0"],
    ["genhex", "--lengths", "1,2"],
    ["genhex", "--lengths", "1,x,2"],
    ["genhex", "--lengths", "1,1,1", "--max-den", "0"],
    [],
])
def test_invalid_arguments_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_singular_s_matrix_exits_three(capsys):
    code, _, err = run(capsys, "smatrix", "--degree", "3", "--k", "1e-14", "--coupling", "r")
    assert code == 3 and "1e-14" in err


def test_smatrix_degree_three_at_one(capsys):
    data, _ = run_json(capsys, "smatrix", "--degree", "3", "--k", "1")
    ent = np.array(data["entries"]["re"]) + 1j * np.array(data["entries"]["im"])
    np.testing.assert_allclose(ent, [[0, -1, 0], [0, 0, -1], [-1, 0, 0]], atol=1e-14)
    assert data["unitarity_defect"] < 1e-12


def test_smatrix_degree_four_high_momentum(capsys):
    data, _ = run_json(capsys, "smatrix", "--degree", "4", "--k", "1e6")
    ent = np.array(data["entries"]["re"]) + 1j * np.array(data["entries"]["im"])
    lim = np.full((4, 4), -0.5) + np.eye(4)
    assert np.max(np.abs(ent - lim)) < 1e-5


def test_hex_report_layout(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert main(["hex", "--length", "1", "--coupling", "minus-r", "--kmax", "20", "--json", str(out)]) == 0
    data = json.loads(out.read_text(encoding="utf-8"))
    assert set(data) == {"problem", "flat_bands", "bands", "gaps", "measure_fraction", "diagnostics"}
    neg = [b for b in data["bands"] if b["side"] == "negative"]
    assert len(neg) == 1
    flats = [f["lo"] for f in data["flat_bands"]]
    assert flats == pytest.approx([m * math.pi for m in range(1, 7)])
    for b in data["bands"]:
        assert {"lo", "hi", "energy_lo", "energy_hi", "side", "kind"} <= set(b)


def test_hex_r_variant_is_gap_dominated(capsys):
    data, _ = run_json(capsys, "hex", "--length", "1.5", "--coupling", "r", "--kmax", "20")
    assert data["problem"]["coupling"] == "R"
    assert data["measure_fraction"] < 0.5
    assert data["diagnostics"]["dispersion"] == "reconstructed"


def test_json_round_trip_is_byte_identical(capsys):
    _, text = run_json(capsys, "genhex", "--lengths", "1,2,3", "--kmax", "10")
    assert dumps(json.loads(text)) == text


def test_normalize_rounds_and_clears_negative_zero():
    assert normalize({"x": -0.0, "y": 1 / 3, "z": math.inf}) == {"x": 0.0, "y": 0.333333333333333, "z": None}
    assert normalize(np.array([1.0, 2.0])) == [1.0, 2.0]


def test_csv_contract(tmp_path, capsys):
    for argv in (["hex", "--length", "1", "--kmax", "8"], ["genhex", "--lengths", "1,2,3", "--kmax", "8"],
                 ["star", "--degree", "5"]):
        path = tmp_path / f"{argv[0]}.csv"
        assert main(argv + ["--csv", str(path), "--json", str(tmp_path / "x.json")]) == 0
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == CSV_COLUMNS
        assert len(rows) > 1
        for r in rows[1:]:
            assert float(r[5]) <= float(r[6])


def test_svg_is_deterministic(tmp_path):
    paths = []
    for i in range(2):
        for cmd in (["hex", "--length", "1", "--kmax", "6"], ["genhex", "--lengths", "1,2,1.5", "--kmax", "6"]):
            path = tmp_path / f"{cmd[0]}{i}.svg"
            assert main(cmd + ["--svg", str(path), "--json", str(tmp_path / "x.json")]) == 0
            paths.append(path)
    hex0, gen0, hex1, gen1 = (p.read_bytes() for p in paths)
    assert hex0 == hex1 and gen0 == gen1
    assert b"<svg" in hex0 and b"Date" not in hex0


def test_genhex_regular_matches_hex(capsys):
    g, _ = run_json(capsys, "genhex", "--lengths", "1,1,1", "--kmax", "20")
    h, _ = run_json(capsys, "hex", "--length", "1", "--kmax", "20")
    tol = 10 * g["diagnostics"]["edge_tolerance"]
    assert len(g["bands"]) == len(h["bands"])
    for x, y in zip(g["bands"], h["bands"]):
        assert x["side"] == y["side"]
        assert abs(x["lo"] - y["lo"]) <= tol and abs(x["hi"] - y["hi"]) <= tol


def test_genhex_commensurate(capsys):
    data, _ = run_json(capsys, "genhex", "--lengths", "1,2,3", "--kmax", "10")
    assert [f["lo"] for f in data["flat_bands"]] == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi])
    comm = data["diagnostics"]["commensurability"]
    assert comm["commensurate"] is True and comm["unit"] == 1.0


def test_genhex_incommensurate(capsys):
    data, _ = run_json(capsys, "genhex", "--lengths", "1,1.41421356237,1.73205080757", "--kmax", "40")
    assert data["flat_bands"] == []
    assert data["diagnostics"]["commensurability"]["commensurate"] is False
    cases = {n["case"] for gap in data["gaps"] for n in gap["notes"]}
    assert "incommensurate" in cases


def test_unwritable_output_exits_two(tmp_path, capsys):
    code, _, err = run(capsys, "star", "--degree", "3", "--json", str(tmp_path / "missing" / "x.json"))
    assert code == 2 and "cannot write" in err
