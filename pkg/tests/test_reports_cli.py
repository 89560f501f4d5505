import csv
import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qxot import cli, measurements, reports
from qxot.states import OverlapParams


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ----------------------------------------------------------------- sweep


def test_grid_values_exact():
    assert reports.grid_values(3) == [-1 / 3, 0.0, 1 / 3]
    vals = reports.grid_values(201)
    assert vals[100] == 0.0 and vals[0] == -1 / 3 and vals[-1] == 1 / 3
    assert all(a == -b for a, b in zip(vals, reversed(vals)))
    with pytest.raises(ValueError):
        reports.grid_values(1)


def test_small_sweep_rows():
    rows = reports.sweep("reF-g", 3)
    assert len(rows) == 9
    coords = [(r.re_f, r.im_f, r.g) for r in rows]
    assert coords == sorted(coords)
    by = {(r.re_f, r.g): r for r in rows}
    origin = by[(0.0, 0.0)]
    assert origin.b_ot == 1.0
    assert origin.a_notest_overall == pytest.approx(1 / 3)
    corner = by[(1 / 3, -1 / 3)]
    assert corner.b_ot == pytest.approx(0.75, abs=1e-12)
    assert corner.a_notest_overall == pytest.approx(0.5, abs=1e-12)


def test_imaginary_plane_and_cube():
    rows = reports.sweep("imF-g", 3)
    assert all(r.re_f == 0.0 for r in rows)
    assert len(reports.sweep("3d", 3)) == 27
    with pytest.raises(ValueError):
        reports.sweep("xy", 3)


def test_unrealizable_rows_are_flagged_and_empty():
    row = reports.sweep_row(OverlapParams(0.9, 0, 0))
    assert not row.realizable and not row.honest_feasible
    assert row.b_ot is None and row.dominant_branch is None
    line = row.as_strings()
    assert line[3:5] == ["false", "false"]
    assert line[5:] == [""] * 6
    cube = reports.sweep("3d", 5, extent=1)
    assert any(not r.realizable for r in cube)
    assert all((r.b_ot is None) == (not r.realizable) for r in cube)


def test_hourglass_region_is_branch_three():
    rows = reports.sweep("reF-g", 61)
    inside = [
        r
        for r in rows
        if r.honest_feasible
        and min(abs(r.re_f), 1 / 3 - 2 * abs(r.re_f)) + 1e-9 < r.g < max(abs(r.re_f), 1 / 3 - 2 * abs(r.re_f)) - 1e-9
    ]
    assert inside
    assert {r.dominant_branch for r in inside} == {"(iii)"}


def test_dominant_branch_is_argmax_with_tie_order():
    from qxot.cheating import real_f_forms

    for r in reports.sweep("reF-g", 31):
        if not r.honest_feasible:
            continue
        forms = real_f_forms(r.params)
        cands = [(k, forms[k]) for k in ("(i)", "(iii)", "(iv)") if not math.isnan(forms[k])]
        best = max(v for _, v in cands)
        assert r.dominant_branch == next(k for k, v in cands if v >= best - 1e-12)


def test_csv_header_and_round_trip():
    rows = reports.sweep("3d", 5, extent=1)
    text = reports.sweep_csv(rows)
    assert text.splitlines()[0] == (
        "re_f,im_f,g,realizable,honest_feasible,b_ot,a_test_bound,"
        "a_notest_overall,a_notest_p01,a_notest_p2,dominant_branch"
    )
    assert reports.parse_sweep_csv(text) == rows


def test_json_round_trip_and_schema():
    rows = reports.sweep("reF-g", 7)
    text = reports.sweep_json(rows, seed=42)
    doc = json.loads(text)
    assert set(doc) == {"meta", "rows"}
    assert doc["meta"]["command"] == "sweep" and doc["meta"]["seed"] == 42 and doc["meta"]["version"]
    back = reports.parse_sweep_json(text)
    for a, b in zip(rows, back):
        assert (a.realizable, a.honest_feasible, a.dominant_branch) == (b.realizable, b.honest_feasible, b.dominant_branch)
        for k in ("re_f", "im_f", "g", "b_ot", "a_test_bound", "a_notest_overall", "a_notest_p01", "a_notest_p2"):
            x, y = getattr(a, k), getattr(b, k)
            assert (x is None and y is None) or abs(x - y) <= 1e-15


@settings(max_examples=200)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_seventeen_digits_round_trip(x):
    assert reports.parse_real(reports.fmt_real(x)) == x


def test_flags_parse_strictly():
    assert reports.parse_flag("true") and not reports.parse_flag("false")
    with pytest.raises(ValueError):
        reports.parse_flag("True")
    with pytest.raises(ValueError):
        reports.parse_sweep_csv("a,b\n1,2\n")


def test_sweep_cli_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "sweep", "--plane", "imF-g", "--grid", "21", "--out", str(a))[0] == 0
    assert run(capsys, "sweep", "--plane", "imF-g", "--grid", "21", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 21 * 21 + 1


def test_sweep_cli_json_to_stdout(capsys):
    code, out, _ = run(capsys, "sweep", "--grid", "3", "--format", "json", "--seed", "7")
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"] == {"command": "sweep", "seed": 7, "version": reports.__version__}
    assert len(doc["rows"]) == 9


def test_unwritable_path_reported(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "--grid", "3", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == cli.EXIT_USAGE
    assert "cannot write" in err


def test_usage_errors(capsys):
    assert run(capsys, "sweep", "--grid", "1")[0] == 2
    assert run(capsys, "simulate", "--rounds", "0")[0] == 2
    assert run(capsys, "tradeoff", "--s-points", "1")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "simulate", "--test-fraction", "1.5")[0] == 2
    code, _, err = run(capsys, "simulate", "--alice", "cheat", "--bob", "cheat", "--rounds", "10")
    assert code == 2 and "at most one party" in err


# -------------------------------------------------------------- simulate


def test_frequency_table_rows_and_sigma():
    t = reports.simulate_table("direct-honest", 60_000, seed=1)
    for total in t.row_sums().values():
        assert abs(total - 1) <= 1e-12
    for c in t.cells:
        n = sum(x.count for x in t.cells if x.sent == c.sent)
        if c.p_t == 0:
            assert c.sigma == 1 / n and c.count == 0
        else:
            assert c.sigma == pytest.approx(math.sqrt(c.p_t * (1 - c.p_t) / n))
    assert t.success_theory is None and t.within()


def test_simulate_cli_csv(capsys):
    code, out, err = run(capsys, "simulate", "--bob", "cheat", "--rounds", "50000")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == list(reports.FREQUENCY_HEADER)
    assert len(rows) == 4 * 4
    assert "cheating success" in err and "theory 0.750000" in err


def test_simulate_cli_reproducible(capsys):
    a = run(capsys, "simulate", "--protocol", "reversed", "--alice", "cheat", "--rounds", "30000", "--format", "json")
    b = run(capsys, "simulate", "--protocol", "reversed", "--alice", "cheat", "--rounds", "30000", "--format", "json")
    assert a == b
    doc = json.loads(a[1])
    assert doc["meta"]["scenario"] == "reversed-alice-cheat"
    assert doc["meta"]["success_theory"] == pytest.approx(0.5)


def test_simulate_with_testing(capsys):
    code, _, err = run(capsys, "simulate", "--alice", "cheat", "--test-fraction", "0.5", "--rounds", "20000")
    assert code == 0
    assert "direct-alice-entangled" in err and "not aborted" in err


@pytest.mark.parametrize(
    "args, name",
    [
        (("direct", "honest", "honest", None), "direct-honest"),
        (("direct", "cheat", "honest", None), "direct-alice-cheat"),
        (("direct", "cheat", "honest", 0.5), "direct-alice-entangled"),
        (("direct", "honest", "cheat", None), "direct-bob-cheat"),
        (("reversed", "honest", "honest", None), "reversed-honest"),
        (("reversed", "cheat", "honest", None), "reversed-alice-cheat"),
        (("reversed", "honest", "cheat", None), "reversed-bob-eigenvector"),
        (("reversed", "honest", "cheat", 0.5), "reversed-bob-cheat"),
    ],
)
def test_scenario_mapping(args, name):
    assert cli.scenario_for(*args)[0] == name


# -------------------------------------------------------------- tradeoff


def test_tradeoff_rows():
    rows = reports.tradeoff_rows(11)
    classical = [r for r in rows if r.kind == "classical"]
    assert len(classical) == 11 and all(r.metric == 5 for r in classical)
    quantum = rows[-1]
    assert quantum.kind == "quantum" and quantum.metric == 4.5
    assert (quantum.a_ot, quantum.b_ot) == pytest.approx((0.5, 0.75))


def test_tradeoff_cli(capsys):
    code, out, _ = run(capsys, "tradeoff", "--s-points", "3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["kind"] for r in rows] == ["classical"] * 3 + ["quantum"]
    assert {r["xot_margin"] for r in rows} == {"1"}
    assert float(rows[0]["ot_margin"]) == pytest.approx(0.147)
    assert float(rows[0]["reference_b_ot_lower"]) == 0.5073
    code, out, _ = run(capsys, "tradeoff", "--s-points", "2", "--format", "json")
    assert json.loads(out)["meta"]["annotations"]["xot_advantage_larger"] is True


# ---------------------------------------------------------------- verify


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert "PASS  qutrit exact values" in out and "B_OT(1/3,-1/3) = 0.75" in out
    assert "all checks passed" in out


def test_verify_detects_tampered_normalisation(monkeypatch, capsys):
    monkeypatch.setattr(measurements, "ELIMINATION_NORMALIZATION", 0.3)
    code, out, _ = run(capsys, "verify")
    assert code == 1
    assert "FAIL  elimination POVM completeness" in out


def test_verify_json(capsys):
    code, out, err = run(capsys, "verify", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["passed"] is True
    names = {r["name"] for r in doc["rows"]}
    assert "closed forms vs oracles" in names
    assert "PASS" in err


def test_informational_checks_do_not_gate():
    results = [
        reports.CheckResult("a", True, 0.0),
        reports.CheckResult("b", False, 1.0, informational=True),
    ]
    assert reports.verify_passed(results)
    assert "XFAIL" in reports.verify_text(results)
    results.append(reports.CheckResult("c", False, 1.0))
    assert not reports.verify_passed(results)
    assert "failed: c" in reports.verify_text(results)
