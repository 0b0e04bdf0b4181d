import json

import pytest
from click.testing import CliRunner

from robustpop.cli import SCHEMA, main
from robustpop.sdpa import import_sdpa


def run(args, env=None):
    result = CliRunner().invoke(main, args, env=env, catch_exceptions=False, auto_envvar_prefix="ROBUSTPOP")
    return result


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def strip_timing(recs):
    return [{k: v for k, v in r.items() if k != "timing"} for r in recs]


@pytest.fixture
def square_file(tmp_path):
    path = tmp_path / "square.json"
    path.write_text(json.dumps({"variables": ["x"], "objective": ["1 2"], "order": 1}))
    return path


def test_relax_motzkin_nominal_dual(tmp_path):
    out = tmp_path / "m8.dat-s"
    res = run(["relax", "motzkin", "--order", "8", "--formulation", "nominal-dual", "--out", str(out)])
    assert res.exit_code == 0, res.output
    sdp = import_sdpa(out)
    assert sdp.m == 153 and sdp.block_sizes[0] == 45
    assert records(res.output)[0]["schema"] == SCHEMA


def test_relax_priority_psd_has_diagonal_block():
    res = run(["relax", "motzkin", "--order", "4", "--formulation", "priority-psd", "--eps", "1e-8"])
    assert res.exit_code == 0
    lines = [ln for ln in res.output.splitlines() if not ln.startswith("*")]
    sizes = [int(v) for v in lines[2].split()]
    assert sizes[0] == 15 and sizes[1] < 0


def test_malformed_term_names_the_line(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"variables": 1, "objective": ["1 2", "1 x"]}))
    res = CliRunner().invoke(main, ["solve", str(bad)])
    assert res.exit_code != 0
    assert "line 2" in res.output and "[relax]" in res.output


def test_malformed_json_names_the_line(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n"variables": 1,\n"objective": [\n')
    res = CliRunner().invoke(main, ["solve", str(bad)])
    assert res.exit_code != 0 and "line" in res.output


def test_negative_radius_rejected():
    res = CliRunner().invoke(main, ["relax", "motzkin", "--order", "3", "--eps", "-1"])
    assert res.exit_code == 2


def test_solve_square(square_file):
    res = run(["solve", str(square_file)])
    assert res.exit_code == 0
    recs = records(res.output)
    assert [r["stage"] for r in recs] == ["manifest", "relax", "solve", "extract"]
    solve_rec, ext = recs[2], recs[3]
    assert solve_rec["status"] == "OPTIMAL"
    assert abs(solve_rec["bound"]) < 1e-6
    assert ext["points"] == [[pytest.approx(0.0, abs=1e-4)]]
    assert ext["certified"] is True


def test_solve_motzkin_order_three_diverges():
    res = run(["solve", "motzkin", "--order", "3", "--formulation", "nominal-dual", "--epsilon-star", "1e-11"])
    recs = records(res.output)
    assert recs[-1]["stage"] == "solve"
    assert recs[-1]["status"] == "DUAL_INFEASIBLE_SUSPECTED" or recs[-1]["bound"] < -1e3


def test_reports_are_deterministic_and_rerunnable(square_file, tmp_path):
    out = tmp_path / "r.jsonl"
    first = run(["solve", str(square_file), "--formulation", "priority-psd", "--eps", "1/100", "--out", str(out)])
    assert first.exit_code == 0
    a = records(out.read_text())
    b = records(run(["solve", str(square_file), "--formulation", "priority-psd", "--eps", "1/100"]).output)
    a_cmp = strip_timing(a)
    a_cmp[0]["manifest"]["out"] = None
    assert a_cmp == strip_timing(b)
    again = records(run(["rerun", str(out)]).output)
    assert strip_timing(again)[1:] == strip_timing(a)[1:]
    assert a[-1]["stage"] == "rank_one"


def test_environment_overrides_flags():
    res = run(["solve", "motzkin", "--formulation", "nominal-dual"], env={"ROBUSTPOP_SOLVE_ORDER": "3"})
    recs = records(res.output)
    assert recs[0]["manifest"]["order"] == 3


def test_reproduce_univariate_table():
    res = run(["reproduce", "univariate"])
    assert res.exit_code == 0
    table = {r["run"]: r["digits"] for r in records(res.output) if r["stage"] == "exact_minima"}
    assert table["univariate-g0-e1e-7"] == [{"x": "0.9961", "value": "0.1496"}]
    assert [d["value"] for d in table["univariate-g0-e1e-30"]] == ["0.1496", "0.1495"]
    assert [d["x"] for d in table["univariate-g1/1000-e1e-30"]] == ["1.004", "100"]


def test_rerun_without_manifest(tmp_path):
    empty = tmp_path / "e.jsonl"
    empty.write_text(json.dumps({"stage": "solve"}) + "\n")
    res = CliRunner().invoke(main, ["rerun", str(empty)])
    assert res.exit_code != 0 and "no solve manifest" in res.output
