import json
import os
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from spectra import checks as ck
from spectra.cli import main, render_report
from spectra.complex import dumps, fixture_e1, fixture_e2, loads, random_complex
from spectra.schemas import load_schema

ROOT = Path(__file__).resolve().parent.parent
E1 = str(ROOT / "fixtures" / "e1.json")
E2 = str(ROOT / "fixtures" / "e2.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_shipped_fixtures_match_builders():
    assert Path(E1).read_text() == dumps(fixture_e1())
    assert Path(E2).read_text() == dumps(fixture_e2())


def test_validate(capsys, tmp_path):
    assert run(capsys, "validate", E1) == (0, "ok\n", "")
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            {
                "top_degree": 1,
                "generators": [{"id": "y", "degree": 0, "action": "1"}, {"id": "x", "degree": 1, "action": "1"}],
                "differential": {"x": [["y", 1]]},
            }
        )
    )
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1 and "non-decreasing action" in out


def test_spectral_command(capsys):
    code, out, _ = run(capsys, "spectral", E1, "--ring", "Z", "--degree", "0", "--class", "v=1")
    assert code == 0 and "c = 1" in out.splitlines()
    code, rep = run_json(capsys, "spectral", E2, "--class", "x=1,w=-2", "--ring", "Z/2")
    assert rep["values"]["c"] == "2"
    code, rep = run_json(capsys, "spectral", E1, "--class", "u=1,v=-2")
    assert rep["values"]["c"] == "-inf"


def test_homology_command(capsys):
    code, rep = run_json(capsys, "homology", E2, "--degree", "0", "--level", "3")
    assert code == 0
    assert rep["values"]["rank"] == 0 and rep["values"]["torsion"] == [2]
    assert rep["values"]["generators"] == [{"order": 2, "cycle": {"y": "1"}}]
    code, rep = run_json(capsys, "homology", E1, "--degree", "0", "--ring", "Q")
    assert rep["values"]["group"] == "Q"


def test_depth_and_gamma_commands(capsys):
    code, rep = run_json(capsys, "depth", E2)
    assert rep["values"]["beta_tor"] == "3"
    assert rep["values"]["beta_tor_by_degree"] == {"0": "3", "1": "0"}
    code, rep = run_json(capsys, "depth", E1, "--class", "v=1")
    assert (rep["values"]["beta_spec"], rep["values"]["witness"]) == ("1", 2)
    code, rep = run_json(capsys, "gamma", E1, "--class", "v=1", "--dual-class", "u*=2,v*=1")
    assert rep["values"]["gamma"] == "1"
    code, rep = run_json(capsys, "gamma", E1, "--class", "v=1", "--dual-class", "u*=2,v*=1", "--ring", "Q")
    assert rep["values"]["gamma"] == "0"


def test_dual_and_gen_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "dual", E1)
    D = loads(out)
    assert D == fixture_e1().dual()
    path = tmp_path / "d.json"
    path.write_text(out)
    code, out2, _ = run(capsys, "dual", str(path))
    assert loads(out2) == fixture_e1()
    code, out, _ = run(capsys, "gen", "--seed", "17")
    assert out == dumps(random_complex(17))
    gen = tmp_path / "g.json"
    assert run(capsys, "gen", "--seed", "17", "--out", str(gen))[0] == 0
    assert gen.read_text() == out
    assert run(capsys, "validate", str(gen))[:2] == (0, "ok\n")
    jsonschema.validate(json.loads(out), load_schema("complex"))


def test_check_commands(capsys):
    code, recs = run_json(capsys, "check", "zq", E1, "--class", "v=1")
    assert code == 0 and recs[0]["status"] == "pass" and recs[0]["witness"]["k"] == 2
    code, recs = run_json(capsys, "check", "pd-z", E1, "--dual-class", "u*=2,v*=1")
    assert recs[0]["values"]["sum"] == "0"
    code, recs = run_json(capsys, "check", "lipschitz", E2, "--against", E2)
    assert recs[0]["status"] == "pass"
    code, recs = run_json(capsys, "check", "all", "--gen-seeds", "1..3")
    assert code == 0 and [r["inputs"]["seed"] for r in recs] == [1, 2, 3]
    assert all(r["status"] == "pass" for r in recs)


def test_check_lipschitz_against_moved_fixture(capsys, tmp_path):
    moved = tmp_path / "moved.json"
    moved.write_text(Path(E2).read_text().replace('"action": "5"', '"action": "4"'))
    code, recs = run_json(capsys, "check", "lipschitz", E2, "--against", str(moved))
    assert code == 0
    assert recs[0]["values"]["difference"] == "1" == recs[0]["values"]["shift_sum"]


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (["spectral", E1, "--class", "x=1"], "not a cycle"),
        (["spectral", E1, "--class", "q=1"], "unknown generator"),
        (["spectral", E1, "--class", "v"], "--class"),
        (["spectral", "/nonexistent.json", "--class", "v=1"], "cannot read"),
        (["check", "zq"], "check needs"),
        (["check", "all", E1, "--seed", "1"], "either"),
        (["check", "zq", "--gen-seeds", "5..1"], "--gen-seeds"),
        (["check", "zq", E1, "--against", E2], "--against"),
        (["check", "refine", E1, "--class", "v=1", "--prime", "4"], "not prime"),
        (["gamma", E1, "--class", "v=1", "--dual-class", "x*=1"], "nonzero"),
        (["qring", "inverse", "1+x", "--n", "2", "--ring", "Q"], "only monomials"),
        (["qring", "add", "x", "--n", "2"], "takes 2"),
    ],
)
def test_usage_errors_exit_two(capsys, argv, fragment):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("spectra: error:") and fragment in err


def test_argparse_errors_exit_two(capsys):
    for argv in (["nope"], ["check", "bogus", E1], ["homology", E1, "--degree", "0", "--ring", "Z/1"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
    capsys.readouterr()


def test_format_error_names_field(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"top_degree": 1, "generators": [], "colour": 1}')
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 2 and "colour" in err


def test_failing_check_exits_one(capsys, monkeypatch):
    def broken(a):
        return ck.report("zq", {"class": a}, ck.FAIL)

    monkeypatch.setattr(ck, "check_z_vs_q", broken)
    code, recs = run_json(capsys, "check", "zq", E1, "--class", "v=1")
    assert code == 1 and recs[0]["status"] == "fail"
    code, recs = run_json(capsys, "check", "zq", "--gen-seeds", "1..2")
    assert code == 1 and recs[0]["witness"]["failures"]


def test_inconclusive_exits_zero(capsys):
    code, recs = run_json(capsys, "check", "refine", E1, "--class", "v=1", "--prime", "3")
    assert code == 0 and recs[0]["status"] == "inconclusive"


def test_qring_command(capsys):
    assert run(capsys, "qring", "mul", "x^2", "x", "--n", "2")[1] == "t\n"
    assert run(capsys, "qring", "inverse", "x", "--n", "1", "--ring", "Q")[1] == "x*t^-1\n"
    assert run(capsys, "qring", "pair", "1", "x^3", "--n", "3")[1] == "1\n"
    assert run(capsys, "qring", "degree", "1 + x", "--n", "3")[1] == "inhomogeneous\n"
    assert run(capsys, "qring", "valuation", "x + x*t^2", "--n", "3")[1] == "2\n"


JSON_COMMANDS = [
    ("report", ["validate", E1]),
    ("report", ["homology", E2, "--degree", "0", "--level", "3"]),
    ("report", ["spectral", E1, "--class", "v=1"]),
    ("report", ["depth", E1, "--class", "v=1"]),
    ("report", ["gamma", E1, "--class", "v=1", "--dual-class", "u*=2,v*=1"]),
    ("report", ["qring", "mul", "x", "x", "--n", "1"]),
    ("reports", ["check", "all", E1]),
    ("reports", ["check", "zq", "--seed", "4"]),
    ("reports", ["check", "depth-id", E1, "--class", "v=1", "--dual-class", "u*=2,v*=1"]),
]


@pytest.mark.parametrize("schema, argv", JSON_COMMANDS)
def test_json_output_matches_schema(capsys, schema, argv):
    code, doc = run_json(capsys, *argv)
    assert code == 0
    jsonschema.validate(doc, load_schema(schema))


def _flatten(values, prefix=""):
    for k, v in values.items():
        if isinstance(v, dict) and v:
            yield from _flatten(v, prefix)
        elif not isinstance(v, list):
            yield k, v


@pytest.mark.parametrize("schema, argv", [c for c in JSON_COMMANDS if c[0] == "report" and c[1][0] not in ("qring", "validate")])
def test_table_and_json_show_the_same_values(capsys, schema, argv):
    code, doc = run_json(capsys, *argv)
    _, table, _ = run(capsys, *argv)
    assert table.strip() == render_report(doc)
    lines = {line.strip() for line in table.splitlines()}
    for k, v in _flatten(doc["values"]):
        shown = str(v).lower() if isinstance(v, bool) else str(v)
        assert f"{k} = {shown}" in lines


def test_out_flag_writes_file(capsys, tmp_path):
    out = tmp_path / "rep.json"
    assert main(["spectral", E1, "--class", "v=1", "--json", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["values"]["c"] == "1"


def test_subprocess_is_deterministic():
    env = dict(os.environ, SPECTRA_THREADS="3")
    cmd = [sys.executable, "-m", "spectra", "check", "all", "--gen-seeds", "1..6", "--json"]
    first = subprocess.run(cmd, capture_output=True, text=True, env=env, check=True)
    second = subprocess.run(cmd, capture_output=True, text=True, env=dict(env, SPECTRA_THREADS="1"), check=True)
    assert first.stdout == second.stdout
    recs = json.loads(first.stdout)
    jsonschema.validate(recs, load_schema("reports"))
    assert len(recs) == 6


def test_bad_thread_count(capsys, monkeypatch):
    monkeypatch.setenv("SPECTRA_THREADS", "zero")
    code, _, err = run(capsys, "check", "zq", "--gen-seeds", "1..2")
    assert code == 2 and "SPECTRA_THREADS" in err
