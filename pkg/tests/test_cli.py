import csv
import decimal
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from serre_bounds.cli import main, parse_lambda
from serre_bounds.report import RunReport
from serre_bounds.tower import TowerElement


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- bounds eval ------------------------------------------------------------------------------------------

CM_FLAGS = ("bounds", "eval", "--g", "1", "--degK", "1", "--hF", "1", "--type", "CM", "--deltaV", "1")


def test_cm_torsion_translates_row(capsys):
    code, out, _ = run(capsys, *CM_FLAGS, "--op", "torsion_translates_bound")
    assert code == 0
    (row,) = json.loads(out)["rows"]
    assert row["op"] == "torsion_translates_bound"
    assert row["value"]["kind"] == "exact" and row["value"]["rounded"] == "up"
    assert int(row["value"]["value"]) == 16**243
    assert abs(float(row["value"]["log10"]) - 292.6) < 0.01


def test_exact_values_beyond_str_digit_limit(capsys):
    # g^(2g^2) Xi^g for g=3 has about 5200 digits, past the default int-to-str limit
    argv = ("bounds", "eval", "--g", "3", "--degK", "2", "--hF", "1/2", "--op", "semisimplicity_threshold")
    code, out, _ = run(capsys, *argv)
    assert code == 0
    (row,) = json.loads(out)["rows"]
    assert row["value"]["kind"] == "exact"
    assert int(decimal.Decimal(row["value"]["value"])) == 3**18 * ((21**72) * 2) ** 54


def test_csv_matches_json(capsys):
    _, as_json, _ = run(capsys, *CM_FLAGS, "--all")
    _, as_csv, _ = run(capsys, *CM_FLAGS, "--all", "--format", "csv")
    json_rows = {r["op"]: r["value"] for r in json.loads(as_json)["rows"]}
    csv_rows = {r["op"]: r for r in csv.DictReader(io.StringIO(as_csv))}
    assert set(json_rows) == set(csv_rows)
    for op, value in json_rows.items():
        assert csv_rows[op]["kind"] == value["kind"]
        assert csv_rows[op]["value"] == ("" if value["value"] is None else value["value"])


def test_unknown_op_is_a_usage_error(capsys):
    code, _, _ = run(capsys, "bounds", "eval", "--g", "1", "--op", "no_such_bound")
    assert code == 2


def test_missing_parameter_names_it(capsys):
    code, _, err = run(capsys, "bounds", "eval", "--g", "1", "--deltaV", "1", "--op", "torsion_translates_bound")
    assert code == 2 and "c_A" in err and "not known effectively" in err


def test_missing_zywina_parameters(capsys):
    code, _, err = run(capsys, "bounds", "eval", "--g", "1", "--op", "ell0_zywina")
    assert code == 2 and "alpha" in err


def test_all_reports_unavailable_rows(capsys):
    code, out, _ = run(capsys, "bounds", "eval", "--g", "1")
    rows = {r["op"]: r["value"] for r in json.loads(out)["rows"]}
    assert code == 0
    assert rows["serre_c_small_prime"]["kind"] == "unavailable"
    assert rows["ell0_zywina"]["kind"] == "symbolic"
    assert rows["xi"]["value"] == "33232930569601"


def test_paper_refs_annotate_rows(capsys):
    _, out, _ = run(capsys, *CM_FLAGS, "--op", "xi", "--paper-refs")
    (row,) = json.loads(out)["rows"]
    assert "7g" in row["paper_ref"]


def test_context_file_and_override(tmp_path, capsys):
    ctx = tmp_path / "ctx.json"
    ctx.write_text('{"g": 1, "degK": 1, "hF": 0.5, "type": "CM", "deltaV": 2}')
    code, out, _ = run(capsys, "bounds", "eval", "--context", str(ctx), "--deltaV", "1", "--op", "torsion_translates_bound")
    assert code == 0
    assert int(json.loads(out)["rows"][0]["value"]["value"]) == 16**243


@pytest.mark.parametrize("text", ["{", '{"g": 0}', '{"hF": "abc"}', '{"bogus": 1}'])
def test_malformed_context_file(tmp_path, capsys, text):
    ctx = tmp_path / "ctx.json"
    ctx.write_text(text)
    code, _, err = run(capsys, "bounds", "eval", "--context", str(ctx), "--all")
    assert code == 2 and "error" in err


# -- tower and cohomology -------------------------------------------------------------------------------------


def test_tower_jumps(capsys):
    code, out, _ = run(capsys, "tower", "jumps", "--ell", "3", "--levels", "3", "--json")
    report = json.loads(out)
    assert code == 0
    assert report["rows"][0]["kappa"] == 0 and report["status"] == "pass"


@pytest.mark.parametrize(
    "argv",
    [
        ("tower", "jumps", "--ell", "2", "--levels", "1"),
        ("tower", "jumps", "--ell", "11", "--levels", "3"),
        ("tower", "jumps", "--ell", "3", "--levels", "0"),
        ("tower", "trace-check", "--ell", "9", "--level", "1"),
        ("tower", "trace-check", "--ell", "3", "--level", "1", "--samples", "0"),
        ("cohomology", "vanish-check", "--ell", "3", "--level", "1", "--lambda", "1"),
        ("cohomology", "vanish-check", "--ell", "3", "--level", "1", "--lambda", "import os"),
        ("cohomology", "vanish-check", "--ell", "3", "--level", "1", "--lambda", "zeta ** -1"),
        ("cohomology", "c6", "--ell", "4"),
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_trace_check_example(capsys):
    code, out, _ = run(capsys, "tower", "trace-check", "--ell", "5", "--level", "2", "--samples", "1000", "--seed", "42", "--json")
    report = json.loads(out)
    assert code == 0 and report["status"] == "pass"
    cert = next(r for r in report["records"] if r["name"] == "t_contraction.l5.n2")["data"]
    assert {"ell", "e", "level", "bound", "margin", "samples", "skipped", "seed", "verdict"} <= set(cert)
    assert cert["samples"] == 1000 and cert["seed"] == 42


def test_stated_trace_form_fails_with_exit_one(capsys):
    code, out, _ = run(capsys, "tower", "trace-check", "--ell", "3", "--level", "1", "--samples", "50", "--stated")
    assert code == 1 and "FAIL trace_step.stated" in out


def test_vanish_check(capsys):
    code, out, _ = run(capsys, "cohomology", "vanish-check", "--ell", "3", "--level", "2", "--lambda", "1 + 9", "--json")
    report = json.loads(out)
    assert code == 0
    assert report["rows"][0]["margin"] == "47/6" and report["rows"][0]["c6"] == 6


def test_c6_command(capsys):
    code, out, _ = run(capsys, "cohomology", "c6", "--ell", "3", "--e", "2", "--json")
    (record,) = json.loads(out)["records"]
    assert code == 0 and record["data"]["c6"] == 6


def test_lambda_expressions():
    lam = parse_lambda("1 + 3*(zeta - 1)**2 / 2", 3, 20)
    z = TowerElement.zeta_power(3, 0, 20, 1)
    assert lam.congruent(1 + (z - 1) * (z - 1) * Fraction(3, 2))
    assert parse_lambda("ell**2 + 1", 5, 10).congruent(26)


# -- configuration, threads and determinism ------------------------------------------------------------------------


def test_config_merges_under_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"samples": 20, "seed": 3}')
    _, out, _ = run(capsys, "--config", str(cfg), "tower", "trace-check", "--ell", "3", "--level", "1", "--json")
    assert json.loads(out)["seed"] == 3
    _, out, _ = run(capsys, "--config", str(cfg), "tower", "trace-check", "--ell", "3", "--level", "1", "--seed", "5", "--json")
    report = json.loads(out)
    assert report["seed"] == 5
    cert = next(r for r in report["records"] if r["name"].startswith("t_contraction"))["data"]
    assert cert["samples"] == 20


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"colour": "blue"}')
    code, _, _ = run(capsys, "--config", str(cfg), "cohomology", "c6")
    assert code == 2


def test_thread_variable(monkeypatch, capsys):
    argv = ("tower", "trace-check", "--ell", "3", "--level", "2", "--samples", "30", "--json")
    _, serial, _ = run(capsys, *argv)
    monkeypatch.setenv("SERRE_BOUNDS_THREADS", "2")
    _, parallel, _ = run(capsys, *argv)
    assert serial == parallel
    monkeypatch.setenv("SERRE_BOUNDS_THREADS", "zero")
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_same_seed_same_bytes(capsys):
    argv = ("tower", "trace-check", "--ell", "5", "--level", "1", "--samples", "40", "--seed", "9", "--json")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert RunReport.from_json(first).to_json() == first


def test_module_entry_point():
    result = subprocess.run([sys.executable, "-m", "serre_bounds", "--version"], capture_output=True, text=True)
    assert result.returncode == 0 and "0.1.0" in result.stdout
