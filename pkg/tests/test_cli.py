import json
import os
import subprocess
import sys
from fractions import Fraction as F

import pytest

from qwmatch import _kernels, cli
from qwmatch.graph import Graph, unique_pm_bipartite
from qwmatch.report import csv_to_rows, dumps_json, format_value, loads_json_value, parse_value, rows_to_csv
from qwmatch.walkmodel import BoundReport, analyze, johnson_instance


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestReportFormat:
    @pytest.mark.parametrize("v", [F(1, 5), F(2), 3, 0.1, 1e300, 2.0, -0.0, None, True, "x-y", float("inf")])
    def test_value_roundtrip(self, v):
        back = parse_value(format_value(v))
        assert back == v and type(back) is type(v)

    def test_rational_never_decimal(self):
        assert format_value(F(1, 5)) == "1/5"
        assert format_value(F(7)) == "7/1"

    def test_float_17_digits(self):
        assert format_value(0.1) == "0.10000000000000001"

    def test_json(self):
        text = dumps_json({"a": F(1, 3), "b": [1, 0.5, None], "c": float("inf")})
        doc = json.loads(text)
        assert doc == {"a": "1/3", "b": [1, 0.5, None], "c": "inf"}
        assert loads_json_value(doc["a"]) == F(1, 3)

    def test_bound_report_csv_roundtrip(self):
        for inst in (johnson_instance(2, 3), johnson_instance(3, 3)):
            rep = analyze(inst)
            rows = csv_to_rows(rows_to_csv([rep.as_dict()]))
            assert BoundReport(**rows[0]) == rep


class TestLemmas:
    def test_max_n5(self, capsys):
        code, out, _ = run(capsys, "lemmas", "--max-n", "5")
        assert code == 0
        rows = csv_to_rows(out)
        row = next(r for r in rows if r["n"] == 5 and r["check"] == "complete_count")
        assert (row["expected"], row["observed"], row["passed"]) == (945, 945, True)

    def test_max_n1(self, capsys):
        code, out, _ = run(capsys, "lemmas", "--max-n", "1")
        assert code == 0 and all(r["passed"] for r in csv_to_rows(out))

    def test_cap(self, capsys):
        code, _, err = run(capsys, "lemmas", "--max-n", "7")
        assert code == 2 and "max-n" in err

    def test_failure_sets_exit_status(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "count_pm_complete", lambda n: -1)
        code, _, err = run(capsys, "lemmas", "--max-n", "2")
        assert code == 1 and "FAILED" in err


class TestConstruct:
    def test_n3_stdout(self, capsys):
        code, out, _ = run(capsys, "construct", "--n", "3")
        lines = out.splitlines()
        assert code == 0
        assert lines[:2] == ["p 6 6", "b 3"]
        assert sum(l.startswith("e ") for l in lines) == 6
        assert Graph.from_edgelist(out) == unique_pm_bipartite(3)

    def test_n1_file(self, capsys, tmp_path):
        path = tmp_path / "g.txt"
        code, *_ = run(capsys, "construct", "--n", "1", "--out", str(path))
        assert code == 0 and path.read_text() == "p 2 1\nb 1\ne 0 1\n"

    def test_unwritable(self, capsys, tmp_path):
        bad = tmp_path / "missing" / "g.txt"
        code, _, err = run(capsys, "construct", "--n", "2", "--out", str(bad))
        assert code == 1 and str(bad) in err


class TestBounds:
    def test_n2_r3(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "2", "--r", "3")
        (row,) = csv_to_rows(out)
        assert code == 0
        assert (row["pi_min"], row["eq1_lower_bound"], row["phi"], row["psi"]) == (F(1, 5), 2, 3, 1)

    def test_n2_r2_json(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "2", "--r", "2", "--format", "json")
        doc = json.loads(out)
        assert code == 0 and doc["pi_min"] == "1/15" and doc["eq1_lower_bound"] == "7/1"

    def test_precondition(self, capsys):
        code, _, err = run(capsys, "bounds", "--n", "2", "--r", "7")
        assert code == 2 and "r=7" in err


class TestSimulate:
    def test_agrees_with_exact(self, capsys):
        code, out, _ = run(capsys, "simulate", "--n", "2", "--r", "3", "--trials", "10000", "--seed", "42")
        (row,) = csv_to_rows(out)
        assert code == 0 and row["within_3se"] is True
        assert abs(row["mean"] - float(row["exact_tau"])) <= 3 * row["stderr"]

    def test_single_trial(self, capsys):
        code, out, _ = run(capsys, "simulate", "--n", "2", "--r", "3", "--trials", "1", "--format", "json")
        doc = json.loads(out)
        assert code == 0 and doc["trials"] == 1 and doc["min_steps"] == doc["max_steps"] >= 0

    def test_timeout_exit(self, capsys):
        code, _, err = run(capsys, "simulate", "--n", "2", "--r", "2", "--trials", "200", "--max-steps", "1")
        assert code == 1 and "max-steps" in err

    def test_bit_identical(self, capsys):
        a = run(capsys, "simulate", "--n", "2", "--r", "2", "--seed", "7")[1]
        b = run(capsys, "simulate", "--n", "2", "--r", "2", "--seed", "7")[1]
        assert a == b

    @pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
    def test_backend_does_not_change_output(self, capsys):
        args = ["simulate", "--n", "2", "--r", "3", "--trials", "3000", "--seed", "5"]
        assert run(capsys, *args, "--backend", "numpy")[1] == run(capsys, *args, "--backend", "numba")[1]


class TestBlowup:
    def test_rows(self, capsys):
        code, out, _ = run(capsys, "blowup", "--max-n", "10")
        rows = csv_to_rows(out)
        assert code == 0
        assert (rows[0]["pi_min"], rows[0]["eq1"]) == (F(1, 15), 7)
        assert (rows[1]["pi_min"], rows[1]["eq1"]) == (F(1, 455), 227)
        eq1 = [r["eq1"] for r in rows]
        ratios = [b / a for a, b in zip(eq1, eq1[1:])]
        assert all(y > x for x, y in zip(ratios, ratios[1:]))
        assert rows[0]["exact_tau"] == F(208, 15)
        assert rows[2]["exact_tau"] is None

    def test_budget_policy(self, capsys):
        code, out, _ = run(capsys, "blowup", "--max-n", "4", "--r-policy", "budget")
        rows = csv_to_rows(out)
        assert code == 0 and [r["r"] for r in rows] == [4, 6, 8]

    def test_range(self, capsys):
        assert run(capsys, "blowup", "--max-n", "51")[0] == 2
        assert run(capsys, "blowup", "--max-n", "1")[0] == 2

    def test_max_n_50(self, capsys):
        code, out, _ = run(capsys, "blowup", "--max-n", "50", "--format", "json")
        doc = json.loads(out)
        assert code == 0 and len(doc) == 49 and doc[-1]["n"] == 50


def test_module_entry_point():
    env = dict(os.environ)
    res = subprocess.run([sys.executable, "-m", "qwmatch", "bounds", "--n", "2", "--r", "3"],
                         capture_output=True, text=True, env=env, check=False)
    assert res.returncode == 0 and res.stdout.startswith("r,lazy")
