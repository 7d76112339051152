import csv
import dataclasses
import io
import json
import shlex
import subprocess
import sys

import jsonschema
import mpmath
import pytest

from besselmax import cli
from besselmax.cli import main, reference_tables, report_schema
from besselmax.errors import ConvergenceError
from besselmax.maxdist import ModelParams, prob_pitman_yor, prob_thm1


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def split_csv(text):
    meta = [l for l in text.splitlines() if l.startswith("#")]
    body = [l for l in text.splitlines() if not l.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body) + "\n"), strict=True))
    return meta, rows


def header_argv(meta):
    line = next(l for l in meta if l.startswith("# argv: "))
    return shlex.split(line[len("# argv: "):])[1:]


class TestEval:
    def test_table_point(self, capsys):
        code, out, _ = run(capsys, "eval", "--n", "10", "--alpha", "1", "--a", "1", "--m", "5")
        meta, rows = split_csv(out)
        assert code == 0
        rec = dict(zip(rows[0], rows[1]))
        assert abs(float(rec["value"]) - 0.9842) < 1e-3
        assert rec["crosscheck_route"] == "thm2_hankel"
        assert any(l.startswith("# version:") for l in meta)

    def test_pitman_yor_alias(self, capsys):
        code, out, _ = run(capsys, "eval", "--n", "1", "--alpha", "0.5", "--a", "0", "--m", "2",
                           "--route", "pitman-yor")
        rec = dict(zip(*split_csv(out)[1]))
        assert code == 0 and rec["route"] == "pitman_yor"
        with mpmath.workprec(106):
            assert abs(mpmath.mpf(rec["value"]) - prob_pitman_yor(0.5, 2.0).value) < 1e-25
        assert abs(float(rec["value"]) - float(rec["crosscheck_value"])) < 1e-25

    def test_wall_at_start_is_zero(self, capsys):
        code, out, _ = run(capsys, "eval", "--n", "10", "--alpha", "1", "--a", "1", "--m", "1")
        rec = dict(zip(*split_csv(out)[1]))
        assert code == 0 and float(rec["value"]) == 0.0

    def test_invalid_params_exit_1(self, capsys):
        code, _, err = run(capsys, "eval", "--n", "2", "--alpha", "-3", "--a", "1", "--m", "2")
        assert code == 1 and "alpha" in err

    def test_missing_params_exit_1(self, capsys):
        code, _, _ = run(capsys, "eval", "--n", "2")
        assert code == 1

    def test_route_disagreement_exit_2(self, capsys, monkeypatch):
        real = cli.probability

        def skewed(params, route, trunc, prec):
            r = real(params, route, trunc, prec)
            return dataclasses.replace(r, value=r.value + 1e-3) if route == "thm2_hankel" else r

        monkeypatch.setattr(cli, "probability", skewed)
        code, _, err = run(capsys, "eval", "--n", "2", "--alpha", "1", "--a", "1", "--m", "3")
        assert code == 2 and "differ" in err

    def test_convergence_failure_exit_3(self, capsys, monkeypatch):
        def fail(*_):
            raise ConvergenceError("tail not below tolerance")

        monkeypatch.setattr(cli, "probability", fail)
        code, _, err = run(capsys, "eval", "--n", "2", "--alpha", "1", "--a", "1", "--m", "3")
        assert code == 3 and "convergence" in err

    def test_value_clamped_for_display(self, capsys, monkeypatch):
        real = cli.probability

        def over(params, route, trunc, prec):
            r = real(params, route, trunc, prec)
            return dataclasses.replace(r, value=r.value + 1)

        monkeypatch.setattr(cli, "probability", over)
        _, out, _ = run(capsys, "eval", "--n", "2", "--alpha", "1", "--a", "1", "--m", "3",
                        "--no-crosscheck")
        assert float(dict(zip(*split_csv(out)[1]))["value"]) == 1.0

    def test_pretty_six_significant_digits(self, capsys):
        _, out, _ = run(capsys, "eval", "--n", "2", "--alpha", "1", "--a", "1", "--m", "3",
                        "--format", "pretty", "--no-crosscheck")
        v = float(prob_thm1(ModelParams(2, 1.0, 1.0, 3.0)).value)
        assert f"{v:.6g}" in out

    def test_json(self, capsys):
        _, out, _ = run(capsys, "eval", "--n", "2", "--alpha", "1", "--a", "1", "--m", "3",
                        "--format", "json")
        doc = json.loads(out)
        assert doc["meta"]["command"] == "eval" and doc["rows"][0]["route"] == "thm1"


class TestRoundTrip:
    @pytest.mark.parametrize("argv", [
        ["eval", "--n", "3", "--alpha", "2.3", "--a", "0.5", "--m", "2"],
        ["sweep", "--n", "2", "--alpha", "1", "--a", "1", "--m", "4", "--var", "M",
         "--start", "2", "--stop", "3", "--step", "0.25"],
        ["zeros", "--alpha", "0.7", "--count", "8"],
        ["mc", "--dim", "3", "--m", "2", "--samples", "3000", "--grid", "1024", "--seed", "5"],
    ])
    def test_header_reproduces_numbers(self, capsys, argv):
        _, first, _ = run(capsys, *argv)
        meta, rows = split_csv(first)
        _, again, _ = run(capsys, *header_argv(meta))
        assert split_csv(again)[1] == rows

    def test_out_file(self, tmp_path, capsys):
        path = tmp_path / "z.csv"
        assert main(["zeros", "--alpha", "0", "--count", "3", "--out", str(path)]) == 0
        raw = path.read_bytes()
        assert b"\r" not in raw
        _, rows = split_csv(raw.decode("utf-8"))
        assert rows[0] == ["n", "x_n", "residual"]
        assert abs(float(rows[1][1]) - 2.404825557695773) < 1e-14


class TestTables:
    def test_reference_data(self):
        t = reference_tables()
        assert t["version"] == 1 and len(t["tables"]["table1"]["rows"]) == 12
        assert len(t["anomalies"]) >= 2

    def test_table2(self, capsys):
        code, out, _ = run(capsys, "table2")
        meta, rows = split_csv(out)
        assert code == 0 and rows[0] == ["a", "computed", "reference", "abs_diff", "est_error"]
        assert all(float(r[3]) < 1e-3 for r in rows[1:])
        assert all(abs(float(r[1]) - float(r[2])) == pytest.approx(float(r[3])) for r in rows[1:])
        assert any("strictly decreasing: yes" in l for l in meta)
        assert any("anomaly" in l for l in meta)

    def test_table1_monotone(self, capsys):
        code, out, _ = run(capsys, "table1", "--format", "json")
        doc = json.loads(out)
        vals = [float(r["computed"]) for r in doc["rows"]]
        assert code == 0 and all(b > a for a, b in zip(vals, vals[1:]))
        assert abs(vals[3] - 0.018360077343448813) < 1e-12


class TestSweep:
    def test_monotone_in_wall(self, capsys):
        _, out, _ = run(capsys, "sweep", "--n", "3", "--alpha", "1", "--a", "1", "--m", "0",
                        "--var", "M", "--start", "2", "--stop", "4", "--step", "0.25")
        vals = [float(r[1]) for r in split_csv(out)[1][1:]]
        assert len(vals) == 9 and all(b > a for a, b in zip(vals, vals[1:]))

    def test_decreasing_in_start(self, capsys):
        _, out, _ = run(capsys, "sweep", "--n", "3", "--alpha", "1", "--a", "0", "--m", "3",
                        "--var", "a", "--start", "0.5", "--stop", "2.5", "--step", "0.5")
        vals = [float(r[1]) for r in split_csv(out)[1][1:]]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_empty_range(self, capsys):
        code, _, _ = run(capsys, "sweep", "--n", "1", "--alpha", "1", "--a", "0", "--m", "3",
                         "--var", "M", "--start", "4", "--stop", "3", "--step", "0.5")
        assert code == 1


class TestMc:
    def test_analytic_comparison(self, capsys):
        code, out, _ = run(capsys, "mc", "--dim", "3", "--a", "0", "--m", "2", "--samples", "20000",
                           "--grid", "4096", "--seed", "7")
        rec = dict(zip(*split_csv(out)[1]))
        diff = abs(float(rec["p_hat"]) - float(rec["analytic"]))
        assert code == 0 and diff <= 3 * float(rec["std_err"]) + float(rec["bias_bracket"])
        assert rec["within_allowance"] == "yes"

    def test_non_integer_dimension(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["mc", "--dim", "2.5", "--m", "2"])
        assert e.value.code == 1

    def test_bad_grid(self):
        with pytest.raises(SystemExit) as e:
            main(["mc", "--dim", "3", "--m", "2", "--grid", "1000"])
        assert e.value.code == 1


class TestVerify:
    def test_quick_report_validates(self, tmp_path):
        path = tmp_path / "report.json"
        code = main(["verify", "--depth", "quick", "--out", str(path)])
        doc = json.loads(path.read_text())
        jsonschema.validate(doc, report_schema())
        assert code == 0 and doc["passed"]
        assert {c["name"] for c in doc["checks"]} >= {"route_equivalence", "km_ratio_limit",
                                                      "monte_carlo", "zero_tables"}

    def test_module_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "besselmax", "--version"],
                           capture_output=True, text=True)
        assert r.returncode == 0 and "besselmax" in r.stdout
