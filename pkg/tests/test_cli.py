"""Command line interface: file round trips, reports, exit codes."""

from __future__ import annotations

import json

import numpy as np
import pytest

from monoscan import (
    AlternativeSpec,
    GridFunction,
    analytic_threshold,
    derive_stream,
    guarantee_threshold,
    scan,
    simulate_regression_sample,
    simulate_white_path,
)
from monoscan.cli import main


def write_values(path, values, header=False):
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write("value\n")
        fh.writelines(f"{float(v)!r}\n" for v in values)


@pytest.fixture(scope="module")
def reg20_table(tmp_path_factory):
    """Regression table for n=20 shared by the module (C=200, seed 31)."""
    path = tmp_path_factory.mktemp("tables") / "t20.json"
    rc = main(
        [
            "calibrate",
            "--model",
            "regression",
            "--n",
            "20",
            "--reps",
            "200",
            "--alphas",
            "0.05,0.2",
            "--seed",
            "31",
            "--out",
            str(path),
        ]
    )
    assert rc == 0
    return path


@pytest.fixture(scope="module")
def reg100_table(tmp_path_factory):
    """Regression table for n=100 (C=300, seed 32)."""
    path = tmp_path_factory.mktemp("tables") / "t100.json"
    rc = main(
        [
            "calibrate",
            "--model",
            "regression",
            "--n",
            "100",
            "--reps",
            "300",
            "--alphas",
            "0.05",
            "--seed",
            "32",
            "--out",
            str(path),
        ]
    )
    assert rc == 0
    return path


class TestCalibrateCommand:
    def test_rerun_is_byte_identical(self, tmp_path, capsys):
        args = [
            "calibrate",
            "--model",
            "regression",
            "--n",
            "10",
            "--reps",
            "100",
            "--alphas",
            "0.1,0.2",
            "--seed",
            "3",
        ]
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        assert main(args + ["--out", str(first)]) == 0
        out = capsys.readouterr().out
        assert out.count("alpha=") == 2
        assert main(args + ["--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_white_table_fields(self, tmp_path):
        path = tmp_path / "w.json"
        rc = main(
            [
                "calibrate",
                "--model",
                "white",
                "--n",
                "4",
                "--r",
                "2",
                "--reps",
                "100",
                "--alphas",
                "0.1",
                "--seed",
                "3",
                "--out",
                str(path),
            ]
        )
        assert rc == 0
        doc = json.loads(path.read_text())
        assert doc["model"] == "white"
        assert doc["n"] == 4
        assert doc["r"] == 2
        assert doc["C"] == 100
        assert len(doc["entries"]) == 1

    def test_usage_errors_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["calibrate", "--model", "nope", "--n", "10", "--reps", "100",
                  "--alphas", "0.05", "--seed", "1", "--out", str(tmp_path / "x")])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["calibrate", "--model", "white", "--n", "10", "--reps", "100",
                  "--alphas", "0.05,oops", "--seed", "1", "--out", str(tmp_path / "x")])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["calibrate", "--model", "white", "--n", "10", "--reps", "100",
                  "--alphas", "1.5", "--seed", "1", "--out", str(tmp_path / "x")])
        assert exc.value.code == 2

    def test_unsorted_levels_fail(self, tmp_path, capsys):
        rc = main(["calibrate", "--model", "regression", "--n", "10", "--reps",
                   "100", "--alphas", "0.2,0.1", "--seed", "1",
                   "--out", str(tmp_path / "x.json")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestTestCommand:
    def test_pinned_report(self, reg20_table, tmp_path):
        y = simulate_regression_sample(
            AlternativeSpec(kind="constant", sigma=0.1), 20, derive_stream(1234, 0)
        )
        data = tmp_path / "pinned.csv"
        write_values(data, y)
        out = tmp_path / "report.json"
        rc = main(
            ["test", "--model", "regression", "--data", str(data),
             "--alpha", "0.05", "--table", str(reg20_table), "--out", str(out)]
        )
        assert rc == 0
        assert json.loads(out.read_text()) == {
            "model": "regression",
            "n": 20,
            "alpha": 0.05,
            "threshold": 1.648680667259168,
            "threshold_source": "table",
            "statistic": 0.9316602630302594,
            "reject": False,
            "violating": [],
            "input_digest": "sha256:18d5dc0bacfcf573e78da8e4c9a776cf584c62b89c182f14d9eb2bce26882002",
        }

    def test_rerun_is_byte_identical(self, reg20_table, tmp_path):
        y = simulate_regression_sample(
            AlternativeSpec(kind="constant", sigma=0.1), 20, derive_stream(77, 0)
        )
        data = tmp_path / "d.csv"
        write_values(data, y)
        out1 = tmp_path / "r1.json"
        out2 = tmp_path / "r2.json"
        args = ["test", "--model", "regression", "--data", str(data),
                "--alpha", "0.05", "--table", str(reg20_table)]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_bump_is_localized(self, reg100_table, tmp_path):
        y = simulate_regression_sample(
            AlternativeSpec(kind="gijbels", a=0.45, sigma=0.025),
            100,
            derive_stream(99, 1),
        )
        data = tmp_path / "bump.csv"
        write_values(data, y)
        out = tmp_path / "report.json"
        rc = main(
            ["test", "--model", "regression", "--data", str(data),
             "--alpha", "0.05", "--table", str(reg100_table), "--out", str(out)]
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["reject"] is True
        assert doc["violating"]
        # the bump around 0.5 forces an increase: some flagged interval
        # must reach into [0.5, 1]
        assert any(j > 0.5 for _, j, _ in doc["violating"])
        for _, _, stat in doc["violating"]:
            assert stat > doc["threshold"]
        assert doc["statistic"] == max(s for _, _, s in doc["violating"])

    def test_analytic_is_more_conservative(self, reg20_table, tmp_path):
        table_doc = json.loads(reg20_table.read_text())
        quantile = table_doc["entries"][0]["quantile"]
        assert analytic_threshold(0.05, 10) >= quantile
        y = simulate_regression_sample(
            AlternativeSpec(kind="constant", sigma=0.1), 20, derive_stream(5, 0)
        )
        data = tmp_path / "d.csv"
        write_values(data, y)
        out_t = tmp_path / "t.json"
        out_a = tmp_path / "a.json"
        base = ["test", "--model", "regression", "--data", str(data), "--alpha", "0.05"]
        assert main(base + ["--table", str(reg20_table), "--out", str(out_t)]) == 0
        assert main(base + ["--analytic", "--out", str(out_a)]) == 0
        doc_t = json.loads(out_t.read_text())
        doc_a = json.loads(out_a.read_text())
        assert doc_a["threshold_source"] == "analytic"
        assert doc_a["threshold"] >= doc_t["threshold"]
        assert doc_a["statistic"] == doc_t["statistic"]
        # rejecting under the analytic bound implies rejecting under the table
        assert doc_t["reject"] or not doc_a["reject"]

    def test_white_round_trip_preserves_statistic(self, tmp_path):
        g = simulate_white_path(
            AlternativeSpec(kind="f3", sigma=0.5), 10, 5, derive_stream(8, 0)
        )
        data = tmp_path / "path.csv"
        write_values(data, g.values, header=True)
        out = tmp_path / "report.json"
        rc = main(
            ["test", "--model", "white", "--data", str(data), "--alpha", "0.05",
             "--analytic", "--sigma", "0.5", "--n", "10", "--out", str(out)]
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        expected = scan(g, 10, 0.25).max_stat
        assert doc["statistic"] == expected
        assert doc["n"] == 10
        assert doc["threshold"] == analytic_threshold(0.05, 10)

    def test_white_needs_sigma_and_n(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        write_values(data, [0.0, 0.1, 0.2, 0.1])
        base = ["test", "--model", "white", "--data", str(data), "--alpha", "0.05",
                "--analytic", "--out", str(tmp_path / "r.json")]
        assert main(base) == 1
        assert "--sigma" in capsys.readouterr().err
        assert main(base + ["--sigma", "1.0"]) == 1
        assert "--n" in capsys.readouterr().err

    def test_white_path_must_start_at_zero(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        write_values(data, [0.5, 0.1, 0.2, 0.1])
        rc = main(["test", "--model", "white", "--data", str(data), "--alpha",
                   "0.05", "--analytic", "--sigma", "1.0", "--n", "3",
                   "--out", str(tmp_path / "r.json")])
        assert rc == 1
        assert "start at 0" in capsys.readouterr().err

    def test_white_grid_divisibility(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        write_values(data, [0.0, 0.1, 0.2, 0.1])  # 3 steps
        rc = main(["test", "--model", "white", "--data", str(data), "--alpha",
                   "0.05", "--analytic", "--sigma", "1.0", "--n", "2",
                   "--out", str(tmp_path / "r.json")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_odd_regression_data_rejected(self, reg20_table, tmp_path, capsys):
        data = tmp_path / "d.csv"
        write_values(data, [1.0, 2.0, 3.0])
        rc = main(["test", "--model", "regression", "--data", str(data),
                   "--alpha", "0.05", "--table", str(reg20_table),
                   "--out", str(tmp_path / "r.json")])
        assert rc == 1
        assert "even" in capsys.readouterr().err

    def test_table_size_mismatch(self, reg20_table, tmp_path, capsys):
        y = simulate_regression_sample(
            AlternativeSpec(kind="constant", sigma=0.1), 22, derive_stream(5, 0)
        )
        data = tmp_path / "d.csv"
        write_values(data, y)
        rc = main(["test", "--model", "regression", "--data", str(data),
                   "--alpha", "0.05", "--table", str(reg20_table),
                   "--out", str(tmp_path / "r.json")])
        assert rc == 1
        assert "n=20" in capsys.readouterr().err

    def test_level_not_tabulated(self, reg20_table, tmp_path, capsys):
        y = simulate_regression_sample(
            AlternativeSpec(kind="constant", sigma=0.1), 20, derive_stream(5, 0)
        )
        data = tmp_path / "d.csv"
        write_values(data, y)
        rc = main(["test", "--model", "regression", "--data", str(data),
                   "--alpha", "0.07", "--table", str(reg20_table),
                   "--out", str(tmp_path / "r.json")])
        assert rc == 1
        assert "not interpolated" in capsys.readouterr().err

    def test_malformed_data(self, reg20_table, tmp_path, capsys):
        data = tmp_path / "d.csv"
        data.write_text("value\n1.0\nbroken\n", encoding="utf-8")
        rc = main(["test", "--model", "regression", "--data", str(data),
                   "--alpha", "0.05", "--table", str(reg20_table),
                   "--out", str(tmp_path / "r.json")])
        assert rc == 1
        assert "broken" in capsys.readouterr().err

    def test_empty_data(self, reg20_table, tmp_path, capsys):
        data = tmp_path / "d.csv"
        data.write_text("value\n\n", encoding="utf-8")
        rc = main(["test", "--model", "regression", "--data", str(data),
                   "--alpha", "0.05", "--table", str(reg20_table),
                   "--out", str(tmp_path / "r.json")])
        assert rc == 1
        assert "no data" in capsys.readouterr().err

    def test_missing_data_file(self, reg20_table, tmp_path, capsys):
        rc = main(["test", "--model", "regression", "--data",
                   str(tmp_path / "absent.csv"), "--alpha", "0.05",
                   "--table", str(reg20_table), "--out", str(tmp_path / "r.json")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_table_or_analytic_required(self, tmp_path):
        data = tmp_path / "d.csv"
        write_values(data, [1.0, 2.0, 3.0, 4.0])
        with pytest.raises(SystemExit) as exc:
            main(["test", "--model", "regression", "--data", str(data),
                  "--alpha", "0.05", "--out", str(tmp_path / "r.json")])
        assert exc.value.code == 2


class TestPowerCommand:
    def scenario_rows(self):
        return [
            {"kind": "constant", "sigma": 0.1, "model": "regression",
             "n": 20, "alpha": 0.2},
            {"kind": "gijbels", "a": 0.45, "sigma_sq": 0.000625,
             "model": "regression", "n": 20, "alpha": 0.2},
        ]

    def test_batch_outputs(self, reg20_table, tmp_path):
        scen = tmp_path / "scen.json"
        scen.write_text(json.dumps(self.scenario_rows()), encoding="utf-8")
        out = tmp_path / "pow.json"
        rc = main(["power", "--scenario", str(scen), "--table", str(reg20_table),
                   "--reps", "100", "--seed", "40", "--out", str(out)])
        assert rc == 0
        reports = json.loads(out.read_text())
        assert len(reports) == 2
        assert reports[0]["spec"]["kind"] == "constant"
        assert reports[1]["spec"]["sigma"] == pytest.approx(0.025, rel=1e-12)
        for doc in reports:
            assert doc["replications"] == 100
            assert 0.0 <= doc["power"] <= 1.0
            assert doc["ci95"][0] <= doc["power"] <= doc["ci95"][1]
        csv_lines = (tmp_path / "pow.csv").read_text().splitlines()
        assert csv_lines[0].startswith("kind,")
        assert len(csv_lines) == 3

    def test_rerun_is_byte_identical(self, reg20_table, tmp_path):
        scen = tmp_path / "scen.json"
        scen.write_text(json.dumps(self.scenario_rows()), encoding="utf-8")
        out1 = tmp_path / "p1.json"
        out2 = tmp_path / "p2.json"
        base = ["power", "--scenario", str(scen), "--table", str(reg20_table),
                "--reps", "100", "--seed", "40"]
        assert main(base + ["--out", str(out1)]) == 0
        assert main(base + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert (tmp_path / "p1.csv").read_bytes() == (tmp_path / "p2.csv").read_bytes()

    def test_row_seed_offset(self, reg20_table, tmp_path):
        # row t of a batch runs on seed+t, so a single-row file with the
        # shifted seed reproduces it
        scen2 = tmp_path / "two.json"
        scen2.write_text(json.dumps(self.scenario_rows()), encoding="utf-8")
        out2 = tmp_path / "two_out.json"
        assert main(["power", "--scenario", str(scen2), "--table",
                     str(reg20_table), "--reps", "100", "--seed", "40",
                     "--out", str(out2)]) == 0
        scen1 = tmp_path / "one.json"
        scen1.write_text(json.dumps(self.scenario_rows()[1:]), encoding="utf-8")
        out1 = tmp_path / "one_out.json"
        assert main(["power", "--scenario", str(scen1), "--table",
                     str(reg20_table), "--reps", "100", "--seed", "41",
                     "--out", str(out1)]) == 0
        assert json.loads(out2.read_text())[1] == json.loads(out1.read_text())[0]

    def test_empty_scenario_list(self, reg20_table, tmp_path):
        scen = tmp_path / "scen.json"
        scen.write_text("[]", encoding="utf-8")
        out = tmp_path / "pow.json"
        rc = main(["power", "--scenario", str(scen), "--table", str(reg20_table),
                   "--reps", "100", "--seed", "40", "--out", str(out)])
        assert rc == 0
        assert json.loads(out.read_text()) == []
        csv_lines = (tmp_path / "pow.csv").read_text().splitlines()
        assert len(csv_lines) == 1

    def test_table_mismatch(self, reg20_table, tmp_path, capsys):
        scen = tmp_path / "scen.json"
        scen.write_text(
            json.dumps([{"kind": "constant", "sigma": 0.1, "model": "regression",
                         "n": 30, "alpha": 0.2}]),
            encoding="utf-8",
        )
        rc = main(["power", "--scenario", str(scen), "--table", str(reg20_table),
                   "--reps", "100", "--seed", "40", "--out", str(tmp_path / "p.json")])
        assert rc == 1
        assert "n=30" in capsys.readouterr().err

    def test_scenario_validation(self, reg20_table, tmp_path, capsys):
        out = str(tmp_path / "p.json")
        table = str(reg20_table)
        scen = tmp_path / "scen.json"

        scen.write_text("{}", encoding="utf-8")
        assert main(["power", "--scenario", str(scen), "--table", table,
                     "--reps", "100", "--seed", "1", "--out", out]) == 1
        assert "list" in capsys.readouterr().err

        scen.write_text(
            json.dumps([{"kind": "constant", "model": "regression",
                         "n": 20, "alpha": 0.2}]),
            encoding="utf-8",
        )
        assert main(["power", "--scenario", str(scen), "--table", table,
                     "--reps", "100", "--seed", "1", "--out", out]) == 1
        assert "sigma" in capsys.readouterr().err

        scen.write_text(
            json.dumps([{"kind": "constant", "sigma": 0.1, "sigma_sq": 0.01,
                         "model": "regression", "n": 20, "alpha": 0.2}]),
            encoding="utf-8",
        )
        assert main(["power", "--scenario", str(scen), "--table", table,
                     "--reps", "100", "--seed", "1", "--out", out]) == 1
        assert "not both" in capsys.readouterr().err

        scen.write_text(
            json.dumps([{"kind": "f99", "sigma": 0.1, "model": "regression",
                         "n": 20, "alpha": 0.2}]),
            encoding="utf-8",
        )
        assert main(["power", "--scenario", str(scen), "--table", table,
                     "--reps", "100", "--seed", "1", "--out", out]) == 1
        assert "f99" in capsys.readouterr().err


class TestBoundCommand:
    def test_prints_analytic(self, capsys):
        assert main(["bound", "--alpha", "0.05", "--n", "100"]) == 0
        out = capsys.readouterr().out
        assert f"analytic_threshold {analytic_threshold(0.05, 100)}" in out
        assert "guarantee_threshold" not in out

    def test_prints_guarantee_with_beta(self, capsys):
        assert main(["bound", "--alpha", "0.05", "--n", "100",
                     "--beta", "0.05"]) == 0
        out = capsys.readouterr().out
        assert f"analytic_threshold {analytic_threshold(0.05, 100)}" in out
        assert f"guarantee_threshold {guarantee_threshold(0.05, 0.05, 100)}" in out

    def test_bad_level_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["bound", "--alpha", "1.5", "--n", "100"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["bound", "--alpha", "0.05", "--n", "100", "--beta", "0"])
        assert exc.value.code == 2


class TestParser:
    def test_no_command_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_command_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
