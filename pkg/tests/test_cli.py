import csv
import io
import json
import math
import subprocess
import sys

import pytest

from kahlerstab.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, TABLE_COLUMNS, main, parse_config


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out), err


def square_file(tmp_path):
    data = {"halfplanes": [{"normal": [1, 0], "offset": 0}, {"normal": [-1, 0], "offset": -1},
                           {"normal": [0, 1], "offset": 0}, {"normal": [0, -1], "offset": -1}],
            "weight": [1, 0]}
    path = tmp_path / "sq.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestVerify:
    def test_gaussian_weitzenbock(self, capsys):
        code, rep, _ = run_json(capsys, "verify", "--model", "gaussian", "--suite", "weitzenbock", "--points", "2")
        assert code == EXIT_OK
        s = rep["summary"]
        assert s["failed"] == 0 and s["passed"] == s["total"] == len(rep["entries"]) > 0
        assert {e["a"] for e in rep["entries"] if e["id"] == "weighted_hodge_form"} == {0.0, 0.5, 1.0}
        assert rep["provenance"]["seed"] == 0 and rep["provenance"]["model"] == "gaussian"

    def test_fubini_study_kahler(self, capsys):
        code, rep, _ = run_json(capsys, "verify", "--model", "fubini-study", "--suite", "kahler", "--points", "10",
                                "--tol", "1e-5")
        assert code == EXIT_OK
        ids = {e["id"] for e in rep["entries"]}
        assert {"weitz_j_inv", "weitz_j_anti", "kahler_conformal", "div_equivalence"} <= ids
        assert rep["summary"]["failed"] == 0

    def test_sphere_soliton(self, capsys):
        code, rep, _ = run_json(capsys, "verify", "--model", "sphere4", "--suite", "soliton", "--points", "3")
        assert code == EXIT_OK
        assert [e["id"] for e in rep["entries"]] == ["soliton_residual"] * 3
        assert all(e["pass"] for e in rep["entries"])

    def test_single_a(self, capsys):
        code, rep, _ = run_json(capsys, "verify", "--model", "gaussian", "--suite", "weitzenbock", "--points", "1",
                                "--a", "0.5")
        assert code == EXIT_OK
        assert {e["a"] for e in rep["entries"]} == {None, 0.5}

    def test_numerical_failure_exit_1(self, capsys):
        code, out, err = run(capsys, "verify", "--model", "sphere4", "--suite", "weitzenbock", "--points", "1",
                             "--tol", "1e-15", "--format", "csv")
        assert code == EXIT_FAIL
        assert "FAILED: " in err

    @pytest.mark.parametrize("argv", [
        ["verify", "--model", "nowhere"],
        ["verify", "--model", "sphere4", "--suite", "kahler"],
        ["verify", "--model", "gaussian", "--suite", "everything"],
        ["verify", "--model", "gaussian", "--points", "0"],
        ["verify", "--model", "gaussian", "--tol", "-1"],
        ["verify", "--model", "gaussian", "--a", "2"],
        ["verify"],
        ["frobnicate"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, _ = run(capsys, *argv)
        assert code == EXIT_USAGE

    def test_deterministic(self, capsys):
        argv = ["verify", "--model", "cyl-s2xr2", "--suite", "all", "--points", "1", "--seed", "7", "--format", "csv"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


class TestClassify:
    def test_fubini_study_point_data(self, capsys):
        code, rep, _ = run_json(capsys, "classify", "--lambda", "1", "--scal", "2")
        assert code == EXIT_OK
        e = rep["entries"][0]
        assert (e["mu_1"], e["mu_2"], e["mu_3"]) == (1.0, 0.0, 0.0)
        assert e["verdict"] == "unstable"
        assert e["trace"] == e["trace_expected"] == 1.0

    def test_steady_point_data(self, capsys):
        code, rep, _ = run_json(capsys, "classify", "--lambda", "0", "--scal", "3")
        e = rep["entries"][0]
        assert code == EXIT_OK
        assert (e["mu_1"], e["mu_2"], e["mu_3"]) == (0.0, -1.5, -1.5)
        assert e["verdict"] == "semistable" and e["neutral_count"] == 1

    def test_expander_point_data_is_stable(self, capsys):
        _, rep, _ = run_json(capsys, "classify", "--lambda", "-0.5", "--scal", "0")
        assert rep["entries"][0]["verdict"] == "stable"

    def test_hyperbolic_einstein_flag(self, capsys):
        code, rep, _ = run_json(capsys, "classify", "--model", "hyperbolic4")
        assert code == EXIT_OK
        assert rep["entries"][0]["einstein_equality"] is True

    @pytest.mark.parametrize("name,expected", [("gaussian", [1.0, 1.0, 1.0]), ("fubini-study", [1.0, 0.0, 0.0])])
    def test_models(self, capsys, name, expected):
        _, rep, _ = run_json(capsys, "classify", "--model", name)
        e = rep["entries"][0]
        assert [e["mu_1"], e["mu_2"], e["mu_3"]] == pytest.approx(expected, abs=1e-8)
        assert e["verdict"] == "unstable"

    @pytest.mark.parametrize("argv", [["classify"], ["classify", "--lambda", "1"], ["classify", "--model", "x"]])
    def test_missing_parameters(self, capsys, argv):
        assert run(capsys, *argv)[0] == EXIT_USAGE


class TestDensity:
    def test_bccd(self, capsys):
        code, rep, _ = run_json(capsys, "density", "--case", "bccd")
        e = rep["entries"][0]
        assert code == EXIT_OK
        assert abs(e["theta"] - 0.5617) <= 5e-4 and abs(e["c_star"] - 0.6438) <= 1e-3
        assert e["pass"] is True

    def test_catalog(self, capsys):
        code, rep, _ = run_json(capsys, "density", "--case", "catalog")
        assert code == EXIT_OK
        assert len(rep["entries"]) == 5
        assert all(round(e["theta"], 4) == e["theta_published"] for e in rep["entries"])

    def test_polytope_square(self, capsys, tmp_path):
        code, rep, _ = run_json(capsys, "density", "--case", "polytope", "--polytope-path",
                                str(square_file(tmp_path)), "--c", "0", "1")
        assert code == EXIT_OK
        rows = [e for e in rep["entries"] if e["case"] == "polytope"]
        assert rows[0]["F"] == pytest.approx(1.0, abs=1e-15)
        assert rows[1]["F"] == pytest.approx(1.0 - math.exp(-1.0), abs=1e-14)
        # F(c) = (1 - e^-c) / c decreases for ever on the square
        assert not any(e["case"] == "polytope-min" for e in rep["entries"])
        assert any("no finite minimizer" in n for n in rep["notes"])

    def test_polytope_divergent_exit_1(self, capsys, tmp_path):
        path = tmp_path / "wedge.json"
        path.write_text(json.dumps({"halfplanes": [{"normal": [1, 0], "offset": 0}, {"normal": [0, 1], "offset": 0}],
                                    "weight": [1, 1]}), encoding="utf-8")
        code, out, _ = run(capsys, "density", "--case", "polytope", "--polytope-path", str(path), "--c", "-1")
        assert code == EXIT_FAIL
        assert "divergent" in out

    def test_malformed_polytope_exit_2(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"halfplanes": 3}', encoding="utf-8")
        assert run(capsys, "density", "--case", "polytope", "--polytope-path", str(path))[0] == EXIT_USAGE
        assert run(capsys, "density", "--case", "polytope")[0] == EXIT_USAGE


class TestTable:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "table", "--format", "csv")
        assert code == EXIT_OK
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == TABLE_COLUMNS
        assert len(rows) == 14
        computed = [r for r in rows[1:] if r[6]]
        assert len(computed) == 6
        bccd = next(r for r in rows if r[0] == "BCCD")
        assert bccd[5] == "0.5617" and abs(float(bccd[6]) - 0.5617) < 5e-4 and bccd[7] == "U"

    def test_markdown_header(self, capsys):
        _, out, _ = run(capsys, "table", "--format", "md")
        assert out.splitlines()[0] == "| Name | Topology | K | E | P | Θ(published) | Θ(computed) | Stab |"
        assert sum(1 for line in out.splitlines() if line.startswith("| ")) == 14

    def test_byte_stable(self, capsys, tmp_path):
        a, b = tmp_path / "a.md", tmp_path / "b.md"
        assert main(["table", "--format", "md", "--output", str(a)]) == EXIT_OK
        assert main(["table", "--format", "md", "--output", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
        assert capsys.readouterr().out == ""


def test_config_defaults():
    cfg = parse_config(["verify", "--model", "gaussian"])
    assert (cfg.suite, cfg.points, cfg.seed, cfg.tol, cfg.format) == ("all", 5, 0, 1e-5, "json")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kahlerstab.cli", "classify", "--lambda", "1", "--scal", "0",
                           "--format", "csv"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "unstable" in proc.stdout
