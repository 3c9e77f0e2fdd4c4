"""
命令行测试
"""

import json
import math

import pytest

from focusopt.cli import build_parser, main, overrides_from_args
from focusopt.components import COMMANDS, LambdaCommand
from focusopt.components.commands import parse_points, render_csv
from focusopt.config import default_config
from focusopt.utils.errors import EXIT_OK, EXIT_USAGE, DomainError


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("FOCUSOPT_THREADS", raising=False)
    return tmp_path


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def csv_rows(text):
    return [line.split(",") for line in text.strip().split("\n")]


class TestRendering:
    def test_csv_float_format(self):
        text = render_csv(["R", "v"], [[0.5, 2], [1.0, "x"]])
        assert text == "R,v\n5.000000000000e-01,2\n1.000000000000e+00,x\n"

    def test_parse_points(self):
        points = parse_points("# 注释\n1, 2, 3\n\n0 0 1.5\n", 3)
        assert points.shape == (2, 3)
        assert points[1, 2] == 1.5

    @pytest.mark.parametrize("text,lineno", [("1,2,3\n1,2\n", 2), ("\n1,2,abc\n", 2), ("nan,0,0\n", 1)])
    def test_parse_points_reports_line(self, text, lineno):
        with pytest.raises(DomainError, match=f"第 {lineno} 行"):
            parse_points(text, 3, "pts.txt")

    def test_parse_points_empty(self):
        with pytest.raises(DomainError):
            parse_points("# nothing\n", 3)


class TestParser:
    def test_commands_registered(self):
        assert set(COMMANDS) == {"lambda", "density", "crossings", "verify", "field"}

    def test_overrides(self):
        args = build_parser().parse_args(["lambda", "--kmax", "2", "--db", "x.db", "--verbose"])
        overrides = overrides_from_args(args)
        assert overrides["run"] == {"kmax": 2}
        assert overrides["storage"] == {"enabled": True, "db_path": "x.db"}
        assert overrides["logging"] == {"level": "INFO"}

    def test_bad_flag_exits_with_usage(self):
        with pytest.raises(SystemExit) as info:
            main(["lambda", "--convention", "textbook"])
        assert info.value.code == EXIT_USAGE

    def test_command_result_tuple(self, capsys):
        config = default_config()
        config["run"].update({"r_min": 1.0, "r_max": 1.0, "kmax": 0, "threads": 1})
        success, message, code = LambdaCommand(config, {}).run()
        assert success and code == EXIT_OK and message
        capsys.readouterr()


class TestLambda:
    def test_header_and_format(self, capsys):
        code, out, _ = run_cli(capsys, "lambda", "--r-min", "0.5", "--r-max", "1.0", "--r-step", "0.25", "--kmax", "2")
        rows = csv_rows(out)
        assert code == EXIT_OK
        assert rows[0] == ["R", "lambda_0", "lambda_1", "lambda_2"]
        assert len(rows) == 4
        assert rows[1][0] == "5.000000000000e-01"
        assert all("e" in cell for cell in rows[1])

    def test_paper_normalization_at_pi(self, capsys):
        r = repr(math.pi)
        code, out, _ = run_cli(capsys, "lambda", "--convention", "paper", "--r-min", r, "--r-max", r, "--kmax", "0")
        assert code == EXIT_OK
        assert float(csv_rows(out)[1][1]) == pytest.approx(1.0, abs=1e-10)

    def test_step_larger_than_range(self, capsys):
        _, out, _ = run_cli(capsys, "lambda", "--r-min", "1", "--r-max", "1.5", "--r-step", "2", "--kmax", "0")
        assert len(csv_rows(out)) == 2

    def test_json(self, capsys):
        _, out, _ = run_cli(capsys, "lambda", "--r-min", "1", "--r-max", "1", "--kmax", "1", "--format", "json")
        payload = json.loads(out)
        assert payload["columns"] == ["R", "lambda_0", "lambda_1"]
        assert len(payload["rows"]) == 1

    def test_bad_radius_exit_code(self, capsys):
        code, out, err = run_cli(capsys, "lambda", "--r-min", "0")
        assert code == EXIT_USAGE
        assert out == "" and err

    def test_output_independent_of_threads(self, workdir, monkeypatch, capsys):
        outputs = []
        for threads in ("1", "4"):
            monkeypatch.setenv("FOCUSOPT_THREADS", threads)
            path = workdir / f"lambda_{threads}.csv"
            assert main(["lambda", "--r-min", "0.2", "--r-max", "3", "--r-step", "0.2", "--out", str(path)]) == EXIT_OK
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]

    def test_cache_round_trip(self, workdir, capsys):
        db = str(workdir / "cache.db")
        args = ("lambda", "--r-min", "1", "--r-max", "2", "--r-step", "0.5", "--kmax", "1", "--db", db)
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second


class TestDensity:
    def test_footer(self, capsys):
        code, out, _ = run_cli(capsys, "density", "--r-min", "0.1", "--r-max", "3", "--r-step", "0.1")
        rows = csv_rows(out)
        assert code == EXIT_OK
        assert rows[0] == ["R", "density"]
        assert rows[-1][0] == "half_max_radius"
        assert 1.8 <= float(rows[-1][1]) <= 2.2

    def test_footer_empty_without_half_max(self, capsys):
        _, out, _ = run_cli(capsys, "density", "--r-min", "0.1", "--r-max", "1", "--r-step", "0.1", "--mode", "maxwell")
        assert out.endswith("half_max_radius,\n")

    def test_rejects_tiny_radius(self, capsys):
        code, _, _ = run_cli(capsys, "density", "--r-min", "1e-4")
        assert code == EXIT_USAGE


class TestCrossings:
    def test_json_keys(self, capsys):
        code, out, _ = run_cli(capsys, "crossings", "--r-min", "0.1", "--r-max", "3.3", "--r-step", "0.1",
                               "--format", "json")
        payload = json.loads(out)
        assert code == EXIT_OK
        assert list(payload) == ["schema", "d", "convention", "lattice", "scalar_crossing",
                                 "criterion_crossing", "conservative_criterion_crossing"]
        assert payload["scalar_crossing"]["root"] == pytest.approx(math.pi, abs=1e-6)
        assert 2.7 < payload["criterion_crossing"]["root"] < 2.8

    def test_missing_crossings_are_null(self, capsys):
        _, out, _ = run_cli(capsys, "crossings", "--r-min", "0.1", "--r-max", "1.5", "--format", "json")
        payload = json.loads(out)
        assert payload["scalar_crossing"] is None and payload["criterion_crossing"] is None


class TestVerify:
    def test_history_requires_storage(self, capsys):
        code, _, err = run_cli(capsys, "verify", "--history")
        assert code == EXIT_USAGE
        assert err

    def test_history_empty(self, workdir, capsys):
        code, out, _ = run_cli(capsys, "verify", "--history", "--db", str(workdir / "h.db"), "--format", "json")
        assert code == EXIT_OK
        assert json.loads(out)["runs"] == []


class TestField:
    def test_ell_at_origin(self, capsys):
        code, out, _ = run_cli(capsys, "field", "--x", "0,0,0")
        rows = csv_rows(out)
        assert code == EXIT_OK
        assert rows[0][:5] == ["x1", "x2", "x3", "E1_re", "E1_im"]
        assert rows[0][-6:] == ["B1_re", "B1_im", "B2_re", "B2_im", "B3_re", "B3_im"]
        assert float(rows[1][3]) == pytest.approx(8 * math.pi / 3, rel=1e-12)

    def test_constant_vanishes_at_pi(self, workdir, capsys):
        points = workdir / "points.txt"
        points.write_text(f"0 0 {math.pi!r}\n{math.pi!r} 0 0\n", encoding="utf-8")
        code, out, _ = run_cli(capsys, "field", "--density", "constant", "--points", str(points))
        rows = csv_rows(out)
        assert code == EXIT_OK
        assert rows[0] == ["x1", "x2", "x3", "u_re", "u_im", "abs_u"]
        assert all(abs(float(row[-1])) < 1e-10 for row in rows[1:])

    def test_far_point_raises_resolution(self, capsys):
        code, out, _ = run_cli(capsys, "field", "--density", "constant", "--x", "0,0,20", "--format", "json")
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["resolution"] >= 56
        assert payload["rows"][0][3] == pytest.approx(4 * math.pi * math.sin(20) / 20, abs=1e-8)

    def test_bad_points_file(self, workdir, capsys):
        points = workdir / "bad.txt"
        points.write_text("0 0 0\n1 2\n", encoding="utf-8")
        code, _, err = run_cli(capsys, "field", "--points", str(points))
        assert code == EXIT_USAGE
        assert "第 2 行" in err

    def test_missing_points(self, capsys):
        code, _, _ = run_cli(capsys, "field")
        assert code == EXIT_USAGE
