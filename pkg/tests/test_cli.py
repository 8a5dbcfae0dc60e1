import cmath
import csv
import io
import json
import subprocess
import sys

import pytest

from bargmann_dual.cli import parse_complex, run
from bargmann_dual.verify import SUITES, run_all, run_suite


def call(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("text,value", [("2+0i", 2), ("1-2.5i", 1 - 2.5j), ("3i", 3j), ("-0.5", -0.5),
                                        ({"re": 1, "im": -1}, 1 - 1j), ("1e-3+2e-1j", 1e-3 + 0.2j)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_transform_example(capsys):
    code, out, _ = call(["transform", "--state", '{"type":"fock","params":{"n":1},"truncation":8}',
                         "--at", "2+0i"], capsys)
    assert code == 0
    (row,) = rows(out)
    assert float(row["re_value"]) == pytest.approx(0.25) and float(row["im_value"]) == 0.0


def test_transform_line_route_and_json(capsys):
    code, out, _ = call(["transform", "--state", '{"type":"coherent","params":{"z0":"0.3+0.1i"},"truncation":30}',
                         "--at", "2,1+1i", "--route", "line", "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0 and len(data) == 2
    w = complex(data[0]["w"]["re"], data[0]["w"]["im"])
    value = complex(data[0]["value"]["re"], data[0]["value"]["im"])
    assert value == pytest.approx(1 / (w - (0.3 + 0.1j)), rel=1e-10)


def test_propagate_example(capsys):
    code, out, _ = call(["propagate", "--kind", "ho-conjugate", "--z0", "1+0i", "--w", "2+0i", "--t", "0"], capsys)
    assert code == 0
    (row,) = rows(out)
    assert list(row) == ["t", "re_arg", "im_arg", "re_value", "im_value"]
    assert float(row["re_value"]) == pytest.approx(1.0)


@pytest.mark.parametrize("kind", ["ho-bargmann", "diagonal-trace", "matrix-x", "matrix-p"])
def test_propagate_kinds(kind, capsys):
    argv = ["propagate", "--kind", kind, "--z0", "0.5", "--t", "0.5,1.0"]
    argv += ["--zstar", "0.3"] if kind == "ho-bargmann" else ["--w", "2"]
    code, out, _ = call(argv, capsys)
    assert code == 0 and len(rows(out)) == 2


def test_verify_example(capsys):
    code, out, _ = call(["verify", "--suite", "roundtrip", "--seed", "7"], capsys)
    report = json.loads(out)
    assert code == 0 and report["passed"] and report["max_error"] <= 1e-10


def test_invert_routes(capsys):
    for route in ("termwise", "mellin"):
        code, out, _ = call(["invert", "--pole", "0.5", "--at", "0.4+0.2i", "--route", route], capsys)
        assert code == 0
        row = rows(out)[0]
        value = complex(float(row["re_value"]), float(row["im_value"]))
        assert value == pytest.approx(cmath.exp(0.5 * (0.4 + 0.2j)), rel=1e-9)


def test_inner_all_and_single(capsys):
    a = '{"type":"random","params":{"seed":3},"truncation":5}'
    b = '{"type":"fock","params":{"n":2},"truncation":5}'
    code, out, _ = call(["inner", "--state", a, "--other", b, "--route", "all"], capsys)
    assert code == 0 and json.loads(out)["max_disagreement"] < 1e-4
    code, out, _ = call(["inner", "--state", a, "--other", b, "--route", "double"], capsys)
    assert code == 0 and float(rows(out)[0]["error_estimate"]) < 1e-13


def test_semiclassical_json(capsys):
    code, out, _ = call(["semiclassical", "--hamiltonian", "quadratic",
                         "--params", '{"alpha": 1, "beta": 0.3, "gamma": 0.3}',
                         "--z-i", "0.3", "--zf-star", "0.2-0.1i", "--T", "0.8"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["error"] < 1e-10
    assert {"trajectory_residual", "M", "S", "value", "oracle_value", "error"} <= set(rep)


def test_semiclassical_degenerate_conjugate_uses_exact_pole(capsys):
    code, out, _ = call(["semiclassical", "--hamiltonian", "ho", "--z-i", "0.5", "--w", "2+0.5i"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["fallback_used"] and rep["error"] < 1e-10


@pytest.mark.parametrize("argv,needle", [
    (["transform", "--state", '{"type":"fock"', "--at", "2"], "state"),
    (["transform", "--state", '{"type":"bogus"}', "--at", "2"], "state.type"),
    (["transform", "--state", '{"type":"fock","params":{}}', "--at", "2"], "state.params"),
    (["transform", "--state", '{"type":"fock","params":{"n":1}}', "--at", "oops"], "at"),
    (["transform", "--state", '{"type":"fock","params":{"n":1}}', "--at", "0"], "w = 0"),
    (["invert", "--at", "1"], "--state"),
])
def test_validation_errors_exit_2(argv, needle, capsys):
    code, _, err = call(argv, capsys)
    assert code == 2 and needle in err


def test_unknown_command_exits_2(capsys):
    assert call(["bogus"], capsys)[0] == 2


def test_numerical_failure_exits_3(capsys):
    a = '{"type":"random","params":{"seed":1},"truncation":30}'
    code, _, err = call(["inner", "--state", a, "--other", a, "--route", "line"], capsys)
    assert code == 3 and "AccuracyError" in err


def test_config_and_atomic_output(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "propagate", "kind": "ho-bargmann", "z0": {"re": 1, "im": 0},
                               "zstar": ["0.5", "1i"], "t": [0, 1]}))
    target = tmp_path / "out.csv"
    code, out, _ = call(["--config", str(cfg), "--output", str(target)], capsys)
    assert code == 0 and out == ""
    assert len(rows(target.read_text())) == 4
    assert sorted(p.name for p in tmp_path.iterdir()) == ["cfg.json", "out.csv"]


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call(["--config", str(bad)], capsys)[0] == 2
    nocmd = tmp_path / "nocmd.json"
    nocmd.write_text('{"command": "fly"}')
    code, _, err = call(["--config", str(nocmd)], capsys)
    assert code == 2 and "config.command" in err


def test_output_is_deterministic(capsys):
    argv = ["transform", "--state", '{"type":"random","params":{"seed":4},"truncation":10}', "--at", "1.3+0.4i"]
    assert call(argv, capsys)[1] == call(argv, capsys)[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bargmann_dual", "propagate", "--kind", "ho-conjugate",
                           "--z0", "1", "--w", "2", "--t", "0"], capture_output=True, text=True)
    assert proc.returncode == 0 and "1.0" in proc.stdout


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suites_pass(name):
    result = run_suite(name, seed=11)
    assert result.passed, result


def test_run_all_is_seeded():
    a, b = run_all(3), run_all(3)
    assert [r.max_error for r in a] == [r.max_error for r in b]
