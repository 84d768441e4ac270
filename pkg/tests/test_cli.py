import json

import numpy as np
import pytest
import scipy.linalg

from mapgroups.cli import main
from mapgroups.problem import format_complex, parse_complex_text, problem_from_dict, write_csv
from mapgroups.errors import SchemaError

POLE = {
    "group": {"type": "GL", "n": 2},
    "domain": {"type": "punctured_plane", "punctures": [[0, 0]]},
    "base_point": [1, 0],
    "forms": {"alpha": {"expr": "[[1/z, 0], [0, 2/z]]"}},
    "integrate": {"points": [2, 3, 4]},
}


def _write(tmp_path, spec, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return str(path)


def _with(**changes):
    spec = json.loads(json.dumps(POLE))
    spec.update(changes)
    return spec


def _csv_rows(text):
    return [line.split(",") for line in text.strip().splitlines()]


def test_periods_verdicts(tmp_path, capsys):
    assert main(["periods", "--input", _write(tmp_path, POLE)]) == 0
    assert "alpha: integrable" in capsys.readouterr().out
    frac = _with(forms={"alpha": {"expr": "[[0.5/z, 0], [0, (1/3)/z]]"}})
    out_dir = tmp_path / "o"
    assert main(["periods", "--input", _write(tmp_path, frac), "--out", str(out_dir)]) == 0
    assert "non-integrable" in capsys.readouterr().out
    rows = _csv_rows((out_dir / "periods.csv").read_text())
    assert float(rows[1][2]) >= 0.5


def test_zero_form_periods_are_identity(tmp_path, capsys):
    spec = _with(forms={"zero": {"expr": "[[0, 0], [0, 0]]"}})
    assert main(["periods", "--input", _write(tmp_path, spec)]) == 0
    rows = _csv_rows(capsys.readouterr().out.split("# periods\n")[1].split("input sha256")[0])
    assert rows[1][2:] == ["0", "1+0i", "0+0i", "0+0i", "1+0i"]


def test_integrate_matches_closed_form(tmp_path):
    out = tmp_path / "o"
    assert main(["integrate", "--input", _write(tmp_path, POLE), "--out", str(out), "--svg"]) == 0
    rows = _csv_rows((out / "integrate.csv").read_text())
    assert rows[0] == ["label", "point", "g11", "g12", "g21", "g22"]
    for row, z in zip(rows[1:], (2, 3, 4)):
        vals = [parse_complex_text(c) for c in row[2:]]
        assert np.abs(np.array(vals) - [z, 0, 0, z * z]).max() < 1e-8
    svg = (out / "integrate.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_integrate_zero_form_gives_identity_rows(tmp_path, capsys):
    spec = _with(forms={"zero": {"expr": "[[0, 0], [0, 0]]"}})
    assert main(["integrate", "--input", _write(tmp_path, spec)]) == 0
    out = capsys.readouterr().out
    assert out.count("1+0i,0+0i,0+0i,1+0i") == 3


def test_integrate_without_path_is_ambiguous(tmp_path, capsys):
    spec = _with(forms={"alpha": {"expr": "[[0.5/z, 0], [0, 1/z]]"}})
    assert main(["integrate", "--input", _write(tmp_path, spec)]) == 4
    assert "error:" in capsys.readouterr().err


def test_integrate_along_explicit_loop(tmp_path, capsys):
    spec = _with(
        forms={"alpha": {"expr": "[[0.5/z, 0], [0, 1/z]]"}},
        integrate={"paths": [{"type": "loop", "generator": 0, "power": 1}]},
    )
    assert main(["integrate", "--input", _write(tmp_path, spec)]) == 0
    row = next(line for line in capsys.readouterr().out.splitlines() if line.startswith("path 1"))
    assert abs(parse_complex_text(row.split(",")[2]) + 1) < 1e-10


def test_csv_is_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    path = _write(tmp_path, POLE)
    assert main(["integrate", "--input", path, "--out", str(a), "--svg"]) == 0
    assert main(["integrate", "--input", path, "--out", str(b), "--svg"]) == 0
    for name in ("integrate.csv", "integrate.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert b"\r\n" in (a / "integrate.csv").read_bytes()


def test_multiply_and_inverse_residuals(tmp_path, capsys):
    spec = {
        "group": {"type": "SL", "n": 2},
        "domain": {"type": "chart", "x": [-1, 1], "y": [-1, 1]},
        "forms": {
            "a": {"dx": "[[0.1*x, 0.2], [0.3*y, -0.1*x]]", "dy": "[[0.05, 0.1*x], [0.2, -0.05]]"},
            "b": {"dx": "[[0.2*y, 0.1], [0.1, -0.2*y]]", "dy": "[[0, 0.3*y], [0.1*x, 0]]"},
        },
        "multiply": {"left": "a", "right": "b", "points": [[0.3, 0.4], [-0.5, 0.2]]},
        "inverse": {"form": "a", "points": [[0.3, 0.4]]},
    }
    path = _write(tmp_path, spec)
    out = tmp_path / "o"
    assert main(["multiply", "--input", path, "--out", str(out)]) == 0
    rows = _csv_rows((out / "multiply.csv").read_text())
    assert len(rows) == 1 + 2 * 2 and {r[1] for r in rows[1:]} == {"dx", "dy"}
    assert float(_csv_rows((out / "multiply_residual.csv").read_text())[1][0]) < 1e-6
    assert main(["inverse", "--input", path, "--out", str(out)]) == 0
    assert float(_csv_rows((out / "inverse_residual.csv").read_text())[1][0]) < 1e-6


def test_components_and_discreteness(tmp_path, capsys):
    spec = {
        "group": {"type": "abelian", "n": 1, "lattice": [[[0, 2 * np.pi]]]},
        "domain": {"type": "punctured_plane", "punctures": [[0, 0]]},
        "base_point": [1, 0],
        "forms": {"z1": {"expr": "[[1/z]]"}, "z3": {"expr": "[[3/z]]"}},
        "components": {"forms": ["z1", "z3"]},
        "discreteness": {"presentation": {"n": 1, "relations": [[5]]}},
    }
    path = _write(tmp_path, spec)
    assert main(["components", "--input", path]) == 0
    out = capsys.readouterr().out
    assert "z1,1,1" in out and "z3,1,3" in out and "z1,z3,different" in out
    assert main(["discreteness", "--input", path]) == 0
    out = capsys.readouterr().out
    assert "1,5" in out and "0,1,true" in out
    spec["discreteness"] = {"presentation": {"n": 2, "relations": [[2, 0], [0, 0]]}, "lattice_rank": 1}
    assert main(["discreteness", "--input", _write(tmp_path, spec)]) == 0
    out = capsys.readouterr().out
    assert "1,2\n2,0\n" in out


def test_sampled_map_input(tmp_path, capsys):
    x = np.array([[0.3, 1.0], [0.5, -0.3]])
    ts = np.linspace(0, 1, 1001)
    rows = [[f"{t:.17g}"] + [format_complex(v) for v in scipy.linalg.expm(t * x).ravel()] for t in ts]
    (tmp_path / "f.csv").write_text(write_csv(["t", "g11", "g12", "g21", "g22"], rows))
    spec = {
        "group": {"type": "SL", "n": 2},
        "domain": {"type": "interval", "a": 0, "b": 1},
        "forms": {"f": {"samples": "f.csv"}},
        "integrate": {"points": [0.5, 1.0]},
    }
    out = tmp_path / "o"
    assert main(["integrate", "--input", _write(tmp_path, spec), "--out", str(out)]) == 0
    got = _csv_rows((out / "integrate.csv").read_text())
    last = np.array([parse_complex_text(c) for c in got[2][2:]]).reshape(2, 2)
    assert np.abs(last - scipy.linalg.expm(x)).max() < 1e-5


def test_demo_and_verify(capsys):
    assert main(["demo-exp-pathology", "--n-list", "5,10"]) == 0
    out = capsys.readouterr().out
    assert "outside the exp image" in out
    assert main(["verify", "--suite", "example-3-14"]) == 0
    assert main(["verify", "--suite", "group-law"]) == 0
    assert main(["verify", "--suite", "no-such-suite"]) == 2


@pytest.mark.parametrize(
    "spec, fragment",
    [
        ({"group": {"type": "XL", "n": 2}}, "group"),
        (_with(forms={"alpha": {"expr": "[[1/z, 0], [0, 2/w]]"}}), "unknown identifier"),
        (_with(forms={"alpha": {"expr": "[[1/z, 0]]"}}), "not square"),
        (_with(domain={"type": "punctured_plane", "punctures": []}), "punctures"),
        (_with(control={"steps": 0}), "steps"),
        (_with(integrate={"points": "nowhere"}), "points"),
    ],
)
def test_schema_errors_exit_2(tmp_path, capsys, spec, fragment):
    assert main(["integrate", "--input", _write(tmp_path, spec)]) == 2
    assert fragment in capsys.readouterr().err


def test_invalid_json_and_missing_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert main(["periods", "--input", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert main(["periods", "--input", str(tmp_path / "missing.json")]) == 2


def test_numeric_error_exits_3(tmp_path, capsys):
    spec = _with(forms={"alpha": {"expr": "[[exp(exp(9*z)), 0], [0, 1]]"}})
    assert main(["periods", "--input", _write(tmp_path, spec)]) == 3
    assert "non-finite" in capsys.readouterr().err


def test_flags_override_control(tmp_path):
    spec = _with(control={"steps": 8, "period_tol": 1e-30})
    problem = problem_from_dict(spec, steps=64, period_tol=1e-3)
    assert problem.steps == 64 and problem.period_tol == 1e-3
    with pytest.raises(SchemaError):
        problem_from_dict(_with(base_point=[0, 0]))


def test_complex_formatting_round_trip():
    for z in (0, -0.0, 1.5 - 2j, 1e-20 + 3e10j, complex(-0.0, -0.0)):
        assert parse_complex_text(format_complex(z)) == complex(z)
    assert format_complex(complex(-0.0, -0.0)) == "0+0i"
