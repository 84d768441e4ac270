"""Command-line front end.

Exit codes: 0 success, 1 acceptance failure, 2 input error, 3 numeric error,
4 ambiguity (a non-integrable form evaluated without a path).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from mapgroups.calculus import (
    RELATIVE,
    UNVERIFIED,
    BasedMapElement,
    evaluate,
    inverse,
    multiply,
)
from mapgroups.errors import (
    AmbiguityError,
    GeometryError,
    InvalidArgumentError,
    MapGroupError,
    ParseError,
    SamplingResolutionError,
    SchemaError,
)
from mapgroups.evolution import evol, evolve_at
from mapgroups.forms import pullback
from mapgroups.paths import (
    Arc,
    Circle,
    Interval,
    PlaneChart,
    PuncturedPlane,
    Segment,
    concatenate,
    loop_basis,
    path_between,
    repeat,
)
from mapgroups.pathology import pathology_report
from mapgroups.problem import (
    Problem,
    format_complex,
    format_real,
    line_chart_svg,
    load_problem,
    parse_complex,
    write_csv,
)
from mapgroups.smith import AbelianPresentation, discreteness_report
from mapgroups.topology import component_class, period_vector, same_component

EXIT_OK, EXIT_ACCEPTANCE, EXIT_INPUT, EXIT_NUMERIC, EXIT_AMBIGUITY = 0, 1, 2, 3, 4


@dataclass
class RunReport:
    command: str
    digest: str = ""
    tables: dict = field(default_factory=dict)  # name -> (header, rows)
    verdicts: list = field(default_factory=list)
    svgs: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK


# ------------------------------------------------------------------ helpers


def _entries(element) -> list:
    v = np.asarray(element.value)
    return [format_complex(x) for x in v.ravel()]


def _entry_header(group) -> list:
    if group.is_abelian:
        return [f"v{i + 1}" for i in range(group.n)]
    return [f"g{i + 1}{j + 1}" for i in range(group.n) for j in range(group.n)]


def _section(problem: Problem, name: str) -> dict:
    sec = problem.sections.get(name)
    if not isinstance(sec, dict):
        raise SchemaError(f"problem file needs an object section {name!r}")
    return sec


def _points(sec: dict, key: str = "points") -> list:
    pts = sec.get(key, [])
    if not isinstance(pts, list):
        raise SchemaError(f"{key} must be a list of points")
    return [parse_complex(p, f"{key}[{i}]") for i, p in enumerate(pts)]


def _form_name(problem: Problem, sec: dict, key: str = "form") -> str:
    if key in sec:
        return str(sec[key])
    if len(problem.forms) == 1:
        return next(iter(problem.forms))
    raise SchemaError(f"section needs {key!r} when the file defines several forms")


def _prepared(problem: Problem, name: str) -> BasedMapElement:
    """The named element, verified unless the file fixed its status."""
    el = problem.element(name)
    if el.status in (None, UNVERIFIED):
        return el.verify(problem.period_tol)
    return el


def build_path(spec, problem: Problem, where: str = "path"):
    """Path from its problem-file description.

    {"type": "polyline", "points": [...]}, {"type": "arc", "center": c,
    "radius": r, "from": angle, "to": angle}, {"type": "loop", "generator": j,
    "power": k} or {"type": "concat", "parts": [...]}.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise SchemaError(f"{where}: expected an object with a 'type'")
    kind = spec["type"]
    if kind == "polyline":
        pts = _points(spec)
        if len(pts) < 2:
            raise SchemaError(f"{where}: a polyline needs at least two points")
        path = Segment(pts[0], pts[1])
        for a, b in zip(pts[1:-1], pts[2:]):
            path = concatenate(path, Segment(a, b))
        return path
    if kind == "arc":
        try:
            return Arc(
                parse_complex(spec["center"], f"{where}.center"),
                float(spec["radius"]),
                float(spec["from"]),
                float(spec["to"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: arc needs center, radius, from, to ({exc})") from None
    if kind == "loop":
        basis = loop_basis(problem.domain)
        j = spec.get("generator", 0)
        if not isinstance(j, int) or not 0 <= j < len(basis):
            raise SchemaError(f"{where}: generator must be an index below {len(basis)}")
        return repeat(basis[j], int(spec.get("power", 1)))
    if kind == "concat":
        parts = [build_path(p, problem, f"{where}.parts[{i}]") for i, p in enumerate(spec.get("parts", []))]
        if not parts:
            raise SchemaError(f"{where}: concat needs parts")
        path = parts[0]
        for p in parts[1:]:
            path = concatenate(path, p)
        return path
    raise SchemaError(f"{where}: unknown path type {kind!r}")


def _directions(domain):
    if isinstance(domain, PlaneChart):
        return [("dx", 1.0), ("dy", 1j)]
    if isinstance(domain, PuncturedPlane):
        return [("dz", 1.0)]
    return [("dt", 1.0)]


def _form_rows(form, points, group) -> list:
    rows = []
    pts = np.asarray(points, dtype=np.complex128)
    for label, tangent in _directions(form.domain):
        vals = form.evaluate(pts, np.full(pts.shape, tangent, dtype=np.complex128))
        for p, v in zip(pts, vals):
            flat = np.diagonal(v) if group.is_abelian else v.ravel()
            rows.append([format_complex(p), label] + [format_complex(x) for x in flat])
    return rows


def _canonical_transport(el: BasedMapElement, m):
    return evaluate(BasedMapElement(el.form, RELATIVE, el.steps), m)


# ----------------------------------------------------------------- commands


def cmd_periods(problem: Problem, args) -> RunReport:
    if not isinstance(problem.domain, (PuncturedPlane, Circle)):
        raise SchemaError("periods need a punctured-plane or circle domain")
    report = RunReport("periods", problem.digest)
    header = ["form", "generator", "distance_to_identity"] + _entry_header(problem.group)
    if args.tol_report:
        header.append("error_estimate")
    rows = []
    basis = loop_basis(problem.domain)
    for name, el in problem.forms.items():
        pm = period_vector(el.form, basis, steps=problem.steps)
        for j, (g, d) in enumerate(zip(pm.values, pm.distances())):
            row = [name, str(j + 1), format_real(d)] + _entries(g)
            if args.tol_report:
                est = evol(problem.group, pullback(el.form, basis[j]), steps=problem.steps, estimate=True)
                row.append(format_real(est.error_estimate))
            rows.append(row)
        worst = max(pm.distances(), default=0.0)
        verdict = "integrable" if pm.is_integrable(problem.period_tol) else "non-integrable"
        report.verdicts.append(f"{name}: {verdict} (max period distance {worst:.3e}, tolerance {problem.period_tol:g})")
    report.tables["periods"] = (header, rows)
    return report


def cmd_integrate(problem: Problem, args) -> RunReport:
    sec = _section(problem, "integrate")
    name = _form_name(problem, sec)
    el = _prepared(problem, name)
    report = RunReport("integrate", problem.digest)
    header = ["label", "point"] + _entry_header(problem.group)
    rows = []
    points = _points(sec)
    path_specs = sec.get("paths", [])
    if not isinstance(path_specs, list):
        raise SchemaError("integrate.paths must be a list")
    paths = [build_path(s, problem, f"integrate.paths[{i}]") for i, s in enumerate(path_specs)]
    if points and el.status == UNVERIFIED:
        raise AmbiguityError(f"form {name!r} is not integrable; give explicit paths or mark it relative-to-path")
    for i, p in enumerate(points):
        rows.append([f"point {i + 1}", format_complex(p)] + _entries(evaluate(el, p)))
    for i, path in enumerate(paths):
        rows.append([f"path {i + 1}", format_complex(path.end)] + _entries(evaluate(el, path.end, path)))
    report.tables["integrate"] = (header, rows)
    report.verdicts.append(f"{name}: status {el.status}, {len(points)} points, {len(paths)} paths")
    if args.svg:
        path = paths[0] if paths else (path_between(problem.domain, el.base_point, points[-1]) if points else None)
        if path is None:
            raise SchemaError("--svg needs a point or a path in the integrate section")
        samples = int(sec.get("samples", 101))
        ts = np.linspace(0.0, 1.0, max(samples, 2))
        vals = evolve_at(problem.group, pullback(el.form, path), ts, problem.steps)
        if problem.group.is_abelian:
            vals = np.exp(vals)
            series = {f"|exp v{i + 1}|": np.abs(vals[:, i]) for i in range(vals.shape[1])}
        else:
            n = problem.group.n
            series = {f"|g{i + 1}{j + 1}|": np.abs(vals[:, i, j]) for i in range(n) for j in range(n)}
        report.svgs["integrate"] = line_chart_svg(ts, series, f"entry magnitudes of {name} along the path")
    return report


def _product_report(command, problem, product, parts, points, residual_fn) -> RunReport:
    report = RunReport(command, problem.digest)
    header = ["point", "direction"] + _entry_header(problem.group)
    report.tables[command] = (header, _form_rows(product.form, points, problem.group))
    residual = max((residual_fn(p) for p in points), default=0.0)
    report.tables[f"{command}_residual"] = (["max_residual"], [[format_real(residual)]])
    report.verdicts.append(f"{parts}: status {product.status}, consistency residual {residual:.3e}")
    return report


def cmd_multiply(problem: Problem, args) -> RunReport:
    sec = _section(problem, "multiply")
    if "left" not in sec or "right" not in sec:
        raise SchemaError("multiply needs 'left' and 'right' form names")
    a, b = problem.element(str(sec["left"])), problem.element(str(sec["right"]))
    product = multiply(a, b)
    points = _points(sec)

    def residual(p):
        got = _canonical_transport(product, p)
        want = _canonical_transport(a, p) * _canonical_transport(b, p)
        return float(np.linalg.norm(got.matrix - want.matrix))

    return _product_report("multiply", problem, product, f"{sec['left']} * {sec['right']}", points, residual)


def cmd_inverse(problem: Problem, args) -> RunReport:
    sec = _section(problem, "inverse")
    name = _form_name(problem, sec)
    a = problem.element(name)
    inv = inverse(a)
    ident = multiply(a, inv).form
    points = _points(sec)

    def residual(p):
        vals = [ident.evaluate(np.array([p]), np.array([t], dtype=np.complex128))[0] for _, t in _directions(problem.domain)]
        return float(max(np.linalg.norm(v) for v in vals))

    return _product_report("inverse", problem, inv, f"{name}^-1", points, residual)


def cmd_components(problem: Problem, args) -> RunReport:
    sec = problem.sections.get("components", {})
    names = sec.get("forms", list(problem.forms)) if isinstance(sec, dict) else list(problem.forms)
    if not problem.group.is_abelian:
        raise SchemaError("components need an abelian group with a lattice")
    report = RunReport("components", problem.digest)
    classes = {}
    rows = []
    for name in names:
        el = problem.element(str(name))
        cls = component_class(el.form, problem.group)
        classes[name] = cls
        for j, c in enumerate(cls.coords):
            rows.append([name, str(j + 1), " ".join(str(x) for x in c)])
    report.tables["components"] = (["form", "generator", "lattice_coordinates"], rows)
    pairs = []
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            same = same_component(classes[a], classes[b])
            pairs.append([a, b, "same" if same else "different"])
    report.tables["component_pairs"] = (["form_a", "form_b", "component"], pairs)
    for name in names:
        report.verdicts.append(f"{name}: class {classes[name]}")
    return report


def _load_raw(path) -> dict:
    try:
        raw = json.loads(FsPath(path).read_bytes())
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise SchemaError("problem file must be a JSON object")
    return raw


def cmd_discreteness(path, args) -> RunReport:
    import hashlib

    raw = _load_raw(path)
    sec = raw.get("discreteness")
    if not isinstance(sec, dict):
        raise SchemaError("problem file needs an object section 'discreteness'")
    pres = sec.get("presentation")
    if not isinstance(pres, dict) or not isinstance(pres.get("n"), int):
        raise SchemaError("discreteness.presentation needs an integer 'n' and optional 'relations'")
    rel = pres.get("relations", [])
    if not isinstance(rel, list):
        raise SchemaError("discreteness.presentation.relations must be a list of rows")
    rank = sec.get("lattice_rank")
    if rank is None and isinstance(raw.get("group"), dict):
        rank = len(raw["group"].get("lattice", []))
    if not isinstance(rank, int) or rank < 0:
        raise SchemaError("discreteness.lattice_rank must be a non-negative integer")
    rep = discreteness_report(AbelianPresentation(pres["n"], tuple(tuple(r) for r in rel)), rank)
    report = RunReport("discreteness", hashlib.sha256(FsPath(path).read_bytes()).hexdigest())
    report.tables["invariant_factors"] = (
        ["index", "factor"],
        [[str(i + 1), str(d)] for i, d in enumerate(rep.invariant_factors)],
    )
    report.tables["discreteness"] = (
        ["hom_rank", "lattice_rank", "discrete"],
        [[str(rep.hom_rank), str(rep.lattice_rank), str(rep.discrete).lower()]],
    )
    report.verdicts.append(rep.verdict)
    return report


def cmd_demo(args) -> RunReport:
    try:
        ns = [int(x) for x in args.n_list.split(",") if x.strip()]
    except ValueError:
        raise SchemaError(f"--n-list must be comma-separated integers, got {args.n_list!r}") from None
    if not ns or min(ns) < 1:
        raise SchemaError("--n-list needs integers >= 1")
    if args.radius < 1:
        raise SchemaError("--radius must be >= 1")
    rows = pathology_report(ns, radius=args.radius)
    report = RunReport("demo-exp-pathology")
    header = ["n", "sup_deviation", "h11", "h12", "h21", "h22", "in_exp_image"]
    report.tables["exp_pathology"] = (
        header,
        [[str(r.n), format_real(r.sup_deviation)] + [format_complex(x) for x in r.value_at_n.ravel()] + [str(r.in_exp_image).lower()] for r in rows],
    )
    for r in rows:
        where = "inside" if r.in_exp_image else "outside"
        report.verdicts.append(f"n={r.n}: sup |h_n - 1| over |z|<={args.radius:g} is {r.sup_deviation:.3e}; h_n(n) is {where} the exp image")
    if args.svg:
        report.svgs["exp_pathology"] = line_chart_svg(
            [r.n for r in rows], {"log10 sup deviation": [np.log10(r.sup_deviation) for r in rows]}, "deviation from the identity"
        )
    return report


def cmd_verify(args) -> RunReport:
    from mapgroups.verify import SUITES, run_suite

    if args.suite not in SUITES:
        raise SchemaError(f"unknown suite {args.suite!r}; known: {', '.join(sorted(SUITES))}")
    report = RunReport("verify")
    results = run_suite(args.suite)
    for r in results:
        report.verdicts.append(r.line())
        if args.tol_report:
            report.verdicts.extend(f"    {'ok  ' if c.passed else 'FAIL'} {c.describe()}" for c in r.checks)
    report.exit_code = EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE
    return report


PROBLEM_COMMANDS = {
    "periods": cmd_periods,
    "integrate": cmd_integrate,
    "multiply": cmd_multiply,
    "inverse": cmd_inverse,
    "components": cmd_components,
}


# ------------------------------------------------------------------- driver


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mapgroups", description="Calculus of mapping groups into matrix Lie groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        p.add_argument("--input", required=needs_input, help="problem file (JSON)")
        p.add_argument("--out", help="directory for CSV/SVG output; tables go to stdout otherwise")
        p.add_argument("--steps", type=int, help="integrator steps per unit path parameter")
        p.add_argument("--period-tol", type=float, help="distance below which a period counts as trivial")
        p.add_argument("--svg", action="store_true", help="also write an SVG line chart")
        p.add_argument("--tol-report", action="store_true", help="report error estimates or per-check values")

    for name in PROBLEM_COMMANDS:
        common(sub.add_parser(name))
    common(sub.add_parser("discreteness"))
    demo = sub.add_parser("demo-exp-pathology")
    common(demo, needs_input=False)
    demo.add_argument("--n-list", default="5,10,15", help="comma-separated n values")
    demo.add_argument("--radius", type=float, default=2.0, help="disk radius R")
    ver = sub.add_parser("verify")
    common(ver, needs_input=False)
    ver.add_argument("--suite", default="all", help="acceptance suite name or criterion number")
    return parser


def run(args) -> RunReport:
    if args.command == "verify":
        return cmd_verify(args)
    if args.command == "demo-exp-pathology":
        return cmd_demo(args)
    if args.command == "discreteness":
        return cmd_discreteness(args.input, args)
    if args.steps is not None and args.steps < 1:
        raise SchemaError("--steps must be a positive integer")
    problem = load_problem(args.input, steps=args.steps, period_tol=args.period_tol)
    return PROBLEM_COMMANDS[args.command](problem, args)


def emit(report: RunReport, out_dir, stdout) -> None:
    if out_dir:
        out = FsPath(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, (header, rows) in report.tables.items():
            (out / f"{name}.csv").write_bytes(write_csv(header, rows).encode())
        for name, svg in report.svgs.items():
            (out / f"{name}.svg").write_bytes(svg.encode())
    else:
        for name, (header, rows) in report.tables.items():
            stdout.write(f"# {name}\n")
            stdout.write(write_csv(header, rows).replace("\r\n", "\n"))
        if report.svgs:
            stdout.write("# SVG output needs --out\n")
    if report.digest:
        stdout.write(f"input sha256 {report.digest}\n")
    for line in report.verdicts:
        stdout.write(line + "\n")


def error_exit_code(exc: Exception) -> int:
    if isinstance(exc, AmbiguityError):
        return EXIT_AMBIGUITY
    if isinstance(exc, (SchemaError, ParseError, InvalidArgumentError, GeometryError, SamplingResolutionError)):
        return EXIT_INPUT
    return EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        report = run(args)
    except MapGroupError as exc:
        code = error_exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code
    emit(report, args.out, sys.stdout)
    print(f"time {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
