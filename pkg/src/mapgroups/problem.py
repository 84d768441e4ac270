"""Problem files (JSON), sampled-map CSV input and CSV/SVG output.

Problem file layout::

    {
      "group":   {"type": "GL" | "SL" | "abelian", "n": 2, "field": "C" | "R",
                  "lattice": [[[re, im], ...], ...]},          # abelian only
      "domain":  {"type": "interval", "a": 0, "b": 1}
               | {"type": "circle"}
               | {"type": "punctured_plane", "punctures": [[re, im], ...]}
               | {"type": "chart", "x": [x0, x1], "y": [y0, y1]},
      "base_point": [re, im],
      "forms": {"name": {"expr": "..."}                    # coefficient of dz or dt
                        | {"dx": "...", "dy": "..."}        # charts
                        | {"samples": "file.csv"},          # sampled map, 1-D domains
                "status": "verified" | "relative-to-path"   # optional, per form
               },
      "control": {"steps": 256, "period_tol": 1e-6},
      ...command sections ("integrate", "multiply", ...)
    }

Complex numbers are [re, im] pairs (a bare real number is accepted too).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from xml.sax.saxutils import escape

import numpy as np

from mapgroups.calculus import DEFAULT_PERIOD_TOL, BasedMapElement, SampledMap, log_derivative_from_samples
from mapgroups.errors import MapGroupError, SchemaError
from mapgroups.evolution import DEFAULT_STEPS
from mapgroups.forms import ChartForm, ComplexForm, RealIntervalForm
from mapgroups.groups import AbelianQuotient, GeneralLinear, Lattice, SpecialLinear
from mapgroups.paths import Circle, Interval, PlaneChart, PuncturedPlane


def parse_complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise SchemaError(f"{where}: expected a number or [re, im]")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise SchemaError(f"{where}: expected a number or [re, im], got {value!r}")


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SchemaError(f"{where}: expected a finite number")
    return float(value)


def parse_group(spec: dict):
    kind = _require(spec, "type", "group")
    n = _require(spec, "n", "group")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SchemaError("group.n must be a positive integer")
    field_name = spec.get("field", "C")
    if field_name not in ("C", "R"):
        raise SchemaError("group.field must be 'C' or 'R'")
    if kind == "GL":
        return GeneralLinear(n, "complex" if field_name == "C" else "real")
    if kind == "SL":
        if field_name != "C":
            raise SchemaError("SL is supported over C only")
        return SpecialLinear(n)
    if kind == "abelian":
        gens = spec.get("lattice", [])
        if not isinstance(gens, list):
            raise SchemaError("group.lattice must be a list of generators")
        parsed = []
        for i, g in enumerate(gens):
            if not isinstance(g, list) or len(g) != n:
                raise SchemaError(f"group.lattice[{i}] must list {n} complex coordinates")
            parsed.append(tuple(parse_complex(c, f"group.lattice[{i}]") for c in g))
        return AbelianQuotient(n, Lattice(n, tuple(parsed)))
    raise SchemaError(f"unknown group type {kind!r}")


def parse_domain(spec: dict, base_point):
    kind = _require(spec, "type", "domain")
    if kind == "interval":
        a = _number(_require(spec, "a", "domain"), "domain.a")
        b = _number(_require(spec, "b", "domain"), "domain.b")
        bp = a if base_point is None else base_point.real
        return Interval(a, b, bp)
    if kind == "circle":
        return Circle(0.0 if base_point is None else base_point.real)
    if kind == "punctured_plane":
        pts = _require(spec, "punctures", "domain")
        if not isinstance(pts, list) or not pts:
            raise SchemaError("domain.punctures must be a non-empty list")
        if base_point is None:
            raise SchemaError("punctured planes need a base_point")
        return PuncturedPlane(tuple(parse_complex(p, "domain.punctures") for p in pts), base_point)
    if kind == "chart":
        x = _require(spec, "x", "domain")
        y = _require(spec, "y", "domain")
        if not (isinstance(x, list) and len(x) == 2 and isinstance(y, list) and len(y) == 2):
            raise SchemaError("domain.x and domain.y must be [lo, hi] pairs")
        return PlaneChart(_number(x[0], "x"), _number(x[1], "x"), _number(y[0], "y"), _number(y[1], "y"), base_point)
    raise SchemaError(f"unknown domain type {kind!r}")


def read_sample_csv(path: FsPath, domain, group) -> SampledMap:
    """CSV with header; first column the parameter, then matrix entries row-major as re+imi."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read samples {path}: {exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2:
        raise SchemaError(f"{path}: need a header row and samples")
    width = group.n if group.is_abelian else group.n * group.n
    ts, vals = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 1 + width:
            raise SchemaError(f"{path}: line {i} has {len(row)} fields, expected {1 + width}")
        try:
            ts.append(float(row[0]))
            vals.append([parse_complex_text(c) for c in row[1:]])
        except ValueError as exc:
            raise SchemaError(f"{path}: line {i}: {exc}") from None
    shape = (len(ts), group.n) if group.is_abelian else (len(ts), group.n, group.n)
    return SampledMap(domain, group, np.array(ts), np.array(vals).reshape(shape))


def parse_complex_text(text: str) -> complex:
    """Inverse of :func:`format_complex` (also accepts Python's 'j' notation)."""
    s = text.strip().replace(" ", "")
    if s.endswith("i"):
        s = s[:-1] + "j"
    return complex(s)


@dataclass
class Problem:
    group: object
    domain: object
    forms: dict
    steps: int = DEFAULT_STEPS
    period_tol: float = DEFAULT_PERIOD_TOL
    sections: dict = field(default_factory=dict)
    digest: str = ""

    def element(self, name: str) -> BasedMapElement:
        if name not in self.forms:
            raise SchemaError(f"unknown form {name!r}; defined: {sorted(self.forms)}")
        return self.forms[name]


def _build_form(name: str, spec: dict, domain, group, base_dir: FsPath, steps: int) -> BasedMapElement:
    where = f"forms.{name}"
    if not isinstance(spec, dict):
        raise SchemaError(f"{where}: expected an object")
    status = spec.get("status")
    if status not in (None, "verified", "relative-to-path", "unverified"):
        raise SchemaError(f"{where}.status is not a known status")
    if "samples" in spec:
        if not isinstance(domain, (Interval, Circle)):
            raise SchemaError(f"{where}: samples are supported on intervals and circles")
        sampled = read_sample_csv(base_dir / spec["samples"], domain, group)
        form = log_derivative_from_samples(sampled)
    elif isinstance(domain, PlaneChart):
        if "dx" not in spec or "dy" not in spec:
            raise SchemaError(f"{where}: chart forms need 'dx' and 'dy' expressions")
        form = ChartForm(str(spec["dx"]), str(spec["dy"]), domain, group)
    else:
        expr = _require(spec, "expr", where)
        if not isinstance(expr, str):
            raise SchemaError(f"{where}.expr must be a string")
        if isinstance(domain, PuncturedPlane):
            form = ComplexForm(expr, domain, group)
        else:
            form = RealIntervalForm(expr, domain, group)
    return BasedMapElement(form, status, steps)


def load_problem(path, steps: int | None = None, period_tol: float | None = None) -> Problem:
    """Parse and validate a problem file; flags override the file's control section."""
    path = FsPath(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    try:
        spec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return problem_from_dict(spec, path.parent, steps, period_tol, hashlib.sha256(raw).hexdigest())


def problem_from_dict(spec, base_dir=FsPath("."), steps=None, period_tol=None, digest="") -> Problem:
    if not isinstance(spec, dict):
        raise SchemaError("problem file must be a JSON object")
    try:
        group = parse_group(_require(spec, "group", "problem"))
        bp = spec.get("base_point")
        base_point = None if bp is None else parse_complex(bp, "base_point")
        domain = parse_domain(_require(spec, "domain", "problem"), base_point)
        control = spec.get("control", {})
        if not isinstance(control, dict):
            raise SchemaError("control must be an object")
        if steps is None:
            steps = control.get("steps", DEFAULT_STEPS)
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            raise SchemaError("control.steps must be a positive integer")
        if period_tol is None:
            period_tol = _number(control.get("period_tol", DEFAULT_PERIOD_TOL), "control.period_tol")
        forms_spec = spec.get("forms", {})
        if not isinstance(forms_spec, dict):
            raise SchemaError("forms must be an object mapping names to form specs")
        forms = {
            name: _build_form(name, fs, domain, group, FsPath(base_dir), steps) for name, fs in forms_spec.items()
        }
    except SchemaError:
        raise
    except MapGroupError as exc:
        # invalid values inside an otherwise well-formed file
        raise SchemaError(str(exc)) from exc
    sections = {k: v for k, v in spec.items() if k not in ("group", "domain", "base_point", "forms", "control")}
    return Problem(group, domain, forms, steps, period_tol, sections, digest)


# -------------------------------------------------------------------- output


def format_real(x: float) -> str:
    x = float(x)
    if x == 0:
        x = 0.0
    return f"{x:.12g}"


def format_complex(z) -> str:
    z = complex(z)
    re = 0.0 if z.real == 0 else z.real
    im = 0.0 if z.imag == 0 else z.imag
    return f"{re:.12g}{im:+.12g}i"


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow(r)
    return buf.getvalue()


def line_chart_svg(ts, series: dict, title: str, width: int = 640, height: int = 360) -> str:
    """Static SVG line chart of several real series against a common parameter."""
    ts = np.asarray(ts, dtype=float)
    pad = 48
    ymax = max((float(np.max(v)) for v in series.values()), default=1.0)
    ymin = min((float(np.min(v)) for v in series.values()), default=0.0)
    if ymax - ymin < 1e-12:
        ymax = ymin + 1.0
    t0, t1 = float(ts.min()), float(ts.max()) if ts.max() > ts.min() else float(ts.min()) + 1.0

    def sx(t):
        return pad + (t - t0) / (t1 - t0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - ymin) / (ymax - ymin) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f", "#bcbd22"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad - 4}" y="{sy(ymax) + 4:.1f}" text-anchor="end" font-family="sans-serif" font-size="10">{ymax:.4g}</text>',
        f'<text x="{pad - 4}" y="{sy(ymin) + 4:.1f}" text-anchor="end" font-family="sans-serif" font-size="10">{ymin:.4g}</text>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">path parameter</text>',
    ]
    for i, (label, ys) in enumerate(series.items()):
        color = colors[i % len(colors)]
        pts = " ".join(f"{sx(t):.2f},{sy(y):.2f}" for t, y in zip(ts, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(
            f'<text x="{width - pad + 4}" y="{pad + 14 * i:.1f}" font-family="sans-serif" font-size="10" fill="{color}">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
