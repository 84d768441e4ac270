"""Algebra-valued 1-forms on the model domains, their pullbacks and flatness.

Every form answers one question: given base points ``p`` (complex array, shape
``(k,)``) and tangent vectors ``v`` (complex array, same shape) return the
values alpha_p(v) as a ``(k, n, n)`` complex array. Tangents on the plane are
encoded as complex numbers dx + i dy; on intervals and circles they are real.

Abelian targets use diagonal ``(d, d)`` matrices as algebra values so that the
same code handles both cases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from mapgroups import linalg
from mapgroups.errors import EvaluationError, InvalidArgumentError
from mapgroups.expr import MatrixExpr, parse_expr
from mapgroups.groups import AbelianQuotient, GroupDescriptor, SpecialLinear
from mapgroups.paths import Circle, Interval, Path, PlaneChart, PuncturedPlane
from mapgroups.quadrature import adaptive_gl

# relative slack for the trace/diagonal spot check on evaluated values
_ALGEBRA_SPOT_TOL = 1e-8


def _flat(points):
    return np.atleast_1d(np.asarray(points, dtype=np.complex128))


class OneForm:
    """Base class; subclasses implement :meth:`evaluate`."""

    domain = None
    group: GroupDescriptor = None

    @property
    def n(self) -> int:
        return self.group.n

    def evaluate(self, points, tangents) -> np.ndarray:
        raise NotImplementedError

    def pullback_values(self, path: Path, ts) -> np.ndarray:
        """alpha_{path(t)}(path'(t)) at the parameters ``ts``."""
        ts = np.asarray(ts, dtype=float)
        return self.evaluate(path.point(ts), path.velocity(ts))

    def __add__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return SumForm(self, other)

    def __sub__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return SumForm(self, ScaledForm(-1.0, other))

    def __neg__(self):
        return ScaledForm(-1.0, self)

    def __rmul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return ScaledForm(complex(c), self)

    def spot_check(self, values: np.ndarray) -> np.ndarray:
        """Cheap membership check of evaluated values in the target algebra."""
        if not np.isfinite(values).all():
            raise EvaluationError("form evaluated to non-finite values")
        scale = max(1.0, float(np.abs(values).max(initial=0.0)))
        group = self.group
        if group.is_abelian:
            off = values - values * np.eye(values.shape[-1])
            if np.abs(off).max(initial=0.0) > _ALGEBRA_SPOT_TOL * scale:
                raise EvaluationError("abelian form produced non-diagonal values")
        elif isinstance(group, SpecialLinear):
            tr = np.abs(np.trace(values, axis1=-2, axis2=-1)).max(initial=0.0)
            if tr > _ALGEBRA_SPOT_TOL * scale:
                raise EvaluationError(f"form leaves the trace-free algebra (|tr| = {tr:.3g})")
        return values


def _check_compatible(a: OneForm, b: OneForm):
    if a.domain != b.domain:
        raise InvalidArgumentError("forms live on different domains")
    if a.group != b.group:
        raise InvalidArgumentError("forms take values in different algebras")


# -------------------------------------------------------------- concrete forms


def _as_evaluator(xi, variables):
    """Turn expression text, a MatrixExpr or a callable into ``f(**vars) -> (k, n, n)``."""
    if isinstance(xi, str):
        xi = parse_expr(xi, variables)
    if isinstance(xi, MatrixExpr):
        unknown = xi.variables() - set(variables)
        if unknown:
            raise InvalidArgumentError(f"expression uses {sorted(unknown)}, allowed: {list(variables)}")
        return xi, xi.n
    if callable(xi):
        return xi, None
    raise InvalidArgumentError(f"cannot build a form coefficient from {type(xi).__name__}")


def _eval_coefficient(coef, n, **env):
    if isinstance(coef, MatrixExpr):
        vals = coef.evaluate(**env)
    else:
        vals = np.asarray(coef(*env.values()), dtype=np.complex128)
    k = np.broadcast_shapes(*(np.shape(v) for v in env.values()))
    return np.broadcast_to(vals, k + (n, n))


@dataclass(frozen=True, eq=False)
class ComplexForm(OneForm):
    """xi(z) dz on a punctured plane (or a chart regarded as part of C)."""

    xi: object
    domain: object
    group: GroupDescriptor

    def __post_init__(self):
        coef, n = _as_evaluator(self.xi, ("z",))
        if n is not None and n != self.group.n:
            raise InvalidArgumentError(f"expression is {n}x{n}, group needs {self.group.n}x{self.group.n}")
        object.__setattr__(self, "xi", coef)

    def evaluate(self, points, tangents):
        z = _flat(points)
        v = _flat(tangents)
        vals = _eval_coefficient(self.xi, self.n, z=z)
        return self.spot_check(vals * v[:, None, None])


@dataclass(frozen=True, eq=False)
class RealIntervalForm(OneForm):
    """xi(t) dt on an interval or on the circle (t is the angle)."""

    xi: object
    domain: object
    group: GroupDescriptor

    def __post_init__(self):
        coef, n = _as_evaluator(self.xi, ("t",))
        if n is not None and n != self.group.n:
            raise InvalidArgumentError(f"expression is {n}x{n}, group needs {self.group.n}x{self.group.n}")
        object.__setattr__(self, "xi", coef)

    def evaluate(self, points, tangents):
        t = _flat(points).real
        v = _flat(tangents).real
        vals = _eval_coefficient(self.xi, self.n, t=t)
        return self.spot_check(vals * v[:, None, None])


@dataclass(frozen=True, eq=False)
class ChartForm(OneForm):
    """xi1(x, y) dx + xi2(x, y) dy on a rectangular chart."""

    xi1: object
    xi2: object
    domain: object
    group: GroupDescriptor

    def __post_init__(self):
        for name in ("xi1", "xi2"):
            coef, n = _as_evaluator(getattr(self, name), ("x", "y"))
            if n is not None and n != self.group.n:
                raise InvalidArgumentError(f"{name} is {n}x{n}, group needs {self.group.n}x{self.group.n}")
            object.__setattr__(self, name, coef)

    def evaluate(self, points, tangents):
        p = _flat(points)
        v = _flat(tangents)
        env = {"x": p.real, "y": p.imag}
        a = _eval_coefficient(self.xi1, self.n, **env)
        b = _eval_coefficient(self.xi2, self.n, **env)
        return self.spot_check(a * v.real[:, None, None] + b * v.imag[:, None, None])


@dataclass(frozen=True, eq=False)
class ZeroForm(OneForm):
    domain: object
    group: GroupDescriptor

    def evaluate(self, points, tangents):
        k = _flat(points).shape[0]
        return np.zeros((k, self.n, self.n), dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class SumForm(OneForm):
    first: OneForm
    second: OneForm

    def __post_init__(self):
        _check_compatible(self.first, self.second)

    domain = property(lambda self: self.first.domain)
    group = property(lambda self: self.first.group)

    def evaluate(self, points, tangents):
        return self.first.evaluate(points, tangents) + self.second.evaluate(points, tangents)

    def pullback_values(self, path, ts):
        return self.first.pullback_values(path, ts) + self.second.pullback_values(path, ts)


@dataclass(frozen=True, eq=False)
class ScaledForm(OneForm):
    """A constant complex multiple of a form."""

    factor: complex
    form: OneForm

    domain = property(lambda self: self.form.domain)
    group = property(lambda self: self.form.group)

    def evaluate(self, points, tangents):
        return self.factor * self.form.evaluate(points, tangents)

    def pullback_values(self, path, ts):
        return self.factor * self.form.pullback_values(path, ts)


@dataclass(frozen=True, eq=False)
class ScalarTimes(OneForm):
    """beta * x for a scalar form beta and a fixed algebra element x."""

    beta: OneForm
    x: np.ndarray
    group: GroupDescriptor

    def __post_init__(self):
        if self.beta.n != 1:
            raise InvalidArgumentError("scalar_times needs a scalar (1x1) form")
        object.__setattr__(self, "x", self.group.check_algebra(self.x))

    domain = property(lambda self: self.beta.domain)

    def evaluate(self, points, tangents):
        return self.beta.evaluate(points, tangents)[:, 0, 0][:, None, None] * self.x

    def pullback_values(self, path, ts):
        return self.beta.pullback_values(path, ts)[:, 0, 0][:, None, None] * self.x


@dataclass(frozen=True, eq=False)
class DressedForm(OneForm):
    """Ad(D(m))^{-1} applied to ``base`` (``invert=False``: Ad(D(m))).

    ``dressing`` is a group valued map with ``at(points) -> (k, n, n)`` and
    ``along(path, ts) -> (k, n, n)``. The second method follows the path
    continuously, which is what gives the group law its meaning on domains
    where D is only defined relative to a path.
    """

    base: OneForm
    dressing: object
    invert: bool = True

    domain = property(lambda self: self.base.domain)
    group = property(lambda self: self.base.group)

    def _conjugate(self, d, vals):
        d_inv = np.linalg.inv(d)
        if self.invert:
            return d_inv @ vals @ d
        return d @ vals @ d_inv

    def evaluate(self, points, tangents):
        vals = self.base.evaluate(points, tangents)
        return self._conjugate(self.dressing.at(_flat(points)), vals)

    def pullback_values(self, path, ts):
        vals = self.base.pullback_values(path, ts)
        return self._conjugate(self.dressing.along(path, ts), vals)


@dataclass(frozen=True)
class ConstantDressing:
    """The constant map m -> k (used for Ad(k)^{-1} on forms)."""

    value: np.ndarray

    def at(self, points):
        return np.broadcast_to(self.value, (len(_flat(points)),) + self.value.shape)

    def along(self, path, ts):
        return np.broadcast_to(self.value, (len(np.atleast_1d(ts)),) + self.value.shape)


class SampledForm(OneForm):
    """Form interpolated from nodal values on an interval, circle or chart grid.

    ``values`` holds alpha at the nodes applied to the unit coordinate vectors:
    shape ``(k, n, n)`` for 1-D domains (coefficient of dt) and
    ``(kx, ky, 2, n, n)`` for charts (coefficients of dx and dy).
    """

    def __init__(self, domain, group, grid, values):
        self.domain = domain
        self.group = group
        values = np.asarray(values, dtype=np.complex128)
        n = group.n
        if isinstance(domain, PlaneChart):
            xs, ys = (np.asarray(g, dtype=float) for g in grid)
            if values.shape != (xs.size, ys.size, 2, n, n):
                raise InvalidArgumentError(f"chart samples must have shape {(xs.size, ys.size, 2, n, n)}")
            self._interp = RegularGridInterpolator(
                (xs, ys), values.reshape(xs.size, ys.size, 2 * n * n), method="cubic"
            )
        elif isinstance(domain, (Interval, Circle)):
            ts = np.asarray(grid, dtype=float)
            if values.shape != (ts.size, n, n):
                raise InvalidArgumentError(f"samples must have shape {(ts.size, n, n)}")
            if isinstance(domain, Circle):
                period = 2 * np.pi
                if not np.isclose(ts[-1] - ts[0], period):
                    ts = np.append(ts, ts[0] + period)
                    values = np.concatenate([values, values[:1]])
                self._period = (ts[0], period)
                self._spline = CubicSpline(ts, values, axis=0, bc_type="periodic")
            else:
                self._period = None
                self._spline = CubicSpline(ts, values, axis=0)
        else:
            raise InvalidArgumentError(f"sampled forms are not supported on {type(domain).__name__}")
        self.grid = grid
        self.values = values

    def evaluate(self, points, tangents):
        p = _flat(points)
        v = _flat(tangents)
        n = self.n
        if isinstance(self.domain, PlaneChart):
            coef = self._interp(np.column_stack([p.real, p.imag])).reshape(-1, 2, n, n)
            return coef[:, 0] * v.real[:, None, None] + coef[:, 1] * v.imag[:, None, None]
        t = p.real
        if self._period is not None:
            t0, period = self._period
            t = t0 + np.mod(t - t0, period)
        return self._spline(t) * v.real[:, None, None]


# ------------------------------------------------------------- algebra paths


@dataclass(frozen=True)
class AlgebraPath:
    """t -> algebra element on [0, 1], smooth between the recorded knots.

    ``speed_to_pole(ts)`` (optional) returns |path'(t)| / dist(path(t), poles)
    so the integrator can shorten steps near singularities.
    """

    func: object
    n: int
    knots: tuple = ()
    speed_to_pole: object = field(default=None, compare=False)

    def __call__(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        vals = np.asarray(self.func(ts), dtype=np.complex128)
        if not np.isfinite(vals).all():
            bad = ts[~np.isfinite(vals.reshape(len(ts), -1)).all(axis=1)]
            raise EvaluationError(f"algebra path is not finite at t = {bad[0]:.17g}", where=float(bad[0]))
        return vals

    @classmethod
    def constant(cls, x):
        x = linalg.as_matrix(x)
        return cls(lambda ts: np.broadcast_to(x, (len(ts),) + x.shape), x.shape[0])

    def scaled(self, c) -> "AlgebraPath":
        return AlgebraPath(lambda ts: c * self.func(ts), self.n, self.knots, self.speed_to_pole)


def _pole_distance(domain, z):
    poles = np.asarray(getattr(domain, "poles", ()), dtype=np.complex128)
    if poles.size == 0:
        return None
    return np.abs(np.asarray(z)[:, None] - poles[None, :]).min(axis=1)


def pullback(alpha: OneForm, path: Path) -> AlgebraPath:
    """The algebra path t -> alpha_{path(t)}(path'(t))."""
    domain = alpha.domain

    def func(ts):
        try:
            return alpha.pullback_values(path, ts)
        except EvaluationError as exc:
            z = path.point(ts)
            dist = _pole_distance(domain, z)
            if dist is not None and dist.size:
                t_bad = float(ts[int(np.argmin(dist))])
            else:
                t_bad = getattr(exc, "where", None)
            raise EvaluationError(f"pullback failed at t = {t_bad}: {exc}", where=t_bad) from exc

    speed = None
    if getattr(domain, "poles", ()):
        def speed(ts):
            return np.abs(path.velocity(ts)) / np.maximum(_pole_distance(domain, path.point(ts)), 1e-300)

    return AlgebraPath(func, alpha.n, tuple(path.knots), speed)


# --------------------------------------------------------- Maurer-Cartan check


def mc_residual(alpha: OneForm, grid=(17, 17), rect=None) -> float:
    """max over interior grid nodes of |d_x xi2 - d_y xi1 + [xi1, xi2]|_F.

    Central differences with the grid spacing as step. 1-D domains carry no
    2-forms, so the residual is 0 there. ``rect = (x0, x1, y0, y1)`` is needed
    when the domain is not a chart.
    """
    if alpha.domain.dimension == 1:
        return 0.0
    nx, ny = grid
    if nx < 3 or ny < 3:
        raise InvalidArgumentError("mc_residual needs at least a 3x3 grid")
    if rect is None:
        if not isinstance(alpha.domain, PlaneChart):
            raise InvalidArgumentError("pass rect=(x0, x1, y0, y1) for non-chart domains")
        d = alpha.domain
        rect = (d.x0, d.x1, d.y0, d.y1)
    x0, x1, y0, y1 = rect
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    pts = (xs[:, None] + 1j * ys[None, :]).ravel()
    n = alpha.n
    try:
        ones = np.ones_like(pts)
        xi1 = alpha.evaluate(pts, ones).reshape(nx, ny, n, n)
        xi2 = alpha.evaluate(pts, 1j * ones).reshape(nx, ny, n, n)
    except EvaluationError as exc:
        raise EvaluationError(f"mc_residual: evaluation failed on the grid {rect}: {exc}", where=rect) from exc
    dx_xi2 = (xi2[2:, 1:-1] - xi2[:-2, 1:-1]) / (2 * hx)
    dy_xi1 = (xi1[1:-1, 2:] - xi1[1:-1, :-2]) / (2 * hy)
    a, b = xi1[1:-1, 1:-1], xi2[1:-1, 1:-1]
    res = dx_xi2 - dy_xi1 + a @ b - b @ a
    return float(np.linalg.norm(res, axis=(-2, -1)).max())


# ---------------------------------------------------------- Behnke-Stein basis


def scalar_group() -> AbelianQuotient:
    """The vector group C, the target of scalar forms."""
    return AbelianQuotient(1)


def behnke_stein_basis(domain: PuncturedPlane) -> list:
    """beta_j = dz / (2 pi i (z - p_j)), dual to the canonical loop basis."""
    if not isinstance(domain, PuncturedPlane) or not domain.punctures:
        raise InvalidArgumentError("Behnke-Stein forms need a plane with at least one puncture")
    out = []
    for p in domain.punctures:
        def coef(z, p=p):
            return (1.0 / (2j * np.pi * (z - p)))[:, None, None]
        out.append(ComplexForm(coef, domain, scalar_group()))
    return out


def scalar_times(beta: OneForm, x, group: GroupDescriptor) -> OneForm:
    """The form beta * x with values in the algebra of ``group``."""
    return ScalarTimes(beta, np.asarray(x, dtype=np.complex128), group)


def line_integral(alpha: OneForm, path: Path, tol: float = 1e-12) -> np.ndarray:
    """Integral of the pullback, i.e. the plain (abelian) integral of alpha along the path."""
    total = 0
    for lo, hi in path.pieces():
        total = total + adaptive_gl(lambda ts: alpha.pullback_values(path, ts), lo, hi, tol)
    return np.asarray(total)


def duality_matrix(forms, basis) -> np.ndarray:
    """Entry (i, j) is the integral of the scalar form beta_j over loop i."""
    return np.array(
        [[line_integral(b, loop)[0, 0] for b in forms] for loop in basis.loops], dtype=np.complex128
    )


__all__ = [
    "AlgebraPath",
    "ChartForm",
    "ComplexForm",
    "ConstantDressing",
    "DressedForm",
    "OneForm",
    "RealIntervalForm",
    "SampledForm",
    "ScalarTimes",
    "ScaledForm",
    "SumForm",
    "ZeroForm",
    "behnke_stein_basis",
    "duality_matrix",
    "line_integral",
    "mc_residual",
    "pullback",
    "scalar_group",
    "scalar_times",
]
