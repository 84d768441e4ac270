"""The mapping group realized on logarithmic derivatives.

A based map (value 1 at the base point) is stored as its logarithmic
derivative f^{-1} df. The group law on such forms is

    alpha * beta = beta + Ad(Evol(beta))^{-1} alpha,
    alpha^{-1}   = -Ad(Evol(alpha)) alpha,

and a full map is a pair (k, based part) with k = f(base point).
Sampled maps on grids give the bridge to concrete group valued functions.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace

import numpy as np

from mapgroups import linalg
from mapgroups.errors import (
    AmbiguityError,
    BranchCutError,
    InvalidArgumentError,
    SamplingResolutionError,
)
from mapgroups.evolution import DEFAULT_STEPS, evolve_at, transport
from mapgroups.expr import MatrixExpr, parse_expr
from mapgroups.forms import ConstantDressing, DressedForm, OneForm, SampledForm, ScaledForm, SumForm, ZeroForm, pullback
from mapgroups.groups import GroupDescriptor, GroupElement
from mapgroups.paths import Circle, Interval, Path, PlaneChart, Segment, path_between

VERIFIED = "verified"
UNVERIFIED = "unverified"
RELATIVE = "relative-to-path"
_STATUSES = (VERIFIED, UNVERIFIED, RELATIVE)

DEFAULT_PERIOD_TOL = 1e-6
# neighbouring samples must satisfy |f(p)^{-1} f(q) - 1| below this
SAMPLE_JUMP_LIMIT = 0.5
# memo keys round points to this granularity
_MEMO_GRID = 1e-12


@dataclass(frozen=True, eq=False)
class BasedMapElement:
    """A map with value 1 at the base point, stored as its logarithmic derivative.

    ``status`` says whether the form is known to integrate to a global map
    (``verified``), is to be evaluated along canonical paths
    (``relative-to-path``), or neither (``unverified``). One-dimensional
    simply connected domains are verified on construction.
    """

    form: OneForm
    status: str = None
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        if self.status is None:
            auto = VERIFIED if isinstance(self.domain, Interval) else UNVERIFIED
            object.__setattr__(self, "status", auto)
        if self.status not in _STATUSES:
            raise InvalidArgumentError(f"status must be one of {_STATUSES}")

    domain = property(lambda self: self.form.domain)
    group = property(lambda self: self.form.group)
    base_point = property(lambda self: self.form.domain.base_point)

    @classmethod
    def zero(cls, domain, group: GroupDescriptor, steps: int = DEFAULT_STEPS):
        return cls(ZeroForm(domain, group), VERIFIED, steps)

    def relative_to_path(self) -> "BasedMapElement":
        """Opt in to evaluation along the canonical paths when periods are not trivial."""
        return replace(self, status=RELATIVE)

    def verify(self, period_tol: float = DEFAULT_PERIOD_TOL) -> "BasedMapElement":
        """Decide integrability numerically and return a copy with the resulting status.

        Loops domains: all basis periods within ``period_tol`` of 1. Charts:
        the Maurer-Cartan residual must vanish under refinement (below
        ``period_tol`` or shrinking by at least a factor 3 from a 17x17 to a
        33x33 grid).
        """
        from mapgroups.forms import mc_residual
        from mapgroups.topology import period_vector

        domain = self.domain
        if isinstance(domain, Interval):
            ok = True
        elif isinstance(domain, PlaneChart):
            coarse = mc_residual(self.form, (17, 17))
            fine = mc_residual(self.form, (33, 33))
            ok = fine <= period_tol or fine <= coarse / 3
        else:
            ok = period_vector(self.form, steps=self.steps).is_integrable(period_tol)
        return replace(self, status=VERIFIED if ok else UNVERIFIED)


@dataclass(frozen=True, eq=False)
class FullMapElement:
    """f = k * based, where k = f(base point)."""

    k: GroupElement
    based: BasedMapElement

    def __post_init__(self):
        if self.k.group != self.based.group:
            raise InvalidArgumentError("base value and form target different groups")

    domain = property(lambda self: self.based.domain)
    group = property(lambda self: self.based.group)

    @classmethod
    def from_based(cls, based: BasedMapElement) -> "FullMapElement":
        return cls(based.group.identity(), based)


def _as_full(f) -> FullMapElement:
    return f if isinstance(f, FullMapElement) else FullMapElement.from_based(f)


class MapDressing:
    """m -> k * Evol(alpha)(m), evaluated along canonical paths with a memo.

    The memo is shared by all evaluations of one dressed form; insertion is
    guarded by a lock so concurrent readers are safe.
    """

    def __init__(self, element: BasedMapElement, k=None):
        self.element = element
        n = element.group.n
        self.k = np.eye(n, dtype=np.complex128) if k is None else np.asarray(k, dtype=np.complex128)
        self._memo = {}
        self._lock = threading.Lock()

    def _key(self, p: complex):
        return (round(p.real / _MEMO_GRID), round(p.imag / _MEMO_GRID))

    def _compute(self, p: complex) -> np.ndarray:
        el = self.element
        path = path_between(el.domain, el.base_point, p)
        g = transport(el.group, el.form, path, steps=el.steps)
        return self.k @ g.value

    def at(self, points) -> np.ndarray:
        pts = np.atleast_1d(np.asarray(points, dtype=np.complex128))
        out = np.empty((pts.size,) + self.k.shape, dtype=np.complex128)
        for i, p in enumerate(pts):
            key = self._key(complex(p))
            val = self._memo.get(key)
            if val is None:
                val = self._compute(complex(p))
                with self._lock:
                    self._memo.setdefault(key, val)
            out[i] = val
        return out

    def along(self, path: Path, ts) -> np.ndarray:
        """Continuation along ``path``: D(path(0)) times the transport up to t."""
        el = self.element
        start = self.at([path.start])[0]
        g = evolve_at(el.group, pullback(el.form, path), ts, steps=el.steps)
        return start @ g


def _combined_status(*elements) -> str:
    statuses = {e.status for e in elements}
    if statuses == {VERIFIED}:
        return VERIFIED
    if UNVERIFIED in statuses:
        return UNVERIFIED
    return RELATIVE


def _check_same(a: BasedMapElement, b: BasedMapElement):
    if a.domain != b.domain:
        raise InvalidArgumentError("elements live on different domains")
    if a.group != b.group:
        raise InvalidArgumentError("elements take values in different groups")


def multiply(a: BasedMapElement, b: BasedMapElement) -> BasedMapElement:
    """Logarithmic derivative of the pointwise product: b + Ad(Evol(b))^{-1} a."""
    _check_same(a, b)
    steps = max(a.steps, b.steps)
    status = _combined_status(a, b)
    if a.group.is_abelian:
        return BasedMapElement(SumForm(a.form, b.form), status, steps)
    dressed = DressedForm(a.form, MapDressing(b), invert=True)
    return BasedMapElement(SumForm(b.form, dressed), status, steps)


def inverse(a: BasedMapElement) -> BasedMapElement:
    """Logarithmic derivative of the pointwise inverse: -Ad(Evol(a)) a."""
    if a.group.is_abelian:
        return BasedMapElement(ScaledForm(-1.0, a.form), a.status, a.steps)
    dressed = DressedForm(a.form, MapDressing(a), invert=False)
    return BasedMapElement(ScaledForm(-1.0, dressed), a.status, a.steps)


def evaluate(f, m, path: Path | None = None) -> GroupElement:
    """f(m) = k * transport from the base point to m.

    Without an explicit path the element must be verified or marked
    relative-to-path; otherwise the value would depend on an unstated choice.
    """
    f = _as_full(f)
    based = f.based
    m0 = based.base_point
    if path is None:
        if based.status == UNVERIFIED:
            raise AmbiguityError(
                "form is not known to be integrable; pass a path from the base point "
                "or mark the element relative-to-path"
            )
        path = path_between(based.domain, m0, m)
    else:
        tol = linalg.DEFAULT_TOL.eq_tol
        if abs(path.start - complex(m0)) >= tol or abs(path.end - complex(m)) >= tol:
            raise InvalidArgumentError("evaluation path must run from the base point to m")
    return f.k * transport(based.group, based.form, path, steps=based.steps)


def gauge_action(alpha: OneForm, f) -> OneForm:
    """delta(f) + Ad(f)^{-1} alpha."""
    f = _as_full(f)
    if alpha.domain != f.domain or alpha.group != f.group:
        raise InvalidArgumentError("form and map must share domain and group")
    if f.group.is_abelian:
        return SumForm(f.based.form, alpha)
    dressed = DressedForm(alpha, MapDressing(f.based, f.k.value), invert=True)
    return SumForm(f.based.form, dressed)


def semidirect_multiply(f1, f2) -> FullMapElement:
    """(k1, a1)(k2, a2) = (k1 k2, (Ad(k2)^{-1} a1) * a2)."""
    f1, f2 = _as_full(f1), _as_full(f2)
    if f1.group.is_abelian:
        moved = f1.based
    else:
        conj = DressedForm(f1.based.form, ConstantDressing(f2.k.value), invert=True)
        moved = BasedMapElement(conj, f1.based.status, f1.based.steps)
    return FullMapElement(f1.k * f2.k, multiply(moved, f2.based))


# ------------------------------------------------------------- sampled maps


@dataclass(frozen=True, eq=False)
class SampledMap:
    """Group valued map known on a uniform grid.

    1-D domains: ``grid`` is the array of nodes and ``values`` has shape
    ``(k, n, n)`` (abelian: ``(k, d)``). On the circle the nodes cover one
    period without repeating the first node. Charts: ``grid = (xs, ys)`` and
    values have shape ``(kx, ky, n, n)``.
    """

    domain: object
    group: GroupDescriptor
    grid: object
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if not np.isfinite(vals).all():
            raise InvalidArgumentError("sampled map has non-finite values")
        object.__setattr__(self, "values", vals)
        if isinstance(self.domain, PlaneChart):
            xs, ys = (np.asarray(g, dtype=float) for g in self.grid)
            object.__setattr__(self, "grid", (xs, ys))
            lead = (xs.size, ys.size)
        else:
            object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
            lead = (self.grid.size,)
        tail = (self.group.n,) if self.group.is_abelian else (self.group.n, self.group.n)
        if vals.shape != lead + tail:
            raise InvalidArgumentError(f"values have shape {vals.shape}, expected {lead + tail}")

    @classmethod
    def from_function(cls, domain, group, grid, func):
        """Sample ``func`` (vectorized over points) on the grid."""
        if isinstance(domain, PlaneChart):
            xs, ys = (np.asarray(g, dtype=float) for g in grid)
            pts = (xs[:, None] + 1j * ys[None, :]).ravel()
            vals = np.asarray(func(pts))
            return cls(domain, group, (xs, ys), vals.reshape((xs.size, ys.size) + vals.shape[1:]))
        return cls(domain, group, grid, np.asarray(func(np.asarray(grid, dtype=float))))

    @property
    def spacing(self):
        if isinstance(self.domain, PlaneChart):
            return tuple(_uniform_step(g) for g in self.grid)
        return (_uniform_step(self.grid),)

    def _same_grid(self, other: "SampledMap"):
        if self.domain != other.domain or self.group != other.group:
            raise InvalidArgumentError("sampled maps differ in domain or group")
        grids = zip(np.atleast_2d(self.grid), np.atleast_2d(other.grid)) if not isinstance(
            self.domain, PlaneChart
        ) else zip(self.grid, other.grid)
        for a, b in grids:
            if a.shape != b.shape or not np.allclose(a, b, rtol=0, atol=1e-12):
                raise InvalidArgumentError("sampled maps live on different grids")

    def __mul__(self, other: "SampledMap") -> "SampledMap":
        self._same_grid(other)
        if self.group.is_abelian:
            return replace(self, values=self.values + other.values)
        return replace(self, values=self.values @ other.values)

    def inverse(self) -> "SampledMap":
        if self.group.is_abelian:
            return replace(self, values=-self.values)
        return replace(self, values=np.linalg.inv(self.values))


def _uniform_step(g: np.ndarray) -> float:
    if g.size < 3:
        raise InvalidArgumentError("need at least three nodes per axis")
    d = np.diff(g)
    if np.ptp(d) > 1e-9 * abs(d[0]):
        raise InvalidArgumentError("sample grid must be uniform")
    return float(d[0])


def _relative_log(group, base: np.ndarray, other: np.ndarray) -> np.ndarray:
    """log(base^{-1} other) for stacks of nearby samples (abelian: lattice-reduced difference)."""
    if group.is_abelian:
        diff = other - base
        coords = np.array([group.lattice.coordinates(v) for v in diff]) if group.lattice.rank else None
        if coords is not None:
            diff = diff - np.array([group.lattice.point(np.floor(c + 0.5)) for c in coords])
        return np.einsum("ki,ij->kij", diff, np.eye(diff.shape[-1]))
    rel = np.linalg.solve(base, other)
    jump = np.linalg.norm(rel - np.eye(rel.shape[-1]), axis=(-2, -1))
    if jump.max(initial=0.0) >= SAMPLE_JUMP_LIMIT:
        raise SamplingResolutionError(
            f"neighbouring samples differ by {jump.max():.3g} (limit {SAMPLE_JUMP_LIMIT}); refine the grid"
        )
    return linalg.log_near_identity(rel)


def _axis_log_derivative(group, vals: np.ndarray, h: float, periodic: bool) -> np.ndarray:
    """Second-order log derivative along axis 0 of a stack of samples.

    ``vals`` has shape ``(k, *rest, n, n)`` (abelian: ``(k, *rest, d)``); the
    result has shape ``(k, *rest, n, n)`` with algebra values.
    """
    k = vals.shape[0]
    point = vals.shape[-1:] if group.is_abelian else vals.shape[-2:]
    rest = vals.shape[1 : vals.ndim - len(point)]
    v = vals.reshape((k, -1) + point)
    n = point[0]

    def rel(i, j):
        i, j = np.atleast_1d(i), np.atleast_1d(j)
        a = v[i].reshape((-1,) + point)
        b = v[j].reshape((-1,) + point)
        return _relative_log(group, a, b).reshape((i.size, v.shape[1], n, n))

    idx = np.arange(k)
    if periodic:
        out = (rel(idx, (idx + 1) % k) - rel(idx, (idx - 1) % k)) / (2 * h)
    else:
        out = np.empty((k, v.shape[1], n, n), dtype=np.complex128)
        inner = idx[1:-1]
        out[1:-1] = (rel(inner, inner + 1) - rel(inner, inner - 1)) / (2 * h)
        # one-sided second order at the ends: (4 L(h) - L(2h)) / (2h), h negative at the right end
        out[0] = (4 * rel(0, 1)[0] - rel(0, 2)[0]) / (2 * h)
        out[-1] = (4 * rel(k - 1, k - 2)[0] - rel(k - 1, k - 3)[0]) / (-2 * h)
    return out.reshape((k,) + rest + (n, n))


def nodal_log_derivative(f: SampledMap) -> np.ndarray:
    """Values of f^{-1} df at the nodes: ``(k, n, n)`` or ``(kx, ky, 2, n, n)`` on charts."""
    group = f.group
    if isinstance(f.domain, PlaneChart):
        hx, hy = f.spacing
        dx = _axis_log_derivative(group, f.values, hx, False)
        dy = _axis_log_derivative(group, np.swapaxes(f.values, 0, 1), hy, False)
        dy = np.swapaxes(dy, 0, 1)
        return np.stack([dx, dy], axis=2)
    (h,) = f.spacing
    return _axis_log_derivative(group, f.values, h, isinstance(f.domain, Circle))


def log_derivative_from_samples(f: SampledMap) -> OneForm:
    """The form f^{-1} df, interpolated from second order differences at the nodes."""
    return SampledForm(f.domain, f.group, f.grid, nodal_log_derivative(f))


def _interior(arr: np.ndarray, chart: bool) -> np.ndarray:
    return arr[1:-1, 1:-1] if chart else arr[1:-1]


def cocycle_residual(f1: SampledMap, f2: SampledMap) -> float:
    """max over interior nodes of |delta(f1 f2) - Ad(f2)^{-1} delta(f1) - delta(f2)|_F."""
    f1._same_grid(f2)
    chart = isinstance(f1.domain, PlaneChart)
    d12 = nodal_log_derivative(f1 * f2)
    d1 = nodal_log_derivative(f1)
    d2 = nodal_log_derivative(f2)
    if f1.group.is_abelian:
        moved = d1
    else:
        g = f2.values[:, :, None] if chart else f2.values
        moved = np.linalg.solve(g, d1 @ g)
    res = _interior(d12 - moved - d2, chart)
    return float(np.linalg.norm(res, axis=(-2, -1)).max())


def left_translation_defect(f1: SampledMap, f2: SampledMap) -> float:
    """max over nodes of |f2 f1^{-1} - (f2 f1^{-1}) at the first node|_F."""
    f1._same_grid(f2)
    q = (f2 * f1.inverse()).values
    flat = q.reshape((-1,) + q.shape[-1:] if f1.group.is_abelian else (-1,) + q.shape[-2:])
    return float(np.linalg.norm((flat - flat[0]).reshape(flat.shape[0], -1), axis=1).max())


def sample_map(f, grid) -> SampledMap:
    """Sample a reconstructed map on a 1-D grid (one continuous sweep from the base point)."""
    f = _as_full(f)
    based = f.based
    domain = based.domain
    if isinstance(domain, PlaneChart):
        xs, ys = (np.asarray(g, dtype=float) for g in grid)
        pts = (xs[:, None] + 1j * ys[None, :]).ravel()
        vals = np.array([evaluate(f, p).value for p in pts])
        return SampledMap(domain, f.group, (xs, ys), vals.reshape((xs.size, ys.size) + vals.shape[1:]))
    if not isinstance(domain, (Interval, Circle)):
        raise InvalidArgumentError("sample_map supports intervals, circles and charts")
    if based.status == UNVERIFIED and isinstance(domain, Circle):
        raise AmbiguityError("sampling an unverified form on the circle depends on the sweep")
    grid = np.asarray(grid, dtype=float)
    m0 = float(complex(based.base_point).real)
    k = f.k.value
    out = np.empty((grid.size,) + np.shape(k), dtype=np.complex128)
    for side in (grid >= m0, grid < m0):
        pts = grid[side]
        if not pts.size:
            continue
        far = pts.max() if pts[0] >= m0 else pts.min()
        if far == m0:
            out[side] = k
            continue
        seg = Segment(m0, far)
        ts = (pts - m0) / (far - m0)
        g = evolve_at(f.group, pullback(based.form, seg), ts, steps=based.steps)
        out[side] = k + g if f.group.is_abelian else k @ g
    return SampledMap(domain, f.group, grid, out)


# ------------------------------------------------------------ pointwise exp/log


def pointwise_exp(xi, domain, group: GroupDescriptor, grid) -> SampledMap:
    """m -> exp(xi(m)) on a grid; ``xi`` is expression text, a MatrixExpr or a callable."""
    if isinstance(xi, str):
        var = ("t",) if isinstance(domain, (Interval, Circle)) else ("z",)
        xi = parse_expr(xi, var)

    def values(pts):
        pts = np.atleast_1d(pts)
        if isinstance(xi, MatrixExpr):
            name = next(iter(xi.variables()), "z")
            x = xi.evaluate(**{name: pts.real if name == "t" else pts})
            x = np.broadcast_to(x, (pts.size, group.n, group.n))
        else:
            x = np.asarray(xi(pts), dtype=np.complex128)
        if group.is_abelian:
            return np.diagonal(x, axis1=-2, axis2=-1)
        return linalg.mat_exp_batch(x)

    return SampledMap.from_function(domain, group, grid, values)


def pointwise_log_lift(f: SampledMap) -> np.ndarray:
    """Principal logarithms at every node; requires |f(m) - 1| < 1 everywhere."""
    if f.group.is_abelian:
        return f.values.copy()
    n = f.group.n
    flat = f.values.reshape(-1, n, n)
    dist = np.linalg.norm(flat - np.eye(n), axis=(-2, -1))
    if dist.max(initial=0.0) >= 1.0:
        i = int(np.argmax(dist))
        raise BranchCutError(f"sample {i} is at distance {dist[i]:.3g} >= 1 from the identity; no local logarithm")
    return np.array([linalg.mat_log_principal(g) for g in flat]).reshape(f.values.shape)
