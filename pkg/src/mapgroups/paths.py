"""Model domains, piecewise smooth paths and free generators of pi_1.

Points of every domain are encoded as complex numbers: the punctured plane
and the rectangular chart use x + iy, an interval uses real t, and the circle
uses its (real) angle coordinate, so circle paths live in the universal cover
and a full turn is the segment from theta to theta + 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mapgroups.errors import GeometryError, InvalidArgumentError, PrecisionError
from mapgroups.linalg import DEFAULT_TOL
from mapgroups.quadrature import adaptive_gl

# segments passing closer than this to a puncture get a detour arc
DETOUR_CLEARANCE = 1e-6


# --------------------------------------------------------------------- domains


@dataclass(frozen=True)
class Interval:
    a: float
    b: float
    base_point: float = None

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidArgumentError("interval needs a < b")
        if self.base_point is None:
            object.__setattr__(self, "base_point", float(self.a))
        if not self.contains(self.base_point):
            raise InvalidArgumentError("base point outside the interval")

    poles = ()
    dimension = 1
    simply_connected = True

    def contains(self, z) -> bool:
        z = complex(z)
        return abs(z.imag) == 0 and self.a - 1e-12 <= z.real <= self.b + 1e-12


@dataclass(frozen=True)
class Circle:
    """The unit circle, parametrized by angle."""

    base_point: float = 0.0

    poles = ()
    dimension = 1
    simply_connected = False

    def contains(self, z) -> bool:
        return complex(z).imag == 0


@dataclass(frozen=True)
class PuncturedPlane:
    punctures: tuple
    base_point: complex

    poles = property(lambda self: self.punctures)
    dimension = 2
    simply_connected = False

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.punctures)
        object.__setattr__(self, "punctures", pts)
        object.__setattr__(self, "base_point", complex(self.base_point))
        if len(set(pts)) != len(pts):
            raise InvalidArgumentError("punctures must be pairwise distinct")
        if self.base_point in pts:
            raise InvalidArgumentError("base point is a puncture")

    def contains(self, z) -> bool:
        return all(complex(z) != p for p in self.punctures)


@dataclass(frozen=True)
class PlaneChart:
    x0: float
    x1: float
    y0: float
    y1: float
    base_point: complex = None

    poles = ()
    dimension = 2
    simply_connected = True

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise InvalidArgumentError("degenerate rectangle")
        if self.base_point is None:
            object.__setattr__(self, "base_point", self.center)
        object.__setattr__(self, "base_point", complex(self.base_point))
        if not self.contains(self.base_point):
            raise InvalidArgumentError("base point outside the chart")

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def contains(self, z) -> bool:
        z = complex(z)
        eps = 1e-12 * max(1.0, abs(self.x1 - self.x0), abs(self.y1 - self.y0))
        return self.x0 - eps <= z.real <= self.x1 + eps and self.y0 - eps <= z.imag <= self.y1 + eps


# ----------------------------------------------------------------------- paths


class Path:
    """Piecewise smooth map [0, 1] -> C with closed-form velocity."""

    knots: tuple = ()

    def point(self, t):
        raise NotImplementedError

    def velocity(self, t):
        raise NotImplementedError

    def reversed(self) -> "Path":
        raise NotImplementedError

    @property
    def start(self) -> complex:
        return complex(self.point(np.array([0.0]))[0])

    @property
    def end(self) -> complex:
        return complex(self.point(np.array([1.0]))[0])

    def is_closed(self, tol: float = DEFAULT_TOL.eq_tol) -> bool:
        return abs(self.end - self.start) < tol

    def pieces(self):
        """Parameter intervals between knots."""
        b = (0.0,) + tuple(self.knots) + (1.0,)
        return list(zip(b[:-1], b[1:]))


@dataclass(frozen=True)
class Segment(Path):
    z0: complex
    z1: complex

    def __post_init__(self):
        object.__setattr__(self, "z0", complex(self.z0))
        object.__setattr__(self, "z1", complex(self.z1))

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.z0 + t * (self.z1 - self.z0)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        return np.full(t.shape, self.z1 - self.z0, dtype=np.complex128)

    def reversed(self):
        return Segment(self.z1, self.z0)


@dataclass(frozen=True)
class Arc(Path):
    """center + radius * exp(i theta), theta running linearly from theta0 to theta1."""

    center: complex
    radius: float
    theta0: float
    theta1: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.radius > 0:
            raise InvalidArgumentError("arc radius must be positive")

    def _theta(self, t):
        return self.theta0 + np.asarray(t, dtype=float) * (self.theta1 - self.theta0)

    def point(self, t):
        return self.center + self.radius * np.exp(1j * self._theta(t))

    def velocity(self, t):
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * self._theta(t))

    def reversed(self):
        return Arc(self.center, self.radius, self.theta1, self.theta0)


@dataclass(frozen=True)
class Concatenation(Path):
    """Pieces traversed in order, each on an equal share of [0, 1]."""

    parts: tuple
    knots: tuple = field(init=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise InvalidArgumentError("empty concatenation")
        for p, q in zip(parts[:-1], parts[1:]):
            if abs(p.end - q.start) >= DEFAULT_TOL.eq_tol:
                raise InvalidArgumentError(f"endpoint mismatch: {p.end} vs {q.start}")
        k = len(parts)
        knots = []
        for j, p in enumerate(parts):
            if j:
                knots.append(j / k)
            knots.extend((j + s) / k for s in p.knots)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "knots", tuple(sorted(knots)))

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        k = len(self.parts)
        idx = np.clip(np.floor(t * k).astype(int), 0, k - 1)
        return t, idx, t * k - idx

    def point(self, t):
        t, idx, local = self._locate(t)
        out = np.empty(t.shape, dtype=np.complex128)
        for j, p in enumerate(self.parts):
            m = idx == j
            if np.any(m):
                out[m] = p.point(local[m])
        return out

    def velocity(self, t):
        t, idx, local = self._locate(t)
        k = len(self.parts)
        out = np.empty(t.shape, dtype=np.complex128)
        for j, p in enumerate(self.parts):
            m = idx == j
            if np.any(m):
                out[m] = k * p.velocity(local[m])
        return out

    def reversed(self):
        return Concatenation(tuple(p.reversed() for p in reversed(self.parts)))


def concatenate(first: Path, second: Path) -> Path:
    """Traverse ``first`` on [0, 1/2], then ``second``."""
    if abs(first.end - second.start) >= DEFAULT_TOL.eq_tol:
        raise InvalidArgumentError(f"endpoint mismatch: {first.end} vs {second.start}")
    return Concatenation((first, second))


def reverse(path: Path) -> Path:
    return path.reversed()


def constant_path(z) -> Segment:
    return Segment(z, z)


def repeat(loop: Path, times: int) -> Path:
    """Loop traversed |times| times, backwards for negative counts."""
    if times == 0:
        return constant_path(loop.start)
    base = loop if times > 0 else loop.reversed()
    if abs(times) == 1:
        return base
    return Concatenation((base,) * abs(times))


def radial_path(domain, x, center=None) -> Segment:
    """Straight segment from the chart center (or ``center``) to x."""
    if not isinstance(domain, (Interval, PlaneChart)):
        raise InvalidArgumentError("radial paths need a convex chart (interval or rectangle)")
    if center is None:
        center = domain.base_point if isinstance(domain, Interval) else domain.center
    if not domain.contains(x):
        raise InvalidArgumentError(f"point {x} is outside the chart")
    return Segment(center, x)


# ----------------------------------------------------------- punctured plane


def _segment_detours(punctures, a: complex, b: complex, clearance: float):
    """Punctures the segment a->b passes within ``clearance`` of, ordered along it."""
    d = b - a
    hits = []
    if d == 0:
        return hits
    for p in punctures:
        s = ((p - a) * d.conjugate()).real / abs(d) ** 2
        if 0 < s < 1 and abs(a + s * d - p) < clearance:
            hits.append((s, p))
    return sorted(hits)


def avoiding_segment(domain: PuncturedPlane, a, b, clearance: float = DETOUR_CLEARANCE) -> Path:
    """Segment a->b with a counterclockwise half-detour around each puncture it nearly hits.

    Each detour is an arc of radius rho/2 about the puncture, where rho is half
    the distance from that puncture to the nearest other puncture or endpoint.
    """
    a, b = complex(a), complex(b)
    hits = _segment_detours(domain.punctures, a, b, clearance)
    if not hits:
        return Segment(a, b)
    u = (b - a) / abs(b - a)
    parts = []
    cursor = a
    for _, p in hits:
        others = [abs(p - q) for q in domain.punctures if q != p] + [abs(p - a), abs(p - b)]
        r = 0.5 * 0.5 * min(others)
        if r < 1e-12:
            raise GeometryError(f"no room to detour around puncture {p}")
        # entry/exit points on the circle |z - p| = r along the line direction
        s0 = ((p - a) * u.conjugate()).real
        foot = a + s0 * u
        off = math.sqrt(max(r * r - abs(foot - p) ** 2, 0.0))
        entry, exit_ = foot - off * u, foot + off * u
        th0 = math.atan2((entry - p).imag, (entry - p).real)
        th1 = math.atan2((exit_ - p).imag, (exit_ - p).real)
        sweep = (th1 - th0) % (2 * math.pi)
        if sweep == 0:
            sweep = 2 * math.pi
        if abs(entry - cursor) > 0:
            parts.append(Segment(cursor, entry))
        parts.append(Arc(p, r, th0, th0 + sweep))
        cursor = complex(p + r * np.exp(1j * (th0 + sweep)))
    parts.append(Segment(cursor, b))
    return Concatenation(tuple(parts))


def path_between(domain, a, b) -> Path:
    """Deterministic path used to evaluate maps: straight, with detours in punctured planes."""
    if isinstance(domain, PuncturedPlane):
        return avoiding_segment(domain, a, b)
    if isinstance(domain, Interval):
        if not (domain.contains(a) and domain.contains(b)):
            raise InvalidArgumentError("endpoint outside the interval")
        return Segment(complex(a).real, complex(b).real)
    if isinstance(domain, Circle):
        return Segment(complex(a).real, complex(b).real)
    if isinstance(domain, PlaneChart):
        if not (domain.contains(a) and domain.contains(b)):
            raise InvalidArgumentError("endpoint outside the chart")
        return Segment(a, b)
    raise InvalidArgumentError(f"unsupported domain {domain!r}")


@dataclass(frozen=True)
class LoopBasis:
    base_point: complex
    loops: tuple
    punctures: tuple = ()

    def __len__(self):
        return len(self.loops)

    def __iter__(self):
        return iter(self.loops)

    def __getitem__(self, j):
        return self.loops[j]


def canonical_loop_basis(domain: PuncturedPlane) -> LoopBasis:
    """Lasso loops: out to a small circle around p_j, once counterclockwise, back."""
    if not isinstance(domain, PuncturedPlane):
        raise InvalidArgumentError("canonical loop bases are defined for punctured planes")
    m0 = domain.base_point
    pts = domain.punctures
    if not pts:
        raise InvalidArgumentError("need at least one puncture")
    if m0 in pts:
        raise InvalidArgumentError("base point is a puncture")
    loops = []
    for j, p in enumerate(pts):
        dists = [abs(p - q) for q in pts if q != p] + [abs(p - m0)]
        rho = 0.5 * min(dists)
        if rho < 1e-12:
            raise GeometryError(f"puncture {p} is too close to its neighbours")
        u = (m0 - p) / abs(m0 - p)
        touch = p + rho * u
        theta = math.atan2(u.imag, u.real)
        out = avoiding_segment(domain, m0, touch)
        circle = Arc(p, rho, theta, theta + 2 * math.pi)
        loops.append(Concatenation((out, circle, out.reversed())))
    basis = LoopBasis(m0, tuple(loops), pts)
    w = winding_matrix(basis, pts)
    if not np.array_equal(w, np.eye(len(pts), dtype=int)):
        raise GeometryError(f"loop basis winding matrix is not the identity:\n{w}")
    return basis


def circle_loop(domain: Circle) -> LoopBasis:
    th = float(domain.base_point)
    return LoopBasis(th, (Segment(th, th + 2 * math.pi),))


def closes_in(domain, path: Path, tol: float = DEFAULT_TOL.eq_tol) -> bool:
    """Closed as a loop in the domain; circle paths may end a whole number of turns away."""
    gap = path.end - path.start
    if isinstance(domain, Circle):
        turns = gap.real / (2 * math.pi)
        return abs(gap.imag) < tol and abs(turns - round(turns)) * 2 * math.pi < tol
    return abs(gap) < tol


def same_point(domain, a, b, tol: float = DEFAULT_TOL.eq_tol) -> bool:
    gap = complex(b) - complex(a)
    if isinstance(domain, Circle):
        turns = gap.real / (2 * math.pi)
        return abs(gap.imag) < tol and abs(turns - round(turns)) * 2 * math.pi < tol
    return abs(gap) < tol


def loop_basis(domain) -> LoopBasis:
    if isinstance(domain, PuncturedPlane):
        return canonical_loop_basis(domain)
    if isinstance(domain, Circle):
        return circle_loop(domain)
    return LoopBasis(domain.base_point, ())


def contour_integral(f, path: Path, tol: float = 1e-12):
    """Integral of f(z) dz along ``path``, piece by piece with adaptive Gauss-Legendre."""
    def integrand(t):
        return f(path.point(t)) * path.velocity(t)

    return sum(adaptive_gl(integrand, lo, hi, tol) for lo, hi in path.pieces())


def winding_number(path: Path, p) -> int:
    p = complex(p)
    if not path.is_closed():
        raise InvalidArgumentError("winding numbers need a closed path")
    try:
        value = contour_integral(lambda z: 1.0 / (z - p), path) / (2j * math.pi)
    except (ZeroDivisionError, ArithmeticError) as exc:
        raise InvalidArgumentError(f"point {p} lies on the path") from exc
    k = round(value.real)
    if abs(value - k) > 0.25:
        raise PrecisionError(f"winding integral {value} is not close to an integer")
    return int(k)


def winding_matrix(basis: LoopBasis, points) -> np.ndarray:
    """Entry (i, j) is the winding of loop i about point j."""
    return np.array([[winding_number(loop, p) for p in points] for loop in basis.loops], dtype=int)
