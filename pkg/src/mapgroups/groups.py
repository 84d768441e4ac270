"""Concrete target groups: GL_n, SL_n and abelian quotients k / Gamma.

Matrix groups carry ``(n, n)`` payloads. An abelian quotient of complex
dimension ``d`` carries a length-``d`` vector reduced into the fundamental
domain of its lattice; its Lie algebra elements are handled as diagonal
``(d, d)`` matrices wherever the matrix machinery is shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mapgroups import linalg
from mapgroups.errors import InvalidArgumentError, UnsupportedClassificationError
from mapgroups.linalg import DEFAULT_TOL, Tolerances

# coordinates this close below an integer are snapped up by quotient_reduce
_SNAP = 1e-9


def _realify(v) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=np.complex128))
    return np.concatenate([v.real, v.imag], axis=-1)


def _complexify(r) -> np.ndarray:
    d = r.shape[-1] // 2
    return r[..., :d] + 1j * r[..., d:]


@dataclass(frozen=True)
class Lattice:
    """Discrete subgroup of C^d spanned over Z by real-independent generators."""

    dim: int
    generators: tuple = ()
    _basis: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError("lattice dimension must be >= 1")
        gens = tuple(tuple(complex(c) for c in np.atleast_1d(g)) for g in self.generators)
        for g in gens:
            if len(g) != self.dim:
                raise InvalidArgumentError(f"generator {g} does not have dimension {self.dim}")
        basis = np.array([_realify(g) for g in gens]).T if gens else np.zeros((2 * self.dim, 0))
        if gens and np.linalg.matrix_rank(basis, tol=1e-12 * max(1.0, np.abs(basis).max())) < len(gens):
            raise InvalidArgumentError("lattice generators are not linearly independent over R")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "_basis", basis)

    @classmethod
    def trivial(cls, dim: int = 1) -> "Lattice":
        return cls(dim, ())

    @property
    def rank(self) -> int:
        return len(self.generators)

    def coordinates(self, v) -> np.ndarray:
        """Real coordinates of v along the generators (orthogonal complement dropped)."""
        if self.rank == 0:
            return np.zeros(0)
        coords, *_ = np.linalg.lstsq(self._basis, _realify(v), rcond=None)
        return coords

    def point(self, coords) -> np.ndarray:
        if self.rank == 0:
            return np.zeros(self.dim, dtype=np.complex128)
        return _complexify(self._basis @ np.asarray(coords, dtype=float))

    def nearest(self, v):
        """Nearest-lattice-point coordinates (ties half-up) and the residual coordinates."""
        c = self.coordinates(v)
        k = np.floor(c + 0.5)
        return k.astype(np.int64), c - k

    def contains(self, v, tol: float = 1e-7) -> bool:
        """Membership in generator coordinates; the complement part must vanish too."""
        v = np.atleast_1d(np.asarray(v, dtype=np.complex128))
        k, resid = self.nearest(v)
        off_span = np.linalg.norm(v - self.point(k) - self.point(resid))
        return bool(np.all(np.abs(resid) <= tol) and off_span <= tol * max(1.0, np.linalg.norm(v)))


def quotient_reduce(lattice: Lattice, v) -> np.ndarray:
    """Canonical representative of v + Gamma.

    Generator coordinates are reduced into [0, 1) (values within 1e-9 below an
    integer snap up, so lattice points land on 0).
    """
    v = np.atleast_1d(np.asarray(v, dtype=np.complex128))
    if v.shape != (lattice.dim,):
        raise InvalidArgumentError(f"vector of shape {v.shape} does not match lattice dimension {lattice.dim}")
    if lattice.rank == 0:
        return v.copy()
    c = lattice.coordinates(v)
    return v - lattice.point(np.floor(c + _SNAP))


class GroupDescriptor:
    """Common interface of the catalog."""

    n: int
    is_abelian = False

    @property
    def size(self) -> int:
        return self.n

    def identity(self) -> "GroupElement":
        return GroupElement(self, linalg.identity(self.n))

    def check_algebra(self, x, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        x = linalg.as_matrix(x, "algebra element")
        if x.shape != (self.n, self.n):
            raise InvalidArgumentError(f"algebra element has shape {x.shape}, expected {(self.n, self.n)}")
        return x

    def check_member(self, g, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        g = linalg.as_matrix(g, "group element")
        if g.shape != (self.n, self.n):
            raise InvalidArgumentError(f"group element has shape {g.shape}, expected {(self.n, self.n)}")
        det = np.linalg.det(g)
        if abs(det) <= 1e-14 * max(1.0, linalg.norm(g)) ** self.n:
            raise InvalidArgumentError("group element is singular")
        return g


@dataclass(frozen=True)
class GeneralLinear(GroupDescriptor):
    n: int
    field: str = "complex"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError("n must be >= 1")
        if self.field not in ("real", "complex"):
            raise InvalidArgumentError(f"unknown field {self.field!r}")

    def _check_real(self, x, tol, what):
        if self.field == "real" and np.abs(x.imag).max() > tol.eq_tol:
            raise InvalidArgumentError(f"{what} is not real")

    def check_algebra(self, x, tol: Tolerances = DEFAULT_TOL):
        x = super().check_algebra(x, tol)
        self._check_real(x, tol, "algebra element")
        return x

    def check_member(self, g, tol: Tolerances = DEFAULT_TOL):
        g = super().check_member(g, tol)
        self._check_real(g, tol, "group element")
        return g

    def __str__(self):
        return f"GL_{self.n}({'C' if self.field == 'complex' else 'R'})"


@dataclass(frozen=True)
class SpecialLinear(GroupDescriptor):
    n: int
    field: str = "complex"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError("n must be >= 1")
        if self.field != "complex":
            raise InvalidArgumentError("only SL_n(C) is in the catalog")

    def check_algebra(self, x, tol: Tolerances = DEFAULT_TOL):
        x = super().check_algebra(x, tol)
        if abs(np.trace(x)) > tol.eq_tol * max(1.0, linalg.norm(x)):
            raise InvalidArgumentError("algebra element of sl_n must be trace free")
        return x

    def check_member(self, g, tol: Tolerances = DEFAULT_TOL):
        g = super().check_member(g, tol)
        # relative slack: large elements carry proportionally larger rounding in det
        if abs(np.linalg.det(g) - 1) > tol.eq_tol * max(1.0, linalg.norm(g)) ** self.n:
            raise InvalidArgumentError("determinant of an SL_n element must be 1")
        return g

    def __str__(self):
        return f"SL_{self.n}(C)"


@dataclass(frozen=True)
class AbelianQuotient(GroupDescriptor):
    """K = C^d / Gamma; Gamma may be trivial (then K is the vector group C^d)."""

    dim: int
    lattice: Lattice = None
    is_abelian = True

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError("dim must be >= 1")
        if self.lattice is None:
            object.__setattr__(self, "lattice", Lattice.trivial(self.dim))
        if self.lattice.dim != self.dim:
            raise InvalidArgumentError("lattice dimension does not match group dimension")

    @property
    def n(self):
        return self.dim

    def identity(self) -> "GroupElement":
        return GroupElement(self, np.zeros(self.dim, dtype=np.complex128))

    def vector_of(self, x, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        """Algebra vector from a diagonal (d, d) matrix or a length-d vector."""
        x = np.asarray(x, dtype=np.complex128)
        if x.shape == (self.dim,):
            return x.copy()
        x = super().check_algebra(x, tol)
        off = x - np.diag(np.diag(x))
        if linalg.norm(off) > tol.eq_tol * max(1.0, linalg.norm(x)):
            raise InvalidArgumentError("abelian algebra elements must be diagonal")
        return np.diag(x).copy()

    def check_algebra(self, x, tol: Tolerances = DEFAULT_TOL):
        return np.diag(self.vector_of(x, tol))

    def check_member(self, g, tol: Tolerances = DEFAULT_TOL):
        g = np.atleast_1d(np.asarray(g, dtype=np.complex128))
        if g.shape != (self.dim,) or not np.isfinite(g).all():
            raise InvalidArgumentError(f"abelian element must be a finite vector of length {self.dim}")
        return quotient_reduce(self.lattice, g)

    def __str__(self):
        return f"C^{self.dim}/Gamma(rank {self.lattice.rank})"


def exp_lattice_group(dim: int = 1) -> AbelianQuotient:
    """C^x (and its powers) as C / 2 pi i Z through the exponential parametrization."""
    gens = [tuple(2j * math.pi if i == j else 0 for i in range(dim)) for j in range(dim)]
    return AbelianQuotient(dim, Lattice(dim, tuple(gens)))


@dataclass(frozen=True, eq=False)
class GroupElement:
    group: GroupDescriptor
    value: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", self.group.check_member(self.value))

    @property
    def matrix(self) -> np.ndarray:
        if self.group.is_abelian:
            return np.diag(self.value)
        return self.value

    def __mul__(self, other):
        return group_multiply(self, other)

    def inverse(self) -> "GroupElement":
        if self.group.is_abelian:
            return GroupElement(self.group, -self.value)
        return GroupElement(self.group, linalg.inverse(self.value))

    def distance_to_identity(self) -> float:
        if self.group.is_abelian:
            k, _ = self.group.lattice.nearest(self.value)
            return float(np.linalg.norm(self.value - self.group.lattice.point(k)))
        return linalg.distance(self.value, np.eye(self.group.n))

    def close_to(self, other: "GroupElement", tol: float) -> bool:
        return (self * other.inverse()).distance_to_identity() < tol

    def __repr__(self):
        return f"GroupElement({self.group}, {np.array2string(self.value, precision=6)})"


def group_multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.group != b.group:
        raise InvalidArgumentError(f"cannot multiply elements of {a.group} and {b.group}")
    if a.group.is_abelian:
        return GroupElement(a.group, a.value + b.value)
    return GroupElement(a.group, a.value @ b.value)


def exp_to_group(group: GroupDescriptor, x, tol: Tolerances = DEFAULT_TOL) -> GroupElement:
    if group.is_abelian:
        return GroupElement(group, group.vector_of(x, tol))
    x = group.check_algebra(x, tol)
    return GroupElement(group, linalg.mat_exp(x))


def _sinhc_inverse(mu: complex) -> complex:
    """mu / sinh(mu), continuous at 0."""
    if abs(mu) < 1e-4:
        return 1.0 - mu * mu / 6.0
    return mu / np.sinh(mu)


def _sl2_log(g: np.ndarray, tol: Tolerances):
    """Trace-free log of an SL_2(C) element, or None when none exists.

    For x in sl_2 with det x = -mu^2 one has exp(x) = cosh(mu) I + sinh(mu)/mu x,
    so tr g = 2 cosh mu fixes mu and x = mu/sinh(mu) (g - cosh(mu) I). This
    fails only when sinh(mu) = 0 with mu != 0, i.e. tr g = -2, where the only
    exponentials are -I.
    """
    ident = np.eye(2)
    tr = np.trace(g)
    if abs(tr + 2) <= tol.eq_tol * max(1.0, linalg.norm(g)):
        if linalg.distance(g, -ident) <= tol.eq_tol * max(1.0, linalg.norm(g)):
            return np.diag([1j * np.pi, -1j * np.pi])
        return None
    mu = np.arccosh(complex(tr) / 2)
    x = _sinhc_inverse(mu) * (g - np.cosh(mu) * ident)
    return x - np.trace(x) / 2 * ident


def is_in_exp_image(group: GroupDescriptor, g, tol: Tolerances = DEFAULT_TOL):
    """Decide g in exp(k). Returns ``(verdict, witness)``; witness is None when false."""
    if isinstance(g, GroupElement):
        if g.group != group:
            raise InvalidArgumentError("element belongs to a different group")
        g = g.value
    g = group.check_member(g, tol)
    if group.is_abelian:
        return True, np.diag(g)
    if isinstance(group, GeneralLinear):
        if group.field == "real":
            raise UnsupportedClassificationError("exp-image membership is not classified for GL_n(R)")
        return True, linalg.log_any_branch(g, tol)
    if isinstance(group, SpecialLinear):
        if group.n == 1:
            return True, np.zeros((1, 1), dtype=np.complex128)
        if group.n != 2:
            raise UnsupportedClassificationError("exp-image membership is classified for SL_2(C) only")
        x = _sl2_log(g, tol)
        if x is None:
            return False, None
        return True, x
    raise UnsupportedClassificationError(f"no classification for {group}")
