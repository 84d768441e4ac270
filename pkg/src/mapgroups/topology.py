"""Periods of forms around loops, integrability, sections and component classes.

Words in the generators are read left to right, and the leftmost letter is
traversed first. Transport is multiplicative along concatenations, so the
period of a word is the product of the generator periods in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mapgroups import linalg
from mapgroups.calculus import DEFAULT_PERIOD_TOL, gauge_action
from mapgroups.errors import InvalidArgumentError, PrecisionError
from mapgroups.evolution import DEFAULT_STEPS, transport
from mapgroups.forms import OneForm, ScalarTimes, SumForm, ZeroForm, behnke_stein_basis, line_integral
from mapgroups.groups import AbelianQuotient, GroupDescriptor, GroupElement, Lattice
from mapgroups.paths import Concatenation, LoopBasis, Path, closes_in, loop_basis, repeat, same_point

# lattice coordinates farther than this from an integer cannot be rounded to a class
ROUNDING_MARGIN = 0.25
LATTICE_TOL = 1e-7


@dataclass(frozen=True)
class PeriodMap:
    """Periods of one form around the generators of a loop basis."""

    group: GroupDescriptor
    basis: LoopBasis
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.basis):
            raise InvalidArgumentError("one period per basis loop is required")

    def distances(self) -> list:
        return [g.distance_to_identity() for g in self.values]

    def is_integrable(self, period_tol: float = DEFAULT_PERIOD_TOL) -> bool:
        return all(d < period_tol for d in self.distances())


def period(alpha: OneForm, loop: Path, steps: int = DEFAULT_STEPS) -> GroupElement:
    """Transport of ``alpha`` around a closed loop based at the base point."""
    if not closes_in(alpha.domain, loop):
        raise InvalidArgumentError("periods need closed loops")
    base = complex(alpha.domain.base_point)
    if not same_point(alpha.domain, loop.start, base):
        raise InvalidArgumentError(f"loop starts at {loop.start}, not at the base point {base}")
    return transport(alpha.group, alpha, loop, steps=steps)


def period_vector(alpha: OneForm, basis: LoopBasis | None = None, steps: int = DEFAULT_STEPS) -> PeriodMap:
    """The periods around every generator of the loop basis."""
    if basis is None:
        basis = loop_basis(alpha.domain)
    return PeriodMap(alpha.group, basis, tuple(period(alpha, loop, steps) for loop in basis))


def word_loop(basis: LoopBasis, word) -> Path:
    """Concatenate generator powers; ``word`` is a list of (generator index, exponent)."""
    parts = []
    for j, e in word:
        if not 0 <= j < len(basis):
            raise InvalidArgumentError(f"no generator {j}")
        if e:
            parts.append(repeat(basis[j], int(e)))
    if not parts:
        return repeat(basis[0], 0) if len(basis) else None
    return parts[0] if len(parts) == 1 else Concatenation(tuple(parts))


def homomorphism_check(alpha: OneForm, basis: LoopBasis, word, steps: int = DEFAULT_STEPS) -> float:
    """|period(word loop) - product of generator periods|_F.

    The word loop is integrated with ``steps`` per traversed generator so both
    sides are resolved alike.
    """
    letters = max(1, sum(abs(int(e)) for _, e in word))
    direct = period(alpha, word_loop(basis, word), steps * letters)
    group = alpha.group
    product = group.identity()
    for j, e in word:
        p = period(alpha, basis[j], steps)
        factor = p if e >= 0 else p.inverse()
        for _ in range(abs(int(e))):
            product = product * factor
    if group.is_abelian:
        return (direct * product.inverse()).distance_to_identity()
    return linalg.distance(direct.value, product.value)


# ------------------------------------------------------------------- sections


def bs_section(xs, domain, group: GroupDescriptor) -> OneForm:
    """sum_j beta_j x_j for the Behnke-Stein forms of the punctured plane."""
    betas = behnke_stein_basis(domain)
    if len(xs) != len(betas):
        raise InvalidArgumentError(f"need one algebra element per puncture ({len(betas)})")
    form = ZeroForm(domain, group)
    for beta, x in zip(betas, xs):
        form = SumForm(form, ScalarTimes(beta, np.asarray(x, dtype=np.complex128), group))
    return form


def dressed_section(f, xs) -> OneForm:
    """delta(f) + Ad(f)^{-1} sigma(x) for a map f given by its logarithmic derivative."""
    return gauge_action(bs_section(xs, f.domain, f.group), f)


def period_tangent(domain, group: GroupDescriptor, xs, eps: float = 1e-4, steps: int = DEFAULT_STEPS) -> list:
    """Central difference of the period map at 0 in the direction sigma(x), per generator."""
    plus = period_vector(bs_section([eps * np.asarray(x) for x in xs], domain, group), steps=steps)
    minus = period_vector(bs_section([-eps * np.asarray(x) for x in xs], domain, group), steps=steps)
    out = []
    for gp, gm in zip(plus.values, minus.values):
        out.append((gp.matrix - gm.matrix) / (2 * eps))
    return out


# -------------------------------------------------------------- abelian case


def abelian_integral(alpha: OneForm, loop: Path, tol: float = 1e-12) -> np.ndarray:
    """The plain integral of an abelian (diagonal valued) form along a path, as a vector."""
    if not alpha.group.is_abelian:
        raise InvalidArgumentError("abelian integrals need an abelian target")
    return np.diagonal(line_integral(alpha, loop, tol)).copy()


def abelian_period(alpha: OneForm, loop: Path, lattice: Lattice) -> GroupElement:
    """Class of the loop integral in C^d modulo the lattice."""
    group = AbelianQuotient(alpha.group.n, lattice)
    return GroupElement(group, abelian_integral(alpha, loop))


def lattice_integrable(alpha: OneForm, lattice: Lattice, basis: LoopBasis | None = None) -> bool:
    """True when every basis integral lies in the lattice (within LATTICE_TOL in coordinates)."""
    basis = loop_basis(alpha.domain) if basis is None else basis
    for loop in basis:
        v = abelian_integral(alpha, loop)
        if lattice.rank == 0:
            if np.linalg.norm(v) > LATTICE_TOL:
                return False
            continue
        c = lattice.coordinates(v)
        resid = np.linalg.norm(v - lattice.point(c))
        if resid > LATTICE_TOL * max(1.0, np.linalg.norm(v)) or np.abs(c - np.round(c)).max() > LATTICE_TOL:
            return False
    return True


@dataclass(frozen=True)
class ComponentClass:
    """Lattice coordinates of the periods, one integer tuple per generator."""

    coords: tuple

    def __add__(self, other: "ComponentClass") -> "ComponentClass":
        if len(self.coords) != len(other.coords):
            raise InvalidArgumentError("classes over different loop bases")
        return ComponentClass(tuple(tuple(a + b for a, b in zip(u, v)) for u, v in zip(self.coords, other.coords)))

    def is_trivial(self) -> bool:
        return all(c == 0 for u in self.coords for c in u)

    def __str__(self):
        return "; ".join("(" + ",".join(str(c) for c in u) + ")" for u in self.coords)


def same_component(a: ComponentClass, b: ComponentClass) -> bool:
    return a.coords == b.coords


def component_class(alpha: OneForm, group: AbelianQuotient, basis: LoopBasis | None = None) -> ComponentClass:
    """Per generator, the lattice element carried by the loop integral of ``alpha``."""
    if not group.is_abelian:
        raise InvalidArgumentError("component classes are computed for abelian quotients")
    if group.lattice.rank == 0:
        raise InvalidArgumentError("a vector group is connected; use a group with a lattice")
    basis = loop_basis(alpha.domain) if basis is None else basis
    out = []
    for j, loop in enumerate(basis):
        v = abelian_integral(alpha, loop)
        c = group.lattice.coordinates(v)
        resid = np.linalg.norm(v - group.lattice.point(c))
        if resid > LATTICE_TOL * max(1.0, np.linalg.norm(v)):
            raise PrecisionError(f"period around generator {j} is not in the span of the lattice")
        r = np.round(c.real)
        off = float(np.abs(c - r).max(initial=0.0))
        if off > ROUNDING_MARGIN:
            raise PrecisionError(f"period around generator {j} has coordinates {c}, too far from an integer")
        out.append(tuple(int(x) for x in r))
    return ComponentClass(tuple(out))
