"""Dense complex matrix primitives: exponential, principal logarithm, Ad, bracket.

Matrices are plain ``numpy`` complex arrays of shape ``(n, n)``. Equality is
always Frobenius distance below a tolerance; see :class:`Tolerances`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mapgroups._backend import kernels
from mapgroups.errors import BranchCutError, InvalidArgumentError


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds.

    eq_tol:
        Frobenius distance below which two matrices count as equal.
    exp_log_tol:
        Truncation target for the series used by exp/log.
    """

    eq_tol: float = 1e-9
    exp_log_tol: float = 1e-13

    def __post_init__(self):
        if not (self.eq_tol > 0 and self.exp_log_tol > 0):
            raise InvalidArgumentError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerances()

# a spectrum point counts as lying on the negative real axis within this relative slack
_CUT_SLACK = 1e-7


def as_matrix(x, name="matrix") -> np.ndarray:
    """Validate and convert to a finite square complex128 array."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return a


def norm(x) -> float:
    return float(np.linalg.norm(x))


def distance(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def allclose(a, b, tol: Tolerances = DEFAULT_TOL) -> bool:
    return distance(a, b) < tol.eq_tol


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def mat_exp(x) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a [6/6] Padé approximant."""
    return kernels.expm(as_matrix(x))


def mat_exp_batch(stack) -> np.ndarray:
    stack = np.asarray(stack, dtype=np.complex128)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise InvalidArgumentError(f"expected a stack of square matrices, got shape {stack.shape}")
    if not np.isfinite(stack).all():
        raise InvalidArgumentError("stack has non-finite entries")
    return kernels.expm_batch(stack)


def bracket(x, y) -> np.ndarray:
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape != y.shape:
        raise InvalidArgumentError(f"dimension mismatch {x.shape} vs {y.shape}")
    return x @ y - y @ x


def _checked_inverse(g, name="g") -> np.ndarray:
    g = as_matrix(g, name)
    scale = max(norm(g), 1.0)
    try:
        inv = np.linalg.inv(g)
    except np.linalg.LinAlgError:
        raise InvalidArgumentError(f"{name} is singular") from None
    if not np.isfinite(inv).all() or np.linalg.cond(g) > 1e14 * scale:
        raise InvalidArgumentError(f"{name} is numerically singular")
    return inv


def inverse(g) -> np.ndarray:
    return _checked_inverse(g)


def ad_conjugate(g, x) -> np.ndarray:
    """Ad(g)x = g x g^{-1}."""
    ginv = _checked_inverse(g)
    x = as_matrix(x, "x")
    if x.shape != ginv.shape:
        raise InvalidArgumentError(f"dimension mismatch {g.shape} vs {x.shape}")
    return np.asarray(g, dtype=np.complex128) @ x @ ginv


def char_poly(a) -> np.ndarray:
    """Characteristic polynomial coefficients (highest degree first), Faddeev-LeVerrier."""
    a = as_matrix(a)
    n = a.shape[0]
    coeffs = np.zeros(n + 1, dtype=np.complex128)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    ident = identity(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * ident
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


def eigenvalues(a) -> np.ndarray:
    """Eigenvalues; n <= 4 through the characteristic polynomial with Newton polishing."""
    a = as_matrix(a)
    n = a.shape[0]
    if n > 4:
        return np.linalg.eigvals(a)
    if n == 1:
        return a[0].copy()
    coeffs = char_poly(a)
    roots = np.roots(coeffs).astype(np.complex128)
    dcoeffs = np.polyder(coeffs)
    for _ in range(3):
        p = np.polyval(coeffs, roots)
        dp = np.polyval(dcoeffs, roots)
        ok = np.abs(dp) > 1e-8 * max(1.0, float(np.abs(coeffs).max()))
        roots = np.where(ok, roots - p / np.where(ok, dp, 1.0), roots)
    return roots


def on_branch_cut(lam, slack: float = _CUT_SLACK) -> bool:
    lam = complex(lam)
    return lam.real < 0 and abs(lam.imag) <= slack * max(1.0, abs(lam))


def sqrtm_db(a, max_iter: int = 100) -> np.ndarray:
    """Principal square root by the Denman-Beavers iteration."""
    y = as_matrix(a).copy()
    z = identity(y.shape[0])
    for _ in range(max_iter):
        y_inv = np.linalg.inv(y)
        z_inv = np.linalg.inv(z)
        y_next = 0.5 * (y + z_inv)
        z = 0.5 * (z + y_inv)
        done = norm(y_next - y) <= 1e-15 * max(norm(y_next), 1.0)
        y = y_next
        if done:
            break
    return y


def _mercator(y, tol: float) -> np.ndarray:
    """log(I + y) = y - y^2/2 + y^3/3 - ... for small ||y||."""
    total = np.zeros_like(y)
    power = identity(y.shape[0])
    for k in range(1, 200):
        power = power @ y
        term = power / k
        total = total + term if k % 2 else total - term
        if norm(term) <= tol * max(norm(total), 1e-300) or norm(power) == 0:
            break
    return total


def mat_log_principal(g, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Principal logarithm by inverse scaling and squaring.

    Raises BranchCutError when an eigenvalue sits on the closed negative real
    axis, InvalidArgumentError when ``g`` is singular.
    """
    g = as_matrix(g, "g")
    n = g.shape[0]
    lams = eigenvalues(g)
    scale = max(norm(g), 1e-300)
    if np.any(np.abs(lams) <= 1e-14 * scale):
        raise InvalidArgumentError("g is singular")
    for lam in lams:
        if on_branch_cut(lam):
            raise BranchCutError(f"eigenvalue {complex(lam):.6g} lies on the principal branch cut")
    x = g
    k = 0
    ident = identity(n)
    while norm(x - ident) > 0.25:
        x = sqrtm_db(x)
        k += 1
        if k > 64:
            raise BranchCutError("square-root iteration did not approach the identity")
    return (2.0**k) * _mercator(x - ident, tol.exp_log_tol)


def log_any_branch(g, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Some logarithm of an invertible complex matrix.

    When the spectrum meets the negative real axis the matrix is first rotated
    by a scalar phase e^{-i theta} chosen to clear the cut, then i theta is added
    back (scalars commute with everything).
    """
    g = as_matrix(g, "g")
    lams = eigenvalues(g)
    if not any(on_branch_cut(lam, 1e-6) for lam in lams):
        return mat_log_principal(g, tol)
    args = np.sort(np.angle(lams))
    # rotate by the middle of the widest angular gap between eigenvalue arguments
    gaps = np.diff(np.concatenate([args, [args[0] + 2 * np.pi]]))
    j = int(np.argmax(gaps))
    mid = args[j] + gaps[j] / 2
    theta = mid - np.pi
    rotated = np.exp(-1j * theta) * g
    return mat_log_principal(rotated, tol) + 1j * theta * identity(g.shape[0])


def log_near_identity(stack, tol: float = 1e-16) -> np.ndarray:
    """Batched log(I + Y) by the Mercator series; needs |Y|_F < 0.5 for every matrix."""
    stack = np.asarray(stack, dtype=np.complex128)
    n = stack.shape[-1]
    y = stack - np.eye(n)
    radius = np.linalg.norm(y, axis=(-2, -1)).max(initial=0.0)
    if radius >= 0.5:
        raise InvalidArgumentError(f"matrices too far from the identity for the series (|X - I| = {radius:.3g})")
    total = np.zeros_like(y)
    power = np.broadcast_to(np.eye(n, dtype=np.complex128), y.shape).copy()
    for k in range(1, 200):
        power = power @ y
        total = total + power / k if k % 2 else total - power / k
        if radius**k / k <= tol:
            break
    return total
