"""Pure numpy kernels.

Reference implementation of the hot loops; ``mapgroups._ckernels`` exposes the
same three functions with the same semantics.
"""

from math import factorial, sqrt

import numpy as np

PADE_ORDER = 6
# diagonal Padé coefficients c_k = (2m-k)! m! / ((2m)! k! (m-k)!)
PADE_COEFFS = tuple(
    factorial(2 * PADE_ORDER - k)
    * factorial(PADE_ORDER)
    / (factorial(2 * PADE_ORDER) * factorial(k) * factorial(PADE_ORDER - k))
    for k in range(PADE_ORDER + 1)
)
SCALED_NORM = 0.5
MAGNUS_COMM = sqrt(3.0) / 12.0


def scaling_exponent(norm):
    """Smallest s >= 0 with norm / 2**s < SCALED_NORM."""
    s = 0
    while norm / (1 << s) >= SCALED_NORM:
        s += 1
    return s


def expm(a):
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[0]
    norm = np.linalg.norm(a)
    if not np.isfinite(norm):
        return np.full((n, n), np.nan, dtype=np.complex128)
    s = scaling_exponent(norm)
    x = a / (1 << s)
    c = PADE_COEFFS
    ident = np.eye(n, dtype=np.complex128)
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x4 @ x2
    u = x @ (c[1] * ident + c[3] * x2 + c[5] * x4)
    v = c[0] * ident + c[2] * x2 + c[4] * x4 + c[6] * x6
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def expm_batch(stack):
    stack = np.asarray(stack, dtype=np.complex128)
    out = np.empty_like(stack)
    for k in range(stack.shape[0]):
        out[k] = expm(stack[k])
    return out


def magnus4(xi1, xi2, h, dense=False):
    """Product of fourth-order Magnus steps for g' = g xi.

    ``xi1``/``xi2`` hold the integrand at the two Gauss nodes of each step.
    Returns ``(result, bad)``; ``result`` is the final matrix, or all partial
    products (first one the identity) when ``dense``. ``bad`` is the index of
    the first step producing non-finite entries, -1 otherwise.
    """
    xi1 = np.asarray(xi1, dtype=np.complex128)
    xi2 = np.asarray(xi2, dtype=np.complex128)
    h = np.asarray(h, dtype=np.float64)
    steps, n = xi1.shape[0], xi1.shape[1]
    g = np.eye(n, dtype=np.complex128)
    if dense:
        out = np.empty((steps + 1, n, n), dtype=np.complex128)
        out[0] = g
    # overflow is reported through ``bad``, so floating-point warnings are muted
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(steps):
            a, b = xi1[j], xi2[j]
            omega = 0.5 * h[j] * (a + b) + MAGNUS_COMM * h[j] * h[j] * (a @ b - b @ a)
            g = g @ expm(omega)
            if not np.isfinite(g).all():
                return (out if dense else g), j
            if dense:
                out[j + 1] = g
    return (out if dense else g), -1
