"""Gauss-Legendre rules: composite (fixed panels) and adaptive bisection.

Integrands are vectorized: ``f(t)`` takes a 1-D array of nodes and returns an
array whose first axis runs over the nodes.
"""

import numpy as np

from mapgroups.errors import EvaluationError

GL5_NODES, GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


def composite_gl(f, breakpoints):
    """Sum of 5-point Gauss-Legendre rules over consecutive breakpoint panels."""
    t = np.asarray(breakpoints, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two breakpoints")
    mid = 0.5 * (t[1:] + t[:-1])
    half = 0.5 * (t[1:] - t[:-1])
    nodes = (mid[:, None] + half[:, None] * GL5_NODES[None, :]).ravel()
    weights = (half[:, None] * GL5_WEIGHTS[None, :]).ravel()
    vals = np.asarray(f(nodes))
    return np.tensordot(weights, vals, axes=(0, 0))


def composite_gl_cumulative(f, breakpoints):
    """Running integrals at every breakpoint (first entry zero)."""
    t = np.asarray(breakpoints, dtype=float)
    mid = 0.5 * (t[1:] + t[:-1])
    half = 0.5 * (t[1:] - t[:-1])
    nodes = (mid[:, None] + half[:, None] * GL5_NODES[None, :]).ravel()
    vals = np.asarray(f(nodes))
    vals = vals.reshape((t.size - 1, 5) + vals.shape[1:])
    panel = np.tensordot(GL5_WEIGHTS, vals, axes=(0, 1)) * half.reshape((-1,) + (1,) * (vals.ndim - 2))
    out = np.zeros((t.size,) + panel.shape[1:], dtype=panel.dtype)
    out[1:] = np.cumsum(panel, axis=0)
    return out


def _gl(f, a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    vals = np.asarray(f(mid + half * GL5_NODES))
    return half * np.tensordot(GL5_WEIGHTS, vals, axes=(0, 0))


def adaptive_gl(f, a, b, tol=1e-13, max_panels=20000):
    """Adaptive bisection on 5-point rules until each panel agrees with its halves.

    The acceptance test on a panel is absolute against ``tol`` scaled by the
    panel's share of the interval, so the total error is about ``tol``.
    """
    total = 0.0
    stack = [(a, b, _gl(f, a, b))]
    length = b - a
    panels = 0
    while stack:
        lo, hi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = _gl(f, lo, mid), _gl(f, mid, hi)
        panels += 1
        if not (np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise EvaluationError("non-finite integrand during quadrature", where=(lo, hi))
        err = np.max(np.abs(left + right - whole))
        if err <= max(tol * (hi - lo) / length, 1e-15 * np.max(np.abs(whole), initial=0.0)) or hi - lo < 1e-14 * length:
            total = total + left + right
            continue
        if panels > max_panels:
            raise EvaluationError("adaptive quadrature did not converge", where=(lo, hi))
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    return total
