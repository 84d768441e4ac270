"""Maps converging to the identity while staying outside the pointwise exp image.

With H = diag(1, -1) and E the nilpotent upper unit, f(z) = exp(i pi z H) exp(z E)
satisfies f(0) = 1 and f(1) = -[[1, 1], [0, 1]], which is not an exponential
in SL_2(C). The maps h_n(z) = f(exp(z - n)) tend to 1 uniformly on compact
sets as n grows, yet h_n(n) = f(1) for every n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mapgroups import linalg
from mapgroups.groups import SpecialLinear, is_in_exp_image

H = np.diag([1.0, -1.0]).astype(np.complex128)
E = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)


def f_curve(z) -> np.ndarray:
    """exp(i pi z H) exp(z E) for an array of complex z, shape (k, 2, 2)."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    left = linalg.mat_exp_batch(1j * np.pi * z[:, None, None] * H)
    right = linalg.mat_exp_batch(z[:, None, None] * E)
    return left @ right


def h_map(n: float, z) -> np.ndarray:
    """h_n(z) = f(exp(z - n))."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    return f_curve(np.exp(z - n))


def disk_grid(radius: float, radial: int = 41, angular: int = 128) -> np.ndarray:
    """Polar grid of the closed disk |z| <= radius (boundary included)."""
    r = np.linspace(0.0, radius, radial)
    th = np.linspace(0.0, 2 * np.pi, angular, endpoint=False)
    return np.concatenate([[0.0], (r[1:, None] * np.exp(1j * th[None, :])).ravel()])


@dataclass(frozen=True)
class PathologyRow:
    n: int
    sup_deviation: float
    value_at_n: np.ndarray
    in_exp_image: bool


def pathology_report(ns, radius: float = 2.0, radial: int = 41, angular: int = 128) -> list:
    """For each n: sup over the disk grid of |h_n - 1|_F and the exp-image verdict at z = n."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    pts = disk_grid(radius, radial, angular)
    group = SpecialLinear(2)
    rows = []
    for n in ns:
        if n < 1:
            raise ValueError("n must be >= 1")
        dev = np.linalg.norm(h_map(n, pts) - np.eye(2), axis=(-2, -1)).max()
        g = h_map(n, [n])[0]
        inside, _ = is_in_exp_image(group, g)
        rows.append(PathologyRow(int(n), float(dev), g, bool(inside)))
    return rows
