"""The compiled kernels and the numpy fallback must agree."""

import numpy as np
import pytest

from mapgroups import _pykernels
from mapgroups._backend import BACKEND

ck = pytest.importorskip("mapgroups._ckernels")


def test_active_backend_is_reported():
    assert BACKEND in ("cython", "python")


def test_expm_batch_agrees(rng):
    xs = rng.normal(size=(20, 3, 3)) + 1j * rng.normal(size=(20, 3, 3))
    np.testing.assert_allclose(ck.expm_batch(xs), _pykernels.expm_batch(xs), rtol=1e-12, atol=1e-12)


def test_expm_batch_accepts_read_only_views(rng):
    x = np.broadcast_to(rng.normal(size=(2, 2)).astype(np.complex128), (4, 2, 2))
    np.testing.assert_allclose(ck.expm_batch(x), _pykernels.expm_batch(np.array(x)), atol=1e-13)


@pytest.mark.parametrize("dense", [False, True])
def test_magnus4_agrees(rng, dense):
    k = 50
    xi1 = rng.normal(size=(k, 2, 2)) + 1j * rng.normal(size=(k, 2, 2))
    xi2 = rng.normal(size=(k, 2, 2)) + 1j * rng.normal(size=(k, 2, 2))
    h = np.full(k, 1.0 / k)
    a, bad_a = ck.magnus4(xi1, xi2, h, dense)
    b, bad_b = _pykernels.magnus4(xi1, xi2, h, dense)
    assert bad_a == bad_b == -1
    np.testing.assert_allclose(np.asarray(a), np.asarray(b), rtol=1e-11, atol=1e-11)


def test_magnus4_reports_blowup_step():
    xi = np.zeros((3, 2, 2), dtype=np.complex128)
    xi[1] = np.nan
    h = np.full(3, 1 / 3)
    assert ck.magnus4(xi, xi, h, False)[1] == _pykernels.magnus4(xi, xi, h, False)[1] == 1


def test_environment_switch_selects_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, MAPGROUPS_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import mapgroups; print(mapgroups.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
