import numpy as np
import pytest

E = np.array([[0, 1], [0, 0]], dtype=np.complex128)
F = np.array([[0, 0], [1, 0]], dtype=np.complex128)
H = np.diag([1.0, -1.0]).astype(np.complex128)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
