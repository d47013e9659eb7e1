import numpy as np
import pytest

from qudit_lab.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(20240611)


def random_hermitian(rng: RngStream, n: int) -> np.ndarray:
    g = rng.complex_normal((n, n))
    return g + g.conj().T


def haar_moment(d: int, k: int) -> float:
    """E|<0|U|0>|^{2k} = k! (d-1)! / (k+d-1)! for Haar U on C^d."""
    from math import factorial

    return factorial(k) * factorial(d - 1) / factorial(k + d - 1)
