"""Shared fixtures-by-value for the test suite."""
import functools

import numpy as np

from dirac_gbdt import Signature, new_admissible_triple
from dirac_gbdt.inverse import make_realization
from dirac_gbdt.sampling import random_admissible_triple, random_signature_dims

SQRT2 = np.sqrt(2.0)
SIG11 = Signature(1, 1)
RANDOM_SEED = 20240917


def free_triple():
    """``{A = i, S0 = 1, theta1 = sqrt2, theta2 = 0}``: Weyl function 0, C_k = I."""
    return new_admissible_triple([[1j]], [[1]], [[SQRT2]], [[0]], SIG11)


def scalar_triple():
    """``{A = i, S0 = 1, theta1 = 2, theta2 = sqrt2}``."""
    return new_admissible_triple([[1j]], [[1]], [[2]], [[SQRT2]], SIG11)


def scalar_realization():
    """``(3i, sqrt2, 2i)``, the realization produced by :func:`scalar_triple`."""
    return make_realization([[3j]], [[SQRT2]], [[2j]])


def triple_from_seed(seed, n_max=6, m_max=3):
    rng = np.random.default_rng(seed)
    n, m1, m2 = random_signature_dims(rng, n_max, m_max)
    return random_admissible_triple(rng, n, m1, m2)


@functools.lru_cache(maxsize=None)
def random_triples(count=50, seed=RANDOM_SEED, n_max=6, m_max=3):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n, m1, m2 = random_signature_dims(rng, n_max, m_max)
        out.append(random_admissible_triple(rng, n, m1, m2))
    return tuple(out)


def lower_points(rng, count, scale=2.0):
    """Random points of the open lower half-plane, kept away from -i."""
    pts = []
    while len(pts) < count:
        z = complex(rng.normal(0, scale), -abs(rng.normal(0, scale)) - 0.05)
        if abs(z + 1j) > 0.05:
            pts.append(z)
    return pts
