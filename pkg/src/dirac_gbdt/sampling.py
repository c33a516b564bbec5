"""Random test data: admissible triples, realizations, property-j matrices."""
import numpy as np

from . import linalg as la
from .gbdt import Signature, new_admissible_triple


def complex_gaussian(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, n):
    Q, R = np.linalg.qr(complex_gaussian(rng, n, n))
    return Q * (R.diagonal() / np.abs(R.diagonal()))


def random_pd(rng, n, lo=0.5, hi=2.0):
    U = random_unitary(rng, n)
    return la.herm((U * rng.uniform(lo, hi, n)) @ U.conj().T)


def random_hermitian(rng, n, scale=1.0):
    G = complex_gaussian(rng, n, n) * scale
    return la.herm(G)


def random_contraction(rng, rows, cols, max_norm=0.9):
    K = complex_gaussian(rng, rows, cols)
    s = la.norm(K)
    return K * (rng.uniform(0, max_norm) / s) if s > 0 else K


def random_property_j(rng, m1, m2, max_norm=0.9):
    """``[K; I] c`` with ``||K|| < 1`` and ``c`` invertible; has property-j."""
    K = random_contraction(rng, m1, m2, max_norm)
    c = complex_gaussian(rng, m2, m2) + 2 * np.eye(m2)
    return np.vstack([K, np.eye(m2)]) @ c


def _is_minimal(Acal, B, Ccal, tol=1e-8):
    from .inverse import minimal_reduce
    return minimal_reduce(Acal, B, Ccal, tol=tol).n == Acal.shape[0]


def random_admissible_triple(rng, n, m1, m2, *, margin=0.05, max_tries=1000,
                             canonical=True, theta2_scale=None):
    """Sample an admissible triple through the inverse parametrization.

    Draw ``X > 0``, ``B`` and ``C`` and set ``S0 = X^{-1}``, ``theta1 = i X^{-1} C*``,
    ``theta2 = B``; then ``A = (i H / 2 + K) X`` with ``H = theta1 theta1* -
    theta2 theta2*`` and ``K`` Hermitian satisfies the admissibility identity
    for every ``K``.  ``K`` is resampled until (when ``canonical``) the spectrum
    of ``A`` sits in the upper half-plane with imaginary parts at least
    ``margin``, stays 0.1 away from ``+-i`` and 0.3 away from the origin, and
    the realization ``{A^x, theta2, i theta1* S0^{-1}}`` is minimal.

    Imaginary parts of the spectrum come from ``theta1`` and are eaten by
    ``theta2``; with ``m1`` small against ``n`` the upper half-plane is hard
    to hit, so the ``theta2`` scale shrinks slowly with every rejection.
    """
    sig = Signature(m1, m2)
    for attempt in range(max_tries):
        X = random_pd(rng, n)
        s2 = rng.uniform(0.2, 1.0) * 0.99 ** attempt if theta2_scale is None else theta2_scale
        B = complex_gaussian(rng, n, m2) * s2
        Ccal = complex_gaussian(rng, m1, n)
        S0 = la.inv(X)
        theta1 = 1j * S0 @ Ccal.conj().T
        theta2 = B
        H = theta1 @ theta1.conj().T - theta2 @ theta2.conj().T
        K = random_hermitian(rng, n, rng.uniform(0.5, 3.0))
        A = (0.5j * H + K) @ X
        w, _, cond = la.eig_condition(A)
        if canonical and np.min(w.imag) < margin:
            continue
        if np.min(np.abs(w - 1j)) < 0.1 or np.min(np.abs(w + 1j)) < 0.1:
            continue
        if np.min(np.abs(w)) < 0.3 or cond > 1e2:
            continue
        Across = A + 1j * B @ B.conj().T @ X
        if not _is_minimal(Across, B, Ccal):
            continue
        return new_admissible_triple(A, S0, theta1, theta2, sig)
    raise RuntimeError("could not sample an admissible triple with the requested properties")


def random_signature_dims(rng, n_max=6, m_max=3):
    return int(rng.integers(1, n_max + 1)), int(rng.integers(1, m_max + 1)), int(rng.integers(1, m_max + 1))
