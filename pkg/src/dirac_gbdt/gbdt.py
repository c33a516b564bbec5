"""Admissible triples, the GBDT recursion and the potential it determines.

A triple ``{A, S0, Pi0 = [theta1 theta2]}`` is admissible when ``A`` is
invertible, ``S0 > 0`` and ``A S0 - S0 A* = i Pi0 j Pi0*``.  Iterating

    Pi_{k+1} = Pi_k + i A^{-1} Pi_k j
    S_{k+1}  = S_k + A^{-1} S_k A^{-*} + A^{-1} Pi_k Pi_k* A^{-*}

preserves that identity, and ``C_k = I + M_k - M_{k+1}`` with
``M_k = Pi_k* S_k^{-1} Pi_k`` is a positive j-unitary potential.

``S_k`` grows geometrically, so :class:`GbdtRecursion` never runs the raw
recursion for long horizons.  ``M_k`` and the transfer matrix only see the
triple up to a similarity ``(Pi, S) -> (G Pi, G S G*)`` with ``G`` commuting
with ``A``; the engine exploits this by working in an eigenbasis of ``A`` and
rebalancing with a diagonal ``G`` after every step.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg as la
from .errors import (IdentityDrift, IdentityViolated, NotPositiveDefinite,
                     PotentialInvariantViolated, S0NotPositive, SchemaError, Singular,
                     SingularA)

DEFAULT_TOL = 1e-9
K_MAX_CAP = 10**6
OVERFLOW_NORM = 1e280
# eigenbasis is used only when V is this well conditioned; the identity
# residual picks up eps * cond(V)**2 from the change of basis
EIGEN_BASIS_COND = 1e3


@dataclass(frozen=True)
class Signature:
    m1: int
    m2: int

    def __post_init__(self):
        if int(self.m1) < 1 or int(self.m2) < 1:
            raise SchemaError(f"signature needs m1, m2 >= 1, got ({self.m1}, {self.m2})")

    @property
    def m(self):
        return self.m1 + self.m2

    @property
    def j(self):
        return la.signature_matrix(self.m1, self.m2)

    @property
    def jdiag(self):
        return np.r_[np.ones(self.m1), -np.ones(self.m2)]

    @property
    def J(self):
        """Block swap used by the dual system, ``J = [[0, I_m2], [I_m1, 0]]``."""
        J = np.zeros((self.m, self.m), dtype=np.complex128)
        J[:self.m2, self.m1:] = np.eye(self.m2)
        J[self.m2:, :self.m1] = np.eye(self.m1)
        return J

    def dual(self):
        return Signature(self.m2, self.m1)


@dataclass(frozen=True, eq=False)
class AdmissibleTriple:
    """GBDT parameter matrices.  Build through :func:`new_admissible_triple`."""
    A: np.ndarray
    S0: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    sig: Signature
    residual: float = 0.0

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def Pi0(self):
        return np.hstack([self.theta1, self.theta2])

    @cached_property
    def Ainv(self):
        return la.inv(self.A)

    @cached_property
    def S0inv(self):
        if self.n == 0:
            return np.zeros((0, 0), dtype=np.complex128)
        return la.chol_solve(la.cholesky(self.S0), np.eye(self.n, dtype=np.complex128))

    @cached_property
    def A_cross(self):
        """``A + i theta2 theta2* S0^{-1}``; the realization matrix of psi."""
        return self.A + 1j * self.theta2 @ self.theta2.conj().T @ self.S0inv


def identity_residual(A, S, Pi, jdiag, norm=la.norm):
    """Relative residual of ``A S - S A* = i Pi j Pi*``.

    ``norm`` defaults to the spectral norm; the long-horizon engine passes the
    cheaper Frobenius norm.
    """
    R = A @ S - S @ A.conj().T - 1j * (Pi * jdiag) @ Pi.conj().T
    scale = norm(A) * norm(S) + norm(Pi) ** 2
    return norm(R) / scale if scale > 0 else 0.0


def new_admissible_triple(A, S0, theta1, theta2, sig, tol=DEFAULT_TOL):
    if tol <= 0:
        raise SchemaError("tol must be positive")
    if not isinstance(sig, Signature):
        sig = Signature(*sig)
    A = la.cmatrix(A, name="A")
    n = A.shape[0]
    A = la.cmatrix(A, shape=(n, n), name="A")
    S0 = la.cmatrix(S0, shape=(n, n), name="S0")
    theta1 = la.cmatrix(np.reshape(theta1, (n, sig.m1)), name="theta1")
    theta2 = la.cmatrix(np.reshape(theta2, (n, sig.m2)), name="theta2")
    if n > 0:
        try:
            la.inv(A)
        except Singular:
            raise SingularA("A is not invertible") from None
        try:
            la.cholesky(S0, tol)
        except NotPositiveDefinite as exc:
            raise S0NotPositive(f"S0 is not positive definite: {exc}") from None
    Pi0 = np.hstack([theta1, theta2])
    res = identity_residual(A, S0, Pi0, sig.jdiag) if n else 0.0
    if res > tol:
        raise IdentityViolated(f"A S0 - S0 A* != i Pi0 j Pi0* (relative residual {res:.3e})", res)
    return AdmissibleTriple(la.frozen(A), la.frozen(la.herm(S0)), la.frozen(theta1),
                            la.frozen(theta2), sig, res)


@dataclass(frozen=True, eq=False)
class GbdtState:
    """Recursion state at index ``k``.

    ``Pi`` and ``S`` carry a common scalar normalization: the true values are
    ``exp(log_scale / 2) * Pi`` and ``exp(log_scale) * S``.  States produced by
    :class:`GbdtRecursion` are additionally expressed in its working basis.
    """
    k: int
    Pi: np.ndarray
    S: np.ndarray
    S_factor: np.ndarray
    log_scale: float = 0.0

    @property
    def Pi_k(self):
        return np.exp(self.log_scale / 2) * self.Pi

    @property
    def S_k(self):
        return np.exp(self.log_scale) * self.S

    def gram(self):
        """``Pi_k* S_k^{-1} Pi_k`` (scale-free)."""
        Y = la.whiten(self.S_factor, self.Pi)
        return la.herm(Y.conj().T @ Y)


def initial_state(triple):
    return GbdtState(0, triple.Pi0, triple.S0, la.cholesky(triple.S0))


def _advance(Pi, S, Ainv, jdiag):
    AiPi = Ainv @ Pi
    Pi_next = Pi + 1j * AiPi * jdiag
    S_next = S + Ainv @ S @ Ainv.conj().T + AiPi @ AiPi.conj().T
    return Pi_next, la.herm(S_next)


def _factor(S, k):
    # S is symmetrized by _advance, so skip the Hermitian test
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise IdentityDrift(f"S_{k} lost positivity: {exc}", k=k) from None
    if not np.all(np.isfinite(L)):
        raise IdentityDrift(f"S_{k} factor is not finite", k=k)
    return L


def step(state, triple, tol=DEFAULT_TOL, renormalize=False):
    """One application of the recursion in the triple's own basis.

    With ``renormalize`` the new pair is divided by ``||S||`` (folded into
    ``log_scale``) so long runs do not overflow.
    """
    k = state.k + 1
    Pi, S = _advance(state.Pi, state.S, triple.Ainv, triple.sig.jdiag)
    log_scale = state.log_scale
    sn = la.norm(S)
    if renormalize and sn > 0:
        Pi, S = Pi / np.sqrt(sn), S / sn
        log_scale += np.log(sn)
    elif sn > OVERFLOW_NORM or not np.isfinite(sn):
        raise IdentityDrift(f"||S_{k}|| = {sn:.3e} exceeds overflow guard", k=k)
    res = identity_residual(triple.A, S, Pi, triple.sig.jdiag)
    if res > tol * max(1, k):
        raise IdentityDrift(f"identity residual {res:.3e} at k={k}", k=k, residual=res)
    return GbdtState(k, Pi, S, _factor(S, k), log_scale)


class GbdtRecursion:
    """Balanced iteration of the recursion for long horizons.

    ``basis`` is ``"eigen"``, ``"original"`` or ``"auto"`` (eigenbasis when the
    eigenvector matrix has condition number below ``EIGEN_BASIS_COND``).
    """

    def __init__(self, triple, tol=DEFAULT_TOL, basis="auto"):
        self.triple = triple
        self.tol = tol
        self.jdiag = triple.sig.jdiag
        n = triple.n
        use_eigen = False
        if basis not in ("auto", "eigen", "original"):
            raise ValueError(f"unknown basis {basis!r}")
        if n > 0 and basis != "original":
            w, V, cond = la.eig_condition(triple.A)
            use_eigen = basis == "eigen" or cond <= EIGEN_BASIS_COND
        if use_eigen:
            self.mode = "eigen"
            self.A = np.diag(w)
            self.Ainv = np.diag(1 / w)
            Vinv = la.inv(V)
            Pi = Vinv @ triple.Pi0
            S = la.herm(Vinv @ triple.S0 @ Vinv.conj().T)
        else:
            self.mode = "original"
            self.A = np.asarray(triple.A)
            self.Ainv = triple.Ainv if n else np.zeros((0, 0), dtype=np.complex128)
            Pi, S = triple.Pi0, triple.S0
        Pi, S = self._balance(Pi, S)
        self._first = GbdtState(0, Pi, S, _factor(S, 0) if n else np.zeros((0, 0)))

    def _balance(self, Pi, S):
        if S.shape[0] == 0:
            return Pi, S
        if self.mode == "eigen":
            d = np.sqrt(np.abs(S.diagonal().real))
            d[d == 0] = 1.0
            return Pi / d[:, None], S / np.outer(d, d)
        s = la.norm(S)
        return Pi / np.sqrt(s), S / s

    def states(self, k_max):
        """Yield the balanced states for ``k = 0 .. k_max``."""
        if k_max < 0 or k_max > K_MAX_CAP:
            raise SchemaError(f"k_max must lie in [0, {K_MAX_CAP}]")
        state = self._first
        yield state
        n = self.triple.n
        for k in range(1, k_max + 1):
            if n == 0:
                state = GbdtState(k, state.Pi, state.S, state.S_factor)
            else:
                Pi, S = _advance(state.Pi, state.S, self.Ainv, self.jdiag)
                if not (np.all(np.isfinite(S)) and np.all(np.isfinite(Pi))):
                    raise IdentityDrift(f"non-finite recursion state at k={k}", k=k)
                Pi, S = self._balance(Pi, S)
                res = identity_residual(self.A, S, Pi, self.jdiag, np.linalg.norm)
                if res > self.tol * k:
                    raise IdentityDrift(f"identity residual {res:.3e} at k={k}", k=k, residual=res)
                state = GbdtState(k, Pi, S, _factor(S, k))
            yield state

    def state_at(self, k):
        for state in self.states(k):
            pass
        return state

    def grams(self, k_max):
        """``M_k = Pi_k* S_k^{-1} Pi_k`` for ``k = 0 .. k_max``."""
        m = self.triple.sig.m
        for state in self.states(k_max):
            yield state.gram() if self.triple.n else np.zeros((m, m), dtype=np.complex128)

    def transfer(self, state, lam):
        """``w_A(k, lam) = I - i j Pi* S^{-1} (A - lam I)^{-1} Pi`` at ``state``."""
        m = self.triple.sig.m
        if self.triple.n == 0:
            return np.eye(m, dtype=np.complex128)
        n = self.triple.n
        R = la.solve(self.A - lam * np.eye(n), state.Pi)
        G = la.chol_solve(state.S_factor, state.Pi).conj().T @ R
        return np.eye(m) - 1j * self.jdiag[:, None] * G


@dataclass(frozen=True, eq=False)
class Potential:
    sig: Signature
    C: tuple = field(default_factory=tuple)

    @property
    def k_max(self):
        return len(self.C) - 1

    def __len__(self):
        return len(self.C)

    def __getitem__(self, k):
        return self.C[k]


def check_potential_matrix(C, sig, tol=DEFAULT_TOL, k=None):
    """Raise :class:`PotentialInvariantViolated` unless ``C > 0``, ``CjC = j``, ``C >= +-j``."""
    j = sig.j
    where = f"C_{k}" if k is not None else "C"
    # Frobenius norms: cheap upper bounds of the spectral ones
    scale = max(1.0, float(np.linalg.norm(C)))
    if not la.is_positive_definite(C, tol):
        raise PotentialInvariantViolated(f"{where} is not positive definite")
    err = float(np.linalg.norm(C @ j @ C - j))
    if err > tol * scale ** 2:
        raise PotentialInvariantViolated(f"{where} j {where} - j has norm {err:.3e}")
    for sign in (1, -1):
        if la.lmin(C - sign * j) < -tol * scale:
            raise PotentialInvariantViolated(f"{where} violates {where} >= {'+' if sign > 0 else '-'}j")


def potential(triple, k_max, tol=DEFAULT_TOL, basis="auto"):
    """The potential ``C_0 .. C_{k_max}`` determined by ``triple``."""
    sig = triple.sig
    I = np.eye(sig.m, dtype=np.complex128)
    grams = GbdtRecursion(triple, tol, basis).grams(k_max + 1)
    C = []
    prev = next(grams)
    for k, cur in enumerate(grams):
        Ck = la.herm(I + prev - cur)
        check_potential_matrix(Ck, sig, tol, k)
        C.append(la.frozen(Ck))
        prev = cur
    return Potential(sig, tuple(C))


def transfer(triple, k, lam, tol=DEFAULT_TOL):
    eng = GbdtRecursion(triple, tol)
    return eng.transfer(eng.state_at(k), lam)


def dirac_factor(Ck, z, sig):
    """``I + i z j C_k``."""
    return np.eye(sig.m) + 1j * z * sig.jdiag[:, None] * Ck


def fundamental_product(pot, z, k):
    """``W_k(z) = (I + iz j C_{k-1}) ... (I + iz j C_0)``."""
    if k < 0 or k > len(pot.C):
        raise SchemaError(f"k={k} outside 0..{len(pot.C)}")
    W = np.eye(pot.sig.m, dtype=np.complex128)
    for r in range(k):
        W = dirac_factor(pot.C[r], z, pot.sig) @ W
    return W


def fundamental_solutions(pot, z, k_max=None):
    """Yield ``W_0(z), W_1(z), ...`` up to ``k_max`` (default: len(pot.C))."""
    k_max = len(pot.C) if k_max is None else k_max
    W = np.eye(pot.sig.m, dtype=np.complex128)
    yield W
    for r in range(k_max):
        W = dirac_factor(pot.C[r], z, pot.sig) @ W
        yield W


def free_power(z, k, sig):
    """``(I + iz j)^k`` (diagonal)."""
    return np.diag(np.r_[np.full(sig.m1, (1 + 1j * z) ** k), np.full(sig.m2, (1 - 1j * z) ** k)])


def fundamental_explicit(triple, z, k, tol=DEFAULT_TOL):
    """``W_k(z) = w_A(k, -1/z) (I + izj)^k w_A(0, -1/z)^{-1}``."""
    if z == 0:
        raise Singular("z = 0 has no transfer-matrix representation")
    lam = -1 / z
    eng = GbdtRecursion(triple, tol)
    w0 = None
    for state in eng.states(k):
        if state.k == 0:
            w0 = eng.transfer(state, lam)
    wk = eng.transfer(state, lam)
    rhs = wk @ free_power(z, k, triple.sig)
    return la.solve(w0.T, rhs.T).T


def dualize(pot):
    """Dual system: swapped signature and ``C~_k = J C_k J*``."""
    J = pot.sig.J
    return Potential(pot.sig.dual(), tuple(la.frozen(J @ C @ J.conj().T) for C in pot.C))
