"""Verblunsky-type coefficients and the asymptotics ``C_k -> I``.

Each positive j-unitary ``C`` is the Halmos extension of a strict contraction
``rho``::

    C = D H,  D = diag((I - rho rho*)^{-1/2}, (I - rho* rho)^{-1/2}),  H = [[I, rho], [rho*, I]]

and ``rho = C11^{-1} C12``.  Convergence ``rho_k -> 0`` is tracked through the
monotone sequences

    R_k = (I + iA^{-1})^{-k} S_k (I - iA^{-*})^{-k},  Q_k = (I - iA^{-1})^{-k} S_k (I + iA^{-*})^{-k}

accumulated from their rank-one-per-column increments.
"""
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import NotStrictContraction, SchemaError, Singular, SpectrumConflict, TopBlockSingular
from .gbdt import DEFAULT_TOL, EIGEN_BASIS_COND, GbdtRecursion, potential

SATURATION_NORM = 1e250
DIAGONALIZABLE_COND = 1e6


@dataclass(frozen=True, eq=False)
class VerblunskyCoefficient:
    k: int
    rho: np.ndarray

    @property
    def norm(self):
        return la.norm(self.rho)


@dataclass(frozen=True, eq=False)
class HalmosFactors:
    D: np.ndarray
    H: np.ndarray

    @property
    def C(self):
        return self.D @ self.H


def rho_from_potential(Ck, sig, k=0):
    m1 = sig.m1
    Ck = np.asarray(Ck)
    try:
        rho = la.solve(Ck[:m1, :m1], Ck[:m1, m1:])
    except Singular:
        raise TopBlockSingular(f"top-left block of C_{k} is singular") from None
    if la.norm(rho) >= 1:
        raise NotStrictContraction(f"||rho_{k}|| = {la.norm(rho):.12g} >= 1")
    return VerblunskyCoefficient(k, la.frozen(rho))


def halmos_reconstruct(rho):
    """Halmos extension of a strict contraction; returns the factors (``.C`` is the product)."""
    if isinstance(rho, VerblunskyCoefficient):
        rho = rho.rho
    rho = la.cmatrix(rho, name="rho")
    if la.norm(rho) >= 1:
        raise NotStrictContraction(f"||rho|| = {la.norm(rho):.12g} >= 1")
    m1, m2 = rho.shape
    D = np.zeros((m1 + m2, m1 + m2), dtype=np.complex128)
    D[:m1, :m1] = la.inv_sqrtm_pd(np.eye(m1) - rho @ rho.conj().T)
    D[m1:, m1:] = la.inv_sqrtm_pd(np.eye(m2) - rho.conj().T @ rho)
    H = np.block([[np.eye(m1), rho], [rho.conj().T, np.eye(m2)]])
    return HalmosFactors(la.frozen(D), la.frozen(H))


def _cayley_factors(triple):
    """``(I + iA^{-1})`` and ``(I - iA^{-1})``."""
    n = triple.n
    Ai = triple.Ainv
    return np.eye(n) + 1j * Ai, np.eye(n) - 1j * Ai


class MonotoneSequence:
    """``X_0 = S0``, ``X_{k+1} = X_k + 2 g_k g_k*`` with ``g_k = H G^k theta``.

    ``G`` and ``H`` are functions of ``A``.  When ``A`` has a well-conditioned
    eigenbasis ``V`` the sequence is carried as ``X_k = V D_k Y_k D_k V*`` with
    a diagonal log-scale ``D_k`` and a Jacobi-balanced ``Y_k``; this keeps
    ``lmin(X_k)`` and ``X_k^{-1}`` accurate while ``X_k`` grows geometrically
    at different rates along different eigenvectors.  Otherwise the raw sum
    is accumulated and stops once an entry exceeds ``SATURATION_NORM``.
    """

    def __init__(self, triple, gamma, eta, G, Hd, theta, k_max):
        n = triple.n
        self.n = n
        self.k_max = k_max
        self.saturated_at = None
        w, V, cond = la.eig_condition(triple.A)
        self.eigen = n > 0 and cond <= EIGEN_BASIS_COND
        self.lmin = np.full(k_max + 1, np.inf)
        # lmin(inc) / ||inc||_F per step; nonnegative up to rounding
        self.inc_lmin_rel = np.zeros(k_max)
        if self.eigen:
            self._run_eigen(triple, V, gamma(w), eta(w), theta)
        else:
            self._run_raw(triple, G, Hd, theta)

    def _run_eigen(self, triple, V, gamma, eta, theta):
        Vinv = la.inv(V)
        self.V, self.Vinv, self.gamma, self.eta = V, Vinv, gamma, eta
        self.c = Vinv @ theta
        Y = la.herm(Vinv @ triple.S0 @ Vinv.conj().T)
        s = np.zeros(self.n)
        Y, s, p = self._balance(Y, s, self.c.copy())
        Ys, ss = [Y], [s]
        self.lmin[0] = self._lmin_scaled(Y, s)
        for k in range(self.k_max):
            g = eta[:, None] * p
            inc = 2 * g @ g.conj().T
            self.inc_lmin_rel[k] = _rel_lmin(inc)
            Y = la.herm(Y + inc)
            p = gamma[:, None] * p
            Y, s, p = self._balance(Y, s, p)
            Ys.append(Y)
            ss.append(s)
            self.lmin[k + 1] = self._lmin_scaled(Y, s)
        self._Y, self._s = Ys, ss

    @staticmethod
    def _balance(Y, s, p):
        d = np.sqrt(np.real(np.diag(Y)))
        Y = la.herm(Y / np.outer(d, d))
        return Y, s + np.log(d), p / d[:, None]

    def _inv_scaled(self, Y, s):
        """``(X^{-1}, shift)`` with ``X^{-1} = exp(-2 shift) * returned``."""
        shift = s.min()
        e = np.exp(-(s - shift))
        M = (self.Vinv.conj().T * e) @ np.linalg.inv(Y) @ (e[:, None] * self.Vinv)
        return la.herm(M), shift

    def _lmin_scaled(self, Y, s):
        M, shift = self._inv_scaled(Y, s)
        top = np.linalg.eigvalsh(M)[-1]
        if top <= 0:
            return 0.0
        with np.errstate(over="ignore"):
            return float(np.exp(2 * shift) / top)

    def _run_raw(self, triple, G, Hd, theta):
        cur = np.asarray(triple.S0, dtype=np.complex128)
        values = [la.frozen(cur)]
        self.lmin[0] = la.lmin(cur) if self.n else np.inf
        P = theta
        for k in range(self.k_max):
            g = Hd @ P
            inc = 2 * g @ g.conj().T
            nxt = la.herm(cur + inc)
            if not np.all(np.isfinite(nxt)) or np.abs(nxt).max(initial=0.0) > SATURATION_NORM:
                self.saturated_at = k + 1
                break
            self.inc_lmin_rel[k] = _rel_lmin(inc)
            cur = nxt
            values.append(la.frozen(cur))
            self.lmin[k + 1] = la.lmin(cur) if self.n else np.inf
            P = G @ P
        self._values = values

    @property
    def last_index(self):
        return self.k_max if self.saturated_at is None else self.saturated_at - 1

    def value(self, k):
        """``X_k`` as a dense matrix (may overflow for a fast-growing sequence)."""
        if not self.eigen:
            return self._values[k]
        e = np.exp(self._s[k])
        with np.errstate(over="ignore", invalid="ignore"):
            return la.herm((self.V * e) @ self._Y[k] @ (e[:, None] * self.V.conj().T))

    def inverse(self, k=None):
        """``X_k^{-1}`` (default: the last computed ``k``)."""
        k = self.last_index if k is None else k
        if self.n == 0:
            return np.zeros((0, 0), dtype=np.complex128)
        if not self.eigen:
            return _herm_inv(self._values[k])
        M, shift = self._inv_scaled(self._Y[k], self._s[k])
        with np.errstate(under="ignore"):
            return la.herm(np.exp(-2 * shift) * M)

    def window_lmin(self, width):
        """``lmin(X_{k+width} - X_k)`` for ``k = 0..k_max - width``.

        In the eigenbasis the window is ``Gamma^k W_0 Gamma^{k*}`` with ``W_0``
        the first ``width`` increments, so its smallest eigenvalue is read off
        ``W_k^{-1}`` without forming the growing matrix.
        """
        count = self.k_max - width + 1
        if count <= 0 or self.n == 0:
            return np.zeros(0)
        out = np.full(count, np.nan)
        if self.eigen:
            W0 = np.zeros((self.n, self.n), dtype=np.complex128)
            p = self.c
            for _ in range(width):
                g = self.eta[:, None] * p
                W0 += 2 * g @ g.conj().T
                p = self.gamma[:, None] * p
            try:
                W0inv = la.inv(la.herm(W0))
            except Singular:
                return np.zeros(count)
            logg = np.log(self.gamma.astype(np.complex128))
            for k in range(count):
                with np.errstate(under="ignore", over="ignore", invalid="ignore"):
                    e = np.exp(-k * logg)
                    M = (self.Vinv.conj().T * e.conj()) @ W0inv @ (e[:, None] * self.Vinv)
                    top = np.linalg.eigvalsh(la.herm(M))[-1]
                    out[k] = np.inf if top <= 0 else 1.0 / top
            return out
        vals = self._values
        for k in range(min(count, len(vals) - width)):
            out[k] = la.lmin(vals[k + width] - vals[k])
        return out


def _rel_lmin(inc):
    scale = np.linalg.norm(inc)
    return 0.0 if scale == 0 else float(np.linalg.eigvalsh(inc)[0] / scale)


def r_sequence(triple, k_max):
    """``R_0 = S0``, ``R_{k+1} - R_k = 2 g_k g_k*`` with ``g_k = T^{-k-1} A^{-1} U^k theta2``.

    ``T = I + iA^{-1}``, ``U = I - iA^{-1}``; requires ``-i`` outside the spectrum.
    """
    T, U = _cayley_factors(triple)
    try:
        Tinv = la.inv(T)
    except Singular:
        raise SpectrumConflict("-i is an eigenvalue of A; R_k is undefined") from None
    return MonotoneSequence(triple, lambda w: (w - 1j) / (w + 1j), lambda w: 1 / (w + 1j),
                            Tinv @ U, Tinv @ triple.Ainv, triple.theta2, k_max)


def q_sequence(triple, k_max):
    """``Q_0 = S0``, ``Q_{k+1} - Q_k = 2 h_k h_k*`` with ``h_k = U^{-k-1} A^{-1} T^k theta1``."""
    T, U = _cayley_factors(triple)
    try:
        Uinv = la.inv(U)
    except Singular:
        raise SpectrumConflict("i is an eigenvalue of A; Q_k is undefined") from None
    return MonotoneSequence(triple, lambda w: (w + 1j) / (w - 1j), lambda w: 1 / (w - 1j),
                            Uinv @ T, Uinv @ triple.Ainv, triple.theta1, k_max)


def rq_sequences(triple, k_max):
    return r_sequence(triple, k_max), q_sequence(triple, k_max)


def _quad_inv(R, theta):
    """``theta* R^{-1} theta``."""
    Y = la.whiten(la.cholesky(R, tol=1e-6), theta)
    return Y.conj().T @ Y


def rho_explicit(triple, k, tol=DEFAULT_TOL):
    """``rho_k`` from the R-sequence and the GBDT grams, bypassing ``C_k``.

    ``rho_k = (I + theta1* R_k^{-1} theta1 - theta1* R_{k+1}^{-1} theta1)^{-1}
    [I 0] (M_k - M_{k+1}) [0; I]``.
    """
    m1 = triple.sig.m1
    R = r_sequence(triple, k + 1)
    if R.saturated_at is not None:
        raise SpectrumConflict(f"R_k saturated at k={R.saturated_at}")
    grams = list(GbdtRecursion(triple, tol).grams(k + 1))
    top = (np.eye(m1) + _quad_inv(R.value(k), triple.theta1)
           - _quad_inv(R.value(k + 1), triple.theta1))
    off = (grams[k] - grams[k + 1])[:m1, m1:]
    try:
        rho = la.solve(top, off)
    except Singular:
        raise TopBlockSingular(f"top-left block at k={k} is singular") from None
    return VerblunskyCoefficient(k, la.frozen(rho))


def f_matrix(triple):
    """``F = sum_l (A - iI)^{n-l} (A + iI)^{l-1} theta1 theta1* (...)*`` for ``l = 1..n``.

    The sum is defined for any ``A``; the positivity claim that goes with it
    presumes ``i`` is not an eigenvalue.
    """
    n = triple.n
    A = np.asarray(triple.A)
    I = np.eye(n)
    F = np.zeros((n, n), dtype=np.complex128)
    for ell in range(1, n + 1):
        v = (np.linalg.matrix_power(A - 1j * I, n - ell)
             @ np.linalg.matrix_power(A + 1j * I, ell - 1) @ triple.theta1)
        F += v @ v.conj().T
    return la.herm(F)


@dataclass(frozen=True, eq=False)
class AsymptoticsReport:
    k: np.ndarray
    rho_norm: np.ndarray
    Ck_minus_I_norm: np.ndarray
    lmin_R: np.ndarray
    lmin_Q: np.ndarray
    kappa_R: np.ndarray
    kappa_Q: np.ndarray
    F: np.ndarray
    lmin_F: float
    epsilon_1_34: float
    diagonalizable: bool
    top_left_dev: float
    bottom_right_dev: float
    min_inc_R: float = 0.0
    min_inc_Q: float = 0.0
    notes: tuple = field(default_factory=tuple)

    columns = ("k", "rho_norm", "Ck_minus_I_norm", "lmin_Rk", "lmin_Qk")

    def rows(self):
        return zip(self.k.tolist(), self.rho_norm.tolist(), self.Ck_minus_I_norm.tolist(),
                   self.lmin_R.tolist(), self.lmin_Q.tolist())

    def footer(self):
        return {
            "kappa_R": la.encode_matrix(self.kappa_R),
            "kappa_Q": la.encode_matrix(self.kappa_Q),
            "lmin_F": self.lmin_F,
            "epsilon_1_34": self.epsilon_1_34,
            "diagonalizable": self.diagonalizable,
            "top_left_dev": self.top_left_dev,
            "bottom_right_dev": self.bottom_right_dev,
            "min_increment_eig_R": self.min_inc_R,
            "min_increment_eig_Q": self.min_inc_Q,
            "notes": list(self.notes),
        }


def _herm_inv(V):
    """Inverse of a Hermitian positive matrix through its eigendecomposition.

    Growing sequences become badly scaled long before they lose
    positivity, so a pivoted LU would reject them.
    """
    w, U = np.linalg.eigh(la.herm(V))
    if w[0] <= 0:
        raise Singular("matrix is not positive definite")
    return la.herm((U / w) @ U.conj().T)


def asymptotics_report(triple, k_max, tol=DEFAULT_TOL):
    """Per-k table of ``||rho_k||``, ``||C_k - I||``, ``lmin(R_k)``, ``lmin(Q_k)`` plus limits.

    Requires ``-i`` outside the spectrum of ``A``.  When ``i`` is an eigenvalue
    the Q-columns are NaN.  Entries past a saturation point are ``inf``.
    """
    if k_max < 0:
        raise SchemaError("k_max must be nonnegative")
    sig = triple.sig
    m1 = sig.m1
    n = triple.n
    notes = []
    pot = potential(triple, k_max, tol)
    I = np.eye(sig.m)
    rho = np.array([rho_from_potential(C, sig, k).norm for k, C in enumerate(pot.C)])
    dev = np.array([la.norm(C - I) for C in pot.C])
    R = r_sequence(triple, k_max)
    if R.saturated_at is not None:
        notes.append(f"R saturated at k={R.saturated_at}")
    try:
        Q = q_sequence(triple, k_max)
    except SpectrumConflict:
        Q = None
        notes.append("i in spectrum of A: Q sequence undefined")
    if n:
        _, _, cond = la.eig_condition(triple.A)
    else:
        cond = 1.0
    diagonalizable = cond < DIAGONALIZABLE_COND
    if Q is None:
        lmin_Q = np.full(k_max + 1, np.nan)
        kappa_Q = np.full((n, n), np.nan, dtype=np.complex128)
        eps = float("nan")
        inc_Q = np.zeros(0)
    else:
        lmin_Q = Q.lmin
        kappa_Q = Q.inverse()
        inc_Q = Q.inc_lmin_rel
        if Q.saturated_at is not None:
            notes.append(f"Q saturated at k={Q.saturated_at}")
        win = Q.window_lmin(n) if n else np.zeros(0)
        win = win[~np.isnan(win)]
        eps = float(win.min()) if win.size else float("nan")
    F = f_matrix(triple)
    last = pot.C[-1]
    return AsymptoticsReport(
        k=np.arange(k_max + 1), rho_norm=rho, Ck_minus_I_norm=dev, lmin_R=R.lmin, lmin_Q=lmin_Q,
        kappa_R=la.frozen(R.inverse()), kappa_Q=la.frozen(kappa_Q), F=la.frozen(F),
        lmin_F=la.lmin(F) if n else float("inf"),
        min_inc_R=float(R.inc_lmin_rel.min(initial=0.0)),
        min_inc_Q=float(inc_Q.min(initial=0.0)),
        epsilon_1_34=eps, diagonalizable=diagonalizable,
        top_left_dev=la.norm(last[:m1, :m1] - np.eye(m1)),
        bottom_right_dev=la.norm(last[m1:, m1:] - np.eye(sig.m2)),
        notes=tuple(notes))
