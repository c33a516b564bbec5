"""Inverse problem: from a realization of ``psi(z) = phi(-1/z)`` to the potential.

``psi(z) = C (zI - A)^{-1} B`` is reduced to a minimal realization, the
Riccati equation

    X B B* X - i (A* X - X A) + C* C = 0,   sigma(A - i B B* X) in closed C+

is solved for its stabilizing solution ``X > 0``, and the admissible triple
``{A - i B B* X, X^{-1}, [i X^{-1} C*, B]}`` determines the potential.

With ``F = iA`` the equation reads ``F* X + X F + X B B* X + C* C = 0`` and
the spectral condition says ``F + B B* X`` is Hurwitz, i.e. the stable
invariant subspace of the Hamiltonian ``[[F, BB*], [-C*C, -F*]]``.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import linalg as la
from .errors import (AdmissibilityViolated, IdentityViolated, IllConditionedSubspace,
                     NewtonDiverged, NoStabilizingSolution, NotContractive, NotPositiveDefinite,
                     PoleInLowerHalfPlane, SchemaError, Singular)
from .gbdt import DEFAULT_TOL, Signature, new_admissible_triple, potential

MINIMALITY_TOL = 1e-10
POLE_TOL = 1e-10
CLOSED_LOOP_TOL = 1e-8
RESIDUAL_TOL = 1e-10
# a Schur candidate worse than this is not a solution at all (no Hermitian root)
ACCEPT_RESIDUAL = 1e-6


@dataclass(frozen=True, eq=False)
class Realization:
    Acal: np.ndarray
    B: np.ndarray
    Ccal: np.ndarray
    sig: Signature

    @property
    def n(self):
        return self.Acal.shape[0]

    def psi(self, z):
        n = self.n
        if n == 0:
            return np.zeros((self.sig.m1, self.sig.m2), dtype=np.complex128)
        return self.Ccal @ la.solve(z * np.eye(n) - self.Acal, self.B)

    def norms(self):
        return la.norm(self.Acal), la.norm(self.B), la.norm(self.Ccal)


def make_realization(Acal, B, Ccal, sig=None):
    B = la.cmatrix(B, name="B")
    n = B.shape[0]
    Acal = la.cmatrix(Acal, name="A_cal")
    if Acal.size != n * n:
        raise SchemaError(f"A_cal must be {n}x{n}, got shape {Acal.shape}")
    Acal = la.cmatrix(np.reshape(Acal, (n, n)), name="A_cal")
    if sig is None:
        sig = Signature(np.shape(np.atleast_2d(Ccal))[0], B.shape[1])
    elif not isinstance(sig, Signature):
        sig = Signature(*sig)
    B = la.cmatrix(B, shape=(n, sig.m2), name="B")
    Ccal = la.cmatrix(Ccal, name="C_cal")
    if Ccal.size != sig.m1 * n:
        raise SchemaError(f"C_cal must be {sig.m1}x{n}, got shape {Ccal.shape}")
    Ccal = la.cmatrix(np.reshape(Ccal, (sig.m1, n)), name="C_cal")
    return Realization(la.frozen(Acal), la.frozen(B), la.frozen(Ccal), sig)


def _krylov_basis(A, B, tol):
    """Orthonormal basis of span{B, AB, A^2 B, ...} (block Arnoldi with SVD rank cuts)."""
    n = A.shape[0]
    scale = max(la.norm(A), la.norm(B))
    V = np.zeros((n, 0), dtype=np.complex128)
    W = B
    while V.shape[1] < n and W.shape[1] > 0:
        for _ in range(2):
            W = W - V @ (V.conj().T @ W)
        if W.size == 0:
            break
        U, s, _ = np.linalg.svd(W, full_matrices=False)
        r = int(np.sum(s > tol * scale)) if scale > 0 else 0
        if r == 0:
            break
        r = min(r, n - V.shape[1])
        V = np.hstack([V, U[:, :r]])
        W = A @ U[:, :r]
    return V


def minimal_reduce(Acal, B, Ccal, tol=MINIMALITY_TOL, sig=None):
    """Controllable-and-observable part of ``(A, B, C)`` (same transfer function)."""
    real = Acal if isinstance(Acal, Realization) else make_realization(Acal, B, Ccal, sig)
    A, B, C = np.asarray(real.Acal), np.asarray(real.B), np.asarray(real.Ccal)
    V = _krylov_basis(A, B, tol)
    A, B, C = V.conj().T @ A @ V, V.conj().T @ B, C @ V
    U = _krylov_basis(A.conj().T, C.conj().T, tol)
    A, B, C = U.conj().T @ A @ U, U.conj().T @ B, C @ U
    return Realization(la.frozen(A), la.frozen(B), la.frozen(C), real.sig)


def is_minimal(real, tol=MINIMALITY_TOL):
    return minimal_reduce(real, None, None, tol).n == real.n


@dataclass(frozen=True)
class ClassMembership:
    """Evidence for membership of a realization in the class of minimal
    realizations of functions contractive on the closed lower half-plane."""
    minimal: bool
    poles_ok: bool
    contractive_on_grid: bool
    max_norm: float
    grid_used: str

    @property
    def member(self):
        return self.minimal and self.poles_ok and self.contractive_on_grid

    @property
    def margin(self):
        return 1.0 - self.max_norm


def default_grid(real, n_real=400):
    ev = la.eigvals(real.Acal)
    span = 1.0 + la.norm(real.Acal)
    t = np.linspace(-np.pi / 2, np.pi / 2, n_real + 2)[1:-1]
    xs = np.concatenate([span * np.tan(t), ev.real, [0.0]])
    ys = np.array([1e-3, 1e-1, 1.0, 10.0]) * span
    lower = (xs[::8, None] - 1j * ys[None, :]).ravel()
    return np.concatenate([xs.astype(np.complex128), lower])


def contractivity_check(real, grid=None, tol=1e-9):
    """Pole location plus ``||psi|| <= 1`` sampled on the real axis and in C-."""
    minimal = is_minimal(real)
    n = real.n
    if n and np.min(la.eigvals(real.Acal).imag) < -POLE_TOL * max(1.0, la.norm(real.Acal)):
        return ClassMembership(minimal, False, False, float("inf"), "pole check failed")
    pts = default_grid(real) if grid is None else np.asarray(grid, dtype=np.complex128).ravel()
    worst = 0.0
    for z in pts:
        if z.imag > 0:
            continue
        try:
            worst = max(worst, la.norm(real.psi(z)))
        except Singular:
            worst = float("inf")
            break
    desc = f"{pts.size} points (real axis and C-)" if grid is None else f"{pts.size} user points"
    return ClassMembership(minimal, True, worst <= 1 + tol, worst, desc)


def require_class(real, grid=None):
    """Raise unless ``real`` has no poles in C- and is contractive on the grid."""
    flags = contractivity_check(real, grid)
    if not flags.poles_ok:
        raise PoleInLowerHalfPlane("realization has an eigenvalue in the open lower half-plane")
    if not flags.contractive_on_grid:
        raise NotContractive(f"sup ||psi|| on the sample grid is {flags.max_norm:.6g} > 1")
    return flags


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    X: np.ndarray
    residual: float
    closed_loop_spectrum: np.ndarray
    stabilizing: bool = True
    ill_conditioned: bool = False
    iterations: int = 0
    notes: tuple = field(default_factory=tuple)


def riccati_residual(real, X):
    """Relative residual of ``X BB* X - i(A* X - X A) + C* C = 0``."""
    A, B, C = real.Acal, real.B, real.Ccal
    R = X @ B @ B.conj().T @ X - 1j * (A.conj().T @ X - X @ A) + C.conj().T @ C
    scale = la.norm(X) ** 2 * la.norm(B) ** 2 + la.norm(A) * la.norm(X) + la.norm(C) ** 2
    return la.norm(R) / scale if scale > 0 else la.norm(R)


def closed_loop(real, X):
    return real.Acal - 1j * real.B @ real.B.conj().T @ X


def newton_riccati(real, X0, max_iter=50, tol=RESIDUAL_TOL):
    """Newton iteration from ``X0``; returns ``(X, residual, iterations)``.

    Each step solves the Lyapunov equation ``K* D + D K = -Res(X)`` with the
    closed loop ``K = iA + BB* X``.  Raises :class:`NewtonDiverged` on a
    singular Lyapunov operator, non-finite iterates or no convergence.
    """
    F = 1j * np.asarray(real.Acal)
    BB = real.B @ real.B.conj().T
    Q = real.Ccal.conj().T @ real.Ccal
    X = la.herm(np.asarray(X0, dtype=np.complex128))
    res = riccati_residual(real, X)
    for it in range(1, max_iter + 1):
        if res <= tol * 1e-2:
            return X, res, it - 1
        K = F + BB @ X
        R = F.conj().T @ X + X @ F + X @ BB @ X + Q
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            D = sla.solve_continuous_lyapunov(K.conj().T, -R)
        if not np.all(np.isfinite(D)):
            raise NewtonDiverged(f"singular Lyapunov step at iteration {it}")
        X_new = la.herm(X + D)
        res_new = riccati_residual(real, X_new)
        if not np.isfinite(res_new) or la.norm(X_new) > 1e150:
            raise NewtonDiverged(f"iterates blew up at iteration {it}")
        if res_new >= res and res <= tol:
            return X, res, it - 1
        X, res = X_new, res_new
    if res > tol:
        raise NewtonDiverged(f"no convergence after {max_iter} iterations (residual {res:.3e})")
    return X, res, max_iter


def solve_riccati(real, newton_steps=8):
    """Stabilizing Hermitian solution by ordered Schur + Newton polish."""
    n = real.n
    if n == 0:
        return RiccatiSolution(np.zeros((0, 0), dtype=np.complex128), 0.0,
                               np.zeros(0, dtype=np.complex128))
    F = 1j * np.asarray(real.Acal)
    BB = real.B @ real.B.conj().T
    Q = real.Ccal.conj().T @ real.Ccal
    H = np.block([[F, BB], [-Q, -F.conj().T]])
    ev = np.sort(np.linalg.eigvals(H).real)
    scale = max(1.0, la.norm(H))
    gap = ev[n] - ev[n - 1]
    ill = bool(ev[n - 1] > -CLOSED_LOOP_TOL * scale or gap < CLOSED_LOOP_TOL * scale)
    threshold = (ev[n - 1] + ev[n]) / 2
    T, Z, sdim = sla.schur(H, output="complex", sort=lambda x: x.real < threshold)
    if sdim != n:
        raise NoStabilizingSolution(f"stable subspace has dimension {sdim}, expected {n}")
    U1, U2 = Z[:n, :n], Z[n:, :n]
    try:
        X = la.solve(U1.T, U2.T).T
    except Singular:
        raise NoStabilizingSolution("stable invariant subspace is not a graph") from None
    X = la.herm(X)
    notes = []
    iters = 0
    try:
        X2, res2, iters = newton_riccati(real, X, max_iter=newton_steps)
        if res2 <= riccati_residual(real, X):
            X = X2
    except NewtonDiverged as exc:
        notes.append(f"newton polish skipped: {exc}")
    res = riccati_residual(real, X)
    if res > ACCEPT_RESIDUAL:
        raise NoStabilizingSolution(f"selected subspace does not solve the equation "
                                    f"(relative residual {res:.3e})")
    spec = la.eigvals(closed_loop(real, X))
    if np.min(spec.imag) < -CLOSED_LOOP_TOL * max(1.0, la.norm(real.Acal)):
        raise NoStabilizingSolution(f"closed loop has eigenvalue with Im = {np.min(spec.imag):.3e}")
    try:
        la.cholesky(X, tol=1e-6)
    except NotPositiveDefinite:
        raise NoStabilizingSolution("stabilizing solution is not positive definite") from None
    if ill:
        warnings.warn("closed-loop spectrum touches the real axis; uniqueness is not certified",
                      IllConditionedSubspace, stacklevel=2)
        notes.append("ill-conditioned subspace")
    return RiccatiSolution(la.frozen(X), res, spec, True, ill, iters, tuple(notes))


def triple_from_realization(real, sol, tol=DEFAULT_TOL):
    """``A = A_cal - i B B* X``, ``S0 = X^{-1}``, ``theta1 = i X^{-1} C*``, ``theta2 = B``."""
    n = real.n
    X = np.asarray(sol.X)
    if n == 0:
        S0 = np.zeros((0, 0))
    else:
        S0 = la.herm(la.chol_solve(la.cholesky(X), np.eye(n, dtype=np.complex128)))
    A = real.Acal - 1j * real.B @ real.B.conj().T @ X
    theta1 = 1j * S0 @ real.Ccal.conj().T
    try:
        return new_admissible_triple(A, S0, theta1, real.B, real.sig, tol)
    except IdentityViolated as exc:
        raise AdmissibilityViolated(str(exc)) from None


def realization_from_triple(triple):
    """The realization of ``psi(z) = phi(-1/z)``: ``{A^x, theta2, i theta1* S0^{-1}}``."""
    S0inv = triple.S0inv if triple.n else np.zeros((0, 0))
    Ccal = 1j * triple.theta1.conj().T @ S0inv
    return Realization(la.frozen(triple.A_cross if triple.n else np.zeros((0, 0))),
                       la.frozen(triple.theta2), la.frozen(Ccal), triple.sig)


@dataclass(frozen=True, eq=False)
class InverseResult:
    realization: Realization
    solution: RiccatiSolution
    triple: object
    potential: object


def inverse_pipeline(real, k_max, tol=DEFAULT_TOL, grid=None):
    reduced = minimal_reduce(real, None, None)
    require_class(reduced, grid)
    sol = solve_riccati(reduced)
    triple = triple_from_realization(reduced, sol, tol)
    pot = potential(triple, k_max, tol)
    return InverseResult(reduced, sol, triple, pot)


def inverse_problem(real, k_max, tol=DEFAULT_TOL, grid=None):
    """Potential ``C_0 .. C_{k_max}`` whose Weyl function ``phi`` has ``phi(-1/z) = psi(z)``."""
    if not isinstance(real, Realization):
        raise SchemaError("inverse_problem expects a Realization")
    return inverse_pipeline(real, k_max, tol, grid).potential
