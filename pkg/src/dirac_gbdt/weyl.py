"""Weyl function of a GBDT system and the Weyl-disk machinery.

The Weyl function on the lower half-plane is

    phi(z) = -i z theta1* S0^{-1} (I + z A^x)^{-1} theta2,   A^x = A + i theta2 theta2* S0^{-1}

and equals ``b(-1/z) d(-1/z)^{-1}`` for the block partition of ``w_A(0, .)``.
The remaining functions check its defining property directly on a computed
potential: bounded weighted sums of ``W_k* C_k W_k`` along ``[phi; I]``,
divergence along ``[I; 0]``, and the nested linear-fractional disks.
"""
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import (BoundViolated, ContractivityViolated, DegeneratePencil,
                     PoleInLowerHalfPlane, SchemaError, Singular)
from .gbdt import GbdtRecursion, dirac_factor, fundamental_product

CONTRACTIVITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class WeylEvaluator:
    triple: object
    Across: np.ndarray = field(init=False)
    left: np.ndarray = field(init=False)

    def __post_init__(self):
        t = self.triple
        object.__setattr__(self, "Across", la.frozen(t.A_cross))
        # theta1* S0^{-1}, shared by every evaluation point
        object.__setattr__(self, "left", la.frozen(t.theta1.conj().T @ t.S0inv))


def weyl_eval(ev, z, check=True):
    """``phi(z)`` by the closed formula.

    For ``Im z < 0`` a pole raises :class:`PoleInLowerHalfPlane` and
    ``||phi(z)|| > 1`` raises :class:`ContractivityViolated` (with ``check``).
    """
    t = ev.triple
    z = complex(z)
    if t.n == 0 or z == 0:
        return np.zeros((t.sig.m1, t.sig.m2), dtype=np.complex128)
    try:
        R = la.solve(np.eye(t.n) + z * ev.Across, t.theta2)
    except Singular:
        if z.imag < 0:
            raise PoleInLowerHalfPlane(f"phi has a pole at z={z} in the lower half-plane") from None
        raise
    phi = -1j * z * ev.left @ R
    if check and z.imag < 0:
        nrm = la.norm(phi)
        if nrm > 1 + CONTRACTIVITY_TOL:
            raise ContractivityViolated(f"||phi({z})|| = {nrm:.12g} > 1")
    return phi


def weyl_grid(ev, zs, check=True):
    return [weyl_eval(ev, z, check) for z in zs]


def weyl_via_blocks(ev, z):
    """``b(l) d(l)^{-1}`` at ``l = -1/z`` from ``w_A(0, l) = [[a, b], [c, d]]``."""
    t = ev.triple
    z = complex(z)
    if z == 0:
        raise Singular("z = 0 is not admissible for the block route")
    m1 = t.sig.m1
    eng = GbdtRecursion(t, basis="original")
    w = eng.transfer(eng.state_at(0), -1 / z)
    b, d = w[:m1, m1:], w[m1:, m1:]
    return la.solve(d.T, b.T).T


@dataclass(frozen=True, eq=False)
class SummabilityProbe:
    z: complex
    q: float
    qtilde: float
    bound: float
    partial_sums: tuple


def weight_q(z):
    return 1.0 / (1.0 + abs(z) ** 2)


def weight_qtilde(z):
    """``1 + |z|^2 + i(z - conj z)``, positive on the lower half-plane."""
    return (1.0 + abs(z) ** 2 + (1j * (z - np.conj(z)))).real


def saturation_bound(z):
    """``i (1 + |z|^2) / (conj z - z)``, real and positive for ``Im z < 0``."""
    return (1j * (1 + abs(z) ** 2) / (np.conj(z) - z)).real


def _lower(z):
    z = complex(z)
    if not z.imag < 0:
        raise SchemaError(f"z must lie in the open lower half-plane, got {z}")
    return z


def summability_partial(pot, phi_z, z, r, tol=1e-9):
    """Partial sums ``sum_{k<=s} q^k [phi* I] W_k* C_k W_k [phi; I]`` for ``s = 0..r``.

    Raises :class:`BoundViolated` as soon as a partial sum exceeds the
    saturation bound ``i(1+|z|^2)/(conj z - z)`` by more than ``tol`` (relative).
    """
    z = _lower(z)
    if r > len(pot.C) - 1:
        raise SchemaError(f"r={r} exceeds the potential length {len(pot.C) - 1}")
    m2 = pot.sig.m2
    q = weight_q(z)
    bound = saturation_bound(z)
    col = np.vstack([la.cmatrix(phi_z, shape=(pot.sig.m1, m2), name="phi"), np.eye(m2)])
    total = np.zeros((m2, m2), dtype=np.complex128)
    sums = []
    v = col
    for k in range(r + 1):
        total = total + q ** k * (v.conj().T @ pot.C[k] @ v)
        total = la.herm(total)
        sums.append(la.frozen(total))
        top = np.linalg.eigvalsh(total)[-1]
        if top > bound * (1 + tol):
            raise BoundViolated(f"partial sum {k} has eigenvalue {top:.12g} > bound {bound:.12g}",
                                r=k, excess=top - bound)
        v = dirac_factor(pot.C[k], z, pot.sig) @ v
    return SummabilityProbe(z, q, weight_qtilde(z), bound, tuple(sums))


def divergence_check(pot, z, r, tol=1e-9):
    """Top-left block of ``sum_{k<=r} q^k W_k* C_k W_k``.

    Asserts the block is ``>= (s+1) I`` for every prefix ``s <= r``.
    """
    z = _lower(z)
    if r > len(pot.C) - 1:
        raise SchemaError(f"r={r} exceeds the potential length {len(pot.C) - 1}")
    m1 = pot.sig.m1
    q = weight_q(z)
    total = np.zeros((m1, m1), dtype=np.complex128)
    v = np.vstack([np.eye(m1), np.zeros((pot.sig.m2, m1))])
    for k in range(r + 1):
        total = la.herm(total + q ** k * (v.conj().T @ pot.C[k] @ v))
        assert la.lmin(total) >= (k + 1) * (1 - tol), f"divergence bound violated at r={k}"
        v = dirac_factor(pot.C[k], z, pot.sig) @ v
    return total


def has_property_j(P, sig, tol=1e-9):
    P = np.asarray(P)
    G = P.conj().T @ P
    if la.lmin(G) <= tol * max(1.0, la.norm(G)):
        return False
    return np.linalg.eigvalsh(la.herm(P.conj().T @ (sig.jdiag[:, None] * P)))[-1] <= tol * la.norm(G)


@dataclass(frozen=True, eq=False)
class PropertyJMatrix:
    P: np.ndarray
    z: complex


def inverse_fundamental_apply(pot, z, r, P):
    """``W_r(z)^{-1} P`` by back-substitution through the factors."""
    Y = np.asarray(P, dtype=np.complex128)
    for k in reversed(range(r)):
        Y = la.solve(dirac_factor(pot.C[k], z, pot.sig), Y)
    return Y


def disk_transform(pot, z, r, P):
    """``phi_r(z, P) = [I 0] W_r^{-1} P ([0 I] W_r^{-1} P)^{-1}``."""
    z = _lower(z)
    if abs(z + 1j) < 1e-14:
        raise SchemaError("z = -i is excluded (W_r is singular there)")
    if isinstance(P, PropertyJMatrix):
        P = P.P
    m1 = pot.sig.m1
    P = la.cmatrix(P, shape=(pot.sig.m, pot.sig.m2), name="P")
    try:
        Y = inverse_fundamental_apply(pot, z, r, P)
    except Singular:
        raise DegeneratePencil(f"W_{r}(z) is not invertible at z={z}") from None
    top, bot = Y[:m1], Y[m1:]
    try:
        return la.solve(bot.T, top.T).T
    except Singular:
        raise DegeneratePencil("[0 I] W_r^{-1} P is singular; P lacks property-j") from None


def nesting_step(pot, z, r, P):
    """``(I + iz j C_r)^{-1} P``: the parameter that moves ``phi_{r+1}`` to level ``r``."""
    return la.solve(dirac_factor(pot.C[r], z, pot.sig), np.asarray(P, dtype=np.complex128))


def disk_parameter_of(pot, z, r, phi):
    """``W_r(z) [phi; I]``, the property-j parameter that reproduces ``phi`` at level ``r``."""
    return fundamental_product(pot, z, r) @ np.vstack([phi, np.eye(pot.sig.m2)])
