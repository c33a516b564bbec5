import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirac_gbdt import linalg as la
from dirac_gbdt.errors import (IdentityDrift, IdentityViolated, S0NotPositive, SchemaError,
                               Singular, SingularA)
from dirac_gbdt.gbdt import (GbdtRecursion, Signature, check_potential_matrix, dualize,
                             fundamental_explicit, fundamental_product, fundamental_solutions,
                             identity_residual, initial_state, new_admissible_triple, potential,
                             step, transfer)

from support import SIG11, SQRT2, triple_from_seed

seeds = st.integers(0, 2**32 - 1)
C0_T1 = np.array([[3, 2 * SQRT2], [2 * SQRT2, 3]])


# ---- construction --------------------------------------------------------

def test_examples_are_admissible(t0, t1):
    assert t0.residual < 1e-15 and t1.residual < 1e-15
    assert t1.n == 1 and t1.sig == SIG11


def test_identity_violation_reports_residual():
    with pytest.raises(IdentityViolated) as info:
        new_admissible_triple([[1j]], [[1]], [[1]], [[1]], SIG11)
    assert info.value.residual > 0.5


def test_singular_a_and_indefinite_s0():
    with pytest.raises(SingularA):
        new_admissible_triple([[0]], [[1]], [[0]], [[0]], SIG11)
    with pytest.raises(S0NotPositive):
        new_admissible_triple([[1j]], [[-1]], [[0]], [[SQRT2]], SIG11)


def test_bad_shapes_and_signature():
    with pytest.raises(SchemaError):
        Signature(0, 1)
    with pytest.raises(SchemaError):
        new_admissible_triple([[1j, 0]], [[1]], [[2]], [[SQRT2]], SIG11)
    with pytest.raises(SchemaError):
        new_admissible_triple([[1j]], [[1]], [[2]], [[SQRT2]], SIG11, tol=0)


def test_triple_is_immutable(t1):
    with pytest.raises(ValueError):
        t1.A[0, 0] = 2


# ---- recursion -----------------------------------------------------------

def test_step_scalar_examples(t0, t1):
    s1 = step(initial_state(t1), t1)
    assert np.allclose(s1.Pi_k, [[4, 0]]) and np.allclose(s1.S_k, [[8]])
    s2 = step(s1, t1)
    assert np.allclose(s2.Pi_k, [[8, 0]]) and np.allclose(s2.S_k, [[32]])
    f1 = step(initial_state(t0), t0)
    assert np.allclose(f1.Pi_k, [[2 * SQRT2, 0]]) and np.allclose(f1.S_k, [[4]])


def test_step_renormalized_matches_raw(t1):
    raw = ren = initial_state(t1)
    for _ in range(6):
        raw, ren = step(raw, t1), step(ren, t1, renormalize=True)
    assert np.allclose(ren.S_k, raw.S_k) and np.allclose(ren.Pi_k, raw.Pi_k)


def test_raw_recursion_overflow_is_drift(t1):
    state = initial_state(t1)
    with pytest.raises(IdentityDrift):
        for _ in range(1000):
            state = step(state, t1)


def test_k_max_cap(t1):
    with pytest.raises(SchemaError):
        next(GbdtRecursion(t1).states(-1))
    with pytest.raises(SchemaError):
        next(GbdtRecursion(t1).states(10**6 + 1))


@given(seeds)
def test_identity_preserved_raw(seed):
    # the raw recursion squares cond(S_k) against the spread of |1 +- i/w|;
    # it is only meant for short horizons
    tr = triple_from_seed(seed)
    state = initial_state(tr)
    for _ in range(8):
        state = step(state, tr, renormalize=True)
        assert identity_residual(tr.A, state.S, state.Pi, tr.sig.jdiag) <= 1e-10 * max(1, state.k)


@given(seeds)
def test_identity_preserved_engine(seed):
    tr = triple_from_seed(seed)
    eng = GbdtRecursion(tr)
    for state in eng.states(200):
        assert identity_residual(eng.A, state.S, state.Pi, tr.sig.jdiag) <= 1e-10


@given(seeds, st.integers(0, 12))
def test_closed_form_of_pi(seed, k):
    # Pi_k = [(I + iA^-1)^k theta1, (I - iA^-1)^k theta2]
    tr = triple_from_seed(seed)
    n = tr.n
    state = initial_state(tr)
    for _ in range(k):
        state = step(state, tr)
    T = np.linalg.matrix_power(np.eye(n) + 1j * tr.Ainv, k)
    U = np.linalg.matrix_power(np.eye(n) - 1j * tr.Ainv, k)
    closed = np.hstack([T @ tr.theta1, U @ tr.theta2])
    assert la.norm(state.Pi_k - closed) <= 1e-9 * max(1, la.norm(closed))


def test_engine_bases_agree():
    tr = triple_from_seed(7)
    a = list(GbdtRecursion(tr, basis="eigen").grams(4))
    b = list(GbdtRecursion(tr, basis="original").grams(4))
    assert max(la.norm(x - y) for x, y in zip(a, b)) <= 1e-9
    with pytest.raises(ValueError):
        GbdtRecursion(tr, basis="polar")


# ---- potential -----------------------------------------------------------

def test_potential_scalar(t0, t1):
    pot = potential(t1, 1)
    assert np.allclose(pot[0], C0_T1, atol=1e-13)
    assert np.allclose(pot[1], np.eye(2), atol=1e-13)
    free = potential(t0, 3)
    assert all(np.allclose(C, np.eye(2), atol=1e-14) for C in free.C)
    assert len(free) == 4 and free.k_max == 3


@given(seeds)
def test_potential_invariants(seed):
    tr = triple_from_seed(seed)
    pot = potential(tr, 200)
    j = tr.sig.j
    for C in pot.C:
        assert la.is_positive_definite(C)
        assert la.norm(C @ j @ C - j) <= 1e-9
        assert la.lmin(C - j) >= -1e-9 and la.lmin(C + j) >= -1e-9


def test_single_matrix_potential():
    tr = triple_from_seed(3)
    pot = potential(tr, 0)
    assert len(pot) == 1
    check_potential_matrix(pot[0], tr.sig)


def test_check_potential_matrix_rejects():
    from dirac_gbdt.errors import PotentialInvariantViolated
    with pytest.raises(PotentialInvariantViolated):
        check_potential_matrix(np.diag([2.0, 1.0]), SIG11)
    with pytest.raises(PotentialInvariantViolated):
        check_potential_matrix(-np.eye(2), SIG11)


# ---- transfer matrix -----------------------------------------------------

def test_transfer_scalar(t1):
    expected = np.eye(2) - (1j / (1 + 1j)) * np.array([[4, 2 * SQRT2], [-2 * SQRT2, -2]])
    assert np.allclose(transfer(t1, 0, -1), expected)
    assert np.allclose(transfer(t1, 0, 1e12), np.eye(2), atol=1e-10)
    with pytest.raises(Singular):
        transfer(t1, 0, 1j)


def _lambdas(rng, tr, count):
    ev = la.eigvals(tr.A)
    out = []
    while len(out) < count:
        lam = complex(*rng.normal(0, 2, 2))
        if np.min(np.abs(ev - lam)) > 0.1 and abs(lam) > 0.1:
            out.append(lam)
    return out


@given(seeds, st.integers(0, 20))
def test_transfer_identities(seed, k):
    tr = triple_from_seed(seed)
    rng = np.random.default_rng(seed)
    eng = GbdtRecursion(tr)
    states = list(eng.states(k + 1))
    sk, sk1 = states[k], states[k + 1]
    j = tr.sig.j
    I = np.eye(tr.sig.m)
    Ck = potential(tr, k)[k]
    n = tr.n
    for lam in _lambdas(rng, tr, 10):
        w = eng.transfer(sk, lam)
        # step relation between consecutive transfer matrices
        lhs = eng.transfer(sk1, lam) @ (I - (1j / lam) * j)
        rhs = (I - (1j / lam) * j @ Ck) @ w
        assert la.norm(lhs - rhs) <= 1e-9 * max(1, la.norm(rhs))
        # j-property
        wb = eng.transfer(sk, np.conj(lam))
        assert la.norm(w @ j @ wb.conj().T - j) <= 1e-9 * max(1, la.norm(w) ** 2)
        # resolvent form of w* j w - j
        Ry = la.whiten(sk.S_factor, la.solve(eng.A - lam * np.eye(n), sk.Pi))
        extra = 1j * (lam - np.conj(lam)) * Ry.conj().T @ Ry
        resid = w.conj().T @ j @ w - j + extra
        assert la.norm(resid) <= 1e-9 * max(1, la.norm(w) ** 2)


# ---- fundamental solution ------------------------------------------------

def test_fundamental_product_examples(t0, t1):
    p1 = potential(t1, 1)
    assert np.allclose(fundamental_product(p1, -0.5j, 1), [[2.5, SQRT2], [-SQRT2, -0.5]])
    assert np.allclose(fundamental_product(p1, 0.3 - 1j, 0), np.eye(2))
    z = 0.4 - 0.7j
    p0 = potential(t0, 5)
    assert np.allclose(fundamental_product(p0, z, 5), np.diag([(1 + 1j * z) ** 5, (1 - 1j * z) ** 5]))
    with pytest.raises(SchemaError):
        fundamental_product(p0, z, 7)


def test_fundamental_explicit_examples(t0, t1):
    z = 0.4 - 0.7j
    assert np.allclose(fundamental_explicit(t1, z, 0), np.eye(2))
    assert np.allclose(fundamental_explicit(t0, z, 4), np.diag([(1 + 1j * z) ** 4, (1 - 1j * z) ** 4]))
    assert np.allclose(fundamental_explicit(t1, -0.5j, 1), fundamental_product(potential(t1, 1), -0.5j, 1))
    with pytest.raises(Singular):
        fundamental_explicit(t1, 0, 1)
    with pytest.raises(Singular):
        fundamental_explicit(t1, 1j, 1)  # -1/z = i is the eigenvalue of A


@given(seeds, st.integers(0, 50), st.floats(-2, 2), st.floats(-2, 2))
def test_fundamental_routes_agree(seed, k, x, y):
    tr = triple_from_seed(seed)
    z = complex(x, y)
    if abs(z) < 0.1 or np.min(np.abs(la.eigvals(tr.A) + 1 / z)) < 0.1:
        return
    W1 = fundamental_product(potential(tr, k), z, k)
    W2 = fundamental_explicit(tr, z, k)
    assert la.norm(W1 - W2) <= 1e-8 * max(1, la.norm(W1))


def test_fundamental_solutions_iterates(t1):
    pot = potential(t1, 4)
    Ws = list(fundamental_solutions(pot, 0.2 - 0.3j))
    assert len(Ws) == 6
    assert np.allclose(Ws[3], fundamental_product(pot, 0.2 - 0.3j, 3))


# ---- dual system ---------------------------------------------------------

def test_dualize_examples(t0, t1):
    p1 = potential(t1, 2)
    d = dualize(p1)
    assert d.sig == SIG11
    assert np.allclose(d[0], C0_T1)
    assert all(np.allclose(C, np.eye(2)) for C in dualize(potential(t0, 2)).C)


@given(seeds)
def test_dual_system(seed):
    tr = triple_from_seed(seed)
    pot = potential(tr, 10)
    d = dualize(pot)
    assert d.sig == tr.sig.dual()
    back = dualize(d)
    assert all(np.allclose(a, b) for a, b in zip(back.C, pot.C))
    J = tr.sig.J
    jt = -J @ tr.sig.j @ J.conj().T
    assert np.allclose(jt, d.sig.j)
    for C in d.C:
        assert la.norm(C @ jt @ C - jt) <= 1e-9
    z = 0.3 - 0.6j
    for k in (1, 5, 10):
        lhs = fundamental_product(d, z, k)
        rhs = J @ fundamental_product(pot, -z, k) @ J.conj().T
        assert la.norm(lhs - rhs) <= 1e-10 * max(1, la.norm(rhs))
