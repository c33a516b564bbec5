import warnings

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from dirac_gbdt import linalg as la
from dirac_gbdt.errors import (AdmissibilityViolated, IllConditionedSubspace, NewtonDiverged,
                               NoStabilizingSolution, NotContractive, PoleInLowerHalfPlane,
                               SchemaError)
from dirac_gbdt.gbdt import potential
from dirac_gbdt.inverse import (RiccatiSolution, closed_loop, contractivity_check, inverse_pipeline,
                                inverse_problem, is_minimal, make_realization, minimal_reduce,
                                newton_riccati, realization_from_triple, riccati_residual,
                                solve_riccati, triple_from_realization)
from dirac_gbdt.weyl import WeylEvaluator, weyl_eval

from support import SQRT2, lower_points, random_triples, triple_from_seed

seeds = st.integers(0, 2**32 - 1)


def care_oracle(real):
    """Stabilizing solution through scipy's CARE solver (``X = -Y``)."""
    Q = real.Ccal.conj().T @ real.Ccal
    Y = sla.solve_continuous_are(1j * real.Acal, real.B, -Q, np.eye(real.B.shape[1]))
    return -Y


# ---- reduction -----------------------------------------------------------

def test_minimal_scalar_unchanged(fx):
    red = minimal_reduce(fx, None, None)
    assert red.n == 1 and is_minimal(fx)
    assert red.psi(0.3 - 2j) == pytest.approx(fx.psi(0.3 - 2j))


def test_uncontrollable_state_removed():
    red = minimal_reduce(np.diag([3j, 5j]), [[SQRT2], [0]], [[2j, 7]])
    assert red.n == 1
    for z in (1 - 1j, -2j, 4):
        assert red.psi(z)[0, 0] == pytest.approx(2j * SQRT2 / (z - 3j))


def test_zero_output_reduces_to_nothing():
    red = minimal_reduce([[3j]], [[SQRT2]], [[0]])
    assert red.n == 0
    assert np.allclose(red.psi(1 - 1j), 0)


@given(seeds)
def test_reduction_preserves_transfer_function(seed):
    rng = np.random.default_rng(seed)
    # pad a minimal system with an uncontrollable and an unobservable state
    tr = triple_from_seed(seed, n_max=4)
    base = realization_from_triple(tr)
    k = base.n
    A = np.zeros((k + 2, k + 2), dtype=complex)
    A[:k, :k] = base.Acal
    A[k:, k:] = np.diag(rng.normal(size=2) + 1j)
    A[:k, k] = rng.normal(size=k)
    B = np.vstack([base.B, np.zeros((1, base.sig.m2)), rng.normal(size=(1, base.sig.m2))])
    C = np.hstack([base.Ccal, rng.normal(size=(base.sig.m1, 1)), np.zeros((base.sig.m1, 1))])
    full = make_realization(A, B, C, base.sig)
    red = minimal_reduce(full, None, None)
    assert red.n == k
    for z in lower_points(rng, 20):
        assert np.abs(red.psi(z) - full.psi(z)).max() <= 1e-8


def test_make_realization_shapes():
    with pytest.raises(SchemaError):
        make_realization([[1j, 0], [0, 1j]], [[1], [1]], [[1, 2, 3]])
    with pytest.raises(SchemaError):
        make_realization([[1j, 0]], [[1], [1]], [[1, 2]])


# ---- class membership ----------------------------------------------------

def test_contractivity_examples(fx):
    ok = contractivity_check(fx)
    assert ok.member and ok.max_norm <= 2 * SQRT2 / 3 + 1e-12
    pole = contractivity_check(make_realization([[-3j]], [[SQRT2]], [[2j]]))
    assert not pole.poles_ok and not pole.member
    big = contractivity_check(make_realization([[3j]], [[SQRT2]], [[4j]]))
    assert big.poles_ok and not big.contractive_on_grid
    assert big.max_norm >= 4 * SQRT2 / 3 - 1e-9


def test_custom_grid_is_reported(fx):
    flags = contractivity_check(fx, grid=[0, 1, -1j])
    assert "3 user points" in flags.grid_used


def test_pipeline_rejects_outside_class():
    with pytest.raises(PoleInLowerHalfPlane):
        inverse_problem(make_realization([[-3j]], [[SQRT2]], [[2j]]), 3)
    with pytest.raises(NotContractive):
        inverse_problem(make_realization([[3j]], [[SQRT2]], [[4j]]), 3)
    with pytest.raises(SchemaError):
        inverse_problem("not a realization", 3)


# ---- Riccati -------------------------------------------------------------

def test_riccati_scalar(fx):
    sol = solve_riccati(fx)
    assert sol.X[0, 0] == pytest.approx(1.0, abs=1e-14)
    assert sol.closed_loop_spectrum[0] == pytest.approx(1j, abs=1e-14)
    assert sol.residual <= 1e-14 and sol.stabilizing and not sol.ill_conditioned


def test_riccati_empty():
    sol = solve_riccati(minimal_reduce([[3j]], [[SQRT2]], [[0]]))
    assert sol.X.shape == (0, 0)


def test_riccati_no_real_root():
    # 2X^2 - 6X + 16 = 0 has no real solution
    with pytest.raises(NoStabilizingSolution):
        solve_riccati(make_realization([[3j]], [[SQRT2]], [[4j]]))


def test_riccati_boundary_warns():
    # |c|^2 = 4.5: double root X = 1.5, closed loop on the real axis
    real = make_realization([[3j]], [[SQRT2]], [[np.sqrt(4.5)]])
    with pytest.warns(IllConditionedSubspace):
        sol = solve_riccati(real)
    assert sol.ill_conditioned
    assert sol.X[0, 0].real == pytest.approx(1.5, abs=1e-6)


@given(seeds)
def test_riccati_matches_generating_triple(seed):
    tr = triple_from_seed(seed)
    real = realization_from_triple(tr)
    sol = solve_riccati(real)
    S0inv = np.linalg.inv(tr.S0)
    assert la.norm(sol.X - S0inv) <= 1e-8 * max(1, la.norm(S0inv))
    assert np.array_equal(sol.X, sol.X.conj().T)
    assert sol.residual <= 1e-10
    assert np.min(sol.closed_loop_spectrum.imag) >= -1e-8
    assert la.lmin(sol.X) > 0
    assert la.norm(sol.X - care_oracle(real)) <= 1e-7 * max(1, la.norm(S0inv))


@given(seeds)
def test_newton_uniqueness_probe(seed):
    tr = triple_from_seed(seed)
    real = realization_from_triple(tr)
    X = solve_riccati(real).X
    rng = np.random.default_rng(seed)
    for _ in range(5):
        E = rng.normal(size=X.shape) + 1j * rng.normal(size=X.shape)
        X0 = X + 1e-3 * la.norm(X) * (E + E.conj().T) / 2
        Xn, res, _ = newton_riccati(real, X0)
        assert la.norm(Xn - X) <= 1e-8 * max(1, la.norm(X))


def test_newton_diverges_without_solution():
    real = make_realization([[3j]], [[SQRT2]], [[4j]])
    with pytest.raises(NewtonDiverged):
        newton_riccati(real, np.eye(1), max_iter=20)


# ---- triple construction -------------------------------------------------

def test_triple_from_scalar_realization(fx, t1):
    tr = triple_from_realization(fx, solve_riccati(fx))
    for a, b in ((tr.A, t1.A), (tr.S0, t1.S0), (tr.theta1, t1.theta1), (tr.theta2, t1.theta2)):
        assert np.allclose(a, b, atol=1e-14)


def test_wrong_x_is_not_admissible(fx):
    bad = RiccatiSolution(np.array([[3.0]]), riccati_residual(fx, np.array([[3.0]])), np.array([0j]))
    with pytest.raises(AdmissibilityViolated):
        triple_from_realization(fx, bad)


def test_nonstabilizing_root_still_admissible(fx):
    X = np.array([[2.0]])
    assert riccati_residual(fx, X) <= 1e-15
    assert closed_loop(fx, X)[0, 0] == pytest.approx(-1j)
    tr = triple_from_realization(fx, RiccatiSolution(X, 0.0, np.array([-1j]), stabilizing=False))
    assert tr.residual <= 1e-12


def test_empty_realization_gives_free_system():
    res = inverse_pipeline(make_realization([[3j]], [[SQRT2]], [[0]]), 4)
    assert res.triple.n == 0
    assert all(np.allclose(C, np.eye(2)) for C in res.potential.C)


@given(seeds)
def test_conjugation_identity(seed):
    # X^{-1} A_cal* X - A + i theta1 theta1* X = 0
    tr = triple_from_seed(seed)
    real = realization_from_triple(tr)
    X = solve_riccati(real).X
    built = triple_from_realization(real, solve_riccati(real))
    lhs = np.linalg.solve(X, real.Acal.conj().T @ X) - built.A + 1j * built.theta1 @ built.theta1.conj().T @ X
    assert la.norm(lhs) <= 1e-9 * max(1, la.norm(real.Acal) * np.linalg.cond(X))


# ---- full pipeline -------------------------------------------------------

def test_inverse_scalar(fx):
    pot = inverse_problem(fx, 3)
    assert np.allclose(pot[0], [[3, 2 * SQRT2], [2 * SQRT2, 3]], atol=1e-12)
    assert all(np.allclose(C, np.eye(2), atol=1e-12) for C in pot.C[1:])


@given(seeds)
def test_round_trip_random(seed):
    tr = triple_from_seed(seed)
    res = inverse_pipeline(realization_from_triple(tr), 50)
    direct = potential(tr, 50)
    assert max(la.norm(a - b) for a, b in zip(direct.C, res.potential.C)) <= 1e-6
    ev = WeylEvaluator(res.triple)
    real = realization_from_triple(tr)
    for z in lower_points(np.random.default_rng(seed), 20):
        assert np.abs(weyl_eval(ev, -1 / z) - real.psi(z)).max() <= 1e-8


def test_round_trip_fixed_batch():
    worst = 0.0
    for tr in random_triples(10):
        res = inverse_pipeline(realization_from_triple(tr), 20)
        direct = potential(tr, 20)
        worst = max(worst, max(la.norm(a - b) for a, b in zip(direct.C, res.potential.C)))
    assert worst <= 1e-6


def test_warning_free_on_generic_input(fx):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_riccati(fx)
