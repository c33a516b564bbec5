"""Perturbation harness for the stability of potential recovery.

A realization in the class is perturbed by a random direction of total size
``delta / 2`` (split evenly over the three matrices), the Riccati equation of
the perturbed realization is solved by Newton from the unperturbed solution,
and both potentials are compared up to ``k_max``.  Every cell
``(delta, sample_id)`` draws its direction from ``default_rng([seed, sample_id])``
so a sample path keeps its direction while ``delta`` shrinks.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import (ClassExitUnavoidable, DiracError, NewtonDiverged, NoStabilizingSolution,
                     SchemaError, SpectrumConflict)
from .gbdt import DEFAULT_TOL, potential
from .inverse import (CLOSED_LOOP_TOL, RESIDUAL_TOL, Realization, RiccatiSolution,
                      closed_loop, contractivity_check, is_minimal, newton_riccati,
                      solve_riccati, triple_from_realization)
from .sampling import complex_gaussian
from .verblunsky import q_sequence, r_sequence

MAX_RESAMPLES = 100
GROWTH_THRESHOLD = 1e6


@dataclass(frozen=True)
class PerturbationSpec:
    delta: float = 1e-6
    samples: int = 8
    seed: int = 0
    k_max: int = 100

    def __post_init__(self):
        if not self.delta > 0:
            raise SchemaError("delta must be positive")
        if self.samples < 1:
            raise SchemaError("samples must be at least 1")
        if self.k_max < 0:
            raise SchemaError("k_max must be nonnegative")


def _unit(M):
    s = la.norm(M)
    return M / s if s > 0 else M


def _direction(rng, real):
    n, m1, m2 = real.n, real.sig.m1, real.sig.m2
    return (_unit(complex_gaussian(rng, n, n)), _unit(complex_gaussian(rng, n, m2)),
            _unit(complex_gaussian(rng, m1, n)))


def perturb_in_class(real, delta, seed, sample_id=0, max_tries=MAX_RESAMPLES, grid=None):
    """Random realization within ``delta / 2`` of ``real`` that is still minimal and contractive.

    Returns ``(perturbed, attempts)``.  The caller is responsible for ``real``
    itself being in the class.
    """
    if not delta > 0:
        raise SchemaError("delta must be positive")
    rng = np.random.default_rng([int(seed), int(sample_id)])
    step = delta / 6
    for attempt in range(1, max_tries + 1):
        dA, dB, dC = _direction(rng, real)
        cand = Realization(la.frozen(real.Acal + step * dA), la.frozen(real.B + step * dB),
                           la.frozen(real.Ccal + step * dC), real.sig)
        if is_minimal(cand) and contractivity_check(cand, grid).member:
            return cand, attempt
    exc = ClassExitUnavoidable(f"{max_tries} perturbations of size {delta:g} all left the class")
    exc.riccati_solvable = _has_hermitian_solution(cand)
    raise exc


def _has_hermitian_solution(real):
    """Whether the Riccati equation still has a Hermitian solution (class-exit telemetry)."""
    try:
        solve_riccati(real)
        return True
    except DiracError:
        return False


def recover_near(real_tilde, X_reference, tol=RESIDUAL_TOL, max_iter=50):
    """Newton on the perturbed Riccati equation started at ``X_reference``.

    The result carries ``stabilizing=False`` when Newton lands on a solution
    whose closed loop leaves the closed upper half-plane.
    """
    X, res, iters = newton_riccati(real_tilde, X_reference, max_iter=max_iter, tol=tol)
    if res > tol:
        raise NewtonDiverged(f"residual {res:.3e} above {tol:.1e}")
    spec = la.eigvals(closed_loop(real_tilde, X)) if real_tilde.n else np.zeros(0)
    scale = max(1.0, la.norm(real_tilde.Acal))
    stabilizing = bool(spec.size == 0 or spec.imag.min() >= -CLOSED_LOOP_TOL * scale)
    notes = () if stabilizing else ("closed loop has eigenvalues in the lower half-plane",)
    return RiccatiSolution(la.frozen(X), res, spec, stabilizing, False, iters, notes)


def growth_flags(triple, k_max, threshold=GROWTH_THRESHOLD):
    """First ``k <= k_max`` with ``lmin(R_k) >= threshold`` (resp. ``Q_k``), or ``None``."""
    out = []
    for build in (r_sequence, q_sequence):
        try:
            lm = build(triple, k_max).lmin
        except SpectrumConflict:
            out.append(None)
            continue
        hit = np.flatnonzero(lm >= threshold)
        out.append(int(hit[0]) if hit.size else None)
    return tuple(out)


@dataclass(frozen=True)
class StabilityRow:
    delta: float
    sample_id: int
    x_err: float
    sup_err: float
    accepted: bool
    head_err: float = math.nan
    tail_ok: bool = True
    stabilizing: bool = True
    attempts: int = 0
    reason: str = ""

    columns = ("delta", "sample_id", "x_err", "sup_err", "accepted", "head_err", "tail_ok",
               "stabilizing", "attempts", "reason")

    def as_tuple(self):
        return tuple(getattr(self, c) for c in self.columns)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    rows: tuple
    spec: PerturbationSpec
    deltas: tuple
    X: np.ndarray
    growth_R_at: int = None
    growth_Q_at: int = None
    notes: tuple = field(default_factory=tuple)

    def accepted(self, delta=None):
        return [r for r in self.rows if r.accepted and (delta is None or r.delta == delta)]

    def summary(self):
        out = []
        for d in sorted(self.deltas, reverse=True):
            acc = self.accepted(d)
            xs = np.array([r.x_err for r in acc])
            ss = np.array([r.sup_err for r in acc])
            out.append({
                "delta": d,
                "accepted": len(acc),
                "rejected": sum(1 for r in self.rows if r.delta == d and not r.accepted),
                "x_err_max": float(xs.max()) if xs.size else None,
                "x_err_median": float(np.median(xs)) if xs.size else None,
                "sup_err_max": float(ss.max()) if ss.size else None,
                "sup_err_median": float(np.median(ss)) if ss.size else None,
                "x_ratio_median": float(np.median(xs / d)) if xs.size else None,
            })
        return out

    def median_sup_decreasing(self):
        """Median sup-error shrinks along the decreasing ``delta`` ladder."""
        meds = [s["sup_err_median"] for s in self.summary()]
        if any(m is None for m in meds):
            return False
        return all(b <= a for a, b in zip(meds, meds[1:]))

    def x_ratio_band(self):
        """Largest ``max/min`` of ``||X - X~|| / delta`` over one sample path."""
        worst = 1.0
        for sid in range(self.spec.samples):
            r = [row.x_err / row.delta for row in self.rows
                 if row.sample_id == sid and row.accepted and row.x_err > 0]
            if len(r) >= 2:
                worst = max(worst, max(r) / min(r))
        return worst


def _cell(real, X, pot, delta, sid, spec, head_k, tol, grid):
    try:
        tilde, attempts = perturb_in_class(real, delta, spec.seed, sid, grid=grid)
    except ClassExitUnavoidable as exc:
        return StabilityRow(delta, sid, math.nan, math.nan, False, reason=type(exc).__name__,
                            attempts=MAX_RESAMPLES)
    try:
        sol = recover_near(tilde, X)
        if not sol.stabilizing:
            return StabilityRow(delta, sid, la.norm(sol.X - X), math.nan, False, stabilizing=False,
                                attempts=attempts, reason=NoStabilizingSolution.__name__)
        triple = triple_from_realization(tilde, sol, tol)
        pot_t = potential(triple, spec.k_max, tol)
    except DiracError as exc:
        return StabilityRow(delta, sid, math.nan, math.nan, False, attempts=attempts,
                            reason=type(exc).__name__)
    I = np.eye(real.sig.m)
    errs = np.array([la.norm(a - b) for a, b in zip(pot.C, pot_t.C)])
    tail_ok = True
    for k in range(head_k + 1, spec.k_max + 1):
        bound = 2 * (la.norm(pot.C[k] - I) + la.norm(pot_t.C[k] - I))
        if errs[k] > bound * (1 + 1e-12) + 1e-15:
            tail_ok = False
            break
    return StabilityRow(delta, sid, la.norm(sol.X - X), float(errs.max()), True,
                        head_err=float(errs[:head_k + 1].max()), tail_ok=tail_ok,
                        attempts=attempts)


def stability_sweep(real, deltas, spec=None, workers=None, tol=DEFAULT_TOL, grid=None):
    """Perturb-and-recover over every ``(delta, sample_id)`` cell.

    Failed cells become rejected rows; the sweep itself only fails when the
    unperturbed realization has no stabilizing solution.  Rows are ordered by
    decreasing ``delta`` then ``sample_id`` regardless of ``workers``.
    """
    spec = PerturbationSpec() if spec is None else spec
    deltas = tuple(float(d) for d in deltas)
    if not deltas or any(not d > 0 for d in deltas):
        raise SchemaError("deltas must be a nonempty list of positive numbers")
    sol = solve_riccati(real)
    X = np.asarray(sol.X)
    triple = triple_from_realization(real, sol, tol)
    pot = potential(triple, spec.k_max, tol)
    gR, gQ = growth_flags(triple, spec.k_max)
    flagged = [g for g in (gR, gQ) if g is not None]
    head_k = min(flagged) if flagged else spec.k_max
    cells = [(d, sid) for d in sorted(set(deltas), reverse=True) for sid in range(spec.samples)]

    def run(cell):
        return _cell(real, X, pot, cell[0], cell[1], spec, head_k, tol, grid)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    rows.sort(key=lambda r: (-r.delta, r.sample_id))
    return StabilityReport(tuple(rows), spec, tuple(sorted(set(deltas), reverse=True)),
                           la.frozen(X), gR, gQ, tuple(sol.notes))
