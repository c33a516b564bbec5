"""Command line front end: ``dirac-gbdt <verb> ...``.

Exit codes: 0 success, 1 malformed input, 2 violated mathematical
precondition (the error class is printed), 3 round-trip above tolerance.
"""
import argparse
import sys

import numpy as np

from . import io
from . import linalg as la
from .errors import DiracError, SchemaError
from .gbdt import DEFAULT_TOL, potential
from .inverse import inverse_pipeline, realization_from_triple
from .sampling import random_property_j
from .stability import PerturbationSpec, StabilityRow, stability_sweep
from .verblunsky import asymptotics_report, rho_from_potential
from .weyl import (WeylEvaluator, disk_transform, has_property_j, nesting_step, weyl_eval)

EXIT_SCHEMA = 1
EXIT_MATH = 2
EXIT_TOLERANCE = 3


def _complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="dirac-gbdt",
                                description="Discrete Dirac systems with rational Weyl functions.")
    sub = p.add_subparsers(dest="verb", required=True)

    def add(name, help_, k_default=50):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--out", help="output path (default: stdout)")
        s.add_argument("--k-max", type=_nonneg_int, default=k_default)
        s.add_argument("--tol", type=_positive, default=DEFAULT_TOL)
        return s

    s = add("direct", "triple -> potential and Verblunsky coefficients")
    s.add_argument("--triple", required=True)
    s.add_argument("--basis", choices=("auto", "eigen", "original"), default="auto")

    s = add("weyl", "triple + grid -> Weyl function CSV")
    s.add_argument("--triple", required=True)
    s.add_argument("--grid", required=True)

    s = add("inverse", "realization -> potential")
    s.add_argument("--realization", required=True)

    s = add("roundtrip", "direct, then inverse of the Weyl realization; compare")
    s.add_argument("--triple", required=True)
    s.add_argument("--check-tol", type=_positive, default=DEFAULT_TOL,
                   help="tolerance of the admissibility and potential checks "
                        "(--tol is the pass threshold for the discrepancy)")

    s = add("asymptotics", "per-k convergence table (CSV) and footer (JSON)", k_default=1000)
    s.add_argument("--triple", required=True)

    s = add("stability", "perturbation sweep (CSV rows, JSON summary)", k_default=100)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--realization")
    g.add_argument("--triple")
    s.add_argument("--deltas", type=_positive, nargs="+", default=[1e-3, 1e-5, 1e-7])
    s.add_argument("--samples", type=int, default=8)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)

    s = add("disks", "nesting and contractivity of Weyl disks at one z", k_default=20)
    s.add_argument("--triple", required=True)
    s.add_argument("--z", type=_complex, required=True)
    s.add_argument("--r-min", type=_nonneg_int, default=1)
    s.add_argument("--samples", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    return p


def _tolerances(args):
    out = {"tol": args.tol, "k_max": args.k_max}
    if getattr(args, "check_tol", None) is not None:
        out["check_tol"] = args.check_tol
    return out


def _emit_json(args, kind, payload, argv):
    io.write_json(args.out, io.envelope(kind, payload, argv, _tolerances(args)))


def _emit_csv(args, columns, rows, argv):
    comments = [f"schema_version={io.SCHEMA_VERSION}", "command=" + " ".join(argv),
                "tolerances=" + " ".join(f"{k}={v!r}" for k, v in _tolerances(args).items())]
    io.write_csv(args.out, columns, rows, comments)


def _sidecar(args):
    return (args.out + ".json") if args.out else None


def cmd_direct(args, argv):
    triple = io.triple_from_json(io.load_json(args.triple), args.tol)
    pot = potential(triple, args.k_max, args.tol, args.basis)
    rhos = [rho_from_potential(C, pot.sig, k) for k, C in enumerate(pot.C)]
    payload = io.potential_to_json(pot)
    payload["rho"] = [la.encode_matrix(r.rho) for r in rhos]
    payload["rho_norm"] = [r.norm for r in rhos]
    _emit_json(args, "potential", payload, argv)
    return 0


def cmd_weyl(args, argv):
    triple = io.triple_from_json(io.load_json(args.triple), args.tol)
    zs = io.grid_from_json(io.load_json(args.grid))
    ev = WeylEvaluator(triple)
    m1, m2 = triple.sig.m1, triple.sig.m2
    cols = ["z_re", "z_im"]
    for i in range(m1):
        for j in range(m2):
            cols += [f"phi{i}{j}_re", f"phi{i}{j}_im"]
    cols.append("norm")
    rows = []
    for z in zs:
        phi = weyl_eval(ev, z)
        row = [z.real, z.imag]
        for x in phi.ravel():
            row += [x.real, x.imag]
        row.append(la.norm(phi))
        rows.append(row)
    _emit_csv(args, cols, rows, argv)
    return 0


def cmd_inverse(args, argv):
    real = io.realization_from_json(io.load_json(args.realization))
    res = inverse_pipeline(real, args.k_max, args.tol)
    payload = io.potential_to_json(res.potential)
    payload["X"] = la.encode_matrix(res.solution.X)
    payload["riccati_residual"] = res.solution.residual
    payload["triple"] = io.triple_to_json(res.triple)
    _emit_json(args, "potential", payload, argv)
    return 0


def cmd_roundtrip(args, argv):
    check = args.check_tol
    triple = io.triple_from_json(io.load_json(args.triple), check)
    direct = potential(triple, args.k_max, check)
    res = inverse_pipeline(realization_from_triple(triple), args.k_max, check)
    disc = max(float(np.abs(a - b).max()) for a, b in zip(direct.C, res.potential.C))
    ok = disc <= args.tol
    _emit_json(args, "roundtrip", {"max_discrepancy": disc, "passed": ok,
                                   "n_reduced": res.realization.n}, argv)
    return 0 if ok else EXIT_TOLERANCE


def cmd_asymptotics(args, argv):
    triple = io.triple_from_json(io.load_json(args.triple), args.tol)
    rep = asymptotics_report(triple, args.k_max, args.tol)
    _emit_csv(args, rep.columns, rep.rows(), argv)
    side = _sidecar(args)
    if side:
        io.write_json(side, io.envelope("asymptotics_footer", rep.footer(), argv,
                                        _tolerances(args)))
    return 0


def cmd_stability(args, argv):
    if args.realization:
        real = io.realization_from_json(io.load_json(args.realization))
    else:
        real = realization_from_triple(io.triple_from_json(io.load_json(args.triple), args.tol))
    spec = PerturbationSpec(min(args.deltas), args.samples, args.seed, args.k_max)
    rep = stability_sweep(real, args.deltas, spec, workers=args.workers, tol=args.tol)
    _emit_csv(args, StabilityRow.columns, [r.as_tuple() for r in rep.rows], argv)
    side = _sidecar(args)
    if side:
        payload = {"seed": spec.seed, "samples": spec.samples, "deltas": list(rep.deltas),
                   "summary": rep.summary(), "median_sup_decreasing": rep.median_sup_decreasing(),
                   "x_ratio_band": rep.x_ratio_band(), "growth_R_at": rep.growth_R_at,
                   "growth_Q_at": rep.growth_Q_at, "X": la.encode_matrix(rep.X)}
        io.write_json(side, io.envelope("stability_summary", payload, argv, _tolerances(args)))
    return 0


def cmd_disks(args, argv):
    triple = io.triple_from_json(io.load_json(args.triple), args.tol)
    z = args.z
    if not z.imag < 0:
        raise SchemaError("--z must lie in the open lower half-plane")
    if args.r_min > args.k_max:
        raise SchemaError("--r-min exceeds --k-max")
    pot = potential(triple, args.k_max + 1, args.tol)
    phi = weyl_eval(WeylEvaluator(triple), z)
    rng = np.random.default_rng(args.seed)
    rows = []
    for sid in range(args.samples):
        P = random_property_j(rng, triple.sig.m1, triple.sig.m2)
        for r in range(args.r_min, args.k_max + 1):
            f = disk_transform(pot, z, r, P)
            Pt = nesting_step(pot, z, r, P)
            nest = float(np.abs(disk_transform(pot, z, r + 1, P) - disk_transform(pot, z, r, Pt)).max())
            rows.append((sid, r, la.norm(f), nest, has_property_j(Pt, triple.sig),
                         la.norm(f - phi)))
    cols = ("sample", "r", "phi_r_norm", "nesting_err", "property_j", "dist_to_phi")
    _emit_csv(args, cols, rows, argv)
    return 0


COMMANDS = {"direct": cmd_direct, "weyl": cmd_weyl, "inverse": cmd_inverse,
            "roundtrip": cmd_roundtrip, "asymptotics": cmd_asymptotics,
            "stability": cmd_stability, "disks": cmd_disks}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.verb](args, ["dirac-gbdt"] + argv)
    except SchemaError as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except DiracError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
