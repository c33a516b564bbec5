"""Perturb-and-recover sweep over a decade ladder of delta.

Runs ``stability_sweep`` on the two-state fixture realization and on a few
random realizations, printing the per-delta summary (median and max of
||X - X~|| and of sup_k ||C_k - C~_k||).  A finite sweep can refute stability
of recovery but never certify it.

    python scripts/stability_experiment.py --random 5 --samples 8
"""
import argparse
import time

import numpy as np

from dirac_gbdt.inverse import make_realization, realization_from_triple
from dirac_gbdt.sampling import random_admissible_triple, random_signature_dims
from dirac_gbdt.stability import PerturbationSpec, stability_sweep


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--random", type=int, default=5, help="number of random realizations")
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--k-max", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args(argv)

    deltas = [10.0 ** -e for e in range(3, 8)]
    spec = PerturbationSpec(samples=args.samples, seed=args.seed, k_max=args.k_max)
    rng = np.random.default_rng(args.seed)
    reals = [("fixture", make_realization([[3j]], [[np.sqrt(2)]], [[2j]]))]
    for i in range(args.random):
        n, m1, m2 = random_signature_dims(rng)
        reals.append((f"random {i} (n={n}, m1={m1}, m2={m2})",
                      realization_from_triple(random_admissible_triple(rng, n, m1, m2))))
    for name, real in reals:
        t = time.perf_counter()
        rep = stability_sweep(real, deltas, spec, workers=args.workers)
        print(f"== {name}: {time.perf_counter() - t:.1f} s, growth flags R={rep.growth_R_at} "
              f"Q={rep.growth_Q_at}, X-ratio band {rep.x_ratio_band():.3f}, "
              f"median sup decreasing: {rep.median_sup_decreasing()}")
        print(f"{'delta':>8} {'acc':>4} {'rej':>4} {'x_med':>10} {'x_max':>10} {'sup_med':>10} {'sup_max':>10}")
        for s in rep.summary():
            fmt = lambda v: f"{v:>10.3e}" if v is not None else f"{'-':>10}"
            print(f"{s['delta']:>8.0e} {s['accepted']:>4} {s['rejected']:>4} {fmt(s['x_err_median'])} "
                  f"{fmt(s['x_err_max'])} {fmt(s['sup_err_median'])} {fmt(s['sup_err_max'])}")


if __name__ == "__main__":
    main()
