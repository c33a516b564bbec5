"""Convergence of C_k to I on a batch of random admissible triples.

For each triple prints the first k with ||rho_k|| < 1e-3 (and ||C_k - I|| < 1e-3),
the worst rebound after that index, lambda_min(F) and the window bound epsilon.

    python scripts/asymptotics_experiment.py --count 50 --k-max 5000
"""
import argparse
import time

import numpy as np

from dirac_gbdt.sampling import random_admissible_triple, random_signature_dims
from dirac_gbdt.verblunsky import asymptotics_report


def first_below(arr, level):
    hit = np.flatnonzero(arr < level)
    if not hit.size:
        return None, np.nan
    K = int(hit[0])
    return K, float(arr[K:].max() / arr[K]) if arr[K] > 0 else 1.0


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--k-max", type=int, default=5000)
    p.add_argument("--seed", type=int, default=20240917)
    p.add_argument("--level", type=float, default=1e-3)
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"{'#':>3} {'n':>2} {'m1':>2} {'m2':>2} {'K_rho':>6} {'rebound':>8} {'K_dev':>6} "
          f"{'lmin(F)':>10} {'epsilon':>10} {'sec':>6}")
    for i in range(args.count):
        n, m1, m2 = random_signature_dims(rng)
        tr = random_admissible_triple(rng, n, m1, m2)
        t = time.perf_counter()
        rep = asymptotics_report(tr, args.k_max)
        Kr, reb = first_below(rep.rho_norm, args.level)
        Kd, _ = first_below(rep.Ck_minus_I_norm, args.level)
        print(f"{i:>3} {n:>2} {m1:>2} {m2:>2} {str(Kr):>6} {reb:>8.3f} {str(Kd):>6} "
              f"{rep.lmin_F:>10.3e} {rep.epsilon_1_34:>10.3e} {time.perf_counter() - t:>6.2f}")


if __name__ == "__main__":
    main()
