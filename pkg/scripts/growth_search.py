"""Look for admissible triples whose R_k or Q_k grow slowly.

The stability argument needs lambda_min(R_k) or lambda_min(Q_k) to grow
without bound; either one suffices.  This script samples triples with spectra
pushed towards the real axis and reports the ones where the larger of the two
is smallest at ``k_max``.  A
slow grower is only a candidate: boundedness cannot be read off a finite
horizon.

    python scripts/growth_search.py --count 200 --k-max 2000 --margin 1e-3
"""
import argparse

import numpy as np

from dirac_gbdt import linalg as la
from dirac_gbdt.errors import SpectrumConflict
from dirac_gbdt.sampling import random_admissible_triple, random_signature_dims
from dirac_gbdt.verblunsky import q_sequence, r_sequence


def final_lmin(build, tr, k_max):
    try:
        return float(build(tr, k_max).lmin[-1])
    except SpectrumConflict:
        return np.nan


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--k-max", type=int, default=2000)
    p.add_argument("--margin", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--top", type=int, default=10)
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    found = []
    for i in range(args.count):
        n, m1, m2 = random_signature_dims(rng)
        try:
            tr = random_admissible_triple(rng, n, m1, m2, margin=args.margin)
        except RuntimeError:
            continue
        r, q = final_lmin(r_sequence, tr, args.k_max), final_lmin(q_sequence, tr, args.k_max)
        found.append((np.nanmax([r, q]), i, n, m1, m2, float(la.eigvals(tr.A).imag.min()), r, q))
    found.sort()
    print(f"{'#':>4} {'n':>2} {'m1':>2} {'m2':>2} {'min Im':>10} {'lmin R_k':>12} {'lmin Q_k':>12}")
    for _, i, n, m1, m2, im, r, q in found[:args.top]:
        print(f"{i:>4} {n:>2} {m1:>2} {m2:>2} {im:>10.3e} {r:>12.4e} {q:>12.4e}")


if __name__ == "__main__":
    main()
