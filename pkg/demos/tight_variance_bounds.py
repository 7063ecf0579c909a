"""State-independent bounds on sums of variances, checked against direct search.

Run: python3 demos/tight_variance_bounds.py
"""
import math

import numpy as np

from qubit_uncertainty import bounds
from qubit_uncertainty.observables import PAULI, QubitObservable


def main():
    rng = np.random.default_rng(1)

    # Pairs: the smallest Gram eigenvalue bounds the variance sum, the cross product
    # over the longer vector bounds the deviation sum. Both are attained.
    print("pair bounds (analytic vs search over pure states)")
    for _ in range(5):
        a = QubitObservable(rng.normal(), rng.normal(size=3))
        b = QubitObservable(rng.normal(), rng.normal(size=3))
        var = bounds.variance_sum_bound_pair(a, b)
        dev = bounds.deviation_sum_bound_pair(a, b)
        bf_var = bounds.brute_force_min([a, b], "sum_of_squares", 150).value
        bf_dev = bounds.brute_force_min([a, b], "sum", 150).value
        print(f"  var {var.value:.6f} / {bf_var:.6f}    dev {dev.value:.6f} / {bf_dev:.6f}")

    # Triples: trace minus the largest Gram eigenvalue.
    print("\nthree unit vectors with equal pairwise angle t: bound 2(1 - cos t)")
    for t in (math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2):
        s = math.sqrt((1 - math.cos(t)) / 1.5)
        c = math.sqrt(1 - s * s)
        fam = [QubitObservable(0, (s * math.cos(2 * math.pi * k / 3),
                                   s * math.sin(2 * math.pi * k / 3), c)) for k in range(3)]
        print(f"  t={t:.4f}: {bounds.variance_sum_bound_triple(*fam).value:.6f}"
              f"  expected {2 * (1 - math.cos(t)):.6f}")

    print(f"\nPauli triple: {bounds.variance_sum_bound_triple(*PAULI).value:.6f}")

    # Longer families reduce to the 3x3 matrix M M^T whatever their size.
    fam = [QubitObservable(0, rng.normal(size=3)) for _ in range(8)]
    rep = bounds.variance_sum_bound_n(fam)
    bf = bounds.brute_force_min(fam, "sum_of_squares", 150).value
    print(f"eight random observables: bound {rep.value:.6f}, search {bf:.6f}")


if __name__ == "__main__":
    main()
