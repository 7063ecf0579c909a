"""Analytic densities of means and uncertainties against sampled random states.

Run: python3 demos/densities_vs_sampling.py [--plot out.png]
"""
import argparse

import numpy as np

from qubit_uncertainty import densities
from qubit_uncertainty.observables import QubitObservable
from qubit_uncertainty.states import mean, sample_purified, uncertainty


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--plot", help="save a figure of the one-dimensional densities")
    args = parser.parse_args()

    # Reduced states of random two-qubit pure states fill the Bloch ball uniformly.
    rng = np.random.default_rng(42)
    r = sample_purified(rng, size=1_000_000)
    a = QubitObservable(0.3, (1.0, 0.2, 0.0))
    b = QubitObservable(-1.0, (0.4, 1.3, 0.2))

    cases = [
        ("mean of A", densities.pdf_mean(a), mean(a, r)[:, None], 40),
        ("uncertainty of A", densities.pdf_uncertainty(a), uncertainty(a, r)[:, None], 40),
        ("means of A, B", densities.pdf_mean_pair(a, b),
         np.stack([mean(a, r), mean(b, r)], axis=-1), 15),
        ("uncertainties of A, B", densities.pdf_uncertainty_pair(a, b),
         np.stack([uncertainty(a, r), uncertainty(b, r)], axis=-1), 20),
    ]
    print("density                   integral        histogram L1")
    for name, desc, sample, bins in cases:
        edges = [np.linspace(lo, hi, bins + 1) for lo, hi in desc.box]
        l1, _, _ = densities.histogram_l1(desc, sample, edges)
        print(f"{name:24s}  {densities.normalization(desc):.12f}  {l1:.4f}")

    # A dependent family keeps its delta factor as an explicit relation.
    c = QubitObservable(0.0, 2.0 * a.a)
    dep = densities.pdf_mean_pair(a, c)
    m = np.stack([mean(a, r[:1000]), mean(c, r[:1000])], axis=-1)
    print(f"\n{dep.kind} density for A and 2A: largest relation residual "
          f"{np.max(dep.constraint_residual(m)):.1e}")

    for lam in (0.0, 0.6, 1.5):
        print(f"Bessel integral at {lam}: {densities.bessel_identity_check(lam):.6f}")

    if args.plot:
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
        for ax, (name, desc, sample, _) in zip(axes, cases[:2]):
            lo, hi = desc.box[0]
            ax.hist(sample[:, 0], bins=60, range=(lo, hi), density=True, alpha=0.5)
            xs = np.linspace(lo, hi, 400)[:-1]
            ax.plot(xs, desc.eval(xs), "k")
            ax.set_title(name)
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)
        print(f"figure written to {args.plot}")


if __name__ == "__main__":
    main()
