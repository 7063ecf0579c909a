"""Detect entanglement from sums of variances of composite observables.

Run: python3 demos/entanglement_witness.py
"""
import numpy as np

from qubit_uncertainty import witness
from qubit_uncertainty.states import sample_spectral


def main():
    # The singlet has zero variance for every sigma_i (x) 1 + 1 (x) sigma_i.
    settings = witness.pauli_settings(2, 2)
    v = witness.evaluate_witness(settings, witness.singlet())
    print(f"singlet: sum of variances {v.lhs:.3f}, separable bound {v.rhs:.3f}, "
          f"entangled: {v.violated}")

    # GHZ with the three Pauli settings does not cross the bound.
    v = witness.evaluate_witness(witness.pauli_settings(3, 3), witness.ghz())
    print(f"GHZ:     sum of variances {v.lhs:.3f}, separable bound {v.rhs:.3f}, "
          f"entangled: {v.violated}")

    # Random separable states never fall below the bound.
    rng = np.random.default_rng(3)
    trials, k = 100_000, 4
    w = rng.dirichlet(np.ones(k), size=trials)
    r = sample_spectral(rng, size=(trials, k, 2))
    lhs = sum(witness.mixture_variances(m.parts, w, r) for m in settings)
    print(f"separable mixtures: smallest sum {lhs.min():.4f} over {trials} states (bound 2)")

    # The overall minimum over all states, found by restarted local search.
    value, _, converged = witness.composite_minimum(settings, rng)
    print(f"minimum over all two-qubit states: {value:.2e} (converged: {converged})")


if __name__ == "__main__":
    main()
