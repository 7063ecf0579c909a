import numpy as np
import pytest

from qubit_uncertainty import witness as wit
from qubit_uncertainty.errors import DimensionMismatch
from qubit_uncertainty.observables import PAULI, SIGMA_X, SIGMA_Y, SIGMA_Z, QubitObservable
from qubit_uncertainty.states import sample_spectral

from conftest import random_observable


def test_composite_variance_examples():
    m = wit.CompositeObservable([SIGMA_Z, SIGMA_Z])
    mixed = wit.ProductMixture.product(np.zeros(3), np.zeros(3))
    assert abs(wit.composite_variance(m, mixed) - 2) < 1e-15
    assert abs(wit.composite_variance(m, mixed.to_dense()) - 2) < 1e-14
    up = wit.ProductMixture.product((0, 0, 1), (0, 0, 1))
    assert abs(wit.composite_variance(m, up)) < 1e-15
    for s in PAULI:
        assert abs(wit.composite_variance(wit.CompositeObservable([s, s]), wit.singlet())) < 1e-14


def test_separability_bound_examples():
    assert abs(wit.separability_bound([PAULI] * 3) - 6) < 1e-13
    assert abs(wit.separability_bound([[SIGMA_X, SIGMA_Y]] * 2) - 2) < 1e-14
    assert abs(wit.separability_bound([PAULI] * 2) - 4) < 1e-13
    with pytest.raises(ValueError):
        wit.separability_bound([[SIGMA_X, SIGMA_Y], PAULI])


def test_singlet_violation():
    v = wit.evaluate_witness(wit.pauli_settings(2, 2), wit.singlet())
    assert abs(v.lhs) < 1e-12 and abs(v.rhs - 2) < 1e-12
    assert v.violated and abs(v.margin - 2) < 1e-10


def test_ghz_verdict():
    v = wit.evaluate_witness(wit.pauli_settings(3, 3), wit.ghz())
    # recorded values: sigma_z sum has variance 9, the x and y sums give 3 each
    assert abs(v.lhs - 15) < 1e-12 and abs(v.rhs - 6) < 1e-12
    assert not v.violated


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        wit.composite_variance(wit.CompositeObservable([SIGMA_Z] * 3), wit.singlet())
    with pytest.raises(DimensionMismatch):
        wit.evaluate_witness(wit.pauli_settings(2, 2), wit.ghz())


def test_dense_state_validation():
    with pytest.raises(ValueError):
        wit.DenseState(np.diag([1.2, -0.2, 0, 0]))
    with pytest.raises(ValueError):
        wit.DenseState(np.eye(4))
    with pytest.raises(ValueError):
        wit.DenseState(np.eye(3) / 3)
    h = np.eye(4, dtype=complex) / 4
    h[0, 1] = 0.1j
    with pytest.raises(ValueError):
        wit.DenseState(h)


def test_random_separable_examples(rng):
    for sites in (2, 3):
        s = wit.random_separable(sites, 1, rng)
        assert s.weights.shape == (1,) and s.sites == sites
        s = wit.random_separable(sites, 6, rng)
        assert abs(s.weights.sum() - 1) < 1e-12
        rho = s.to_dense().matrix
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.linalg.eigvalsh(rho)[0] > -1e-12
    with pytest.raises(ValueError):
        wit.random_separable(2, 0, rng)


def test_mixture_and_dense_paths_agree(rng):
    for trial in range(1000):
        sites = 2 + trial % 2
        m = wit.CompositeObservable([random_observable(rng) for _ in range(sites)])
        state = wit.random_separable(sites, 1 + trial % 4, rng)
        a = wit.composite_variance(m, state)
        b = wit.composite_variance(m, state.to_dense())
        assert abs(a - b) < 1e-10


def _random_config(rng, sites, count):
    return [wit.CompositeObservable([random_observable(rng) for _ in range(sites)])
            for _ in range(count)]


def test_soundness_on_random_separable_states():
    rng = np.random.default_rng(31)
    trials = 10_000
    for cfg in range(8):
        sites, count = 2 + cfg % 2, 2 + (cfg // 2) % 2
        ms = _random_config(rng, sites, count)
        rhs = wit.separability_bound(wit.site_families(ms))
        k = 1 + cfg % 4
        w = rng.dirichlet(np.ones(k), size=trials)
        r = sample_spectral(rng, size=(trials, k, sites))
        lhs = sum(wit.mixture_variances(m.parts, w, r) for m in ms)
        assert np.all(lhs >= rhs - wit.VIOLATION_SLACK)


def test_mixing_is_concave(rng):
    trials, k = 1000, 4
    ms = _random_config(rng, 3, 3)
    w = rng.dirichlet(np.ones(k), size=trials)
    r = sample_spectral(rng, size=(trials, k, 3))
    lhs = sum(wit.mixture_variances(m.parts, w, r) for m in ms)
    ones = np.ones((trials, k, 1))
    per = sum(wit.mixture_variances(m.parts, ones, r[..., None, :, :]) for m in ms)
    assert np.all(lhs >= np.sum(w * per, axis=-1) - 1e-12)


def test_composite_minimum_singlet_settings():
    value, psi, ok = wit.composite_minimum(wit.pauli_settings(2, 2), np.random.default_rng(5),
                                           restarts=8)
    assert ok and abs(value) < 1e-8
    assert abs(np.linalg.norm(psi) - 1) < 1e-12


def test_composite_observable_validation():
    with pytest.raises(ValueError):
        wit.CompositeObservable([SIGMA_Z])
    m = wit.CompositeObservable([SIGMA_Z, QubitObservable(1.0, (0, 0, 0.5))])
    assert m.matrix().shape == (4, 4)
