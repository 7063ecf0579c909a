import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qubit_uncertainty import densities as dens
from qubit_uncertainty.errors import DegenerateObservable, LinearlyDependentFamily
from qubit_uncertainty.observables import PAULI, SIGMA_X, SIGMA_Y, SIGMA_Z, QubitObservable
from qubit_uncertainty.regions import contains_pair
from qubit_uncertainty.states import mean, sample_purified, uncertainty

from conftest import random_observable

PAIR = (QubitObservable(0.3, (1.0, 0.2, 0.0)), QubitObservable(-1.0, (0.4, 1.3, 0.2)))
TRIPLE = PAIR + (QubitObservable(0.5, (0.1, -0.3, 0.9)),)


def test_mean_examples():
    f = dens.pdf_mean(SIGMA_Z)
    assert f.eval(0.0) == 0.75
    assert f.eval(-1.0) == 0 and f.eval(1.0) == 0
    assert f.eval(1.2) == 0
    xs = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(f.eval(xs), 0.75 * (1 - xs ** 2), atol=1e-15)
    assert abs(dens.normalization(f) - 1) < 1e-10
    with pytest.raises(DegenerateObservable):
        dens.pdf_mean(QubitObservable(1.0, (0, 0, 0)))


def test_uncertainty_examples():
    f = dens.pdf_uncertainty(SIGMA_Z)
    assert abs(f.eval(0.5) - 0.375 / math.sqrt(3)) < 1e-15
    assert abs(f.eval(0.5) - 0.2165) < 1e-4
    assert f.eval(0.0) == 0
    assert abs(dens.normalization(f) - 1) < 1e-8
    g = dens.pdf_uncertainty(QubitObservable(3.0, (0.5, -1.0, 2.0)))
    assert abs(dens.normalization(g) - 1) < 1e-8


def test_uncertainty_histogram():
    rng = np.random.default_rng(42)
    r = sample_purified(rng, size=1_000_000)
    f = dens.pdf_uncertainty(PAIR[1])
    edges = [np.linspace(0, PAIR[1].norm, 41)]
    l1, _, _ = dens.histogram_l1(f, uncertainty(PAIR[1], r), edges)
    assert l1 < 0.01


def test_uncertainty_scaling_covariance():
    base = QubitObservable(0.2, (0.3, -0.4, 0.5))
    f = dens.pdf_uncertainty(base)
    xs = np.linspace(0.01, base.norm - 0.01, 50)
    for c in (0.3, 1.7, 4.0):
        fc = dens.pdf_uncertainty(QubitObservable(0.2, c * base.a))
        np.testing.assert_allclose(fc.eval(c * xs), f.eval(xs) / c, rtol=1e-12)


def test_mean_pair_examples():
    f = dens.pdf_mean_pair(SIGMA_X, SIGMA_Y)
    assert abs(f.eval([0.0, 0.0]) - 3 / (2 * math.pi)) < 1e-15
    assert f.eval([0.9, 0.9]) == 0
    assert abs(dens.normalization(f) - 1) < 1e-6
    assert abs(dens.normalization(dens.pdf_mean_pair(*PAIR)) - 1) < 1e-6


def test_mean_pair_parallel_is_constrained():
    f = dens.pdf_mean_pair(SIGMA_Z, QubitObservable(1.0, (0, 0, 2)))
    assert f.kind == "constrained"
    assert f.base.name == "mean"
    rel = f.constraints[0]
    np.testing.assert_allclose(rel.coefficients, [2.0])
    assert abs(rel.residual(np.array([0.3, 1.6]))) < 1e-15


def test_uncertainty_pair_examples():
    f = dens.pdf_uncertainty_pair(*PAIR)
    assert f.eval([0.0, 0.5]) == 0 and f.eval([0.5, 0.0]) == 0
    assert abs(dens.normalization(f) - 1) < 1e-6
    assert abs(dens.normalization(dens.pdf_uncertainty_pair(SIGMA_X, SIGMA_Y)) - 1) < 1e-6
    with pytest.raises(LinearlyDependentFamily):
        dens.pdf_uncertainty_pair(SIGMA_Z, QubitObservable(0, (0, 0, -3)))


def _four_term(a, b, x, y):
    """Uncertainty pair density summing the mean density over all four sign pairs."""
    mp = dens.pdf_mean_pair(a, b)
    tx = math.sqrt(a.norm ** 2 - x * x)
    ty = math.sqrt(b.norm ** 2 - y * y)
    total = sum(mp.eval([a.offset + i * tx, b.offset + j * ty])
                for i in (1, -1) for j in (1, -1))
    return x * y / (tx * ty) * total


def test_two_term_form_matches_four_term_form(rng):
    for _ in range(5):
        a, b = random_observable(rng), random_observable(rng)
        f = dens.pdf_uncertainty_pair(a, b)
        pts = rng.random((200, 2)) * [a.norm, b.norm]
        ref = np.array([_four_term(a, b, x, y) for x, y in pts])
        np.testing.assert_allclose(f.eval(pts), ref, rtol=1e-12, atol=1e-14)


def test_uncertainty_pair_support_is_region(rng):
    for _ in range(3):
        a, b = random_observable(rng), random_observable(rng)
        f = dens.pdf_uncertainty_pair(a, b)
        xs = np.linspace(0, a.norm, 100)
        ys = np.linspace(0, b.norm, 100)
        pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
        assert np.array_equal(f.support(pts), contains_pair([a, b], pts))


def test_uncertainty_pair_marginal():
    a, b = PAIR
    f = dens.pdf_uncertainty_pair(a, b)
    g = dens.pdf_uncertainty(a)

    def marginal(x):
        val, _ = integrate.quad(lambda psi: f.eval([x, b.norm * math.sin(psi)])
                                * b.norm * math.cos(psi), 0, 0.5 * math.pi, limit=200,
                                epsabs=1e-11)
        return val

    # L1 distance with x = |a| sin(phi) to absorb the edge singularity
    n = 120
    phis = (np.arange(n) + 0.5) * (0.5 * math.pi / n)
    xs = a.norm * np.sin(phis)
    diff = np.array([abs(marginal(x) - g.eval(x)) for x in xs]) * a.norm * np.cos(phis)
    l1 = np.sum(diff) * (0.5 * math.pi / n)
    assert l1 < 1e-4


def test_mean_triple_examples():
    f = dens.pdf_mean_triple(*PAULI)
    assert abs(f.eval([0, 0, 0]) - 3 / (4 * math.pi)) < 1e-15
    assert f.eval([0.8, 0.8, 0.0]) == 0
    # value halved on the boundary sphere
    assert abs(f.eval([1.0, 0, 0]) - 3 / (8 * math.pi)) < 1e-15
    assert abs(dens.normalization(f) - 1) < 1e-10
    assert abs(dens.normalization(dens.pdf_mean_triple(*TRIPLE)) - 1) < 1e-6


def test_mean_triple_rank_two_is_constrained():
    c = QubitObservable(0.1, (1.0, 1.0, 0.0))
    f = dens.pdf_mean_triple(SIGMA_X, SIGMA_Y, c)
    assert f.kind == "constrained" and f.base.name == "mean2"
    assert len(f.constraints) == 1


def test_uncertainty_triple_examples():
    f = dens.pdf_uncertainty_triple(*TRIPLE)
    assert f.eval([0.0, 0.5, 0.5]) == 0
    assert abs(dens.normalization(f) - 1) < 1e-4
    assert abs(dens.normalization(dens.pdf_uncertainty_triple(*PAULI)) - 1) < 1e-4
    with pytest.raises(LinearlyDependentFamily):
        dens.pdf_uncertainty_triple(SIGMA_X, SIGMA_Y, QubitObservable(0, (1, 1, 0)))


@pytest.mark.slow
def test_uncertainty_triple_histogram_large():
    rng = np.random.default_rng(42)
    f = dens.pdf_uncertainty_triple(*TRIPLE)
    edges = [np.linspace(lo, hi, 21) for lo, hi in f.box]
    counts = 0
    n = 10_000_000
    for _ in range(10):
        r = sample_purified(rng, size=n // 10)
        u = np.stack([uncertainty(o, r) for o in TRIPLE], axis=-1)
        counts = counts + np.histogramdd(u, bins=edges)[0]
    diff = np.abs(counts / n - dens.bin_masses(f, edges))[:-1, :-1, :-1]
    assert diff.sum() < 0.05


def test_pdf_n_reduces():
    f = dens.pdf_mean_n(TRIPLE)
    g = dens.pdf_mean_triple(*TRIPLE)
    pts = np.random.default_rng(0).normal(size=(100, 3))
    np.testing.assert_array_equal(f.eval(pts), g.eval(pts))
    h = dens.pdf_uncertainty_n(TRIPLE)
    k = dens.pdf_uncertainty_triple(*TRIPLE)
    q = np.random.default_rng(1).random((100, 3)) * [o.norm for o in TRIPLE]
    np.testing.assert_array_equal(h.eval(q), k.eval(q))
    np.testing.assert_array_equal(dens.pdf_uncertainty_n(PAIR).eval(q[:, :2]),
                                  dens.pdf_uncertainty_pair(*PAIR).eval(q[:, :2]))


def test_pdf_mean_n_scaled_copy():
    f = dens.pdf_mean_n([SIGMA_Z, QubitObservable(0, (0, 0, 2))])
    assert f.kind == "constrained" and f.base.name == "mean"
    np.testing.assert_allclose(f.constraints[0].coefficients, [2.0])
    assert f.eval([0.5, 1.0]) == 0.75 * 0.75
    assert f.eval([0.5, 1.1]) == 0


def test_pdf_mean_n_pauli_plus_diagonal():
    d = QubitObservable(0, (1, 1, 1))
    f = dens.pdf_mean_n(list(PAULI) + [d])
    assert f.kind == "constrained" and len(f.constraints) == 1
    np.testing.assert_allclose(f.constraints[0].coefficients, [1, 1, 1], atol=1e-12)
    rng = np.random.default_rng(3)
    r = sample_purified(rng, size=1000)
    m = np.stack([mean(o, r) for o in list(PAULI) + [d]], axis=-1)
    assert np.max(f.constraint_residual(m)) < 1e-12
    assert np.all(f.support(m))


def test_uncertainty_n_constraint_residuals():
    fam = list(PAULI) + [QubitObservable(0.5, (1, 1, 1))]
    f = dens.pdf_uncertainty_n(fam)
    assert f.kind == "constrained"
    rng = np.random.default_rng(4)
    r = sample_purified(rng, size=2000)
    u = np.stack([uncertainty(o, r) for o in fam], axis=-1)
    assert np.max(f.constraint_residual(u)) < 1e-9
    assert np.all(f.support(u))
    # moving the dependent coordinate off the relation leaves the support
    off = u.copy()
    off[:, 3] = 0.5 * off[:, 3]
    assert not np.any(f.support(off) & (f.constraint_residual(off) > 1e-6))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3),
       st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_density_values_finite_and_nonnegative(p, q):
    for desc in (dens.pdf_mean_triple(*TRIPLE), dens.pdf_uncertainty_triple(*TRIPLE)):
        v = desc.eval(np.array([p, q]))
        assert np.all(np.isfinite(v)) and np.all(v >= 0)
        assert np.all(v[~desc.support(np.array([p, q]))] == 0)
    pair = dens.pdf_uncertainty_pair(*PAIR)
    v = pair.eval(np.array([p[:2], q[:2]]))
    assert np.all(np.isfinite(v)) and np.all(v >= 0)


@pytest.mark.parametrize("lam,expected", [(0.0, 1.0), (0.3, math.sqrt(0.91)), (0.6, 0.8),
                                          (0.9, math.sqrt(0.19)), (1.5, 0.0)])
def test_bessel_identity(lam, expected):
    assert abs(dens.bessel_identity_check(lam) - expected) < 1e-3


def test_bessel_rejects_negative():
    with pytest.raises(ValueError):
        dens.bessel_identity_check(-0.1)
