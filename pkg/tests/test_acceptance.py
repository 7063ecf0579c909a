"""End-to-end acceptance checks, one test per criterion at its stated tolerance."""
import math
import subprocess
import sys
import time

import numpy as np
from scipy import stats

from qubit_uncertainty import bounds, densities as dens, regions as reg, states, witness as wit
from qubit_uncertainty.observables import QubitObservable

from conftest import random_observable, record_criterion

PAIR_SEED = 2024
# brute-force grid resolution for the 200-pair sweeps; refinement does the rest
SWEEP_RESOLUTION = 100


def _pairs():
    rng = np.random.default_rng(PAIR_SEED)
    return [(random_observable(rng), random_observable(rng)) for _ in range(200)]


def _sweep(bound_fn, objective):
    start = time.perf_counter()
    worst = 0.0
    for a, b in _pairs():
        ref = bounds.brute_force_min([a, b], objective, SWEEP_RESOLUTION).value
        worst = max(worst, abs(bound_fn(a, b).value - ref))
    return worst, time.perf_counter() - start


def test_criterion_01_variance_pair_tightness():
    worst, secs = _sweep(bounds.variance_sum_bound_pair, "sum_of_squares")
    ok = worst < 1e-3 and secs < 30
    record_criterion(1, "variance pair bound vs brute force", ok,
                     f"max diff {worst:.2e}, {secs:.1f} s")
    assert ok


def test_criterion_02_deviation_pair_tightness():
    worst, secs = _sweep(bounds.deviation_sum_bound_pair, "sum")
    ok = worst < 1e-3 and secs < 30
    record_criterion(2, "deviation pair bound vs brute force", ok,
                     f"max diff {worst:.2e}, {secs:.1f} s")
    assert ok


def _equiangular(theta):
    s = math.sqrt((1 - math.cos(theta)) / 1.5)
    c = math.sqrt(1 - s * s)
    return [QubitObservable(0, (s * math.cos(2 * math.pi * k / 3),
                                s * math.sin(2 * math.pi * k / 3), c)) for k in range(3)]


def _right_angles(alpha):
    return [QubitObservable(0, (0, 0, 1)), QubitObservable(0, (1, 0, 0)),
            QubitObservable(0, (math.cos(alpha), math.sin(alpha), 0))]


def test_criterion_03_triple_special_cases():
    exact = brute = 0.0
    for t in (math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2):
        for fam, target in ((_equiangular(t), 2 * (1 - math.cos(t))),
                            (_right_angles(t), 2 - math.cos(t))):
            value = bounds.variance_sum_bound_triple(*fam).value
            exact = max(exact, abs(value - target))
            brute = max(brute, abs(bounds.brute_force_min(fam, "sum_of_squares", 400).value - value))
    ok = exact < 1e-12 and brute < 1e-3
    record_criterion(3, "triple bound special cases", ok,
                     f"closed form diff {exact:.1e}, brute force diff {brute:.1e}")
    assert ok


def test_criterion_04_area_formula():
    thetas = [math.pi / 16, math.pi / 8, math.pi / 4, 3 * math.pi / 8, 7 * math.pi / 16,
              math.pi / 2]
    worst = max(abs(reg.area_pair(t) - reg.area_grid(t, 2000)) for t in thetas)
    theta, area = reg.max_area()
    ok = worst < 1e-3 and abs(theta - 0.741758) < 1e-4 and abs(area - 0.572244) < 1e-4
    record_criterion(4, "area formula and maximum", ok,
                     f"grid diff {worst:.1e}, theta {theta:.6f}, area {area:.6f}")
    assert ok


def test_criterion_05_density_correctness():
    start = time.perf_counter()
    fam = [QubitObservable(0.3, (1.0, 0.2, 0.0)), QubitObservable(-1.0, (0.4, 1.3, 0.2)),
           QubitObservable(0.5, (0.1, -0.3, 0.9))]
    rng = np.random.default_rng(42)
    r = states.sample_purified(rng, size=1_000_000)
    means = np.stack([states.mean(o, r) for o in fam], axis=-1)
    uncs = np.stack([states.uncertainty(o, r) for o in fam], axis=-1)
    # (descriptor, samples, bins per axis, normalization tol, L1 tol)
    cases = {
        "mean": (dens.pdf_mean(fam[0]), means[:, :1], 40, 1e-10, 0.01),
        "uncertainty": (dens.pdf_uncertainty(fam[0]), uncs[:, :1], 40, 1e-8, 0.01),
        "mean_pair": (dens.pdf_mean_pair(*fam[:2]), means[:, :2], 15, 1e-6, 0.02),
        "uncertainty_pair": (dens.pdf_uncertainty_pair(*fam[:2]), uncs[:, :2], 20, 1e-6, 0.02),
        "mean_triple": (dens.pdf_mean_triple(*fam), means, 10, 1e-4, 0.05),
        "uncertainty_triple": (dens.pdf_uncertainty_triple(*fam), uncs, 20, 1e-4, 0.05),
    }
    ok = True
    details = []
    for name, (desc, sample, bins, ntol, ltol) in cases.items():
        nerr = abs(dens.normalization(desc) - 1)
        edges = [np.linspace(lo, hi, bins + 1) for lo, hi in desc.box]
        l1, _, _ = dens.histogram_l1(desc, sample, edges)
        ok &= nerr < ntol and l1 < ltol
        details.append(f"{name} L1 {l1:.4f}")
    secs = time.perf_counter() - start
    ok &= secs < 120
    record_criterion(5, "density normalization and histograms", ok,
                     ", ".join(details) + f", {secs:.1f} s")
    assert ok


def test_criterion_06_support_equals_region():
    rng = np.random.default_rng(6)
    mismatches = 0
    for _ in range(5):
        a, b = random_observable(rng), random_observable(rng)
        xs, ys = np.linspace(0, a.norm, 500), np.linspace(0, b.norm, 500)
        pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
        sup = dens.pdf_uncertainty_pair(a, b).support(pts)
        mismatches += int(np.count_nonzero(sup != reg.contains_pair([a, b], pts)))
    record_criterion(6, "density support equals region", mismatches == 0,
                     f"{mismatches} mismatches on 5 x 500^2 points")
    assert mismatches == 0


def test_criterion_07_sampler_equivalence():
    rng = np.random.default_rng(7)
    a = np.linalg.norm(states.sample_purified(rng, size=100_000), axis=1)
    b = np.linalg.norm(states.sample_spectral(rng, size=100_000), axis=1)
    p_two = stats.ks_2samp(a, b).pvalue
    p_cube = stats.kstest(a ** 3, "uniform").pvalue
    ok = p_two > 1e-3 and p_cube > 1e-3
    record_criterion(7, "sampler equivalence", ok,
                     f"two-sample p {p_two:.3f}, cube-uniform p {p_cube:.3f}")
    assert ok


def test_criterion_08_characteristic_function():
    rng = np.random.default_rng(8)
    n = 1_000_000
    worst = 0.0
    for _ in range(20):
        o = QubitObservable(rng.normal(), 2 * rng.normal(size=3))
        worst = max(worst, abs(states.char_fn_mc(o, rng, n) - states.char_fn(o)))
    ok = worst < 4 / math.sqrt(n)
    record_criterion(8, "characteristic function vs Monte Carlo", ok,
                     f"max diff {worst:.1e} vs {4 / math.sqrt(n):.0e}")
    assert ok


def test_criterion_09_bessel_identity():
    worst = 0.0
    for lam in (0.0, 0.3, 0.6, 0.9, 1.5):
        target = math.sqrt(1 - lam * lam) if lam < 1 else 0.0
        worst = max(worst, abs(dens.bessel_identity_check(lam) - target))
    record_criterion(9, "Bessel integral identity", worst < 1e-3, f"max diff {worst:.1e}")
    assert worst < 1e-3


def test_criterion_10_witness():
    rng = np.random.default_rng(10)
    trials = 100_000
    violations = 0
    for cfg in range(20):
        sites, count = 2 + cfg % 2, 2 + (cfg // 2) % 2
        ms = [wit.CompositeObservable([random_observable(rng) for _ in range(sites)])
              for _ in range(count)]
        rhs = wit.separability_bound(wit.site_families(ms))
        k = 1 + cfg % 5
        w = rng.dirichlet(np.ones(k), size=trials)
        r = states.sample_spectral(rng, size=(trials, k, sites))
        lhs = sum(wit.mixture_variances(m.parts, w, r) for m in ms)
        violations += int(np.count_nonzero(lhs < rhs - wit.VIOLATION_SLACK))
    v = wit.evaluate_witness(wit.pauli_settings(2, 2), wit.singlet())
    ok = (violations == 0 and abs(v.lhs) < 1e-10 and abs(v.rhs - 2) < 1e-10 and v.violated
          and abs(v.margin - 2) < 1e-10)
    record_criterion(10, "witness soundness and singlet detection", ok,
                     f"{violations} violations in 20 x 1e5 states, singlet margin {v.margin:.12f}")
    assert ok


def test_criterion_11_attainability():
    rng = np.random.default_rng(11)
    failures = 0
    for k in range(10):
        n = 1 + k % 5
        if k < 5:
            fam = [random_observable(rng) for _ in range(n)]
        else:
            # last member is a combination of two others, exercising the relation branch
            fam = [random_observable(rng) for _ in range(max(n - 1, 1))]
            combo = rng.normal() * fam[0].a + rng.normal() * fam[-1].a
            fam.append(QubitObservable(rng.normal(), combo))
        r = states.sample_spectral(rng, size=100_000)
        u = np.stack([states.uncertainty(o, r) for o in fam], axis=-1)
        failures += int(np.count_nonzero(~np.asarray(reg.contains_n(fam, u))))
    record_criterion(11, "sampled states lie in the region", failures == 0,
                     f"{failures} failures over 10 families x 1e5 states")
    assert failures == 0


def test_criterion_12_verify_determinism(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        proc = subprocess.run([sys.executable, "-m", "qubit_uncertainty", "verify", "--seed", "42",
                               "--out", str(path)], capture_output=True)
        outs.append((proc.returncode, path.read_bytes()))
    ok = outs[0][0] == 0 and outs[0] == outs[1]
    record_criterion(12, "verify report is deterministic", ok,
                     f"exit codes {outs[0][0]}/{outs[1][0]}, {len(outs[0][1])} bytes each")
    assert ok
