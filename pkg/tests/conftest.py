import math

import numpy as np
import pytest

from qubit_uncertainty.observables import QubitObservable


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_observable(rng, scale=1.0):
    return QubitObservable(rng.normal(), scale * rng.normal(size=3))


def matrix_variance(obs, r):
    """Tr(A^2 rho) - Tr(A rho)^2 with explicit complex 2x2 matrices."""
    x, y, z = r
    rho = 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])
    a = obs.matrix()
    m1 = np.trace(a @ rho).real
    return np.trace(a @ a @ rho).real - m1 * m1


def _tri(t1, t2, t3):
    return math.cos(t1) - math.cos(t2) * math.cos(t3)


def trig_triple_region(alpha, beta, gamma, pts, tol=1e-12):
    """Membership for unit-vector triples written with the pairwise angles only."""
    x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
    rx, ry, rz = np.sqrt(1 - x * x), np.sqrt(1 - y * y), np.sqrt(1 - z * z)
    rhs = 1 - math.cos(alpha) * math.cos(beta) * math.cos(gamma)
    quad = 0.5 * (math.sin(alpha) ** 2 * x * x + math.sin(beta) ** 2 * y * y
                  + math.sin(gamma) ** 2 * z * z)
    out = np.zeros(x.shape, dtype=bool)
    for eps in (1.0, -1.0):
        lhs = (np.abs(_tri(gamma, alpha, beta) * rx + eps * _tri(alpha, beta, gamma) * rz) * ry
               + eps * _tri(beta, gamma, alpha) * rz * rx + quad)
        out |= lhs >= rhs - tol
    return out


def unit_vector(theta, phi=0.0):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
                     math.cos(theta)])


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail):
    """Store one acceptance line; printed in the terminal summary."""
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
