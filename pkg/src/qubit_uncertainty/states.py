"""Qubit states in Bloch form and sampling from the Haar-induced measure.

The induced measure comes from partial-tracing a Haar-random pure state on
C^2 (x) C^2. Two independent samplers are provided: the literal purification
route and the factorized route (eigenvalue density times a Haar-random
rotation). Both take an explicit ``numpy.random.Generator``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateObservable
from .observables import as_observable

NORM_SLACK = 1e-12


@dataclass(frozen=True)
class BlochState:
    """Density matrix ``(I + r.sigma) / 2`` stored as its Bloch vector."""

    r: tuple

    def __init__(self, r):
        v = np.asarray(r, dtype=float).reshape(3)
        n = float(np.linalg.norm(v))
        if not n <= 1.0 + NORM_SLACK:
            raise ValueError(f"Bloch vector norm {n} exceeds 1")
        object.__setattr__(self, "r", tuple(float(c) for c in v))

    @property
    def vector(self):
        return np.array(self.r)

    @property
    def norm(self):
        return float(np.linalg.norm(self.r))

    @property
    def is_pure(self):
        return abs(self.norm - 1.0) <= NORM_SLACK

    @property
    def eigenvalues(self):
        """Ascending spectrum ``((1 - |r|)/2, (1 + |r|)/2)``."""
        n = self.norm
        return 0.5 * (1.0 - n), 0.5 * (1.0 + n)

    def matrix(self):
        x, y, z = self.r
        return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])

    @classmethod
    def from_matrix(cls, rho):
        rho = np.asarray(rho)
        return cls(bloch_from_matrix(rho))


MAXIMALLY_MIXED = BlochState((0.0, 0.0, 0.0))


def bloch_from_matrix(rho):
    """Bloch vectors of one or many 2x2 density matrices (last two axes)."""
    rho = np.asarray(rho)
    off = rho[..., 0, 1]
    return np.stack([2.0 * off.real, -2.0 * off.imag,
                     (rho[..., 0, 0] - rho[..., 1, 1]).real], axis=-1)


def _vec(state):
    if isinstance(state, BlochState):
        return state.vector
    return np.asarray(state, dtype=float)


def mean(obs, state):
    """``Tr(A rho) = a0 + <a, r>``; vectorized over a trailing-3 array of Bloch vectors."""
    obs = as_observable(obs)
    out = obs.offset + _vec(state) @ obs.a
    return float(out) if np.ndim(out) == 0 else out


def variance(obs, state):
    """``|a|^2 - <a, r>^2``, clipped at zero against rounding."""
    obs = as_observable(obs)
    proj = _vec(state) @ obs.a
    out = np.maximum(obs.norm ** 2 - proj * proj, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def uncertainty(obs, state):
    return np.sqrt(variance(obs, state))


def _wrap(vectors, size):
    if size is None:
        return BlochState(vectors[0])
    return vectors.reshape(tuple(np.atleast_1d(size)) + (3,))


def _count(size):
    return 1 if size is None else int(np.prod(size))


def purified_bloch_vectors(rng, n):
    """Bloch vectors of ``n`` partial traces of Haar-random pure states on C^2 (x) C^2."""
    g = rng.standard_normal((n, 2, 2, 2))
    psi = g[..., 0] + 1j * g[..., 1]
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2, axis=(1, 2)))[:, None, None]
    # psi[i, s, e]: system index s, environment index e
    rho = psi @ np.conj(np.swapaxes(psi, 1, 2))
    return bloch_from_matrix(rho)


def sample_purified(rng, size=None):
    """Draw from the induced measure by purification and partial trace.

    Returns a ``BlochState`` when ``size`` is None, else an array of Bloch
    vectors with shape ``size + (3,)``.
    """
    return _wrap(purified_bloch_vectors(rng, _count(size)), size)


def spectral_radius(u):
    """Bloch radius ``1 - 2 lambda_1`` for the inverse-CDF draw ``u`` of the small eigenvalue."""
    u = np.asarray(u, dtype=float)
    lam1 = 0.5 * (1.0 - np.cbrt(1.0 - u))
    return 1.0 - 2.0 * lam1


def uniform_directions(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def spectral_bloch_vectors(rng, n):
    """Eigenvalue by inverse CDF, eigenbasis Haar-random (uniform direction)."""
    u = rng.random(n)
    return spectral_radius(u)[:, None] * uniform_directions(rng, n)


def sample_spectral(rng, size=None):
    """Draw from the induced measure through its eigenvalue/eigenbasis factorization."""
    return _wrap(spectral_bloch_vectors(rng, _count(size)), size)


def small_eigenvalue_cdf(lam1):
    """CDF of the smaller eigenvalue under the induced measure on [0, 1/2]."""
    lam1 = np.clip(np.asarray(lam1, dtype=float), 0.0, 0.5)
    return 1.0 - (1.0 - 2.0 * lam1) ** 3


def char_fn(obs):
    """``E[exp(-i Tr(A rho))]`` under the induced measure."""
    obs = as_observable(obs)
    x = obs.norm
    if x == 0.0:
        raise DegenerateObservable("characteristic function needs |a| > 0")
    if x < 1e-2:
        # 3 (sin x - x cos x) / x^3 by its Taylor series; the closed form cancels badly
        x2 = x * x
        core = 1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 ** 3 / 15120.0
    else:
        core = 3.0 * (math.sin(x) - x * math.cos(x)) / x ** 3
    return complex(np.exp(-1j * obs.offset) * core)


def char_fn_mc(obs, rng, n):
    """Monte Carlo estimate of the same expectation from the purification sampler."""
    obs = as_observable(obs)
    r = purified_bloch_vectors(rng, n)
    return complex(np.mean(np.exp(-1j * mean(obs, r))))
