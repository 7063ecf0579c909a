"""Variance-based entanglement criteria for two and three qubits.

Each measurement setting ``i`` defines a composite observable
``M_i = sum_X (local observable of site X)``. For a fully separable state the
sum of ``Var(M_i)`` is bounded below by the sum over sites of the local
state-independent variance bounds; a smaller value certifies entanglement.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import optimize

from . import bounds
from .errors import DimensionMismatch
from .observables import QubitObservable, as_observable
from .states import BlochState, sample_spectral

VIOLATION_SLACK = 1e-10
DENSE_TOL = 1e-10
I2 = np.eye(2)


@dataclass(frozen=True)
class CompositeObservable:
    """Sum of single-site observables on a 2- or 3-qubit system."""

    parts: tuple

    def __init__(self, parts):
        parts = tuple(as_observable(p) for p in parts)
        if not 2 <= len(parts) <= 3:
            raise ValueError("composite observables span 2 or 3 sites")
        object.__setattr__(self, "parts", parts)

    @property
    def sites(self):
        return len(self.parts)

    def matrix(self):
        """Dense ``2^n x 2^n`` matrix via Kronecker products."""
        n = self.sites
        total = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for site, obs in enumerate(self.parts):
            factors = [I2] * n
            factors[site] = obs.matrix()
            term = factors[0]
            for f in factors[1:]:
                term = np.kron(term, f)
            total += term
        return total


@dataclass(frozen=True)
class ProductMixture:
    """Convex mixture of product states: ``weights[k]`` times ``(x) bloch[k, site]``."""

    weights: np.ndarray
    bloch: np.ndarray

    def __init__(self, weights, bloch):
        w = np.asarray(weights, dtype=float).reshape(-1)
        r = np.asarray(bloch, dtype=float)
        if r.ndim != 3 or r.shape[0] != w.size or r.shape[2] != 3:
            raise ValueError("bloch must have shape (components, sites, 3)")
        if not 2 <= r.shape[1] <= 3:
            raise ValueError("2 or 3 sites supported")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")
        if np.any(np.linalg.norm(r, axis=-1) > 1.0 + 1e-12):
            raise ValueError("Bloch vectors must have norm <= 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bloch", r)

    @property
    def sites(self):
        return self.bloch.shape[1]

    def to_dense(self):
        dim = 2 ** self.sites
        rho = np.zeros((dim, dim), dtype=complex)
        for p, comp in zip(self.weights, self.bloch):
            term = BlochState(comp[0]).matrix()
            for r in comp[1:]:
                term = np.kron(term, BlochState(r).matrix())
            rho += p * term
        return DenseState(rho)

    @classmethod
    def product(cls, *site_states):
        """Single product state from per-site Bloch vectors."""
        return cls([1.0], [[np.asarray(getattr(s, "r", s), dtype=float) for s in site_states]])


@dataclass(frozen=True)
class DenseState:
    """Density matrix on 2 or 3 qubits, checked Hermitian, unit-trace and PSD."""

    matrix: np.ndarray

    def __init__(self, matrix):
        rho = np.asarray(matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (4, 8):
            raise ValueError("dense states must be 4x4 or 8x8")
        if np.max(np.abs(rho - rho.conj().T)) > DENSE_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > DENSE_TOL:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -DENSE_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", rho)

    @property
    def sites(self):
        return int(round(math.log2(self.matrix.shape[0])))

    @classmethod
    def from_vector(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class WitnessVerdict:
    lhs: float
    rhs: float
    violated: bool
    margin: float


def singlet():
    """Two-qubit singlet ``(|01> - |10>)/sqrt(2)``."""
    return DenseState.from_vector([0.0, 1.0, -1.0, 0.0])


def ghz():
    """Three-qubit GHZ state ``(|000> + |111>)/sqrt(2)``."""
    v = np.zeros(8)
    v[0] = v[7] = 1.0
    return DenseState.from_vector(v)


def _check_sites(m, state):
    if m.sites != state.sites:
        raise DimensionMismatch(
            f"observable acts on {m.sites} sites but the state has {state.sites}")


def mixture_variances(parts, weights, bloch):
    """Vectorized variance of ``sum_X A_X`` for a batch of product mixtures.

    ``weights`` has shape ``(..., K)`` and ``bloch`` shape ``(..., K, sites, 3)``.
    Uses ``Var = sum_X Var_X + 2 sum_{X<Y} cov(X, Y)`` with per-component means
    ``m_kX`` and variances ``v_kX``: ``<X> = sum p m``, ``<X^2> = sum p (v + m^2)``
    and ``<XY> = sum p m_X m_Y``.
    """
    w = np.asarray(weights, dtype=float)
    r = np.asarray(bloch, dtype=float)
    vecs = np.array([p.a for p in parts])
    offs = np.array([p.offset for p in parts])
    norms2 = np.sum(vecs * vecs, axis=1)
    proj = np.einsum("...ksj,sj->...ks", r, vecs)
    m = offs + proj
    v = norms2 - proj * proj
    mean = np.einsum("...k,...ks->...s", w, m)
    second = np.einsum("...k,...ks->...s", w, v + m * m)
    total = np.sum(second - mean * mean, axis=-1)
    n = len(parts)
    for x in range(n):
        for y in range(x + 1, n):
            cross = np.einsum("...k,...k->...", w, m[..., x] * m[..., y])
            total = total + 2.0 * (cross - mean[..., x] * mean[..., y])
    return total


def composite_variance(m, state):
    """``<M^2> - <M>^2`` for a dense state or a product mixture."""
    _check_sites(m, state)
    if isinstance(state, ProductMixture):
        return float(mixture_variances(m.parts, state.weights, state.bloch))
    mat = m.matrix()
    rho = state.matrix
    first = np.trace(mat @ rho).real
    second = np.trace(mat @ mat @ rho).real
    return float(second - first * first)


def site_families(ms):
    """Per-site observable families ``[[A_1, A_2, ...], [B_1, ...], ...]`` from the settings."""
    sites = {m.sites for m in ms}
    if len(sites) != 1:
        raise DimensionMismatch("composite observables disagree on the number of sites")
    n = sites.pop()
    return [[m.parts[x] for m in ms] for x in range(n)]


def separability_bound(families):
    """Sum over sites of the local variance bound (pair or triple bound per site)."""
    families = [[as_observable(o) for o in fam] for fam in families]
    if not 2 <= len(families) <= 3:
        raise ValueError("2 or 3 sites supported")
    k = {len(f) for f in families}
    if len(k) != 1 or not k <= {2, 3}:
        raise ValueError("every site needs the same number (2 or 3) of observables")
    total = 0.0
    for fam in families:
        if len(fam) == 2:
            total += bounds.variance_sum_bound_pair(*fam).value
        else:
            total += bounds.variance_sum_bound_triple(*fam).value
    return total


def evaluate_witness(ms, state):
    """Compare ``sum_i Var(M_i)`` with the separability bound built from the same observables."""
    ms = [m if isinstance(m, CompositeObservable) else CompositeObservable(m) for m in ms]
    for m in ms:
        _check_sites(m, state)
    lhs = sum(composite_variance(m, state) for m in ms)
    rhs = separability_bound(site_families(ms))
    return WitnessVerdict(lhs, rhs, bool(lhs < rhs - VIOLATION_SLACK), rhs - lhs)


def random_separable(sites, mixture_size, rng):
    """Random fully separable state: flat-simplex weights, per-site induced-measure states."""
    if mixture_size < 1:
        raise ValueError("mixture_size must be at least 1")
    w = rng.dirichlet(np.ones(mixture_size))
    w = w / w.sum()
    r = sample_spectral(rng, size=(mixture_size, sites))
    return ProductMixture(w, r)


def composite_minimum(ms, rng, restarts=20, tol=1e-6):
    """Minimum of ``sum_i Var(M_i)`` over all pure states, by restarted local search.

    Returns ``(value, state_vector, converged)``; ``converged`` is true when the
    two best restarts agree within ``tol``.
    """
    ms = [m if isinstance(m, CompositeObservable) else CompositeObservable(m) for m in ms]
    mats = [m.matrix() for m in ms]
    sq = [a @ a for a in mats]
    dim = mats[0].shape[0]

    def f(v):
        psi = v[:dim] + 1j * v[dim:]
        psi = psi / np.linalg.norm(psi)
        total = 0.0
        for a, a2 in zip(mats, sq):
            mean = np.vdot(psi, a @ psi).real
            total += np.vdot(psi, a2 @ psi).real - mean * mean
        return total

    results = []
    for _ in range(restarts):
        res = optimize.minimize(f, rng.standard_normal(2 * dim), method="BFGS",
                                options={"gtol": 1e-10})
        results.append((float(res.fun), res.x))
    results.sort(key=lambda t: t[0])
    best, vec = results[0]
    psi = vec[:dim] + 1j * vec[dim:]
    converged = len(results) > 1 and results[1][0] - best <= tol
    return best, psi / np.linalg.norm(psi), converged


def pauli_settings(sites, count):
    """Settings ``M_i = sigma_i (x) 1 + 1 (x) sigma_i (+ ...)`` for ``i = 1..count``."""
    paulis = [QubitObservable(0.0, e) for e in np.eye(3)]
    return [CompositeObservable([paulis[i]] * sites) for i in range(count)]
