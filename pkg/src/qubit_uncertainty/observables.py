"""Qubit observables ``A = a0*I + a.sigma`` and the algebra of their vector parts."""
from dataclasses import dataclass, field
import math

import numpy as np

from ._linalg import eigvalsh_small
from .errors import DegenerateObservable

RANK_TOL = 1e-9


@dataclass(frozen=True)
class QubitObservable:
    """Hermitian 2x2 operator ``offset * I + vec . sigma``."""

    offset: float
    vec: tuple

    def __init__(self, offset, vec):
        v = tuple(float(c) for c in np.asarray(vec, dtype=float).reshape(3))
        object.__setattr__(self, "offset", float(offset))
        object.__setattr__(self, "vec", v)

    @classmethod
    def from_flat(cls, values):
        """Build from a 4-sequence ``(a0, a1, a2, a3)``."""
        values = [float(v) for v in values]
        if len(values) != 4:
            raise ValueError(f"expected 4 numbers (a0, a1, a2, a3), got {len(values)}")
        return cls(values[0], values[1:])

    @property
    def a(self):
        return np.array(self.vec)

    @property
    def norm(self):
        return math.sqrt(sum(c * c for c in self.vec))

    @property
    def is_degenerate(self):
        return self.norm == 0.0

    def matrix(self):
        """Explicit complex 2x2 matrix."""
        a1, a2, a3 = self.vec
        a0 = self.offset
        return np.array([[a0 + a3, a1 - 1j * a2], [a1 + 1j * a2, a0 - a3]])

    def __repr__(self):
        return f"QubitObservable({self.offset!r}, {self.vec!r})"


SIGMA_X = QubitObservable(0.0, (1.0, 0.0, 0.0))
SIGMA_Y = QubitObservable(0.0, (0.0, 1.0, 0.0))
SIGMA_Z = QubitObservable(0.0, (0.0, 0.0, 1.0))
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_observable(obs):
    if isinstance(obs, QubitObservable):
        return obs
    return QubitObservable.from_flat(obs)


def require_nondegenerate(family):
    for k, obs in enumerate(family):
        if obs.is_degenerate:
            raise DegenerateObservable(
                f"observable {k} is a multiple of the identity (|a| = 0)")


def stack(family):
    """3 x n matrix with the observable vectors as columns."""
    return np.array([obs.vec for obs in family], dtype=float).T.reshape(3, len(family))


def eigenvalues(obs):
    """Ascending eigenvalues ``(a0 - |a|, a0 + |a|)``."""
    r = obs.norm
    return obs.offset - r, obs.offset + r


@dataclass(frozen=True)
class GramMatrix:
    """Matrix of pairwise inner products of observable vectors."""

    entries: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def trace(self):
        return float(np.trace(self.entries))

    @property
    def eigenvalues(self):
        """Ascending spectrum; closed form up to 3x3, ``M M^T`` route otherwise."""
        return eigvalsh_small(self.entries)

    @property
    def lambda_min(self):
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])

    @property
    def det(self):
        return float(np.linalg.det(self.entries))

    def inverse(self):
        return np.linalg.inv(self.entries)


def gram(family):
    family = [as_observable(o) for o in family]
    if not family:
        raise ValueError("empty family")
    require_nondegenerate(family)
    m = stack(family)
    t = m.T @ m
    t = 0.5 * (t + t.T)
    t.setflags(write=False)
    return GramMatrix(t)


@dataclass(frozen=True)
class FamilyDecomposition:
    """Linearly independent sub-family plus expansion coefficients of the rest.

    ``coefficients[l]`` holds ``kappa_l`` with ``a_l = sum_j kappa_l[j] a_{basis[j]}``.
    """

    basis_indices: tuple
    coefficients: dict
    rank: int
    size: int

    @property
    def dependent_indices(self):
        return tuple(l for l in range(self.size) if l not in self.basis_indices)

    def kappa_matrix(self):
        """(n - r) x r array of coefficients ordered like ``dependent_indices``."""
        return np.array([self.coefficients[l] for l in self.dependent_indices]).reshape(
            -1, self.rank)


def _rank(m, tol):
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def decompose(family, tol=RANK_TOL):
    """Pick a basis of the family's vectors greedily in index order and expand the rest.

    The rank comes from singular values above ``tol`` times the largest one.
    """
    family = [as_observable(o) for o in family]
    if not family:
        raise ValueError("empty family")
    m = stack(family)
    total = _rank(m, tol)
    scale = np.linalg.svd(m, compute_uv=False)[0] if total else 0.0
    basis = []
    for k in range(m.shape[1]):
        if len(basis) == total:
            break
        trial = m[:, basis + [k]]
        s = np.linalg.svd(trial, compute_uv=False)
        if s[-1] > tol * scale:
            basis.append(k)
    coeffs = {}
    if basis:
        b = m[:, basis]
        for l in range(m.shape[1]):
            if l not in basis:
                kappa, *_ = np.linalg.lstsq(b, m[:, l], rcond=None)
                coeffs[l] = tuple(float(c) for c in kappa)
    return FamilyDecomposition(tuple(basis), coeffs, len(basis), len(family))


def angles(family):
    """Angles ``(alpha, beta, gamma)`` between (b, c), (a, c) and (a, b)."""
    family = [as_observable(o) for o in family]
    if len(family) != 3:
        raise ValueError("angles() takes exactly three observables")
    require_nondegenerate(family)
    u = [o.a / o.norm for o in family]

    def ang(p, q):
        # atan2 keeps full accuracy near 0 and pi where acos of the dot product does not
        return math.atan2(float(np.linalg.norm(np.cross(p, q))), float(np.dot(p, q)))

    return ang(u[1], u[2]), ang(u[0], u[2]), ang(u[0], u[1])
