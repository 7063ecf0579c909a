"""Uncertainty regions: the sets of attainable tuples ``(Delta A_1, ..., Delta A_n)``.

A tuple ``x`` is attainable iff some sign choice of the centred means
``eps_k sqrt(|a_k|^2 - x_k^2)`` lies in the ellipsoid ``m T^{-1} m^T <= 1`` of
the basis Gram matrix, with dependent observables pinned by their expansion
coefficients. The pair test uses the equivalent closed inequality.
"""
from dataclasses import dataclass
import itertools
import math

import numpy as np

from ._linalg import golden_max
from .errors import AngleConstraintViolated, DomainError, LinearlyDependentFamily, OutOfBox
from .observables import (FamilyDecomposition, GramMatrix, QubitObservable, angles,
                          as_observable, decompose, gram, require_nondegenerate)

BOX_TOL = 1e-9
MEMBER_TOL = 1e-12
CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class RegionSpec:
    """Ordered observable family with its Gram matrix and rank decomposition."""

    family: tuple
    gram: GramMatrix
    decomposition: FamilyDecomposition

    @property
    def size(self):
        return len(self.family)

    @property
    def rank(self):
        return self.decomposition.rank

    @property
    def norms(self):
        return np.array([o.norm for o in self.family])


def region_spec(family):
    """Build a ``RegionSpec``; rejects identity-multiple observables."""
    if isinstance(family, RegionSpec):
        return family
    fam = tuple(as_observable(o) for o in family)
    require_nondegenerate(fam)
    return RegionSpec(fam, gram(fam), decompose(fam))


def _checked_points(spec, points):
    p = np.asarray(points, dtype=float)
    if p.shape[-1] != spec.size:
        raise ValueError(f"points need last axis {spec.size}, got shape {p.shape}")
    nrm = spec.norms
    if np.any(p < -BOX_TOL) or np.any(p > nrm + BOX_TOL):
        raise OutOfBox("region coordinates must lie in [0, |a_k|]")
    return np.clip(p, 0.0, nrm)


def _roots(norms, p):
    return np.sqrt(np.clip(norms ** 2 - p ** 2, 0.0, None))


def _result(out):
    return bool(out) if np.ndim(out) == 0 else out


def contains_pair(spec, points):
    """Membership in the two-observable region via the closed inequality

    ``|b|^2 x^2 + |a|^2 y^2 + 2|<a,b>| sqrt((|a|^2-x^2)(|b|^2-y^2)) >= |a|^2|b|^2 + <a,b>^2``.
    """
    spec = region_spec(spec)
    if spec.size != 2:
        raise ValueError("contains_pair needs exactly two observables")
    if spec.rank < 2:
        raise LinearlyDependentFamily("pair region needs linearly independent vectors")
    p = _checked_points(spec, points)
    t = spec.gram.entries
    a2, b2, ab = t[0, 0], t[1, 1], abs(t[0, 1])
    x, y = p[..., 0], p[..., 1]
    root = np.sqrt(np.clip(a2 - x * x, 0.0, None) * np.clip(b2 - y * y, 0.0, None))
    lhs = b2 * x * x + a2 * y * y + 2.0 * ab * root
    rhs = a2 * b2 + ab * ab
    return _result(lhs >= rhs - MEMBER_TOL * a2 * b2)


def pair_residual(spec, points):
    """Left minus right side of the pair inequality (zero on the boundary curve)."""
    spec = region_spec(spec)
    p = np.asarray(points, dtype=float)
    t = spec.gram.entries
    a2, b2, ab = t[0, 0], t[1, 1], abs(t[0, 1])
    x, y = p[..., 0], p[..., 1]
    root = np.sqrt(np.clip(a2 - x * x, 0.0, None) * np.clip(b2 - y * y, 0.0, None))
    return b2 * x * x + a2 * y * y + 2.0 * ab * root - (a2 * b2 + ab * ab)


def _tetrahedral(alpha, beta, gamma):
    return (alpha < beta + gamma and beta < gamma + alpha and gamma < alpha + beta
            and alpha + beta + gamma < 2.0 * math.pi)


def _quadratic_union(cinv, u_abs, sign_axes):
    """True where ``(eps * u) C^{-1} (eps * u)^T <= 1`` for some sign pattern."""
    k = u_abs.shape[-1]
    hit = np.zeros(u_abs.shape[:-1], dtype=bool)
    for signs in itertools.product((1.0, -1.0), repeat=k - 1):
        u = u_abs * np.array((1.0,) + signs)
        q = np.einsum("...i,ij,...j->...", u, cinv, u)
        hit |= q <= 1.0 + MEMBER_TOL
    return hit


def contains_triple(spec, points):
    """Membership in the three-observable region.

    Vectors are normalized and coordinates rescaled by ``1/|a_k|``; the point is
    inside iff ``u C^{-1} u^T <= 1`` for one of the sign choices of ``u``, with
    ``C`` the Gram matrix of the unit vectors.
    """
    spec = region_spec(spec)
    if spec.size != 3:
        raise ValueError("contains_triple needs exactly three observables")
    if spec.rank < 3:
        raise LinearlyDependentFamily("triple region needs rank 3")
    if not _tetrahedral(*angles(spec.family)):
        raise AngleConstraintViolated("pairwise angles violate the tetrahedral conditions")
    p = _checked_points(spec, points)
    nrm = spec.norms
    corr = spec.gram.entries / np.outer(nrm, nrm)
    u = np.sqrt(np.clip(1.0 - (p / nrm) ** 2, 0.0, None))
    return _result(_quadratic_union(np.linalg.inv(corr), u, 3))


def contains_n(spec, points):
    """Membership in the region of an arbitrary family.

    Enumerates sign patterns of the basis roots; a pattern qualifies when the
    basis quadratic form is at most one and every dependent root equals
    ``|sum_j kappa_lj eps_j t_j|`` within ``1e-9 * max|a|``.
    """
    spec = region_spec(spec)
    p = _checked_points(spec, points)
    nrm = spec.norms
    dec = spec.decomposition
    basis = list(dec.basis_indices)
    t = _roots(nrm, p)
    tb = t[..., basis]
    tinv = np.linalg.inv(spec.gram.entries[np.ix_(basis, basis)])
    tol = CONSTRAINT_TOL * nrm.max()
    hit = np.zeros(p.shape[:-1], dtype=bool)
    for signs in itertools.product((1.0, -1.0), repeat=dec.rank - 1):
        eps = np.array((1.0,) + signs)
        u = tb * eps
        ok = np.einsum("...i,ij,...j->...", u, tinv, u) <= 1.0 + MEMBER_TOL
        for l in dec.dependent_indices:
            combo = u @ np.asarray(dec.coefficients[l])
            ok &= np.abs(t[..., l] - np.abs(combo)) <= tol
        hit |= ok
    return _result(hit)


def contains(spec, points):
    """Dispatch to the pair, triple or general membership test."""
    spec = region_spec(spec)
    if spec.size == 2 and spec.rank == 2:
        return contains_pair(spec, points)
    if spec.size == 3 and spec.rank == 3:
        return contains_triple(spec, points)
    return contains_n(spec, points)


def pair_angle(spec):
    """Angle between the two observable vectors, in [0, pi]."""
    spec = region_spec(spec)
    a, b = spec.family[0].a, spec.family[1].a
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))


def boundary_pair(spec, samples):
    """Points of the lower boundary curve joining ``(0, |b| sin t)`` and ``(|a| sin t, 0)``.

    The curve is traced by pure states in the plane of ``a`` and ``b``:
    ``(|a| sin phi, |b| sin(t - phi))`` for ``phi`` in ``[0, t]``, with
    ``t = min(theta, pi - theta)`` since flipping ``b`` leaves the region unchanged.
    Returns an array of shape ``(samples, 2)`` evenly spaced in ``phi``.
    """
    spec = region_spec(spec)
    if spec.size != 2:
        raise ValueError("boundary_pair needs exactly two observables")
    if spec.rank < 2:
        raise LinearlyDependentFamily("pair region needs linearly independent vectors")
    samples = int(samples)
    if samples < 2:
        raise ValueError("need at least two boundary samples")
    theta = pair_angle(spec)
    th = min(theta, math.pi - theta)
    na, nb = spec.norms
    phi = np.linspace(0.0, th, samples)
    return np.stack([na * np.sin(phi), nb * np.sin(th - phi)], axis=-1)


def area_pair(theta):
    """Area of the region of two unit-vector observables at angle ``theta`` in [0, pi/2]."""
    theta = float(theta)
    if not 0.0 <= theta <= 0.5 * math.pi:
        raise DomainError("area_pair takes theta in [0, pi/2]; map theta -> pi - theta first")
    return 0.5 * (math.pi - 3.0 * theta) * math.sin(theta) - math.cos(theta) + 1.0


def max_area(tol=1e-8):
    """Angle maximizing ``area_pair`` and the maximal area, by golden-section search."""
    return golden_max(area_pair, 0.0, 0.5 * math.pi, tol=tol)


def unit_pair(theta):
    """Two unit-vector observables at angle ``theta`` in the x-y plane."""
    return region_spec([QubitObservable(0.0, (1.0, 0.0, 0.0)),
                        QubitObservable(0.0, (math.cos(theta), math.sin(theta), 0.0))])


def membership_grid(spec, n):
    """Classify the cell midpoints of an ``n^k`` grid over the axis box.

    Returns ``(axes, inside)`` where ``axes`` lists the midpoints per axis.
    """
    spec = region_spec(spec)
    axes = [(np.arange(n) + 0.5) * (nrm / n) for nrm in spec.norms]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return axes, contains(spec, mesh)


def area_grid(theta, n=2000):
    """Area of the unit-pair region estimated by midpoint-grid counting."""
    _, inside = membership_grid(unit_pair(theta), n)
    return float(inside.mean())


def volume_mc(spec, samples, rng, chunk=1_000_000):
    """Monte Carlo volume of the region inside its axis box.

    Returns ``(estimate, stderr)`` with the binomial standard error of the hit
    fraction scaled by the box volume.
    """
    spec = region_spec(spec)
    samples = int(samples)
    nrm = spec.norms
    hits = 0
    left = samples
    while left > 0:
        m = min(chunk, left)
        pts = rng.random((m, spec.size)) * nrm
        hits += int(np.count_nonzero(contains(spec, pts)))
        left -= m
    frac = hits / samples
    box = float(np.prod(nrm))
    return frac * box, box * math.sqrt(frac * (1.0 - frac) / samples)
