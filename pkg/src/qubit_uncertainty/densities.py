"""Probability densities of mean values and uncertainties under the induced measure.

Mean-value densities live on the ellipsoid ``omega <= 1`` where ``omega`` is the
Mahalanobis norm of the centred means with respect to the Gram matrix. The
uncertainty densities are obtained from them by the change of variables
``t = sqrt(|a|^2 - x^2) = |<A> - a0|``; internally every uncertainty density is
evaluated through this root coordinate, which is also what makes quadrature
and histogram bin masses well conditioned at the singular edge ``x -> |a|``.

Linearly dependent families carry delta factors. These are never evaluated as
spikes: a constrained descriptor holds a lower-dimensional base density plus a
list of relations that pin the dependent coordinates.
"""
from dataclasses import dataclass, field
import itertools
import math

import numpy as np
from scipy import integrate, special

from .errors import DegenerateObservable, LinearlyDependentFamily
from .observables import as_observable, decompose, gram, require_nondegenerate

SQRT_CLAMP = 1e-12
CONSTRAINT_TOL = 1e-9


def _clamped_root(sq, scale2):
    """sqrt of ``sq`` with tiny negative values (rounding at the boundary) set to 0."""
    sq = np.where((sq < 0) & (sq >= -SQRT_CLAMP * scale2), 0.0, sq)
    return np.sqrt(np.where(sq < 0, np.nan, sq))


@dataclass(frozen=True)
class AffineRelation:
    """Delta factor ``(p[target] - o_target) = sum_j kappa_j (p[source_j] - o_j)``."""

    target: int
    sources: tuple
    coefficients: tuple
    offsets: tuple

    def residual(self, points):
        p = np.asarray(points, dtype=float)
        off = np.asarray(self.offsets)
        lhs = p[..., self.target] - off[self.target]
        rhs = sum(k * (p[..., j] - off[j]) for k, j in zip(self.coefficients, self.sources))
        return lhs - rhs


@dataclass(frozen=True)
class SignedRelation:
    """Delta factor on uncertainties, resolved per sign pattern of the source roots.

    With roots ``t_k = sqrt(|a_k|^2 - x_k^2)`` the relation reads
    ``eps_target t_target = sum_j kappa_j eps_j t_j``; since ``eps_target`` is free
    this is ``t_target = |sum_j kappa_j eps_j t_j|``.
    """

    target: int
    sources: tuple
    coefficients: tuple
    norms: tuple

    def residual(self, points, signs):
        """Residual for one sign assignment ``signs`` over ``sources``."""
        p = np.asarray(points, dtype=float)
        nrm = np.asarray(self.norms)
        t = _clamped_root(nrm ** 2 - p ** 2, nrm ** 2)
        combo = sum(k * e * t[..., j] for k, e, j in zip(self.coefficients, signs, self.sources))
        return t[..., self.target] - np.abs(combo)


@dataclass(frozen=True)
class DensityDescriptor:
    """Analytic density: continuous part, support predicate and optional delta factors.

    For ``kind == "constrained"`` the continuous part is a density in the basis
    coordinates ``basis_indices`` and is zero wherever the relations fail.
    ``box`` gives per-axis ``(lo, hi)`` bounds of the support.
    """

    kind: str
    dim: int
    name: str
    family: tuple
    box: tuple
    _eval: object = field(repr=False)
    _support: object = field(repr=False)
    constraints: tuple = ()
    base: object = None
    basis_indices: tuple = ()
    params: dict = field(default_factory=dict, repr=False)

    def _points(self, points):
        p = np.asarray(points, dtype=float)
        if self.dim == 1 and (p.ndim == 0 or p.shape[-1] != 1):
            p = p[..., None]
        if p.shape[-1] != self.dim:
            raise ValueError(f"expected points with last axis {self.dim}, got shape {p.shape}")
        return p

    def eval(self, points):
        """Density value (continuous part); accepts one point or a stack of points."""
        p = self._points(points)
        out = np.asarray(self._eval(p), dtype=float)
        return float(out) if out.ndim == 0 else out

    def support(self, points):
        p = self._points(points)
        out = np.asarray(self._support(p), dtype=bool)
        return bool(out) if out.ndim == 0 else out

    def __call__(self, points):
        return self.eval(points)

    def constraint_residual(self, points):
        """Largest relation violation, minimized over sign patterns for uncertainty relations."""
        p = np.asarray(points, dtype=float)
        if not self.constraints:
            return np.zeros(p.shape[:-1])
        if isinstance(self.constraints[0], AffineRelation):
            return np.max(np.abs([c.residual(p) for c in self.constraints]), axis=0)
        best = None
        for signs in _sign_patterns(len(self.basis_indices)):
            res = np.max(np.abs([c.residual(p, signs) for c in self.constraints]), axis=0)
            best = res if best is None else np.minimum(best, res)
        return best


def _sign_patterns(r):
    """Sign tuples of length ``r`` with the first entry fixed to +1."""
    return [(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=r - 1)]


def _family(obs_list):
    fam = tuple(as_observable(o) for o in obs_list)
    require_nondegenerate(fam)
    return fam


# ---------------------------------------------------------------- mean values

def pdf_mean(obs):
    """Density of ``<A>``: ``(3 / 4|a|^3) (r - l1)(l2 - r)`` on ``[l1, l2]``."""
    (obs,) = _family([obs])
    a0, n = obs.offset, obs.norm
    lo, hi = a0 - n, a0 + n
    c = 3.0 / (4.0 * n ** 3)

    def ev(p):
        r = p[..., 0]
        return np.where((r >= lo) & (r <= hi), c * (r - lo) * (hi - r), 0.0)

    def sup(p):
        return (p[..., 0] >= lo) & (p[..., 0] <= hi)

    return DensityDescriptor("continuous", 1, "mean", (obs,), ((lo, hi),), ev, sup)


def _ellipsoid_parts(fam):
    t = gram(fam).entries
    return np.linalg.inv(t), float(np.linalg.det(t)), np.array([o.offset for o in fam])


def _omega2(tinv, offsets, p):
    d = p - offsets
    return np.einsum("...i,ij,...j->...", d, tinv, d)


def _box(fam):
    return tuple((o.offset - o.norm, o.offset + o.norm) for o in fam)


def _continuous_mean_pair(fam):
    tinv, det, off = _ellipsoid_parts(fam)
    c = 3.0 / (2.0 * math.pi * math.sqrt(det))

    def ev(p):
        w2 = _omega2(tinv, off, p)
        return np.where(w2 < 1.0, c * np.sqrt(np.clip(1.0 - w2, 0.0, None)), 0.0)

    def sup(p):
        return _omega2(tinv, off, p) <= 1.0 + SQRT_CLAMP

    return DensityDescriptor("continuous", 2, "mean2", fam, _box(fam), ev, sup,
                             params={"tinv": tinv, "det": det, "offsets": off})


def _continuous_mean_triple(fam):
    tinv, det, off = _ellipsoid_parts(fam)
    c = 3.0 / (8.0 * math.pi * math.sqrt(det))

    def ev(p):
        w = np.sqrt(np.clip(_omega2(tinv, off, p), 0.0, None))
        # sign(0) = 0 halves the value on the boundary shell
        return c * (1.0 + np.sign(1.0 - w))

    def sup(p):
        return _omega2(tinv, off, p) <= 1.0 + SQRT_CLAMP

    return DensityDescriptor("continuous", 3, "mean3", fam, _box(fam), ev, sup,
                             params={"tinv": tinv, "det": det, "offsets": off,
                                     "level": 2.0 * c})


def _continuous_mean(fam):
    return {1: lambda f: pdf_mean(f[0]), 2: _continuous_mean_pair,
            3: _continuous_mean_triple}[len(fam)](fam)


def _constrained_mean(fam, dec, name):
    basis = dec.basis_indices
    base = _continuous_mean(tuple(fam[j] for j in basis))
    off = tuple(o.offset for o in fam)
    rels = tuple(AffineRelation(l, basis, dec.coefficients[l], off)
                 for l in dec.dependent_indices)
    scale = max(o.norm for o in fam)

    def ev(p):
        ok = np.all([np.abs(r.residual(p)) <= CONSTRAINT_TOL * scale for r in rels], axis=0)
        return np.where(ok, base.eval(p[..., list(basis)]), 0.0)

    def sup(p):
        ok = np.all([np.abs(r.residual(p)) <= CONSTRAINT_TOL * scale for r in rels], axis=0)
        return ok & base.support(p[..., list(basis)])

    return DensityDescriptor("constrained", len(fam), name, fam, _box(fam), ev, sup,
                             constraints=rels, base=base, basis_indices=basis)


def pdf_mean_pair(a_obs, b_obs):
    """Joint density of ``(<A>, <B>)``; a delta relation replaces it for parallel vectors."""
    fam = _family([a_obs, b_obs])
    dec = decompose(fam)
    if dec.rank == 2:
        return _continuous_mean_pair(fam)
    return _constrained_mean(fam, dec, "mean2")


def pdf_mean_triple(a_obs, b_obs, c_obs):
    """Joint density of three mean values; uniform on the ellipsoid for rank 3."""
    fam = _family([a_obs, b_obs, c_obs])
    dec = decompose(fam)
    if dec.rank == 3:
        return _continuous_mean_triple(fam)
    return _constrained_mean(fam, dec, "mean3")


def pdf_mean_n(family):
    """Joint density of ``n`` mean values: basis density plus ``n - rank`` affine relations."""
    fam = _family(family)
    if not fam:
        raise ValueError("empty family")
    dec = decompose(fam)
    if dec.rank == len(fam):
        return _continuous_mean(fam)
    return _constrained_mean(fam, dec, "mean_n")


# --------------------------------------------------------------- uncertainties

def _roots(fam, p):
    nrm = np.array([o.norm for o in fam])
    return _clamped_root(nrm ** 2 - p ** 2, nrm ** 2)


def _in_box(fam, p, closed=False):
    nrm = np.array([o.norm for o in fam])
    upper = (p <= nrm) if closed else (p < nrm)
    return np.all((p >= 0) & upper, axis=-1)


def _folded(mean_desc, fam, t, signs_list):
    """``sum_signs f_mean(a0 + eps t)`` over the given sign patterns."""
    off = np.array([o.offset for o in fam])
    total = 0.0
    for s in signs_list:
        total = total + mean_desc.eval(off + np.asarray(s) * t)
    return total


def _uncertainty_from_mean(mean_desc, fam, name):
    """Uncertainty density ``2 prod(x/t) sum_{eps, eps_1=+} f_mean(a0 + eps t)``."""
    k = len(fam)
    signs = _sign_patterns(k)
    off = np.array([o.offset for o in fam])
    tinv = mean_desc.params.get("tinv")

    def folded(t):
        return 2.0 * _folded(mean_desc, fam, t, signs)

    def ev(p):
        inside = _in_box(fam, p)
        q = np.where(inside[..., None], p, 0.5 * np.array([o.norm for o in fam]))
        t = _roots(fam, q)
        jac = np.prod(q / t, axis=-1)
        return np.where(inside, jac * folded(t), 0.0)

    def sup(p):
        inside = _in_box(fam, p, closed=True)
        q = np.where(inside[..., None], p, 0.0)
        t = _roots(fam, q)
        hit = np.zeros(np.shape(inside), dtype=bool)
        for s in signs:
            hit |= _omega2(tinv, off, off + np.asarray(s) * t) <= 1.0 + SQRT_CLAMP
        return inside & hit

    box = tuple((0.0, o.norm) for o in fam)
    return DensityDescriptor("continuous", k, name, fam, box, ev, sup,
                             params={"folded": folded, "mean": mean_desc, "tinv": tinv,
                                     "offsets": off, "signs": signs})


def pdf_uncertainty(obs):
    """Density of ``Delta A``: ``3 x^3 / (2 |a|^3 sqrt(|a|^2 - x^2))`` on ``[0, |a|)``."""
    (obs,) = _family([obs])
    n = obs.norm
    mean_desc = pdf_mean(obs)

    def folded(t):
        return 2.0 * mean_desc.eval(obs.offset + t)

    def ev(p):
        x = p[..., 0]
        inside = (x >= 0) & (x < n)
        xs = np.where(inside, x, 0.5 * n)
        t = _clamped_root(n * n - xs * xs, n * n)
        return np.where(inside, 3.0 * xs ** 3 / (2.0 * n ** 3 * t), 0.0)

    def sup(p):
        return (p[..., 0] >= 0) & (p[..., 0] <= n)

    return DensityDescriptor("continuous", 1, "uncertainty", (obs,), ((0.0, n),), ev, sup,
                             params={"folded": folded, "mean": mean_desc})


def pdf_uncertainty_pair(a_obs, b_obs):
    """Joint density of ``(Delta A, Delta B)`` for linearly independent vectors."""
    fam = _family([a_obs, b_obs])
    if decompose(fam).rank < 2:
        raise LinearlyDependentFamily("uncertainty pair density needs independent vectors")
    return _uncertainty_from_mean(_continuous_mean_pair(fam), fam, "uncertainty2")


def pdf_uncertainty_triple(a_obs, b_obs, c_obs):
    """Joint density of three uncertainties for a rank-3 family."""
    fam = _family([a_obs, b_obs, c_obs])
    if decompose(fam).rank < 3:
        raise LinearlyDependentFamily("uncertainty triple density needs rank 3")
    return _uncertainty_from_mean(_continuous_mean_triple(fam), fam, "uncertainty3")


def _continuous_uncertainty(fam):
    if len(fam) == 1:
        return pdf_uncertainty(fam[0])
    if len(fam) == 2:
        return pdf_uncertainty_pair(*fam)
    return pdf_uncertainty_triple(*fam)


def pdf_uncertainty_n(family):
    """Joint density of ``n`` uncertainties.

    Dependent coordinates are pinned by sign-resolved relations. The continuous
    part in the basis coordinates sums the basis mean density only over those
    sign patterns for which every relation holds.
    """
    fam = _family(family)
    if not fam:
        raise ValueError("empty family")
    dec = decompose(fam)
    if dec.rank == len(fam):
        return _continuous_uncertainty(fam)
    basis = list(dec.basis_indices)
    bfam = tuple(fam[j] for j in basis)
    base = _continuous_uncertainty(bfam)
    mean_base = _continuous_mean(bfam)
    norms = tuple(o.norm for o in fam)
    rels = tuple(SignedRelation(l, tuple(basis), dec.coefficients[l], norms)
                 for l in dec.dependent_indices)
    signs_all = _sign_patterns(dec.rank)
    boff = np.array([o.offset for o in bfam])
    tol = CONSTRAINT_TOL * max(norms)

    def ev(p):
        inside = _in_box(fam, p)
        q = np.where(inside[..., None], p, 0.5 * np.array(norms))
        tb = _roots(bfam, q[..., basis])
        jac = np.prod(q[..., basis] / tb, axis=-1)
        total = 0.0
        for s in signs_all:
            ok = np.all([np.abs(r.residual(q, s)) <= tol for r in rels], axis=0)
            total = total + np.where(ok, mean_base.eval(boff + np.asarray(s) * tb), 0.0)
        return np.where(inside, 2.0 * jac * total, 0.0)

    def sup(p):
        inside = _in_box(fam, p, closed=True)
        q = np.where(inside[..., None], p, 0.0)
        ok_any = np.zeros(np.shape(inside), dtype=bool)
        for s in signs_all:
            ok_any |= np.all([np.abs(r.residual(q, s)) <= tol for r in rels], axis=0)
        return inside & ok_any & base.support(q[..., basis])

    box = tuple((0.0, n) for n in norms)
    return DensityDescriptor("constrained", len(fam), "uncertainty_n", fam, box, ev, sup,
                             constraints=rels, base=base, basis_indices=tuple(basis))


# ---------------------------------------------------------------- quadrature

def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def _gl_nodes(lo, hi, n):
    """Gauss-Legendre nodes and weights on each interval of the arrays ``lo``/``hi``."""
    x, w = _gauss(n)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _window(tinv, fixed, axis, sign):
    """Interval of ``t`` where ``omega^2(fixed + sign t e_axis) <= 1``.

    ``omega^2`` is quadratic in ``t``; returns ``(lo, hi)`` arrays, empty when lo >= hi.
    """
    qa = tinv[axis, axis]
    qb = 2.0 * sign * (fixed @ tinv[:, axis])
    qc = np.einsum("...i,ij,...j->...", fixed, tinv, fixed) - 1.0
    disc = qb * qb - 4.0 * qa * qc
    root = np.sqrt(np.clip(disc, 0.0, None))
    lo = (-qb - root) / (2.0 * qa)
    hi = (-qb + root) / (2.0 * qa)
    lo = np.where(disc > 0, lo, 0.0)
    hi = np.where(disc > 0, hi, 0.0)
    return lo, hi


def _chord(tinv, fixed, axis, sign, t_lo, t_hi):
    """Length of ``[t_lo, t_hi]`` inside the unit ellipsoid along ``sign e_axis``."""
    lo, hi = _window(tinv, fixed, axis, sign)
    return np.clip(np.minimum(hi, t_hi) - np.maximum(lo, t_lo), 0.0, None)


def normalization(desc):
    """Numerical integral of a continuous descriptor over its support.

    One-dimensional uncertainty densities use ``x = |a| sin(phi)``; joint
    uncertainty densities use the same substitution on every axis, with the
    discontinuities of the three-dimensional integrand located exactly and
    integrated piecewise. Mean densities are integrated in ellipsoidal polar
    coordinates with a margin outside the support.
    """
    if desc.kind != "continuous":
        raise ValueError("normalization is defined for continuous descriptors only")
    name = desc.name
    if name == "mean":
        lo, hi = desc.box[0]
        pad = 0.1 * (hi - lo)
        val, _ = integrate.quad(lambda r: desc.eval(r), lo - pad, hi + pad,
                                points=[lo, hi], epsabs=1e-13, epsrel=1e-13)
        return val
    if name == "uncertainty":
        n = desc.family[0].norm
        val, _ = integrate.quad(
            lambda phi: desc.eval(n * math.sin(phi)) * n * math.cos(phi),
            0.0, 0.5 * math.pi, epsabs=1e-12, epsrel=1e-12)
        return val
    if name == "mean2":
        return _normalize_mean_pair(desc)
    if name == "mean3":
        return _normalize_mean_triple(desc)
    if name == "uncertainty2":
        return _normalize_uncertainty_pair(desc)
    if name == "uncertainty3":
        return _normalize_uncertainty_triple(desc)
    raise ValueError(f"no quadrature rule for density {name!r}")


def _normalize_mean_pair(desc):
    t = gram(desc.family).entries
    chol = np.linalg.cholesky(t)
    off = desc.params["offsets"]
    jac = abs(np.linalg.det(chol))

    def radial(rho):
        th, wt = _gl_nodes(0.0, 2.0 * math.pi, 64)
        u = rho * np.stack([np.cos(th), np.sin(th)], axis=-1)
        pts = off + u @ chol.T
        return float(np.sum(wt * desc.eval(pts))) * rho

    val, _ = integrate.quad(radial, 0.0, 1.25, points=[1.0], epsabs=1e-12, epsrel=1e-12,
                            limit=200)
    return jac * val


def _normalize_mean_triple(desc):
    t = gram(desc.family).entries
    chol = np.linalg.cholesky(t)
    off = desc.params["offsets"]
    jac = abs(np.linalg.det(chol))
    th, wt = _gl_nodes(0.0, math.pi, 24)
    ph, wp = _gl_nodes(0.0, 2.0 * math.pi, 24)
    total = 0.0
    # the density is constant inside the ellipsoid; split the radius at the shell
    for lo, hi in ((0.0, 1.0), (1.0, 1.25)):
        rr, wr = _gl_nodes(lo, hi, 24)
        R, TH, PH = np.meshgrid(rr, th, ph, indexing="ij")
        W = wr[:, None, None] * wt[None, :, None] * wp[None, None, :]
        u = np.stack([R * np.sin(TH) * np.cos(PH), R * np.sin(TH) * np.sin(PH),
                      R * np.cos(TH)], axis=-1)
        vals = desc.eval(off + u @ chol.T)
        total += float(np.sum(W * vals * R ** 2 * np.sin(TH)))
    return jac * total


def _sin2_pieces(cuts, n):
    """Nodes and weights on each piece ``[c0, c1]`` after ``c = c0 + (c1 - c0) sin^2 u``.

    The map smooths square-root behaviour at both ends of every piece.
    """
    u, w = _gl_nodes(0.0, 0.5 * math.pi, n)
    u, w = u.ravel(), w.ravel()
    nodes, weights = [], []
    for c0, c1 in zip(cuts[:-1], cuts[1:]):
        nodes.append(c0 + (c1 - c0) * np.sin(u) ** 2)
        weights.append(w * 2.0 * (c1 - c0) * np.sin(u) * np.cos(u))
    return np.concatenate(nodes), np.concatenate(weights)


def _angle_cuts(tinv, fixed, axis, norm, signs):
    """Angles ``acos(t / norm)`` where some sign branch crosses the ellipsoid surface."""
    cuts = [0.0, 0.5 * math.pi]
    for sgn, fx in zip(signs, fixed):
        lo, hi = _window(tinv, fx, axis, sgn)
        for t in (float(lo), float(hi)):
            if 0.0 < t < norm:
                cuts.append(math.acos(t / norm))
    return np.unique(cuts)


def _normalize_uncertainty_pair(desc):
    na, nb = (o.norm for o in desc.family)
    tinv = desc.params["tinv"]

    def inner(phi):
        ta = na * math.cos(phi)
        fixed = [np.array([ta, 0.0]), np.array([ta, 0.0])]
        cuts = _angle_cuts(tinv, fixed, 1, nb, (1.0, -1.0))
        psi, w = _sin2_pieces(cuts, 24)
        pts = np.stack([np.full_like(psi, na * math.sin(phi)), nb * np.sin(psi)], axis=-1)
        jac = na * math.cos(phi) * nb * np.cos(psi)
        return float(np.sum(w * desc.eval(pts) * jac))

    # the inner integral has kinks where the ellipse boundary meets the edges t_b = 0, |b|
    edges = [np.array([0.0, 0.0]), np.array([0.0, nb]), np.array([0.0, -nb])]
    phi_cuts = _angle_cuts(tinv, edges, 0, na, (1.0, 1.0, 1.0))
    val, _ = integrate.quad(inner, 0.0, 0.5 * math.pi, points=phi_cuts[1:-1],
                            epsabs=1e-11, epsrel=1e-11, limit=200)
    return val


def _normalize_uncertainty_triple(desc):
    na, nb, nc = (o.norm for o in desc.family)
    tinv = desc.params["tinv"]
    # the (t_a, t_b) silhouette of the ellipsoid is governed by the leading 2x2 block
    sil_inv = np.linalg.inv(np.linalg.inv(tinv)[:2, :2])
    x_gl, w_gl = _gauss(10)
    signs = list(itertools.product((1.0, -1.0), repeat=2))

    def inner(phi, psi):
        """Integral over chi for arrays of (phi, psi), split where eval jumps."""
        ta, tb = na * np.cos(phi), nb * np.cos(psi)
        cuts = [np.zeros_like(ta), np.full_like(ta, 0.5 * math.pi)]
        for sb, sc in signs:
            fixed = np.stack([ta, sb * tb, np.zeros_like(ta)], axis=-1)
            lo, hi = _window(tinv, fixed, 2, sc)
            for t in (lo, hi):
                inside = (t > 0.0) & (t < nc)
                cuts.append(np.where(inside, np.arccos(np.clip(t / nc, -1.0, 1.0)), 0.0))
        cuts = np.sort(np.stack(cuts, axis=-1), axis=-1)
        c0, c1 = cuts[..., :-1, None], cuts[..., 1:, None]
        chi = c0 + 0.5 * (c1 - c0) * (x_gl + 1.0)
        shape = chi.shape
        pts = np.stack([np.broadcast_to((na * np.sin(phi))[..., None, None], shape),
                        np.broadcast_to((nb * np.sin(psi))[..., None, None], shape),
                        nc * np.sin(chi)], axis=-1)
        jac = (na * np.cos(phi) * nb * np.cos(psi))[..., None, None] * nc * np.cos(chi)
        vals = desc.eval(pts) * jac * w_gl * 0.5 * (c1 - c0)
        return vals.sum(axis=(-1, -2))

    def middle(phi):
        ta = na * math.cos(phi)
        fixed = [np.array([ta, 0.0, z]) for z in (0.0, nc, -nc)]
        cuts = list(_angle_cuts(tinv, fixed + fixed, 1, nb, (1.0,) * 3 + (-1.0,) * 3))
        cuts += list(_angle_cuts(sil_inv, [np.array([ta, 0.0])] * 2, 1, nb, (1.0, -1.0)))
        psi, w = _sin2_pieces(np.unique(cuts), 16)
        return float(np.sum(w * inner(np.full_like(psi, phi), psi)))

    val, _ = integrate.quad(middle, 0.0, 0.5 * math.pi, epsabs=1e-9, epsrel=1e-9, limit=200)
    return val


# ------------------------------------------------------------ histogram masses

def bin_masses(desc, edges, nodes=8):
    """Probability mass of every histogram bin under a continuous descriptor.

    ``edges`` is one array of bin edges per axis. Uncertainty axes are mapped to
    the root coordinate ``t = sqrt(|a|^2 - x^2)``, where the density is the
    folded mean density and has no endpoint singularity. For the
    three-dimensional densities the innermost integral of the piecewise
    constant mean density is the exact chord length through the ellipsoid.
    """
    if desc.kind != "continuous":
        raise ValueError("bin masses need a continuous descriptor")
    edges = [np.asarray(e, dtype=float) for e in edges]
    if len(edges) != desc.dim:
        raise ValueError("one edge array per axis expected")
    name = desc.name
    if name in ("mean", "mean2"):
        return _masses_direct(desc, edges, nodes)
    if name == "mean3":
        return _masses_mean3(desc, edges, nodes)
    norms = [o.norm for o in desc.family]
    t_edges = [np.sqrt(np.clip(n * n - e ** 2, 0.0, None)) for n, e in zip(norms, edges)]
    if name == "uncertainty3":
        return _masses_unc3(desc, t_edges, nodes)
    folded = desc.params["folded"]
    return _masses_tensor(folded, [(te[1:], te[:-1]) for te in t_edges], nodes)


def _masses_tensor(fn, intervals, nodes):
    """Tensor Gauss-Legendre integral of ``fn`` over every box of the product grid."""
    axes = [_gl_nodes(lo, hi, nodes) for lo, hi in intervals]
    dim = len(axes)
    shape = tuple(len(lo) for lo, _ in intervals)
    grids = np.meshgrid(*[a[0].ravel() for a in axes], indexing="ij")
    pts = np.stack(grids, axis=-1)
    vals = np.asarray(fn(pts), dtype=float)
    w = axes[0][1].ravel()
    for a in axes[1:]:
        w = np.multiply.outer(w, a[1].ravel())
    vals = (vals * w).reshape(sum(((s, nodes) for s in shape), ()))
    return vals.sum(axis=tuple(range(1, 2 * dim, 2)))


def _masses_direct(desc, edges, nodes):
    return _masses_tensor(desc.eval, [(e[:-1], e[1:]) for e in edges], nodes)


def _masses_mean3(desc, edges, nodes):
    tinv, off, level = desc.params["tinv"], desc.params["offsets"], desc.params["level"]
    ex, ey, ez = edges

    def fn(pts):
        fixed = np.concatenate([pts - off[:2], np.zeros(pts.shape[:-1] + (1,))], axis=-1)
        lo = ez[:-1] - off[2]
        hi = ez[1:] - off[2]
        chord = _chord(tinv, fixed[..., None, :], 2, 1.0, lo, hi)
        # chord is measured from the centre along +e_z; negative bins use the window directly
        return level * chord

    out = _masses_tensor_vector(fn, [(ex[:-1], ex[1:]), (ey[:-1], ey[1:])], nodes, len(ez) - 1)
    return out


def _masses_unc3(desc, t_edges, nodes):
    tinv = desc.params["tinv"]
    level = desc.params["mean"].params["level"]
    ta_e, tb_e, tc_e = t_edges

    def fn(pts):
        tot = 0.0
        for sb, sc in itertools.product((1.0, -1.0), repeat=2):
            fixed = np.concatenate([pts[..., :1], sb * pts[..., 1:2],
                                    np.zeros(pts.shape[:-1] + (1,))], axis=-1)
            tot = tot + _chord(tinv, fixed[..., None, :], 2, sc, tc_e[1:], tc_e[:-1])
        return 2.0 * level * tot

    return _masses_tensor_vector(fn, [(ta_e[1:], ta_e[:-1]), (tb_e[1:], tb_e[:-1])],
                                 nodes, len(tc_e) - 1)


def _masses_tensor_vector(fn, intervals, nodes, nz):
    """Like ``_masses_tensor`` for an ``fn`` returning a trailing axis of ``nz`` bin values."""
    axes = [_gl_nodes(lo, hi, nodes) for lo, hi in intervals]
    shape = tuple(len(lo) for lo, _ in intervals)
    grids = np.meshgrid(*[a[0].ravel() for a in axes], indexing="ij")
    pts = np.stack(grids, axis=-1)
    vals = np.asarray(fn(pts), dtype=float)
    w = np.multiply.outer(axes[0][1].ravel(), axes[1][1].ravel())
    vals = (vals * w[..., None]).reshape(shape[0], nodes, shape[1], nodes, nz)
    return vals.sum(axis=(1, 3))


def histogram_l1(desc, samples, edges, exclude_singular=True, nodes=8):
    """L1 distance between empirical bin frequencies and analytic bin masses.

    For uncertainty densities the outermost bin on each axis (touching the
    inverse-square-root edge) is left out when ``exclude_singular`` is set.
    Returns ``(l1, counts, masses)``.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    counts, _ = np.histogramdd(samples, bins=edges)
    freq = counts / samples.shape[0]
    masses = bin_masses(desc, edges, nodes)
    diff = np.abs(freq - masses)
    if exclude_singular and desc.name.startswith("uncertainty"):
        keep = tuple(slice(0, -1) for _ in range(desc.dim))
        diff = diff[keep]
    return float(diff.sum()), counts, masses


# ------------------------------------------------------------- Bessel identity

def _damped_bessel_integral(lam, eps, panels_per_unit=4, order=16):
    qmax = 40.0 / eps
    n_panels = int(math.ceil(qmax * panels_per_unit))
    edges = np.linspace(0.0, qmax, n_panels + 1)
    q, w = _gl_nodes(edges[:-1], edges[1:], order)
    q, w = q.ravel(), w.ravel()
    small = q < 1e-3
    # (sin q - q cos q)/q^2 = q/3 - q^3/30 + ... near the origin
    core = np.where(small, q / 3.0 - q ** 3 / 30.0,
                    (np.sin(q) - q * np.cos(q)) / np.where(small, 1.0, q) ** 2)
    return float(np.sum(w * core * special.j0(lam * q) * np.exp(-eps * q)))


def bessel_identity_check(lam, eps=0.01):
    """Evaluate ``int_0^inf (sin q - q cos q)/q^2 J0(lam q) dq`` numerically.

    The oscillatory tail is tamed with a factor ``exp(-eps q)``; three damping
    levels ``eps, eps/2, eps/4`` are combined by Richardson extrapolation to
    cancel the ``O(eps)`` and ``O(eps^2)`` bias.
    """
    lam = float(lam)
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    f1 = _damped_bessel_integral(lam, eps)
    f2 = _damped_bessel_integral(lam, 0.5 * eps)
    f4 = _damped_bessel_integral(lam, 0.25 * eps)
    return (8.0 * f4 - 6.0 * f2 + f1) / 3.0
