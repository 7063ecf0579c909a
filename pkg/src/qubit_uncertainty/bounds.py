"""State-independent lower bounds on sums of variances and deviations.

The minimum of ``sum x_k^2`` over the uncertainty region equals
``sum |a_k|^2 - max_{|r|<=1} |M^T r|^2`` where ``M`` stacks the observable
vectors, i.e. the trace of the Gram matrix minus its largest eigenvalue. For
two observables this is the smaller Gram eigenvalue. A grid-plus-simplex
search over pure states serves as an independent oracle.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize

from ._linalg import eigvalsh2, eigvalsh3, top_eigvec3
from .errors import LinearlyDependentFamily
from .observables import as_observable, decompose, gram, require_nondegenerate, stack


@dataclass(frozen=True)
class BoundReport:
    """A bound value with a region point attaining it."""

    kind: str
    value: float
    argmin_point: tuple
    method: str
    note: str = ""
    extra: dict = field(default_factory=dict, repr=False)


def _family(obs_list, size=None):
    fam = tuple(as_observable(o) for o in obs_list)
    if not fam:
        raise ValueError("empty family")
    if size is not None and len(fam) != size:
        raise ValueError(f"expected {size} observables, got {len(fam)}")
    require_nondegenerate(fam)
    return fam


def _uncertainties(fam, r):
    """Uncertainty tuple of the Bloch vector(s) ``r``."""
    m = stack(fam)
    proj = np.asarray(r) @ m
    return np.sqrt(np.clip(m.T.dot(m).diagonal() - proj ** 2, 0.0, None))


def optimal_state(family):
    """Pure state maximizing ``sum <a_k, r>^2``: top eigenvector of ``M M^T``."""
    m = stack(family)
    return top_eigvec3(m @ m.T)


def _witness(fam):
    return tuple(float(v) for v in _uncertainties(fam, optimal_state(fam)))


def variance_sum_bound_pair(a_obs, b_obs):
    """``Var A + Var B >= lambda_min(T)``, the smaller eigenvalue of the 2x2 Gram matrix.

    A parallel pair returns 0 (a common eigenstate exists) with an explanatory note.
    """
    fam = _family([a_obs, b_obs])
    if decompose(fam).rank < 2:
        return BoundReport("variance_sum", 0.0, (0.0, 0.0), "eigenvalue_formula",
                           note="linearly dependent pair: common eigenstate gives 0")
    lam = eigvalsh2(gram(fam).entries)
    return BoundReport("variance_sum", max(float(lam[0]), 0.0), _witness(fam),
                       "eigenvalue_formula")


def deviation_sum_bound_pair(a_obs, b_obs):
    """``Delta A + Delta B >= |a x b| / max(|a|, |b|)``.

    The bound is attained at an axis intercept of the region; when ``|a| = |b|``
    both intercepts qualify and ``(0, |b| sin theta)`` is reported.
    """
    fam = _family([a_obs, b_obs])
    a, b = fam[0].a, fam[1].a
    na, nb = fam[0].norm, fam[1].norm
    cross = float(np.linalg.norm(np.cross(a, b)))
    value = cross / max(na, nb)
    sin_t = cross / (na * nb)
    if value == 0.0:
        return BoundReport("deviation_sum", 0.0, (0.0, 0.0), "cross_product_formula",
                           note="linearly dependent pair: common eigenstate gives 0")
    point = (0.0, nb * sin_t) if nb <= na else (na * sin_t, 0.0)
    return BoundReport("deviation_sum", value, point, "cross_product_formula")


def variance_sum_bound_triple(a_obs, b_obs, c_obs):
    """``Var A + Var B + Var C >= Tr T - lambda_max(T)`` for a rank-3 family."""
    fam = _family([a_obs, b_obs, c_obs])
    if decompose(fam).rank < 3:
        raise LinearlyDependentFamily("triple bound needs three independent vectors")
    t = gram(fam).entries
    lam = eigvalsh3(t)
    value = float(np.trace(t) - lam[-1])
    return BoundReport("variance_sum", max(value, 0.0), _witness(fam), "eigenvalue_formula")


def variance_sum_bound_n(family):
    """``sum Var A_k >= sum |a_k|^2 - lambda_max``, with ``lambda_max`` taken from the
    3x3 matrix ``M M^T`` (same non-zero spectrum as the n x n Gram matrix)."""
    fam = _family(family)
    m = stack(fam)
    lam = eigvalsh3(m @ m.T)
    value = float(np.sum(m * m) - lam[-1])
    return BoundReport("variance_sum", max(value, 0.0), _witness(fam), "eigenvalue_formula")


def fibonacci_sphere(n):
    """``n`` nearly uniform unit vectors on the sphere."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    rho = np.sqrt(1.0 - z * z)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def _objective(fam, kind):
    m = stack(fam)
    norms2 = np.sum(m * m, axis=0)

    def f(r):
        proj = np.asarray(r) @ m
        var = np.clip(norms2 - proj ** 2, 0.0, None)
        return var.sum(axis=-1) if kind == "sum_of_squares" else np.sqrt(var).sum(axis=-1)

    return f


def _sphere_point(angles):
    th, ph = angles
    return np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])


def brute_force_min(family, objective="sum_of_squares", resolution=400, starts=3):
    """Minimize ``sum x_k^2`` or ``sum x_k`` over pure states by grid search plus refinement.

    ``resolution^2`` Fibonacci-sphere points are scored; the best ``starts`` of
    them seed a Nelder-Mead search in spherical angles.
    """
    if objective not in ("sum_of_squares", "sum"):
        raise ValueError("objective must be 'sum_of_squares' or 'sum'")
    fam = _family(family)
    f = _objective(fam, objective)
    pts = fibonacci_sphere(int(resolution) ** 2)
    vals = f(pts)
    order = np.argsort(vals)[:starts]
    best_r, best_v = pts[order[0]], float(vals[order[0]])
    for idx in order:
        r0 = pts[idx]
        x0 = np.array([math.acos(max(-1.0, min(1.0, r0[2]))), math.atan2(r0[1], r0[0])])
        res = optimize.minimize(lambda v: float(f(_sphere_point(v))), x0, method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        if res.fun < best_v:
            best_v, best_r = float(res.fun), _sphere_point(res.x)
    point = tuple(float(v) for v in _uncertainties(fam, best_r))
    kind = "variance_sum" if objective == "sum_of_squares" else "deviation_sum"
    return BoundReport(kind, best_v, point, "brute_force", extra={"state": best_r})
