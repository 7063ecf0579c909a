"""Closed-form eigen-solvers for small symmetric matrices and a golden-section search.

Gram matrices in this package are at most 3x3 (the n-observable case is reduced
to the 3x3 matrix ``M M^T``), so the quadratic formula and the trigonometric
form of Cardano's method cover every case without an iterative solver.
"""
import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def eigvalsh2(m):
    """Ascending eigenvalues of a real symmetric 2x2 matrix."""
    a, b, d = float(m[0][0]), float(m[0][1]), float(m[1][1])
    mid = 0.5 * (a + d)
    rad = 0.5 * math.hypot(a - d, 2.0 * b)
    lo, hi = mid - rad, mid + rad
    # the product of the roots is exact; use it to recover the small one
    # when the large one dominates
    det = a * d - b * b
    if abs(hi) > abs(lo) and hi != 0.0:
        lo = det / hi
    elif lo != 0.0:
        hi = det / lo
    return np.array([lo, hi])


def _null_vector3(b):
    """Unit vector spanning the (numerical) null space of a rank-2 3x3 matrix.

    Returns ``None`` when all pairwise row cross products vanish, i.e. when
    the null space has dimension two or more.
    """
    rows = np.asarray(b, dtype=float)
    scale = max(np.abs(rows).max(), 1e-300)
    best, best_norm = None, 0.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        c = np.cross(rows[i], rows[j])
        n = float(np.dot(c, c))
        if n > best_norm:
            best, best_norm = c, n
    if best is None or math.sqrt(best_norm) <= 1e-10 * scale * scale:
        return None
    return best / math.sqrt(best_norm)


def eigvalsh3(m, polish=True):
    """Ascending eigenvalues of a real symmetric 3x3 matrix.

    Trigonometric Cardano solution; simple eigenvalues are refined by one
    Rayleigh quotient on the eigenvector recovered from row cross products.
    """
    a = np.asarray(m, dtype=float)
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = (a[0, 0] + a[1, 1] + a[2, 2]) / 3.0
    if p1 == 0.0:
        return np.sort(np.diag(a).copy())
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    r = 0.5 * float(np.linalg.det(b))
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    hi = q + 2.0 * p * math.cos(phi)
    lo = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    mid = 3.0 * q - hi - lo
    vals = [lo, mid, hi]
    if polish:
        for k, lam in enumerate(vals):
            v = _null_vector3(a - lam * np.eye(3))
            if v is not None:
                vals[k] = float(v @ a @ v)
    return np.sort(np.array(vals))


def eigvalsh_small(m):
    """Ascending eigenvalues of a symmetric 1x1, 2x2 or 3x3 matrix."""
    a = np.asarray(m, dtype=float)
    if a.shape == (1, 1):
        return a[0].copy()
    if a.shape == (2, 2):
        return eigvalsh2(a)
    if a.shape == (3, 3):
        return eigvalsh3(a)
    raise ValueError(f"expected a 1x1, 2x2 or 3x3 matrix, got shape {a.shape}")


def top_eigvec3(m):
    """Unit eigenvector of the largest eigenvalue of a symmetric 3x3 matrix.

    For a repeated top eigenvalue any unit vector of the eigenspace is returned.
    """
    a = np.asarray(m, dtype=float)
    lam = eigvalsh3(a)[-1]
    b = a - lam * np.eye(3)
    v = _null_vector3(b)
    if v is not None:
        return v
    # eigenspace of dimension >= 2: any vector orthogonal to the dominant row
    k = int(np.argmax(np.abs(b).sum(axis=1)))
    row = b[k]
    if not row.any():
        return np.array([1.0, 0.0, 0.0])
    trial = np.eye(3)[int(np.argmin(np.abs(row)))]
    v = np.cross(row, trial)
    return v / np.linalg.norm(v)


def golden_max(f, a, b, tol=1e-8):
    """Maximize a unimodal function on [a, b] by golden-section search.

    Returns ``(x, f(x))`` with the maximizer bracketed to width ``tol``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)
