"""Small planar and spatial geometry helpers."""

from itertools import combinations

import numpy as np


def newell_normal(points):
    """Area-weighted normal of a closed 3D polygon (length = 2 * area)."""
    p = np.asarray(points, dtype=float)
    q = np.roll(p, -1, axis=0)
    return np.array(
        [
            np.sum((p[:, 1] - q[:, 1]) * (p[:, 2] + q[:, 2])),
            np.sum((p[:, 2] - q[:, 2]) * (p[:, 0] + q[:, 0])),
            np.sum((p[:, 0] - q[:, 0]) * (p[:, 1] + q[:, 1])),
        ]
    )


def polygon_area(poly):
    """Signed area of a 2D polygon (positive when counterclockwise)."""
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    return 0.5 * np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1])


def polygon_centroid(poly):
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    cr = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
    a = 0.5 * cr.sum()
    return np.array([np.sum((p[:, 0] + q[:, 0]) * cr), np.sum((p[:, 1] + q[:, 1]) * cr)]) / (6 * a)


def diameter(points):
    p = np.asarray(points, dtype=float)
    d = p[:, None, :] - p[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", d, d))))


def chebyshev_center(poly, rtol=1e-12):
    """Center and radius of the largest circle inside the kernel of ``poly``.

    ``poly`` is a counterclockwise 2D polygon.  Every edge line contributes
    the half-plane constraint ``n_i . (x - v_i) >= r`` (inward unit normal
    ``n_i``); the optimum of this small linear program sits at a vertex
    defined by three active constraints, so all edge triples are enumerated.
    For a convex polygon the kernel is the polygon itself and the circle is
    the inscribed circle.  Ties (e.g. elongated rectangles) are broken by
    averaging all optimal centers, which stays optimal by convexity.

    A radius ``<= 0`` means the polygon is not star-shaped with respect to
    any circle.
    """
    p = np.asarray(poly, dtype=float)
    k = len(p)
    t = np.roll(p, -1, axis=0) - p
    t /= np.linalg.norm(t, axis=1)[:, None]
    n = np.column_stack([-t[:, 1], t[:, 0]])
    rhs = np.einsum("ij,ij->i", n, p)
    if k == 3:
        lens = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
        opp = np.roll(lens, -1)  # side opposite vertex i joins v_{i+1}, v_{i+2}
        c = (opp[:, None] * p).sum(axis=0) / opp.sum()
        r = float(np.min(np.einsum("ij,j->i", n, c) - rhs))
        return c, r
    triples = np.array(list(combinations(range(k), 3)))
    mats = np.zeros((len(triples), 3, 3))
    mats[:, :, :2] = n[triples]
    mats[:, :, 2] = -1.0
    b = rhs[triples]
    det = np.linalg.det(mats)
    ok = np.abs(det) > 1e-12
    sol = np.linalg.solve(mats[ok], b[ok][..., None])[..., 0]
    slack = sol[:, :2] @ n.T - rhs[None, :] - sol[:, 2:3]
    scale = diameter(p)
    feasible = np.all(slack >= -1e-12 * scale, axis=1)
    sol = sol[feasible]
    rmax = sol[:, 2].max()
    best = sol[sol[:, 2] >= rmax - rtol * scale]
    c = best[:, :2].mean(axis=0)
    r = float(np.min(n @ c - rhs))
    return c, r


def is_star_shaped_wrt(poly, point, rtol=1e-10):
    """True if every fan triangle ``(point, v_i, v_{i+1})`` is positively oriented."""
    p = np.asarray(poly, dtype=float) - np.asarray(point, dtype=float)
    q = np.roll(p, -1, axis=0)
    cr = p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]
    return bool(np.all(cr > rtol * diameter(poly) ** 2))


def ray_exit_distance(poly, origin, direction):
    """Distance from an interior ``origin`` to the polygon boundary along ``direction``."""
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    best = np.inf
    for a, b in zip(p, q):
        e = b - a
        m = np.array([[d[0], -e[0]], [d[1], -e[1]]])
        if abs(np.linalg.det(m)) < 1e-14:
            continue
        s, u = np.linalg.solve(m, a - o)
        if s > 1e-14 and -1e-12 <= u <= 1 + 1e-12:
            best = min(best, s)
    return float(best)
