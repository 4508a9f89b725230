"""Quadrature rules for triangles and triangle pairs.

Regular rules are collapsed (Stroud conical product) Gauss rules on the
reference triangle ``{s, t >= 0, s + t <= 1}``.

Singular pair rules follow the regularizing coordinate transforms of
Sauter and Schwab.  They live on the reference triangle
``T = {0 <= x2 <= x1 <= 1}`` with the parametrization

    chi(x) = P0 + x1 * (P1 - P0) + x2 * (P2 - P1)

so that barycentric coordinates are ``(1 - x1, x1 - x2, x2)``.  For an
edge-adjacent pair the shared edge must be ``P0 P1`` in both triangles; for
a vertex-adjacent pair the shared vertex must be ``P0``.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

IDENTICAL, EDGE, VERTEX = 0, 1, 2


@lru_cache(maxsize=None)
def gauss_legendre_01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def triangle_rule(n):
    """Collapsed Gauss rule with ``n * n`` points, exact to degree ``2n - 1``.

    Returns
    -------
    st : (n*n, 2) array
        Points in the reference triangle.
    w : (n*n,) array
        Weights summing to 1/2 (the reference area).
    """
    xg, wg = gauss_legendre_01(n)
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (xj + 1.0)
    wu = 0.25 * wj
    s = np.repeat(u, n)
    t = (1.0 - s) * np.tile(xg, n)
    w = np.repeat(wu, n) * np.tile(wg, n)
    st = np.column_stack([s, t])
    st.setflags(write=False)
    w.setflags(write=False)
    return st, w


@lru_cache(maxsize=None)
def edge_graded_triangle_rule(n, grade=3):
    """Rule on the reference triangle for integrands with ``d log d`` terms at the edges.

    The triangle is split at its centroid; on each piece the distance to
    the outer edge is graded with ``1 - (1 - u)**grade`` and the position
    along it with ``u**2 (3 - 2 u)`` towards both corners.  ``3 n**2``
    points, weights sum to 1/2.
    """
    u, wu = gauss_legendre_01(n)
    s = 1.0 - (1.0 - u) ** grade
    ws = wu * grade * (1.0 - u) ** (grade - 1)
    t = u**2 * (3.0 - 2.0 * u)
    wt = wu * 6.0 * u * (1.0 - u)
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt) * S / 3.0
    c = np.array([1.0, 1.0]) / 3.0
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    pts, wts = [], []
    for i in range(3):
        a, b = corners[i], corners[(i + 1) % 3]
        edge = (1.0 - T.ravel())[:, None] * a + T.ravel()[:, None] * b
        pts.append(c + S.ravel()[:, None] * (edge - c))
        wts.append(W.ravel())
    st, w = np.concatenate(pts), np.concatenate(wts)
    st.setflags(write=False)
    w.setflags(write=False)
    return st, w


def _tensor4(n):
    x, w = gauss_legendre_01(n)
    g = np.meshgrid(x, x, x, x, indexing="ij")
    wg = np.meshgrid(w, w, w, w, indexing="ij")
    pts = [a.ravel() for a in g]
    wt = wg[0].ravel() * wg[1].ravel() * wg[2].ravel() * wg[3].ravel()
    return pts, wt


@lru_cache(maxsize=None)
def sauter_schwab_rule(case, n):
    """Reference points and weights for a singular triangle pair.

    Returns ``(xh, yh, w)`` with ``xh``, ``yh`` of shape (m, 2) in the
    reference triangle ``T`` and weights such that

        sum(w * f(xh, yh)) ~= int_T int_T f(x, y) dy dx.
    """
    (xi, e1, e2, e3), wt = _tensor4(n)
    xs, ys, ws = [], [], []

    def add(x1, x2, y1, y2, jac):
        xs.append(np.column_stack([x1, x2]))
        ys.append(np.column_stack([y1, y2]))
        ws.append(wt * jac)

    if case == IDENTICAL:
        jac = xi**3 * e1**2 * e2
        add(xi, xi * (1 - e1 + e1 * e2), xi * (1 - e1 * e2 * e3), xi * (1 - e1), jac)
        add(xi * (1 - e1 * e2 * e3), xi * (1 - e1), xi, xi * (1 - e1 + e1 * e2), jac)
        add(xi, xi * e1 * (1 - e2 + e2 * e3), xi * (1 - e1 * e2), xi * e1 * (1 - e2), jac)
        add(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * (1 - e2 + e2 * e3), jac)
        add(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * (1 - e2), jac)
        add(xi, xi * e1 * (1 - e2), xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), jac)
    elif case == EDGE:
        add(xi, xi * e1 * e3, xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi**3 * e1**2)
        jac = xi**3 * e1**2 * e2
        add(xi, xi * e1, xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), jac)
        add(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * e2 * e3, jac)
        add(xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), xi, xi * e1, jac)
        add(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * e2, jac)
    elif case == VERTEX:
        jac = xi**3 * e2
        add(xi, xi * e1, xi * e2, xi * e2 * e3, jac)
        add(xi * e2, xi * e2 * e1, xi, xi * e3, jac)
    else:
        raise ValueError(f"unknown singular case {case!r}")

    out = np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)
    for a in out:
        a.setflags(write=False)
    return out


def reference_to_barycentric(xh):
    """Barycentric coordinates of points of ``T`` w.r.t. ``(P0, P1, P2)``."""
    return np.column_stack([1.0 - xh[:, 0], xh[:, 0] - xh[:, 1], xh[:, 1]])
