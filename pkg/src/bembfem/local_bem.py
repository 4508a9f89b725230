"""Local boundary element matrices and the discrete Dirichlet-to-Neumann map.

For ``L u = -div(A grad u) + b . grad u + c u`` a fundamental solution is

    Phi(z) = exp(w . z - kappa * rho) / (4 pi sqrt(det A) rho),
    rho = |z|_{A^-1},  w = A^-1 b / 2,  kappa = sqrt(c + b.A^-1 b / 4),

with ``L Phi = delta``.  The boundary integral operators use
``G*(x, y) = Phi(y - x)`` (the adjoint kernel, source ``x``) so that
``V t = (1/2 I + K) u`` on the boundary of a cell, with the conormal
kernel ``A grad_x G* . n(x) + (b . n(x)) G*``.  Every exponent is
non-positive since ``w . z <= kappa * rho``.
"""

import math
from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg as sla

from .errors import CoincidentPoints, QuadratureBreakdown, SingularV
from .quadrature import EDGE, VERTEX, edge_graded_triangle_rule, gauss_legendre_01, sauter_schwab_rule, triangle_rule

Q_SING = 4
Q_REG = 3
BANDS = (3.0, 1.0, 0.2, 0.05)  # gap / diameter thresholds of the regular pair orders
FOLD_EXTRA = 6
Q_POLAR = 5
POLAR_BAND = 3  # coplanar pairs in this band of BANDS or closer are integrated in polar form
POLAR_DECAY = 1.0  # ... once the kernel decay rate times the triangle diameter exceeds this
COORD_QUANTUM = 1e-12


@dataclass(frozen=True)
class Kernel:
    """Fundamental solution data of one element.

    ``lam`` is the decay rate ``sqrt(c + b.A^-1 b / 4)`` that pairs with the
    half-convection exponent ``w = A^-1 b / 2``.
    """

    A_inv: np.ndarray
    sqrt_det_A: float
    b: np.ndarray
    c: float
    lam: float

    @classmethod
    def from_coefficients(cls, A, b=(0.0, 0.0, 0.0), c=0.0):
        A = np.asarray(A, dtype=float)
        if A.ndim == 0:
            A = float(A) * np.eye(3)
        b = np.asarray(b, dtype=float)
        A_inv = np.linalg.inv(A)
        lam2 = float(c) + 0.25 * float(b @ A_inv @ b)
        if lam2 < 0:
            raise ValueError("c + |b|^2 / 4 in the A^-1 norm must be non-negative")
        return cls(A_inv, float(np.sqrt(np.linalg.det(A))), b, float(c), math.sqrt(lam2))

    @property
    def w(self):
        return 0.5 * self.A_inv @ self.b

    @property
    def A(self):
        return np.linalg.inv(self.A_inv)

    def key(self):
        vals = np.concatenate([self.A_inv.ravel(), self.b, [self.c]])
        return tuple(float(f"{v:.12e}") for v in vals)


def fundamental_solution(kernel, x, y):
    """``Phi(x - y)``: the fundamental solution with pole at ``y``.

    Accepts single points or stacked ``(m, 3)`` arrays.

    Examples
    --------
    >>> k = Kernel.from_coefficients(np.eye(3))
    >>> round(float(fundamental_solution(k, [1, 0, 0], [0, 0, 0])), 7)
    0.0795775
    """
    z = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    rho = np.sqrt(np.einsum("...i,ij,...j->...", z, kernel.A_inv, z))
    if np.any(rho == 0.0):
        raise CoincidentPoints("fundamental solution evaluated at coincident points")
    expo = z @ kernel.w - kernel.lam * rho
    return np.exp(expo) / (4.0 * np.pi * kernel.sqrt_det_A * rho)


def conormal_kernel(kernel, x, y, n):
    """Double layer kernel ``A grad_x G* . n + (b . n) G*`` with ``G*(x, y) = Phi(y - x)``."""
    z = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    rho = np.sqrt(np.einsum("...i,ij,...j->...", z, kernel.A_inv, z))
    if np.any(rho == 0.0):
        raise CoincidentPoints("conormal kernel evaluated at coincident points")
    g = np.exp(z @ kernel.w - kernel.lam * rho) / (4.0 * np.pi * kernel.sqrt_det_A * rho)
    zn = np.sum(z * n, axis=-1)
    return g * (0.5 * (n @ kernel.b) + (kernel.lam / rho + 1.0 / rho**2) * zn)


# -- numba kernels -----------------------------------------------------------


@numba.njit(inline="always")
def _eval(z0, z1, z2, n0, n1, n2, Ai, w, lam, scale, bn):
    q0 = Ai[0, 0] * z0 + Ai[0, 1] * z1 + Ai[0, 2] * z2
    q1 = Ai[1, 0] * z0 + Ai[1, 1] * z1 + Ai[1, 2] * z2
    q2 = Ai[2, 0] * z0 + Ai[2, 1] * z1 + Ai[2, 2] * z2
    rho = math.sqrt(z0 * q0 + z1 * q1 + z2 * q2)
    g = math.exp(w[0] * z0 + w[1] * z1 + w[2] * z2 - lam * rho) * scale / rho
    dl = g * (0.5 * bn + (lam / rho + 1.0 / (rho * rho)) * (z0 * n0 + z1 * n1 + z2 * n2))
    return g, dl


@numba.njit
def _area(X):
    a0, a1, a2 = X[1, 0] - X[0, 0], X[1, 1] - X[0, 1], X[1, 2] - X[0, 2]
    b0, b1, b2 = X[2, 0] - X[0, 0], X[2, 1] - X[0, 1], X[2, 2] - X[0, 2]
    c0, c1, c2 = a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0
    return 0.5 * math.sqrt(c0 * c0 + c1 * c1 + c2 * c2)


@numba.njit
def _ss_pair(Xk, Xl, Bl, X, Y, W, npts, n, Ai, w, lam, scale, bn, out):
    """Regularized integral over a touching pair; shared vertices come first.

    ``Bl[j]`` are the barycentric coordinates of source vertex ``j`` with
    respect to the parent source triangle.  Adds ``V`` to ``out[0]`` and
    the double layer against the three parent hat functions to ``out[1:]``.
    """
    jac = 4.0 * _area(Xk) * _area(Xl)
    for i in range(npts):
        s1, s2 = X[i, 0], X[i, 1]
        t1, t2 = Y[i, 0], Y[i, 1]
        m0, m1, m2 = 1.0 - t1, t1 - t2, t2
        z0 = (Xk[0, 0] + s1 * (Xk[1, 0] - Xk[0, 0]) + s2 * (Xk[2, 0] - Xk[1, 0])) - (m0 * Xl[0, 0] + m1 * Xl[1, 0] + m2 * Xl[2, 0])
        z1 = (Xk[0, 1] + s1 * (Xk[1, 1] - Xk[0, 1]) + s2 * (Xk[2, 1] - Xk[1, 1])) - (m0 * Xl[0, 1] + m1 * Xl[1, 1] + m2 * Xl[2, 1])
        z2 = (Xk[0, 2] + s1 * (Xk[1, 2] - Xk[0, 2]) + s2 * (Xk[2, 2] - Xk[1, 2])) - (m0 * Xl[0, 2] + m1 * Xl[1, 2] + m2 * Xl[2, 2])
        wt = W[i] * jac
        g, dl = _eval(z0, z1, z2, n[0], n[1], n[2], Ai, w, lam, scale, bn)
        out[0] += wt * g
        dl *= wt
        for j in range(3):
            out[1 + j] += dl * (m0 * Bl[0, j] + m1 * Bl[1, j] + m2 * Bl[2, j])


@numba.njit
def _regular_pair(Qk, Ql, bw, ww, nqp, jac, n, Ai, w, lam, scale, bn, out):
    for i in range(nqp):
        y0, y1, y2 = Qk[i, 0], Qk[i, 1], Qk[i, 2]
        for j in range(nqp):
            wt = ww[i] * ww[j] * jac
            g, dl = _eval(y0 - Ql[j, 0], y1 - Ql[j, 1], y2 - Ql[j, 2], n[0], n[1], n[2], Ai, w, lam, scale, bn)
            out[0] += wt * g
            dl *= wt
            out[1] += dl * bw[j, 0]
            out[2] += dl * bw[j, 1]
            out[3] += dl * bw[j, 2]


@numba.njit
def _radial_moments(mu, R):
    """``int_0^R exp(-mu r) dr`` and ``int_0^R r exp(-mu r) dr`` for ``mu >= 0``."""
    t = mu * R
    if t < 1e-3:
        e0 = 1.0 - t / 2.0 + t * t / 6.0 - t * t * t / 24.0
        e1 = 0.5 - t / 3.0 + t * t / 8.0 - t * t * t / 30.0
    else:
        em = math.expm1(-t)
        e0 = -em / t
        e1 = (e0 - 1.0 - em) / t
    return R * e0, R * R * e1


@numba.njit(inline="always")
def _rate(th, a11, a12, a22, wx, wy, lam):
    c, s = math.cos(th), math.sin(th)
    return lam * math.sqrt(a11 * c * c + 2.0 * a12 * c * s + a22 * s * s) - wx * c - wy * s


@numba.njit
def _wake_angle(a11, a12, a22, wx, wy, lam):
    """Direction of slowest decay of the in-plane kernel and the curvature of the rate there."""
    best, th0 = np.inf, 0.0
    m = 256
    for i in range(m):
        th = 2.0 * math.pi * i / m
        mu = _rate(th, a11, a12, a22, wx, wy, lam)
        if mu < best:
            best, th0 = mu, th
    lo, hi = th0 - 2.0 * math.pi / m, th0 + 2.0 * math.pi / m
    g = 0.5 * (math.sqrt(5.0) - 1.0)
    for _ in range(40):
        t1 = hi - g * (hi - lo)
        t2 = lo + g * (hi - lo)
        if _rate(t1, a11, a12, a22, wx, wy, lam) < _rate(t2, a11, a12, a22, wx, wy, lam):
            hi = t2
        else:
            lo = t1
    th0 = 0.5 * (lo + hi)
    h = 1e-3
    f0 = _rate(th0 - h, a11, a12, a22, wx, wy, lam)
    f1 = _rate(th0, a11, a12, a22, wx, wy, lam)
    f2 = _rate(th0 + h, a11, a12, a22, wx, wy, lam)
    return th0, max((f0 - 2.0 * f1 + f2) / (h * h), 0.0)


@numba.njit
def _coplanar_polar(Xk, Xl, nv, Ai, w, lam, scale, bn, ob, ow, tg, tw, out):
    """Pair of triangles in one plane, in polar coordinates around each outer point.

    ``x - y`` stays in the plane, so along a ray the kernel is
    ``exp(-mu r) / r`` and both radial moments are exact.  The source
    triangle is the signed sum of the fans ``(x, a, b)`` over its edges
    ``ab``; each fan is integrated in ``v = asinh(tan(phi))`` with ``phi``
    the angle from the foot of ``x`` on the edge, and the angular pieces
    are graded towards the direction in which ``mu`` is smallest (the
    convective wake).  Adds ``V`` to ``out[0]`` and the double layer
    against the three hat functions of ``Xl`` to ``out[1:]``.
    """
    e1 = Xk[1] - Xk[0]
    e1 = e1 / math.sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2])
    e2 = np.empty(3)
    e2[0] = nv[1] * e1[2] - nv[2] * e1[1]
    e2[1] = nv[2] * e1[0] - nv[0] * e1[2]
    e2[2] = nv[0] * e1[1] - nv[1] * e1[0]
    u = np.zeros((3, 2))
    v = np.zeros((3, 2))
    for j in range(3):
        d = Xk[j] - Xk[0]
        u[j, 0] = d[0] * e1[0] + d[1] * e1[1] + d[2] * e1[2]
        u[j, 1] = d[0] * e2[0] + d[1] * e2[1] + d[2] * e2[2]
        d = Xl[j] - Xk[0]
        v[j, 0] = d[0] * e1[0] + d[1] * e1[1] + d[2] * e1[2]
        v[j, 1] = d[0] * e2[0] + d[1] * e2[1] + d[2] * e2[2]
    Ae1 = Ai @ e1
    Ae2 = Ai @ e2
    a11 = e1[0] * Ae1[0] + e1[1] * Ae1[1] + e1[2] * Ae1[2]
    a12 = e1[0] * Ae2[0] + e1[1] * Ae2[1] + e1[2] * Ae2[2]
    a22 = e2[0] * Ae2[0] + e2[1] * Ae2[1] + e2[2] * Ae2[2]
    wx = w[0] * e1[0] + w[1] * e1[1] + w[2] * e1[2]
    wy = w[0] * e2[0] + w[1] * e2[1] + w[2] * e2[2]
    area_k = abs((u[1, 0] - u[0, 0]) * (u[2, 1] - u[0, 1]) - (u[2, 0] - u[0, 0]) * (u[1, 1] - u[0, 1]))
    area_l = (v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[2, 0] - v[0, 0]) * (v[1, 1] - v[0, 1])
    # unit normals of the source edges (outward for counterclockwise vertices)
    # and gradients of the source hat functions
    nu = np.empty((3, 2))
    grad = np.empty((3, 2))
    diam = 0.0
    for j in range(3):
        a, b = v[j], v[(j + 1) % 3]
        L = math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2)
        diam = max(diam, L)
        nu[j, 0] = (b[1] - a[1]) / L
        nu[j, 1] = -(b[0] - a[0]) / L
        grad[(j + 2) % 3, 0] = -(b[1] - a[1]) / area_l
        grad[(j + 2) % 3, 1] = (b[0] - a[0]) / area_l
    orient = 1.0 if area_l > 0 else -1.0
    th0, curv = _wake_angle(a11, a12, a22, wx, wy, lam)
    nb = 0
    brk = np.empty(48)
    if curv * diam > 8.0:
        width = math.sqrt(2.0 / (curv * diam))
        step = math.pi
        while step > 0.5 * width and nb < 40:
            brk[nb] = th0 + step
            brk[nb + 1] = th0 - step
            nb += 2
            step *= 0.15
        brk[nb] = th0
        nb += 1
    cut = np.empty(nb + 2)
    phi = np.empty(3)
    nq = tg.shape[0]
    for p in range(ob.shape[0]):
        x0 = ob[p, 0] * u[0, 0] + ob[p, 1] * u[1, 0] + ob[p, 2] * u[2, 0]
        x1 = ob[p, 0] * u[0, 1] + ob[p, 1] * u[1, 1] + ob[p, 2] * u[2, 1]
        for j in range(3):
            phi[j] = ((v[(j + 1) % 3, 0] - x0) * (v[(j + 2) % 3, 1] - x1)
                      - (v[(j + 2) % 3, 0] - x0) * (v[(j + 1) % 3, 1] - x1)) / area_l  # fmt: skip
        wx0 = ow[p] * area_k
        for e in range(3):
            h = nu[e, 0] * (v[e, 0] - x0) + nu[e, 1] * (v[e, 1] - x1)
            if abs(h) < 1e-13 * diam:
                continue
            sgn = 1.0 if h > 0 else -1.0
            h = abs(h)
            thp = math.atan2(-sgn * nu[e, 1], -sgn * nu[e, 0])
            cp, sp = -sgn * nu[e, 0], -sgn * nu[e, 1]
            nc = 0
            for a in (e, (e + 1) % 3):
                ph = math.atan2(x1 - v[a, 1], x0 - v[a, 0]) - thp
                cut[nc] = (ph + math.pi) % (2.0 * math.pi) - math.pi
                nc += 1
            lo, hi = min(cut[0], cut[1]), max(cut[0], cut[1])
            cut[0], cut[1] = lo, hi
            for i in range(nb):
                ph = (brk[i] - thp + math.pi) % (2.0 * math.pi) - math.pi
                if lo < ph < hi:
                    cut[nc] = ph
                    nc += 1
            cs = np.sort(cut[:nc])
            for i in range(nc - 1):
                va = math.asinh(math.tan(cs[i]))
                vb = math.asinh(math.tan(cs[i + 1]))
                span = vb - va
                if span < 1e-14:
                    continue
                for q in range(nq):
                    vv = va + span * tg[q]
                    ev = math.exp(vv)
                    ch = 0.5 * (ev + 1.0 / ev)
                    tv = 0.5 * (ev - 1.0 / ev) / ch
                    c = cp / ch - sp * tv
                    s = sp / ch + cp * tv
                    R = h * ch
                    nA = math.sqrt(a11 * c * c + 2.0 * a12 * c * s + a22 * s * s)
                    mu = max(lam * nA - wx * c - wy * s, 0.0)
                    I0, I1 = _radial_moments(mu, R)
                    f = sgn * orient * wx0 * span * tw[q] * scale / (nA * ch)
                    out[0] += f * I0
                    f *= 0.5 * bn
                    for j in range(3):
                        out[1 + j] += f * (phi[j] * I0 - (grad[j, 0] * c + grad[j, 1] * s) * I1)


@numba.njit(parallel=True, cache=True)
def _assemble(P, T, N, area, cen, rad, diam, Ai, w, lam, scale, b,
              ssx, ssy, ssw, ssn, rq, rb, rw, rn, eta, order, near, polar, ob, ow, tg, tw):  # fmt: skip
    nt = T.shape[0]
    na = P.shape[0]
    V = np.zeros((nt, nt))
    K = np.zeros((nt, na))
    nr, mq = rq.shape[0], rq.shape[1]
    Q = np.zeros((nr, nt, mq, 3))
    for r in range(nr):
        for t in range(nt):
            p0, p1, p2 = P[T[t, 0]], P[T[t, 1]], P[T[t, 2]]
            for i in range(rn[r]):
                Q[r, t, i] = p0 + rq[r, i, 0] * (p1 - p0) + rq[r, i, 1] * (p2 - p0)

    for k in numba.prange(nt):
        pk = np.empty(3, dtype=np.int64)
        pl = np.empty(3, dtype=np.int64)
        out = np.zeros(4)
        Xk = np.empty((3, 3))
        Xl = np.empty((3, 3))
        Bl = np.zeros((3, 3))
        for l in range(nt):
            n = N[l]
            bn = b[0] * n[0] + b[1] * n[1] + b[2] * n[2]
            folded = abs(N[k, 0] * n[0] + N[k, 1] * n[1] + N[k, 2] * n[2]) < 1.0 - 1e-10
            out[:] = 0.0
            shared = 0
            for a in range(3):
                for c in range(3):
                    if T[k, a] == T[l, c]:
                        if shared < 3:
                            pk[shared] = a
                            pl[shared] = c
                        shared += 1
            if shared == 0:
                dx = cen[k, 0] - cen[l, 0]
                dy = cen[k, 1] - cen[l, 1]
                dz = cen[k, 2] - cen[l, 2]
                ratio = (math.sqrt(dx * dx + dy * dy + dz * dz) - rad[k] - rad[l]) / max(diam[k], diam[l])
                band = 0
                while band < eta.shape[0] and ratio < eta[band]:
                    band += 1
                if band >= near and polar and not folded:
                    for j in range(3):
                        Xk[j] = P[T[k, j]]
                        Xl[j] = P[T[l, j]]
                    _coplanar_polar(Xk, Xl, N[k], Ai, w, lam, scale, bn, ob, ow, tg, tw, out)
                else:
                    r = order[band]
                    jac = 4.0 * area[k] * area[l]
                    _regular_pair(Q[r, k], Q[r, l], rb[r], rw[r], rn[r], jac, n, Ai, w, lam, scale, bn, out)
                V[k, l] = out[0]
                for j in range(3):
                    K[k, T[l, j]] += out[1 + j]
                continue
            if shared == 3 or (polar and not folded):
                for j in range(3):
                    Xk[j] = P[T[k, j]]
                    Xl[j] = P[T[l, j]]
                _coplanar_polar(Xk, Xl, N[k], Ai, w, lam, scale, bn, ob, ow, tg, tw, out)
            else:
                if shared == 2:
                    case = 1
                    pk[2] = 3 - pk[0] - pk[1]
                    pl[2] = 3 - pl[0] - pl[1]
                else:
                    case = 2
                    pk[1] = (pk[0] + 1) % 3
                    pk[2] = (pk[0] + 2) % 3
                    pl[1] = (pl[0] + 1) % 3
                    pl[2] = (pl[0] + 2) % 3
                Bl[:, :] = 0.0
                for j in range(3):
                    Xk[j] = P[T[k, pk[j]]]
                    Xl[j] = P[T[l, pl[j]]]
                    Bl[j, pl[j]] = 1.0
                c = 2 * folded + case - 1
                _ss_pair(Xk, Xl, Bl, ssx[c], ssy[c], ssw[c], ssn[c], n, Ai, w, lam, scale, bn, out)
            V[k, l] = out[0]
            for j in range(3):
                K[k, T[l, j]] += out[1 + j]
    return V, K


def _padded_singular_rules(q, q_fold):
    rules = [sauter_schwab_rule(case, qq) for qq in (q, q_fold) for case in (EDGE, VERTEX)]
    m = max(len(r[2]) for r in rules)
    ssx = np.zeros((4, m, 2))
    ssy = np.zeros((4, m, 2))
    ssw = np.zeros((4, m))
    ssn = np.zeros(4, dtype=np.int64)
    for c, (x, y, w) in enumerate(rules):
        ssx[c, : len(w)] = x
        ssy[c, : len(w)] = y
        ssw[c, : len(w)] = w
        ssn[c] = len(w)
    return ssx, ssy, ssw, ssn


def _bary(st):
    return np.column_stack([1.0 - st[:, 0] - st[:, 1], st[:, 0], st[:, 1]])


# -- element operators -------------------------------------------------------


@dataclass
class ElementOperators:
    """Galerkin boundary matrices of one element surface.

    Rows of ``V``, ``K``, ``M`` belong to the surface triangles (piecewise
    constant test functions), columns of ``K`` and ``M`` to the surface
    nodes (piecewise linear trial functions).
    """

    V: np.ndarray
    K: np.ndarray
    M: np.ndarray
    S: np.ndarray | None = None


def surface_geometry(points, triangles):
    p = points[triangles]
    cr = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    nrm = np.linalg.norm(cr, axis=1)
    area = 0.5 * nrm
    normals = cr / nrm[:, None]
    cen = p.mean(axis=1)
    rad = np.linalg.norm(p - cen[:, None, :], axis=2).max(axis=1)
    e = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
    diam = np.linalg.norm(e, axis=2).max(axis=1)
    return area, normals, cen, rad, diam


def mass_matrix(points, triangles):
    """``M[k, i] = int_{tau_k} phi_i`` for P0 test and P1 trial functions."""
    area, *_ = surface_geometry(points, triangles)
    M = np.zeros((len(triangles), len(points)))
    rows = np.repeat(np.arange(len(triangles)), 3)
    np.add.at(M, (rows, triangles.ravel()), np.repeat(area / 3.0, 3))
    return M


def pair_orders(q_sing=Q_SING, q_reg=Q_REG):
    """Gauss orders of non-touching pairs per distance band of ``BANDS``.

    Well separated pairs come first, nearly touching pairs last.
    """
    return (max(q_reg - 1, 1), q_reg, q_sing, q_sing + 1, q_sing + 2)


def _padded_tensor_rules(orders):
    table = orders
    orders = sorted(set(table))
    rules = [triangle_rule(q) for q in orders]
    m = max(len(w) for _, w in rules)
    rq = np.zeros((len(orders), m, 2))
    rb = np.zeros((len(orders), m, 3))
    rw = np.zeros((len(orders), m))
    rn = np.zeros(len(orders), dtype=np.int64)
    for r, (x, w) in enumerate(rules):
        rq[r, : len(w)] = x
        rb[r, : len(w)] = _bary(x)
        rw[r, : len(w)] = w
        rn[r] = len(w)
    index = {q: r for r, q in enumerate(orders)}
    order = np.array([index[q] for q in table], dtype=np.int64)
    return rq, rb, rw, rn, order


def assemble_boundary_operators(points, triangles, kernel, q_sing=Q_SING, q_reg=Q_REG, q_fold=None, bands=BANDS,
                                q_polar=Q_POLAR, polar_band=POLAR_BAND):  # fmt: skip
    """Assemble ``V``, ``K`` and ``M`` on a closed, outward oriented surface.

    Parameters
    ----------
    points : (n, 3) array
        Surface nodes, ideally relative to the element barycenter.
    triangles : (m, 3) int array
        Outward oriented triangles.
    kernel : Kernel
    q_sing : int
        Gauss points per direction of the singular transforms for edge and
        vertex adjacent pairs in one plane.
    q_reg : int
        Collapsed Gauss order for pairs more than ``bands[1]`` diameters
        apart; one less beyond ``bands[0]``.  Closer pairs use ``q_sing``
        to ``q_sing + 2``.
    q_fold : int, optional
        Order of the singular transforms for touching pairs on different
        planes (across an edge of the polyhedron); defaults to
        ``q_sing + FOLD_EXTRA``.  Their double layer kernel is nearly
        singular along the whole shared edge.
    bands : tuple of float
        Decreasing thresholds of ``gap / diameter`` separating the order
        bands of ``pair_orders``; ``gap`` is the distance of the bounding
        spheres.
    q_polar : int
        Order of the polar rules (``3 q_polar**2`` outer points, ``q_polar``
        Gauss points per angular piece).
    polar_band : int
        Index into the bands from which on coplanar pairs are integrated
        in polar form.

    Identical pairs are always integrated in polar form.  Other coplanar
    pairs (touching, or in band ``polar_band`` or closer) switch to it once
    the kernel decays by more than ``exp(-POLAR_DECAY)`` across a triangle;
    there the convective wake of the kernel is far narrower than a
    triangle and tensor rules miss it.
    """
    points = np.ascontiguousarray(points, dtype=float)
    triangles = np.ascontiguousarray(triangles, dtype=np.int64)
    q_sing, q_reg = int(q_sing), int(q_reg)
    q_fold = q_sing + FOLD_EXTRA if q_fold is None else int(q_fold)
    area, normals, cen, rad, diam = surface_geometry(points, triangles)
    ssx, ssy, ssw, ssn = _padded_singular_rules(q_sing, q_fold)
    rq, rb, rw, rn, order = _padded_tensor_rules(pair_orders(q_sing, q_reg))
    eta = np.asarray(bands, dtype=float)
    if len(eta) != len(order) - 1 or np.any(np.diff(eta) >= 0):
        raise ValueError(f"bands must be {len(order) - 1} decreasing thresholds")
    st, ow = edge_graded_triangle_rule(int(q_polar))
    decay = kernel.lam * math.sqrt(np.linalg.eigvalsh(kernel.A_inv).max()) * diam.max()
    tg, tw = gauss_legendre_01(int(q_polar))
    scale = 1.0 / (4.0 * np.pi * kernel.sqrt_det_A)
    V, K = _assemble(
        points, triangles, normals, area, cen, rad, diam,
        np.ascontiguousarray(kernel.A_inv), np.ascontiguousarray(kernel.w), float(kernel.lam), scale,
        np.ascontiguousarray(kernel.b, dtype=float), ssx, ssy, ssw, ssn, rq, rb, rw, rn, eta, order,
        int(polar_band), bool(decay > POLAR_DECAY), _bary(st), ow, tg, tw,
    )  # fmt: skip
    for name, mat in (("V", V), ("K", K)):
        bad = np.argwhere(~np.isfinite(mat))
        if len(bad):
            k, j = bad[0]
            raise QuadratureBreakdown(f"non-finite {name} entry at triangle {k}, column {j}")
    return ElementOperators(V, K, mass_matrix(points, triangles))


def steklov_matrix(ops):
    """``S = M^T V^-1 (M / 2 + K)`` via one LU factorization of ``V``."""
    try:
        lu = sla.lu_factor(ops.V, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularV(str(exc)) from None
    piv = np.abs(np.diag(lu[0]))
    if piv.min() <= 1e-14 * piv.max():
        raise SingularV("single layer matrix is numerically singular")
    X = sla.lu_solve(lu, 0.5 * ops.M + ops.K)
    ops.S = ops.M.T @ X
    return ops.S


def canonical_surface(coords, triangles, origin):
    """Order surface nodes and triangles by their coordinates relative to ``origin``.

    Returns ``(perm, rel, tris)``: ``rel = (coords - origin)[perm]`` and the
    triangles renumbered accordingly, rotated to start at their smallest
    index and sorted.  Translated copies give identical output.
    """
    rel = np.asarray(coords, dtype=float) - np.asarray(origin, dtype=float)
    q = np.round(rel / COORD_QUANTUM).astype(np.int64)
    perm = np.lexsort(q.T[::-1])
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    tris = inv[np.asarray(triangles)]
    shift = np.argmin(tris, axis=1)
    idx = (shift[:, None] + np.arange(3)[None, :]) % 3
    tris = np.take_along_axis(tris, idx, axis=1)
    tris = tris[np.lexsort(tris.T[::-1])]
    return perm, rel[perm], tris


def element_operators(points, triangles, kernel, q_sing=Q_SING, q_reg=Q_REG, q_fold=None, bands=BANDS, q_polar=Q_POLAR):
    """Boundary matrices and Steklov matrix of one element surface."""
    ops = assemble_boundary_operators(points, triangles, kernel, q_sing, q_reg, q_fold, bands, q_polar)
    steklov_matrix(ops)
    return ops
