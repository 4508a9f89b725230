"""Independent reference solvers used as test oracles."""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded


def edge_fd(a, b, c, L, u0, uL, n=10_000):
    """Central differences for ``-a u'' + b u' + c u = 0`` on ``n`` grid points."""
    x = np.linspace(0.0, L, n)
    h = x[1] - x[0]
    lo = -a / h**2 - b / (2 * h)
    di = 2 * a / h**2 + c
    up = -a / h**2 + b / (2 * h)
    m = n - 2
    ab = np.zeros((3, m))
    ab[0, 1:] = up
    ab[1, :] = di
    ab[2, :-1] = lo
    rhs = np.zeros(m)
    rhs[0] -= lo * u0
    rhs[-1] -= up * uL
    u = np.empty(n)
    u[0], u[-1] = u0, uL
    u[1:-1] = solve_banded((1, 1), ab, rhs)
    return x, u


def square_galerkin(alpha, b, g, n=500):
    """Plain P1 Galerkin for ``-alpha lap u + b.grad u = 0`` on the unit square.

    Uniform grid of ``n x n`` squares, each cut along its main diagonal;
    ``g`` gives the Dirichlet data on (m, 2) points.  Returns an
    interpolator of the nodal values.
    """
    b = np.asarray(b, dtype=float)
    s = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(s, s, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    p00, p10, p01, p11 = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel(), idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
    tris = np.vstack([np.column_stack([p00, p10, p11]), np.column_stack([p00, p11, p01])])
    h = 1.0 / n
    # both triangle types have area h^2/2; gradients of the barycentric functions
    G1 = np.array([[-1, 0], [1, -1], [0, 1]]) / h
    G2 = np.array([[0, -1], [1, 0], [-1, 1]]) / h
    rows, cols, vals = [], [], []
    for G, T in ((G1, tris[: len(p00)]), (G2, tris[len(p00) :])):
        loc = 0.5 * h * h * (alpha * G @ G.T + np.outer(np.ones(3), G @ b) / 3.0)
        rows.append(np.repeat(T, 3, axis=1).ravel())
        cols.append(np.tile(T, (1, 3)).ravel())
        vals.append(np.tile(loc.ravel(), len(T)))
    N = len(pts)
    K = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    bnd = (pts[:, 0] == 0) | (pts[:, 0] == 1) | (pts[:, 1] == 0) | (pts[:, 1] == 1)
    u = np.zeros(N)
    u[bnd] = g(pts[bnd])
    inner = np.flatnonzero(~bnd)
    u[inner] = spla.spsolve(K[inner][:, inner].tocsc(), -(K[inner][:, bnd] @ u[bnd]))
    return RegularGridInterpolator((s, s), u.reshape(n + 1, n + 1))


def random_edge_coefficients(rng, count=20):
    """Edge problems whose solutions the 10^4 point grid resolves to better than 1e-6."""
    out = []
    for _ in range(count):
        L = rng.uniform(0.2, 2.0)
        a = rng.uniform(0.05, 2.0)
        b = rng.uniform(-8.0, 8.0) * a / L
        c = rng.uniform(0.0, 8.0) * a / L**2
        u0, uL = rng.uniform(-3, 3, size=2)
        out.append((a, b, c, L, u0, uL))
    return out
