"""Skeletal basis traces: analytic on edges, SUPG-discrete on faces.

Every mesh node ``z_i`` owns one basis function.  Its trace on an edge
solves the 1D problem ``-a u'' + b u' + c u = 0`` with nodal delta data;
its trace on a face solves the stabilized 2D problem on the auxiliary
triangulation with the edge traces as boundary values.  Traces are stored
as a sparse matrix ``Phi`` (aux nodes x mesh nodes).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial import cKDTree

from .coeffs import supg_delta
from .errors import BadCoefficients, DegenerateEdge, SolverStagnation

DENSE_LIMIT = 200
FACE_RTOL = 1e-10
KEY_QUANTUM = 1e-12


def _ratio(y, kappa, L):
    """``sinh(kappa y) / sinh(kappa L) * exp(kappa (L - y))`` without overflow."""
    if kappa * L < 1e-12:
        return y / L
    return np.expm1(-2.0 * kappa * y) / np.expm1(-2.0 * kappa * L)


def edge_solve(a, b, c, L, u0, uL, xs):
    """Exact solution of ``-a u'' + b u' + c u = 0`` on ``(0, L)``.

    With ``mu = b / 2a`` and ``kappa = sqrt(b^2 + 4ac) / 2a`` the roots are
    ``mu +- kappa``.  The solution is written so that every exponential has
    a non-positive argument.

    Examples
    --------
    >>> float(edge_solve(1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.5))
    0.5
    """
    if not L > 0:
        raise DegenerateEdge(f"edge length must be positive, got {L}")
    if not (a > 0 and c >= 0 and np.isfinite(b)):
        raise BadCoefficients(f"need a > 0, c >= 0 and finite b; got a={a}, b={b}, c={c}")
    x = np.asarray(xs, dtype=float)
    if np.any(x < -1e-14 * L) or np.any(x > L * (1 + 1e-14)):
        raise ValueError("sample points must lie in [0, L]")
    x = np.clip(x, 0.0, L)
    mu = b / (2.0 * a)
    kappa = np.sqrt(b * b + 4.0 * a * c) / (2.0 * a)
    lam1, lam2 = mu + kappa, mu - kappa  # lam1 >= 0 >= lam2
    left = np.exp(x * lam2) * _ratio(L - x, kappa, L)
    right = np.exp((x - L) * lam1) * _ratio(x, kappa, L)
    return u0 * left + uL * right


def _face_matrix(vertices, triangles, A, b, c, delta):
    p = vertices[triangles]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area2 = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    area = 0.5 * area2
    # gradients of the barycentric coordinates
    nxt, prv = p[:, [1, 2, 0]], p[:, [2, 0, 1]]
    grad = np.stack([nxt[..., 1] - prv[..., 1], prv[..., 0] - nxt[..., 0]], axis=-1) / area2[:, None, None]
    bg = grad @ b  # (nt, 3): b . grad(phi_a)
    diff = np.einsum("tai,ij,tbj->tab", grad, A, grad)
    mass = (np.ones((3, 3)) + np.eye(3)) / 12.0
    # row = test function a, column = trial function b
    loc = area[:, None, None] * (diff + bg[:, None, :] / 3.0 + c * mass)
    loc += (delta * area)[:, None, None] * (bg[:, :, None] * bg[:, None, :] + c * bg[:, :, None] / 3.0)
    rows = np.repeat(triangles, 3, axis=1).ravel()
    cols = np.tile(triangles, (1, 3)).ravel()
    n = len(vertices)
    return sp.csr_matrix((loc.ravel(), (rows, cols)), shape=(n, n))


def face_supg_solve(tri, A_F, b_F, c_F, delta, boundary_values):
    """Stabilized P1 extension of boundary data into a face.

    Parameters
    ----------
    tri : FaceTriangulation
    A_F, b_F, c_F : face coefficients in the face frame
    delta : per-triangle stabilization parameters (scalar or array)
    boundary_values : (n_boundary,) or (n_boundary, k)

    Returns
    -------
    Interior nodal values, shape ``(n_interior,)`` or ``(n_interior, k)``.
    """
    A_F = np.asarray(A_F, dtype=float)
    b_F = np.asarray(b_F, dtype=float)
    nb = tri.n_boundary
    g = np.asarray(boundary_values, dtype=float)
    vec = g.ndim == 1
    g = g.reshape(nb, -1)
    delta = np.broadcast_to(np.asarray(delta, dtype=float), (len(tri.triangles),))
    if np.any(delta < 0):
        raise BadCoefficients("stabilization parameters must be non-negative")
    K = _face_matrix(tri.vertices, tri.triangles, A_F, b_F, float(c_F), delta)
    K_II = K[nb:, nb:]
    rhs = -(K[nb:, :nb] @ g)
    n = K_II.shape[0]
    if n == 0:
        x = np.zeros((0, g.shape[1]))
    elif n < DENSE_LIMIT:
        x = sla.lu_solve(sla.lu_factor(K_II.toarray()), rhs)
    else:
        x = np.empty_like(rhs)
        for j in range(rhs.shape[1]):
            r = rhs[:, j]
            if not np.any(r):
                x[:, j] = 0.0
                continue
            sol, info = spla.gmres(K_II, r, rtol=FACE_RTOL, atol=0.0, restart=n, maxiter=1)
            if info != 0 or np.linalg.norm(r - K_II @ sol) > FACE_RTOL * np.linalg.norm(r) * 1.01:
                raise SolverStagnation(f"face GMRES did not reach {FACE_RTOL:g} in {n} iterations")
            x[:, j] = sol
    return x[:, 0] if vec else x


@dataclass
class RestrictionMatrix:
    """Basis trace coefficients on the surface of one element.

    ``matrix[r, j]`` is the value of the basis function of mesh node
    ``node_ids[j]`` at auxiliary node ``aux_ids[r]``.  Columns of mesh
    nodes outside the element are zero and not stored.
    """

    element: int
    aux_ids: np.ndarray
    node_ids: np.ndarray
    matrix: np.ndarray

    def dense(self, n_nodes):
        out = np.zeros((len(self.aux_ids), n_nodes))
        out[:, self.node_ids] = self.matrix
        return out


@dataclass
class BasisTraces:
    mesh: object
    skeleton: object
    mode: str
    phi: sp.csr_matrix
    edge_values: np.ndarray  # (E, m+1, 2) traces of the two edge end nodes
    stats: dict = field(default_factory=dict)

    def restriction(self, t, aux_ids=None):
        if aux_ids is None:
            aux_ids, _ = self.skeleton.element_surface(t)
        nodes = self.mesh.element_nodes[t]
        block = self.phi[aux_ids][:, nodes].toarray()
        return RestrictionMatrix(t, aux_ids, nodes, block)

    def evaluate(self, coefficients):
        """Values at all auxiliary nodes of ``sum_i u_i phi_i``."""
        return self.phi @ np.asarray(coefficients, dtype=float)


def _q(x):
    return tuple(np.round(np.asarray(x, dtype=float).ravel() / KEY_QUANTUM).astype(np.int64).tolist())


def _cq(x):
    return tuple(float(f"{v:.12e}") for v in np.asarray(x, dtype=float).ravel())


def _face_key(mesh, cf, f):
    """Orientation-free translation key of a face and its coefficients."""
    loop = mesh.faces[f]
    pts = mesh.nodes[loop]
    rel = pts - pts.min(axis=0)
    order = np.lexsort(rel.T[::-1])
    els = list(mesh.face_elements[f])
    edge_part = []
    for e in mesh.face_edges[f]:
        a, b = mesh.nodes[mesh.edges[e]]
        sgn = 1.0 if tuple(a) < tuple(b) else -1.0
        ends = tuple(sorted([_q(a - pts.min(axis=0)), _q(b - pts.min(axis=0))]))
        edge_part.append((ends, _cq([cf.a_edge[e], sgn * cf.b_edge[e], cf.c_edge[e]])))
    return (
        _q(rel[order]),
        _cq(cf.A[els].mean(axis=0)),
        _cq(cf.b[els].mean(axis=0)),
        _cq([cf.c[els].mean()]),
        tuple(sorted(edge_part)),
        _cq(np.sort(np.linalg.eigvalsh(cf.A_face[f]))),
        _cq([np.linalg.norm(cf.b_face[f]), cf.c_face[f]]),
    )


def _transfer(hit, pts, inner):
    """Map cached face values onto a translated copy by matching coordinates."""
    x, ref_pts, ref_inner = hit
    base = pts.min(axis=0)
    col = cKDTree(ref_pts).query(pts - base)
    row = cKDTree(ref_inner).query(inner - base)
    if max(col[0].max(), row[0].max()) > 1e-9 * (1.0 + np.abs(ref_pts).max()):
        raise AssertionError("face look-up table entry does not match geometry")
    return x[row[1]][:, col[1]]


def build_basis_traces(mesh, skeleton, coeffs, mode="adapted", cache=True):
    """Compute all basis traces on the skeleton.

    ``mode="linear"`` replaces the face and edge coefficients by
    ``(I, 0, 0)``, giving edge-linear, discrete-harmonic face traces.
    With ``cache`` on, edges and faces that are translates of each other
    with equal coefficients share one solve.
    """
    if mode not in ("adapted", "linear"):
        raise ValueError(f"unknown trace mode {mode!r}")
    cf = coeffs.linearized() if mode == "linear" else coeffs
    m = skeleton.m
    N, E = mesh.n_nodes, mesh.n_edges
    edges = mesh.edges
    s = np.arange(m + 1) / m

    edge_values = np.empty((E, m + 1, 2))
    edge_cache = {}
    for e in range(E):
        L = mesh.edge_lengths[e]
        a, b, c = cf.a_edge[e], cf.b_edge[e], cf.c_edge[e]
        key = (_q(mesh.nodes[edges[e, 1]] - mesh.nodes[edges[e, 0]]), _cq([a, b, c]))
        if cache and key in edge_cache:
            edge_values[e] = edge_cache[key]
            continue
        xs = s * L
        vals = np.column_stack([edge_solve(a, b, c, L, 1.0, 0.0, xs), edge_solve(a, b, c, L, 0.0, 1.0, xs)])
        vals[0], vals[-1] = (1.0, 0.0), (0.0, 1.0)
        edge_values[e] = vals
        edge_cache[key] = vals

    rows, cols, data = [np.arange(N)], [np.arange(N)], [np.ones(N)]
    if m > 1:
        ids = skeleton.edge_aux_ids[:, 1:m]
        rows += [ids.ravel(), ids.ravel()]
        cols += [np.repeat(edges[:, 0], m - 1), np.repeat(edges[:, 1], m - 1)]
        data += [edge_values[:, 1:m, 0].ravel(), edge_values[:, 1:m, 1].ravel()]

    alpha_face = cf.alpha_face
    face_cache = {}
    for f in range(mesh.n_faces):
        tri = skeleton.faces[f]
        loop = mesh.faces[f]
        k = len(loop)
        ids = skeleton.face_aux_ids[f][tri.n_boundary :]
        if len(ids) == 0:
            continue
        fe = mesh.face_edges[f]
        forward = edges[fe, 0] == loop
        pts = mesh.nodes[loop]
        inner = skeleton.coords[ids]
        key = _face_key(mesh, cf, f) if cache else None
        hit = face_cache.get(key) if key is not None else None
        if hit is not None:
            x = _transfer(hit, pts, inner)
        else:
            g = np.zeros((tri.n_boundary, k))
            for i in range(k):
                ev = edge_values[fe[i]] if forward[i] else edge_values[fe[i]][::-1, ::-1]
                j = (i + 1) % k
                g[i * m : (i + 1) * m, i] = ev[:m, 0]
                g[i * m : (i + 1) * m, j] = ev[:m, 1]
            delta = supg_delta(tri.diameters, cf.b_face[f], alpha_face[f])
            try:
                x = face_supg_solve(tri, cf.A_face[f], cf.b_face[f], cf.c_face[f], delta, g)
            except SolverStagnation as exc:
                raise SolverStagnation(f"face {f}: {exc}") from None
            if key is not None:
                face_cache[key] = (x, pts - pts.min(axis=0), inner - pts.min(axis=0))
        rows.append(np.repeat(ids, k))
        cols.append(np.tile(loop, len(ids)))
        data.append(x.ravel())

    phi = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(skeleton.n_aux, N)
    )
    phi.eliminate_zeros()
    stats = {
        "edge_classes": len(edge_cache) if cache else E,
        "face_classes": len(face_cache) if cache else mesh.n_faces,
    }
    return BasisTraces(mesh, skeleton, mode, phi, edge_values, stats)
