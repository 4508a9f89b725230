"""Global skeletal stiffness assembly, Dirichlet elimination and GMRES."""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InconsistentDimensions, NoConvergence
from .local_bem import BANDS, Q_REG, Q_SING, Kernel, canonical_surface, element_operators
from .trace_basis import build_basis_traces


@dataclass
class ElementMatrix:
    """Steklov matrix of one element with the aux ids of its rows/columns."""

    element: int
    aux_ids: np.ndarray
    S: np.ndarray
    key: tuple = None


def element_class_key(kernel, rel, tris):
    q = np.round(rel / 1e-12).astype(np.int64)
    return (kernel.key(), q.tobytes(), tris.astype(np.int64).tobytes())


def element_steklov_matrices(mesh, skeleton, coeffs, q_sing=Q_SING, q_reg=Q_REG, q_fold=None, bands=BANDS, cache=True, elements=None):
    """Yield an ``ElementMatrix`` per element.

    With ``cache`` on, elements whose surface triangulations are translates
    of each other (coordinates relative to the barycenter agree to 1e-12)
    and whose coefficients agree share one computation.  Only classes with
    more than one member are kept in memory.
    """
    elements = range(mesh.n_elements) if elements is None else elements
    prepared = []
    for t in elements:
        ids, tris = skeleton.element_surface(t)
        perm, rel, ctris = canonical_surface(skeleton.coords[ids], tris, mesh.element_centroids[t])
        kernel = Kernel.from_coefficients(coeffs.A[t], coeffs.b[t], coeffs.c[t])
        key = element_class_key(kernel, rel, ctris) if cache else None
        prepared.append((t, ids[perm], rel, ctris, kernel, key))
    remaining = {}
    if cache:
        for *_, key in prepared:
            remaining[key] = remaining.get(key, 0) + 1
    store = {}
    for t, ids, rel, ctris, kernel, key in prepared:
        if key is not None and key in store:
            S = store[key]
        else:
            S = element_operators(rel, ctris, kernel, q_sing, q_reg, q_fold, bands).S
            if key is not None and remaining[key] > 1:
                store[key] = S
        if key is not None:
            remaining[key] -= 1
            if remaining[key] == 0:
                store.pop(key, None)
        yield ElementMatrix(t, ids, S, key)


@dataclass
class GlobalSystem:
    K: sp.csr_matrix
    dirichlet: np.ndarray  # boolean mask over mesh nodes
    g: np.ndarray  # Dirichlet values (zero at interior nodes)
    stats: dict = field(default_factory=dict)
    traces: object = None

    @property
    def interior(self):
        return np.flatnonzero(~self.dirichlet)

    @property
    def K_II(self):
        i = self.interior
        return self.K[i][:, i].tocsr()

    @property
    def rhs(self):
        i = self.interior
        b = np.flatnonzero(self.dirichlet)
        return -(self.K[i][:, b] @ self.g[b])


def _assemble(mesh, blocks, g):
    N = mesh.n_nodes
    rows = np.concatenate([np.repeat(n, len(n)) for n, _ in blocks])
    cols = np.concatenate([np.tile(n, len(n)) for n, _ in blocks])
    vals = np.concatenate([k.ravel() for _, k in blocks])
    K = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    dirichlet = mesh.boundary_nodes.copy()
    gv = np.zeros(N)
    if callable(g):
        gv[dirichlet] = np.asarray(g(mesh.nodes[dirichlet]), dtype=float)
    else:
        g = np.asarray(g, dtype=float)
        if g.shape != (N,):
            raise InconsistentDimensions("Dirichlet values must be given at every mesh node")
        gv[dirichlet] = g[dirichlet]
    return GlobalSystem(K, dirichlet, gv)


def assemble_and_reduce(mesh, restrictions, steklov, g):
    """Assemble ``K = sum_T R_T^T S_T R_T`` and eliminate Dirichlet nodes.

    ``restrictions`` and ``steklov`` are matching sequences of
    ``RestrictionMatrix`` and ``ElementMatrix`` (or ``(aux_ids, S)``).
    ``g`` is a callable on ``(m, 3)`` points or an array over mesh nodes;
    only its values at boundary nodes are used.
    """
    blocks = []
    for R, em in zip(restrictions, steklov):
        aux_ids, S = (em.aux_ids, em.S) if isinstance(em, ElementMatrix) else em
        if not np.array_equal(R.aux_ids, aux_ids) or S.shape != (len(aux_ids), len(aux_ids)):
            raise InconsistentDimensions(f"element {R.element}: restriction and Steklov matrix do not match")
        blocks.append((R.node_ids, R.matrix.T @ S @ R.matrix))
    return _assemble(mesh, blocks, g)


def build_global_system(mesh, skeleton, coeffs, g, mode="adapted", q_sing=Q_SING, q_reg=Q_REG, q_fold=None, cache=True, traces=None, element_matrices=None):
    """Traces, element Steklov matrices and the reduced global system in one go.

    Element Steklov matrices are projected onto the element's basis traces
    right away, so only small ``nodes x nodes`` blocks are kept unless
    ``element_matrices`` is a list, which then collects them (when empty)
    or supplies them (when filled) so that several trace modes can share
    one set of local boundary element computations.
    """
    t0 = time.perf_counter()
    if traces is None:
        traces = build_basis_traces(mesh, skeleton, coeffs, mode=mode, cache=cache)
    t1 = time.perf_counter()
    blocks, keys = [], set()
    if element_matrices:
        source = element_matrices
    else:
        source = element_steklov_matrices(mesh, skeleton, coeffs, q_sing, q_reg, q_fold, cache=cache)
    collect = element_matrices is not None and not element_matrices
    for em in source:
        if collect:
            element_matrices.append(em)
        R = traces.restriction(em.element, em.aux_ids)
        blocks.append((R.node_ids, R.matrix.T @ em.S @ R.matrix))
        keys.add(em.key)
    t2 = time.perf_counter()
    system = _assemble(mesh, blocks, g)
    system.traces = traces
    system.stats.update(
        element_classes=len(keys) if cache else mesh.n_elements,
        face_classes=traces.stats["face_classes"],
        edge_classes=traces.stats["edge_classes"],
        time_traces=t1 - t0,
        time_elements=t2 - t1,
    )
    return system


def grs_scaling(A):
    """Reciprocal row 1-norms (geometric row scaling)."""
    norms = np.asarray(abs(A).sum(axis=1)).ravel()
    if np.any(norms == 0):
        raise NoConvergence("zero row in system matrix")
    return 1.0 / norms


def gmres_solve(system, precond="none", tol=1e-6):
    """Unrestarted GMRES from a zero initial guess.

    ``precond="grs"`` scales the rows of the reduced system by their
    reciprocal 1-norms (left preconditioning).  Returns the full nodal
    coefficient vector (Dirichlet values merged in) and the iteration count.
    """
    A = system.K_II
    b = system.rhs
    if precond == "grs":
        d = grs_scaling(A)
        A = sp.diags(d) @ A
        b = d * b
    elif precond != "none":
        raise ValueError(f"unknown preconditioner {precond!r}")
    x, its = _gmres(A, b, tol)
    u = system.g.copy()
    u[system.interior] = x
    return u, its


def _gmres(A, b, tol):
    n = A.shape[0]
    if n == 0 or not np.any(b):
        return np.zeros(n), 0
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = spla.gmres(A, b, rtol=tol, atol=0.0, restart=n, maxiter=1, callback=cb, callback_type="pr_norm")
    if info != 0:
        raise NoConvergence(f"GMRES did not reach {tol:g} within {n} iterations")
    return x, count[0]
