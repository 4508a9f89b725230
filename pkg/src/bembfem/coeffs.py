"""Piecewise constant PDE coefficients and their face/edge reductions.

The operator is ``L u = -div(A grad u) + b . grad u + c u``.  Coefficients
are constant per element; on faces and edges they are averaged over the
incident elements (equal weights) and expressed in the entity's local
frame, keeping only the tangential block.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NegativeReaction, NonSPDDiffusion
from .mesh import edge_frame, face_frame

SYMMETRY_TOL = 1e-12


@dataclass
class CoefficientFunctions:
    """Coefficient data; each entry is a constant or a callable on (m, 3) points."""

    A: object
    b: object
    c: object = 0.0

    @classmethod
    def constant(cls, alpha, b=(0.0, 0.0, 0.0), c=0.0):
        return cls(alpha * np.eye(3), np.asarray(b, dtype=float), float(c))


def _evaluate(f, pts, shape):
    m = len(pts)
    if callable(f):
        out = np.asarray(f(pts), dtype=float)
    else:
        out = np.broadcast_to(np.asarray(f, dtype=float), (m,) + shape)
    return out.reshape((m,) + shape)


@dataclass
class CoefficientField:
    A: np.ndarray  # (nT, 3, 3)
    b: np.ndarray  # (nT, 3)
    c: np.ndarray  # (nT,)
    A_face: np.ndarray  # (nF, 2, 2)
    b_face: np.ndarray  # (nF, 2)
    c_face: np.ndarray  # (nF,)
    a_edge: np.ndarray  # (nE,)
    b_edge: np.ndarray  # (nE,)
    c_edge: np.ndarray  # (nE,)

    @property
    def alpha(self):
        """Smallest eigenvalue of each element diffusion matrix."""
        return np.linalg.eigvalsh(self.A)[:, 0]

    @property
    def alpha_face(self):
        return np.linalg.eigvalsh(self.A_face)[:, 0]

    def element_peclet(self, mesh):
        return peclet(mesh.element_diameters, self.b, self.A)

    def linearized(self):
        """Coefficients ``(I, 0, 0)`` on faces and edges (straightforward traces)."""
        nf, ne = len(self.c_face), len(self.c_edge)
        return CoefficientField(
            self.A,
            self.b,
            self.c,
            np.broadcast_to(np.eye(2), (nf, 2, 2)).copy(),
            np.zeros((nf, 2)),
            np.zeros(nf),
            np.ones(ne),
            np.zeros(ne),
            np.zeros(ne),
        )


def check_element_coefficients(A, b, c):
    A = np.asarray(A, dtype=float)
    asym = np.abs(A - np.swapaxes(A, -1, -2)).max(axis=(-1, -2))
    scale = np.abs(A).max(axis=(-1, -2))
    bad = np.flatnonzero(asym > SYMMETRY_TOL * np.maximum(scale, 1.0))
    if len(bad):
        raise NonSPDDiffusion(f"diffusion matrix of element {bad[0]} is not symmetric")
    for t, a in enumerate(A):
        try:
            np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise NonSPDDiffusion(f"diffusion matrix of element {t} is not positive definite") from None
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise NegativeReaction(f"negative reaction on element {int(np.argmin(c))}")


def project_coefficients(fields, mesh):
    """Project coefficient functions to element, face and edge constants.

    Element values are the mean over the element vertices and centroid.
    """
    nT = mesh.n_elements
    A = np.empty((nT, 3, 3))
    b = np.empty((nT, 3))
    c = np.empty(nT)
    for t, nodes in enumerate(mesh.element_nodes):
        pts = np.vstack([mesh.nodes[nodes], mesh.element_centroids[t]])
        A[t] = _evaluate(fields.A, pts, (3, 3)).mean(axis=0)
        b[t] = _evaluate(fields.b, pts, (3,)).mean(axis=0)
        c[t] = _evaluate(fields.c, pts, ()).mean(axis=0)
    return field_from_element_values(mesh, A, b, c)


def field_from_element_values(mesh, A, b, c):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    check_element_coefficients(A, b, c)

    nF, nE = mesh.n_faces, mesh.n_edges
    A_face = np.empty((nF, 2, 2))
    b_face = np.empty((nF, 2))
    c_face = np.empty(nF)
    for f in range(nF):
        els = list(mesh.face_elements[f])
        frame = face_frame(mesh, f)
        A_face[f] = frame.transform_matrix(A[els].mean(axis=0))[:2, :2]
        b_face[f] = frame.transform_vector(b[els].mean(axis=0))[:2]
        c_face[f] = c[els].mean()

    a_edge = np.empty(nE)
    b_edge = np.empty(nE)
    c_edge = np.empty(nE)
    for e in range(nE):
        els = list(mesh.edge_elements[e])
        e1 = edge_frame(mesh, e).rotation[:, 0]
        a_edge[e] = e1 @ A[els].mean(axis=0) @ e1
        b_edge[e] = e1 @ b[els].mean(axis=0)
        c_edge[e] = c[els].mean()
    return CoefficientField(A, b, c, A_face, b_face, c_face, a_edge, b_edge, c_edge)


def peclet(h, b, A):
    """Mesh Peclet number ``h |b| / alpha`` with ``alpha = lambda_min(A)``.

    Works elementwise on stacked inputs; ``A`` may also be a scalar alpha.
    """
    h = np.asarray(h, dtype=float)
    b = np.asarray(b, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.ndim >= 2:
        alpha = np.linalg.eigvalsh(A)[..., 0]
    else:
        alpha = A
    return h * np.linalg.norm(b, axis=-1) / alpha


def supg_delta(h, b_face, alpha_face):
    """Per-triangle SUPG parameter: ``h/2`` where the local Peclet number exceeds 2."""
    h = np.asarray(h, dtype=float)
    pe = h * np.linalg.norm(b_face) / alpha_face
    return np.where(pe > 2.0, 0.5 * h, 0.0)


def rotating_field(x, scale=0.85):
    """Convection field rotating about the edge ``x1 = x3 = 1``.

    ``b(x) = scale / r * (x3 - 1, 0, 1 - x1)`` with ``r`` the distance to
    the axis; set to zero on the axis itself.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    u = x[:, 2] - 1.0
    v = 1.0 - x[:, 0]
    r = np.hypot(u, v)
    safe = np.where(r > 1e-14, r, 1.0)
    out = scale * np.column_stack([u, np.zeros_like(u), v]) / safe[:, None]
    out[r <= 1e-14] = 0.0
    return out


def coefficient_preset(name, alpha, A=None, b=None, c=None):
    """Named coefficient sets: ``exp1`` (``b = (1,0,0)``), ``exp2`` (rotating ``b``) or ``custom``.

    ``A`` may be a scalar or a 3x3 matrix; for the experiment presets
    ``A = alpha I`` unless overridden.
    """
    if name == "exp1":
        bb = (1.0, 0.0, 0.0)
    elif name == "exp2":
        bb = rotating_field
    elif name == "custom":
        bb = (0.0, 0.0, 0.0)
    else:
        raise ValueError(f"unknown coefficient preset {name!r}")
    if A is None:
        AA = float(alpha) * np.eye(3)
    else:
        AA = np.asarray(A, dtype=float)
        AA = float(AA) * np.eye(3) if AA.ndim == 0 else AA.reshape(3, 3)
    if b is not None:
        bb = np.asarray(b, dtype=float)
    return CoefficientFunctions(AA, bb, 0.0 if c is None else float(c))
