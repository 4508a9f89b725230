"""Auxiliary face triangulations and the conforming skeleton triangulation.

A face is first split into a fan of triangles around an interior center
(the inscribed-circle center, optionally moved along the projected
convection), then every fan triangle is refined ``level`` times by
connecting edge midpoints.  ``level`` red refinements of a triangle give
the uniform lattice subdivision with ``m = 2**level`` segments per side,
which is what is built here directly.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonStarShapedFace
from .geometry import chebyshev_center, diameter, is_star_shaped_wrt, ray_exit_distance
from .mesh import face_frame

DEFAULT_BETA = 0.25
SHIFT_PECLET = 2.0


@dataclass
class FaceTriangulation:
    """Triangulation of one face in its local 2D frame.

    Vertices are ordered boundary first (edge ``i`` of the polygon
    contributes vertex ``i`` followed by its ``m - 1`` partition points),
    then the interior vertices.
    """

    level: int
    vertices: np.ndarray
    triangles: np.ndarray
    center: np.ndarray
    incenter: np.ndarray
    beta: float
    n_boundary: int

    @property
    def m(self):
        return 2**self.level

    @property
    def n_interior(self):
        return len(self.vertices) - self.n_boundary

    @property
    def areas(self):
        p = self.vertices[self.triangles]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def diameters(self):
        p = self.vertices[self.triangles]
        e = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
        return np.sqrt((e**2).sum(axis=2)).max(axis=1)


def _choose_center(poly, b_face, alpha_face, shift, beta):
    incenter, radius = chebyshev_center(poly)
    if radius <= 1e-12 * diameter(poly):
        raise NonStarShapedFace("no interior circle w.r.t. which the face is star-shaped")
    if not shift or b_face is None:
        return incenter, incenter, 0.0
    speed = float(np.linalg.norm(b_face))
    if speed == 0.0 or diameter(poly) * speed / alpha_face <= SHIFT_PECLET:
        return incenter, incenter, 0.0
    direction = np.asarray(b_face, dtype=float) / speed
    reach = ray_exit_distance(poly, incenter, direction)
    while beta > 1e-6:
        c = incenter + beta * reach * direction
        if is_star_shaped_wrt(poly, c):
            return c, incenter, beta
        beta *= 0.5
    return incenter, incenter, 0.0


def build_face_triangulation(poly, level, b_face=None, alpha_face=None, shift=True, beta=DEFAULT_BETA):
    """Fan triangulation of a counterclockwise polygon, refined ``level`` times.

    When ``shift`` is on and the face Peclet number
    ``diam(F) |b_F| / alpha_F`` exceeds 2, the fan center moves from the
    inscribed-circle center towards the boundary along ``b_F`` by ``beta``
    times the distance to the boundary in that direction (halving ``beta``
    until the polygon stays star-shaped w.r.t. the new center).
    """
    poly = np.asarray(poly, dtype=float)
    level = int(level)
    if level < 0:
        raise ValueError("level must be >= 0")
    k, m = len(poly), 2**level
    center, incenter, beta_used = _choose_center(poly, b_face, alpha_face, shift, beta)

    keys = [("v", i) if j == 0 else ("e", i, j) for i in range(k) for j in range(m)]
    n_boundary = len(keys)
    keys.append(("c",))
    keys += [("s", i, a) for i in range(k) for a in range(1, m)]
    keys += [("t", i, a, b) for i in range(k) for a in range(1, m) for b in range(1, m - a)]
    index = {key: n for n, key in enumerate(keys)}

    def point(key):
        kind = key[0]
        if kind == "v":
            return poly[key[1]]
        if kind == "e":
            i, j = key[1], key[2]
            return poly[i] + (j / m) * (poly[(i + 1) % k] - poly[i])
        if kind == "c":
            return center
        if kind == "s":
            i, a = key[1], key[2]
            return center + (a / m) * (poly[i] - center)
        i, a, b = key[1], key[2], key[3]
        return center + (a / m) * (poly[i] - center) + (b / m) * (poly[(i + 1) % k] - center)

    vertices = np.array([point(key) for key in keys])

    def lattice(i, a, b):
        if a == 0 and b == 0:
            return index[("c",)]
        if b == 0:
            return index[("v", i)] if a == m else index[("s", i, a)]
        if a == 0:
            j = (i + 1) % k
            return index[("v", j)] if b == m else index[("s", j, b)]
        if a + b == m:
            return index[("e", i, b)]
        return index[("t", i, a, b)]

    tris = []
    for i in range(k):
        for a in range(m):
            for b in range(m - a):
                tris.append((lattice(i, a, b), lattice(i, a + 1, b), lattice(i, a, b + 1)))
                if a + b <= m - 2:
                    tris.append((lattice(i, a + 1, b), lattice(i, a + 1, b + 1), lattice(i, a, b + 1)))
    return FaceTriangulation(level, vertices, np.array(tris, dtype=np.int64), center, incenter, beta_used, n_boundary)


@dataclass
class SkeletonMesh:
    """Conforming triangulation of all faces with global auxiliary numbering.

    Auxiliary node ids: mesh nodes keep their ids ``0..N-1``; interior edge
    partition nodes follow (``m - 1`` per edge, ordered from the smaller
    node index); then the interior vertices of every face.
    """

    mesh: object
    level: int
    faces: list
    face_aux_ids: list
    edge_aux_ids: np.ndarray
    coords: np.ndarray
    dirichlet: np.ndarray
    _element_cache: dict = field(default_factory=dict, repr=False)

    @property
    def m(self):
        return 2**self.level

    @property
    def n_aux(self):
        return len(self.coords)

    def triangles(self):
        """All skeleton triangles as global aux-id triples (face orientation)."""
        return np.vstack([ids[ft.triangles] for ids, ft in zip(self.face_aux_ids, self.faces)])

    def element_surface(self, t):
        """Outward oriented surface triangulation of element ``t``.

        Returns ``(aux_ids, triangles)`` where ``triangles`` index into the
        sorted global ``aux_ids``.
        """
        if t in self._element_cache:
            return self._element_cache[t]
        mesh = self.mesh
        parts = []
        for f, s in zip(mesh.element_faces[t], mesh.element_signs[t]):
            tri = self.face_aux_ids[f][self.faces[f].triangles]
            parts.append(tri if s > 0 else tri[:, [0, 2, 1]])
        tri = np.vstack(parts)
        ids, local = np.unique(tri, return_inverse=True)
        out = (ids, local.reshape(tri.shape))
        self._element_cache[t] = out
        return out

    def to_dict(self):
        return {
            "level": self.level,
            "aux_nodes": self.coords.tolist(),
            "triangles": self.triangles().tolist(),
            "dirichlet": self.dirichlet.astype(int).tolist(),
            "face_centers_shifted": [int(ft.beta > 0) for ft in self.faces],
        }


def build_skeleton_mesh(mesh, level, coeffs=None, shift=True, beta=DEFAULT_BETA):
    """Triangulate every face and glue them along shared edges."""
    level = int(level)
    m = 2**level
    N, E = mesh.n_nodes, mesh.n_edges
    edges = mesh.edges

    edge_ids = np.empty((E, m + 1), dtype=np.int64)
    edge_ids[:, 0] = edges[:, 0]
    edge_ids[:, m] = edges[:, 1]
    if m > 1:
        edge_ids[:, 1:m] = N + np.arange(E * (m - 1)).reshape(E, m - 1)
    s = np.arange(1, m) / m
    pa, pb = mesh.nodes[edges[:, 0]], mesh.nodes[edges[:, 1]]
    edge_coords = (pa[:, None, :] + s[None, :, None] * (pb - pa)[:, None, :]).reshape(-1, 3)

    next_id = N + E * (m - 1)
    faces, face_ids, face_coords = [], [], []
    alpha_face = coeffs.alpha_face if coeffs is not None else None
    for f in range(mesh.n_faces):
        frame = face_frame(mesh, f)
        loop = mesh.faces[f]
        poly = frame.to_local(mesh.nodes[loop])[:, :2]
        try:
            ft = build_face_triangulation(
                poly,
                level,
                None if coeffs is None else coeffs.b_face[f],
                None if coeffs is None else alpha_face[f],
                shift=shift and coeffs is not None,
                beta=beta,
            )
        except NonStarShapedFace as exc:
            raise NonStarShapedFace(str(exc), face=f) from None
        k = len(loop)
        ids = np.empty(len(ft.vertices), dtype=np.int64)
        for i in range(k):
            a = loop[i]
            e = mesh.face_edges[f][i]
            forward = edges[e, 0] == a
            for j in range(m):
                ids[i * m + j] = a if j == 0 else edge_ids[e, j if forward else m - j]
        n_int = ft.n_interior
        ids[ft.n_boundary :] = next_id + np.arange(n_int)
        next_id += n_int
        interior = np.column_stack([ft.vertices[ft.n_boundary :], np.zeros(n_int)])
        face_coords.append(frame.to_global(interior))
        faces.append(ft)
        face_ids.append(ids)

    coords = np.vstack([mesh.nodes, edge_coords] + face_coords)
    dirichlet = np.zeros(len(coords), dtype=bool)
    dirichlet[:N] = mesh.boundary_nodes
    dirichlet[edge_ids[mesh.boundary_edges].ravel()] = True
    for f in np.flatnonzero(mesh.boundary_faces):
        dirichlet[face_ids[f]] = True
    return SkeletonMesh(mesh, level, faces, face_ids, edge_ids, coords, dirichlet)
