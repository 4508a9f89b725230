"""Polyhedral mesh data model, validation, local frames and JSON I/O."""

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateEntity, IoError, MeshError
from .geometry import chebyshev_center, diameter, newell_normal

PLANARITY_TOL = 1e-10


@dataclass(frozen=True)
class RigidFrame:
    """Rigid motion ``x = rotation @ x_local + offset``."""

    rotation: np.ndarray
    offset: np.ndarray

    def to_local(self, x):
        return (np.asarray(x, dtype=float) - self.offset) @ self.rotation

    def to_global(self, x_local):
        return np.asarray(x_local, dtype=float) @ self.rotation.T + self.offset

    def transform_matrix(self, a):
        """Express a global tensor in local coordinates: ``B^T A B``."""
        return self.rotation.T @ a @ self.rotation

    def transform_vector(self, v):
        return self.rotation.T @ v


class PolyMesh:
    """Decomposition of a domain into polyhedra with planar polygonal faces.

    Parameters
    ----------
    nodes : (N, 3) array_like
    faces : sequence of node-index loops
        Each loop is counterclockwise as seen from the side its normal
        points to; the normal is derived from the loop (Newell's method).
    elements : sequence of sequences of ``(face, sign)``
        ``sign = +1`` if the face normal points out of the element.

    Derived data (edges, adjacency, boundary flags, diameters) is built on
    construction.  Edges are stored as sorted node pairs, numbered in
    lexicographic order, so the numbering depends only on node indices.
    """

    def __init__(self, nodes, faces, elements):
        nodes = np.array(nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise MeshError("nodes must have shape (N, 3)")
        self.nodes = nodes
        self.nodes.setflags(write=False)
        self.faces = [np.array(f, dtype=np.int64) for f in faces]
        for f in self.faces:
            f.setflags(write=False)
        self.element_faces = [np.array([fs[0] for fs in e], dtype=np.int64) for e in elements]
        self.element_signs = [np.array([fs[1] for fs in e], dtype=np.int64) for e in elements]

        pairs = set()
        for loop in self.faces:
            for a, b in zip(loop, np.roll(loop, -1)):
                if a == b:
                    raise MeshError("repeated node in face loop")
                pairs.add((min(a, b), max(a, b)))
        self.edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
        self.edges.setflags(write=False)
        self.edge_index = {tuple(e): i for i, e in enumerate(self.edges.tolist())}
        self.face_edges = [
            np.array([self.edge_index[(min(a, b), max(a, b))] for a, b in zip(loop, np.roll(loop, -1))])
            for loop in self.faces
        ]

        nf = len(self.faces)
        self.face_elements = [[] for _ in range(nf)]
        for t, fs in enumerate(self.element_faces):
            for f in fs:
                self.face_elements[f].append(t)
        self.face_elements = [tuple(x) for x in self.face_elements]

    # -- sizes ---------------------------------------------------------------
    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_elements(self):
        return len(self.element_faces)

    def summary(self):
        return {
            "nodes": self.n_nodes,
            "edges": self.n_edges,
            "faces": self.n_faces,
            "elements": self.n_elements,
            "interior_nodes": int((~self.boundary_nodes).sum()),
            "h_max": float(self.element_diameters.max()),
        }

    # -- face geometry ------------------------------------------------------
    @cached_property
    def _face_vector_areas(self):
        return np.array([0.5 * newell_normal(self.nodes[f]) for f in self.faces])

    @cached_property
    def face_areas(self):
        return np.linalg.norm(self._face_vector_areas, axis=1)

    @cached_property
    def face_normals(self):
        a = self.face_areas
        if np.any(a < 1e-14):
            raise DegenerateEntity(f"face {int(np.argmin(a))} has zero area")
        return self._face_vector_areas / a[:, None]

    @cached_property
    def face_centroids(self):
        return np.array([self.nodes[f].mean(axis=0) for f in self.faces])

    @cached_property
    def face_diameters(self):
        return np.array([diameter(self.nodes[f]) for f in self.faces])

    @cached_property
    def edge_lengths(self):
        d = self.nodes[self.edges[:, 1]] - self.nodes[self.edges[:, 0]]
        return np.linalg.norm(d, axis=1)

    # -- element data -------------------------------------------------------
    @cached_property
    def element_nodes(self):
        return [np.unique(np.concatenate([self.faces[f] for f in fs])) for fs in self.element_faces]

    @cached_property
    def element_edges(self):
        return [np.unique(np.concatenate([self.face_edges[f] for f in fs])) for fs in self.element_faces]

    @cached_property
    def element_centroids(self):
        return np.array([self.nodes[n].mean(axis=0) for n in self.element_nodes])

    @cached_property
    def element_diameters(self):
        return np.array([diameter(self.nodes[n]) for n in self.element_nodes])

    @cached_property
    def element_volumes(self):
        # divergence theorem: V = 1/3 sum_F (x_F . n_F) |F| with outward normals
        vol = np.zeros(self.n_elements)
        va = self._face_vector_areas
        for t, (fs, ss) in enumerate(zip(self.element_faces, self.element_signs)):
            vol[t] = np.sum(ss * np.einsum("ij,ij->i", self.face_centroids[fs], va[fs])) / 3.0
        return vol

    @cached_property
    def edge_elements(self):
        out = [set() for _ in range(self.n_edges)]
        for t, es in enumerate(self.element_edges):
            for e in es:
                out[e].add(t)
        return [tuple(sorted(s)) for s in out]

    # -- boundary flags -----------------------------------------------------
    @cached_property
    def boundary_faces(self):
        return np.array([len(e) == 1 for e in self.face_elements], dtype=bool)

    @cached_property
    def boundary_edges(self):
        flag = np.zeros(self.n_edges, dtype=bool)
        for f in np.flatnonzero(self.boundary_faces):
            flag[self.face_edges[f]] = True
        return flag

    @cached_property
    def boundary_nodes(self):
        flag = np.zeros(self.n_nodes, dtype=bool)
        for f in np.flatnonzero(self.boundary_faces):
            flag[self.faces[f]] = True
        return flag

    # -- construction helpers ----------------------------------------------
    @classmethod
    def from_polyhedra(cls, nodes, polyhedra):
        """Build a mesh from per-element lists of face loops.

        Loops may be given in either orientation.  Geometrically identical
        faces (same node set) are merged; the stored orientation makes the
        normal point out of the first element that references the face, and
        every stored loop starts at its smallest node index.
        """
        nodes = np.asarray(nodes, dtype=float)
        faces, lookup, elements = [], {}, []
        for cells in polyhedra:
            cells = [list(map(int, loop)) for loop in cells]
            centroid = nodes[np.unique(np.concatenate(cells))].mean(axis=0)
            elem = []
            for loop in cells:
                key = frozenset(loop)
                outward = newell_normal(nodes[loop]) @ (nodes[loop].mean(axis=0) - centroid) > 0
                if key not in lookup:
                    if not outward:
                        loop = loop[::-1]
                    start = loop.index(min(loop))
                    loop = loop[start:] + loop[:start]
                    lookup[key] = len(faces)
                    faces.append(loop)
                    elem.append((lookup[key], 1))
                else:
                    fid = lookup[key]
                    stored = faces[fid]
                    same = newell_normal(nodes[stored]) @ newell_normal(nodes[loop]) > 0
                    elem.append((fid, 1 if same == outward else -1))
            elements.append(elem)
        return cls(nodes, faces, elements)


# -- local frames ---------------------------------------------------------------


def face_frame(mesh, face):
    loop = mesh.faces[face]
    p = mesh.nodes[loop]
    if mesh.face_areas[face] < 1e-14:
        raise DegenerateEntity(f"face {face} has zero area")
    e3 = mesh.face_normals[face]
    e1 = p[1] - p[0]
    e1 = e1 - (e1 @ e3) * e3
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e3, e1)
    return RigidFrame(np.column_stack([e1, e2, e3]), p[0].copy())


def edge_frame(mesh, edge):
    a, b = mesh.edges[edge]
    pa, pb = mesh.nodes[a], mesh.nodes[b]
    length = np.linalg.norm(pb - pa)
    if length < 1e-14:
        raise DegenerateEntity(f"edge {edge} has zero length")
    e1 = (pb - pa) / length
    axis = np.zeros(3)
    axis[np.argmin(np.abs(e1))] = 1.0
    e2 = np.cross(e1, axis)
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(e1, e2)
    return RigidFrame(np.column_stack([e1, e2, e3]), pa.copy())


def local_frame(mesh, kind, index):
    """Rigid frame mapping a face into the (e1, e2)-plane or an edge onto e1.

    Edge frames put the edge node with the smaller global index at the
    origin, so traces shared by several faces agree.
    """
    if kind == "face":
        return face_frame(mesh, index)
    if kind == "edge":
        return edge_frame(mesh, index)
    raise ValueError(f"kind must be 'face' or 'edge', got {kind!r}")


def face_polygon_2d(mesh, face, frame=None):
    frame = frame or face_frame(mesh, face)
    return frame.to_local(mesh.nodes[mesh.faces[face]])[:, :2]


# -- validation -----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_entity: object = None
    worst_value: float = 0.0
    message: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self):
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = f" worst={c.worst_entity} value={c.worst_value:.3e}" if c.worst_entity is not None else ""
            out.append(f"{status} {c.name}{extra} {c.message}".rstrip())
        return out


def _planarity(mesh):
    worst, wval = None, 0.0
    for f, loop in enumerate(mesh.faces):
        p = mesh.nodes[loop]
        if len(loop) == 3:
            continue
        q = p - p.mean(axis=0)
        normal = np.linalg.svd(q)[2][-1]
        dev = np.max(np.abs(q @ normal)) / max(mesh.face_diameters[f], 1e-300)
        if dev > wval:
            worst, wval = f, dev
    return CheckResult("planarity", wval <= PLANARITY_TOL, worst, wval)


def _incidence(mesh):
    bad = [f for f, e in enumerate(mesh.face_elements) if len(e) not in (1, 2)]
    return CheckResult(
        "face_incidence", not bad, bad[0] if bad else None, float(len(mesh.face_elements[bad[0]])) if bad else 0.0
    )


def _orientation(mesh):
    worst, wval = None, np.inf
    for t, (fs, ss) in enumerate(zip(mesh.element_faces, mesh.element_signs)):
        c = mesh.element_centroids[t]
        d = np.einsum("ij,ij->i", mesh.face_centroids[fs] - c, ss[:, None] * mesh.face_normals[fs])
        i = int(np.argmin(d))
        if d[i] < wval:
            worst, wval = (t, int(fs[i])), float(d[i])
    passed = wval > 0
    return CheckResult("outward_normals", passed, None if passed else worst, wval)


def _closedness(mesh):
    worst, wval = None, 0.0
    va = mesh._face_vector_areas
    for t, (fs, ss) in enumerate(zip(mesh.element_faces, mesh.element_signs)):
        total = np.linalg.norm((ss[:, None] * va[fs]).sum(axis=0)) / mesh.face_areas[fs].sum()
        counts = np.bincount(np.concatenate([mesh.face_edges[f] for f in fs]))
        used = counts[counts > 0]
        if np.any(used != 2):
            total = max(total, 1.0)
        if total > wval:
            worst, wval = t, total
    return CheckResult("closed_surfaces", wval <= 1e-10, worst if wval > 1e-10 else None, wval)


def _hanging_nodes(mesh):
    p = mesh.nodes
    a, b = p[mesh.edges[:, 0]], p[mesh.edges[:, 1]]
    d = b - a
    L2 = np.einsum("ij,ij->i", d, d)
    for e in range(mesh.n_edges):
        s = (p - a[e]) @ d[e] / L2[e]
        inside = (s > 1e-10) & (s < 1 - 1e-10)
        if not inside.any():
            continue
        dist = np.linalg.norm(p[inside] - (a[e] + s[inside, None] * d[e]), axis=1)
        if np.any(dist < 1e-10 * np.sqrt(L2[e])):
            node = int(np.flatnonzero(inside)[np.argmin(dist)])
            return CheckResult("conforming", False, (e, node), float(dist.min()), "node inside edge")
    return CheckResult("conforming", True)


def _star_shaped(mesh):
    worst, wval = None, np.inf
    for f in range(mesh.n_faces):
        if len(mesh.faces[f]) == 3:
            continue
        _, r = chebyshev_center(face_polygon_2d(mesh, f))
        r /= mesh.face_diameters[f]
        if r < wval:
            worst, wval = f, r
    if worst is None:
        return CheckResult("star_shaped_faces", True)
    return CheckResult("star_shaped_faces", wval > 1e-10, None if wval > 1e-10 else worst, wval)


def validate(mesh):
    """Check all structural invariants; never raises on failures."""
    checks = []
    for fn in (_planarity, _incidence, _orientation, _closedness, _hanging_nodes, _star_shaped):
        try:
            checks.append(fn(mesh))
        except MeshError as exc:
            checks.append(CheckResult(fn.__name__.strip("_"), False, message=str(exc)))
    return ValidationReport(checks)


# -- JSON I/O -------------------------------------------------------------------


def mesh_to_dict(mesh):
    return {
        "nodes": mesh.nodes.tolist(),
        "faces": [f.tolist() for f in mesh.faces],
        "elements": [
            [[int(f), int(s)] for f, s in zip(fs, ss)] for fs, ss in zip(mesh.element_faces, mesh.element_signs)
        ],
    }


def save_mesh(mesh, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mesh_to_dict(mesh), fh)


def mesh_from_dict(data):
    try:
        return PolyMesh(data["nodes"], data["faces"], [[tuple(p) for p in e] for e in data["elements"]])
    except (KeyError, TypeError) as exc:
        raise MeshError(f"malformed mesh description: {exc!r}") from exc


def load_mesh(path, check=True):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MeshError(f"{path} is not valid JSON: {exc}") from exc
    mesh = mesh_from_dict(data)
    if check:
        report = validate(mesh)
        if not report.ok:
            raise MeshError("invalid mesh:\n" + "\n".join(report.lines()))
    return mesh
