"""Built-in mesh generators for the unit cube."""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Voronoi

from .errors import MeshError, NonStarShapedFace
from .geometry import chebyshev_center, polygon_area, polygon_centroid
from .mesh import PolyMesh


def _kuhn_cube_tets():
    """The six Kuhn tetrahedra of the unit cube as lattice offsets."""
    out = []
    for perm in itertools.permutations(range(3)):
        p = np.zeros(3, dtype=int)
        path = [p.copy()]
        for axis in perm:
            p = p.copy()
            p[axis] += 1
            path.append(p)
        out.append(np.array(path))
    return out


def build_unit_cube_tet_mesh(n):
    """Structured tetrahedral mesh of (0, 1)^3 with ``6 n^3`` elements.

    Every sub-cube is split into six Kuhn tetrahedra around a body
    diagonal; the split is mirrored in each axis with the parity of the
    sub-cube index, so neighbouring cubes are reflections of each other and
    all 13 lattice edge directions occur.
    """
    n = int(n)
    if n < 1:
        raise MeshError("n must be >= 1")
    g = np.arange(n + 1) / n
    z, y, x = np.meshgrid(g, g, g, indexing="ij")
    nodes = np.column_stack([x.ravel(), y.ravel(), z.ravel()])

    def nid(i, j, k):
        return i + (n + 1) * (j + (n + 1) * k)

    base = _kuhn_cube_tets()
    polyhedra = []
    for k in range(n):
        for j in range(n):
            for i in range(n):
                parity = np.array([i % 2, j % 2, k % 2])
                for tet in base:
                    loc = np.where(parity, 1 - tet, tet)
                    ids = [nid(i + a, j + b, k + c) for a, b, c in loc]
                    polyhedra.append([[ids[a] for a in f] for f in itertools.combinations(range(4), 3)])
    return PolyMesh.from_polyhedra(nodes, polyhedra)


@dataclass
class Tiling:
    """Conforming polygonal tiling of the unit square.

    ``points`` are (u, v) coordinates; ``polygons`` are counterclockwise
    index loops.  Prism meshes map (u, v) to (x1, x3) and extrude in x2.
    """

    points: np.ndarray
    polygons: list

    @property
    def n_edges(self):
        e = {tuple(sorted((a, b))) for p in self.polygons for a, b in zip(p, np.roll(p, -1))}
        return len(e)

    def check_star_shaped(self):
        for i, poly in enumerate(self.polygons):
            pts = self.points[poly]
            if polygon_area(pts) <= 0:
                raise NonStarShapedFace("polygon is not counterclockwise", face=i)
            _, r = chebyshev_center(pts)
            if r <= 1e-12:
                raise NonStarShapedFace("polygon is not star-shaped with respect to a circle", face=i)


def rectangle_tiling(nu, nv):
    u = np.linspace(0.0, 1.0, nu + 1)
    v = np.linspace(0.0, 1.0, nv + 1)
    uu, vv = np.meshgrid(u, v, indexing="xy")
    pts = np.column_stack([uu.ravel(), vv.ravel()])

    def pid(i, j):
        return i + (nu + 1) * j

    polys = [[pid(i, j), pid(i + 1, j), pid(i + 1, j + 1), pid(i, j + 1)] for j in range(nv) for i in range(nu)]
    return Tiling(pts, polys)


def voronoi_tiling(n_cells, seed=0, lloyd_iterations=60, merge_tol=1e-9):
    """Clipped centroidal Voronoi tiling of the unit square.

    Seeds are mirrored across the four sides so the Voronoi cells of the
    original seeds are exactly the cells clipped to the square.
    """
    rng = np.random.default_rng(seed)
    seeds = rng.random((n_cells, 2))
    for it in range(lloyd_iterations + 1):
        mirrored = np.vstack(
            [
                seeds,
                np.column_stack([-seeds[:, 0], seeds[:, 1]]),
                np.column_stack([2 - seeds[:, 0], seeds[:, 1]]),
                np.column_stack([seeds[:, 0], -seeds[:, 1]]),
                np.column_stack([seeds[:, 0], 2 - seeds[:, 1]]),
            ]
        )
        vor = Voronoi(mirrored)
        cells = [vor.vertices[vor.regions[vor.point_region[i]]] for i in range(n_cells)]
        if it == lloyd_iterations:
            break
        seeds = np.array([_centroid(c) for c in cells])

    points, polygons = [], []
    index = {}
    for c in cells:
        c = np.clip(c, 0.0, 1.0)
        if polygon_area(c) < 0:
            c = c[::-1]
        loop = []
        for p in c:
            key = tuple(np.round(p / merge_tol).astype(np.int64))
            if key not in index:
                index[key] = len(points)
                points.append(p)
            if not loop or loop[-1] != index[key]:
                loop.append(index[key])
        if loop[0] == loop[-1]:
            loop.pop()
        polygons.append(loop)
    tiling = Tiling(np.array(points), polygons)
    return _snap_to_boundary(tiling)


def _centroid(poly):
    p = np.asarray(poly)
    if polygon_area(p) < 0:
        p = p[::-1]
    return polygon_centroid(p)


def _snap_to_boundary(tiling):
    pts = tiling.points.copy()
    for k in range(2):
        pts[np.abs(pts[:, k]) < 1e-12, k] = 0.0
        pts[np.abs(pts[:, k] - 1) < 1e-12, k] = 1.0
    return Tiling(pts, tiling.polygons)


def collapse_short_edges(tiling, min_length):
    """Merge endpoints of tiling edges shorter than ``min_length``.

    Boundary points keep their position on the square; merged interior
    points move to the midpoint.
    """
    pts = tiling.points.copy()
    polys = [list(p) for p in tiling.polygons]
    on_bnd = lambda q: np.any(np.isclose(q, 0.0) | np.isclose(q, 1.0))  # noqa: E731
    corner = lambda q: np.all(np.isclose(q, 0.0) | np.isclose(q, 1.0))  # noqa: E731
    while True:
        edges = {tuple(sorted((a, b))) for p in polys for a, b in zip(p, p[1:] + p[:1])}
        short = sorted(
            (np.linalg.norm(pts[a] - pts[b]), a, b)
            for a, b in edges
            if np.linalg.norm(pts[a] - pts[b]) < min_length and not (corner(pts[a]) and corner(pts[b]))
        )
        if not short:
            break
        _, a, b = short[0]
        if corner(pts[b]) or (on_bnd(pts[b]) and not on_bnd(pts[a])):
            a, b = b, a
        if not on_bnd(pts[a]) and not on_bnd(pts[b]):
            pts[a] = 0.5 * (pts[a] + pts[b])
        elif on_bnd(pts[a]) and on_bnd(pts[b]) and not corner(pts[a]):
            pts[a] = 0.5 * (pts[a] + pts[b])
        new = []
        for p in polys:
            q = [a if v == b else v for v in p]
            q = [v for i, v in enumerate(q) if v != q[i - 1]]
            new.append(q)
        polys = new
    used = sorted({v for p in polys for v in p})
    remap = {v: i for i, v in enumerate(used)}
    return Tiling(pts[used], [[remap[v] for v in p] for p in polys])


TILING_PRESETS = {
    # clipped CVT with 50 cells; 101 points (28 on the boundary), 150 edges
    "paper-like": dict(n_cells=50, seed=21, layers=7, min_edge=0.03),
}


def preset_tiling(name):
    try:
        cfg = TILING_PRESETS[name]
    except KeyError:
        raise MeshError(f"unknown tiling preset {name!r}; choose from {sorted(TILING_PRESETS)}") from None
    tiling = voronoi_tiling(cfg["n_cells"], seed=cfg["seed"])
    if cfg.get("min_edge"):
        tiling = collapse_short_edges(tiling, cfg["min_edge"])
    return tiling, cfg["layers"]


def build_prism_mesh(tiling, layers):
    """Extrude a tiling of the (x1, x3) unit square in x2 into prisms."""
    if isinstance(tiling, str):
        tiling, default_layers = preset_tiling(tiling)
        layers = layers or default_layers
    layers = int(layers)
    if layers < 1:
        raise MeshError("layers must be >= 1")
    tiling.check_star_shaped()
    p = np.asarray(tiling.points, dtype=float)
    m = len(p)
    ys = np.linspace(0.0, 1.0, layers + 1)
    nodes = np.vstack([np.column_stack([p[:, 0], np.full(m, y), p[:, 1]]) for y in ys])
    polyhedra = []
    for layer in range(layers):
        lo, hi = layer * m, (layer + 1) * m
        for poly in tiling.polygons:
            cells = [[lo + v for v in poly], [hi + v for v in poly]]
            for a, b in zip(poly, poly[1:] + poly[:1]):
                cells.append([lo + a, lo + b, hi + b, hi + a])
            polyhedra.append(cells)
    return PolyMesh.from_polyhedra(nodes, polyhedra)
