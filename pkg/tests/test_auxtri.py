import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bembfem.auxtri import build_face_triangulation, build_skeleton_mesh
from bembfem.coeffs import CoefficientFunctions, project_coefficients
from bembfem.errors import NonStarShapedFace
from bembfem.geometry import is_star_shaped_wrt, polygon_area

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
PENTAGON = np.array([[np.cos(t), np.sin(t)] for t in 2 * np.pi * np.arange(5) / 5 + 0.3])


def _edges(tris):
    e = np.sort(np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    return np.unique(e, axis=0, return_counts=True)


@pytest.mark.parametrize("poly", [SQUARE, PENTAGON], ids=["square", "pentagon"])
@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_counts_and_area(poly, level):
    ft = build_face_triangulation(poly, level)
    k, m = len(poly), 2**level
    assert len(ft.triangles) == k * m * m
    assert ft.n_boundary == k * m
    assert len(ft.vertices) == 1 + k * m * (m + 1) // 2
    assert np.all(ft.areas > 0)
    assert np.isclose(ft.areas.sum(), polygon_area(poly))
    # boundary nodes first, counterclockwise, starting at the polygon vertices
    assert np.allclose(ft.vertices[:: m][:k], poly)


def test_triangulation_is_conforming():
    ft = build_face_triangulation(PENTAGON, 3)
    edges, counts = _edges(ft.triangles)
    assert set(counts) <= {1, 2}
    bnd = np.unique(edges[counts == 1])
    assert np.array_equal(bnd, np.arange(ft.n_boundary))


def test_refinement_halves_diameters():
    d = [build_face_triangulation(SQUARE, lv).diameters.max() for lv in range(4)]
    assert np.allclose(np.array(d[:-1]) / np.array(d[1:]), 2.0)


def test_no_shift_below_peclet_threshold():
    ft = build_face_triangulation(SQUARE, 1, b_face=[1.0, 0.0], alpha_face=1.0)
    assert ft.beta == 0.0
    assert np.allclose(ft.center, [0.5, 0.5])


def test_shift_moves_center_downstream():
    b = np.array([1.0, 0.0])
    ft = build_face_triangulation(SQUARE, 1, b_face=b, alpha_face=1e-3, beta=0.5)
    assert ft.beta == 0.5
    assert np.allclose(ft.incenter, [0.5, 0.5])
    assert np.allclose(ft.center, [0.75, 0.5])
    off = build_face_triangulation(SQUARE, 1, b_face=b, alpha_face=1e-3, shift=False)
    assert np.allclose(off.center, [0.5, 0.5])


def test_shift_halves_until_star_shaped():
    # notched square: only a thin sliver near the right side sees the whole boundary
    poly = np.array([[0, 0], [2, 0], [2, 2], [0, 2], [1.8, 1]], dtype=float)
    ft = build_face_triangulation(poly, 0, b_face=[0.0, 1.0], alpha_face=1e-4, beta=0.9)
    assert 0 < ft.beta < 0.9
    assert is_star_shaped_wrt(poly, ft.center)
    assert np.all(ft.areas > 0)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(3, 8),
    st.floats(0.0, 2 * np.pi),
    st.floats(-1, 1),
    st.floats(-1, 1),
    st.floats(0.05, 0.95),
)
def test_shifted_fans_stay_valid(k, rot, bx, by, beta):
    t = rot + 2 * np.pi * np.arange(k) / k
    poly = np.column_stack([np.cos(t), np.sin(t)])
    b = np.array([bx, by])
    if np.linalg.norm(b) < 1e-3:
        b = np.array([1.0, 0.0])
    ft = build_face_triangulation(poly, 2, b_face=b, alpha_face=1e-6, beta=beta)
    assert np.all(ft.areas > 0)
    assert np.isclose(ft.areas.sum(), polygon_area(poly))


def test_non_star_face_rejected():
    flat = np.array([[0, 0], [1, 0], [2, 0]], dtype=float)
    with pytest.raises(NonStarShapedFace):
        build_face_triangulation(flat, 1)
    with pytest.raises(ValueError):
        build_face_triangulation(SQUARE, -1)


def test_skeleton_numbering(cube2):
    sk = build_skeleton_mesh(cube2, 2)
    N, E, m = cube2.n_nodes, cube2.n_edges, 4
    n_face_inner = sum(ft.n_interior for ft in sk.faces)
    assert sk.n_aux == N + E * (m - 1) + n_face_inner
    assert np.allclose(sk.coords[:N], cube2.nodes)
    # edge partition nodes are equally spaced from the smaller node index
    a, b = cube2.nodes[cube2.edges[5]]
    assert np.allclose(sk.coords[sk.edge_aux_ids[5]], a + np.linspace(0, 1, m + 1)[:, None] * (b - a))


def test_skeleton_conforming_across_faces(cube2):
    sk = build_skeleton_mesh(cube2, 2)
    tris = sk.triangles()
    edges, counts = _edges(tris)
    seg_len = np.linalg.norm(sk.coords[edges[:, 0]] - sk.coords[edges[:, 1]], axis=1)
    assert seg_len.min() > 1e-3
    assert len(np.unique(np.sort(tris, axis=1), axis=0)) == len(tris)


def test_element_surface_is_closed_and_outward(cube2):
    sk = build_skeleton_mesh(cube2, 1)
    for t in (0, 7, 31):
        ids, tris = sk.element_surface(t)
        p = sk.coords[ids]
        _, counts = _edges(tris)
        assert np.all(counts == 2)
        v = np.einsum("ij,ij->i", p[tris[:, 0]], np.cross(p[tris[:, 1]], p[tris[:, 2]])).sum() / 6
        assert np.isclose(v, cube2.element_volumes[t])


def test_dirichlet_flags(cube2):
    sk = build_skeleton_mesh(cube2, 2)
    on_bnd = np.any(np.isclose(sk.coords, 0.0) | np.isclose(sk.coords, 1.0), axis=1)
    assert np.array_equal(sk.dirichlet, on_bnd)


def test_skeleton_shift_uses_coefficients(cube2):
    coeffs = project_coefficients(CoefficientFunctions.constant(1e-3, b=(1.0, 0.0, 0.0)), cube2)
    shifted = build_skeleton_mesh(cube2, 1, coeffs, shift=True)
    plain = build_skeleton_mesh(cube2, 1, coeffs, shift=False)
    flags = np.array([ft.beta > 0 for ft in shifted.faces])
    # faces orthogonal to b have no in-plane convection and stay unshifted
    in_plane = np.linalg.norm(coeffs.b_face, axis=1) > 1e-12
    assert np.array_equal(flags, in_plane)
    assert not any(ft.beta > 0 for ft in plain.faces)
    d = shifted.to_dict()
    assert d["face_centers_shifted"] == flags.astype(int).tolist()
    assert len(d["aux_nodes"]) == shifted.n_aux
