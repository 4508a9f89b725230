import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bembfem.coeffs import (
    CoefficientFunctions,
    coefficient_preset,
    field_from_element_values,
    peclet,
    project_coefficients,
    rotating_field,
    supg_delta,
)
from bembfem.errors import NegativeReaction, NonSPDDiffusion
from bembfem.mesh import edge_frame, face_frame


def test_constant_projection(cube2):
    cf = project_coefficients(CoefficientFunctions.constant(0.1, b=(1.0, 0.0, 0.0), c=2.0), cube2)
    assert np.allclose(cf.A, 0.1 * np.eye(3))
    assert np.allclose(cf.b, [1, 0, 0])
    assert np.allclose(cf.c, 2.0)
    assert np.allclose(cf.alpha, 0.1)
    assert np.allclose(cf.A_face, 0.1 * np.eye(2))
    assert np.allclose(cf.a_edge, 0.1)
    assert np.allclose(cf.c_face, 2.0) and np.allclose(cf.c_edge, 2.0)


def test_face_and_edge_convection_are_tangential_components(cube2):
    b = np.array([1.0, -0.5, 0.25])
    cf = project_coefficients(CoefficientFunctions.constant(1.0, b=b), cube2)
    for f in range(0, cube2.n_faces, 5):
        n = cube2.face_normals[f]
        tangential = b - (b @ n) * n
        assert np.isclose(np.linalg.norm(cf.b_face[f]), np.linalg.norm(tangential))
        e1 = face_frame(cube2, f).rotation[:, 0]
        assert np.isclose(cf.b_face[f][0], b @ e1)
    for e in range(0, cube2.n_edges, 5):
        assert np.isclose(cf.b_edge[e], b @ edge_frame(cube2, e).rotation[:, 0])


def test_anisotropic_face_diffusion_is_rotated(tet_mesh):
    A = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 0.5]])
    cf = field_from_element_values(tet_mesh, [A], [[0, 0, 0]], [0])
    for f in range(tet_mesh.n_faces):
        R = face_frame(tet_mesh, f).rotation
        assert np.allclose(cf.A_face[f], (R.T @ A @ R)[:2, :2])


def test_interface_values_are_averaged(cube2):
    nT = cube2.n_elements
    c = np.arange(nT, dtype=float)
    cf = field_from_element_values(cube2, np.broadcast_to(np.eye(3), (nT, 3, 3)), np.zeros((nT, 3)), c)
    for f in range(cube2.n_faces):
        assert np.isclose(cf.c_face[f], c[list(cube2.face_elements[f])].mean())
    for e in range(cube2.n_edges):
        assert np.isclose(cf.c_edge[e], c[list(cube2.edge_elements[e])].mean())


def test_variable_fields_are_projected(cube2):
    fields = CoefficientFunctions(np.eye(3), rotating_field, lambda x: x[:, 0])
    cf = project_coefficients(fields, cube2)
    pts = np.vstack([cube2.nodes[cube2.element_nodes[3]], cube2.element_centroids[3]])
    assert np.allclose(cf.b[3], rotating_field(pts).mean(axis=0))
    assert np.isclose(cf.c[3], pts[:, 0].mean())


def test_invalid_coefficients(tet_mesh):
    with pytest.raises(NonSPDDiffusion):
        field_from_element_values(tet_mesh, [np.diag([1.0, -1.0, 1.0])], [[0, 0, 0]], [0.0])
    with pytest.raises(NonSPDDiffusion):
        field_from_element_values(tet_mesh, [[[1.0, 0.5, 0], [0, 1, 0], [0, 0, 1]]], [[0, 0, 0]], [0.0])
    with pytest.raises(NegativeReaction):
        field_from_element_values(tet_mesh, [np.eye(3)], [[0, 0, 0]], [-1.0])


def test_linearized_keeps_element_data(cube2):
    cf = project_coefficients(CoefficientFunctions.constant(1e-3, b=(1.0, 0.0, 0.0)), cube2)
    lin = cf.linearized()
    assert np.array_equal(lin.A, cf.A) and np.array_equal(lin.b, cf.b)
    assert np.allclose(lin.A_face, np.eye(2)) and not lin.b_face.any()
    assert np.allclose(lin.a_edge, 1.0) and not lin.b_edge.any() and not lin.c_edge.any()


def test_peclet():
    assert np.isclose(peclet(0.5, [1.0, 0, 0], 0.1), 5.0)
    assert np.isclose(peclet(0.5, [0, 2.0, 0], np.diag([1.0, 0.1, 3.0])), 10.0)
    assert np.allclose(peclet([1.0, 2.0], [[1, 0, 0], [0, 1, 0]], [1.0, 1.0]), [1.0, 2.0])


def test_exp1_peclet_matches_table_scale():
    from bembfem.generators import build_unit_cube_tet_mesh

    mesh = build_unit_cube_tet_mesh(8)
    cf = project_coefficients(coefficient_preset("exp1", 1e-1), mesh)
    # h = sqrt(3)/8 on every element
    assert np.isclose(cf.element_peclet(mesh).max(), np.sqrt(3) / 8 / 0.1)


def test_supg_delta_switches_at_two():
    h = np.array([0.1, 0.1, 0.1])
    assert np.allclose(supg_delta(h, [1.0, 0.0], 0.1), 0.0)
    assert np.allclose(supg_delta(h, [1.0, 0.0], 0.01), 0.05)
    assert np.allclose(supg_delta([0.1, 0.5], [1.0, 0.0], 0.1), [0.0, 0.25])


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_rotating_field_is_tangent_to_circles(x1, x3):
    x = np.array([[x1, 0.4, x3]])
    b = rotating_field(x)[0]
    r = np.hypot(x3 - 1, 1 - x1)
    if r < 1e-12:
        assert not b.any()
        return
    assert np.isclose(np.linalg.norm(b), 0.85)
    assert b[1] == 0.0
    assert abs(b[0] * (x1 - 1) + b[2] * (x3 - 1)) < 1e-12


def test_presets():
    p1 = coefficient_preset("exp1", 1e-3)
    assert np.allclose(p1.A, 1e-3 * np.eye(3)) and np.allclose(p1.b, [1, 0, 0]) and p1.c == 0
    p2 = coefficient_preset("exp2", 1e-2)
    assert callable(p2.b)
    p3 = coefficient_preset("custom", 1.0, A=2.0, b=[0, 1, 0], c=0.5)
    assert np.allclose(p3.A, 2 * np.eye(3)) and np.allclose(p3.b, [0, 1, 0]) and p3.c == 0.5
    with pytest.raises(ValueError):
        coefficient_preset("exp3", 1.0)
