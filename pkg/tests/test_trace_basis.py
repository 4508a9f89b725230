import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bembfem.auxtri import build_face_triangulation, build_skeleton_mesh
from bembfem.coeffs import CoefficientFunctions, project_coefficients, supg_delta
from bembfem.errors import BadCoefficients, DegenerateEdge
from bembfem.trace_basis import build_basis_traces, edge_solve, face_supg_solve

from oracles import edge_fd, random_edge_coefficients, square_galerkin

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)


def test_edge_endpoints_and_linear_limit():
    xs = np.linspace(0, 2, 9)
    assert np.allclose(edge_solve(1.0, 0.0, 0.0, 2.0, 1.0, 3.0, xs), 1.0 + xs)
    u = edge_solve(0.3, 5.0, 1.0, 2.0, 1.5, -0.5, [0.0, 2.0])
    assert np.allclose(u, [1.5, -0.5])


def test_edge_pure_reaction():
    a, c, L = 2.0, 8.0, 1.0
    k = np.sqrt(c / a)
    xs = np.linspace(0, L, 11)
    assert np.allclose(edge_solve(a, 0.0, c, L, 0.0, 1.0, xs), np.sinh(k * xs) / np.sinh(k * L))


def test_edge_pure_convection_layer():
    a, b, L = 0.1, 1.0, 1.0
    xs = np.linspace(0, L, 11)
    exact = np.expm1(b * xs / a) / np.expm1(b * L / a)
    assert np.allclose(edge_solve(a, b, 0.0, L, 0.0, 1.0, xs), exact)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-10, 1e2), st.floats(-1e3, 1e3), st.floats(0, 1e3))
def test_edge_no_overflow_and_bounded(a, b, c):
    xs = np.linspace(0, 1, 33)
    u = edge_solve(a, b, c, 1.0, 1.0, 0.0, xs)
    assert np.all(np.isfinite(u))
    assert np.all(u >= -1e-12) and np.all(u <= 1 + 1e-12)
    assert np.all(np.diff(u) <= 1e-12)


def test_edge_errors():
    with pytest.raises(DegenerateEdge):
        edge_solve(1, 0, 0, 0.0, 0, 1, [0.0])
    with pytest.raises(BadCoefficients):
        edge_solve(0.0, 1, 0, 1, 0, 1, [0.5])
    with pytest.raises(BadCoefficients):
        edge_solve(1.0, 1, -1, 1, 0, 1, [0.5])
    with pytest.raises(ValueError):
        edge_solve(1.0, 0, 0, 1, 0, 1, [1.5])


def test_edge_matches_finite_differences():
    rng = np.random.default_rng(7)
    worst = 0.0
    for a, b, c, L, u0, uL in random_edge_coefficients(rng):
        x, ref = edge_fd(a, b, c, L, u0, uL)
        worst = max(worst, np.abs(edge_solve(a, b, c, L, u0, uL, x) - ref).max())
    assert worst < 1e-6


def test_face_constant_and_linear_data():
    tri = build_face_triangulation(SQUARE, 3)
    bnd = tri.vertices[: tri.n_boundary]
    inner = tri.vertices[tri.n_boundary :]
    ones = face_supg_solve(tri, 1e-3 * np.eye(2), [1.0, 0.3], 0.0, supg_delta(tri.diameters, [1.0, 0.3], 1e-3), np.ones(len(bnd)))
    assert np.allclose(ones, 1.0)
    lin = face_supg_solve(tri, np.eye(2), [0.0, 0.0], 0.0, 0.0, bnd @ [2.0, -1.0])
    assert np.allclose(lin, inner @ [2.0, -1.0])
    # a linear function with gradient orthogonal to b is L-harmonic
    g = bnd @ [-0.3, 1.0]
    d = supg_delta(tri.diameters, [1.0, 0.3], 1e-4)
    assert np.allclose(face_supg_solve(tri, 1e-4 * np.eye(2), [1.0, 0.3], 0.0, d, g), inner @ [-0.3, 1.0])


def test_face_multiple_right_hand_sides():
    tri = build_face_triangulation(SQUARE, 2)
    G = np.random.default_rng(0).random((tri.n_boundary, 3))
    X = face_supg_solve(tri, np.eye(2), [1.0, 0.0], 0.5, 0.0, G)
    assert X.shape == (tri.n_interior, 3)
    for j in range(3):
        assert np.allclose(X[:, j], face_supg_solve(tri, np.eye(2), [1.0, 0.0], 0.5, 0.0, G[:, j]))


def test_face_negative_delta_rejected():
    tri = build_face_triangulation(SQUARE, 1)
    with pytest.raises(BadCoefficients):
        face_supg_solve(tri, np.eye(2), [0, 0], 0.0, -1.0, np.zeros(tri.n_boundary))


def test_face_matches_fine_galerkin_away_from_layers():
    alpha, b = 1e-3, np.array([1.0, 0.0])

    def g(p):
        return p[:, 0] + p[:, 1]

    tri = build_face_triangulation(SQUARE, 3)
    bnd = tri.vertices[: tri.n_boundary]
    inner = tri.vertices[tri.n_boundary :]
    u = face_supg_solve(tri, alpha * np.eye(2), b, 0.0, supg_delta(tri.diameters, b, alpha), g(bnd))
    ref = square_galerkin(alpha, b, g)(inner)
    away = (inner[:, 0] > 0.05) & (inner[:, 0] < 0.85) & (inner[:, 1] > 0.15) & (inner[:, 1] < 0.85)
    assert away.sum() > 20
    assert np.abs(u - ref)[away].max() < 0.05


def test_partition_of_unity(cube2):
    cf = project_coefficients(CoefficientFunctions.constant(1e-3, b=(1.0, 0.2, 0.0)), cube2)
    sk = build_skeleton_mesh(cube2, 2, cf)
    for mode in ("adapted", "linear"):
        tr = build_basis_traces(cube2, sk, cf, mode=mode)
        assert np.allclose(tr.evaluate(np.ones(cube2.n_nodes)), 1.0)
        assert np.allclose(tr.evaluate(np.eye(cube2.n_nodes)[5])[: cube2.n_nodes], np.eye(cube2.n_nodes)[5])


def test_linear_mode_reproduces_linear_functions(cube2):
    cf = project_coefficients(CoefficientFunctions.constant(1e-3, b=(1.0, 0.0, 0.0)), cube2)
    sk = build_skeleton_mesh(cube2, 2, cf)
    tr = build_basis_traces(cube2, sk, cf, mode="linear")
    w = np.array([1.0, -2.0, 0.5])
    assert np.allclose(tr.evaluate(cube2.nodes @ w), sk.coords @ w)


def test_cache_does_not_change_traces(cube2):
    cf = project_coefficients(CoefficientFunctions.constant(1e-3, b=(1.0, 0.0, 0.0)), cube2)
    sk = build_skeleton_mesh(cube2, 2, cf)
    on = build_basis_traces(cube2, sk, cf, cache=True)
    off = build_basis_traces(cube2, sk, cf, cache=False)
    assert abs(on.phi - off.phi).max() < 1e-12
    assert on.stats["face_classes"] < off.stats["face_classes"] == cube2.n_faces
    assert on.stats["edge_classes"] < off.stats["edge_classes"] == cube2.n_edges


def test_restriction_matches_phi(cube2):
    cf = project_coefficients(CoefficientFunctions.constant(1.0), cube2)
    sk = build_skeleton_mesh(cube2, 1, cf)
    tr = build_basis_traces(cube2, sk, cf)
    R = tr.restriction(3)
    ids, _ = sk.element_surface(3)
    assert np.array_equal(R.aux_ids, ids)
    assert np.allclose(R.dense(cube2.n_nodes), tr.phi[ids].toarray())


def test_unknown_mode(cube2):
    cf = project_coefficients(CoefficientFunctions.constant(1.0), cube2)
    sk = build_skeleton_mesh(cube2, 0, cf)
    with pytest.raises(ValueError):
        build_basis_traces(cube2, sk, cf, mode="cubic")
