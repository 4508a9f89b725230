import numpy as np
import pytest

from bembfem.generators import build_prism_mesh, build_unit_cube_tet_mesh, rectangle_tiling
from bembfem.mesh import PolyMesh


def single_tet_mesh():
    nodes = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    return PolyMesh.from_polyhedra(nodes, [[[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]])


def unit_cube_element():
    """The unit cube as a single hexahedral element."""
    nodes = np.array([[i, j, k] for k in (0, 1) for j in (0, 1) for i in (0, 1)], dtype=float)
    faces = [[0, 1, 3, 2], [4, 5, 7, 6], [0, 1, 5, 4], [2, 3, 7, 6], [0, 2, 6, 4], [1, 3, 7, 5]]
    return PolyMesh.from_polyhedra(nodes, [faces])


@pytest.fixture
def tet_mesh():
    return single_tet_mesh()


@pytest.fixture
def cube_element():
    return unit_cube_element()


@pytest.fixture(scope="session")
def cube2():
    return build_unit_cube_tet_mesh(2)


@pytest.fixture(scope="session")
def prisms():
    return build_prism_mesh(rectangle_tiling(2, 2), 2)
