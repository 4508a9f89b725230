"""Convection-adapted BEM-based FEM for 3D convection-diffusion-reaction problems on polyhedral meshes."""

from .auxtri import SkeletonMesh, build_face_triangulation, build_skeleton_mesh
from .coeffs import CoefficientField, coefficient_preset, project_coefficients, supg_delta
from .errors import BemFemError
from .generators import build_prism_mesh, build_unit_cube_tet_mesh
from .global_solve import GlobalSystem, build_global_system, gmres_solve
from .harness import SkeletalSolution, export_vtk, max_principle_check, run_benchmark, run_experiment, solve_problem
from .local_bem import Kernel, conormal_kernel, element_operators, fundamental_solution
from .mesh import PolyMesh, load_mesh, save_mesh, validate
from .trace_basis import build_basis_traces, edge_solve, face_supg_solve

__version__ = "0.1.0"

__all__ = [
    "BemFemError",
    "CoefficientField",
    "GlobalSystem",
    "Kernel",
    "PolyMesh",
    "SkeletalSolution",
    "SkeletonMesh",
    "build_basis_traces",
    "build_face_triangulation",
    "build_global_system",
    "build_prism_mesh",
    "build_skeleton_mesh",
    "build_unit_cube_tet_mesh",
    "coefficient_preset",
    "conormal_kernel",
    "edge_solve",
    "element_operators",
    "export_vtk",
    "face_supg_solve",
    "fundamental_solution",
    "gmres_solve",
    "load_mesh",
    "max_principle_check",
    "project_coefficients",
    "run_benchmark",
    "run_experiment",
    "save_mesh",
    "solve_problem",
    "supg_delta",
    "validate",
]
