"""Experiment presets, maximum principle checks, benchmark tables and VTK export."""

import csv
import functools
import math
import os
import time
from dataclasses import asdict, dataclass

import numpy as np

from .auxtri import build_skeleton_mesh
from .coeffs import coefficient_preset, project_coefficients
from .errors import IoError
from .generators import build_prism_mesh, build_unit_cube_tet_mesh
from .global_solve import build_global_system, gmres_solve
from .local_bem import Q_REG, Q_SING

BAND = (-0.02, 3.02)
EXP1_CUBE_N = 8
EXP2_PRESET = "paper-like"
TABLE1_ALPHAS = (1e-1, 5e-2, 2.5e-2, 1e-2, 5e-3, 2.5e-3, 1e-3, 5e-4, 2.5e-4, 1e-4, 5e-5, 2.5e-5)
CSV_COLUMNS = (
    "experiment", "alpha", "peclet", "level", "mode", "u_min", "u_max",
    "band_ok", "iterations", "iterations_grs", "n_interior", "wall_time",
)  # fmt: skip


@dataclass
class SkeletalSolution:
    """Node coefficients and the resulting values at every auxiliary node."""

    coefficients: np.ndarray
    values: np.ndarray

    @classmethod
    def from_coefficients(cls, traces, coefficients):
        u = np.asarray(coefficients, dtype=float)
        return cls(u, traces.evaluate(u))

    def to_dict(self):
        return {"coefficients": self.coefficients.tolist(), "aux_values": self.values.tolist()}


@dataclass
class ExperimentReport:
    experiment: str
    alpha: float
    peclet: float
    level: int
    mode: str
    u_min: float
    u_max: float
    iterations: int | None
    iterations_grs: int | None
    n_interior: int
    wall_time: float

    @property
    def band_ok(self):
        return bool(BAND[0] <= self.u_min and self.u_max <= BAND[1])

    def row(self):
        out = asdict(self)
        out["band_ok"] = self.band_ok
        return out


def max_principle_check(solution, skeleton=None):
    """Exact ``(min, max)`` of the discrete solution over all auxiliary nodes."""
    values = solution.values if isinstance(solution, SkeletalSolution) else np.asarray(solution, dtype=float)
    if skeleton is not None and len(values) != skeleton.n_aux:
        raise ValueError("solution does not live on this skeleton")
    return float(values.min()), float(values.max())


def exp1_dirichlet(x):
    x = np.atleast_2d(x)
    return x.sum(axis=1)


def _tent(s, c):
    return np.clip(np.minimum(s / c, (1.0 - s) / (1.0 - c)), 0.0, None)


def exp2_dirichlet(x, peak=(0.5, 0.5)):
    """Tent bump on the inflow face ``x1 = 1``, zero elsewhere.

    The bump is the product of two hat functions in ``x2`` and ``x3`` that
    vanish on the face boundary and reach 3 at ``(x2, x3) = peak``.
    """
    x = np.atleast_2d(x)
    bump = 3.0 * _tent(x[:, 1], peak[0]) * _tent(x[:, 2], peak[1])
    return np.where(np.abs(x[:, 0] - 1.0) < 1e-12, bump, 0.0)


def dirichlet_datum(which, mesh=None):
    """Dirichlet data of an experiment.

    For ``exp2`` on a given mesh the bump peak is moved to the node of the
    face ``x1 = 1`` closest to the face center, so that the nodal
    interpolant of ``g`` attains its maximum 3.
    """
    if which == "exp1":
        return exp1_dirichlet
    if which != "exp2":
        raise ValueError(f"unknown experiment {which!r}; choose exp1 or exp2")
    if mesh is None:
        return exp2_dirichlet
    x = mesh.nodes
    inner = (np.abs(x[:, 0] - 1.0) < 1e-12) & np.all((x[:, 1:] > 1e-12) & (x[:, 1:] < 1.0 - 1e-12), axis=1)
    if not inner.any():
        return exp2_dirichlet
    yz = x[inner, 1:]
    peak = yz[np.argmin(np.linalg.norm(yz - 0.5, axis=1))]
    return functools.partial(exp2_dirichlet, peak=(float(peak[0]), float(peak[1])))


EXPERIMENTS = {"exp1": exp1_dirichlet, "exp2": exp2_dirichlet}


@functools.lru_cache(maxsize=4)
def experiment_mesh(which):
    if which == "exp1":
        return build_unit_cube_tet_mesh(EXP1_CUBE_N)
    if which == "exp2":
        return build_prism_mesh(EXP2_PRESET, None)
    raise ValueError(f"unknown experiment {which!r}; choose exp1 or exp2")


def _precond_list(precond):
    if precond == "both":
        return ("none", "grs")
    if precond in ("none", "grs"):
        return (precond,)
    raise ValueError(f"unknown preconditioner {precond!r}")


def solve_problem(mesh, coeffs, g, level, mode="adapted", precond="none", tol=1e-6, q_sing=Q_SING, q_reg=Q_REG,
                  q_fold=None, cache=True, shift=True, element_matrices=None):  # fmt: skip
    """Run the whole pipeline on one mesh; returns ``(system, skeleton, {precond: (solution, its)})``."""
    skeleton = build_skeleton_mesh(mesh, level, coeffs, shift=shift)
    system = build_global_system(
        mesh, skeleton, coeffs, g, mode=mode, q_sing=q_sing, q_reg=q_reg, q_fold=q_fold,
        cache=cache, element_matrices=element_matrices,
    )  # fmt: skip
    results = {}
    for p in _precond_list(precond):
        u, its = gmres_solve(system, precond=p, tol=tol)
        results[p] = (SkeletalSolution.from_coefficients(system.traces, u), its)
    return system, skeleton, results


def run_experiment(which, alpha, level, mode="adapted", precond="both", tol=1e-6, q_sing=Q_SING, q_reg=Q_REG,
                   q_fold=None, vtk_path=None, element_matrices=None):  # fmt: skip
    """Solve experiment ``exp1`` or ``exp2`` and summarize it.

    ``u_min``/``u_max`` come from the first solve (unpreconditioned when
    ``precond="both"``).  Passing the same empty list as
    ``element_matrices`` to runs that differ only in ``mode`` reuses the
    local boundary element work.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if level < 0:
        raise ValueError("level must be >= 0")
    t0 = time.perf_counter()
    mesh = experiment_mesh(which)
    coeffs = project_coefficients(coefficient_preset(which, alpha), mesh)
    system, skeleton, results = solve_problem(
        mesh, coeffs, dirichlet_datum(which, mesh), level, mode, precond, tol, q_sing, q_reg, q_fold,
        element_matrices=element_matrices,
    )  # fmt: skip
    first = results[_precond_list(precond)[0]][0]
    u_min, u_max = max_principle_check(first, skeleton)
    if vtk_path is not None:
        export_vtk(first, skeleton, vtk_path)
    return ExperimentReport(
        experiment=which,
        alpha=float(alpha),
        peclet=float(coeffs.element_peclet(mesh).max()),
        level=int(level),
        mode=mode,
        u_min=u_min,
        u_max=u_max,
        iterations=results["none"][1] if "none" in results else None,
        iterations_grs=results["grs"][1] if "grs" in results else None,
        n_interior=len(system.interior),
        wall_time=time.perf_counter() - t0,
    )


def run_benchmark(which, alphas, levels, modes=("adapted",), precond="both", out=None, vtk_dir=None, log=None, **kw):
    """Sweep ``alphas x levels x modes``; optionally write a CSV table and VTK fields.

    Runs that differ only in the trace mode share their element matrices.
    """
    reports = []
    for level in levels:
        for alpha in alphas:
            shared = []
            for mode in modes:
                vtk = None
                if vtk_dir is not None:
                    vtk = os.path.join(vtk_dir, f"{which}_a{alpha:g}_l{level}_{mode}.vtk")
                rep = run_experiment(which, alpha, level, mode, precond, vtk_path=vtk, element_matrices=shared, **kw)
                reports.append(rep)
                if log is not None:
                    log(format_row(rep))
    if out is not None:
        write_csv(reports, out)
    return reports


def format_row(rep):
    its = "-" if rep.iterations is None else str(rep.iterations)
    grs = "-" if rep.iterations_grs is None else str(rep.iterations_grs)
    flag = "ok" if rep.band_ok else "VIOLATED"
    return (
        f"{rep.experiment} alpha={rep.alpha:.1e} Pe={rep.peclet:.0f} l={rep.level} {rep.mode:8s} "
        f"u_min={rep.u_min:.2f} u_max={rep.u_max:.2f} its={its} its_grs={grs} {flag} ({rep.wall_time:.1f}s)"
    )


def write_csv(reports, path):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            for rep in reports:
                w.writerow(rep.row())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _fmt(v):
    if not math.isfinite(v):
        raise ValueError("non-finite value in VTK export")
    return repr(float(v))


def export_vtk(solution, skeleton, path, name="u"):
    """Write the skeleton triangulation with nodal values as legacy ASCII VTK polydata.

    Points are the auxiliary nodes in their global numbering and triangles
    follow the face order, so the output is byte-for-byte reproducible.
    """
    values = solution.values if isinstance(solution, SkeletalSolution) else np.asarray(solution, dtype=float)
    if len(values) != skeleton.n_aux:
        raise ValueError("solution does not live on this skeleton")
    tris = skeleton.triangles()
    lines = [
        "# vtk DataFile Version 3.0",
        f"skeleton level {skeleton.level}",
        "ASCII",
        "DATASET POLYDATA",
        f"POINTS {skeleton.n_aux} double",
    ]
    lines += [" ".join(_fmt(c) for c in p) for p in skeleton.coords]
    lines.append(f"POLYGONS {len(tris)} {4 * len(tris)}")
    lines += [f"3 {a} {b} {c}" for a, b, c in tris]
    lines += [f"POINT_DATA {skeleton.n_aux}", f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
    lines += [_fmt(v) for v in values]
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path
