"""Command line interface: ``bembfem mesh|skel|solve|bench ...``."""

import argparse
import json
import sys

import numpy as np

from .auxtri import build_skeleton_mesh
from .coeffs import coefficient_preset, project_coefficients
from .errors import BemFemError, IoError
from .generators import build_prism_mesh, build_unit_cube_tet_mesh
from .harness import EXPERIMENTS, TABLE1_ALPHAS, dirichlet_datum, export_vtk, max_principle_check, run_benchmark, solve_problem
from .local_bem import Q_REG, Q_SING
from .mesh import load_mesh, save_mesh, validate


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _write_json(data, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _coefficients(args, mesh):
    A = None if args.A is None else _floats(args.A)
    if A is not None and len(A) not in (1, 9):
        raise SystemExit("--A takes 1 or 9 comma separated values")
    b = None if args.b is None else _floats(args.b)
    if b is not None and len(b) != 3:
        raise SystemExit("--b takes 3 comma separated values")
    A = None if A is None else (A[0] if len(A) == 1 else np.reshape(A, (3, 3)))
    return project_coefficients(coefficient_preset(args.coeff, args.alpha, A=A, b=b, c=args.c), mesh)


def cmd_mesh_validate(args):
    mesh = load_mesh(args.file, check=False)
    report = validate(mesh)
    print(json.dumps(mesh.summary()))
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def cmd_mesh_gen(args):
    if args.kind == "cube":
        mesh = build_unit_cube_tet_mesh(args.n)
    else:
        mesh = build_prism_mesh(args.preset, args.layers)
    try:
        save_mesh(mesh, args.output)
    except OSError as exc:
        raise IoError(f"cannot write {args.output}: {exc}") from exc
    print(json.dumps(mesh.summary()))
    return 0


def cmd_skel_build(args):
    mesh = load_mesh(args.mesh)
    coeffs = _coefficients(args, mesh) if args.coeff != "none" else None
    skeleton = build_skeleton_mesh(mesh, args.level, coeffs, shift=args.shift == "on")
    _write_json(skeleton.to_dict(), args.output)
    if args.vtk:
        export_vtk(np.zeros(skeleton.n_aux), skeleton, args.vtk)
    print(f"aux nodes {skeleton.n_aux}, triangles {len(skeleton.triangles())}")
    return 0


def cmd_solve(args):
    mesh = load_mesh(args.mesh)
    coeffs = _coefficients(args, mesh)
    datum = args.dirichlet or (args.coeff if args.coeff in EXPERIMENTS else "exp1")
    system, skeleton, results = solve_problem(
        mesh, coeffs, dirichlet_datum(datum, mesh), args.level, args.trace_mode, args.precond, args.tol,
        args.q_sing, args.q_reg, shift=args.shift == "on",
    )  # fmt: skip
    solution, its = results[args.precond]
    u_min, u_max = max_principle_check(solution, skeleton)
    print(f"iterations {its}")
    print(f"u_min {u_min:.6g} u_max {u_max:.6g}")
    if args.output:
        data = solution.to_dict()
        data.update(iterations=its, level=args.level, trace_mode=args.trace_mode, precond=args.precond)
        _write_json(data, args.output)
    if args.vtk:
        export_vtk(solution, skeleton, args.vtk)
    return 0


def cmd_bench(args):
    reports = run_benchmark(
        args.experiment, _floats(args.alphas), _ints(args.levels), tuple(args.mode.split(",")),
        precond=args.precond, out=args.out, vtk_dir=args.vtk, log=print,
        q_sing=args.q_sing, q_reg=args.q_reg,
    )  # fmt: skip
    return 0 if reports else 1


def _add_coeff_args(p, required_alpha=True):
    p.add_argument("--coeff", default="exp1", choices=["exp1", "exp2", "custom"] + ([] if required_alpha else ["none"]))
    p.add_argument("--alpha", type=float, default=1.0, help="diffusion for the presets (A = alpha I)")
    p.add_argument("--A", help="diffusion: one value or nine comma separated values")
    p.add_argument("--b", help="constant convection 'b1,b2,b3'")
    p.add_argument("--c", type=float, help="reaction")


def build_parser():
    parser = argparse.ArgumentParser(prog="bembfem", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    mesh = sub.add_parser("mesh", help="generate or validate meshes").add_subparsers(dest="action", required=True)
    p = mesh.add_parser("validate", help="run all mesh checks")
    p.add_argument("file")
    p.set_defaults(func=cmd_mesh_validate)
    p = mesh.add_parser("gen", help="generate a unit cube mesh")
    p.add_argument("kind", choices=["cube", "prisms"])
    p.add_argument("--n", type=int, default=8, help="sub-cubes per direction (cube)")
    p.add_argument("--preset", default="paper-like", help="tiling preset (prisms)")
    p.add_argument("--layers", type=int, default=None, help="prism layers (prisms)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mesh_gen)

    skel = sub.add_parser("skel", help="skeleton triangulation").add_subparsers(dest="action", required=True)
    p = skel.add_parser("build", help="triangulate all faces and write JSON")
    p.add_argument("--mesh", required=True)
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--shift", choices=["on", "off"], default="on")
    _add_coeff_args(p, required_alpha=False)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--vtk", help="also write the triangulation as VTK")
    p.set_defaults(func=cmd_skel_build)

    p = sub.add_parser("solve", help="solve a Dirichlet problem on a mesh file")
    p.add_argument("--mesh", required=True)
    p.add_argument("--level", type=int, default=2)
    _add_coeff_args(p)
    p.add_argument("--dirichlet", choices=sorted(EXPERIMENTS), help="Dirichlet datum (default: from --coeff)")
    p.add_argument("--trace-mode", choices=["adapted", "linear"], default="adapted")
    p.add_argument("--precond", choices=["none", "grs"], default="none")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--shift", choices=["on", "off"], default="on")
    p.add_argument("--q-sing", type=int, default=Q_SING)
    p.add_argument("--q-reg", type=int, default=Q_REG)
    p.add_argument("-o", "--output", help="solution JSON")
    p.add_argument("--vtk", help="solution VTK file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="maximum principle and iteration tables")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--alphas", default=",".join(f"{a:g}" for a in TABLE1_ALPHAS))
    p.add_argument("--levels", default="2")
    p.add_argument("--mode", default="adapted", help="comma separated trace modes")
    p.add_argument("--precond", choices=["none", "grs", "both"], default="both")
    p.add_argument("--q-sing", type=int, default=Q_SING)
    p.add_argument("--q-reg", type=int, default=Q_REG)
    p.add_argument("--out", help="CSV table")
    p.add_argument("--vtk", help="directory for VTK field dumps")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BemFemError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
