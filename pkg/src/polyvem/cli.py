"""Command-line interface: ``polyvem <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import benchmarks, formats
from .convergence import (fitted_rate, interpolate_error, make_mesh, pairwise_rates,
                          render_rows_csv, run_convergence)
from .errors import PolyVemError
from .mesher import KINDS, Region, SeedRule, build_triangular_mesh, voronoi_mesh
from .model import PLANE_STRAIN, PLANE_STRESS, Material, ProblemConditions
from .norms import error_report
from .simulate import ELASTICITY, POISSON, simulate

log = logging.getLogger("polyvem")

PLANES = {"strain": PLANE_STRAIN, "stress": PLANE_STRESS}


def _case(args) -> benchmarks.BenchmarkCase:
    plane = PLANES[args.plane]
    if args.case == "beam":
        return benchmarks.cantilever_beam(plane_state=plane)
    if args.case == "patch":
        return benchmarks.patch_test(plane_state=plane)
    return benchmarks.poisson_manufactured()


def _rule(args) -> SeedRule:
    noise = {}
    if args.noise is not None:
        noise = dict(min_noise=args.noise[0], max_noise=args.noise[1])
    return SeedRule(args.rule, rng_seed=args.seed, **noise)


def _out(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _report_csv(rep) -> str:
    return ("dofs,h_max,l2_error,h1_error\n"
            f"{rep.dof_count},{rep.h_max:.17g},{rep.l2_relative:.17g},{rep.h1_relative:.17g}\n")


def _solve_inputs(args):
    """Mesh, conditions, problem and exact solution for solve/norms."""
    if args.polymesher:
        mesh, cond = formats.parse_polymesher(Path(args.polymesher).read_text(encoding="utf-8"))
        cond.material = Material(args.young, args.poisson, PLANES[args.plane])
        return mesh, cond, ELASTICITY, None
    if args.mesh and not args.case:
        mf = formats.parse_mesh(Path(args.mesh).read_text(encoding="utf-8"))
        if args.problem == POISSON:
            cond = ProblemConditions(constraints=mf.constraints())
        else:
            cond = ProblemConditions(material=Material(args.young, args.poisson, PLANES[args.plane]),
                                     constraints=mf.constraints())
        return mf.mesh, cond, args.problem, None
    case = _case(args)
    if args.mesh:
        mesh = formats.parse_mesh(Path(args.mesh).read_text(encoding="utf-8")).mesh
    else:
        mesh = make_mesh(case, args.method, args.nx, args.ny, _rule(args))
    return mesh, case.conditions, case.problem, case.exact


def cmd_mesh(args) -> int:
    if args.case:
        region = _case(args).region
    else:
        region = Region.rectangle(*args.box)
    if args.triangles:
        mesh = build_triangular_mesh(region, args.nx, args.ny)
    else:
        mesh = voronoi_mesh(region, _rule(args), args.nx, args.ny)
    formats.atomic_write(args.output, formats.render_mesh(mesh))
    print(f"wrote {mesh.n_elements} elements, {mesh.n_nodes} nodes to {args.output}")
    return 0


def cmd_solve(args) -> int:
    mesh, cond, problem, exact = _solve_inputs(args)
    sol = simulate(mesh, cond, problem=problem, method=args.method, gamma=args.gamma, solver=args.solver)
    rep = error_report(sol, exact) if exact is not None else None
    out = _out(args)
    formats.atomic_write(out / "mesh.txt", formats.render_mesh(mesh))
    formats.atomic_write(out / "solution.csv", formats.render_solution_csv(sol))
    if rep is not None:
        formats.atomic_write(out / "errors.csv", _report_csv(rep))
        print(f"dofs={rep.dof_count} l2={rep.l2_relative:.6e} h1={rep.h1_relative:.6e}")
    print(f"wrote results to {out}")
    return 0


def cmd_norms(args) -> int:
    mesh, cond, problem, exact = _solve_inputs(args)
    if exact is None:
        raise PolyVemError("norms need a benchmark case with an exact solution (--case)")
    sol = simulate(mesh, cond, problem=problem, method=args.method, gamma=args.gamma, solver=args.solver)
    rep = error_report(sol, exact)
    sys.stdout.write(_report_csv(rep))
    return 0


def cmd_convergence(args) -> int:
    case = _case(args)
    rows = run_convergence(case, args.method, args.nx, args.ny, args.levels, _rule(args), args.gamma)
    formats.atomic_write(_out(args) / "convergence.csv", render_rows_csv(rows, args.method))
    for key in ("l2", "h1"):
        rates = ", ".join(f"{r:.3f}" for r in pairwise_rates(rows, key))
        print(f"{key}: fitted rate {fitted_rate(rows, key):.3f} (pairwise {rates})")
    return 0


def cmd_compare_fem(args) -> int:
    case = _case(args)
    vem_rows = run_convergence(case, "vem", args.nx, args.ny, args.levels, _rule(args), args.gamma)
    fem_rows = run_convergence(case, "fem", args.nx, args.ny, args.levels, _rule(args), args.gamma)
    tmax = max(r.seconds for r in vem_rows + fem_rows)
    lines = ["method,dofs,h1_error,normalized_time"]
    for name, rows in (("vem", vem_rows), ("fem", fem_rows)):
        lines += [f"{name},{r.dof_count},{r.h1:.17g},{r.seconds / tmax:.6g}" for r in rows]
    formats.atomic_write(_out(args) / "compare_fem.csv", "\n".join(lines) + "\n")
    for r in vem_rows:
        lo = min(x.dof_count for x in fem_rows)
        hi = max(x.dof_count for x in fem_rows)
        if lo <= r.dof_count <= hi:
            ratio = interpolate_error(fem_rows, r.dof_count) / r.h1
            print(f"dofs={r.dof_count}: vem h1={r.h1:.4e}, fem/vem at matched dofs={ratio:.3f}")
    return 0


def cmd_patch_test(args) -> int:
    case = benchmarks.patch_test(plane_state=PLANES[args.plane])
    rule = SeedRule("random_double", rng_seed=args.seed)
    mesh = voronoi_mesh(case.region, rule, args.nx, args.ny)
    sol = simulate(mesh, case.conditions, gamma=args.gamma)
    exact = np.column_stack(benchmarks.patch_field(*mesh.nodes.T))
    nodal = float(np.abs(sol.values - exact).max() / np.abs(exact).max())
    rep = error_report(sol, case.exact)
    print(f"nodal={nodal:.3e} l2={rep.l2_relative:.3e} h1={rep.h1_relative:.3e}")
    return 0 if max(nodal, rep.l2_relative, rep.h1_relative) < 1e-9 else 1


def _common(p: argparse.ArgumentParser, solve: bool = False) -> None:
    p.add_argument("--case", choices=sorted(benchmarks.CASES), default=None if solve else "poisson")
    p.add_argument("--nx", type=int, default=8)
    p.add_argument("--ny", type=int, default=8)
    p.add_argument("--rule", choices=KINDS, default="constant_alternating")
    p.add_argument("--noise", type=float, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--plane", choices=sorted(PLANES), default="strain")
    p.add_argument("--out-dir", default="out")


def _solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=("vem", "fem"), default="vem")
    p.add_argument("--solver", choices=("direct", "cg"), default="direct")
    p.add_argument("--mesh", help="canonical mesh file")
    p.add_argument("--polymesher", help="PolyMesher export file")
    p.add_argument("--problem", choices=(ELASTICITY, POISSON), default=ELASTICITY)
    p.add_argument("--young", type=float, default=1e7)
    p.add_argument("--poisson", type=float, default=0.3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyvem", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate a mesh and write it in the canonical format")
    _common(p, solve=True)
    p.add_argument("--box", type=float, nargs=4, default=(0.0, 0.0, 1.0, 1.0),
                   metavar=("X0", "Y0", "X1", "Y1"))
    p.add_argument("--triangles", action="store_true", help="structured triangles instead of Voronoi")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("solve", help="solve a benchmark case or a mesh file")
    _common(p, solve=True)
    _solver_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("norms", help="print relative L2 and H1 errors for a benchmark case")
    _common(p)
    _solver_args(p)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("convergence", help="refinement study for a benchmark case")
    _common(p)
    p.add_argument("--method", choices=("vem", "fem"), default="vem")
    p.add_argument("--levels", type=int, default=4)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("compare-fem", help="VEM versus T3 FEM accuracy and timing")
    _common(p)
    p.set_defaults(case="beam", nx=8, ny=4)
    p.add_argument("--levels", type=int, default=4)
    p.set_defaults(func=cmd_compare_fem)

    p = sub.add_parser("patch-test", help="linear patch test on a random Voronoi mesh")
    _common(p)
    p.set_defaults(nx=5, ny=5)
    p.set_defaults(func=cmd_patch_test)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if getattr(args, "command", None) == "solve" and not (args.case or args.mesh or args.polymesher):
        args.case = "poisson"
    try:
        return args.func(args)
    except (PolyVemError, OSError, ValueError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("null_space_dim", "seed_index", "line"):
            if getattr(exc, attr, None) is not None:
                report[attr] = getattr(exc, attr)
        sys.stderr.write(json.dumps(report) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
