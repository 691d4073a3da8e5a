"""Refinement studies: run a benchmark over a mesh family and measure rates."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .benchmarks import BenchmarkCase
from .mesher import SeedRule, build_triangular_mesh, voronoi_mesh
from .norms import error_report
from .simulate import simulate


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    nx: int
    ny: int
    dof_count: int
    h_max: float
    l2: float
    h1: float
    seconds: float


def make_mesh(case: BenchmarkCase, method: str, nx: int, ny: int, rule: SeedRule):
    if method == "fem":
        return build_triangular_mesh(case.region, nx, ny)
    return voronoi_mesh(case.region, rule, nx, ny)


def run_convergence(
    case: BenchmarkCase,
    method: str = "vem",
    nx: int = 8,
    ny: int = 8,
    levels: int = 4,
    rule: SeedRule = SeedRule("constant_alternating"),
    gamma: float = 1.0,
) -> list:
    """Solve on ``levels`` meshes, doubling the divisions each time."""
    if case.exact is None:
        raise ValueError(f"case {case.name!r} has no exact solution")
    rows = []
    for level in range(levels):
        mx, my = nx * 2 ** level, ny * 2 ** level
        mesh = make_mesh(case, method, mx, my, rule)
        start = time.perf_counter()
        sol = simulate(mesh, case.conditions, problem=case.problem, method=method, gamma=gamma)
        elapsed = time.perf_counter() - start
        rep = error_report(sol, case.exact)
        rows.append(ConvergenceRow(level, mx, my, rep.dof_count, rep.h_max,
                                   rep.l2_relative, rep.h1_relative, elapsed))
    return rows


def pairwise_rates(rows, key: str) -> np.ndarray:
    """Observed order between consecutive levels, log(e_i/e_j) / log(h_i/h_j)."""
    h = np.array([r.h_max for r in rows])
    e = np.array([getattr(r, key) for r in rows])
    return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])


def fitted_rate(rows, key: str) -> float:
    """Least-squares slope of log(error) against log(h)."""
    h = np.log([r.h_max for r in rows])
    e = np.log([getattr(r, key) for r in rows])
    return float(np.polyfit(h, e, 1)[0])


def interpolate_error(rows, dof_count: float, key: str = "h1") -> float:
    """Error of a refinement family at ``dof_count``, linear in log-log space."""
    x = np.log([r.dof_count for r in rows])
    y = np.log([getattr(r, key) for r in rows])
    order = np.argsort(x)
    return float(np.exp(np.interp(np.log(dof_count), x[order], y[order])))


def render_rows_csv(rows, method: str = "", with_time: bool = False) -> str:
    head = ["method", "level", "nx", "ny", "dofs", "h_max", "l2_error", "h1_error"]
    if with_time:
        head.append("normalized_time")
    lines = [",".join(head)]
    tmax = max((r.seconds for r in rows), default=1.0) or 1.0
    for r in rows:
        vals = [method, str(r.level), str(r.nx), str(r.ny), str(r.dof_count),
                format(r.h_max, ".17g"), format(r.l2, ".17g"), format(r.h1, ".17g")]
        if with_time:
            vals.append(format(r.seconds / tmax, ".6g"))
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"
