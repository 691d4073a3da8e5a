"""Relative L2-norm and H1-seminorm of the displacement error."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrature, vem
from .errors import NormUndefined
from .fem import Tri3ShapeFunctions
from .model import evaluate

NORM_ORDER = 4


@dataclass(frozen=True)
class ExactSolution:
    """Exact field and its strain ([e11, e22, e12]) or gradient, as functions of (x, y)."""

    u: Callable
    strain: Callable


@dataclass(frozen=True)
class ErrorReport:
    l2_relative: float
    h1_relative: float
    dof_count: int
    h_max: float


def _discrete(solution, k, pts):
    """Discrete displacement at ``pts`` and the element-constant strain."""
    d = solution.element_values(k)
    if solution.method == "vem":
        geom = solution.mesh.element_geometry(k)
        return vem.projected_field(geom, d, pts), vem.project_strain(geom, d)
    sf = Tri3ShapeFunctions(solution.mesh.element_coords(k))
    nc = solution.n_components
    u = sf.values(pts) @ d.reshape(3, nc)
    if nc == 2:
        return u, sf.strain_displacement() @ d
    return u, sf.gradients.T @ d


def _ratio(num: float, den: float, what: str) -> float:
    if not den > 0.0:
        raise NormUndefined(f"exact solution has zero {what}")
    return float(np.sqrt(num / den))


def _accumulate(solution, exact: ExactSolution, order: int):
    nc = solution.n_components
    ns = 3 if nc == 2 else 2
    metric = solution.d_matrix if nc == 2 else np.eye(2)
    l2 = np.zeros(2)
    h1 = np.zeros(2)
    for k in range(solution.mesh.n_elements):
        pts, wts = quadrature.polygon_points(solution.mesh.element_coords(k), order)
        uh, eh = _discrete(solution, k, pts)
        u = evaluate(exact.u, pts, nc)
        e = evaluate(exact.strain, pts, ns)
        du = u - uh
        de = e - eh
        l2 += wts @ np.column_stack([np.sum(du * du, axis=1), np.sum(u * u, axis=1)])
        h1 += wts @ np.column_stack([
            np.einsum("qi,ij,qj->q", de, metric, de),
            np.einsum("qi,ij,qj->q", e, metric, e),
        ])
    return l2, h1


def l2_error(solution, exact: ExactSolution, order: int = NORM_ORDER) -> float:
    l2, _ = _accumulate(solution, exact, order)
    return _ratio(l2[0], l2[1], "L2 norm")


def h1_error(solution, exact: ExactSolution, order: int = NORM_ORDER) -> float:
    _, h1 = _accumulate(solution, exact, order)
    return _ratio(h1[0], h1[1], "energy seminorm")


def error_report(solution, exact: ExactSolution, order: int = NORM_ORDER) -> ErrorReport:
    l2, h1 = _accumulate(solution, exact, order)
    return ErrorReport(
        l2_relative=_ratio(l2[0], l2[1], "L2 norm"),
        h1_relative=_ratio(h1[0], h1[1], "energy seminorm"),
        dof_count=solution.dof_count,
        h_max=solution.mesh.h_max(),
    )
