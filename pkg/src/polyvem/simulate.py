"""End-to-end solve: element loop, assembly, boundary conditions, linear solve."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fem, vem
from .assembly import DofMap, assemble, impose_essential, solve
from .errors import Unsupported
from .mesh import Mesh
from .model import ProblemConditions, material_matrix, resolve_constraints

ELASTICITY = "elasticity"
POISSON = "poisson"


@dataclass
class Solution:
    mesh: Mesh
    values: np.ndarray  # (n_nodes, n_components)
    problem: str
    method: str
    d_matrix: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def n_components(self) -> int:
        return self.values.shape[1]

    @property
    def dof_count(self) -> int:
        return self.values.size

    def element_values(self, k: int) -> np.ndarray:
        return self.values[list(self.mesh.elements[k])].ravel()


def _n_components(problem: str) -> int:
    if problem == ELASTICITY:
        return 2
    if problem == POISSON:
        return 1
    raise ValueError(f"unknown problem {problem!r}")


def constitutive(problem: str, conditions: ProblemConditions) -> np.ndarray:
    if problem == POISSON:
        return np.eye(2)
    if conditions.material is None:
        raise ValueError("elasticity needs a material")
    return material_matrix(conditions.material)


def simulate(
    mesh: Mesh,
    conditions: ProblemConditions,
    problem: str = ELASTICITY,
    method: str = "vem",
    gamma: float = 1.0,
    solver: str = "direct",
    extra_point_loads: Optional[dict] = None,
) -> Solution:
    nc = _n_components(problem)
    d = constitutive(problem, conditions)
    dof_map = DofMap(mesh.n_nodes, nc)
    resolved = resolve_constraints(mesh, conditions.constraints, nc)

    if method == "vem":
        geoms = [mesh.element_geometry(k) for k in range(mesh.n_elements)]
        if problem == ELASTICITY:
            stiffness = lambda k: vem.elastic_stiffness(geoms[k], d, gamma).k  # noqa: E731
        else:
            stiffness = lambda k: vem.poisson_stiffness(geoms[k]).k  # noqa: E731
        force = lambda k: vem.body_force_vector(geoms[k], conditions.body_force, nc)  # noqa: E731
        edge_force = vem.traction_force_vector
    elif method == "fem":
        if any(len(e) != 3 for e in mesh.elements):
            raise Unsupported("the finite element module only handles triangular meshes")
        if problem == ELASTICITY:
            stiffness = lambda k: fem.t3_stiffness(mesh.element_coords(k), d)  # noqa: E731
        else:
            stiffness = lambda k: fem.t3_laplacian_stiffness(mesh.element_coords(k))  # noqa: E731
        force = lambda k: fem.t3_body_force(mesh.element_coords(k), conditions.body_force, nc)  # noqa: E731
        edge_force = fem.t3_traction_force
    else:
        raise ValueError(f"unknown method {method!r}")

    system = assemble(mesh, stiffness, force, dof_map)
    for a, b, traction in resolved.natural_edges:
        fe = edge_force((mesh.nodes[a], mesh.nodes[b]), traction, nc)
        np.add.at(system.f, dof_map.node_dofs([a, b]), fe)
    loads = dict(resolved.point_loads)
    for dof, value in (extra_point_loads or {}).items():
        loads[dof] = loads.get(dof, 0.0) + value
    for dof, value in loads.items():
        system.f[dof] += value

    reduced = impose_essential(system, resolved.essential)
    u = reduced.recover(solve(reduced.k, reduced.f, method=solver))
    return Solution(
        mesh=mesh,
        values=u.reshape(mesh.n_nodes, nc),
        problem=problem,
        method=method,
        d_matrix=d,
        info={"gamma": gamma, "n_free": int(reduced.free.size)},
    )
