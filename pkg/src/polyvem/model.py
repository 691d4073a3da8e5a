"""Materials, loads and boundary-condition descriptions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConstitutiveSingularity, ConstraintConflict, UnmatchedConstraint

PLANE_STRAIN = "plane_strain"
PLANE_STRESS = "plane_stress"

Value = Union[float, Callable]


@dataclass(frozen=True)
class Material:
    young_modulus: float
    poisson_ratio: float
    plane_state: str = PLANE_STRAIN

    def __post_init__(self):
        if self.plane_state not in (PLANE_STRAIN, PLANE_STRESS):
            raise ValueError(f"unknown plane state {self.plane_state!r}")
        if not self.young_modulus > 0:
            raise ValueError("Young's modulus must be positive")
        nu = self.poisson_ratio
        if self.plane_state == PLANE_STRAIN and nu >= 0.5:
            raise ConstitutiveSingularity(
                f"Poisson ratio {nu} makes the plane strain matrix singular"
            )
        if not -1.0 < nu < 0.5:
            raise ValueError(f"Poisson ratio {nu} outside (-1, 0.5)")


def material_matrix(material: Material) -> np.ndarray:
    """Isotropic constitutive matrix for the strain vector [e11, e22, e12].

    The shear strain is the tensorial component, so the (3, 3) entry is
    4G rather than G; ``eps @ D @ eps`` is then the full energy density
    ``sigma : eps``.
    """
    E, nu = material.young_modulus, material.poisson_ratio
    if material.plane_state == PLANE_STRAIN:
        c = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
        return c * np.array([
            [1.0 - nu, nu, 0.0],
            [nu, 1.0 - nu, 0.0],
            [0.0, 0.0, 2.0 * (1.0 - 2.0 * nu)],
        ])
    c = E / (1.0 - nu ** 2)
    return c * np.array([
        [1.0, nu, 0.0],
        [nu, 1.0, 0.0],
        [0.0, 0.0, 2.0 * (1.0 - nu)],
    ])


def evaluate(func, points: np.ndarray, n_components: int) -> np.ndarray:
    """Evaluate a user load function at ``points``; result has shape (m, n_components).

    ``func`` is called as ``func(x, y)`` with coordinate arrays and may
    return a scalar, an array of shape (m,), or one array per component.
    """
    points = np.atleast_2d(points)
    m = len(points)
    if func is None:
        return np.zeros((m, n_components))
    out = func(points[:, 0], points[:, 1])
    if isinstance(out, (tuple, list)):
        cols = [np.broadcast_to(np.asarray(c, dtype=float), (m,)) for c in out]
        arr = np.column_stack(cols)
    else:
        arr = np.asarray(out, dtype=float)
        if arr.ndim == 0:
            arr = np.full((m, n_components), float(arr))
        elif arr.ndim == 1 and n_components == 1:
            arr = np.broadcast_to(arr, (m,))[:, None]
        elif arr.shape == (n_components, m) and arr.shape != (m, n_components):
            arr = arr.T
    if arr.shape != (m, n_components):
        raise ValueError(f"load function returned shape {arr.shape}, expected {(m, n_components)}")
    return np.array(arr, dtype=float)


@dataclass(frozen=True)
class BodyForce:
    """Body force per unit area; ``None`` components are identically zero."""

    fx: Optional[Callable] = None
    fy: Optional[Callable] = None

    def __call__(self, x, y):
        zero = np.zeros_like(np.asarray(x, dtype=float))
        bx = zero if self.fx is None else np.broadcast_to(np.asarray(self.fx(x, y), float), zero.shape)
        by = zero if self.fy is None else np.broadcast_to(np.asarray(self.fy(x, y), float), zero.shape)
        return (bx, by)


ESSENTIAL = "essential"
NATURAL = "natural"
DIRECTIONS = ("x", "y", "both")


@dataclass(frozen=True)
class Constraint:
    """A boundary condition on a point or a straight boundary segment.

    ``value`` is a constant or a function ``f(x, y)``. For ``direction='both'``
    the function may return a pair (one value per axis). For scalar problems
    the direction is ignored.
    """

    start: tuple
    end: Optional[tuple] = None
    kind: str = ESSENTIAL
    direction: str = "both"
    value: Value = 0.0
    name: str = ""

    def __post_init__(self):
        if self.kind not in (ESSENTIAL, NATURAL):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.end is not None and np.allclose(self.start, self.end, rtol=0, atol=0):
            raise ValueError("segment constraint endpoints coincide")

    @classmethod
    def point(cls, p, **kw) -> "Constraint":
        return cls(start=tuple(map(float, p)), **kw)

    @classmethod
    def segment(cls, a, b, **kw) -> "Constraint":
        return cls(start=tuple(map(float, a)), end=tuple(map(float, b)), **kw)

    @property
    def is_segment(self) -> bool:
        return self.end is not None

    def describe(self) -> str:
        label = f"{self.name} " if self.name else ""
        if self.is_segment:
            return f"{label}{self.kind} segment {self.start}->{self.end}"
        return f"{label}{self.kind} point {self.start}"

    def components(self, n_components: int) -> list:
        if n_components == 1:
            return [0]
        return {"x": [0], "y": [1], "both": [0, 1]}[self.direction]

    def values_at(self, points: np.ndarray, n_components: int) -> np.ndarray:
        """Per-axis values at ``points``, shape (m, n_components); unconstrained axes are 0."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        m = len(points)
        comps = self.components(n_components)
        if callable(self.value):
            raw = self.value(points[:, 0], points[:, 1])
        else:
            raw = self.value
        if isinstance(raw, (tuple, list)) and len(raw) == 2 and n_components == 2:
            per_axis = np.column_stack([np.broadcast_to(np.asarray(r, float), (m,)) for r in raw])
        else:
            v = np.broadcast_to(np.asarray(raw, dtype=float), (m,))
            per_axis = np.column_stack([v] * n_components)
        out = np.zeros((m, n_components))
        out[:, comps] = per_axis[:, comps]
        return out


@dataclass
class ProblemConditions:
    material: Optional[Material] = None
    body_force: Optional[Callable] = None
    constraints: list = field(default_factory=list)


@dataclass
class ResolvedConstraints:
    """Constraints mapped onto degrees of freedom.

    ``essential`` maps dof -> prescribed value. ``natural_edges`` holds
    ``(node_a, node_b, traction)`` where ``traction(x, y)`` returns an
    array of shape (m, n_components). ``point_loads`` maps dof -> force.
    """

    essential: dict
    natural_edges: list
    point_loads: dict

    def essential_arrays(self):
        dofs = np.array(sorted(self.essential), dtype=int)
        vals = np.array([self.essential[d] for d in dofs], dtype=float)
        return dofs, vals


def _distance_to_segment(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    t = np.clip(((points - a) @ ab) / (ab @ ab), 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(points - proj, axis=1)


def _add_essential(essential: dict, dof: int, value: float, owner: str) -> None:
    old = essential.get(dof)
    if old is None:
        essential[dof] = value
        return
    if abs(old - value) > 1e-12 * max(1.0, abs(old), abs(value)):
        raise ConstraintConflict(
            f"dof {dof} prescribed both {old!r} and {value!r} (from {owner})"
        )


def resolve_constraints(mesh, constraints, n_components: int, tol: float = 1e-9) -> ResolvedConstraints:
    """Map geometric constraints onto mesh nodes, boundary edges and dofs.

    Dof numbering follows ``node * n_components + component``.
    """
    nodes = mesh.nodes
    atol = tol * mesh.bbox_diagonal()
    bnodes = mesh.boundary_nodes()
    essential: dict = {}
    natural_edges: list = []
    point_loads: dict = {}

    for c in constraints:
        comps = c.components(n_components)
        a = np.asarray(c.start, dtype=float)
        if c.is_segment:
            b = np.asarray(c.end, dtype=float)
            on = _distance_to_segment(nodes[bnodes], a, b) <= atol
            matched = bnodes[on]
        else:
            d = np.linalg.norm(nodes - a, axis=1)
            k = int(np.argmin(d))
            matched = np.array([k]) if d[k] <= atol else np.array([], dtype=int)
        if len(matched) == 0:
            raise UnmatchedConstraint(f"{c.describe()} matches no mesh node")

        if c.kind == ESSENTIAL:
            vals = c.values_at(nodes[matched], n_components)
            for node, row in zip(matched, vals):
                for comp in comps:
                    _add_essential(essential, int(node) * n_components + comp, float(row[comp]), c.describe())
        elif not c.is_segment:
            vals = c.values_at(nodes[matched], n_components)
            for node, row in zip(matched, vals):
                for comp in comps:
                    dof = int(node) * n_components + comp
                    point_loads[dof] = point_loads.get(dof, 0.0) + float(row[comp])
        else:
            on_set = set(int(i) for i in matched)
            edges = [(p, q) for p, q in mesh.boundary_segments if p in on_set and q in on_set]
            if not edges:
                raise UnmatchedConstraint(f"{c.describe()} contains no boundary edge")
            traction = _TractionOf(c, n_components)
            natural_edges.extend((p, q, traction) for p, q in edges)

    natural_edges.sort(key=lambda e: (e[0], e[1]))
    return ResolvedConstraints(
        essential=dict(sorted(essential.items())),
        natural_edges=natural_edges,
        point_loads=dict(sorted(point_loads.items())),
    )


class _TractionOf:
    def __init__(self, constraint: Constraint, n_components: int):
        self.constraint = constraint
        self.n_components = n_components

    def __call__(self, x, y):
        pts = np.column_stack([np.ravel(x), np.ravel(y)])
        return self.constraint.values_at(pts, self.n_components)

    def __repr__(self):
        return f"traction({self.constraint.describe()})"
