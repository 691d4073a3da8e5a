"""The polygonal mesh container."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import DegenerateElement, MeshingFailure


@dataclass
class Mesh:
    nodes: np.ndarray
    elements: list
    boundary_segments: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        self.elements = [tuple(int(i) for i in e) for e in self.elements]
        if not self.boundary_segments:
            self.boundary_segments = find_boundary_segments(self.elements)
        else:
            self.boundary_segments = [(int(a), int(b)) for a, b in self.boundary_segments]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def element_coords(self, k: int) -> np.ndarray:
        return self.nodes[list(self.elements[k])]

    def element_geometry(self, k: int) -> geometry.ElementGeometry:
        try:
            return geometry.ElementGeometry.from_polygon(self.elements[k], self.nodes)
        except DegenerateElement as exc:
            raise DegenerateElement(f"element {k}: {exc}") from exc

    def bbox_diagonal(self) -> float:
        span = self.nodes.max(axis=0) - self.nodes.min(axis=0)
        return float(np.hypot(*span))

    def total_area(self) -> float:
        return sum(geometry.signed_area(e, self.nodes) for e in self.elements)

    def h_max(self) -> float:
        return max(geometry.diameter(self.element_coords(k)) for k in range(self.n_elements))

    def boundary_nodes(self) -> np.ndarray:
        return np.unique(np.array(self.boundary_segments, dtype=int).ravel())


def find_boundary_segments(elements) -> list:
    """Directed edges that belong to exactly one element, in element order."""
    count = Counter()
    for e in elements:
        n = len(e)
        for k in range(n):
            a, b = e[k], e[(k + 1) % n]
            count[(min(a, b), max(a, b))] += 1
    segments = []
    for e in elements:
        n = len(e)
        for k in range(n):
            a, b = e[k], e[(k + 1) % n]
            if count[(min(a, b), max(a, b))] == 1:
                segments.append((a, b))
    return segments


def orient_ccw(nodes: np.ndarray, element) -> tuple:
    element = tuple(element)
    if geometry.signed_area(element, nodes) < 0:
        return tuple(reversed(element))
    return element


def check_mesh(mesh: Mesh, check_simple: bool = True) -> None:
    """Raise MeshingFailure if a structural invariant is violated."""
    directed = Counter()
    for k, e in enumerate(mesh.elements):
        if len(set(e)) != len(e) or len(e) < 3:
            raise MeshingFailure(f"element {k} has repeated or too few nodes")
        xy = mesh.nodes[list(e)]
        if geometry.signed_area(None, xy) <= 0:
            raise MeshingFailure(f"element {k} is not counterclockwise")
        if check_simple and not geometry.is_simple(xy):
            raise MeshingFailure(f"element {k} is not simple")
        n = len(e)
        for i in range(n):
            directed[(e[i], e[(i + 1) % n])] += 1
    for (a, b), c in directed.items():
        if c > 1:
            raise MeshingFailure(f"edge ({a}, {b}) used twice with the same orientation")
