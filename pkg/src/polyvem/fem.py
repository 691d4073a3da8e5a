"""Three-node constant-strain triangle, used to cross-check the VEM."""

from __future__ import annotations

import numpy as np

from . import quadrature
from .errors import DegenerateElement
from .model import evaluate

AREA_ORDER = 2
LINE_POINTS = 2


class Tri3ShapeFunctions:
    """Linear shape functions on a triangle given by its three vertices."""

    def __init__(self, vertices):
        self.vertices = np.asarray(vertices, dtype=float).reshape(3, 2)
        (x1, y1), (x2, y2), (x3, y3) = self.vertices
        twice_area = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)
        if twice_area <= 0.0:
            raise DegenerateElement(f"triangle area {0.5 * twice_area!r} is not positive")
        self.area = 0.5 * twice_area
        # rows: shape function; columns: constant, d/dx, d/dy
        self._coef = np.array([
            [x2 * y3 - x3 * y2, y2 - y3, x3 - x2],
            [x3 * y1 - x1 * y3, y3 - y1, x1 - x3],
            [x1 * y2 - x2 * y1, y1 - y2, x2 - x1],
        ]) / twice_area

    def values(self, points) -> np.ndarray:
        """Shape function values, shape (m, 3)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return self._coef[:, 0] + p @ self._coef[:, 1:].T

    @property
    def gradients(self) -> np.ndarray:
        """Constant gradients, shape (3, 2)."""
        return self._coef[:, 1:]

    def strain_displacement(self) -> np.ndarray:
        """B (3 x 6) mapping interleaved nodal displacements to [e11, e22, e12]."""
        g = self.gradients
        b = np.zeros((3, 6))
        b[0, 0::2] = g[:, 0]
        b[1, 1::2] = g[:, 1]
        b[2, 0::2] = 0.5 * g[:, 1]
        b[2, 1::2] = 0.5 * g[:, 0]
        return b


def t3_stiffness(vertices, d_matrix) -> np.ndarray:
    sf = Tri3ShapeFunctions(vertices)
    b = sf.strain_displacement()
    k = sf.area * b.T @ np.asarray(d_matrix, dtype=float) @ b
    return 0.5 * (k + k.T)


def t3_laplacian_stiffness(vertices) -> np.ndarray:
    sf = Tri3ShapeFunctions(vertices)
    g = sf.gradients
    return sf.area * g @ g.T


def t3_body_force(vertices, body_force, n_components: int = 2) -> np.ndarray:
    """Consistent load vector: integral of N^T b over the triangle."""
    sf = Tri3ShapeFunctions(vertices)
    if body_force is None:
        return np.zeros(3 * n_components)
    pts, wts = quadrature.triangle_points(sf.vertices, AREA_ORDER)
    n = sf.values(pts)
    b = evaluate(body_force, pts, n_components)
    return np.einsum("q,qa,qc->ac", wts, n, b).ravel()


def t3_traction_force(edge, traction, n_components: int = 2) -> np.ndarray:
    """Consistent edge load with linear interpolation along the edge."""
    a, b = (np.asarray(p, dtype=float) for p in edge)
    if traction is None:
        return np.zeros(2 * n_components)
    pts, s, w = quadrature.gauss_legendre_segment(a, b, LINE_POINTS)
    n = np.column_stack([1.0 - s, s])
    f = evaluate(traction, pts, n_components)
    return np.einsum("q,qa,qc->ac", w, n, f).ravel()
