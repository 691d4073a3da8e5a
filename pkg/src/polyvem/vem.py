"""Lowest-order virtual element matrices for elasticity and Poisson.

Local dofs are interleaved per node: ``[u1_1, u2_1, u1_2, u2_2, ...]`` for
elasticity and ``[u_1, u_2, ...]`` for the scalar problem. Strains use the
ordering [e11, e22, e12] with tensorial shear (see ``model.material_matrix``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quadrature
from .errors import DegenerateElement, DimensionError
from .geometry import ElementGeometry
from .model import evaluate

BODY_FORCE_ORDER = 2


@dataclass(frozen=True)
class EdgeAverages:
    q: np.ndarray
    phi_bar: float


@dataclass(frozen=True)
class VemProjection:
    h_r: np.ndarray
    w_r: np.ndarray
    h_c: np.ndarray
    w_c: np.ndarray

    @property
    def p_r(self) -> np.ndarray:
        return self.h_r @ self.w_r.T

    @property
    def p_c(self) -> np.ndarray:
        return self.h_c @ self.w_c.T

    @property
    def p_p(self) -> np.ndarray:
        return self.p_r + self.p_c


@dataclass(frozen=True)
class ElementStiffness:
    consistency: np.ndarray
    stability: np.ndarray
    alpha: float

    @property
    def k(self) -> np.ndarray:
        return self.consistency + self.stability


def edge_averages(elem: ElementGeometry) -> EdgeAverages:
    """Boundary averages ``q_ia`` of the nodal basis functions.

    The basis is linear on each edge, so the trapezoidal rule is exact: node
    ``a`` collects half of each incident edge's ``|e| n``.
    """
    weighted = elem.edge_lengths[:, None] * elem.edge_normals
    q = (np.roll(weighted, 1, axis=0) + weighted) / (4.0 * elem.area)
    return EdgeAverages(q=q, phi_bar=1.0 / elem.n_nodes)


def elastic_projection(elem: ElementGeometry) -> VemProjection:
    n = elem.n_nodes
    dx = elem.coords - elem.node_average
    q = edge_averages(elem).q
    h_r = np.zeros((2 * n, 3))
    w_r = np.zeros((2 * n, 3))
    h_c = np.zeros((2 * n, 3))
    w_c = np.zeros((2 * n, 3))
    ux, uy = slice(0, 2 * n, 2), slice(1, 2 * n, 2)

    h_r[ux, 0] = 1.0
    h_r[uy, 1] = 1.0
    h_r[ux, 2] = dx[:, 1]
    h_r[uy, 2] = -dx[:, 0]

    w_r[ux, 0] = 1.0 / n
    w_r[uy, 1] = 1.0 / n
    w_r[ux, 2] = q[:, 1]
    w_r[uy, 2] = -q[:, 0]

    h_c[ux, 0] = dx[:, 0]
    h_c[uy, 1] = dx[:, 1]
    h_c[ux, 2] = dx[:, 1]
    h_c[uy, 2] = dx[:, 0]

    w_c[ux, 0] = 2.0 * q[:, 0]
    w_c[uy, 1] = 2.0 * q[:, 1]
    w_c[ux, 2] = q[:, 1]
    w_c[uy, 2] = q[:, 0]
    return VemProjection(h_r=h_r, w_r=w_r, h_c=h_c, w_c=w_c)


def poisson_projection(elem: ElementGeometry) -> VemProjection:
    n = elem.n_nodes
    q = edge_averages(elem).q
    return VemProjection(
        h_r=np.ones((n, 1)),
        w_r=np.full((n, 1), 1.0 / n),
        h_c=elem.coords - elem.node_average,
        w_c=2.0 * q,
    )


def _stabilized(elem, proj: VemProjection, core: np.ndarray, alpha: float) -> ElementStiffness:
    consistency = elem.area * proj.w_c @ core @ proj.w_c.T
    r = np.eye(proj.h_r.shape[0]) - proj.p_p
    stability = alpha * (r.T @ r)
    return ElementStiffness(
        consistency=0.5 * (consistency + consistency.T),
        stability=0.5 * (stability + stability.T),
        alpha=alpha,
    )


def elastic_stiffness(elem: ElementGeometry, d_matrix: np.ndarray, gamma: float = 1.0) -> ElementStiffness:
    """Consistency plus scaled-identity stability stiffness (2N x 2N).

    The stability scale is ``gamma |E| tr(D) / tr(H_C^T H_C)``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    proj = elastic_projection(elem)
    tr_hc = float(np.sum(proj.h_c ** 2))
    if tr_hc <= 0.0:
        raise DegenerateElement("all element nodes coincide with their average")
    alpha = gamma * elem.area * float(np.trace(d_matrix)) / tr_hc
    return _stabilized(elem, proj, np.asarray(d_matrix, dtype=float), alpha)


def poisson_stiffness(elem: ElementGeometry) -> ElementStiffness:
    """Scalar Laplacian stiffness (N x N) with the identity stability matrix."""
    proj = poisson_projection(elem)
    if float(np.sum(proj.h_c ** 2)) <= 0.0:
        raise DegenerateElement("all element nodes coincide with their average")
    return _stabilized(elem, proj, np.eye(2), 1.0)


def cell_average(elem: ElementGeometry, func, n_components: int, order: int = BODY_FORCE_ORDER) -> np.ndarray:
    pts, wts = quadrature.polygon_points(elem.coords, order)
    vals = evaluate(func, pts, n_components)
    return wts @ vals / elem.area


def body_force_vector(elem: ElementGeometry, body_force, n_components: int = 2) -> np.ndarray:
    """Each node receives ``|E| b_hat / N`` where ``b_hat`` is the cell average of the load."""
    n = elem.n_nodes
    if body_force is None:
        return np.zeros(n * n_components)
    b_hat = cell_average(elem, body_force, n_components)
    return np.tile(elem.area * b_hat / n, n)


def traction_force_vector(edge, traction, n_components: int = 2) -> np.ndarray:
    """Edge load split equally between the two endpoints: ``|e| f_hat / 2`` each."""
    a, b = (np.asarray(p, dtype=float) for p in edge)
    if np.array_equal(a, b):
        raise DegenerateElement("edge endpoints coincide")
    if traction is None:
        return np.zeros(2 * n_components)
    pts, _, w = quadrature.gauss_legendre_segment(a, b, 2)
    integral = w @ evaluate(traction, pts, n_components)
    return np.tile(0.5 * integral, 2)


def project_strain(elem: ElementGeometry, nodal_values) -> np.ndarray:
    """Element-constant strain (2N values) or gradient (N values) of the projection."""
    d = np.asarray(nodal_values, dtype=float).ravel()
    n = elem.n_nodes
    if d.size == 2 * n:
        return elastic_projection(elem).w_c.T @ d
    if d.size == n:
        return poisson_projection(elem).w_c.T @ d
    raise DimensionError(f"expected {n} or {2 * n} nodal values, got {d.size}")


def projected_field(elem: ElementGeometry, nodal_values, points) -> np.ndarray:
    """Evaluate the linear projection of the element field at ``points``.

    Returns shape (m, 2) for elasticity or (m, 1) for the scalar problem.
    """
    d = np.asarray(nodal_values, dtype=float).ravel()
    n = elem.n_nodes
    pts = np.atleast_2d(points) - elem.node_average
    if d.size == 2 * n:
        proj = elastic_projection(elem)
        mean = d.reshape(n, 2).mean(axis=0)
        eps = proj.w_c.T @ d
        omega = proj.w_r[:, 2] @ d
        grad = np.array([[eps[0], eps[2] + omega], [eps[2] - omega, eps[1]]])
        return mean + pts @ grad.T
    if d.size == n:
        grad = poisson_projection(elem).w_c.T @ d
        return (d.mean() + pts @ grad)[:, None]
    raise DimensionError(f"expected {n} or {2 * n} nodal values, got {d.size}")
