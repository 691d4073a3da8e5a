"""Dof numbering, global assembly, essential-condition elimination and solve."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .errors import ConstraintConflict, PolyVemError, SolveFailure

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
PIVOT_TOL = 1e-12
CG_TOL = 1e-10
DENSE_NULLSPACE_LIMIT = 4000


@dataclass(frozen=True)
class DofMap:
    n_nodes: int
    n_components: int

    @property
    def total_dofs(self) -> int:
        return self.n_nodes * self.n_components

    def node_dofs(self, nodes) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=int)
        return (nodes[:, None] * self.n_components + np.arange(self.n_components)).ravel()

    def dof(self, node: int, component: int = 0) -> int:
        return node * self.n_components + component


@dataclass
class GlobalSystem:
    k: sps.csr_matrix
    f: np.ndarray


@dataclass
class ReducedSystem:
    k: sps.csr_matrix
    f: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    total_dofs: int

    def recover(self, u_free) -> np.ndarray:
        u = np.zeros(self.total_dofs)
        u[self.fixed] = self.fixed_values
        u[self.free] = u_free
        return u


class ElementFailure(PolyVemError):
    def __init__(self, element: int, cause: Exception):
        super().__init__(f"element {element}: {cause}")
        self.element = element
        self.cause = cause


def assemble(mesh, stiffness, force, dof_map: DofMap) -> GlobalSystem:
    """Scatter element matrices and vectors into a sparse global system.

    ``stiffness(k)`` and ``force(k)`` return the local matrix and vector of
    element ``k``; ``force`` may be None. Triplets are concatenated in element
    order so the summation order is fixed.
    """
    rows, cols, vals = [], [], []
    f = np.zeros(dof_map.total_dofs)
    for k, element in enumerate(mesh.elements):
        dofs = dof_map.node_dofs(element)
        try:
            ke = np.asarray(stiffness(k), dtype=float)
            fe = None if force is None else np.asarray(force(k), dtype=float)
        except PolyVemError as exc:
            raise ElementFailure(k, exc) from exc
        if ke.shape != (dofs.size, dofs.size):
            raise ElementFailure(k, ValueError(f"stiffness shape {ke.shape} != {(dofs.size, dofs.size)}"))
        rows.append(np.repeat(dofs, dofs.size))
        cols.append(np.tile(dofs, dofs.size))
        vals.append(ke.ravel())
        if fe is not None:
            np.add.at(f, dofs, fe)
    n = dof_map.total_dofs
    if rows:
        k_glob = sps.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        ).tocsr()
    else:
        k_glob = sps.csr_matrix((n, n))
    return GlobalSystem(k=k_glob, f=f)


def impose_essential(system: GlobalSystem, essential) -> ReducedSystem:
    """Remove prescribed dofs symmetrically and move their load to the right-hand side.

    ``essential`` is a mapping dof -> value or an iterable of (dof, value).
    """
    n = system.k.shape[0]
    items = essential.items() if isinstance(essential, dict) else essential
    prescribed: dict = {}
    for dof, value in items:
        dof, value = int(dof), float(value)
        if not 0 <= dof < n:
            raise IndexError(f"essential dof {dof} outside [0, {n})")
        if dof in prescribed and abs(prescribed[dof] - value) > 1e-12 * max(1.0, abs(value)):
            raise ConstraintConflict(f"dof {dof} prescribed both {prescribed[dof]!r} and {value!r}")
        prescribed[dof] = value
    fixed = np.array(sorted(prescribed), dtype=int)
    values = np.array([prescribed[d] for d in fixed], dtype=float)
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    k = system.k.tocsc()
    k_ff = k[free][:, free].tocsr()
    f = system.f[free] - k[free][:, fixed] @ values if fixed.size else system.f[free].copy()
    return ReducedSystem(k=k_ff, f=np.asarray(f).ravel(), free=free, fixed=fixed,
                         fixed_values=values, total_dofs=n)


def estimate_null_space(k, rel_tol: float = 1e-10) -> int:
    """Count eigenvalues below ``rel_tol * lambda_max`` (dense below a size limit)."""
    n = k.shape[0]
    if n == 0:
        return 0
    if n <= DENSE_NULLSPACE_LIMIT:
        a = k.toarray() if sps.issparse(k) else np.asarray(k)
        w = scipy.linalg.eigvalsh(0.5 * (a + a.T))
        return int(np.sum(np.abs(w) <= rel_tol * np.abs(w).max()))
    try:
        lmax = spla.eigsh(k, k=1, which="LM", return_eigenvectors=False)[0]
        w = spla.eigsh(k, k=min(12, n - 1), sigma=-1e-8 * lmax, which="LM", return_eigenvectors=False)
        return int(np.sum(np.abs(w) <= rel_tol * abs(lmax)))
    except Exception:  # noqa: BLE001 - eigen solvers fail in many ways on singular input
        log.warning("null-space estimate failed for n=%d", n)
        return 1


def solve(k, f, method: str = "direct") -> np.ndarray:
    """Solve the reduced SPD system. Raises SolveFailure for singular systems."""
    k = sps.csc_matrix(k)
    f = np.asarray(f, dtype=float)
    n = k.shape[0]
    if n == 0:
        return np.zeros(0)
    if method == "direct":
        try:
            lu = spla.splu(k, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                           options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise SolveFailure(f"factorization failed: {exc}", estimate_null_space(k)) from exc
        piv = np.abs(lu.U.diagonal())
        if piv.min() <= PIVOT_TOL * piv.max():
            raise SolveFailure("stiffness matrix is singular", estimate_null_space(k))
        u = lu.solve(f)
    elif method == "cg":
        u, info = spla.cg(k, f, rtol=CG_TOL, atol=0.0, maxiter=10 * n)
        if info != 0:
            raise SolveFailure(f"conjugate gradient did not converge (info={info})", estimate_null_space(k))
    else:
        raise ValueError(f"unknown solver {method!r}")
    if not np.all(np.isfinite(u)):
        raise SolveFailure("solution is not finite", estimate_null_space(k))
    fnorm = np.linalg.norm(f)
    res = np.linalg.norm(k @ u - f)
    if res > RESIDUAL_TOL * fnorm:
        raise SolveFailure(f"residual {res:.3e} exceeds tolerance (|f| = {fnorm:.3e})",
                           estimate_null_space(k))
    return u
