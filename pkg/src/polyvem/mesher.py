"""Voronoi and structured triangular meshes on simple polygonal regions.

Voronoi cells are built from the Delaunay neighbours of each seed: the cell
of seed ``i`` is the region clipped by the bisector half-plane of every
Delaunay neighbour ``j``.  A convex region is clipped one half-plane at a
time; for a non-convex region the convex cell is intersected with the region,
and a cell that falls apart into several pieces is reported as an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import shapely
import shapely.geometry
from scipy.spatial import Delaunay, QhullError, cKDTree

from . import geometry
from .errors import EmptySeedSet, MeshingFailure, Unsupported
from .mesh import Mesh, check_mesh

MERGE_TOL = 1e-10
KINDS = ("constant", "random_double", "constant_alternating", "sine")


@dataclass(frozen=True)
class Region:
    boundary: np.ndarray

    def __init__(self, boundary):
        xy = np.asarray(boundary, dtype=float).reshape(-1, 2)
        if len(xy) < 3:
            raise ValueError("a region needs at least three boundary points")
        if not geometry.is_simple(xy):
            raise ValueError("region boundary is not simple")
        if geometry.signed_area(None, xy) < 0:
            xy = xy[::-1].copy()
        object.__setattr__(self, "boundary", xy)

    @classmethod
    def rectangle(cls, x0, y0, x1, y1) -> "Region":
        return cls([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    @property
    def bbox(self):
        lo = self.boundary.min(axis=0)
        hi = self.boundary.max(axis=0)
        return lo, hi

    @property
    def area(self) -> float:
        return geometry.signed_area(None, self.boundary)

    @property
    def diagonal(self) -> float:
        lo, hi = self.bbox
        return float(np.hypot(*(hi - lo)))

    def is_convex(self) -> bool:
        return geometry.is_convex(self.boundary)

    def contains(self, points, tol: Optional[float] = None) -> np.ndarray:
        """Inside-or-on-boundary test for an array of points."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if tol is None:
            tol = MERGE_TOL * self.diagonal
        a = self.boundary
        b = np.roll(a, -1, axis=0)
        px, py = p[:, 0:1], p[:, 1:2]
        ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
        crosses = (ay > py) != (by > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
        inside = np.sum(crosses & (px < xint), axis=1) % 2 == 1
        ab = b - a
        t = np.clip(((px - ax) * ab[:, 0] + (py - ay) * ab[:, 1]) / np.sum(ab * ab, axis=1), 0, 1)
        dist = np.hypot(px - (ax + t * ab[:, 0]), py - (ay + t * ab[:, 1])).min(axis=1)
        return inside | (dist <= tol)


@dataclass(frozen=True)
class SeedRule:
    """How seed points are laid out before Voronoi meshing.

    ``min``/``max`` bound both ``random_double`` coordinates (default: the
    bounding box); points that land outside the region are dropped. Noise displaces each coordinate by a magnitude drawn
    uniformly from [min_noise, max_noise] with a random sign.
    """

    kind: str = "constant"
    min: Optional[float] = None
    max: Optional[float] = None
    min_noise: Optional[float] = None
    max_noise: Optional[float] = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown seed rule {self.kind!r}; choose from {KINDS}")
        if self.min is not None and self.max is not None and self.min > self.max:
            raise ValueError("min must not exceed max")
        if (self.min_noise is None) != (self.max_noise is None):
            raise ValueError("give both min_noise and max_noise, or neither")
        if self.min_noise is not None:
            if self.min_noise < 0 or self.max_noise < 0 or self.min_noise > self.max_noise:
                raise ValueError("noise magnitudes must satisfy 0 <= min_noise <= max_noise")

    @property
    def has_noise(self) -> bool:
        return self.min_noise is not None


def generate_seeds(region: Region, rule: SeedRule, nx: int, ny: int) -> np.ndarray:
    """Seed points for ``nx`` x ``ny`` divisions of the region's bounding box.

    Grid rules place (nx + 1) x (ny + 1) points; seeds falling outside the
    region after displacement are dropped.
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be at least 1")
    rng = np.random.default_rng(rule.rng_seed)
    lo, hi = region.bbox
    width, height = hi - lo
    dx, dy = width / nx, height / ny
    gx, gy = np.meshgrid(lo[0] + dx * np.arange(nx + 1), lo[1] + dy * np.arange(ny + 1))

    if rule.kind == "constant":
        pts = np.column_stack([gx.ravel(), gy.ravel()])
    elif rule.kind == "constant_alternating":
        shift = np.where(np.arange(ny + 1) % 2 == 1, 0.5 * dx, 0.0)
        pts = np.column_stack([(gx + shift[:, None]).ravel(), gy.ravel()])
    elif rule.kind == "sine":
        amp = 0.5 * dy
        yy = gy + amp * np.sin(2.0 * np.pi * (gx - lo[0]) / width)
        pts = np.column_stack([gx.ravel(), yy.ravel()])
    else:
        count = (nx + 1) * (ny + 1)
        xlo = lo[0] if rule.min is None else rule.min
        xhi = hi[0] if rule.max is None else rule.max
        ylo = lo[1] if rule.min is None else rule.min
        yhi = hi[1] if rule.max is None else rule.max
        pts = np.column_stack([rng.uniform(xlo, xhi, count), rng.uniform(ylo, yhi, count)])

    if rule.has_noise:
        mag = rng.uniform(rule.min_noise, rule.max_noise, pts.shape)
        sign = rng.choice([-1.0, 1.0], size=pts.shape)
        pts = pts + sign * mag

    pts = pts[region.contains(pts)]
    if len(pts) == 0:
        raise EmptySeedSet("no seed point falls inside the region")
    return _dedupe(pts, MERGE_TOL * region.diagonal)


def _dedupe(points: np.ndarray, tol: float) -> np.ndarray:
    tree = cKDTree(points)
    keep = np.ones(len(points), dtype=bool)
    for i, j in sorted(tree.query_pairs(tol)):
        if keep[i]:
            keep[j] = False
    return points[keep]


def clip_halfplane(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the part of ``poly`` where ``normal . x <= offset``."""
    if len(poly) == 0:
        return poly
    s = poly @ normal - offset
    out = []
    n = len(poly)
    for k in range(n):
        p, sp = poly[k], s[k]
        q, sq = poly[(k + 1) % n], s[(k + 1) % n]
        if sp <= 0.0:
            out.append(p)
        if (sp < 0.0 < sq) or (sq < 0.0 < sp):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def _drop_repeats(poly: np.ndarray, tol: float) -> np.ndarray:
    if len(poly) == 0:
        return poly
    keep = [poly[0]]
    for p in poly[1:]:
        if np.hypot(*(p - keep[-1])) > tol:
            keep.append(p)
    while len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= tol:
        keep.pop()
    return _drop_spikes(np.array(keep), tol)


def _drop_spikes(poly: np.ndarray, tol: float) -> np.ndarray:
    """Remove zero-width excursions left when a clip line runs along a region edge."""
    pts = list(poly)
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        n = len(pts)
        for k in range(n):
            a, b, c = pts[k - 1], pts[k], pts[(k + 1) % n]
            u, v = b - a, c - b
            cross = u[0] * v[1] - u[1] * v[0]
            if u @ v < 0.0 and abs(cross) <= tol * (np.hypot(*u) + np.hypot(*v)):
                del pts[k]
                if np.hypot(*(pts[k - 1] - pts[k % len(pts)])) <= tol:
                    del pts[k % len(pts)]
                changed = True
                break
    return np.array(pts).reshape(-1, 2)


def voronoi_cells(region: Region, seeds: np.ndarray) -> list:
    """Clipped Voronoi cell (coordinate array, possibly empty) for every seed."""
    seeds = np.asarray(seeds, dtype=float)
    if len(seeds) < 3:
        raise MeshingFailure(f"need at least 3 seeds, got {len(seeds)}")
    try:
        tri = Delaunay(seeds)
    except QhullError as exc:
        raise MeshingFailure(f"seeds are degenerate (collinear?): {exc}") from exc
    indptr, indices = tri.vertex_neighbor_vertices
    tol = MERGE_TOL * region.diagonal
    convex = region.is_convex()
    lo, hi = region.bbox
    box = np.array([lo, (hi[0], lo[1]), hi, (lo[0], hi[1])])
    shape = None if convex else shapely.Polygon(region.boundary)
    cells = []
    for i, s in enumerate(seeds):
        # a convex region is clipped directly; otherwise clip the bounding box and intersect
        poly = region.boundary.copy() if convex else box.copy()
        for j in sorted(indices[indptr[i]:indptr[i + 1]]):
            normal = seeds[j] - s
            mid = 0.5 * (seeds[j] + s)
            poly = clip_halfplane(poly, normal, float(normal @ mid))
            if len(poly) == 0:
                break
        if not convex and len(poly) >= 3:
            poly = _intersect_region(poly, shape, i, tol)
        cells.append(_drop_repeats(poly, tol))
    return cells


def _intersect_region(cell: np.ndarray, region_shape, seed_index: int, tol: float) -> np.ndarray:
    """Convex cell intersected with a non-convex region; a split cell is an error."""
    piece = shapely.intersection(shapely.Polygon(cell), region_shape)
    parts = [g for g in getattr(piece, "geoms", [piece])
             if isinstance(g, shapely.Polygon) and g.area > tol * tol]
    if not parts:
        return np.zeros((0, 2))
    if len(parts) > 1:
        raise MeshingFailure(f"Voronoi cell of seed {seed_index} splits into {len(parts)} pieces "
                             "inside the region", seed_index=seed_index)
    ring = shapely.geometry.polygon.orient(parts[0], sign=1.0).exterior.coords
    return np.asarray(ring, dtype=float)[:-1]


def _merge_vertices(cells: list, tol: float):
    coords = np.vstack([c for c in cells if len(c)])
    tree = cKDTree(coords)
    parent = np.arange(len(coords))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(tree.query_pairs(tol)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(coords))])
    uniq, node_of = np.unique(roots, return_inverse=True)
    nodes = coords[uniq]
    elements, owners = [], []
    offset = 0
    for seed, c in enumerate(cells):
        idx = node_of[offset:offset + len(c)]
        offset += len(c)
        ring = []
        for v in idx:
            if not ring or ring[-1] != v:
                ring.append(int(v))
        while len(ring) > 1 and ring[0] == ring[-1]:
            ring.pop()
        if len(ring) >= 3:
            elements.append(ring)
            owners.append(seed)
    return nodes, elements, owners


def _insert_hanging_nodes(nodes: np.ndarray, elements: list, tol: float) -> list:
    tree = cKDTree(nodes)
    fixed = []
    for e in elements:
        ring = []
        n = len(e)
        for k in range(n):
            a, b = e[k], e[(k + 1) % n]
            ring.append(a)
            pa, pb = nodes[a], nodes[b]
            ab = pb - pa
            length = float(np.hypot(*ab))
            cand = tree.query_ball_point(0.5 * (pa + pb), 0.5 * length + tol)
            extra = []
            for c in cand:
                if c in (a, b):
                    continue
                t = float((nodes[c] - pa) @ ab) / length ** 2
                dist = abs(ab[0] * (nodes[c][1] - pa[1]) - ab[1] * (nodes[c][0] - pa[0])) / length
                if 0.0 < t < 1.0 and dist <= tol:
                    extra.append((t, c))
            ring.extend(c for _, c in sorted(extra))
        fixed.append(ring)
    return fixed


def build_voronoi_mesh(region: Region, seeds, metadata: Optional[dict] = None) -> Mesh:
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 2)
    tol = MERGE_TOL * region.diagonal
    cells = voronoi_cells(region, seeds)
    convex = region.is_convex()
    area_floor = 1e-14 * region.diagonal ** 2
    kept = []
    for i, c in enumerate(cells):
        if len(c) < 3 or _area(c) <= area_floor:
            kept.append(np.zeros((0, 2)))
            continue
        if not convex and not geometry.is_simple(c):
            raise MeshingFailure(f"clipped cell of seed {i} is not simple", seed_index=i)
        kept.append(c)
    nodes, elements, owners = _merge_vertices(kept, tol)
    elements = _insert_hanging_nodes(nodes, elements, tol)
    meta = {"seeds": len(seeds)}
    meta.update(metadata or {})
    mesh = Mesh(nodes=nodes, elements=elements, metadata=meta)
    try:
        check_mesh(mesh, check_simple=not convex)
    except MeshingFailure as exc:
        raise MeshingFailure(str(exc)) from exc
    return mesh


def _area(xy: np.ndarray) -> float:
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def voronoi_mesh(region: Region, rule: SeedRule, nx: int, ny: int) -> Mesh:
    """Seed generation followed by Voronoi meshing; records the rule in metadata."""
    seeds = generate_seeds(region, rule, nx, ny)
    return build_voronoi_mesh(region, seeds, metadata={
        "rule": rule.kind, "nx": nx, "ny": ny, "rng_seed": rule.rng_seed,
    })


def build_triangular_mesh(region: Region, nx: int, ny: int) -> Mesh:
    """Structured mesh of a rectangle, each grid cell cut along its rising diagonal."""
    lo, hi = region.bbox
    corners = {tuple(p) for p in region.boundary}
    rect = {(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])}
    if len(region.boundary) != 4 or corners != rect:
        raise Unsupported("structured triangular meshes need an axis-aligned rectangle")
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be at least 1")
    xs = np.linspace(lo[0], hi[0], nx + 1)
    ys = np.linspace(lo[1], hi[1], ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    elements = []
    for j in range(ny):
        for i in range(nx):
            n0 = j * (nx + 1) + i
            n1, n2, n3 = n0 + 1, n0 + nx + 2, n0 + nx + 1
            elements.append((n0, n1, n2))
            elements.append((n0, n2, n3))
    return Mesh(nodes=nodes, elements=elements, metadata={"rule": "structured_triangles", "nx": nx, "ny": ny})
