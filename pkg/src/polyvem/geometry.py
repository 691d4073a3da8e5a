"""Planar primitives and per-polygon quantities.

Polygons are index lists into a node table of shape ``(n, 2)``.  Every
function accepts either a polygon plus the global node table, or (with
``polygon=None``) the polygon's own coordinates in order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateElement, TriangulationFailure

DEGENERACY_TOL = 1e-14


def polygon_coords(polygon, nodes) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    if polygon is None:
        return nodes
    return nodes[np.asarray(polygon, dtype=int)]


def _bbox_scale2(xy: np.ndarray) -> float:
    span = xy.max(axis=0) - xy.min(axis=0)
    return float(max(span[0], span[1]) ** 2)


def signed_area(polygon, nodes) -> float:
    """Shoelace area; positive for counterclockwise ordering."""
    xy = polygon_coords(polygon, nodes)
    if len(xy) < 3:
        raise DegenerateElement(f"polygon has {len(xy)} vertices, need at least 3")
    # centring avoids cancellation for polygons far from the origin
    rel = xy - xy.mean(axis=0)
    x, y = rel[:, 0], rel[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    area = 0.5 * float(np.sum(x * yn - xn * y))
    scale2 = _bbox_scale2(xy)
    if abs(area) < DEGENERACY_TOL * scale2 or scale2 == 0.0:
        raise DegenerateElement(f"polygon area {area!r} is degenerate")
    return area


def node_average(polygon, nodes) -> np.ndarray:
    """Arithmetic mean of the vertices (not the area centroid)."""
    return polygon_coords(polygon, nodes).mean(axis=0)


def area_centroid(polygon, nodes) -> np.ndarray:
    xy = polygon_coords(polygon, nodes)
    origin = xy.mean(axis=0)
    rel = xy - origin
    x, y = rel[:, 0], rel[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    cx = np.sum((x + xn) * cross) / (6.0 * a)
    cy = np.sum((y + yn) * cross) / (6.0 * a)
    return origin + np.array([cx, cy])


def edge_lengths(polygon, nodes) -> np.ndarray:
    xy = polygon_coords(polygon, nodes)
    return np.linalg.norm(np.roll(xy, -1, axis=0) - xy, axis=1)


def edge_normals(polygon, nodes) -> np.ndarray:
    """Unit normals of edges ``k -> k+1``; outward for a CCW polygon."""
    xy = polygon_coords(polygon, nodes)
    d = np.roll(xy, -1, axis=0) - xy
    lengths = np.hypot(d[:, 0], d[:, 1])
    scale = np.sqrt(_bbox_scale2(xy))
    if np.any(lengths <= DEGENERACY_TOL * max(scale, np.finfo(float).tiny)):
        k = int(np.argmin(lengths))
        raise DegenerateElement(f"edge {k} of polygon has zero length")
    return np.column_stack([d[:, 1], -d[:, 0]]) / lengths[:, None]


def fan_triangulate(polygon, nodes) -> np.ndarray:
    """Split a star-shaped polygon into triangles around its area centroid.

    Returns an array of shape ``(t, 3, 2)`` of CCW triangle vertices. A
    triangle is returned unchanged.
    """
    xy = polygon_coords(polygon, nodes)
    if len(xy) == 3:
        return xy[None, :, :].copy()
    c = area_centroid(None, xy)
    nxt = np.roll(xy, -1, axis=0)
    tris = np.stack([np.broadcast_to(c, xy.shape), xy, nxt], axis=1)
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    if np.any(areas <= 0.0):
        raise TriangulationFailure("polygon is not star-shaped with respect to its centroid")
    return tris


def is_simple(xy: np.ndarray) -> bool:
    """True if no two non-adjacent edges of the closed polyline intersect."""
    n = len(xy)
    if n < 3:
        return False
    p = xy
    q = np.roll(xy, -1, axis=0)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(p[i], q[i], p[j], q[j]):
                return False
    return True


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_intersect(a, b, c, d) -> bool:
    d1 = _orient(c, d, a)
    d2 = _orient(c, d, b)
    d3 = _orient(a, b, c)
    d4 = _orient(a, b, d)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True

    def on_seg(p, r, s):
        return (min(p[0], r[0]) <= s[0] <= max(p[0], r[0])
                and min(p[1], r[1]) <= s[1] <= max(p[1], r[1]))

    if d1 == 0 and on_seg(c, d, a):
        return True
    if d2 == 0 and on_seg(c, d, b):
        return True
    if d3 == 0 and on_seg(a, b, c):
        return True
    if d4 == 0 and on_seg(a, b, d):
        return True
    return False


def is_convex(xy: np.ndarray, tol: float = 1e-12) -> bool:
    d = np.roll(xy, -1, axis=0) - xy
    dn = np.roll(d, -1, axis=0)
    cross = d[:, 0] * dn[:, 1] - d[:, 1] * dn[:, 0]
    scale = _bbox_scale2(xy)
    return bool(np.all(cross >= -tol * scale))


def diameter(xy: np.ndarray) -> float:
    diff = xy[:, None, :] - xy[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1).max()))


@dataclass(frozen=True)
class ElementGeometry:
    """Everything the element routines need to know about one polygon."""

    coords: np.ndarray
    area: float
    node_average: np.ndarray
    edge_lengths: np.ndarray
    edge_normals: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @classmethod
    def from_polygon(cls, polygon, nodes) -> "ElementGeometry":
        xy = np.array(polygon_coords(polygon, nodes), dtype=float)
        area = signed_area(None, xy)
        if area < 0:
            raise DegenerateElement("element is oriented clockwise")
        return cls(
            coords=xy,
            area=area,
            node_average=xy.mean(axis=0),
            edge_lengths=edge_lengths(None, xy),
            edge_normals=edge_normals(None, xy),
        )
