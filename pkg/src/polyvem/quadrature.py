"""Gauss rules on triangles and segments.

Triangle rules are the symmetric Dunavant rules, stored in barycentric
coordinates with weights normalized to sum to one (multiply by the
triangle area).
"""

from __future__ import annotations

import numpy as np

from .geometry import fan_triangulate


def _orbit_s3(a):
    return [(a, a, 1.0 - 2.0 * a), (a, 1.0 - 2.0 * a, a), (1.0 - 2.0 * a, a, a)]


def _orbit_s6(a, b):
    c = 1.0 - a - b
    return [(a, b, c), (b, c, a), (c, a, b), (b, a, c), (a, c, b), (c, b, a)]


def _build(orbits):
    pts, wts = [], []
    for kind, args, w in orbits:
        if kind == "s1":
            group = [(1 / 3, 1 / 3, 1 / 3)]
        elif kind == "s3":
            group = _orbit_s3(*args)
        else:
            group = _orbit_s6(*args)
        pts.extend(group)
        wts.extend([w] * len(group))
    return np.array(pts), np.array(wts)


_TRIANGLE_RULES = {
    1: _build([("s1", (), 1.0)]),
    2: _build([("s3", (1 / 6,), 1 / 3)]),
    4: _build([
        ("s3", (0.445948490915965,), 0.223381589678011),
        ("s3", (0.091576213509771,), 0.109951743655322),
    ]),
    6: _build([
        ("s3", (0.249286745170910,), 0.116786275726379),
        ("s3", (0.063089014491502,), 0.050844906370207),
        ("s6", (0.310352451033784, 0.053145049844817), 0.082851075618374),
    ]),
}


def triangle_rule(order: int):
    """Barycentric points ``(q, 3)`` and weights ``(q,)`` exact to ``order``."""
    for k in sorted(_TRIANGLE_RULES):
        if k >= order:
            return _TRIANGLE_RULES[k]
    raise ValueError(f"no triangle rule of order {order}")


def triangle_points(tri: np.ndarray, order: int):
    """Physical quadrature points and weights (already scaled by area)."""
    bary, w = triangle_rule(order)
    tri = np.asarray(tri, dtype=float)
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
    return bary @ tri, w * area


def polygon_points(coords: np.ndarray, order: int):
    """Quadrature over a star-shaped polygon via its centroid fan."""
    tris = fan_triangulate(None, coords)
    pts, wts = [], []
    for tri in tris:
        p, w = triangle_points(tri, order)
        pts.append(p)
        wts.append(w)
    return np.vstack(pts), np.concatenate(wts)


def gauss_legendre_segment(a, b, n: int = 2):
    """Points on segment ``a -> b``, parameter ``s`` in [0, 1], and weights scaled by length."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    xi, w = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (xi + 1.0)
    length = float(np.hypot(*(b - a)))
    return a + s[:, None] * (b - a), s, 0.5 * w * length
