"""Shared fixtures and polygon generators."""

import sys

import numpy as np
import pytest

from polyvem.geometry import ElementGeometry
from polyvem.mesh import Mesh
from polyvem.model import Material, material_matrix

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
PENTAGON = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 2.0], [0.0, 1.0]])


def random_convex_polygon(rng, n_vertices, scale=1.0, shift=(0.0, 0.0)):
    """Convex CCW polygon: sorted random angles on a jittered ellipse."""
    while True:
        theta = np.sort(rng.uniform(0.0, 2.0 * np.pi, n_vertices))
        if np.min(np.diff(np.r_[theta, theta[0] + 2.0 * np.pi])) < 0.05:
            continue
        a, b = rng.uniform(0.5, 2.0, 2)
        xy = np.column_stack([a * np.cos(theta), b * np.sin(theta)])
        return scale * xy + np.asarray(shift)


def random_triangle(rng, scale=1.0):
    while True:
        xy = rng.uniform(-1.0, 1.0, (3, 2)) * scale
        area = 0.5 * ((xy[1, 0] - xy[0, 0]) * (xy[2, 1] - xy[0, 1])
                      - (xy[2, 0] - xy[0, 0]) * (xy[1, 1] - xy[0, 1]))
        if abs(area) > 0.05 * scale ** 2:
            return xy if area > 0 else xy[::-1].copy()


def random_material(rng):
    state = rng.choice(["plane_strain", "plane_stress"])
    return Material(float(rng.uniform(0.5, 200.0)), float(rng.uniform(0.0, 0.45)), str(state))


@pytest.fixture
def rng():
    return np.random.default_rng(20260318)


@pytest.fixture
def unit_square():
    return ElementGeometry.from_polygon(None, UNIT_SQUARE)


@pytest.fixture
def pentagon():
    return ElementGeometry.from_polygon(None, PENTAGON)


@pytest.fixture
def steel_like():
    return material_matrix(Material(1e7, 0.3))


@pytest.fixture
def square_2x2():
    """Unit square split into four 0.5 x 0.5 quads."""
    xs = np.linspace(0.0, 1.0, 3)
    nodes = np.array([[x, y] for y in xs for x in xs])
    elements = []
    for j in range(2):
        for i in range(2):
            n0 = 3 * j + i
            elements.append((n0, n0 + 1, n0 + 4, n0 + 3))
    return Mesh(nodes=nodes, elements=elements)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
