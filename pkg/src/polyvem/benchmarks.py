"""Built-in problems with known solutions."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np

from .mesher import Region
from .model import ESSENTIAL, NATURAL, Constraint, Material, ProblemConditions, PLANE_STRAIN
from .norms import ExactSolution
from .simulate import ELASTICITY, POISSON

BEAM_DEFAULTS = dict(P=-1000.0, E=1e7, nu=0.3, L=8.0, D=4.0)


@dataclass
class BenchmarkCase:
    name: str
    region: Region
    problem: str
    conditions: ProblemConditions
    exact: Optional[ExactSolution] = None


def _beam_constants(E, nu, D):
    e_bar = E / (1.0 - nu ** 2)
    nu_bar = nu / (1.0 - nu)
    inertia = D ** 3 / 12.0
    return e_bar, nu_bar, inertia


def beam_exact(x, y, P=-1000.0, E=1e7, nu=0.3, L=8.0, D=4.0):
    """Plane-strain displacement of a cantilever (clamped at x=0) under a parabolic end shear."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    e_bar, nu_bar, inertia = _beam_constants(E, nu, D)
    c = P / (6.0 * e_bar * inertia)
    ux = -c * y * ((6.0 * L - 3.0 * x) * x + (2.0 + nu_bar) * y ** 2 - 1.5 * D ** 2 * (1.0 + nu_bar))
    uy = c * (3.0 * nu_bar * y ** 2 * (L - x) + (3.0 * L - x) * x ** 2)
    return ux, uy


def beam_strain(x, y, P=-1000.0, E=1e7, nu=0.3, L=8.0, D=4.0):
    """[e11, e22, e12] of ``beam_exact``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    e_bar, nu_bar, inertia = _beam_constants(E, nu, D)
    k = P / (e_bar * inertia)
    e11 = -k * y * (L - x)
    e22 = k * nu_bar * y * (L - x)
    e12 = 0.5 * k * (1.0 + nu_bar) * (D ** 2 / 4.0 - y ** 2)
    return e11, e22, e12


def beam_traction(y, P=-1000.0, D=4.0):
    """Shear traction on the loaded end; integrates to P over the depth."""
    inertia = D ** 3 / 12.0
    return P / (2.0 * inertia) * (D ** 2 / 4.0 - np.asarray(y, dtype=float) ** 2)


def cantilever_beam(P=-1000.0, E=1e7, nu=0.3, L=8.0, D=4.0, plane_state=PLANE_STRAIN) -> BenchmarkCase:
    params = dict(P=P, E=E, nu=nu, L=L, D=D)
    region = Region.rectangle(0.0, -D / 2.0, L, D / 2.0)
    clamp = Constraint.segment(
        (0.0, -D / 2.0), (0.0, D / 2.0), kind=ESSENTIAL, direction="both",
        value=lambda x, y: beam_exact(x, y, **params), name="clamp",
    )
    load = Constraint.segment(
        (L, -D / 2.0), (L, D / 2.0), kind=NATURAL, direction="y",
        value=lambda x, y: beam_traction(y, P=P, D=D), name="end load",
    )
    conditions = ProblemConditions(material=Material(E, nu, plane_state), constraints=[clamp, load])
    exact = ExactSolution(
        u=lambda x, y: beam_exact(x, y, **params),
        strain=lambda x, y: beam_strain(x, y, **params),
    )
    return BenchmarkCase("beam", region, ELASTICITY, conditions, exact)


def poisson_source(x, y):
    return 32.0 * y * (1.0 - y) + 32.0 * x * (1.0 - x)


def poisson_exact(x, y):
    return 16.0 * x * y * (1.0 - x) * (1.0 - y)


def poisson_gradient(x, y):
    return (16.0 * y * (1.0 - y) * (1.0 - 2.0 * x), 16.0 * x * (1.0 - x) * (1.0 - 2.0 * y))


def _square_sides(value, kind=ESSENTIAL, direction="both"):
    corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    return [
        Constraint.segment(corners[i], corners[(i + 1) % 4], kind=kind, direction=direction, value=value)
        for i in range(4)
    ]


def poisson_manufactured() -> BenchmarkCase:
    region = Region.rectangle(0.0, 0.0, 1.0, 1.0)
    conditions = ProblemConditions(body_force=poisson_source, constraints=_square_sides(0.0))
    exact = ExactSolution(u=poisson_exact, strain=poisson_gradient)
    return BenchmarkCase("poisson", region, POISSON, conditions, exact)


PATCH_COEFFS = np.array([[0.1, 0.2, 0.3], [-0.05, 0.15, 0.25]])


def patch_field(x, y, coeffs=PATCH_COEFFS):
    c = np.asarray(coeffs)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return c[0, 0] + c[0, 1] * x + c[0, 2] * y, c[1, 0] + c[1, 1] * x + c[1, 2] * y


def patch_test(coeffs=PATCH_COEFFS, E=1.0, nu=0.3, plane_state=PLANE_STRAIN) -> BenchmarkCase:
    """Unit square with a linear displacement prescribed on the whole boundary."""
    c = np.asarray(coeffs, dtype=float)
    field = lambda x, y: patch_field(x, y, c)  # noqa: E731
    strain = (c[0, 1], c[1, 2], 0.5 * (c[0, 2] + c[1, 1]))
    region = Region.rectangle(0.0, 0.0, 1.0, 1.0)
    conditions = ProblemConditions(material=Material(E, nu, plane_state), constraints=_square_sides(field))
    exact = ExactSolution(u=field, strain=lambda x, y: strain)
    return BenchmarkCase("patch", region, ELASTICITY, conditions, exact)


def mbb_beam(E=1e7, nu=0.3, plane_state=PLANE_STRAIN):
    """Half MBB beam (3 x 1, tip load 0.5) shipped in the PolyMesher export layout."""
    from .formats import parse_polymesher

    text = resources.files("polyvem").joinpath("data/mbb_polymesher.txt").read_text(encoding="utf-8")
    mesh, conditions = parse_polymesher(text)
    conditions.material = Material(E, nu, plane_state)
    return mesh, conditions


CASES = {
    "beam": cantilever_beam,
    "poisson": poisson_manufactured,
    "patch": patch_test,
}
