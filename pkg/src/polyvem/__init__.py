"""Lowest-order virtual element method for 2D elasticity and Poisson on polygonal meshes."""

from .assembly import DofMap, assemble, impose_essential, solve
from .benchmarks import cantilever_beam, patch_test, poisson_manufactured
from .geometry import ElementGeometry
from .mesh import Mesh
from .mesher import Region, SeedRule, build_triangular_mesh, build_voronoi_mesh, generate_seeds, voronoi_mesh
from .model import BodyForce, Constraint, Material, ProblemConditions, material_matrix
from .norms import ExactSolution, error_report, h1_error, l2_error
from .simulate import Solution, simulate

__version__ = "0.1.0"

__all__ = [
    "BodyForce", "Constraint", "DofMap", "ElementGeometry", "ExactSolution", "Material", "Mesh",
    "ProblemConditions", "Region", "SeedRule", "Solution", "assemble", "build_triangular_mesh",
    "build_voronoi_mesh", "cantilever_beam", "error_report", "generate_seeds", "h1_error",
    "impose_essential", "l2_error", "material_matrix", "patch_test", "poisson_manufactured",
    "simulate", "solve", "voronoi_mesh",
]
