import numpy as np
import pytest
from numpy.testing import assert_allclose

from polyvem import benchmarks, vem
from polyvem.assembly import DofMap, assemble
from polyvem.errors import NormUndefined, Unsupported
from polyvem.fem import t3_stiffness
from polyvem.mesh import Mesh
from polyvem.mesher import Region, SeedRule, build_triangular_mesh, voronoi_mesh
from polyvem.model import BodyForce, Constraint, Material, ProblemConditions, material_matrix
from polyvem.norms import ExactSolution, error_report, h1_error, l2_error
from polyvem.simulate import ELASTICITY, POISSON, simulate


@pytest.fixture(scope="module")
def patch_case():
    return benchmarks.patch_test()


@pytest.fixture(scope="module")
def patch_mesh():
    return voronoi_mesh(Region.rectangle(0, 0, 1, 1), SeedRule("random_double", rng_seed=3), 5, 5)


class TestBenchmarkFunctions:
    def test_poisson_center(self):
        assert benchmarks.poisson_exact(0.5, 0.5) == pytest.approx(1.0)
        assert benchmarks.poisson_source(0.5, 0.5) == pytest.approx(16.0)

    def test_poisson_source_is_minus_laplacian(self):
        x, y, h = 0.3, 0.6, 1e-4
        u = benchmarks.poisson_exact
        lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4 * u(x, y)) / h ** 2
        assert -lap == pytest.approx(benchmarks.poisson_source(x, y), rel=1e-6)

    def test_beam_root_and_tip(self):
        P, E, nu, L, D = -1000.0, 1e7, 0.3, 8.0, 4.0
        e_bar = E / (1 - nu ** 2)
        inertia = D ** 3 / 12
        assert_allclose(benchmarks.beam_exact(0.0, 0.0), (0.0, 0.0), atol=1e-18)
        ux, uy = benchmarks.beam_exact(L, 0.0)
        assert ux == pytest.approx(0.0, abs=1e-18)
        assert uy == pytest.approx(P * L ** 3 / (3 * e_bar * inertia), rel=1e-14)

    def test_beam_strain_is_derivative(self):
        x, y, h = 3.0, 0.7, 1e-5
        u = lambda x, y: np.array(benchmarks.beam_exact(x, y))  # noqa: E731
        dudx = (u(x + h, y) - u(x - h, y)) / (2 * h)
        dudy = (u(x, y + h) - u(x, y - h)) / (2 * h)
        e11, e22, e12 = benchmarks.beam_strain(x, y)
        assert_allclose([e11, e22, e12], [dudx[0], dudy[1], 0.5 * (dudy[0] + dudx[1])], rtol=1e-6)

    def test_beam_traction_resultant(self):
        y = np.linspace(-2, 2, 2001)
        assert np.trapezoid(benchmarks.beam_traction(y), y) == pytest.approx(-1000.0, rel=1e-6)

    def test_beam_equilibrium(self):
        # div sigma = 0 in plane strain; central differences of the exact stress
        from polyvem.model import material_matrix
        d = material_matrix(Material(1e7, 0.3))
        sig = lambda x, y: d @ np.array(benchmarks.beam_strain(x, y)) * [1, 1, 0.5]  # noqa: E731
        x, y, h = 2.5, -0.4, 1e-4
        s11x = (sig(x + h, y)[0] - sig(x - h, y)[0]) / (2 * h)
        s12y = (sig(x, y + h)[2] - sig(x, y - h)[2]) / (2 * h)
        assert abs(s11x + s12y) < 1e-6 * abs(s11x)


class TestPatch:
    def test_nodal_reproduction(self, patch_case, patch_mesh):
        sol = simulate(patch_mesh, patch_case.conditions)
        exact = np.column_stack(benchmarks.patch_field(*patch_mesh.nodes.T))
        assert_allclose(sol.values, exact, atol=1e-10)

    def test_norms_vanish(self, patch_case, patch_mesh):
        rep = error_report(simulate(patch_mesh, patch_case.conditions), patch_case.exact)
        assert rep.l2_relative < 1e-12
        assert rep.h1_relative < 1e-10

    @pytest.mark.parametrize("gamma", [0.1, 10.0])
    def test_independent_of_stability(self, patch_case, patch_mesh, gamma):
        sol = simulate(patch_mesh, patch_case.conditions, gamma=gamma)
        exact = np.column_stack(benchmarks.patch_field(*patch_mesh.nodes.T))
        assert_allclose(sol.values, exact, atol=1e-10)

    def test_cg_solver(self, patch_case, patch_mesh):
        sol = simulate(patch_mesh, patch_case.conditions, solver="cg")
        exact = np.column_stack(benchmarks.patch_field(*patch_mesh.nodes.T))
        assert_allclose(sol.values, exact, atol=1e-8)

    def test_fem_patch(self, patch_case):
        mesh = build_triangular_mesh(patch_case.region, 3, 3)
        sol = simulate(mesh, patch_case.conditions, method="fem")
        exact = np.column_stack(benchmarks.patch_field(*mesh.nodes.T))
        assert_allclose(sol.values, exact, atol=1e-12)


class TestNeumannProblems:
    def test_uniaxial_tension(self):
        """Bar clamped by rollers on the left, pulled on the right: exact linear solution."""
        E, nu, t = 2.0, 0.25, 0.3
        mesh = voronoi_mesh(Region.rectangle(0, 0, 2, 1), SeedRule("random_double", rng_seed=9), 6, 3)
        cond = ProblemConditions(
            material=Material(E, nu, "plane_stress"),
            constraints=[
                Constraint.segment((0, 0), (0, 1), direction="x", value=0.0),
                Constraint.point((0, 0), direction="y", value=0.0),
                Constraint.segment((2, 0), (2, 1), kind="natural", direction="x", value=t),
            ],
        )
        sol = simulate(mesh, cond)
        x, y = mesh.nodes.T
        assert_allclose(sol.values[:, 0], t / E * x, atol=1e-12)
        assert_allclose(sol.values[:, 1], -nu * t / E * y, atol=1e-12)

    def test_vem_stiffness_matches_fem_on_triangles(self):
        case = benchmarks.cantilever_beam()
        mesh = build_triangular_mesh(case.region, 8, 4)
        d = material_matrix(case.conditions.material)
        dm = DofMap(mesh.n_nodes, 2)
        k_vem = assemble(mesh, lambda k: vem.elastic_stiffness(mesh.element_geometry(k), d).k, None, dm).k
        k_fem = assemble(mesh, lambda k: t3_stiffness(mesh.element_coords(k), d), None, dm).k
        assert abs(k_vem - k_fem).max() < 1e-10 * abs(k_fem).max()

    @staticmethod
    def column(n, method):
        """Column under self-weight with sliding sides; exact u_y = -(y - y^2/2) for E = 1, nu = 0."""
        mesh = build_triangular_mesh(Region.rectangle(0, 0, 1, 1), n, n)
        cond = ProblemConditions(
            material=Material(1.0, 0.0, "plane_stress"),
            body_force=BodyForce(fy=lambda x, y: -1.0),
            constraints=[
                Constraint.segment((0, 0), (1, 0), direction="both", value=0.0),
                Constraint.segment((0, 0), (0, 1), direction="x", value=0.0),
                Constraint.segment((1, 0), (1, 1), direction="x", value=0.0),
            ],
        )
        sol = simulate(mesh, cond, method=method)
        y = mesh.nodes[:, 1]
        return sol.values, np.abs(sol.values[:, 1] + (y - 0.5 * y ** 2)).max()

    def test_body_force_column(self):
        # a constant load lumps identically in both methods on triangles
        (u_vem, e4), (u_fem, _) = self.column(4, "vem"), self.column(4, "fem")
        assert_allclose(u_vem, u_fem, atol=1e-13)
        _, e8 = self.column(8, "vem")
        _, e16 = self.column(16, "vem")
        assert e4 > e8 > e16
        assert np.log2(e8 / e16) > 1.5

    def test_poisson_vem_fem_triangles(self):
        case = benchmarks.poisson_manufactured()
        mesh = build_triangular_mesh(case.region, 6, 6)
        a = simulate(mesh, case.conditions, problem=POISSON, method="vem")
        b = simulate(mesh, case.conditions, problem=POISSON, method="fem")
        # loads differ (cell average vs consistent), stiffness agrees
        assert np.abs(a.values - b.values).max() < 0.05

    def test_fem_on_polygons_unsupported(self, patch_case, patch_mesh):
        with pytest.raises(Unsupported):
            simulate(patch_mesh, patch_case.conditions, method="fem")

    def test_unknown_problem(self, patch_case, patch_mesh):
        with pytest.raises(ValueError):
            simulate(patch_mesh, patch_case.conditions, problem="heat")

    def test_elasticity_needs_material(self, patch_mesh):
        with pytest.raises(ValueError):
            simulate(patch_mesh, ProblemConditions(), problem=ELASTICITY)


class TestNorms:
    @pytest.fixture(scope="class")
    @classmethod
    def poisson_solution(cls):
        case = benchmarks.poisson_manufactured()
        mesh = voronoi_mesh(case.region, SeedRule("constant_alternating"), 8, 8)
        return case, simulate(mesh, case.conditions, problem=POISSON)

    def test_quadrature_order_insensitive(self, poisson_solution):
        case, sol = poisson_solution
        a, b = l2_error(sol, case.exact, order=4), l2_error(sol, case.exact, order=6)
        assert abs(a - b) < 1e-3 * b
        a, b = h1_error(sol, case.exact, order=4), h1_error(sol, case.exact, order=6)
        assert abs(a - b) < 1e-3 * b

    def test_renumbering_invariance(self, poisson_solution):
        case, sol = poisson_solution
        mesh = sol.mesh
        perm = np.random.default_rng(0).permutation(mesh.n_nodes)
        inv = np.argsort(perm)
        shuffled = Mesh(nodes=mesh.nodes[perm], elements=[tuple(inv[list(e)]) for e in mesh.elements[::-1]])
        other = simulate(shuffled, case.conditions, problem=POISSON)
        assert_allclose(other.values[inv], sol.values, atol=1e-12)
        assert l2_error(other, case.exact) == pytest.approx(l2_error(sol, case.exact), rel=1e-10)

    def test_report_fields(self, poisson_solution):
        case, sol = poisson_solution
        rep = error_report(sol, case.exact)
        assert rep.dof_count == sol.mesh.n_nodes
        assert rep.h_max == pytest.approx(sol.mesh.h_max())
        assert 0 < rep.l2_relative < rep.h1_relative < 1

    def test_zero_exact_solution(self, poisson_solution):
        _, sol = poisson_solution
        zero = ExactSolution(u=lambda x, y: 0.0, strain=lambda x, y: (0.0, 0.0))
        with pytest.raises(NormUndefined):
            l2_error(sol, zero)
