import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from polyvem import vem
from polyvem.errors import DegenerateElement, DimensionError
from polyvem.fem import t3_laplacian_stiffness, t3_stiffness
from polyvem.geometry import ElementGeometry, area_centroid
from polyvem.model import Material, material_matrix

from conftest import UNIT_SQUARE, random_convex_polygon, random_triangle


def interleave(field):
    return np.asarray(field, dtype=float).reshape(-1)


def linear_samples(elem, grad, shift=(0.0, 0.0)):
    """Nodal samples of u(x) = shift + grad (x - xbar), interleaved."""
    dx = elem.coords - elem.node_average
    return interleave(np.asarray(shift) + dx @ np.asarray(grad).T)


def symbolic_square_stiffness(E, nu):
    """K_E of the unit square built from scratch with exact rational arithmetic."""
    t = sp.symbols("t")
    verts = [sp.Matrix([0, 0]), sp.Matrix([1, 0]), sp.Matrix([1, 1]), sp.Matrix([0, 1])]
    n = 4
    area = sp.Integer(1)
    xbar = sum(verts, sp.zeros(2, 1)) / n
    q = [sp.zeros(2, 1) for _ in range(n)]
    for e in range(n):
        a, b = verts[e], verts[(e + 1) % n]
        length = sp.sqrt((b - a).dot(b - a))
        normal = sp.Matrix([b[1] - a[1], -(b[0] - a[0])]) / length
        # hat functions restricted to the edge: 1-t at a, t at b
        q[e] += normal * length * sp.integrate(1 - t, (t, 0, 1)) / (2 * area)
        q[(e + 1) % n] += normal * length * sp.integrate(t, (t, 0, 1)) / (2 * area)
    hr, wr, hc, wc = (sp.zeros(2 * n, 3) for _ in range(4))
    for i in range(n):
        dx, dy = verts[i] - xbar
        hr[2 * i, :] = sp.Matrix([[1, 0, dy]])
        hr[2 * i + 1, :] = sp.Matrix([[0, 1, -dx]])
        wr[2 * i, :] = sp.Matrix([[sp.Rational(1, n), 0, q[i][1]]])
        wr[2 * i + 1, :] = sp.Matrix([[0, sp.Rational(1, n), -q[i][0]]])
        hc[2 * i, :] = sp.Matrix([[dx, 0, dy]])
        hc[2 * i + 1, :] = sp.Matrix([[0, dy, dx]])
        wc[2 * i, :] = sp.Matrix([[2 * q[i][0], 0, q[i][1]]])
        wc[2 * i + 1, :] = sp.Matrix([[0, 2 * q[i][1], q[i][0]]])
    E, nu = sp.nsimplify(E), sp.nsimplify(nu)
    c = E / ((1 + nu) * (1 - 2 * nu))
    D = c * sp.Matrix([[1 - nu, nu, 0], [nu, 1 - nu, 0], [0, 0, 2 * (1 - 2 * nu)]])
    pp = hr * wr.T + hc * wc.T
    alpha = area * D.trace() / (hc.T * hc).trace()
    r = sp.eye(2 * n) - pp
    k = area * wc * D * wc.T + alpha * r.T * r
    return np.array(k.evalf(30).tolist(), dtype=float), float(alpha), float((hc.T * hc).trace())


class TestEdgeAverages:
    def test_unit_square_origin_row(self, unit_square):
        assert_allclose(vem.edge_averages(unit_square).q[0], (-0.25, -0.25), atol=1e-15)

    def test_unit_square_all_rows(self, unit_square):
        expected = 0.25 * np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]])
        assert_allclose(vem.edge_averages(unit_square).q, expected, atol=1e-15)

    def test_phi_bar(self, pentagon):
        assert vem.edge_averages(pentagon).phi_bar == pytest.approx(0.2)

    def test_columns_sum_to_zero(self, rng):
        for n in range(3, 13):
            elem = ElementGeometry.from_polygon(None, random_convex_polygon(rng, n, scale=5.0))
            assert_allclose(vem.edge_averages(elem).q.sum(axis=0), 0.0, atol=1e-12)

    def test_first_moment(self, pentagon):
        # sum_a q_a x_a^T = (1/2|E|) * boundary integral of x n^T = I/2 for a linear interpolant
        q = vem.edge_averages(pentagon).q
        assert_allclose(pentagon.coords.T @ q, 0.5 * np.eye(2), atol=1e-14)


class TestProjections:
    def test_translation_reproduced(self, pentagon):
        d = np.tile([1.0, 0.0], pentagon.n_nodes)
        assert_allclose(vem.elastic_projection(pentagon).p_p @ d, d, atol=1e-14)

    def test_rotation_is_rigid(self, pentagon):
        dx = pentagon.coords - pentagon.node_average
        d = interleave(np.column_stack([dx[:, 1], -dx[:, 0]]))
        proj = vem.elastic_projection(pentagon)
        assert_allclose(proj.p_c @ d, 0.0, atol=1e-14)
        assert_allclose(proj.p_r @ d, d, atol=1e-14)

    def test_symmetric_gradient_recovered(self, rng):
        elem = ElementGeometry.from_polygon(None, random_convex_polygon(rng, 5))
        b = rng.normal(size=(2, 2))
        b = 0.5 * (b + b.T)
        d = linear_samples(elem, b)
        assert_allclose(vem.elastic_projection(elem).w_c.T @ d, (b[0, 0], b[1, 1], b[0, 1]), atol=1e-13)

    @pytest.mark.parametrize("n", [3, 4, 7, 12])
    def test_projector_is_idempotent(self, rng, n):
        elem = ElementGeometry.from_polygon(None, random_convex_polygon(rng, n))
        pp = vem.elastic_projection(elem).p_p
        assert_allclose(pp @ pp, pp, atol=1e-12)

    def test_biorthogonality(self, pentagon):
        proj = vem.elastic_projection(pentagon)
        assert_allclose(proj.w_r.T @ proj.h_r, np.eye(3), atol=1e-14)
        assert_allclose(proj.w_c.T @ proj.h_c, np.eye(3), atol=1e-14)
        assert_allclose(proj.w_r.T @ proj.h_c, 0.0, atol=1e-14)
        assert_allclose(proj.w_c.T @ proj.h_r, 0.0, atol=1e-14)

    def test_poisson_projector_reproduces_linears(self, pentagon):
        proj = vem.poisson_projection(pentagon)
        v = 2.0 + pentagon.coords @ np.array([0.3, -1.1])
        assert_allclose(proj.p_p @ v, v, atol=1e-13)


class TestElasticStiffness:
    def test_square_matches_symbolic_oracle(self, unit_square):
        d = material_matrix(Material(1.0, 0.3))
        k_ref, alpha_ref, tr_hc = symbolic_square_stiffness(1.0, 0.3)
        ke = vem.elastic_stiffness(unit_square, d)
        assert tr_hc == pytest.approx(4.0)
        assert ke.alpha == pytest.approx(alpha_ref, rel=1e-14)
        assert ke.alpha == pytest.approx(np.trace(d) / 4.0, rel=1e-14)
        assert_allclose(ke.k, k_ref, rtol=1e-13, atol=1e-14)

    def test_symmetric_psd_with_rigid_kernel(self, pentagon, steel_like):
        k = vem.elastic_stiffness(pentagon, steel_like).k
        assert_allclose(k, k.T, rtol=0, atol=1e-12 * np.abs(k).max())
        w = np.linalg.eigvalsh(k)
        assert np.sum(w < 1e-10 * w.max()) == 3
        assert w.min() > -1e-10 * w.max()

    def test_stability_vanishes_on_linear_fields(self, rng, steel_like):
        elem = ElementGeometry.from_polygon(None, random_convex_polygon(rng, 6))
        d = linear_samples(elem, rng.normal(size=(2, 2)), shift=rng.normal(size=2))
        ke = vem.elastic_stiffness(elem, steel_like)
        assert_allclose(ke.stability @ d, 0.0, atol=1e-9 * np.abs(ke.k).max())

    def test_energy_of_constant_strain(self, pentagon, steel_like):
        b = np.array([[0.01, 0.002], [0.002, -0.003]])
        d = linear_samples(pentagon, b)
        eps = np.array([b[0, 0], b[1, 1], b[0, 1]])
        energy = d @ vem.elastic_stiffness(pentagon, steel_like).k @ d
        assert energy == pytest.approx(pentagon.area * eps @ steel_like @ eps, rel=1e-12)

    @pytest.mark.parametrize("scale", [1e-3, 1.0, 1e3])
    def test_scale_invariance(self, scale, steel_like):
        base = ElementGeometry.from_polygon(None, random_convex_polygon(np.random.default_rng(1), 5))
        big = ElementGeometry.from_polygon(None, scale * base.coords)
        assert_allclose(vem.elastic_stiffness(big, steel_like).k,
                        vem.elastic_stiffness(base, steel_like).k, rtol=1e-9, atol=1e-9 * 1e7)

    def test_rotation_covariance(self, rng, steel_like):
        elem = ElementGeometry.from_polygon(None, random_convex_polygon(rng, 7))
        th = 0.7
        r = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        turned = ElementGeometry.from_polygon(None, elem.coords @ r.T)
        big_r = np.kron(np.eye(elem.n_nodes), r)
        k0 = vem.elastic_stiffness(elem, steel_like).k
        k1 = vem.elastic_stiffness(turned, steel_like).k
        assert_allclose(big_r.T @ k1 @ big_r, k0, atol=1e-8 * np.abs(k0).max())

    def test_gamma_scales_stability_only(self, pentagon, steel_like):
        a = vem.elastic_stiffness(pentagon, steel_like, gamma=1.0)
        b = vem.elastic_stiffness(pentagon, steel_like, gamma=3.0)
        assert_allclose(b.consistency, a.consistency)
        assert_allclose(b.stability, 3.0 * a.stability, rtol=1e-13)

    def test_bad_gamma(self, pentagon, steel_like):
        with pytest.raises(ValueError):
            vem.elastic_stiffness(pentagon, steel_like, gamma=0.0)

    def test_triangle_equals_cst(self, rng):
        for _ in range(10):
            tri = random_triangle(rng)
            d = material_matrix(Material(2.0, 0.2))
            ke = vem.elastic_stiffness(ElementGeometry.from_polygon(None, tri), d)
            assert_allclose(ke.stability, 0.0, atol=1e-12)
            assert_allclose(ke.k, t3_stiffness(tri, d), rtol=1e-10, atol=1e-12)


class TestPoissonStiffness:
    def test_square_consistency_diagonal(self, unit_square):
        assert_allclose(np.diag(vem.poisson_stiffness(unit_square).consistency), 0.5, atol=1e-15)

    def test_row_sums_vanish(self, pentagon):
        assert_allclose(vem.poisson_stiffness(pentagon).k.sum(axis=1), 0.0, atol=1e-13)

    def test_single_constant_mode(self, rng):
        elem = ElementGeometry.from_polygon(None, random_convex_polygon(rng, 9))
        w = np.linalg.eigvalsh(vem.poisson_stiffness(elem).k)
        assert np.sum(w < 1e-10 * w.max()) == 1

    def test_triangle_equals_laplacian(self, rng):
        tri = random_triangle(rng)
        k = vem.poisson_stiffness(ElementGeometry.from_polygon(None, tri)).k
        assert_allclose(k, t3_laplacian_stiffness(tri), rtol=1e-10, atol=1e-13)


class TestLoads:
    def test_constant_body_force_square(self, unit_square):
        f = vem.body_force_vector(unit_square, lambda x, y: (0.0, -1.0))
        assert_allclose(f.reshape(4, 2), np.tile([0.0, -0.25], (4, 1)), atol=1e-15)

    def test_no_body_force(self, pentagon):
        assert_allclose(vem.body_force_vector(pentagon, None), np.zeros(10))

    def test_body_force_total(self, pentagon):
        # the fan rule integrates a linear load exactly, so the total is |E| b(centroid)
        f = vem.body_force_vector(pentagon, lambda x, y: (x, 2.0 * y), 2).reshape(-1, 2)
        xc = area_centroid(None, pentagon.coords)
        assert_allclose(f.sum(axis=0), pentagon.area * np.array([xc[0], 2.0 * xc[1]]), rtol=1e-13)

    def test_constant_traction_split(self):
        f = vem.traction_force_vector(((8.0, 0.0), (8.0, 1.0)), lambda x, y: (0.0, -1000.0 / 4.0))
        assert_allclose(f, [0.0, -125.0, 0.0, -125.0])

    def test_linear_traction_uses_edge_average(self):
        f = vem.traction_force_vector(((0.0, 0.0), (1.0, 0.0)), lambda x, y: x, 1)
        assert_allclose(f, [0.25, 0.25])

    def test_zero_traction(self):
        assert_allclose(vem.traction_force_vector(((0, 0), (1, 0)), None), np.zeros(4))


class TestStrainProjection:
    def test_rigid_rotation(self, pentagon):
        dx = pentagon.coords - pentagon.node_average
        d = interleave(np.column_stack([dx[:, 1], -dx[:, 0]]))
        assert_allclose(vem.project_strain(pentagon, d), 0.0, atol=1e-14)

    def test_unit_stretch(self, pentagon):
        dx = pentagon.coords - pentagon.node_average
        d = interleave(np.column_stack([dx[:, 0], np.zeros(5)]))
        assert_allclose(vem.project_strain(pentagon, d), (1.0, 0.0, 0.0), atol=1e-14)

    def test_poisson_gradient_near_critical_point(self):
        h = 1e-3
        xy = 0.5 + h * np.array([[-1.0, -1.0], [1.0, -0.8], [1.2, 1.0], [-0.9, 1.1]])
        elem = ElementGeometry.from_polygon(None, xy)
        u = 16 * xy[:, 0] * xy[:, 1] * (1 - xy[:, 0]) * (1 - xy[:, 1])
        assert_allclose(vem.project_strain(elem, u), 0.0, atol=20 * h)

    def test_length_mismatch(self, pentagon):
        with pytest.raises(DimensionError):
            vem.project_strain(pentagon, np.zeros(7))

    def test_projected_field_exact_for_linear(self, pentagon):
        g = np.array([[0.3, -0.2], [0.5, 0.1]])
        d = linear_samples(pentagon, g, shift=(1.0, 2.0))
        pts = np.array([[0.5, 0.5], [1.5, 1.0]])
        expected = np.array([1.0, 2.0]) + (pts - pentagon.node_average) @ g.T
        assert_allclose(vem.projected_field(pentagon, d, pts), expected, atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(3, 12),
    seed=st.integers(0, 2 ** 32 - 1),
    scale=st.floats(1e-2, 1e2),
)
def test_kernel_dimensions_property(n, seed, scale):
    rng = np.random.default_rng(seed)
    elem = ElementGeometry.from_polygon(None, random_convex_polygon(rng, n, scale=scale))
    k = vem.elastic_stiffness(elem, material_matrix(Material(1.0, 0.25))).k
    w = np.linalg.eigvalsh(k)
    assert np.sum(w < 1e-10 * w.max()) == 3
    kp = vem.poisson_stiffness(elem).k
    wp = np.linalg.eigvalsh(kp)
    assert np.sum(wp < 1e-10 * wp.max()) == 1


def test_degenerate_element_rejected():
    with pytest.raises(DegenerateElement):
        ElementGeometry.from_polygon(None, np.array([[0.0, 0.0], [1e-9, 0.0], [0.0, 1e-9], [0.0, 0.0]]))
