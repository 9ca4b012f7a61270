import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import surfquad as sq
from surfquad.errors import DimensionMismatch
from surfquad.interp import (interp_gradient_defect, poly_eval, poly_grad,
                             random_poly)
from surfquad.quad import monomial_integral


def ref_triangle_points(draw_s, draw_t):
    # maps two unit draws into the reference triangle
    s = draw_s
    t = draw_t * (1.0 - s)
    return s, t


unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestNodes:
    @pytest.mark.parametrize("k", [1, 2, 3, 4, 6, 8])
    def test_count_and_lattice(self, k):
        ns = sq.reference_nodes(k)
        assert ns.count == (k + 1) * (k + 2) // 2
        assert np.array_equal(ns.nodes, ns.lattice / k)
        bary = np.column_stack([1 - ns.nodes.sum(axis=1), ns.nodes])
        assert np.min(bary) >= -1e-15

    def test_vertex_ordering(self):
        ns = sq.reference_nodes(3)
        assert np.allclose(ns.nodes[0], [0, 0])
        assert np.allclose(ns.nodes[1], [0, 1])
        assert np.allclose(ns.nodes[2], [1, 0])


class TestBasis:
    @pytest.mark.parametrize("k", [1, 2, 3, 5, 8])
    def test_cardinality(self, k):
        basis = sq.lagrange_basis(k)
        vals = basis.eval(basis.nodes)
        assert np.max(np.abs(vals - np.eye(basis.count))) < 1e-10

    def test_linear_is_barycentric(self):
        basis = sq.lagrange_basis(1)
        assert np.allclose(sq.eval_basis(basis, (1 / 3, 1 / 3)),
                           [1 / 3, 1 / 3, 1 / 3])

    def test_node_hit_gives_unit_vector(self):
        basis = sq.lagrange_basis(4)
        vals = sq.eval_basis(basis, basis.nodes[7])
        expect = np.zeros(basis.count)
        expect[7] = 1.0
        assert np.max(np.abs(vals - expect)) < 1e-10

    def test_quadratic_edge_midpoint_vertex_entry(self):
        basis = sq.lagrange_basis(2)
        vals = sq.eval_basis(basis, (0.5, 0.5))
        assert abs(vals[0]) < 1e-12          # opposite vertex (0,0)

    @settings(max_examples=50, deadline=None)
    @given(unit, unit)
    def test_partition_of_unity(self, a, b):
        s, t = ref_triangle_points(a, b)
        basis = sq.lagrange_basis(4)
        assert abs(sq.eval_basis(basis, (s, t)).sum() - 1.0) < 1e-10

    def test_linear_gradients(self):
        basis = sq.lagrange_basis(1)
        g = sq.eval_basis_grad(basis, (0.3, 0.2))
        assert np.allclose(g[0], [-1, -1])   # vertex (0,0)
        assert np.allclose(g[1], [0, 1])     # vertex (0,1)
        assert np.allclose(g[2], [1, 0])     # vertex (1,0)

    @settings(max_examples=30, deadline=None)
    @given(unit, unit)
    def test_gradient_sums_vanish(self, a, b):
        s, t = ref_triangle_points(a, b)
        g = sq.eval_basis_grad(sq.lagrange_basis(5), (s, t))
        assert np.max(np.abs(g.sum(axis=0))) < 1e-9

    @pytest.mark.parametrize("k", [2, 4])
    def test_gradient_matches_finite_differences(self, k, rng):
        basis = sq.lagrange_basis(k)
        h = 1e-6
        for _ in range(20):
            s = rng.uniform(0.05, 0.9)
            t = rng.uniform(0.05, 0.95) * (1 - s)
            g = sq.eval_basis_grad(basis, (s, t))
            fd_s = (sq.eval_basis(basis, (s + h, t))
                    - sq.eval_basis(basis, (s - h, t))) / (2 * h)
            fd_t = (sq.eval_basis(basis, (s, t + h))
                    - sq.eval_basis(basis, (s, t - h))) / (2 * h)
            assert np.max(np.abs(g[:, 0] - fd_s)) < 1e-5
            assert np.max(np.abs(g[:, 1] - fd_t)) < 1e-5


class TestInterpolate:
    def test_reproduces_coordinates(self, rng):
        basis = sq.lagrange_basis(3)
        for _ in range(10):
            s = rng.uniform(0, 1)
            t = rng.uniform(0, 1) * (1 - s)
            out = sq.interpolate(basis, basis.nodes, (s, t))
            assert np.allclose(out, [s, t], atol=1e-12)

    def test_exact_for_degree_k(self, rng):
        basis = sq.lagrange_basis(3)
        f = lambda p: p[:, 0] ** 2 * p[:, 1]
        nodal = f(basis.nodes)
        for _ in range(50):
            s = rng.uniform(0, 1)
            t = rng.uniform(0, 1) * (1 - s)
            got = sq.interpolate(basis, nodal, (s, t))
            assert abs(got - s * s * t) < 1e-12

    def test_not_exact_beyond_degree(self):
        basis = sq.lagrange_basis(2)
        nodal = basis.nodes[:, 0] ** 4
        pts = np.array([[s, t] for s in np.linspace(0, 1, 40)
                        for t in np.linspace(0, 1, 40) if s + t <= 1])
        err = np.abs(basis.eval(pts) @ nodal - pts[:, 0] ** 4)
        assert err.max() > 1e-3

    def test_dimension_mismatch(self):
        basis = sq.lagrange_basis(2)
        with pytest.raises(DimensionMismatch):
            sq.interpolate(basis, np.zeros(4), (0.2, 0.2))


class TestGradientDefect:
    """Parity of the mean interpolation-gradient defect on the triangle."""

    @staticmethod
    def symbolic_defect(k, coeffs):
        # independent oracle: expand (p - I_k p) in monomials and integrate
        # term by term with the exact factorial formula
        basis = sq.lagrange_basis(k)
        nodal = poly_eval(coeffs, basis.nodes)
        interp_mono = basis.coeffs @ nodal      # monomial coeffs of I_k p
        n = coeffs.shape[0]
        diff = np.array(coeffs, dtype=float)
        for (a, b), c in zip(basis.powers, interp_mono):
            diff[a, b] -= c
        ds, dt = poly_grad(diff)
        total_s = sum(ds[a, b] * monomial_integral(a, b)
                      for a in range(n) for b in range(n) if ds[a, b])
        total_t = sum(dt[a, b] * monomial_integral(a, b)
                      for a in range(n) for b in range(n) if dt[a, b])
        return total_s, total_t

    def test_even_k2_cubic_monomial(self):
        coeffs = np.zeros((4, 4))
        coeffs[3, 0] = 1.0
        ds, dt = interp_gradient_defect(2, coeffs)
        assert abs(ds) < 1e-12 and abs(dt) < 1e-12

    def test_degree_at_most_k_exact(self, rng):
        coeffs = random_poly(2, rng)
        ds, dt = interp_gradient_defect(2, coeffs)
        assert abs(ds) < 1e-13 and abs(dt) < 1e-13

    def test_odd_k3_counterexample(self):
        coeffs = np.zeros((5, 5))
        coeffs[4, 0] = 1.0
        ds, dt = interp_gradient_defect(3, coeffs)
        assert max(abs(ds), abs(dt)) > 1e-6
        # oracle agreement
        os_, ot_ = self.symbolic_defect(3, coeffs)
        assert ds == pytest.approx(os_, abs=1e-12)
        assert dt == pytest.approx(ot_, abs=1e-12)

    @pytest.mark.parametrize("k,bound", [(2, 1e-11), (4, 1e-11), (6, 1e-11),
                                         (8, 1e-10)])
    def test_even_degrees_vanish(self, k, bound):
        # k=8 sits above 1e-11 in float64: the equidistant degree-8 basis
        # conditioning amplifies rounding to ~3e-11 of the coefficient scale
        rng = np.random.default_rng(990 + k)
        for _ in range(100):
            coeffs = random_poly(k + 1, rng)
            scale = np.abs(coeffs).max()
            ds, dt = interp_gradient_defect(k, coeffs)
            assert abs(ds) <= bound * scale
            assert abs(dt) <= bound * scale

    @pytest.mark.parametrize("k", [3, 5])
    def test_odd_degrees_defective(self, k, rng):
        worst = 0.0
        for _ in range(20):
            coeffs = random_poly(k + 1, rng)
            ds, dt = interp_gradient_defect(k, coeffs)
            worst = max(worst, abs(ds), abs(dt))
        assert worst > 1e-6

    def test_quadrature_matches_symbolic_oracle(self, rng):
        for k in (2, 3, 4):
            coeffs = random_poly(k + 1, rng)
            got = interp_gradient_defect(k, coeffs)
            want = self.symbolic_defect(k, coeffs)
            assert got[0] == pytest.approx(want[0], abs=1e-11)
            assert got[1] == pytest.approx(want[1], abs=1e-11)


class TestChebyshev:
    def test_grid_shape(self):
        g = sq.cheb_grid(8)
        assert g.nodes_1d[0] == 1.0 and g.nodes_1d[-1] == -1.0
        assert np.all(np.diff(g.nodes_1d) < 0)
        assert g.tensor_nodes.shape == (81, 2)

    def test_two_point_lebesgue_is_one(self):
        assert sq.cheb_lebesgue(1, 2001) == pytest.approx(1.0)

    def test_three_point_lebesgue_exact(self):
        # quadratic Lobatto: Lebesgue function 1 + x - x^2 on [0, 1], max 1.25
        assert sq.cheb_lebesgue(2, 200001) == pytest.approx(1.25, abs=1e-8)

    def test_direct_lagrange_oracle(self):
        # independent product-form Lagrange evaluation at the scan winner
        n = 8
        nodes = sq.cheb_grid(n).nodes_1d
        xs = np.linspace(-1, 1, 200001)
        total = np.zeros_like(xs)
        for i in range(n + 1):
            li = np.ones_like(xs)
            for j in range(n + 1):
                if j != i:
                    li *= (xs - nodes[j]) / (nodes[i] - nodes[j])
            total += np.abs(li)
        assert sq.cheb_lebesgue(n) == pytest.approx(float(total.max()), abs=1e-6)

    def test_logarithmic_growth(self):
        assert sq.cheb_lebesgue(64) / sq.cheb_lebesgue(4) < 3.0

    def test_n10_value_frozen_from_oracle(self):
        # brute-force value; the log(n+1) growth law gives 2.489 at n=10,
        # overshooting the Lobatto constant by ~ 0.64/n (roots-family law)
        assert sq.cheb_lebesgue(10) == pytest.approx(2.42097, abs=2e-4)

    @pytest.mark.parametrize("n", [5, 8, 12, 16, 24, 32, 48, 64])
    def test_equidistant_exceeds_lobatto(self, n):
        assert sq.equidistant_lebesgue(n, 100001) > sq.cheb_lebesgue(n, 100001)

    def test_equidistant_exponential_blowup(self):
        assert sq.equidistant_lebesgue(32) > 1e5

    def test_formula_value(self):
        want = (2 / math.pi) * (math.log(11) + 0.5772156649015329
                                + math.log(8 / math.pi))
        assert sq.lebesgue_formula(10) == pytest.approx(want)
        assert sq.lebesgue_formula(10) == pytest.approx(2.489, abs=1e-3)

    def test_validation(self):
        with pytest.raises(ValueError):
            sq.cheb_lebesgue(0)
        with pytest.raises(ValueError):
            sq.cheb_lebesgue(4, 10)


class TestConditionWarnings:
    def test_degree_12_warns(self):
        basis = sq.lagrange_basis(12)
        assert basis.condition > 1e12
        with pytest.warns(sq.IllConditionedWarning):
            basis.eval(np.array([[0.2, 0.3]]))

    def test_moderate_degree_silent(self, recwarn):
        basis = sq.lagrange_basis(8)
        basis.eval(np.array([[0.2, 0.3]]))
        assert not [w for w in recwarn.list
                    if issubclass(w.category, sq.IllConditionedWarning)]
