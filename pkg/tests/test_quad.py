import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bernquant.bernstein import basis_matrix
from bernquant.errors import DomainError, ResourceCapExceeded
from bernquant.quad import attach_sign_layer, build_bernstein_quad, build_mult2_quad, build_multd_quad
from bernquant.qnn import SizeTriple
from bernquant.sigma_delta import ONE_BIT, SignTensor
from bernquant.smoothing import eval_combination_points

reals = st.floats(min_value=-100, max_value=100, allow_nan=False)


class TestProducts:
    def test_two_times_three(self):
        assert build_mult2_quad().evaluate([2.0, 3.0])[0] == 6.0

    def test_negative_operands(self):
        # rho(-3.5) - rho(-1.5) - rho(-2) = 6.125 - 1.125 - 2
        assert build_mult2_quad().evaluate([-1.5, -2.0])[0] == pytest.approx(3.0, abs=1e-14)

    @given(reals)
    def test_times_zero(self, x):
        assert abs(build_mult2_quad().evaluate([x, 0.0])[0]) <= 1e-12 * max(1.0, x * x)

    @settings(deadline=None)
    @given(reals, reals)
    def test_exact_for_reals(self, a, b):
        got = build_mult2_quad().evaluate([a, b])[0]
        assert got == pytest.approx(a * b, abs=1e-12 * (a * a + b * b + 1))

    def test_sizes(self):
        assert build_mult2_quad().size() == SizeTriple(2, 4, 7)
        for d in (2, 3, 6):
            assert build_multd_quad(d).size() == SizeTriple(2 * d - 2, 4 * d - 4, 7 * d - 7)

    def test_chain_value(self):
        assert build_multd_quad(4).evaluate([0.5, -2.0, 3.0, 0.25])[0] == pytest.approx(-0.75)

    def test_chain_needs_two(self):
        with pytest.raises(DomainError):
            build_multd_quad(1)


class TestBernsteinNet:
    def test_degree_one(self):
        out = build_bernstein_quad(1, 1).evaluate([0.3])
        assert out == pytest.approx([0.7, 0.3])

    def test_degree_two_middle(self):
        assert build_bernstein_quad(2, 1).evaluate([0.5])[1] == pytest.approx(0.5)

    @pytest.mark.parametrize("n", [1, 3, 8, 16])
    def test_matches_basis(self, n):
        x = np.linspace(0, 1, 57)
        out = build_bernstein_quad(n, 1).evaluate(x[:, None])
        assert np.max(np.abs(out - basis_matrix(n, x))) <= 1e-12

    def test_two_variables_c_order(self):
        net = build_bernstein_quad(3, 2)
        x = np.array([[0.2, 0.7]])
        out = net.evaluate(x)[0].reshape(4, 4)
        ref = np.outer(basis_matrix(3, [0.2])[0], basis_matrix(3, [0.7])[0])
        assert np.allclose(out, ref, atol=1e-13)

    def test_row_nodes_and_layers(self):
        for m in (1, 2, 5):
            diff = build_bernstein_quad(m + 1, 1).size() - build_bernstein_quad(m, 1).size()
            assert (diff.layers, diff.neurons) == (3, 9 * m + 8)

    def test_row_edges_counted_literally(self):
        # two product blocks (7 edges each) plus a two-edge sum per interior entry,
        # one product block per edge entry
        for m in (1, 2, 5):
            diff = build_bernstein_quad(m + 1, 1).size() - build_bernstein_quad(m, 1).size()
            assert diff.params == 16 * m + 14

    def test_closed_form_size(self):
        for n in (2, 5, 11):
            s = build_bernstein_quad(n, 1).size()
            assert s.layers == 3 * n - 2
            assert s.params == 8 * n * n + 6 * n - 12

    def test_asymptotic_size(self):
        ratios = [build_bernstein_quad(n, 1).size().params / n**2 for n in (4, 8, 16, 32, 64)]
        assert max(ratios) <= 10.0
        assert all(build_bernstein_quad(n, 1).size().layers - 3 * n <= 0 for n in (4, 16, 64))

    def test_one_bit_audit(self):
        net = build_bernstein_quad(6, 2)
        assert ONE_BIT.contains_all(net.weights)
        assert ONE_BIT.contains_all(net.biases[net.biases != 0])

    def test_cap(self):
        with pytest.raises(ResourceCapExceeded):
            build_bernstein_quad(10, 3, cap=1000)

    def test_bad_args(self):
        with pytest.raises(DomainError):
            build_bernstein_quad(0, 1)


class TestSignLayer:
    @pytest.mark.parametrize("value", [1.0, -1.0])
    def test_constant_signs(self, value):
        net = attach_sign_layer(build_bernstein_quad(5, 2), np.full((6, 6), value))
        pts = np.random.default_rng(1).random((40, 2))
        assert np.max(np.abs(net.evaluate(pts)[:, 0] - value)) <= 1e-9

    def test_random_signs_match_oracle(self):
        rng = np.random.default_rng(2)
        sigma = SignTensor(rng.choice([-1.0, 1.0], size=(8,)))
        net = attach_sign_layer(build_bernstein_quad(7, 1), sigma)
        x = rng.random((100, 1))
        assert np.allclose(net.evaluate(x)[:, 0], eval_combination_points(sigma.values, x), atol=1e-9)

    def test_size_growth(self):
        base = build_bernstein_quad(4, 2)
        full = attach_sign_layer(base, np.ones((5, 5)))
        assert full.size() - base.size() == SizeTriple(1, 1, 25)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            attach_sign_layer(build_bernstein_quad(4, 1), np.ones(4))

    def test_non_sign_values(self):
        with pytest.raises(DomainError):
            attach_sign_layer(build_bernstein_quad(2, 1), np.array([1.0, 0.5, -1.0]))
