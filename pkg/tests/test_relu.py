import math

import numpy as np
import pytest

from bernquant.bernstein import basis_matrix
from bernquant.errors import DomainError, InfeasibleParameters
from bernquant.relu import (
    attach_sign_layer_relu,
    build_bernstein_relu,
    build_bernstein_relu_1d,
    build_mult2_relu,
    build_multd_relu,
    build_phi_block,
    build_squaring,
    check_multd_feasible,
    multd_params,
    squaring_terms,
    theorem_epsilon,
)
from bernquant.qnn import SizeTriple
from bernquant.sigma_delta import THREE_BIT, TWO_BIT
from bernquant.smoothing import eval_combination_points

GRID = np.linspace(0.0, 1.0, 10_001)[:, None]


def tent(x):
    return np.where(x <= 0.5, 2 * x, 2 - 2 * x)


def takagi_partial(x, m):
    """Brute-force ``x - sum_{k<=m} phi^k(x) / 4^k``."""
    total, t = np.array(x, dtype=float), np.array(x, dtype=float)
    for k in range(1, m + 1):
        t = tent(t)
        total = total - t / 4.0**k
    return total


class TestTent:
    def test_values(self):
        phi = build_phi_block()
        assert phi.evaluate([0.25])[0] == 0.5
        assert phi.evaluate([0.5])[0] == 1.0
        assert phi.evaluate([0.75])[0] == 0.5

    def test_size(self):
        assert build_phi_block().size() == SizeTriple(2, 4, 6)

    def test_matches_tent_on_grid(self):
        assert np.allclose(build_phi_block().evaluate(GRID)[:, 0], tent(GRID[:, 0]), atol=1e-15)


class TestSquaring:
    def test_half_is_exact(self):
        for m in (1, 3, 6):
            assert build_squaring(m=m).evaluate([0.5])[0] == pytest.approx(0.25, abs=1e-15)

    def test_zero(self):
        assert build_squaring(m=4).evaluate([0.0])[0] == 0.0

    def test_matches_partial_sum(self):
        for m in (1, 4, 7):
            got = build_squaring(m=m).evaluate(GRID)[:, 0]
            assert np.allclose(got, takagi_partial(GRID[:, 0], m), atol=1e-13)

    def test_point_three(self):
        assert abs(build_squaring(m=4).evaluate([0.3])[0] - 0.09) <= 4.0**-4

    @pytest.mark.parametrize("m", range(2, 9))
    def test_truncation_bound(self, m):
        out = build_squaring(m=m).evaluate(GRID)[:, 0]
        assert np.max(np.abs(out - GRID[:, 0] ** 2)) <= 4.0**-m
        assert np.all(out >= 0)

    def test_terms(self):
        assert [squaring_terms(e) for e in (0.3, 0.25, 0.1, 1e-3)] == [1, 1, 2, 5]

    def test_size_logarithmic(self):
        sizes = [build_squaring(m=m).size().params for m in (2, 4, 8)]
        assert sizes[2] - sizes[1] == 2 * (sizes[1] - sizes[0])


class TestProducts:
    def test_zero_factor(self):
        net = build_mult2_relu(0.01, 2)
        y = np.linspace(0, 4, 41)
        out = net.evaluate(np.c_[np.zeros_like(y), y])[:, 0]
        assert np.max(np.abs(out)) <= 0.01

    def test_two_times_three(self):
        assert abs(build_mult2_relu(0.01, 2).evaluate([2.0, 3.0])[0] - 6.0) <= 0.01

    def test_corner(self):
        for k in (0, 1, 2):
            assert abs(build_mult2_relu(0.01, k).evaluate([2.0**k, 2.0**k])[0] - 4.0**k) <= 0.01

    def test_non_negative(self):
        g = np.linspace(0, 2, 31)
        pts = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2)
        assert np.all(build_mult2_relu(0.1, 1).evaluate(pts) >= 0)

    def test_ternary(self):
        assert abs(build_multd_relu(0.05, 1, 3).evaluate([2.0, 1.5, 0.5])[0] - 1.5) <= 0.05

    def test_all_ones(self):
        for d in (2, 3, 4):
            assert abs(build_multd_relu(0.01, 0, d).evaluate(np.ones(d))[0] - 1.0) <= 0.01

    def test_d2_close_to_binary(self):
        g = np.linspace(0, 2, 21)
        pts = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2)
        a = build_multd_relu(0.01, 1, 2).evaluate(pts)[:, 0]
        b = build_mult2_relu(0.01, 1).evaluate(pts)[:, 0]
        assert np.max(np.abs(a - b)) <= 0.02

    def test_default_parameters_feasible(self):
        for k in (0, 1, 2, 3):
            for d in (2, 3, 5):
                p = multd_params(0.01, k, d)
                check_multd_feasible(p.delta, k, p.ell_cap, d)

    def test_infeasible_override(self):
        with pytest.raises(InfeasibleParameters):
            build_multd_relu(0.01, 2, 3, ell=3)

    def test_eps_range(self):
        with pytest.raises(DomainError):
            build_mult2_relu(1.5, 1)


class TestBernsteinRelu:
    def test_degree_one_exact(self):
        net = build_bernstein_relu_1d(1, 0.1)
        assert net.size() == SizeTriple(1, 2, 2)
        assert np.allclose(net.evaluate(GRID[::100]), np.c_[1 - GRID[::100, 0], GRID[::100, 0]], atol=0)

    def test_middle_value(self):
        assert abs(build_bernstein_relu_1d(4, 0.01).evaluate([0.5])[2] - 0.375) <= 0.01

    def test_sum_close_to_one(self):
        n, eps = 6, 0.01
        out = build_bernstein_relu_1d(n, eps).evaluate(GRID[::50])
        assert np.max(np.abs(out.sum(axis=1) - 1.0)) <= (n + 1) * eps

    def test_accuracy_on_grid(self):
        out = build_bernstein_relu_1d(5, 0.01).evaluate(GRID[::20])
        assert np.max(np.abs(out - basis_matrix(5, GRID[::20, 0]))) <= 0.01

    def test_d1_same_as_univariate(self):
        assert build_bernstein_relu(4, 1, 0.05) == build_bernstein_relu_1d(4, 0.05)

    def test_bivariate_center(self):
        net = build_bernstein_relu(2, 2, 0.02)
        assert abs(net.evaluate([0.5, 0.5])[4] - 0.25) <= 0.02

    def test_non_negative(self):
        pts = np.random.default_rng(4).random((200, 2))
        assert np.all(build_bernstein_relu(3, 2, 0.05).evaluate(pts) >= 0)

    def test_three_bit_audit(self):
        net = build_bernstein_relu(3, 2, 0.01)
        assert THREE_BIT.contains_all(net.weights)
        assert THREE_BIT.contains_all(net.biases[net.biases != 0])

    def test_size_scaling(self):
        ratios = []
        for eps in (1e-1, 1e-2, 1e-3):
            for n in (4, 8, 16, 32):
                ratios.append(build_bernstein_relu_1d(n, eps).size().params / (n * n * math.log(n / eps)))
        assert max(ratios) / min(ratios) <= 4.0


class TestTwoBit:
    def test_alphabet_and_accuracy(self):
        net = build_bernstein_relu_1d(3, 0.05, two_bit=True)
        assert net.alphabet == TWO_BIT
        ref = build_bernstein_relu_1d(3, 0.05)
        x = GRID[::100]
        assert np.allclose(net.evaluate(x), ref.evaluate(x), atol=1e-12)

    def test_tent(self):
        assert build_phi_block(two_bit=True).evaluate([0.25])[0] == 0.5


class TestSignLayer:
    def test_all_ones(self):
        n, eps = 3, 0.01
        net = attach_sign_layer_relu(build_bernstein_relu(n, 2, eps), np.ones((n + 1, n + 1)))
        pts = np.random.default_rng(5).random((100, 2))
        assert np.max(np.abs(net.evaluate(pts)[:, 0] - 1.0)) <= (n + 1) ** 2 * eps

    def test_negation(self):
        base = build_bernstein_relu_1d(4, 0.05)
        sigma = np.array([1.0, -1.0, 1.0, 1.0, -1.0])
        x = GRID[::500]
        plus = attach_sign_layer_relu(base, sigma).evaluate(x)
        minus = attach_sign_layer_relu(base, -sigma).evaluate(x)
        assert np.array_equal(plus, -minus)

    def test_theorem_budget(self):
        n, d, s = 6, 1, 2
        eps = theorem_epsilon(n, d, s)
        sigma = np.random.default_rng(6).choice([-1.0, 1.0], size=n + 1)
        net = attach_sign_layer_relu(build_bernstein_relu(n, d, eps), sigma)
        x = GRID[::25]
        impl = np.abs(net.evaluate(x)[:, 0] - eval_combination_points(sigma, x))
        assert np.max(impl) <= n ** (-s / 2)
