import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bernquant.bernstein import GridSamples, apply_along_axes, basis_matrix, operator_matrix
from bernquant.errors import CoefficientOverflow, DomainError, PreconditionError
from bernquant.functions import builtin
from bernquant.smoothing import (
    CoeffTensor,
    SmoothnessSpec,
    eval_combination,
    eval_combination_grid,
    eval_combination_points,
    fnr_grid,
    iterated_coeffs,
    iterated_operator_grid,
    min_degree,
    pr_poly_eval,
)


class TestSmoothnessSpec:
    def test_r_is_half_s_rounded_up(self):
        assert [SmoothnessSpec(s, 0.5).r for s in (1, 2, 3, 4, 5)] == [1, 1, 2, 2, 3]

    @pytest.mark.parametrize("mu", [0.0, 1.0, 1.2, -0.3])
    def test_mu_range(self, mu):
        with pytest.raises(DomainError):
            SmoothnessSpec(2, mu)

    def test_s_must_be_positive(self):
        with pytest.raises(DomainError):
            SmoothnessSpec(0, 0.5)


class TestPolynomialP:
    def test_values(self):
        assert pr_poly_eval(2, 0.3) == pytest.approx(2.0)
        assert pr_poly_eval(3, 0.25) == pytest.approx(2 + 0.25 + 0.75)

    def test_max_is_r(self):
        t = np.linspace(0, 1, 101)
        for r in (2, 3, 4, 5):
            assert max(pr_poly_eval(r, v) for v in t) == pytest.approx(r)

    def test_needs_r_two(self):
        with pytest.raises(DomainError):
            pr_poly_eval(1, 0.5)


class TestIteratedCoefficients:
    def test_r1_is_plain_sampling(self):
        f = builtin("sine", 1, 0.4)
        s = GridSamples.from_function(f, 10, 1)
        a = iterated_coeffs(s, SmoothnessSpec(2, 0.5))
        assert np.array_equal(a.values, s.values)

    @pytest.mark.parametrize("r", [1, 2, 3])
    @pytest.mark.parametrize("d", [1, 2])
    def test_methods_agree(self, r, d):
        f = builtin("gauss", d, 0.4)
        s = GridSamples.from_function(f, 12, d)
        spec = SmoothnessSpec(2 * r, 0.5)
        a = iterated_coeffs(s, spec, method="binomial").values
        b = iterated_coeffs(s, spec, method="fnr").values
        assert np.allclose(a, b, atol=1e-12)

    def test_combination_equals_iterated_operator(self):
        f = builtin("sin2pi", 1, 0.4)
        n = 20
        s = GridSamples.from_function(f, n, 1)
        a = iterated_coeffs(s, SmoothnessSpec(4, 0.5))
        on_grid = eval_combination_grid(a, [np.arange(n + 1) / n])
        assert np.allclose(on_grid, iterated_operator_grid(s, 2), atol=1e-12)

    def test_polynomial_of_low_degree_is_reproduced(self):
        # B_n maps quadratics to quadratics; U_{n,2} reproduces them up to O(n^-2) only,
        # but linear functions are fixed points for every r.
        s = GridSamples.from_function(lambda p: 0.1 + 0.3 * p[:, 0], 8, 1)
        a = iterated_coeffs(s, SmoothnessSpec(6, 0.5))
        assert np.allclose(a.values, s.values, atol=1e-13)

    def test_overflow(self):
        s = GridSamples(np.full(9, 1.0))
        with pytest.raises(CoefficientOverflow) as info:
            iterated_coeffs(s, SmoothnessSpec(2, 0.5))
        assert info.value.inf_norm == pytest.approx(1.0)

    def test_threshold_enforced(self):
        f = builtin("sine", 1, 0.4)
        need = min_degree(2, 1, f.c2_norm, 0.5)
        s = GridSamples.from_function(f, need - 1, 1)
        with pytest.raises(PreconditionError, match=f"n={need}"):
            iterated_coeffs(s, SmoothnessSpec(2, 0.5, f.c2_norm), certify=True)
        ok = GridSamples.from_function(f, need, 1)
        iterated_coeffs(ok, SmoothnessSpec(2, 0.5, f.c2_norm), certify=True)

    def test_unknown_method(self):
        with pytest.raises(DomainError):
            iterated_coeffs(GridSamples(np.zeros(4)), SmoothnessSpec(2, 0.5), method="magic")

    def test_fnr_r1_identity(self):
        v = np.linspace(-0.3, 0.3, 7)
        assert np.array_equal(fnr_grid(v, 1), v)


class TestEvaluation:
    @settings(max_examples=50, deadline=None)
    @given(
        st.integers(min_value=1, max_value=8),
        st.lists(st.floats(0.0, 1.0), min_size=2, max_size=2),
        st.integers(min_value=0, max_value=2**31 - 1),
    )
    def test_point_and_grid_agree(self, n, x, seed):
        a = np.random.default_rng(seed).uniform(-1, 1, (n + 1, n + 1))
        single = eval_combination(a, x)
        pts = eval_combination_points(a, np.array([x]))[0]
        grid = eval_combination_grid(a, [np.array([x[0]]), np.array([x[1]])])[0, 0]
        direct = basis_matrix(n, [x[0]])[0] @ a @ basis_matrix(n, [x[1]])[0]
        assert single == pytest.approx(direct, abs=1e-13)
        assert pts == pytest.approx(direct, abs=1e-13)
        assert grid == pytest.approx(direct, abs=1e-13)

    def test_dimension_checked(self):
        with pytest.raises(DomainError):
            eval_combination(np.zeros((3, 3)), [0.5])

    def test_coeff_tensor_properties(self):
        c = CoeffTensor(np.array([[0.1, -0.7], [0.2, 0.3]]))
        assert (c.n, c.d, c.inf_norm) == (1, 2, 0.7)
