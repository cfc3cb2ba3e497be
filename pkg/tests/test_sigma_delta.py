import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bernquant.errors import AlphabetViolation, DomainError, StabilityOverflow
from bernquant.sigma_delta import (
    ONE_BIT,
    THREE_BIT,
    TWO_BIT,
    Alphabet,
    SignTensor,
    difference,
    quantization_error_envelope,
    quantize_1d,
    quantize_directional,
)

sequences = st.lists(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=1, max_size=200)


class TestAlphabet:
    def test_round_ties_go_up(self):
        assert ONE_BIT.round(0.0) == 1.0
        assert THREE_BIT.round(0.75) == 1.0
        assert THREE_BIT.round(-0.75) == -0.5

    def test_round_nearest(self):
        assert np.array_equal(THREE_BIT.round([-3.0, -1.4, 0.2, 1.6]), [-2.0, -1.0, 0.5, 2.0])

    def test_symmetry_required(self):
        with pytest.raises(DomainError):
            Alphabet([-1.0, 2.0])

    def test_codes(self):
        assert TWO_BIT.code([-1.0, 0.5]).tolist() == [0, 2]
        with pytest.raises(AlphabetViolation):
            TWO_BIT.code([0.3])

    def test_sign_tensor_checks(self):
        with pytest.raises(AlphabetViolation):
            SignTensor(np.array([1.0, 0.0]))


class TestFirstOrder:
    def test_constant_input(self):
        q, st_ = quantize_1d([0.5] * 8, r=1)
        # u: 0 -> -0.5 -> -1 (tie rounds up) -> 0.5 -> 0 -> ...
        assert q.tolist() == [1, 1, -1, 1, 1, 1, -1, 1]
        assert st_.max_abs_u <= 1.0

    @settings(max_examples=200)
    @given(sequences)
    def test_reconstruction_and_bound(self, y):
        q, state = quantize_1d(y, r=1)
        assert np.max(np.abs(np.asarray(y) - q - difference(state.u, 1))) <= 1e-12
        assert state.max_abs_u <= 1.0
        assert set(np.unique(q)) <= {-1.0, 1.0}

    def test_input_bound(self):
        with pytest.raises(DomainError):
            quantize_1d([1.5], r=1)


class TestHigherOrder:
    @settings(max_examples=100)
    @given(st.lists(st.floats(min_value=-0.5, max_value=0.5, allow_nan=False), min_size=1, max_size=300))
    def test_second_order_stable_at_half(self, y):
        q, state = quantize_1d(y, r=2)
        assert np.max(np.abs(np.asarray(y) - q - difference(state.u, 2))) <= 1e-11
        assert state.max_abs_u < 10.0

    def test_overflow_reports_step(self):
        with pytest.raises(StabilityOverflow) as info:
            quantize_1d([0.99] * 500, r=3, u_bound=5.0)
        assert info.value.step >= 0
        assert abs(info.value.value) > 5.0

    def test_three_bit_alphabet_reduces_error(self):
        y = 0.6 * np.sin(np.linspace(0, 6, 200))
        q1, _ = quantize_1d(y, r=1)
        q3, _ = quantize_1d(y, r=1, alphabet=THREE_BIT)
        assert np.abs(y - q3).mean() < np.abs(y - q1).mean()


class TestDirectional:
    def test_fibers_match_1d(self):
        rng = np.random.default_rng(3)
        a = rng.uniform(-0.5, 0.5, (6, 6))
        q, state = quantize_directional(a, 2, ell=2)
        for i in range(6):
            q1, _ = quantize_1d(a[i], r=2)
            assert np.array_equal(q.values[i], q1)
        assert state.u.shape == (6, 8)
        assert np.allclose(a - q.values, difference(state.u, 2, axis=1), atol=1e-12)

    def test_overflow_names_fiber(self):
        a = np.full((4, 30), 0.3)
        a[2] = 0.99
        with pytest.raises(StabilityOverflow) as info:
            quantize_directional(a, 3, ell=2, u_bound=30.0)
        assert info.value.fiber == (2,)

    def test_overflow_fiber_in_original_axes(self):
        a = np.full((30, 3, 5), 0.3)
        a[:, 1, 4] = 0.99
        with pytest.raises(StabilityOverflow) as info:
            quantize_directional(a, 3, ell=1, u_bound=30.0)
        assert info.value.fiber == (1, 4)

    def test_needs_strictly_bounded_input_for_r2(self):
        with pytest.raises(DomainError):
            quantize_directional(np.ones(5), 2)
        quantize_directional(np.ones(5), 1)

    def test_direction_range(self):
        with pytest.raises(DomainError):
            quantize_directional(np.zeros((3, 3)), 1, ell=3)

    def test_interior_strips_padding(self):
        _, state = quantize_directional(np.full(5, 0.2), 2)
        assert state.interior().shape == (5,)


class TestEnvelope:
    def test_first_order_cap(self):
        assert quantization_error_envelope(10, 1, 1, 0.5, [0.0]) == 2.0
        assert quantization_error_envelope(99, 1, 1, 0.5, [0.5]) == pytest.approx(0.2)

    def test_higher_order_shape(self):
        assert quantization_error_envelope(16, 2, 1, 0.5, [0.5]) == pytest.approx(16**-1 * 0.25**-2)
        assert quantization_error_envelope(4, 2, 1, 0.5, [0.01]) == 1.0
