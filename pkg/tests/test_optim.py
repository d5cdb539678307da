"""
Unit tests for the Adam optimiser.
"""

import numpy as np
import pytest

from semifed_har.errors import DimensionError, NumericalError
from semifed_har.nn.optim import AdamState, adam_step


class TestAdamStep:
    """Test cases for adam_step."""

    def test_first_step_moves_by_lr_times_sign(self):
        """Test that bias correction makes the first update ~lr·sign(g)."""
        params = {"w": np.array([1.0, 1.0, 1.0])}
        grads = {"w": np.array([0.5, -3.0, 1e-3])}

        new_params, state = adam_step(params, grads, AdamState.for_params(params), lr=0.01)

        np.testing.assert_allclose(new_params["w"], [0.99, 1.01, 0.99], atol=1e-6)
        assert state.step_count == 1

    def test_inputs_are_not_mutated(self):
        """Test that the step is pure."""
        params = {"w": np.array([1.0, 2.0])}
        grads = {"w": np.array([1.0, 1.0])}
        state = AdamState.for_params(params)

        adam_step(params, grads, state, lr=0.1)

        np.testing.assert_array_equal(params["w"], [1.0, 2.0])
        assert state.step_count == 0
        np.testing.assert_array_equal(state.first_moment["w"], [0.0, 0.0])

    def test_zero_gradient_leaves_parameter(self):
        """Test that a zero gradient produces no movement."""
        params = {"w": np.array([0.25, -4.0])}
        new_params, _ = adam_step(params, {"w": np.zeros(2)}, AdamState.for_params(params), lr=1.0)

        np.testing.assert_array_equal(new_params["w"], params["w"])

    def test_missing_gradient_counts_as_zero(self):
        """Test that a parameter without a gradient is kept."""
        params = {"a": np.ones(2), "b": np.ones(3)}
        new_params, state = adam_step(params, {"a": np.ones(2)}, AdamState(), lr=0.1)

        np.testing.assert_array_equal(new_params["b"], params["b"])
        assert set(state.first_moment) == {"a", "b"}

    def test_non_finite_gradient_names_parameters(self):
        """Test that NaN and inf gradients are reported by sorted name."""
        params = {"z": np.ones(1), "a": np.ones(1), "m": np.ones(1)}
        grads = {"z": np.array([np.nan]), "a": np.array([np.inf]), "m": np.ones(1)}

        with pytest.raises(NumericalError) as excinfo:
            adam_step(params, grads, AdamState.for_params(params), lr=0.1)

        assert excinfo.value.diagnostics == ["a", "z"]
        assert "a, z" in str(excinfo.value)

    def test_gradient_shape_mismatch(self):
        """Test that a wrongly shaped gradient is rejected."""
        params = {"w": np.ones((2, 2))}
        with pytest.raises(DimensionError):
            adam_step(params, {"w": np.ones(4)}, AdamState.for_params(params), lr=0.1)

    def test_dtype_is_preserved(self):
        """Test that float32 parameters stay float32."""
        params = {"w": np.ones(3, dtype=np.float32)}
        grads = {"w": np.full(3, 0.5, dtype=np.float32)}

        new_params, state = adam_step(params, grads, AdamState.for_params(params), lr=0.01)

        assert new_params["w"].dtype == np.float32
        assert state.second_moment["w"].dtype == np.float32

    def test_repeated_steps_descend_quadratic(self):
        """Test that iterating on f(w) = w² approaches the minimum."""
        params = {"w": np.array([3.0])}
        state = AdamState.for_params(params)
        for _ in range(500):
            params, state = adam_step(params, {"w": 2.0 * params["w"]}, state, lr=0.05)

        assert abs(params["w"][0]) < 0.1
        assert state.step_count == 500

    def test_two_scalar_steps_follow_recurrence(self):
        """Test two steps with g = 1, lr = 0.01 against the hand-rolled recurrence."""
        beta1, beta2, eps, lr = 0.9, 0.999, 1e-8, 0.01
        params = {"w": np.array([1.0])}
        state = AdamState.for_params(params)

        expected, m, v = 1.0, 0.0, 0.0
        trajectory = []
        for t in (1, 2):
            m = beta1 * m + (1 - beta1) * 1.0
            v = beta2 * v + (1 - beta2) * 1.0
            expected -= lr * (m / (1 - beta1 ** t)) / (np.sqrt(v / (1 - beta2 ** t)) + eps)
            params, state = adam_step(params, {"w": np.array([1.0])}, state, lr=lr)
            trajectory.append(params["w"][0])
            assert params["w"][0] == pytest.approx(expected, abs=1e-12)

        assert 1.0 > trajectory[0] > trajectory[1]
        assert trajectory[1] == pytest.approx(0.98, abs=1e-6)
        assert state.step_count == 2
