"""
Unit tests for the tensor engine's forward operations.

Tests known values, shape handling and the error cases of every layer.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semifed_har.errors import DataError, DegenerateBatchError, DimensionError
from semifed_har.nn import functional as F
from semifed_har.nn.tensor import GradTape, Tensor, active_tape


class TestDense:
    """Test cases for the dense layer."""

    def test_known_value(self):
        """Test y = W·x + b on a small example."""
        x = Tensor(np.array([[1.0, 2.0]]))
        W = Tensor(np.array([[1.0, 0.0], [0.5, -1.0], [2.0, 2.0]]))
        b = Tensor(np.array([0.0, 1.0, -1.0]))

        y = F.dense(x, W, b)

        np.testing.assert_allclose(y.data, [[1.0, -0.5, 5.0]])

    def test_leading_batch_axes(self):
        """Test that leading axes are treated as batch axes."""
        x = Tensor(np.ones((4, 7, 5), dtype=np.float32))
        W = Tensor(np.ones((3, 5), dtype=np.float32))
        b = Tensor(np.zeros(3, dtype=np.float32))

        assert F.dense(x, W, b).shape == (4, 7, 3)

    def test_shape_mismatch_raises(self):
        """Test that a wrong input width names both shapes."""
        with pytest.raises(DimensionError) as excinfo:
            F.dense(Tensor(np.ones((2, 4))), Tensor(np.ones((3, 5))), Tensor(np.zeros(3)))
        assert "(2, 4)" in str(excinfo.value)
        assert isinstance(excinfo.value, ValueError)


class TestConvolution:
    """Test cases for conv1d and its transpose."""

    def test_conv1d_known_value(self):
        """Test cross-correlation with zero padding."""
        x = Tensor(np.array([[1.0, 2.0, 3.0]]))
        W = Tensor(np.array([[[1.0, 0.0, -1.0]]]))
        b = Tensor(np.array([0.0]))

        y = F.conv1d(x, W, b, stride=1, padding=1)

        np.testing.assert_allclose(y.data, [[-2.0, -2.0, 2.0]])

    def test_conv1d_box_kernel(self):
        """Test a [1, 1, 1] kernel sums each zero-padded neighbourhood."""
        x = Tensor(np.array([[1.0, 2.0, 3.0, 4.0]]))
        W = Tensor(np.ones((1, 1, 3)))

        y = F.conv1d(x, W, Tensor(np.zeros(1)), stride=1, padding=1)

        np.testing.assert_allclose(y.data, [[3.0, 6.0, 9.0, 7.0]])

    def test_conv1d_output_length(self):
        """Test that k=3, p=1 preserves length and channels follow the kernel."""
        x = Tensor(np.zeros((5, 1, 9), dtype=np.float32))
        W = Tensor(np.zeros((8, 1, 3), dtype=np.float32))
        b = Tensor(np.zeros(8, dtype=np.float32))

        assert F.conv1d(x, W, b).shape == (5, 8, 9)

    def test_transpose_restores_shape(self):
        """Test that the transposed conv maps 8 channels back to 1."""
        h = Tensor(np.zeros((5, 8, 9), dtype=np.float32))
        W = Tensor(np.zeros((8, 1, 3), dtype=np.float32))
        b = Tensor(np.zeros(1, dtype=np.float32))

        assert F.conv1d_transpose(h, W, b).shape == (5, 1, 9)

    def test_channel_mismatch_raises(self):
        """Test that input channels must match the kernel."""
        with pytest.raises(DimensionError):
            F.conv1d(Tensor(np.zeros((2, 4))), Tensor(np.zeros((8, 1, 3))), Tensor(np.zeros(8)))

    @pytest.mark.property
    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        c_in=st.integers(1, 3),
        c_out=st.integers(1, 4),
        length=st.integers(3, 12),
    )
    def test_transpose_is_adjoint(self, seed, c_in, c_out, length):
        """Test <conv(x), y> == <x, conv_transpose(y)> for the same kernel."""
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((c_in, length))
        y = rng.standard_normal((c_out, length))
        W = rng.standard_normal((c_out, c_in, 3))

        forward = F.conv1d(Tensor(x), Tensor(W), Tensor(np.zeros(c_out)), padding=1).data
        adjoint = F.conv1d_transpose(Tensor(y), Tensor(W), Tensor(np.zeros(c_in)), padding=1).data

        assert math.isclose(float((forward * y).sum()), float((x * adjoint).sum()), rel_tol=1e-9, abs_tol=1e-9)


class TestBatchNorm:
    """Test cases for batch normalisation."""

    def test_train_mode_normalises(self):
        """Test that train mode yields zero mean and unit variance per channel."""
        rng = np.random.default_rng(0)
        x = Tensor(rng.normal(3.0, 2.0, size=(16, 4, 6)))
        running = F.BatchNormStats(mean=np.zeros(4), var=np.ones(4))

        y, _ = F.batchnorm1d(x, Tensor(np.ones(4)), Tensor(np.zeros(4)), running, training=True)

        per_channel = y.data.transpose(1, 0, 2).reshape(4, -1)
        np.testing.assert_allclose(per_channel.mean(axis=1), 0.0, atol=1e-9)
        np.testing.assert_allclose(per_channel.std(axis=1), 1.0, atol=1e-3)

    def test_two_values_normalise_to_plus_minus_one(self):
        """Test [1, 3] in train mode maps to (x - 2) / sqrt(1 + eps)."""
        x = Tensor(np.array([[[1.0, 3.0]]]))
        running = F.BatchNormStats(mean=np.zeros(1), var=np.ones(1))

        y, _ = F.batchnorm1d(x, Tensor(np.ones(1)), Tensor(np.zeros(1)), running, training=True)

        expected = 1.0 / math.sqrt(1.0 + 1e-5)
        np.testing.assert_allclose(y.data.reshape(2), [-expected, expected], rtol=1e-12)
        assert expected == pytest.approx(0.999995, abs=1e-6)

    def test_running_stats_use_unbiased_variance(self):
        """Test the momentum update of the running statistics."""
        x = Tensor(np.array([[[0.0, 2.0]], [[4.0, 6.0]]]))
        running = F.BatchNormStats(mean=np.zeros(1), var=np.ones(1))

        _, updated = F.batchnorm1d(x, Tensor(np.ones(1)), Tensor(np.zeros(1)), running, training=True, momentum=0.1)

        # batch mean 3, unbiased variance 20/3
        np.testing.assert_allclose(updated.mean, [0.3])
        np.testing.assert_allclose(updated.var, [0.9 + 0.1 * 20.0 / 3.0])

    def test_eval_mode_uses_running_stats(self):
        """Test that eval mode leaves the running statistics untouched."""
        x = Tensor(np.full((1, 2, 1), 5.0))
        running = F.BatchNormStats(mean=np.array([1.0, 5.0]), var=np.array([4.0, 1.0]))

        y, same = F.batchnorm1d(x, Tensor(np.ones(2)), Tensor(np.zeros(2)), running, training=False)

        assert same is running
        np.testing.assert_allclose(y.data.reshape(2), [4.0 / math.sqrt(4.0 + 1e-5), 0.0], atol=1e-9)

    def test_single_element_batch_raises(self):
        """Test that train mode with one value per channel is rejected."""
        running = F.BatchNormStats(mean=np.zeros(3), var=np.ones(3))
        with pytest.raises(DegenerateBatchError):
            F.batchnorm1d(Tensor(np.ones((1, 3, 1))), Tensor(np.ones(3)), Tensor(np.zeros(3)), running, training=True)


class TestLstm:
    """Test cases for the LSTM cell."""

    def _params(self, input_dim, hidden, rng=None, scale=0.0):
        def draw(shape):
            return rng.standard_normal(shape) * scale if rng is not None else np.zeros(shape)

        return F.LstmCellParams(
            weight_ih=Tensor(draw((4 * hidden, input_dim))),
            weight_hh=Tensor(draw((4 * hidden, hidden))),
            bias=Tensor(draw((4 * hidden,))),
        )

    def test_zero_weights_keep_zero_state(self):
        """Test that an all-zero cell never leaves the zero state."""
        hs, state = F.lstm_sequence(Tensor(np.ones((5, 3))), self._params(3, 2))

        assert hs.shape == (5, 2)
        np.testing.assert_array_equal(hs.data, 0.0)
        np.testing.assert_array_equal(state.c.data, 0.0)

    def test_zero_weights_with_unit_cell_state(self):
        """Test hand-evaluated gates: all gates 0.5 and g = 0, so c = 0.5 and h = 0.5·tanh(0.5)."""
        prev = F.LstmState(h=Tensor(np.array([[0.3, -0.7]])), c=Tensor(np.ones((1, 2))))

        state = F.lstm_step(Tensor(np.array([[2.0, -1.0, 5.0]])), prev, self._params(3, 2))

        np.testing.assert_allclose(state.c.data, 0.5, rtol=1e-12)
        np.testing.assert_allclose(state.h.data, 0.5 * math.tanh(0.5), rtol=1e-12)
        assert state.h.data[0, 0] == pytest.approx(0.23106, abs=1e-5)

    def test_hidden_state_is_bounded(self):
        """Test that |h| <= 1 for any weights."""
        rng = np.random.default_rng(1)
        hs, _ = F.lstm_sequence(Tensor(rng.standard_normal((2, 20, 4)) * 10), self._params(4, 3, rng, scale=3.0))

        assert hs.shape == (2, 20, 3)
        assert np.all(np.abs(hs.data) <= 1.0)

    def test_gate_slices(self):
        """Test that gate() returns the rows of one gate."""
        params = self._params(2, 3, np.random.default_rng(2), scale=1.0)
        w_ih, w_hh, b = params.gate("forget")

        np.testing.assert_array_equal(w_ih, params.weight_ih.data[3:6])
        assert w_hh.shape == (3, 3)
        assert b.shape == (3,)

    def test_bad_weight_shape_raises(self):
        """Test that weight_hh must be [4·hidden, hidden]."""
        with pytest.raises(DimensionError):
            F.LstmCellParams(
                weight_ih=Tensor(np.zeros((8, 3))),
                weight_hh=Tensor(np.zeros((8, 3))),
                bias=Tensor(np.zeros(8)),
            )


class TestOutputsAndLosses:
    """Test cases for softmax, cross-entropy and MSE."""

    def test_softmax_rows_sum_to_one(self):
        """Test that probabilities are normalised."""
        p = F.softmax(Tensor(np.array([[1.0, 2.0, 3.0], [1000.0, 1000.0, 0.0]])))

        np.testing.assert_allclose(p.data.sum(axis=-1), 1.0)
        np.testing.assert_allclose(p.data[1], [0.5, 0.5, 0.0], atol=1e-12)

    def test_softmax_log_ratio(self):
        """Test softmax([ln 1, ln 3]) == [0.25, 0.75]."""
        p = F.softmax(Tensor(np.array([math.log(1.0), math.log(3.0)])))

        np.testing.assert_allclose(p.data, [0.25, 0.75], rtol=1e-12)

    @pytest.mark.property
    @settings(max_examples=100, deadline=None)
    @given(
        values=st.lists(st.floats(-50, 50), min_size=2, max_size=8),
        shift=st.floats(-100, 100),
    )
    def test_softmax_shift_invariance(self, values, shift):
        """Test softmax(z + c) == softmax(z)."""
        z = np.array(values)
        np.testing.assert_allclose(
            F.softmax(Tensor(z + shift)).data, F.softmax(Tensor(z)).data, rtol=1e-9, atol=1e-12
        )

    def test_cross_entropy_uniform(self):
        """Test that uniform probabilities cost log k."""
        p = Tensor(np.full((4, 5), 0.2))
        loss = F.cross_entropy_loss(p, np.array([0, 1, 2, 4]))

        assert math.isclose(loss.item(), math.log(5.0), rel_tol=1e-12)

    def test_cross_entropy_label_out_of_range(self):
        """Test that a class index >= k is rejected."""
        with pytest.raises(DataError):
            F.cross_entropy_loss(Tensor(np.full((2, 3), 1 / 3)), np.array([0, 3]))

    def test_mse_known_value(self):
        """Test the mean of squared differences."""
        loss = F.mse_loss(Tensor(np.array([1.0, 2.0, 3.0, 4.0])), Tensor(np.array([1.0, 0.0, 3.0, 6.0])))

        assert loss.item() == pytest.approx(2.0)

    def test_mse_shape_mismatch(self):
        """Test that shapes must agree."""
        with pytest.raises(DimensionError):
            F.mse_loss(Tensor(np.zeros(3)), Tensor(np.zeros(4)))


class TestGradTape:
    """Test cases for the gradient tape."""

    def test_nothing_recorded_outside_tape(self):
        """Test that inference does not touch any tape."""
        assert active_tape() is None
        w = Tensor.param("w", np.ones((2, 2)))
        F.dense(Tensor(np.ones((1, 2))), w, Tensor(np.zeros(2)))
        assert active_tape() is None

    def test_non_scalar_loss_raises(self):
        """Test that backward needs a scalar."""
        w = Tensor.param("w", np.ones((2, 2)))
        with GradTape() as tape:
            y = F.dense(Tensor(np.ones((1, 2))), w, Tensor(np.zeros(2)))
        with pytest.raises(DimensionError):
            tape.backward(y, [w])

    def test_disconnected_parameter_gets_zero(self):
        """Test that unused parameters are reported and get zero gradient."""
        w = Tensor.param("w", np.ones((1, 2)))
        unused = Tensor.param("unused", np.ones(3))
        with GradTape() as tape:
            loss = F.mse_loss(Tensor(np.zeros((1, 1))), F.dense(Tensor(np.ones((1, 2))), w, Tensor(np.zeros(1))))
        grads = tape.backward(loss, [w, unused])

        assert grads.disconnected == ["unused"]
        np.testing.assert_array_equal(grads["unused"], np.zeros(3))
        np.testing.assert_allclose(grads["w"], [[4.0, 4.0]])

    def test_only_differentiable_ops_recorded(self):
        """Test that ops on constants stay off the tape."""
        w = Tensor.param("w", np.ones((2, 2)))
        with GradTape() as tape:
            hidden = F.tanh(Tensor(np.ones((1, 2))))
            F.dense(hidden, w, Tensor(np.zeros(2)))

        assert [op.name for op in tape.ops] == ["dense"]
