"""
Differentiable operations.

Every operation accepts ``Tensor`` values (arrays are wrapped), computes its
result with numpy, and records a backward closure on the active tape. Leading
dimensions are treated as batch dimensions wherever a layer works on the last
axis (dense, LSTM) or on the last two axes (convolutions, batch norm).
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from semifed_har.errors import (
    ConfigurationError,
    DataError,
    DegenerateBatchError,
    DimensionError,
)
from semifed_har.nn.tensor import Tensor, as_tensor, record


BN_EPS = 1e-5
BN_MOMENTUM = 0.1
CE_CLAMP = 1e-12


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def _flat(array: np.ndarray, last: int) -> np.ndarray:
    return array.reshape(-1, last)


# ---------------------------------------------------------------------------
# Elementwise
# ---------------------------------------------------------------------------

def add(a, b) -> Tensor:
    """Elementwise sum of two same-shape tensors."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError("add shape mismatch", a.shape, b.shape)
    out = Tensor(a.data + b.data)
    record("add", (a, b), (out,), lambda g: (g[0], g[0]))
    return out


def mul(a, b) -> Tensor:
    """Elementwise product of two same-shape tensors."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError("mul shape mismatch", a.shape, b.shape)
    out = Tensor(a.data * b.data)
    record("mul", (a, b), (out,), lambda g: (g[0] * b.data, g[0] * a.data))
    return out


def tanh(x) -> Tensor:
    x = as_tensor(x)
    y = np.tanh(x.data)
    out = Tensor(y)
    record("tanh", (x,), (out,), lambda g: (g[0] * (1.0 - y * y),))
    return out


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    y = _sigmoid(x.data)
    out = Tensor(y)
    record("sigmoid", (x,), (out,), lambda g: (g[0] * y * (1.0 - y),))
    return out


def relu(x) -> Tensor:
    """Elementwise max(0, x)."""
    x = as_tensor(x)
    mask = x.data > 0
    out = Tensor(np.where(mask, x.data, 0).astype(x.dtype, copy=False))
    record("relu", (x,), (out,), lambda g: (g[0] * mask,))
    return out


# ---------------------------------------------------------------------------
# Shape manipulation
# ---------------------------------------------------------------------------

def reshape(x, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    original = x.shape
    try:
        out = Tensor(x.data.reshape(tuple(shape)))
    except ValueError as e:
        raise DimensionError("reshape size mismatch", original, tuple(shape)) from e
    record("reshape", (x,), (out,), lambda g: (g[0].reshape(original),))
    return out


def unstack(x, axis: int) -> List[Tensor]:
    """Split ``x`` along ``axis`` into a list of tensors with that axis removed."""
    x = as_tensor(x)
    axis = axis % x.data.ndim
    outs = [Tensor(np.take(x.data, i, axis=axis)) for i in range(x.data.shape[axis])]

    def _backward(g: List[np.ndarray]):
        return (np.stack(g, axis=axis),)

    record("unstack", (x,), outs, _backward)
    return outs


def stack(tensors: Sequence[Tensor], axis: int) -> Tensor:
    """Stack same-shape tensors along a new ``axis``."""
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise DimensionError("stack needs at least one tensor")
    first = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != first:
            raise DimensionError("stack shape mismatch", first, t.shape)
    data = np.stack([t.data for t in tensors], axis=axis)
    out = Tensor(data)
    norm_axis = axis % data.ndim

    def _backward(g: List[np.ndarray]):
        return tuple(np.take(g[0], i, axis=norm_axis) for i in range(len(tensors)))

    record("stack", tensors, (out,), _backward)
    return out


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------

def dense(x, W, b) -> Tensor:
    """
    Affine map y = W·x + b over the last axis of ``x``.

    Args:
        x: Tensor[..., in]
        W: Tensor[out, in]
        b: Tensor[out]
    """
    x, W, b = as_tensor(x), as_tensor(W), as_tensor(b)
    if W.data.ndim != 2 or x.data.ndim < 1 or x.shape[-1] != W.shape[1]:
        raise DimensionError("dense input/weight mismatch", x.shape, W.shape)
    if b.shape != (W.shape[0],):
        raise DimensionError("dense bias mismatch", b.shape, W.shape)

    out = Tensor(x.data @ W.data.T + b.data)

    def _backward(g: List[np.ndarray]):
        gy = g[0]
        gx = gy @ W.data
        gy2 = _flat(gy, W.shape[0])
        gW = gy2.T @ _flat(x.data, W.shape[1])
        gb = gy2.sum(axis=0)
        return gx, gW, gb

    record("dense", (x, W, b), (out,), _backward)
    return out


def _check_conv(x: Tensor, W: Tensor, b: Tensor, in_axis: int, out_axis: int, stride: int, op: str):
    if W.data.ndim != 3:
        raise ConfigurationError(f"{op} kernel must have rank 3, got shape {W.shape}")
    if stride != 1:
        raise ConfigurationError(f"{op} supports stride 1 only, got {stride}")
    if x.data.ndim < 2:
        raise DimensionError(f"{op} input needs (channels, length) axes", x.shape, W.shape)
    if x.shape[-2] != W.shape[in_axis]:
        raise DimensionError(f"{op} channel mismatch", x.shape, W.shape)
    if b.shape != (W.shape[out_axis],):
        raise DimensionError(f"{op} bias mismatch", b.shape, W.shape)


def conv1d(x, W, b, stride: int = 1, padding: int = 1) -> Tensor:
    """
    1-d cross-correlation with zero padding.

    Args:
        x: Tensor[..., C_in, L]
        W: Tensor[C_out, C_in, k]
        b: Tensor[C_out]

    Returns:
        Tensor[..., C_out, L + 2·padding − k + 1]
    """
    x, W, b = as_tensor(x), as_tensor(W), as_tensor(b)
    _check_conv(x, W, b, in_axis=1, out_axis=0, stride=stride, op="conv1d")
    k = W.shape[2]
    length = x.shape[-1]
    if length + 2 * padding < k:
        raise DimensionError("conv1d input shorter than kernel", x.shape, W.shape)

    pad = [(0, 0)] * (x.data.ndim - 1) + [(padding, padding)]
    xp = np.pad(x.data, pad)
    cols = sliding_window_view(xp, k, axis=-1)  # (..., C_in, L_out, k)
    y = np.einsum("...clk,ock->...ol", cols, W.data) + b.data[:, None]
    out = Tensor(y.astype(x.dtype, copy=False))
    l_out = y.shape[-1]

    def _backward(g: List[np.ndarray]):
        gy = g[0]
        batch_axes = tuple(range(gy.ndim - 2))
        gW = np.einsum("...clk,...ol->...ock", cols, gy).sum(axis=batch_axes)
        gb = gy.sum(axis=batch_axes + (gy.ndim - 1,))
        gxp = np.zeros_like(xp)
        for j in range(k):
            gxp[..., j:j + l_out] += np.einsum("...ol,oc->...cl", gy, W.data[:, :, j])
        gx = gxp[..., padding:padding + length]
        return gx, gW, gb

    record("conv1d", (x, W, b), (out,), _backward)
    return out


def conv1d_transpose(h, W, b, stride: int = 1, padding: int = 1) -> Tensor:
    """
    1-d transposed convolution, the adjoint of ``conv1d`` (bias excluded).

    Args:
        h: Tensor[..., C_in, L]
        W: Tensor[C_in, C_out, k]
        b: Tensor[C_out]

    Returns:
        Tensor[..., C_out, L + k − 1 − 2·padding]
    """
    h, W, b = as_tensor(h), as_tensor(W), as_tensor(b)
    _check_conv(h, W, b, in_axis=0, out_axis=1, stride=stride, op="conv1d_transpose")
    k = W.shape[2]
    length = h.shape[-1]
    full = length + k - 1
    l_out = full - 2 * padding
    if l_out < 1:
        raise DimensionError("conv1d_transpose output would be empty", h.shape, W.shape)

    out_p = np.zeros(h.shape[:-2] + (W.shape[1], full), dtype=h.dtype)
    for j in range(k):
        out_p[..., j:j + length] += np.einsum("...il,io->...ol", h.data, W.data[:, :, j])
    y = out_p[..., padding:padding + l_out] + b.data[:, None]
    out = Tensor(y.astype(h.dtype, copy=False))

    def _backward(g: List[np.ndarray]):
        gy = g[0]
        batch_axes = tuple(range(gy.ndim - 2))
        pad = [(0, 0)] * (gy.ndim - 1) + [(padding, full - padding - l_out)]
        gp = np.pad(gy, pad)
        cols = sliding_window_view(gp, k, axis=-1)  # (..., C_out, L, k)
        gh = np.einsum("...olk,iok->...il", cols, W.data)
        gW = np.einsum("...il,...olk->...iok", h.data, cols).sum(axis=batch_axes)
        gb = gy.sum(axis=batch_axes + (gy.ndim - 1,))
        return gh, gW, gb

    record("conv1d_transpose", (h, W, b), (out,), _backward)
    return out


@dataclass
class BatchNormStats:
    """Running statistics of a batch-norm layer."""
    mean: np.ndarray
    var: np.ndarray


def batchnorm1d(
    x,
    gamma,
    beta,
    running: BatchNormStats,
    training: bool,
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPS,
) -> Tuple[Tensor, BatchNormStats]:
    """
    Per-channel batch normalisation over every axis except the channel axis (−2).

    Train mode normalises with batch statistics and returns updated running
    statistics; eval mode uses ``running`` and returns it unchanged.

    Raises:
        DegenerateBatchError: Train mode with fewer than two values per channel.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if x.data.ndim < 2:
        raise DimensionError("batchnorm1d input needs (channels, length) axes", x.shape, gamma.shape)
    channels = x.shape[-2]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise DimensionError("batchnorm1d affine mismatch", x.shape, gamma.shape)

    axes = tuple(i for i in range(x.data.ndim) if i != x.data.ndim - 2)
    count = x.data.size // channels
    g_b = gamma.data[:, None]

    if training:
        if count < 2:
            raise DegenerateBatchError(
                f"batchnorm1d train mode needs at least 2 values per channel, got {count}"
            )
        mean = x.data.mean(axis=axes, keepdims=True)
        var = x.data.var(axis=axes, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + eps)
        xhat = (x.data - mean) * inv_std
        out = Tensor((g_b * xhat + beta.data[:, None]).astype(x.dtype, copy=False))
        unbiased = var.reshape(channels) * (count / (count - 1))
        new_running = BatchNormStats(
            mean=((1 - momentum) * running.mean + momentum * mean.reshape(channels)).astype(running.mean.dtype),
            var=((1 - momentum) * running.var + momentum * unbiased).astype(running.var.dtype),
        )

        def _backward(g: List[np.ndarray]):
            gy = g[0]
            ggamma = (gy * xhat).sum(axis=axes)
            gbeta = gy.sum(axis=axes)
            gxhat = gy * g_b
            gx = (inv_std / count) * (
                count * gxhat
                - gxhat.sum(axis=axes, keepdims=True)
                - xhat * (gxhat * xhat).sum(axis=axes, keepdims=True)
            )
            return gx, ggamma, gbeta
    else:
        inv_std = (1.0 / np.sqrt(running.var + eps))[:, None]
        xhat = (x.data - running.mean[:, None]) * inv_std
        out = Tensor((g_b * xhat + beta.data[:, None]).astype(x.dtype, copy=False))
        new_running = running

        def _backward(g: List[np.ndarray]):
            gy = g[0]
            return gy * g_b * inv_std, (gy * xhat).sum(axis=axes), gy.sum(axis=axes)

    record("batchnorm1d", (x, gamma, beta), (out,), _backward)
    return out, new_running


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

GATES = ("input", "forget", "cell", "output")


@dataclass
class LstmCellParams:
    """
    Parameters of one LSTM cell.

    The four gates (input, forget, cell, output) are stacked in that order:
    ``weight_ih`` is [4·hidden, input], ``weight_hh`` is [4·hidden, hidden]
    and ``bias`` is [4·hidden]. ``gate`` returns the per-gate matrices.
    """
    weight_ih: Tensor
    weight_hh: Tensor
    bias: Tensor

    def __post_init__(self):
        rows, _ = self.weight_ih.shape
        if rows % 4 != 0:
            raise DimensionError("LSTM weight_ih rows must be 4·hidden", self.weight_ih.shape, None)
        hidden = rows // 4
        if self.weight_hh.shape != (4 * hidden, hidden):
            raise DimensionError("LSTM weight_hh mismatch", self.weight_hh.shape, (4 * hidden, hidden))
        if self.bias.shape != (4 * hidden,):
            raise DimensionError("LSTM bias mismatch", self.bias.shape, (4 * hidden,))

    @property
    def input_dim(self) -> int:
        return self.weight_ih.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.weight_hh.shape[1]

    def gate(self, name: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (input-to-hidden, hidden-to-hidden, bias) for one gate."""
        idx = GATES.index(name)
        h = self.hidden_dim
        rows = slice(idx * h, (idx + 1) * h)
        return self.weight_ih.data[rows], self.weight_hh.data[rows], self.bias.data[rows]

    def tensors(self) -> Tuple[Tensor, Tensor, Tensor]:
        return self.weight_ih, self.weight_hh, self.bias


@dataclass
class LstmState:
    """Hidden and cell state of an LSTM cell."""
    h: Tensor
    c: Tensor

    @classmethod
    def zeros(cls, batch_shape: Tuple[int, ...], hidden_dim: int, dtype=np.float32) -> "LstmState":
        shape = tuple(batch_shape) + (hidden_dim,)
        return cls(h=Tensor(np.zeros(shape, dtype=dtype)), c=Tensor(np.zeros(shape, dtype=dtype)))


def lstm_step(x_t, prev: LstmState, p: LstmCellParams) -> LstmState:
    """
    Advance an LSTM cell by one step.

        i, f, o = sigmoid(affine),  g = tanh(affine)
        c_t = f ⊙ c_{t−1} + i ⊙ g,  h_t = o ⊙ tanh(c_t)
    """
    x = as_tensor(x_t)
    h_prev, c_prev = prev.h, prev.c
    W_ih, W_hh, b = p.weight_ih, p.weight_hh, p.bias
    hidden = p.hidden_dim
    if x.shape[-1] != p.input_dim:
        raise DimensionError("lstm_step input mismatch", x.shape, W_ih.shape)
    if h_prev.shape != c_prev.shape:
        raise DimensionError("lstm_step state h/c mismatch", h_prev.shape, c_prev.shape)
    if h_prev.shape[-1] != hidden or h_prev.shape[:-1] != x.shape[:-1]:
        raise DimensionError("lstm_step state mismatch", h_prev.shape, x.shape[:-1] + (hidden,))

    z = x.data @ W_ih.data.T + h_prev.data @ W_hh.data.T + b.data
    i = _sigmoid(z[..., :hidden])
    f = _sigmoid(z[..., hidden:2 * hidden])
    g_ = np.tanh(z[..., 2 * hidden:3 * hidden])
    o = _sigmoid(z[..., 3 * hidden:])
    c = f * c_prev.data + i * g_
    tc = np.tanh(c)
    h = o * tc
    h_out, c_out = Tensor(h), Tensor(c)

    def _backward(grads: List[np.ndarray]):
        gh, gc_in = grads
        go = gh * tc
        gc = gc_in + gh * o * (1.0 - tc * tc)
        dz = np.concatenate(
            [
                gc * g_ * i * (1.0 - i),
                gc * c_prev.data * f * (1.0 - f),
                gc * i * (1.0 - g_ * g_),
                go * o * (1.0 - o),
            ],
            axis=-1,
        )
        gx = dz @ W_ih.data
        gh_prev = dz @ W_hh.data
        gc_prev = gc * f
        dz2 = _flat(dz, 4 * hidden)
        gW_ih = dz2.T @ _flat(x.data, p.input_dim)
        gW_hh = dz2.T @ _flat(h_prev.data, hidden)
        gb = dz2.sum(axis=0)
        return gx, gh_prev, gc_prev, gW_ih, gW_hh, gb

    record("lstm_step", (x, h_prev, c_prev, W_ih, W_hh, b), (h_out, c_out), _backward)
    return LstmState(h=h_out, c=c_out)


def lstm_sequence(xs, p: LstmCellParams, initial: Optional[LstmState] = None) -> Tuple[Tensor, LstmState]:
    """
    Run an LSTM cell across the time axis (−2) of ``xs``.

    Returns:
        (hidden states stacked on the time axis, final state)
    """
    xs = as_tensor(xs)
    if xs.data.ndim < 2:
        raise DimensionError("lstm_sequence input needs (time, features) axes", xs.shape, None)
    state = initial or LstmState.zeros(xs.shape[:-2], p.hidden_dim, dtype=xs.dtype)
    hs = []
    for x_t in unstack(xs, axis=-2):
        state = lstm_step(x_t, state, p)
        hs.append(state.h)
    return stack(hs, axis=-2), state


# ---------------------------------------------------------------------------
# Output layer and losses
# ---------------------------------------------------------------------------

def softmax(z, axis: int = -1) -> Tensor:
    """Numerically stable softmax (max-subtracted)."""
    z = as_tensor(z)
    shifted = z.data - z.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(p)

    def _backward(g: List[np.ndarray]):
        gp = g[0]
        return (p * (gp - (gp * p).sum(axis=axis, keepdims=True)),)

    record("softmax", (z,), (out,), _backward)
    return out


def mse_loss(x, x_rec) -> Tensor:
    """Mean of squared elementwise differences."""
    x, x_rec = as_tensor(x), as_tensor(x_rec)
    if x.shape != x_rec.shape:
        raise DimensionError("mse_loss shape mismatch", x.shape, x_rec.shape)
    diff = x.data - x_rec.data
    n = max(diff.size, 1)
    out = Tensor(np.asarray((diff * diff).sum() / n, dtype=diff.dtype))

    def _backward(g: List[np.ndarray]):
        gd = g[0] * (2.0 / n) * diff
        return gd, -gd

    record("mse_loss", (x, x_rec), (out,), _backward)
    return out


def cross_entropy_loss(p, y) -> Tensor:
    """
    Mean negative log-likelihood of class indices ``y`` under probabilities ``p``.

    Args:
        p: Tensor[..., k] probability vectors
        y: integer class index array with shape p.shape[:-1]

    Raises:
        DataError: If a class index is outside [0, k).
    """
    p = as_tensor(p)
    labels = np.asarray(y)
    k = p.shape[-1]
    if labels.shape != p.shape[:-1]:
        raise DimensionError("cross_entropy_loss label shape mismatch", labels.shape, p.shape)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise DataError(f"class index out of range [0, {k})")

    flat_p = _flat(p.data, k)
    flat_y = labels.reshape(-1).astype(np.int64)
    rows = np.arange(flat_y.size)
    picked = flat_p[rows, flat_y]
    clamped = np.maximum(picked, CE_CLAMP)
    n = max(flat_y.size, 1)
    out = Tensor(np.asarray(-np.log(clamped).sum() / n, dtype=p.dtype))

    def _backward(g: List[np.ndarray]):
        gp = np.zeros_like(flat_p)
        live = picked >= CE_CLAMP
        gp[rows[live], flat_y[live]] = -g[0] / (n * picked[live])
        return (gp.reshape(p.shape),)

    record("cross_entropy_loss", (p,), (out,), _backward)
    return out
