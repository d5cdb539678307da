"""
Autoencoder variants.

All variants take windows shaped [..., L, N^f] and produce representations
shaped [..., L, d]. FC and CNN encode each row independently; the LSTM
variant runs its encoder cell across the window and emits every step's hidden
state, the last one being the representation of the whole window. Its decoder
is fed that final state repeated L times and reconstructs the window in
reversed order.
"""

import logging
from typing import Dict, Tuple, Union

import numpy as np

from semifed_har.errors import DimensionError
from semifed_har.models.specs import AutoencoderSpec, AutoencoderVariant, ModelParams
from semifed_har.nn import functional as F
from semifed_har.nn.init import glorot_uniform, ones, zeros
from semifed_har.nn.tensor import Tensor, as_tensor
from semifed_har.utils.seeding import Stream, rng_for


logger = logging.getLogger(__name__)

CONV_CHANNELS = 8
CONV_KERNEL = 3

Arrays = Dict[str, np.ndarray]
Tensors = Dict[str, Tensor]


class FCAutoencoder:
    """dense(N^f→d) + tanh encoder, linear dense(d→N^f) decoder."""

    @staticmethod
    def init(spec: AutoencoderSpec, rng: np.random.Generator) -> Tuple[Arrays, Arrays]:
        f, d = spec.input_dim, spec.repr_dim
        params = {
            "encoder.weight": glorot_uniform(rng, (d, f), f, d),
            "encoder.bias": zeros((d,)),
            "decoder.weight": glorot_uniform(rng, (f, d), d, f),
            "decoder.bias": zeros((f,)),
        }
        return params, {}

    @staticmethod
    def encode(t: Tensors, buffers: Arrays, x: Tensor, training: bool) -> Tuple[Tensor, Arrays]:
        h = F.tanh(F.dense(x, t["encoder.weight"], t["encoder.bias"]))
        return h, buffers

    @staticmethod
    def decode(t: Tensors, h: Tensor) -> Tensor:
        return F.dense(h, t["decoder.weight"], t["decoder.bias"])

    @staticmethod
    def target(x: np.ndarray) -> np.ndarray:
        return x


class ConvAutoencoder:
    """
    conv1d(1→8, k3, s1, p1) + batchnorm + ReLU + flatten + dense(8·N^f→d) encoder;
    dense(d→8·N^f) + unflatten + transposed conv1d(8→1, k3, s1, p1) decoder.

    Each sample row is treated as a one-channel signal of length N^f and batch
    statistics are taken over every row of the batch.
    """

    @staticmethod
    def init(spec: AutoencoderSpec, rng: np.random.Generator) -> Tuple[Arrays, Arrays]:
        f, d = spec.input_dim, spec.repr_dim
        flat = CONV_CHANNELS * f
        params = {
            "conv.weight": glorot_uniform(rng, (CONV_CHANNELS, 1, CONV_KERNEL), CONV_KERNEL, CONV_CHANNELS * CONV_KERNEL),
            "conv.bias": zeros((CONV_CHANNELS,)),
            "bn.gamma": ones((CONV_CHANNELS,)),
            "bn.beta": zeros((CONV_CHANNELS,)),
            "encoder.weight": glorot_uniform(rng, (d, flat), flat, d),
            "encoder.bias": zeros((d,)),
            "decoder.weight": glorot_uniform(rng, (flat, d), d, flat),
            "decoder.bias": zeros((flat,)),
            "deconv.weight": glorot_uniform(rng, (CONV_CHANNELS, 1, CONV_KERNEL), CONV_CHANNELS * CONV_KERNEL, CONV_KERNEL),
            "deconv.bias": zeros((1,)),
        }
        buffers = {
            "bn.running_mean": zeros((CONV_CHANNELS,)),
            "bn.running_var": ones((CONV_CHANNELS,)),
        }
        return params, buffers

    @staticmethod
    def encode(t: Tensors, buffers: Arrays, x: Tensor, training: bool) -> Tuple[Tensor, Arrays]:
        lead, f = x.shape[:-1], x.shape[-1]
        rows = int(np.prod(lead)) if lead else 1
        signal = F.reshape(x, (rows, 1, f))
        conv = F.conv1d(signal, t["conv.weight"], t["conv.bias"], stride=1, padding=1)
        running = F.BatchNormStats(mean=buffers["bn.running_mean"], var=buffers["bn.running_var"])
        normed, running = F.batchnorm1d(conv, t["bn.gamma"], t["bn.beta"], running, training=training)
        act = F.relu(normed)
        flat = F.reshape(act, (rows, CONV_CHANNELS * f))
        h = F.dense(flat, t["encoder.weight"], t["encoder.bias"])
        d = t["encoder.weight"].shape[0]
        new_buffers = {"bn.running_mean": running.mean, "bn.running_var": running.var}
        return F.reshape(h, lead + (d,)), new_buffers

    @staticmethod
    def decode(t: Tensors, h: Tensor) -> Tensor:
        lead = h.shape[:-1]
        rows = int(np.prod(lead)) if lead else 1
        flat_dim = t["decoder.weight"].shape[0]
        f = flat_dim // CONV_CHANNELS
        flat = F.dense(F.reshape(h, (rows, h.shape[-1])), t["decoder.weight"], t["decoder.bias"])
        channels = F.reshape(flat, (rows, CONV_CHANNELS, f))
        out = F.conv1d_transpose(channels, t["deconv.weight"], t["deconv.bias"], stride=1, padding=1)
        return F.reshape(out, lead + (f,))

    @staticmethod
    def target(x: np.ndarray) -> np.ndarray:
        return x


class LSTMAutoencoder:
    """One LSTM cell encoder (N^f→d) and one LSTM cell decoder (d→N^f)."""

    @staticmethod
    def init(spec: AutoencoderSpec, rng: np.random.Generator) -> Tuple[Arrays, Arrays]:
        f, d = spec.input_dim, spec.repr_dim
        params = {}
        params.update(_lstm_init("encoder", rng, f, d))
        params.update(_lstm_init("decoder", rng, d, f))
        return params, {}

    @staticmethod
    def encode(t: Tensors, buffers: Arrays, x: Tensor, training: bool) -> Tuple[Tensor, Arrays]:
        hs, _ = F.lstm_sequence(x, _lstm_params(t, "encoder"))
        return hs, buffers

    @staticmethod
    def decode(t: Tensors, h: Tensor) -> Tensor:
        length = h.shape[-2]
        final = F.unstack(h, axis=-2)[-1]
        repeated = F.stack([final] * length, axis=-2)
        out, _ = F.lstm_sequence(repeated, _lstm_params(t, "decoder"))
        return out

    @staticmethod
    def target(x: np.ndarray) -> np.ndarray:
        return np.flip(x, axis=-2)


def _lstm_init(prefix: str, rng: np.random.Generator, input_dim: int, hidden_dim: int) -> Arrays:
    return {
        f"{prefix}.weight_ih": glorot_uniform(rng, (4 * hidden_dim, input_dim), input_dim, 4 * hidden_dim),
        f"{prefix}.weight_hh": glorot_uniform(rng, (4 * hidden_dim, hidden_dim), hidden_dim, 4 * hidden_dim),
        f"{prefix}.bias": zeros((4 * hidden_dim,)),
    }


def _lstm_params(t: Tensors, prefix: str) -> F.LstmCellParams:
    return F.LstmCellParams(
        weight_ih=t[f"{prefix}.weight_ih"],
        weight_hh=t[f"{prefix}.weight_hh"],
        bias=t[f"{prefix}.bias"],
    )


ARCHITECTURES = {
    AutoencoderVariant.FC: FCAutoencoder,
    AutoencoderVariant.CNN: ConvAutoencoder,
    AutoencoderVariant.LSTM: LSTMAutoencoder,
}


def _arch(ae: ModelParams):
    if not isinstance(ae.spec, AutoencoderSpec):
        raise DimensionError(f"expected autoencoder params, got {type(ae.spec).__name__}")
    return ARCHITECTURES[ae.spec.variant]


def _as_constants(arrays: Arrays) -> Tensors:
    return {k: Tensor(v, name=k) for k, v in arrays.items()}


def build_autoencoder(spec: AutoencoderSpec, seed: int) -> ModelParams:
    """
    Initialise an autoencoder.

    Raises:
        ConfigurationError: If the spec is invalid (e.g. repr_dim >= input_dim).
    """
    spec.validate()
    rng = rng_for(seed, Stream.INIT, 0)
    params, buffers = ARCHITECTURES[spec.variant].init(spec, rng)
    return ModelParams(spec=spec, params=params, buffers=buffers)


def _check_window(ae: ModelParams, window: Tensor) -> None:
    if window.data.ndim < 2 or window.shape[-2] < 1:
        raise DimensionError("window must be non-empty [.., L, N^f]", window.shape, None)
    if window.shape[-1] != ae.spec.input_dim:
        raise DimensionError("feature dimension mismatch", window.shape, (ae.spec.input_dim,))


def encode(ae: ModelParams, window: Union[np.ndarray, Tensor]) -> Tensor:
    """Encode a window [.., L, N^f] into representations [.., L, d] (inference mode)."""
    x = as_tensor(window)
    _check_window(ae, x)
    h, _ = _arch(ae).encode(_as_constants(ae.tensors()), ae.buffers, x, training=False)
    return h


def decode(ae: ModelParams, h: Union[np.ndarray, Tensor]) -> Tensor:
    """Reconstruct windows [.., L, N^f] from representations [.., L, d]."""
    h = as_tensor(h)
    if h.data.ndim < 2 or h.shape[-1] != ae.spec.repr_dim:
        raise DimensionError("representation shape mismatch", h.shape, (ae.spec.repr_dim,))
    return _arch(ae).decode(_as_constants(ae.tensors()), h)


def reconstruction_target(ae: ModelParams, window: np.ndarray) -> np.ndarray:
    """What the decoder output is compared against (the reversed window for LSTM)."""
    return _arch(ae).target(window)


def reconstruction_loss(
    ae: ModelParams,
    tensors: Tensors,
    buffers: Arrays,
    window: np.ndarray,
    training: bool = True,
) -> Tuple[Tensor, Arrays]:
    """
    MSE between the decoded representation and the reconstruction target.

    ``tensors`` carries the (possibly tape-tracked) parameters and ``buffers``
    the current running statistics; returns the loss and the buffers after
    the forward pass.
    """
    arch = _arch(ae)
    x = Tensor(window)
    _check_window(ae, x)
    h, buffers = arch.encode(tensors, buffers, x, training=training)
    x_rec = arch.decode(tensors, h)
    return F.mse_loss(Tensor(arch.target(window)), x_rec), buffers
