"""
Analytic multiply-accumulate counts.

A model is described as a list of ``Layer`` records; the count of one
forward pass over a window is the per-step count of every layer, summed and
multiplied by the window length. Activations, softmax and reshapes cost
nothing.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

from semifed_har.errors import BenchError
from semifed_har.models.autoencoders import CONV_CHANNELS, CONV_KERNEL
from semifed_har.models.specs import (
    AutoencoderSpec,
    AutoencoderVariant,
    ClassifierHead,
    ClassifierSpec,
    ModelParams,
)


logger = logging.getLogger(__name__)

FREE_KINDS = frozenset({"relu", "tanh", "sigmoid", "softmax", "reshape"})


@dataclass(frozen=True)
class Layer:
    """
    One layer of a forward pass.

    dense: ``in_dim``→``out_dim``; lstm: input ``in_dim``, hidden ``out_dim``;
    conv1d / conv1d_transpose: ``in_dim``→``out_dim`` channels, ``kernel``,
    output ``length``; batchnorm: ``out_dim`` channels over ``length``.
    """
    kind: str
    in_dim: int = 0
    out_dim: int = 0
    kernel: int = 0
    length: int = 0

    def step_macs(self) -> int:
        """Multiply-accumulates for one time step."""
        if self.kind == "dense":
            return self.out_dim * self.in_dim
        if self.kind == "lstm":
            return 4 * self.out_dim * (self.in_dim + self.out_dim)
        if self.kind in ("conv1d", "conv1d_transpose"):
            return self.out_dim * self.in_dim * self.kernel * self.length
        if self.kind == "batchnorm":
            return self.out_dim * self.length
        if self.kind in FREE_KINDS:
            return 0
        raise BenchError(f"unsupported layer kind {self.kind!r}")


def autoencoder_layers(spec: AutoencoderSpec, include_decoder: bool = False) -> List[Layer]:
    """Layers of the encoder (and optionally the decoder) of an autoencoder."""
    f, d = spec.input_dim, spec.repr_dim
    if spec.variant is AutoencoderVariant.FC:
        layers = [Layer("dense", f, d), Layer("tanh")]
        decoder = [Layer("dense", d, f)]
    elif spec.variant is AutoencoderVariant.CNN:
        flat = CONV_CHANNELS * f
        layers = [
            Layer("conv1d", 1, CONV_CHANNELS, CONV_KERNEL, f),
            Layer("batchnorm", out_dim=CONV_CHANNELS, length=f),
            Layer("relu"),
            Layer("reshape"),
            Layer("dense", flat, d),
        ]
        decoder = [
            Layer("dense", d, flat),
            Layer("reshape"),
            Layer("conv1d_transpose", CONV_CHANNELS, 1, CONV_KERNEL, f),
        ]
    else:
        layers = [Layer("lstm", f, d)]
        decoder = [Layer("lstm", d, f)]
    return layers + decoder if include_decoder else layers


def classifier_layers(spec: ClassifierSpec) -> List[Layer]:
    c = spec.num_classes
    if spec.head is ClassifierHead.SOFTMAX:
        return [Layer("dense", spec.input_dim, c), Layer("softmax")]
    h = spec.lstm_hidden
    return [Layer("lstm", spec.input_dim, h), Layer("dense", h, c), Layer("softmax")]


def model_layers(model: ModelParams, include_decoder: bool = False) -> List[Layer]:
    """Layer list of a model; autoencoders contribute only their encoder unless asked."""
    if isinstance(model.spec, AutoencoderSpec):
        return autoencoder_layers(model.spec, include_decoder=include_decoder)
    if isinstance(model.spec, ClassifierSpec):
        return classifier_layers(model.spec)
    raise BenchError(f"unsupported model spec {type(model.spec).__name__}")


def mac_count(model: Union[ModelParams, Sequence[Layer]], window_len: int) -> int:
    """
    Exact multiply-accumulate count of one forward pass over ``window_len`` steps.

    Raises:
        BenchError: For an unsupported layer or a negative window length.
    """
    if window_len < 0:
        raise BenchError(f"window_len must be >= 0, got {window_len}")
    layers: Iterable[Layer] = model_layers(model) if isinstance(model, ModelParams) else model
    return window_len * sum(layer.step_macs() for layer in layers)


def pipeline_macs(encoder: Optional[ModelParams], classifier: ModelParams, window_len: int) -> int:
    """Inference cost of encoder (if any) plus classifier over one window."""
    total = mac_count(classifier, window_len)
    if encoder is not None:
        total += mac_count(encoder, window_len)
    return total
