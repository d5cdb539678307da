"""
Model specifications and parameter containers.

``ModelParams`` is a value: an ordered mapping of named arrays plus the spec
that says how to run them forward. Training functions always return a new
``ModelParams`` and never modify the one they were given.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Optional, Tuple, Union

import numpy as np

from semifed_har.errors import ConfigurationError


class AutoencoderVariant(Enum):
    """Autoencoder architectures."""
    FC = "FC"       # dense encoder/decoder applied per sample
    CNN = "CNN"     # conv1d + batchnorm + ReLU encoder, transposed-conv decoder
    LSTM = "LSTM"   # one LSTM cell each for encoder and decoder


class ClassifierHead(Enum):
    """Classifier architectures."""
    LSTM = "LSTM"         # LSTM cell -> dense -> softmax
    SOFTMAX = "SOFTMAX"   # dense -> softmax


# Paired heads of the three named schemes FC-LSTM, CNN-LSTM and LSTM-FC.
DEFAULT_HEAD: Dict[AutoencoderVariant, ClassifierHead] = {
    AutoencoderVariant.FC: ClassifierHead.LSTM,
    AutoencoderVariant.CNN: ClassifierHead.LSTM,
    AutoencoderVariant.LSTM: ClassifierHead.SOFTMAX,
}

SCHEME_NAMES: Dict[AutoencoderVariant, str] = {
    AutoencoderVariant.FC: "FC-LSTM",
    AutoencoderVariant.CNN: "CNN-LSTM",
    AutoencoderVariant.LSTM: "LSTM-FC",
}


@dataclass(frozen=True)
class AutoencoderSpec:
    """
    Shape of an autoencoder.

    ``repr_dim`` must be smaller than ``input_dim``; ``allow_square`` lifts
    that for tests that need an identity-like encoder.
    """
    variant: AutoencoderVariant
    input_dim: int
    repr_dim: int
    allow_square: bool = False

    def validate(self) -> None:
        upper_ok = self.repr_dim <= self.input_dim if self.allow_square else self.repr_dim < self.input_dim
        if self.repr_dim < 1 or not upper_ok:
            raise ConfigurationError(
                f"invalid autoencoder spec: repr_dim={self.repr_dim} must satisfy "
                f"1 <= repr_dim < input_dim={self.input_dim}"
            )

    def to_dict(self) -> dict:
        return {
            "kind": "autoencoder",
            "variant": self.variant.value,
            "input_dim": self.input_dim,
            "repr_dim": self.repr_dim,
            "allow_square": self.allow_square,
        }


@dataclass(frozen=True)
class ClassifierSpec:
    """Shape of a classifier; ``hidden_dim`` defaults to ``input_dim`` for the LSTM head."""
    head: ClassifierHead
    input_dim: int
    num_classes: int
    hidden_dim: Optional[int] = None

    @property
    def lstm_hidden(self) -> int:
        return self.hidden_dim if self.hidden_dim is not None else self.input_dim

    def validate(self) -> None:
        if self.num_classes < 2:
            raise ConfigurationError(f"invalid classifier spec: num_classes={self.num_classes} must be >= 2")
        if self.input_dim < 1:
            raise ConfigurationError(f"invalid classifier spec: input_dim={self.input_dim} must be >= 1")
        if self.head is ClassifierHead.LSTM and self.lstm_hidden < 1:
            raise ConfigurationError(f"invalid classifier spec: hidden_dim={self.hidden_dim} must be >= 1")

    def to_dict(self) -> dict:
        return {
            "kind": "classifier",
            "head": self.head.value,
            "input_dim": self.input_dim,
            "num_classes": self.num_classes,
            "hidden_dim": self.hidden_dim,
        }


ModelSpec = Union[AutoencoderSpec, ClassifierSpec]


def spec_from_dict(data: dict) -> ModelSpec:
    """Rebuild a spec from ``to_dict`` output."""
    if data.get("kind") == "autoencoder":
        return AutoencoderSpec(
            variant=AutoencoderVariant(data["variant"]),
            input_dim=int(data["input_dim"]),
            repr_dim=int(data["repr_dim"]),
            allow_square=bool(data.get("allow_square", False)),
        )
    if data.get("kind") == "classifier":
        hidden = data.get("hidden_dim")
        return ClassifierSpec(
            head=ClassifierHead(data["head"]),
            input_dim=int(data["input_dim"]),
            num_classes=int(data["num_classes"]),
            hidden_dim=int(hidden) if hidden is not None else None,
        )
    raise ConfigurationError(f"unknown model spec kind: {data.get('kind')!r}")


@dataclass(frozen=True)
class BaggingPolicy:
    """Ranges that batch sizes and sequence lengths are drawn from."""
    batch_size: Tuple[int, int] = (16, 64)
    seq_len: Tuple[int, int] = (8, 64)

    def validate(self) -> None:
        for name, (lo, hi) in (("batch_size", self.batch_size), ("seq_len", self.seq_len)):
            if not 1 <= lo <= hi:
                raise ConfigurationError(f"invalid bagging {name} range [{lo}, {hi}]")


@dataclass(frozen=True)
class ModelParams:
    """
    Named parameter tensors of one model plus its spec.

    ``params`` are trainable; ``buffers`` hold non-trainable state such as
    batch-norm running statistics. Both keep insertion order.
    """
    spec: ModelSpec
    params: Dict[str, np.ndarray]
    buffers: Dict[str, np.ndarray] = field(default_factory=dict)

    def tensors(self) -> Dict[str, np.ndarray]:
        """All arrays, parameters first then buffers."""
        merged = dict(self.params)
        merged.update(self.buffers)
        return merged

    def parameter_count(self) -> int:
        return int(sum(v.size for v in self.params.values()))

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {k: tuple(v.shape) for k, v in self.tensors().items()}

    def with_tensors(self, tensors: Dict[str, np.ndarray]) -> "ModelParams":
        """Return a copy whose arrays are taken from ``tensors`` (same names)."""
        return replace(
            self,
            params={k: tensors[k] for k in self.params},
            buffers={k: tensors[k] for k in self.buffers},
        )

    def astype(self, dtype) -> "ModelParams":
        return replace(
            self,
            params={k: v.astype(dtype) for k, v in self.params.items()},
            buffers={k: v.astype(dtype) for k, v in self.buffers.items()},
        )

    def equals(self, other: "ModelParams") -> bool:
        """Bit-exact comparison of spec and every array."""
        mine, theirs = self.tensors(), other.tensors()
        return (
            self.spec == other.spec
            and list(mine) == list(theirs)
            and all(np.array_equal(mine[k], theirs[k]) and mine[k].dtype == theirs[k].dtype for k in mine)
        )
