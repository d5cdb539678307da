"""
Classifier heads.

SOFTMAX: dense(d→C) + softmax applied to each step independently.
LSTM: one LSTM cell run across the window, each step's hidden state fed to
dense(H→C) + softmax.
"""

import logging
from typing import Dict, Union

import numpy as np

from semifed_har.errors import DimensionError
from semifed_har.models.specs import ClassifierHead, ClassifierSpec, ModelParams
from semifed_har.nn import functional as F
from semifed_har.nn.init import glorot_uniform, zeros
from semifed_har.nn.tensor import Tensor, as_tensor
from semifed_har.utils.seeding import Stream, rng_for


logger = logging.getLogger(__name__)

Arrays = Dict[str, np.ndarray]
Tensors = Dict[str, Tensor]


def _init_params(spec: ClassifierSpec, rng: np.random.Generator) -> Arrays:
    c = spec.num_classes
    if spec.head is ClassifierHead.SOFTMAX:
        d = spec.input_dim
        return {
            "output.weight": glorot_uniform(rng, (c, d), d, c),
            "output.bias": zeros((c,)),
        }
    f, h = spec.input_dim, spec.lstm_hidden
    return {
        "lstm.weight_ih": glorot_uniform(rng, (4 * h, f), f, 4 * h),
        "lstm.weight_hh": glorot_uniform(rng, (4 * h, h), h, 4 * h),
        "lstm.bias": zeros((4 * h,)),
        "output.weight": glorot_uniform(rng, (c, h), h, c),
        "output.bias": zeros((c,)),
    }


def build_classifier(spec: ClassifierSpec, seed: int) -> ModelParams:
    """
    Initialise a classifier head.

    Raises:
        ConfigurationError: If the spec is invalid (e.g. fewer than two classes).
    """
    spec.validate()
    params = _init_params(spec, rng_for(seed, Stream.INIT, 1))
    return ModelParams(spec=spec, params=params)


def _spec(cls: ModelParams) -> ClassifierSpec:
    if not isinstance(cls.spec, ClassifierSpec):
        raise DimensionError(f"expected classifier params, got {type(cls.spec).__name__}")
    return cls.spec


def logits(cls: ModelParams, tensors: Tensors, reps: Tensor) -> Tensor:
    """Per-step class scores for ``reps`` shaped [..., L, input_dim]."""
    spec = _spec(cls)
    if reps.data.ndim < 2 or reps.shape[-1] != spec.input_dim:
        raise DimensionError("classifier input mismatch", reps.shape, (spec.input_dim,))
    if spec.head is ClassifierHead.LSTM:
        cell = F.LstmCellParams(
            weight_ih=tensors["lstm.weight_ih"],
            weight_hh=tensors["lstm.weight_hh"],
            bias=tensors["lstm.bias"],
        )
        reps, _ = F.lstm_sequence(reps, cell)
    return F.dense(reps, tensors["output.weight"], tensors["output.bias"])


def _constants(cls: ModelParams) -> Tensors:
    return {k: Tensor(v, name=k) for k, v in cls.params.items()}


def predict_proba(cls: ModelParams, reps: Union[np.ndarray, Tensor]) -> np.ndarray:
    """Softmax probabilities per step, shape [..., L, num_classes]."""
    return F.softmax(logits(cls, _constants(cls), as_tensor(reps))).data


def classify(cls: ModelParams, reps: Union[np.ndarray, Tensor]) -> np.ndarray:
    """
    Class index per step.

    Softmax is monotone so the argmax is taken on the scores; ``np.argmax``
    returns the lowest index on ties.
    """
    scores = logits(cls, _constants(cls), as_tensor(reps))
    return np.argmax(scores.data, axis=-1)


def classifier_loss(cls: ModelParams, tensors: Tensors, reps: np.ndarray, labels: np.ndarray) -> Tensor:
    """Mean cross-entropy of per-step predictions against ``labels`` [..., L]."""
    probs = F.softmax(logits(cls, tensors, Tensor(reps)))
    return F.cross_entropy_loss(probs, labels)
