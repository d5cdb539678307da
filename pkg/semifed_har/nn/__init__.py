"""
Minimal reverse-mode differentiable numeric engine.

Provides the tensor/tape machinery, the layers and losses the autoencoders
and classifiers are built from, and the Adam optimiser.
"""

from semifed_har.nn.tensor import (
    GradTape,
    Gradients,
    Tensor,
    active_tape,
    backward,
)
from semifed_har.nn.functional import (
    BatchNormStats,
    LstmCellParams,
    LstmState,
    batchnorm1d,
    conv1d,
    conv1d_transpose,
    cross_entropy_loss,
    dense,
    lstm_sequence,
    lstm_step,
    mse_loss,
    relu,
    reshape,
    sigmoid,
    softmax,
    stack,
    tanh,
    unstack,
)
from semifed_har.nn.optim import AdamState, adam_step

__all__ = [
    "GradTape",
    "Gradients",
    "Tensor",
    "active_tape",
    "backward",
    "BatchNormStats",
    "LstmCellParams",
    "LstmState",
    "batchnorm1d",
    "conv1d",
    "conv1d_transpose",
    "cross_entropy_loss",
    "dense",
    "lstm_sequence",
    "lstm_step",
    "mse_loss",
    "relu",
    "reshape",
    "sigmoid",
    "softmax",
    "stack",
    "tanh",
    "unstack",
    "AdamState",
    "adam_step",
]
