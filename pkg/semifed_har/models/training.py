"""
Local training loops.

Both loops use bagging: every batch has a freshly drawn size B and sequence
length S, and its B windows start at random offsets of the training series.
An epoch ends once at least as many rows as the series holds have been
consumed. Adam state starts fresh on every call.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Tuple, Union

import numpy as np

from semifed_har.errors import ConfigurationError, DataError
from semifed_har.models.autoencoders import reconstruction_loss
from semifed_har.models.classifiers import classifier_loss
from semifed_har.models.specs import (
    AutoencoderSpec,
    AutoencoderVariant,
    BaggingPolicy,
    ClassifierSpec,
    ModelParams,
)
from semifed_har.nn.optim import AdamState, adam_step
from semifed_har.nn.tensor import GradTape, Tensor
from semifed_har.utils.seeding import Stream, rng_for


logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.Generator]

STATUS_OK = "ok"
STATUS_SKIPPED = "skipped"


@dataclass
class TrainingOutcome:
    """Result of one local training call."""
    params: ModelParams
    status: str = STATUS_OK
    losses: List[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.losses[-1] if self.losses else float("nan")

    @property
    def skipped(self) -> bool:
        return self.status == STATUS_SKIPPED


def _rng(seed: SeedLike, purpose: Stream) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_for(seed, purpose)


def iter_bags(length: int, policy: BaggingPolicy, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """
    Yield index arrays [B, S] for one epoch over a series of ``length`` rows.

    S is capped at ``length`` so every window fits inside the series.
    """
    consumed = 0
    b_lo, b_hi = policy.batch_size
    s_lo, s_hi = policy.seq_len
    while consumed < length:
        batch = int(rng.integers(b_lo, b_hi + 1))
        seq = min(int(rng.integers(s_lo, s_hi + 1)), length)
        starts = rng.integers(0, length - seq + 1, size=batch)
        yield starts[:, None] + np.arange(seq)[None, :]
        consumed += batch * seq


def _step(
    params: dict, buffers: dict, adam: AdamState, lr: float, loss_fn
) -> Tuple[dict, dict, AdamState, float]:
    tracked = {k: Tensor.param(k, v) for k, v in params.items()}
    with GradTape() as tape:
        loss, new_buffers = loss_fn(tracked, buffers)
    grads = tape.backward(loss, tracked.values())
    new_params, adam = adam_step(params, grads.by_name, adam, lr)
    return new_params, new_buffers, adam, loss.item()


def ae_train_locally(
    ae: ModelParams,
    data: np.ndarray,
    lr: float,
    epochs: int,
    policy: BaggingPolicy,
    seed: SeedLike,
) -> TrainingOutcome:
    """
    Train an autoencoder on unlabelled rows [n, N^f] with Adam on reconstruction MSE.

    Returns a new ``ModelParams``; ``ae`` is left untouched. Empty data
    yields a ``skipped`` outcome carrying the input parameters.

    Raises:
        ConfigurationError: For a CNN autoencoder with a minimum batch size below 2.
    """
    spec = ae.spec
    assert isinstance(spec, AutoencoderSpec)
    policy.validate()
    if spec.variant is AutoencoderVariant.CNN and policy.batch_size[0] < 2:
        raise ConfigurationError("CNN autoencoder needs batch_size minimum >= 2")
    if epochs <= 0:
        return TrainingOutcome(params=ae)
    data = np.asarray(data)
    if data.shape[0] == 0:
        logger.warning("Skipping autoencoder training: no local data")
        return TrainingOutcome(params=ae, status=STATUS_SKIPPED)

    rng = _rng(seed, Stream.CLIENT_TRAIN)
    params, buffers = dict(ae.params), dict(ae.buffers)
    adam = AdamState.for_params(params)
    history: List[float] = []
    for epoch in range(epochs):
        batch_losses = []
        for index in iter_bags(data.shape[0], policy, rng):
            window = data[index]

            def loss_fn(tracked, bufs, window=window):
                return reconstruction_loss(ae, tracked, bufs, window, training=True)

            params, buffers, adam, value = _step(params, buffers, adam, lr, loss_fn)
            batch_losses.append(value)
        history.append(float(np.mean(batch_losses)))
        logger.debug(f"Autoencoder epoch {epoch + 1}/{epochs}: loss={history[-1]:.6f}")

    return TrainingOutcome(params=ModelParams(spec=spec, params=params, buffers=buffers), losses=history)


def check_labels(labels: np.ndarray, num_classes: int) -> None:
    """
    Raises:
        DataError: Naming the first row whose label is outside [0, num_classes).
    """
    labels = np.asarray(labels)
    bad = np.flatnonzero((labels < 0) | (labels >= num_classes) | (labels != np.floor(labels)))
    if bad.size:
        row = int(bad[0])
        raise DataError(f"label {labels[row]} at row {row} outside [0, {num_classes})")


def train_classifier(
    cls: ModelParams,
    reps: np.ndarray,
    labels: np.ndarray,
    lr: float,
    epochs: int,
    policy: BaggingPolicy,
    seed: SeedLike,
) -> TrainingOutcome:
    """
    Train a classifier on labelled rows ``reps`` [n, input_dim] / ``labels`` [n]
    with Adam on per-step cross-entropy.

    Raises:
        DataError: If a label is outside [0, num_classes); the message names the row.
    """
    spec = cls.spec
    assert isinstance(spec, ClassifierSpec)
    policy.validate()
    reps = np.asarray(reps)
    labels = np.asarray(labels)
    if reps.shape[0] != labels.shape[0]:
        raise DataError(f"{reps.shape[0]} representation rows but {labels.shape[0]} labels")
    check_labels(labels, spec.num_classes)
    if epochs <= 0:
        return TrainingOutcome(params=cls)
    if reps.shape[0] == 0:
        logger.warning("Skipping classifier training: no labelled data")
        return TrainingOutcome(params=cls, status=STATUS_SKIPPED)

    labels = labels.astype(np.int64)
    rng = _rng(seed, Stream.SERVER_TRAIN)
    params = dict(cls.params)
    adam = AdamState.for_params(params)
    history: List[float] = []
    for epoch in range(epochs):
        batch_losses = []
        for index in iter_bags(reps.shape[0], policy, rng):
            x, y = reps[index], labels[index]

            def loss_fn(tracked, bufs, x=x, y=y):
                return classifier_loss(cls, tracked, x, y), bufs

            params, _, adam, value = _step(params, {}, adam, lr, loss_fn)
            batch_losses.append(value)
        history.append(float(np.mean(batch_losses)))
        logger.debug(f"Classifier epoch {epoch + 1}/{epochs}: loss={history[-1]:.6f}")

    return TrainingOutcome(params=ModelParams(spec=spec, params=params), losses=history)
