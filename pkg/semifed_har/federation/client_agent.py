"""
Simulated federated client.

A client holds its local partition and trains whatever global model the
server broadcasts to it. Every random draw a client makes in round t comes
from a stream keyed by (seed, t, client_id), so clients can run in any order
or concurrently.
"""

import logging
from typing import Dict, Union

import numpy as np

from semifed_har.config.settings import FederationConfig
from semifed_har.data.partition import ClientPartition, LabeledPartition
from semifed_har.federation.state import ClientUpdate
from semifed_har.models.classifiers import classify
from semifed_har.models.specs import ModelParams
from semifed_har.models.training import ae_train_locally, train_classifier
from semifed_har.utils.seeding import Stream, rng_for


logger = logging.getLogger(__name__)


def pseudo_label(
    cls: ModelParams, features: np.ndarray, seq_len: tuple, rng: np.random.Generator
) -> np.ndarray:
    """
    Label every row with ``cls``, classifying consecutive chunks whose lengths
    are drawn from ``seq_len``; the classifier state restarts at each chunk.
    """
    n = features.shape[0]
    labels = np.empty(n, dtype=np.int64)
    lo, hi = seq_len
    start = 0
    while start < n:
        stop = min(n, start + int(rng.integers(lo, hi + 1)))
        labels[start:stop] = classify(cls, features[start:stop])
        start = stop
    return labels


class FederatedClient:
    """
    One client of the simulation.

    Unlabelled clients (``ClientPartition``) serve SEMI and DA; labelled
    clients (``LabeledPartition``) serve the supervised baseline only.
    """

    def __init__(self, partition: Union[ClientPartition, LabeledPartition], config: FederationConfig):
        self._partition = partition
        self._config = config
        self._features = partition.features
        self._rounds = 0
        self._samples_trained = 0

    @property
    def client_id(self) -> int:
        return self._partition.client_id

    @property
    def n_k(self) -> int:
        return self._partition.n_k

    def _rng(self, purpose: Stream, round_t: int) -> np.random.Generator:
        return rng_for(self._config.seed, purpose, round_t, self.client_id)

    def _record(self) -> None:
        self._rounds += 1
        self._samples_trained += self.n_k

    def train_autoencoder(self, global_ae: ModelParams, round_t: int) -> ClientUpdate:
        """Unsupervised local training of the broadcast autoencoder."""
        cfg = self._config
        outcome = ae_train_locally(
            global_ae,
            self._features,
            cfg.lr_a,
            cfg.e_a,
            cfg.bagging,
            self._rng(Stream.CLIENT_TRAIN, round_t),
        )
        self._record()
        return ClientUpdate(client_id=self.client_id, params=outcome.params, n_k=self.n_k, loss=outcome.final_loss)

    def train_supervised(self, global_cls: ModelParams, round_t: int) -> ClientUpdate:
        """Local supervised training of the broadcast classifier on the client's own labels."""
        if not isinstance(self._partition, LabeledPartition):
            raise TypeError(f"client {self.client_id} holds no labels")
        cfg = self._config
        outcome = train_classifier(
            global_cls,
            self._features,
            self._partition.labels,
            cfg.lr_a,
            cfg.e_a,
            cfg.bagging,
            self._rng(Stream.CLIENT_TRAIN, round_t),
        )
        self._record()
        return ClientUpdate(client_id=self.client_id, params=outcome.params, n_k=self.n_k, loss=outcome.final_loss)

    def pseudo_labels(self, global_cls: ModelParams, round_t: int) -> np.ndarray:
        """Labels the broadcast classifier assigns to this client's rows."""
        return pseudo_label(
            global_cls, self._features, self._config.bagging.seq_len, self._rng(Stream.PSEUDO_LABEL, round_t)
        )

    def train_on_pseudo_labels(self, global_cls: ModelParams, round_t: int) -> ClientUpdate:
        """Pseudo-label local data with the broadcast classifier, then train that classifier on it."""
        cfg = self._config
        labels = self.pseudo_labels(global_cls, round_t)
        outcome = train_classifier(
            global_cls,
            self._features,
            labels,
            cfg.lr_a,
            cfg.e_a,
            cfg.bagging,
            self._rng(Stream.CLIENT_TRAIN, round_t),
        )
        self._record()
        return ClientUpdate(client_id=self.client_id, params=outcome.params, n_k=self.n_k, loss=outcome.final_loss)

    @property
    def stats(self) -> Dict[str, int]:
        return {
            "client_id": self.client_id,
            "n_k": self.n_k,
            "rounds_participated": self._rounds,
            "samples_trained": self._samples_trained,
        }


def create_clients(partitions, config: FederationConfig) -> Dict[int, FederatedClient]:
    """Factory function to create one client per partition, keyed by client id."""
    return {p.client_id: FederatedClient(p, config) for p in partitions}
