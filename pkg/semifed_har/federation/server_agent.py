"""
Server side of a communication round for each scheme.

SEMI:        clients train the autoencoder, FedAvg, server encodes its
             labelled set and trains the classifier on the representations.
SUPERVISED:  clients train the classifier on their own labels, FedAvg.
CS:          the server trains the classifier on its labelled set; no clients.
DA:          clients pseudo-label with the global classifier and train it,
             FedAvg, then the server fine-tunes on its labelled set.

A client that raises is logged and dropped; FedAvg renormalises over the
clients that finished. If none finished the global model is kept.
"""

import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np

from semifed_har.config.settings import FederationConfig
from semifed_har.data.dataset import TimeSeriesDataset
from semifed_har.federation.aggregation import fedavg, select_clients
from semifed_har.federation.client_agent import FederatedClient
from semifed_har.federation.state import ClientUpdate, GlobalState
from semifed_har.infrastructure.worker_pool import WorkerPool
from semifed_har.models.autoencoders import encode
from semifed_har.models.specs import ModelParams
from semifed_har.models.training import TrainingOutcome, train_classifier
from semifed_har.utils.seeding import Stream, rng_for


logger = logging.getLogger(__name__)

ClientTask = Callable[[FederatedClient], ClientUpdate]


def _collect(
    clients: Dict[int, FederatedClient],
    selected: List[int],
    task: ClientTask,
    pool: Optional[WorkerPool],
    round_t: int,
) -> List[ClientUpdate]:
    def guarded(client_id: int) -> Optional[ClientUpdate]:
        try:
            return task(clients[client_id])
        except Exception as e:
            logger.error(f"Round {round_t}: client {client_id} failed and is dropped: {e}")
            return None

    runner = pool or WorkerPool(max_workers=1)
    results = runner.map(guarded, selected)
    return [u for u in results if u is not None]


def _aggregate(updates: List[ClientUpdate], current: ModelParams, round_t: int) -> ModelParams:
    if not updates:
        logger.warning(f"Round {round_t}: no client finished; keeping the global model")
        return current
    return fedavg(updates)


def _mean_loss(updates: List[ClientUpdate]) -> float:
    losses = [u.loss for u in updates if not math.isnan(u.loss)]
    return float(np.mean(losses)) if losses else math.nan


def server_train(
    cls: ModelParams, features: np.ndarray, labels: np.ndarray, cfg: FederationConfig, round_t: int
) -> TrainingOutcome:
    """Server-side supervised training with lr_s / e_s on the round's server stream."""
    return train_classifier(
        cls, features, labels, cfg.lr_s, cfg.e_s, cfg.bagging, rng_for(cfg.seed, Stream.SERVER_TRAIN, round_t)
    )


def encode_labeled(ae: ModelParams, labeled: TimeSeriesDataset) -> np.ndarray:
    """
    Encode the server's labelled rows; one representation per row.

    Each contiguous segment (one or more adjacent divisions) is its own
    sequence, so recurrent state never carries across a gap in time.
    """
    segments = labeled.segments()
    if len(segments) <= 1:
        return encode(ae, labeled.features).data
    return np.concatenate([encode(ae, labeled.features[s.start:s.stop]).data for s in segments], axis=0)


def run_round_semi(
    state: GlobalState,
    cfg: FederationConfig,
    clients: Dict[int, FederatedClient],
    labeled: TimeSeriesDataset,
    pool: Optional[WorkerPool] = None,
) -> GlobalState:
    """One round of semi-supervised federated learning."""
    t = state.round + 1
    selected = select_clients(cfg.K, cfg.C, t, cfg.seed)
    updates = _collect(clients, selected, lambda c: c.train_autoencoder(state.autoencoder, t), pool, t)
    autoencoder = _aggregate(updates, state.autoencoder, t)

    reps = encode_labeled(autoencoder, labeled)
    outcome = server_train(state.classifier, reps, labeled.labels, cfg, t)
    logger.info(
        f"Round {t} [SEMI]: {len(updates)}/{len(selected)} clients, "
        f"client loss={_mean_loss(updates):.5f}, server loss={outcome.final_loss:.5f}"
    )
    return state.advance(
        autoencoder=autoencoder,
        classifier=outcome.params,
        client_loss=_mean_loss(updates),
        server_loss=outcome.final_loss,
    )


def run_round_supervised(
    state: GlobalState,
    cfg: FederationConfig,
    clients: Dict[int, FederatedClient],
    pool: Optional[WorkerPool] = None,
) -> GlobalState:
    """One round of canonical FedAvg over locally trained classifiers; no server training."""
    t = state.round + 1
    selected = select_clients(cfg.K, cfg.C, t, cfg.seed)
    updates = _collect(clients, selected, lambda c: c.train_supervised(state.classifier, t), pool, t)
    classifier = _aggregate(updates, state.classifier, t)
    logger.info(f"Round {t} [SUPERVISED]: {len(updates)}/{len(selected)} clients, client loss={_mean_loss(updates):.5f}")
    return state.advance(classifier=classifier, client_loss=_mean_loss(updates))


def run_round_cs(state: GlobalState, cfg: FederationConfig, labeled: TimeSeriesDataset) -> GlobalState:
    """One round of centralised training on the server's labelled rows."""
    t = state.round + 1
    outcome = server_train(state.classifier, labeled.features, labeled.labels, cfg, t)
    logger.info(f"Round {t} [CS]: server loss={outcome.final_loss:.5f}")
    return state.advance(classifier=outcome.params, server_loss=outcome.final_loss)


def warm_up_da(state: GlobalState, cfg: FederationConfig, labeled: TimeSeriesDataset) -> GlobalState:
    """Initial supervised training of the DA classifier on the server, before round 1."""
    outcome = server_train(state.classifier, labeled.features, labeled.labels, cfg, 0)
    logger.info(f"DA warm-up: server loss={outcome.final_loss:.5f}")
    return GlobalState(autoencoder=None, classifier=outcome.params, round=state.round, server_loss=outcome.final_loss)


def run_round_da(
    state: GlobalState,
    cfg: FederationConfig,
    clients: Dict[int, FederatedClient],
    labeled: TimeSeriesDataset,
    pool: Optional[WorkerPool] = None,
) -> GlobalState:
    """One round of pseudo-label federated training followed by a server fine-tune."""
    t = state.round + 1
    selected = select_clients(cfg.K, cfg.C, t, cfg.seed)
    updates = _collect(clients, selected, lambda c: c.train_on_pseudo_labels(state.classifier, t), pool, t)
    aggregated = _aggregate(updates, state.classifier, t)
    outcome = server_train(aggregated, labeled.features, labeled.labels, cfg, t)
    logger.info(
        f"Round {t} [DA]: {len(updates)}/{len(selected)} clients, "
        f"client loss={_mean_loss(updates):.5f}, server loss={outcome.final_loss:.5f}"
    )
    return state.advance(classifier=outcome.params, client_loss=_mean_loss(updates), server_loss=outcome.final_loss)
