"""
Client selection and federated averaging.
"""

import logging
from typing import Dict, List, Sequence

import numpy as np

from semifed_har.errors import AggregationError, ConfigurationError
from semifed_har.federation.state import ClientUpdate
from semifed_har.models.specs import ModelParams
from semifed_har.utils.numbers import round_half_up
from semifed_har.utils.seeding import Stream, rng_for


logger = logging.getLogger(__name__)


def select_clients(num_clients: int, fraction: float, round_t: int, seed: int) -> List[int]:
    """
    Sample round(K·C) distinct client ids for round ``round_t``, sorted ascending.

    Raises:
        ConfigurationError: If round(K·C) is not within [1, K].
    """
    count = round_half_up(num_clients * fraction)
    if not 1 <= count <= num_clients:
        raise ConfigurationError(f"round(K·C)={count} must be within [1, {num_clients}]")
    rng = rng_for(seed, Stream.SELECTION, round_t)
    chosen = rng.choice(num_clients, size=count, replace=False)
    return sorted(int(c) for c in chosen)


def fedavg(updates: Sequence[ClientUpdate]) -> ModelParams:
    """
    Weighted mean of client models with weights n_k / Σ n_k.

    Updates are accumulated in ascending client-id order in float64 and cast
    back to each tensor's dtype, so the result does not depend on the order
    of ``updates``.

    Raises:
        AggregationError: If ``updates`` is empty, holds a client twice, or a
            client's tensors differ in names or shapes from the others.
    """
    if not updates:
        raise AggregationError("no client updates to aggregate")
    ordered = sorted(updates, key=lambda u: u.client_id)
    ids = [u.client_id for u in ordered]
    if len(set(ids)) != len(ids):
        raise AggregationError(f"duplicate client ids in updates: {ids}")

    reference = ordered[0].params
    ref_tensors = reference.tensors()
    for update in ordered[1:]:
        tensors = update.params.tensors()
        if list(tensors) != list(ref_tensors):
            raise AggregationError(f"client {update.client_id} uploaded tensors {list(tensors)}, expected {list(ref_tensors)}")
        for name, array in tensors.items():
            if array.shape != ref_tensors[name].shape:
                raise AggregationError(
                    f"client {update.client_id} tensor {name} has shape {array.shape}, "
                    f"expected {ref_tensors[name].shape}"
                )

    total = float(sum(u.n_k for u in ordered))
    weights = [u.n_k / total for u in ordered]
    client_tensors = [u.params.tensors() for u in ordered]
    averaged: Dict[str, np.ndarray] = {}
    for name, ref in ref_tensors.items():
        acc = np.zeros(ref.shape, dtype=np.float64)
        for weight, tensors in zip(weights, client_tensors):
            acc += weight * tensors[name].astype(np.float64)
        averaged[name] = acc.astype(ref.dtype)

    logger.debug(f"FedAvg over clients {ids} (Σn_k={int(total)})")
    return reference.with_tensors(averaged)
