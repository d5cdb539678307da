"""
Values passed between the server and clients during a round.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

from semifed_har.errors import AggregationError
from semifed_har.models.specs import ModelParams


@dataclass(frozen=True)
class GlobalState:
    """
    Global models after ``round`` communication rounds.

    ``autoencoder`` is None for schemes without one (SUPERVISED, CS, DA).
    ``client_loss`` / ``server_loss`` describe the round that produced this
    state and are NaN when that step did not run.
    """
    autoencoder: Optional[ModelParams]
    classifier: ModelParams
    round: int = 0
    client_loss: float = math.nan
    server_loss: float = math.nan

    def advance(
        self,
        autoencoder: Optional[ModelParams] = None,
        classifier: Optional[ModelParams] = None,
        client_loss: float = math.nan,
        server_loss: float = math.nan,
    ) -> "GlobalState":
        """Next round's state; models not given are carried over."""
        return replace(
            self,
            autoencoder=autoencoder if autoencoder is not None else self.autoencoder,
            classifier=classifier if classifier is not None else self.classifier,
            round=self.round + 1,
            client_loss=client_loss,
            server_loss=server_loss,
        )


@dataclass(frozen=True)
class ClientUpdate:
    """Locally trained model uploaded by one client, weighted by its sample count."""
    client_id: int
    params: ModelParams
    n_k: int
    loss: float = math.nan

    def __post_init__(self):
        if self.n_k <= 0:
            raise AggregationError(f"client {self.client_id} reported n_k={self.n_k}; weights must be positive")
