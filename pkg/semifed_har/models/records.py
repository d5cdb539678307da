"""
Result records emitted by experiments.

These are the rows that end up in ``metrics.csv`` and ``aggregate.csv``.
"""

import json
import math
from dataclasses import dataclass
from typing import List


@dataclass
class RoundMetrics:
    """
    Test accuracy of one replicate at one evaluated round.

    ``client_loss`` and ``server_loss`` are diagnostics (mean final training
    loss across the round's clients, and the server's final classifier loss);
    they are NaN when the scheme has no such step or at round 0.
    """
    replicate_id: int
    scheme: str
    round: int
    accuracy: float
    windows_evaluated: int
    client_loss: float = math.nan
    server_loss: float = math.nan

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must be in [0, 1], got {self.accuracy}")

    CSV_FIELDS = ("replicate_id", "scheme", "round", "accuracy")

    def csv_row(self) -> List[str]:
        return [str(self.replicate_id), self.scheme, str(self.round), repr(float(self.accuracy))]

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "replicate_id": self.replicate_id,
            "scheme": self.scheme,
            "round": self.round,
            "accuracy": self.accuracy,
            "windows_evaluated": self.windows_evaluated,
            "client_loss": None if math.isnan(self.client_loss) else self.client_loss,
            "server_loss": None if math.isnan(self.server_loss) else self.server_loss,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "RoundMetrics":
        client_loss = data.get("client_loss")
        server_loss = data.get("server_loss")
        return cls(
            replicate_id=int(data["replicate_id"]),
            scheme=data["scheme"],
            round=int(data["round"]),
            accuracy=float(data["accuracy"]),
            windows_evaluated=int(data.get("windows_evaluated", 0)),
            client_loss=math.nan if client_loss is None else float(client_loss),
            server_loss=math.nan if server_loss is None else float(server_loss),
        )


@dataclass
class AggregateMetrics:
    """Replicate mean and standard error of accuracy for one (scheme, round)."""
    scheme: str
    round: int
    mean: float
    stderr: float
    n: int

    CSV_FIELDS = ("scheme", "round", "mean", "stderr", "n")

    def csv_row(self) -> List[str]:
        return [self.scheme, str(self.round), repr(float(self.mean)), repr(float(self.stderr)), str(self.n)]

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "round": self.round,
            "mean": self.mean,
            "stderr": self.stderr,
            "n": self.n,
        }
