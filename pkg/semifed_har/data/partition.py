"""
Server label subsets and client partitions.

The training series is cut into 100 contiguous divisions (remainder rows go
to the last one). The server's labelled set is a random selection of whole
divisions; IID clients take one short random window from every division;
non-IID clients take one long random window. Client partitions drop labels,
except for the supervised baseline which uses ``LabeledPartition``.

Every client's randomness is keyed by (seed, client_id).
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from semifed_har.data.dataset import TimeSeriesDataset
from semifed_har.errors import ConfigurationError, PartitionError
from semifed_har.utils.numbers import round_half_up
from semifed_har.utils.seeding import Stream, rng_for


logger = logging.getLogger(__name__)

NUM_DIVISIONS = 100


def repr_dim(num_features: int, ratio: float) -> int:
    """
    Representation size for compression ratio ``ratio``: round half up, at least 1.

    Raises:
        ConfigurationError: If ``ratio`` is outside (0, 1).
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigurationError(f"r_f must be in (0, 1), got {ratio}")
    return max(1, round_half_up(ratio * num_features))


def divisions(length: int, count: int = NUM_DIVISIONS) -> List[range]:
    """Contiguous equal row ranges covering [0, length); the last absorbs the remainder."""
    if length < count:
        raise PartitionError(f"need at least {count} rows to split into divisions, got {length}")
    size = length // count
    bounds = [range(i * size, (i + 1) * size) for i in range(count - 1)]
    bounds.append(range((count - 1) * size, length))
    return bounds


def sample_labeled_subset(train: TimeSeriesDataset, ratio: float, seed: int) -> TimeSeriesDataset:
    """
    Select max(1, round(100·ratio)) divisions without replacement and
    concatenate them in temporal order.

    Raises:
        PartitionError: If ``ratio`` is outside (0, 1] or the series has fewer than 100 rows.
    """
    if not 0.0 < ratio <= 1.0:
        raise PartitionError(f"r_l must be in (0, 1], got {ratio}")
    parts = divisions(len(train))
    count = min(NUM_DIVISIONS, max(1, round_half_up(NUM_DIVISIONS * ratio)))
    rng = rng_for(seed, Stream.LABEL_SUBSET)
    chosen = np.sort(rng.choice(NUM_DIVISIONS, size=count, replace=False))
    subset = train.take([parts[i] for i in chosen])
    logger.debug(f"Labelled subset: {count} divisions, {len(subset)} rows")
    return subset


@dataclass(frozen=True)
class ClientPartition:
    """
    Unlabelled local data of one client.

    ``fragments`` are the contiguous pieces the client's data was cut from,
    in the order they were concatenated.
    """
    client_id: int
    fragments: Tuple[np.ndarray, ...]

    @property
    def features(self) -> np.ndarray:
        return np.concatenate(self.fragments, axis=0)

    @property
    def n_k(self) -> int:
        return int(sum(f.shape[0] for f in self.fragments))

    def to_dict(self) -> dict:
        return {
            "client_id": self.client_id,
            "n_k": self.n_k,
            "fragments": [f.tolist() for f in self.fragments],
        }


@dataclass(frozen=True)
class LabeledPartition:
    """Local data of a client in the supervised baseline; labels are kept."""
    client_id: int
    features: np.ndarray
    labels: np.ndarray

    @property
    def n_k(self) -> int:
        return int(self.features.shape[0])


def client_quota(length: int, participants: int) -> int:
    """n_k = floor(n^o / n^p)."""
    if participants < 1:
        raise PartitionError(f"participants must be >= 1, got {participants}")
    return length // participants


def _iid_ranges(length: int, n_k: int, rng: np.random.Generator) -> List[range]:
    fragment = n_k // NUM_DIVISIONS
    ranges = []
    for part in divisions(length):
        start = int(rng.integers(part.start, part.stop - fragment + 1))
        ranges.append(range(start, start + fragment))
    return ranges


def _noniid_ranges(length: int, n_k: int, rng: np.random.Generator) -> List[range]:
    start = int(rng.integers(0, length - n_k + 1))
    return [range(start, start + n_k)]


def _client_ranges(train: TimeSeriesDataset, num_clients: int, participants: int, seed: int, iid: bool):
    n_o = len(train)
    n_k = client_quota(n_o, participants)
    if iid and n_k < NUM_DIVISIONS:
        raise PartitionError(f"IID partitioning needs n_k >= {NUM_DIVISIONS}, got n_k={n_k}")
    if not iid and (n_k < 1 or n_k > n_o):
        raise PartitionError(f"non-IID window n_k={n_k} does not fit in {n_o} rows")
    draw = _iid_ranges if iid else _noniid_ranges
    for client_id in range(num_clients):
        rng = rng_for(seed, Stream.PARTITION, client_id)
        yield client_id, draw(n_o, n_k, rng)


def _unlabeled(train: TimeSeriesDataset, num_clients: int, participants: int, seed: int, iid: bool):
    partitions = [
        ClientPartition(client_id=cid, fragments=tuple(train.features[r.start:r.stop] for r in ranges))
        for cid, ranges in _client_ranges(train, num_clients, participants, seed, iid)
    ]
    logger.info(
        f"Built {len(partitions)} {'IID' if iid else 'non-IID'} client partitions "
        f"of {partitions[0].n_k if partitions else 0} rows"
    )
    return partitions


def partition_iid(train: TimeSeriesDataset, num_clients: int, participants: int, seed: int) -> List[ClientPartition]:
    """
    One random window of floor(n_k/100) rows from each of the 100 divisions per client.

    Windows of different clients may overlap.

    Raises:
        PartitionError: If n_k = floor(n^o/n^p) < 100.
    """
    return _unlabeled(train, num_clients, participants, seed, iid=True)


def partition_noniid(train: TimeSeriesDataset, num_clients: int, participants: int, seed: int) -> List[ClientPartition]:
    """
    One contiguous window of n_k rows at a uniformly random start per client.

    Raises:
        PartitionError: If n_k exceeds the series length.
    """
    return _unlabeled(train, num_clients, participants, seed, iid=False)


def partition_labeled(
    train: TimeSeriesDataset, num_clients: int, participants: int, seed: int, iid: bool
) -> List[LabeledPartition]:
    """Same windows as the unlabelled partitions, labels kept (supervised baseline)."""
    partitions = []
    for cid, ranges in _client_ranges(train, num_clients, participants, seed, iid):
        local = train.take(ranges)
        partitions.append(LabeledPartition(client_id=cid, features=local.features, labels=local.labels))
    return partitions
