"""
Windowed accuracy and replicate aggregation.
"""

import logging
import math
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from semifed_har.data.dataset import TimeSeriesDataset
from semifed_har.errors import DataError
from semifed_har.models.autoencoders import encode
from semifed_har.models.classifiers import classify
from semifed_har.models.records import AggregateMetrics, RoundMetrics
from semifed_har.models.specs import ModelParams


logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 5000


def predict_window(encoder: Optional[ModelParams], classifier: ModelParams, features: np.ndarray) -> np.ndarray:
    """Per-row predictions for one window; raw features go straight to the classifier when ``encoder`` is None."""
    reps = encode(encoder, features).data if encoder is not None else features
    return classify(classifier, reps)


def window_accuracies(
    encoder: Optional[ModelParams],
    classifier: ModelParams,
    test: TimeSeriesDataset,
    window: int = DEFAULT_WINDOW,
) -> np.ndarray:
    """
    Accuracy of every full non-overlapping window; a trailing partial window is dropped.

    Raises:
        DataError: If the test set is shorter than one window.
    """
    if window < 1:
        raise DataError(f"window must be >= 1, got {window}")
    count = len(test) // window
    if count == 0:
        raise DataError(f"test set of {len(test)} rows is shorter than one window of {window}")
    scores = np.empty(count, dtype=np.float64)
    for i in range(count):
        rows = slice(i * window, (i + 1) * window)
        predictions = predict_window(encoder, classifier, test.features[rows])
        scores[i] = np.count_nonzero(predictions == test.labels[rows]) / window
    return scores


def windowed_accuracy(
    encoder: Optional[ModelParams],
    classifier: ModelParams,
    test: TimeSeriesDataset,
    window: int = DEFAULT_WINDOW,
) -> float:
    """Unweighted mean accuracy over full windows of ``window`` rows."""
    return float(np.mean(window_accuracies(encoder, classifier, test, window)))


def mean_and_stderr(values: Iterable[float]) -> Tuple[float, float]:
    """
    Mean and standard error (sample standard deviation / sqrt(n)); n=1 gives 0.

    Values are sorted before summation so the result does not depend on
    their order.
    """
    ordered = np.sort(np.asarray(list(values), dtype=np.float64))
    n = ordered.size
    if n == 0:
        raise DataError("cannot aggregate an empty group")
    mean = float(ordered.sum() / n)
    if n == 1:
        return mean, 0.0
    variance = float(((ordered - mean) ** 2).sum() / (n - 1))
    return mean, math.sqrt(variance) / math.sqrt(n)


def aggregate_replicates(rows: Iterable[RoundMetrics]) -> List[AggregateMetrics]:
    """
    One ``AggregateMetrics`` per (scheme, round), sorted by scheme then round.

    Raises:
        DataError: If ``rows`` is empty.
    """
    groups: Dict[Tuple[str, int], List[float]] = defaultdict(list)
    for row in rows:
        groups[(row.scheme, row.round)].append(row.accuracy)
    if not groups:
        raise DataError("no metric rows to aggregate")
    results = []
    for (scheme, round_t) in sorted(groups):
        values = groups[(scheme, round_t)]
        mean, stderr = mean_and_stderr(values)
        results.append(AggregateMetrics(scheme=scheme, round=round_t, mean=mean, stderr=stderr, n=len(values)))
    return results
