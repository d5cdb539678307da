"""Accuracy metrics and replicate aggregation."""

from semifed_har.evaluation.metrics import (
    DEFAULT_WINDOW,
    aggregate_replicates,
    mean_and_stderr,
    predict_window,
    window_accuracies,
    windowed_accuracy,
)

__all__ = [
    "DEFAULT_WINDOW",
    "aggregate_replicates",
    "mean_and_stderr",
    "predict_window",
    "window_accuracies",
    "windowed_accuracy",
]
