"""Shared fixtures."""

import json

import numpy as np
import pytest

from semifed_har.data.dataset import TimeSeriesDataset
from semifed_har.data.synthetic import SynthConfig, synth_generate


@pytest.fixture(scope="session")
def small_synth():
    """Small DG-shaped (train, test) pair."""
    return synth_generate(SynthConfig(train_length=2000, test_length=1000, dwell=50.0, participants=2, seed=3))


@pytest.fixture
def toy_dataset():
    """1000 rows, 3 features, two classes alternating every 100 rows."""
    labels = (np.arange(1000) // 100) % 2
    features = np.stack([labels * 2.0 - 1.0, np.sin(np.arange(1000) / 10.0), np.zeros(1000)], axis=1)
    return TimeSeriesDataset(features=features, labels=labels, num_classes=2, participants=2)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to ``tmp_path/config.json`` and return its path."""

    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    return _write


def tiny_experiment_config(**overrides):
    """Experiment document small enough for a round trip in seconds."""
    config = {
        "scheme": "SEMI",
        "autoencoder": "FC",
        "classifier": "SOFTMAX",
        "K": 4,
        "C": 0.5,
        "T": 2,
        "e_a": 1,
        "e_s": 1,
        "r_l": 0.1,
        "replicates": 1,
        "window": 500,
        "bagging": {"batch_size": [4, 8], "seq_len": [8, 16]},
        "dataset": {
            "synthetic": {
                "train_length": 2000,
                "test_length": 1000,
                "dwell": 50.0,
                "participants": 2,
            }
        },
    }
    config.update(overrides)
    return config
