"""
Synthetic HAR-like time series.

The activity follows a Markov chain: at each row it stays with probability
1 - 1/dwell, otherwise it jumps to one of the other classes uniformly. Each
feature j of class c is a sinusoid

    x_j(t) = offset[c, j] + amp[c] * sin(2π · freq[c] · t / rate + phase[j]) + noise · ε

with class-specific offset, amplitude and frequency. Values stay roughly in
[-1, 1]. The test series continues the clock of the training series.
"""

import logging
from dataclasses import asdict, dataclass, replace
from typing import Dict, Tuple

import numpy as np

from semifed_har.data.dataset import DEFAULT_SAMPLE_RATE_HZ, TimeSeriesDataset
from semifed_har.errors import ConfigurationError
from semifed_har.utils.seeding import Stream, rng_for


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthConfig:
    """Shape and signal parameters of a synthetic dataset (defaults mirror DG's shape)."""
    num_classes: int = 3
    num_features: int = 9
    train_length: int = 50_000
    test_length: int = 10_000
    dwell: float = 200.0
    noise: float = 0.1
    participants: int = 10
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ
    seed: int = 0

    def validate(self) -> None:
        if self.num_classes < 2:
            raise ConfigurationError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.num_features < 1:
            raise ConfigurationError(f"num_features must be >= 1, got {self.num_features}")
        if self.train_length < 1 or self.test_length < 1:
            raise ConfigurationError("train_length and test_length must be positive")
        if self.dwell <= 1:
            raise ConfigurationError(f"dwell must be > 1, got {self.dwell}")
        if self.noise < 0:
            raise ConfigurationError(f"noise must be >= 0, got {self.noise}")

    def to_dict(self) -> dict:
        return asdict(self)


# Feature/class/participant counts of the three reference HAR datasets.
PRESETS: Dict[str, SynthConfig] = {
    "dg": SynthConfig(num_classes=3, num_features=9, participants=10),
    "opp": SynthConfig(num_classes=18, num_features=79, participants=4),
    "pamap2": SynthConfig(num_classes=12, num_features=52, participants=9),
}


def synth_from_preset(name: str, **overrides) -> SynthConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown synthetic preset {name!r}; choose from {sorted(PRESETS)}")
    return replace(base, **overrides)


@dataclass(frozen=True)
class SignalTemplates:
    """Per-class signal parameters drawn once per seed."""
    offset: np.ndarray     # [C, F]
    amplitude: np.ndarray  # [C]
    frequency: np.ndarray  # [C], Hz
    phase: np.ndarray      # [F]
    sample_rate_hz: int

    def clean(self, labels: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Noise-free signal for ``labels`` at row clock ``t``; shape [n, F]."""
        angle = 2.0 * np.pi * self.frequency[labels][:, None] * t[:, None] / self.sample_rate_hz
        return self.offset[labels] + self.amplitude[labels][:, None] * np.sin(angle + self.phase[None, :])

    def all_classes(self, t: np.ndarray) -> np.ndarray:
        """Noise-free signal of every class at clock ``t``; shape [n, C, F]."""
        classes = self.offset.shape[0]
        return np.stack([self.clean(np.full(t.shape, c), t) for c in range(classes)], axis=1)


def signal_templates(cfg: SynthConfig) -> SignalTemplates:
    rng = rng_for(cfg.seed, Stream.SYNTH, 0)
    return SignalTemplates(
        offset=rng.uniform(-0.5, 0.5, size=(cfg.num_classes, cfg.num_features)),
        amplitude=rng.uniform(0.2, 0.5, size=cfg.num_classes),
        frequency=rng.uniform(0.2, 3.0, size=cfg.num_classes),
        phase=rng.uniform(0.0, 2.0 * np.pi, size=cfg.num_features),
        sample_rate_hz=cfg.sample_rate_hz,
    )


def markov_labels(length: int, num_classes: int, dwell: float, rng: np.random.Generator) -> np.ndarray:
    """Activity sequence with expected run length ``dwell``."""
    first = int(rng.integers(0, num_classes))
    switch = rng.random(length) < 1.0 / dwell
    switch[0] = False
    jumps = rng.integers(1, num_classes, size=length) * switch
    return (first + np.cumsum(jumps)) % num_classes


def _series(cfg: SynthConfig, templates: SignalTemplates, length: int, t0: int, key: int) -> TimeSeriesDataset:
    rng = rng_for(cfg.seed, Stream.SYNTH, key)
    labels = markov_labels(length, cfg.num_classes, cfg.dwell, rng)
    t = np.arange(t0, t0 + length, dtype=np.float64)
    features = templates.clean(labels, t)
    if cfg.noise > 0:
        features = features + cfg.noise * rng.standard_normal(features.shape)
    return TimeSeriesDataset(
        features=features.astype(np.float32),
        labels=labels,
        num_classes=cfg.num_classes,
        sample_rate_hz=cfg.sample_rate_hz,
        participants=cfg.participants,
    )


def synth_generate(cfg: SynthConfig) -> Tuple[TimeSeriesDataset, TimeSeriesDataset]:
    """Generate (train, test) deterministically from ``cfg.seed``."""
    cfg.validate()
    templates = signal_templates(cfg)
    train = _series(cfg, templates, cfg.train_length, 0, key=1)
    test = _series(cfg, templates, cfg.test_length, cfg.train_length, key=2)
    logger.info(
        f"Generated synthetic data: {cfg.num_features} features, {cfg.num_classes} classes, "
        f"{len(train)} train / {len(test)} test rows"
    )
    return train, test


def nearest_template(templates: SignalTemplates, features: np.ndarray, t0: int = 0) -> np.ndarray:
    """Per-row class whose noise-free signal is closest to ``features``."""
    t = np.arange(t0, t0 + features.shape[0], dtype=np.float64)
    distances = ((templates.all_classes(t) - features[:, None, :].astype(np.float64)) ** 2).sum(axis=-1)
    return np.argmin(distances, axis=1)
