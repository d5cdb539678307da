"""
Upload traffic proxy: serialized size of what one client sends per round.

A SEMI client uploads only its autoencoder; a SUPERVISED client uploads the
LSTM classifier trained on raw features.
"""

from dataclasses import replace
from typing import Dict

from semifed_har.config.settings import ExperimentConfig, Scheme
from semifed_har.federation.experiment import plan_models
from semifed_har.infrastructure.checkpoint import serialized_size
from semifed_har.models.autoencoders import build_autoencoder
from semifed_har.models.classifiers import build_classifier


def upload_traffic(cfg: ExperimentConfig, num_features: int, num_classes: int) -> Dict[str, int]:
    """Bytes uploaded per client and per round under SEMI and SUPERVISED."""
    seed = cfg.federation.seed
    semi = plan_models(replace(cfg, federation=replace(cfg.federation, scheme=Scheme.SEMI)), num_features, num_classes)
    supervised = plan_models(
        replace(cfg, federation=replace(cfg.federation, scheme=Scheme.SUPERVISED)), num_features, num_classes
    )
    semi_bytes = serialized_size(build_autoencoder(semi.autoencoder, seed))
    supervised_bytes = serialized_size(build_classifier(supervised.classifier, seed))
    per_round = cfg.federation.clients_per_round
    return {
        "semi_client_bytes": semi_bytes,
        "supervised_client_bytes": supervised_bytes,
        "semi_round_bytes": semi_bytes * per_round,
        "supervised_round_bytes": supervised_bytes * per_round,
    }
