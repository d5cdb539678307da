"""Model specifications, architectures, training loops, records and schemas."""

from semifed_har.models.specs import (
    DEFAULT_HEAD,
    SCHEME_NAMES,
    AutoencoderSpec,
    AutoencoderVariant,
    BaggingPolicy,
    ClassifierHead,
    ClassifierSpec,
    ModelParams,
    spec_from_dict,
)
from semifed_har.models.autoencoders import (
    build_autoencoder,
    decode,
    encode,
    reconstruction_loss,
    reconstruction_target,
)
from semifed_har.models.classifiers import (
    build_classifier,
    classifier_loss,
    classify,
    predict_proba,
)
from semifed_har.models.training import (
    TrainingOutcome,
    ae_train_locally,
    iter_bags,
    train_classifier,
)
from semifed_har.models.records import AggregateMetrics, RoundMetrics
from semifed_har.models.schemas import EXPERIMENT_CONFIG_SCHEMA, validate_checkpoint_metadata

__all__ = [
    "DEFAULT_HEAD",
    "SCHEME_NAMES",
    "AutoencoderSpec",
    "AutoencoderVariant",
    "BaggingPolicy",
    "ClassifierHead",
    "ClassifierSpec",
    "ModelParams",
    "spec_from_dict",
    "build_autoencoder",
    "decode",
    "encode",
    "reconstruction_loss",
    "reconstruction_target",
    "build_classifier",
    "classifier_loss",
    "classify",
    "predict_proba",
    "TrainingOutcome",
    "ae_train_locally",
    "iter_bags",
    "train_classifier",
    "AggregateMetrics",
    "RoundMetrics",
    "EXPERIMENT_CONFIG_SCHEMA",
    "validate_checkpoint_metadata",
]
