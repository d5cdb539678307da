"""
JSON schema definitions and validation for experiment configuration files
and checkpoint metadata.

Unknown keys are rejected everywhere (``additionalProperties: false``) so a
misspelt hyperparameter fails loudly instead of silently falling back to a
default.
"""

from typing import Any, Dict

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match


_RANGE = {
    "type": "array",
    "items": {"type": "integer", "minimum": 1},
    "minItems": 2,
    "maxItems": 2,
}

SYNTHETIC_SOURCE_SCHEMA = {
    "type": "object",
    "properties": {
        "preset": {
            "type": "string",
            "enum": ["dg", "opp", "pamap2"],
            "description": "Shape preset: feature/class/participant counts of a known dataset",
        },
        "num_classes": {"type": "integer", "minimum": 2},
        "num_features": {"type": "integer", "minimum": 2},
        "train_length": {"type": "integer", "minimum": 100},
        "test_length": {"type": "integer", "minimum": 1},
        "dwell": {
            "type": "number",
            "exclusiveMinimum": 1,
            "description": "Expected number of rows an activity lasts",
        },
        "noise": {"type": "number", "minimum": 0},
        "participants": {"type": "integer", "minimum": 1},
        "sample_rate_hz": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}

CSV_SOURCE_SCHEMA = {
    "type": "object",
    "properties": {
        "train": {"type": "string", "minLength": 1},
        "test": {"type": "string", "minLength": 1},
        "num_classes": {"type": "integer", "minimum": 2},
        "participants": {"type": "integer", "minimum": 1},
        "sample_rate_hz": {"type": "integer", "minimum": 1},
    },
    "required": ["train", "test"],
    "additionalProperties": False,
}

EXPERIMENT_CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "scheme": {"type": "string", "enum": ["SEMI", "SUPERVISED", "CS", "DA"]},
        "partition": {"type": "string", "enum": ["IID", "NONIID"]},
        "autoencoder": {"type": "string", "enum": ["FC", "CNN", "LSTM"]},
        "classifier": {"type": "string", "enum": ["LSTM", "SOFTMAX"]},
        "K": {"type": "integer", "minimum": 1},
        "C": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "T": {"type": "integer", "minimum": 0},
        "lr_a": {"type": "number", "exclusiveMinimum": 0},
        "lr_s": {"type": "number", "exclusiveMinimum": 0},
        "e_a": {"type": "integer", "minimum": 0},
        "e_s": {"type": "integer", "minimum": 0},
        "r_l": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "r_f": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "seed": {"type": "integer"},
        "replicates": {"type": "integer", "minimum": 1},
        "eval_every": {"type": "integer", "minimum": 1},
        "window": {"type": "integer", "minimum": 1},
        "classifier_hidden": {"type": "integer", "minimum": 1},
        "bagging": {
            "type": "object",
            "properties": {"batch_size": _RANGE, "seq_len": _RANGE},
            "additionalProperties": False,
        },
        "output_dir": {"type": "string", "minLength": 1},
        "dataset": {
            "type": "object",
            "properties": {
                "synthetic": SYNTHETIC_SOURCE_SCHEMA,
                "csv": CSV_SOURCE_SCHEMA,
            },
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
        },
    },
    "required": ["scheme", "dataset"],
    "additionalProperties": False,
}

CHECKPOINT_METADATA_SCHEMA = {
    "type": "object",
    "properties": {
        "fingerprint": {"type": "string"},
        "models": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "spec": {"type": "object"},
                    "buffers": {"type": "array", "items": {"type": "string"}},
                },
                "required": ["spec"],
            },
        },
    },
    "additionalProperties": False,
}


_checkpoint_metadata_validator = Draft202012Validator(CHECKPOINT_METADATA_SCHEMA)


def validate_checkpoint_metadata(data: Dict[str, Any]) -> None:
    """
    Validate the metadata block stored in a checkpoint header.

    Raises:
        ValidationError: If data doesn't match schema
    """
    error = best_match(_checkpoint_metadata_validator.iter_errors(data))
    if error is not None:
        raise error


__all__ = [
    "EXPERIMENT_CONFIG_SCHEMA",
    "SYNTHETIC_SOURCE_SCHEMA",
    "CSV_SOURCE_SCHEMA",
    "CHECKPOINT_METADATA_SCHEMA",
    "validate_checkpoint_metadata",
]
