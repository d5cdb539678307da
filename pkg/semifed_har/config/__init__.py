"""Configuration management for semi-supervised federated HAR experiments."""

from semifed_har.config.settings import (
    ConfigManager,
    CsvSourceConfig,
    DatasetConfig,
    ExperimentConfig,
    FederationConfig,
    PartitionKind,
    RuntimeConfig,
    Scheme,
    parse_config,
)

__all__ = [
    "ConfigManager",
    "CsvSourceConfig",
    "DatasetConfig",
    "ExperimentConfig",
    "FederationConfig",
    "PartitionKind",
    "RuntimeConfig",
    "Scheme",
    "parse_config",
]
