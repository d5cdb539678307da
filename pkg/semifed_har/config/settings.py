"""
Configuration management for semi-supervised federated HAR experiments.

Experiment files are JSON (or YAML) documents validated against
``EXPERIMENT_CONFIG_SCHEMA``; runtime knobs (worker-pool size, log level and
format) come from environment variables, optionally via a ``.env`` file.
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml
from dotenv import load_dotenv
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from semifed_har.data.synthetic import SynthConfig, synth_from_preset
from semifed_har.errors import ConfigError, ConfigurationError
from semifed_har.models.schemas import EXPERIMENT_CONFIG_SCHEMA
from semifed_har.models.specs import AutoencoderVariant, BaggingPolicy, ClassifierHead
from semifed_har.utils.numbers import round_half_up

# Load environment variables from .env file if it exists
load_dotenv()

logger = logging.getLogger(__name__)


class Scheme(Enum):
    """Training schemes."""
    SEMI = "SEMI"               # clients train autoencoders, server trains classifier on encoded labelled data
    SUPERVISED = "SUPERVISED"   # canonical FedAvg of classifiers on labelled client data
    CS = "CS"                   # server-only supervised training on the labelled subset
    DA = "DA"                   # clients pseudo-label with the global classifier


class PartitionKind(Enum):
    """How client data is cut from the training series."""
    IID = "IID"
    NONIID = "NONIID"


@dataclass(frozen=True)
class FederationConfig:
    """Hyperparameters of the federated training loop."""
    scheme: Scheme = Scheme.SEMI
    partition: PartitionKind = PartitionKind.IID
    autoencoder: AutoencoderVariant = AutoencoderVariant.LSTM
    classifier: Optional[ClassifierHead] = None
    K: int = 100
    C: float = 0.1
    T: int = 50
    lr_a: float = 0.01
    lr_s: float = 0.001
    e_a: int = 2
    e_s: int = 5
    r_l: float = 0.0625
    r_f: float = 0.5
    seed: int = 0
    classifier_hidden: Optional[int] = None
    bagging: BaggingPolicy = field(default_factory=BaggingPolicy)

    @property
    def clients_per_round(self) -> int:
        return round_half_up(self.K * self.C)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scheme": self.scheme.value,
            "partition": self.partition.value,
            "autoencoder": self.autoencoder.value,
            "classifier": self.classifier.value if self.classifier else None,
            "K": self.K,
            "C": self.C,
            "T": self.T,
            "lr_a": self.lr_a,
            "lr_s": self.lr_s,
            "e_a": self.e_a,
            "e_s": self.e_s,
            "r_l": self.r_l,
            "r_f": self.r_f,
            "seed": self.seed,
            "classifier_hidden": self.classifier_hidden,
            "bagging": {
                "batch_size": list(self.bagging.batch_size),
                "seq_len": list(self.bagging.seq_len),
            },
        }


@dataclass(frozen=True)
class CsvSourceConfig:
    """Preprocessed CSV train/test files."""
    train: str
    test: str
    num_classes: Optional[int] = None
    participants: int = 1
    sample_rate_hz: int = 33


@dataclass(frozen=True)
class DatasetConfig:
    """Exactly one of ``synthetic`` or ``csv`` is set."""
    synthetic: Optional[SynthConfig] = None
    csv: Optional[CsvSourceConfig] = None

    def to_dict(self) -> Dict[str, Any]:
        if self.csv is not None:
            return {"csv": asdict(self.csv)}
        return {"synthetic": (self.synthetic or SynthConfig()).to_dict()}


@dataclass(frozen=True)
class RuntimeConfig:
    """Process-level knobs taken from the environment."""
    workers: int = 1
    log_level: str = "INFO"
    log_format: str = "console"


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment description."""
    federation: FederationConfig = field(default_factory=FederationConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    replicates: int = 64
    eval_every: int = 2
    window: int = 5000
    output_dir: str = "results"
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)

    def to_dict(self) -> Dict[str, Any]:
        """Everything that determines results (runtime knobs excluded)."""
        data = self.federation.to_dict()
        data.update(
            {
                "dataset": self.dataset.to_dict(),
                "replicates": self.replicates,
                "eval_every": self.eval_every,
                "window": self.window,
            }
        )
        return data

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.blake2b(canonical.encode("utf-8"), digest_size=16).hexdigest()

    def with_overrides(
        self,
        output_dir: Optional[str] = None,
        replicates: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> "ExperimentConfig":
        """Apply command-line overrides."""
        cfg = self
        if output_dir is not None:
            cfg = replace(cfg, output_dir=output_dir)
        if replicates is not None:
            if replicates < 1:
                raise ConfigError("replicates", f"must be >= 1, got {replicates}")
            cfg = replace(cfg, replicates=replicates)
        if seed is not None:
            cfg = replace(cfg, federation=replace(cfg.federation, seed=seed))
        return cfg


def _error_key(error) -> str:
    path = [str(p) for p in error.absolute_path]
    if error.validator == "additionalProperties" and isinstance(error.instance, dict):
        known = set(error.schema.get("properties", {}))
        unknown = sorted(k for k in error.instance if k not in known)
        if unknown:
            path.append(unknown[0])
    elif error.validator == "required" and isinstance(error.instance, dict):
        missing = [k for k in error.validator_value if k not in error.instance]
        if missing:
            path.append(missing[0])
    return ".".join(path) or "config"


def _range(value, default: Tuple[int, int]) -> Tuple[int, int]:
    return (int(value[0]), int(value[1])) if value is not None else default


class ConfigManager:
    """Manages loading and validation of experiment configuration."""

    def __init__(self, config_file: Optional[str] = None):
        """
        Initialize configuration manager.

        Args:
            config_file: Path to a JSON or YAML experiment file
        """
        self.config_file = config_file or "experiment.json"
        self._config: Optional[ExperimentConfig] = None

    def load_config(self) -> ExperimentConfig:
        """
        Load, validate and apply defaults.

        Raises:
            ConfigError: If the file is missing, unparsable or invalid; the
                message names the offending key.
        """
        if self._config is not None:
            return self._config

        path = Path(self.config_file)
        if not path.exists():
            raise ConfigError("config", f"file not found: {path}")
        text = path.read_text(encoding="utf-8")
        try:
            if path.suffix.lower() in (".yaml", ".yml"):
                raw = yaml.safe_load(text)
            else:
                raw = json.loads(text)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigError("config", f"cannot parse {path.name}: {e}")
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be an object")

        self._config = self.from_dict(raw, base_dir=path.parent)
        logger.info(f"Loaded experiment config {path.name} (fingerprint {self._config.fingerprint()[:12]})")
        return self._config

    def from_dict(self, raw: Dict[str, Any], base_dir: Optional[Path] = None) -> ExperimentConfig:
        """Validate a parsed document and build the config dataclasses."""
        error = best_match(Draft202012Validator(EXPERIMENT_CONFIG_SCHEMA).iter_errors(raw))
        if error is not None:
            raise ConfigError(_error_key(error), error.message)

        bagging_raw = raw.get("bagging", {})
        defaults = BaggingPolicy()
        bagging = BaggingPolicy(
            batch_size=_range(bagging_raw.get("batch_size"), defaults.batch_size),
            seq_len=_range(bagging_raw.get("seq_len"), defaults.seq_len),
        )
        for name, (lo, hi) in (("batch_size", bagging.batch_size), ("seq_len", bagging.seq_len)):
            if lo > hi:
                raise ConfigError(f"bagging.{name}", f"minimum {lo} exceeds maximum {hi}")

        scheme = Scheme(raw["scheme"])
        classifier = ClassifierHead(raw["classifier"]) if "classifier" in raw else None
        federation = FederationConfig(
            scheme=scheme,
            partition=PartitionKind(raw.get("partition", "IID")),
            autoencoder=AutoencoderVariant(raw.get("autoencoder", "LSTM")),
            classifier=classifier,
            K=raw.get("K", 100),
            C=float(raw.get("C", 0.1)),
            T=raw.get("T", 50),
            lr_a=float(raw.get("lr_a", 0.01)),
            lr_s=float(raw.get("lr_s", 0.001)),
            e_a=raw.get("e_a", 2),
            e_s=raw.get("e_s", 5),
            r_l=float(raw.get("r_l", 0.0625)),
            r_f=float(raw.get("r_f", 0.5)),
            seed=raw.get("seed", 0),
            classifier_hidden=raw.get("classifier_hidden"),
            bagging=bagging,
        )
        if federation.clients_per_round < 1:
            raise ConfigError("C", f"K·C must round to at least one client, got K={federation.K}, C={federation.C}")
        if federation.clients_per_round > federation.K:
            raise ConfigError("C", "more clients per round than clients")
        if scheme is not Scheme.SEMI and classifier is ClassifierHead.SOFTMAX:
            raise ConfigError("classifier", f"scheme {scheme.value} trains an LSTM classifier on raw features")
        if (
            scheme is Scheme.SEMI
            and federation.autoencoder is AutoencoderVariant.CNN
            and bagging.batch_size[0] < 2
        ):
            raise ConfigError("bagging.batch_size", "CNN autoencoder needs a minimum batch size of 2")

        config = ExperimentConfig(
            federation=federation,
            dataset=self._dataset(raw["dataset"], base_dir),
            replicates=raw.get("replicates", 64),
            eval_every=raw.get("eval_every", 2),
            window=raw.get("window", 5000),
            output_dir=raw.get("output_dir", "results"),
            runtime=self.runtime_from_env(),
        )
        return config

    @staticmethod
    def _dataset(raw: Dict[str, Any], base_dir: Optional[Path]) -> DatasetConfig:
        if "csv" in raw:
            src = raw["csv"]
            base = base_dir or Path(".")
            return DatasetConfig(
                csv=CsvSourceConfig(
                    train=str(base / src["train"]),
                    test=str(base / src["test"]),
                    num_classes=src.get("num_classes"),
                    participants=src.get("participants", 1),
                    sample_rate_hz=src.get("sample_rate_hz", 33),
                )
            )
        src = dict(raw.get("synthetic", {}))
        preset = src.pop("preset", None)
        try:
            synthetic = synth_from_preset(preset, **src) if preset else SynthConfig(**src)
            synthetic.validate()
        except ConfigurationError as e:
            raise ConfigError("dataset.synthetic", str(e))
        return DatasetConfig(synthetic=synthetic)

    @staticmethod
    def runtime_from_env() -> RuntimeConfig:
        """
        Read SEMIFED_WORKERS, SEMIFED_LOG_LEVEL and SEMIFED_LOG_FORMAT.

        Raises:
            ConfigError: If a variable holds an invalid value.
        """
        workers_raw = os.getenv("SEMIFED_WORKERS") or "1"
        try:
            workers = int(workers_raw)
        except ValueError:
            raise ConfigError("SEMIFED_WORKERS", f"not an integer: {workers_raw!r}")
        if workers < 1:
            raise ConfigError("SEMIFED_WORKERS", f"must be >= 1, got {workers}")

        log_level = (os.getenv("SEMIFED_LOG_LEVEL") or "INFO").upper()
        if log_level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigError("SEMIFED_LOG_LEVEL", f"unknown level {log_level!r}")

        log_format = (os.getenv("SEMIFED_LOG_FORMAT") or "console").lower()
        if log_format not in ("console", "json"):
            raise ConfigError("SEMIFED_LOG_FORMAT", f"expected 'console' or 'json', got {log_format!r}")

        return RuntimeConfig(workers=workers, log_level=log_level, log_format=log_format)


def parse_config(path: str) -> ExperimentConfig:
    """Load and validate an experiment file."""
    return ConfigManager(config_file=path).load_config()
