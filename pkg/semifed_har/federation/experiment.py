"""
Experiment driver: builds data splits and initial models for one replicate,
runs T rounds of the configured scheme and yields test accuracy at round 0
and every ``eval_every`` rounds.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Iterator, Optional, Tuple

from semifed_har.config.settings import ExperimentConfig, PartitionKind, Scheme
from semifed_har.data.dataset import TimeSeriesDataset, load_csv
from semifed_har.data.partition import (
    partition_iid,
    partition_labeled,
    partition_noniid,
    repr_dim,
    sample_labeled_subset,
)
from semifed_har.data.synthetic import SynthConfig, synth_generate
from semifed_har.errors import ConfigError, ConfigurationError, PartitionError
from semifed_har.evaluation.metrics import window_accuracies
from semifed_har.federation.client_agent import FederatedClient, create_clients
from semifed_har.federation.server_agent import (
    run_round_cs,
    run_round_da,
    run_round_semi,
    run_round_supervised,
    warm_up_da,
)
from semifed_har.federation.state import GlobalState
from semifed_har.infrastructure.worker_pool import WorkerPool
from semifed_har.models.autoencoders import build_autoencoder
from semifed_har.models.classifiers import build_classifier
from semifed_har.models.records import RoundMetrics
from semifed_har.models.specs import (
    DEFAULT_HEAD,
    AutoencoderSpec,
    ClassifierHead,
    ClassifierSpec,
)


logger = logging.getLogger(__name__)

Datasets = Tuple[TimeSeriesDataset, TimeSeriesDataset]


def load_datasets(cfg: ExperimentConfig) -> Datasets:
    """Load or generate the (train, test) pair the config names."""
    source = cfg.dataset
    if source.csv is not None:
        csv = source.csv
        train = load_csv(csv.train, csv.num_classes, csv.sample_rate_hz, csv.participants)
        num_classes = csv.num_classes or train.num_classes
        test = load_csv(csv.test, num_classes, csv.sample_rate_hz, csv.participants)
        if test.num_features != train.num_features:
            raise ConfigError("dataset.csv.test", f"{test.num_features} features, train has {train.num_features}")
        if csv.num_classes is None and test.num_classes > train.num_classes:
            raise ConfigError("dataset.csv.num_classes", "test labels exceed the classes seen in train")
        return train, test
    return synth_generate(source.synthetic or SynthConfig())


@dataclass(frozen=True)
class ModelPlan:
    """Specs of the models one scheme trains."""
    autoencoder: Optional[AutoencoderSpec]
    classifier: ClassifierSpec


def plan_models(cfg: ExperimentConfig, num_features: int, num_classes: int) -> ModelPlan:
    """
    Work out model shapes for the scheme.

    Raises:
        ConfigError: If the compression ratio yields an invalid representation size.
    """
    fed = cfg.federation
    if fed.scheme is Scheme.SEMI:
        try:
            d = repr_dim(num_features, fed.r_f)
            ae = AutoencoderSpec(variant=fed.autoencoder, input_dim=num_features, repr_dim=d)
            ae.validate()
        except ConfigurationError as e:
            raise ConfigError("r_f", str(e))
        head = fed.classifier or DEFAULT_HEAD[fed.autoencoder]
        cls = ClassifierSpec(head=head, input_dim=d, num_classes=num_classes, hidden_dim=fed.classifier_hidden)
        return ModelPlan(autoencoder=ae, classifier=cls)
    cls = ClassifierSpec(
        head=ClassifierHead.LSTM,
        input_dim=num_features,
        num_classes=num_classes,
        hidden_dim=fed.classifier_hidden,
    )
    return ModelPlan(autoencoder=None, classifier=cls)


class Experiment:
    """
    One replicate of one configuration.

    The replicate seed is ``federation.seed + replicate_id``; every random
    stream of the run derives from it.
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        replicate_id: int = 0,
        datasets: Optional[Datasets] = None,
        pool: Optional[WorkerPool] = None,
    ):
        self._base = cfg
        self._replicate_id = replicate_id
        self._fed = replace(cfg.federation, seed=cfg.federation.seed + replicate_id)
        self._datasets = datasets
        self._pool = pool
        self._state: Optional[GlobalState] = None
        self._clients: Dict[int, FederatedClient] = {}
        self._labeled: Optional[TimeSeriesDataset] = None
        self._test: Optional[TimeSeriesDataset] = None
        self._evaluations = 0

    @property
    def seed(self) -> int:
        return self._fed.seed

    @property
    def state(self) -> Optional[GlobalState]:
        """Global models after the last completed round."""
        return self._state

    @property
    def labeled(self) -> Optional[TimeSeriesDataset]:
        return self._labeled

    @property
    def clients(self) -> Dict[int, FederatedClient]:
        return self._clients

    def setup(self) -> GlobalState:
        """
        Build data splits, clients and initial models.

        All configuration checks that depend on the data happen here, before
        any training.

        Raises:
            ConfigError: If the config does not fit the dataset.
        """
        cfg, fed = self._base, self._fed
        train, test = self._datasets or load_datasets(cfg)
        if len(test) < cfg.window:
            raise ConfigError("window", f"{cfg.window} exceeds the {len(test)} test rows")
        plan = plan_models(cfg, train.num_features, train.num_classes)

        try:
            self._labeled = sample_labeled_subset(train, fed.r_l, fed.seed)
        except PartitionError as e:
            raise ConfigError("r_l", str(e))
        try:
            if fed.scheme is Scheme.SUPERVISED:
                partitions = partition_labeled(
                    train, fed.K, train.participants, fed.seed, iid=fed.partition is PartitionKind.IID
                )
            elif fed.scheme in (Scheme.SEMI, Scheme.DA):
                split = partition_iid if fed.partition is PartitionKind.IID else partition_noniid
                partitions = split(train, fed.K, train.participants, fed.seed)
            else:
                partitions = []
        except PartitionError as e:
            raise ConfigError("partition", str(e))

        self._clients = create_clients(partitions, fed)
        self._test = test
        autoencoder = build_autoencoder(plan.autoencoder, fed.seed) if plan.autoencoder else None
        classifier = build_classifier(plan.classifier, fed.seed)
        self._state = GlobalState(autoencoder=autoencoder, classifier=classifier, round=0)
        if fed.scheme is Scheme.DA:
            self._state = warm_up_da(self._state, fed, self._labeled)
        logger.info(
            f"Replicate {self._replicate_id} (seed {fed.seed}): {fed.scheme.value}, "
            f"{len(self._clients)} clients, {len(self._labeled)} labelled rows"
        )
        return self._state

    def step(self) -> GlobalState:
        """Run one communication round."""
        fed, state = self._fed, self._state
        if state is None:
            state = self.setup()
        if fed.scheme is Scheme.SEMI:
            state = run_round_semi(state, fed, self._clients, self._labeled, self._pool)
        elif fed.scheme is Scheme.SUPERVISED:
            state = run_round_supervised(state, fed, self._clients, self._pool)
        elif fed.scheme is Scheme.CS:
            state = run_round_cs(state, fed, self._labeled)
        else:
            state = run_round_da(state, fed, self._clients, self._labeled, self._pool)
        self._state = state
        return state

    def evaluate(self) -> RoundMetrics:
        """Test accuracy of the current global models."""
        state = self._state
        scores = window_accuracies(state.autoencoder, state.classifier, self._test, self._base.window)
        self._evaluations += 1
        metrics = RoundMetrics(
            replicate_id=self._replicate_id,
            scheme=self._fed.scheme.value,
            round=state.round,
            accuracy=float(scores.mean()),
            windows_evaluated=int(scores.size),
            client_loss=state.client_loss,
            server_loss=state.server_loss,
        )
        logger.info(f"Replicate {self._replicate_id} round {state.round}: accuracy={metrics.accuracy:.4f}")
        return metrics

    def rounds(self) -> Iterator[RoundMetrics]:
        """Evaluate at round 0, then run T rounds evaluating every ``eval_every`` rounds."""
        if self._state is None:
            self.setup()
        yield self.evaluate()
        for t in range(1, self._fed.T + 1):
            self.step()
            if t % self._base.eval_every == 0:
                yield self.evaluate()

    @property
    def stats(self) -> Dict[str, int]:
        return {
            "replicate_id": self._replicate_id,
            "seed": self.seed,
            "round": self._state.round if self._state else 0,
            "clients": len(self._clients),
            "evaluations": self._evaluations,
        }


def run_experiment(
    cfg: ExperimentConfig,
    replicate_id: int = 0,
    datasets: Optional[Datasets] = None,
    pool: Optional[WorkerPool] = None,
) -> Iterator[RoundMetrics]:
    """
    Stream of ``RoundMetrics`` for one replicate of ``cfg``.

    Data-dependent configuration errors are raised here, before the first
    round runs.
    """
    experiment = Experiment(cfg, replicate_id=replicate_id, datasets=datasets, pool=pool)
    experiment.setup()
    return experiment.rounds()
