"""Communication rounds, aggregation and the experiment driver."""

from semifed_har.federation.state import ClientUpdate, GlobalState
from semifed_har.federation.aggregation import fedavg, select_clients
from semifed_har.federation.client_agent import FederatedClient, create_clients, pseudo_label
from semifed_har.federation.server_agent import (
    run_round_cs,
    run_round_da,
    run_round_semi,
    run_round_supervised,
    warm_up_da,
)
from semifed_har.federation.experiment import Experiment, load_datasets, plan_models, run_experiment

__all__ = [
    "ClientUpdate",
    "GlobalState",
    "fedavg",
    "select_clients",
    "FederatedClient",
    "create_clients",
    "pseudo_label",
    "run_round_cs",
    "run_round_da",
    "run_round_semi",
    "run_round_supervised",
    "warm_up_da",
    "Experiment",
    "load_datasets",
    "plan_models",
    "run_experiment",
]
