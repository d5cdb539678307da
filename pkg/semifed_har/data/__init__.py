"""Dataset loading, synthetic generation, label subsets and client partitions."""

from semifed_har.data.dataset import DEFAULT_SAMPLE_RATE_HZ, TimeSeriesDataset, load_csv
from semifed_har.data.synthetic import (
    PRESETS,
    SignalTemplates,
    SynthConfig,
    nearest_template,
    signal_templates,
    synth_from_preset,
    synth_generate,
)
from semifed_har.data.partition import (
    NUM_DIVISIONS,
    ClientPartition,
    LabeledPartition,
    client_quota,
    divisions,
    partition_iid,
    partition_labeled,
    partition_noniid,
    repr_dim,
    sample_labeled_subset,
)

__all__ = [
    "DEFAULT_SAMPLE_RATE_HZ",
    "TimeSeriesDataset",
    "load_csv",
    "PRESETS",
    "SignalTemplates",
    "SynthConfig",
    "nearest_template",
    "signal_templates",
    "synth_from_preset",
    "synth_generate",
    "NUM_DIVISIONS",
    "ClientPartition",
    "LabeledPartition",
    "client_quota",
    "divisions",
    "partition_iid",
    "partition_labeled",
    "partition_noniid",
    "repr_dim",
    "sample_labeled_subset",
]
