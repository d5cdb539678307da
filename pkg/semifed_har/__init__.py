"""
Semi-supervised federated learning for human activity recognition.

Clients train autoencoders on unlabelled sensor time series; the server
averages them with FedAvg and trains a classifier on encoded labelled data.
Centralized, pseudo-label and fully supervised baselines run on the same
deterministic simulator.
"""

__version__ = "1.0.0"
