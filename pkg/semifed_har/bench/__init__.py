"""Inference latency, analytic operation counts and upload size."""

from semifed_har.bench.macs import Layer, mac_count, model_layers, pipeline_macs
from semifed_har.bench.latency import (
    DEFAULT_REPETITIONS,
    DEFAULT_SAMPLE_RATE_HZ,
    LatencyComparison,
    LatencyReport,
    compare_latency,
    time_pipeline,
)
from semifed_har.bench.traffic import upload_traffic

__all__ = [
    "Layer",
    "mac_count",
    "model_layers",
    "pipeline_macs",
    "DEFAULT_REPETITIONS",
    "DEFAULT_SAMPLE_RATE_HZ",
    "LatencyComparison",
    "LatencyReport",
    "compare_latency",
    "time_pipeline",
    "upload_traffic",
]
