"""Checkpoints, result files and the worker pool."""

from semifed_har.infrastructure.checkpoint import (
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    inspect_checkpoint,
    load_checkpoint,
    save_checkpoint,
    serialized_size,
)
from semifed_har.infrastructure.results import (
    error_record,
    read_csv,
    write_aggregate,
    write_csv,
    write_json,
    write_latency,
    write_metrics,
)
from semifed_har.infrastructure.worker_pool import WorkerPool, create_worker_pool

__all__ = [
    "Checkpoint",
    "decode_checkpoint",
    "encode_checkpoint",
    "inspect_checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "serialized_size",
    "error_record",
    "read_csv",
    "write_aggregate",
    "write_csv",
    "write_json",
    "write_latency",
    "write_metrics",
    "WorkerPool",
    "create_worker_pool",
]
