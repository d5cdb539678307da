"""
Result file writers.

CSV files are RFC 4180: a header row, CRLF line endings, ``.`` decimals.
Floats are written with ``repr`` so output never depends on the locale and
round-trips exactly.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

from semifed_har.models.records import AggregateMetrics, RoundMetrics


logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
AGGREGATE_FILE = "aggregate.csv"
LATENCY_FILE = "latency.csv"
ERROR_FILE = "error.json"

LATENCY_FIELDS = ("scheme", "window_index", "micros")


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[str]]) -> int:
    """Write ``rows`` under ``header``; returns the number of data rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return count


def write_metrics(path: Union[str, Path], rows: Iterable[RoundMetrics]) -> int:
    """``metrics.csv``: one row per (replicate, evaluated round)."""
    ordered = sorted(rows, key=lambda r: (r.replicate_id, r.scheme, r.round))
    return write_csv(path, RoundMetrics.CSV_FIELDS, (r.csv_row() for r in ordered))


def write_aggregate(path: Union[str, Path], rows: Iterable[AggregateMetrics]) -> int:
    """``aggregate.csv``: replicate mean and stderr per (scheme, round)."""
    return write_csv(path, AggregateMetrics.CSV_FIELDS, (r.csv_row() for r in rows))


def write_latency(path: Union[str, Path], reports: Iterable[Any]) -> int:
    """``latency.csv``: per-window mean latency of every report."""
    rows: List[List[str]] = []
    for report in reports:
        for index, micros in enumerate(report.latencies_us):
            rows.append([report.scheme, str(index), repr(float(micros))])
    return write_csv(path, LATENCY_FIELDS, rows)


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Rows of a CSV written by ``write_csv`` as dictionaries."""
    with Path(path).open("r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def write_json(path: Union[str, Path], payload: Dict[str, Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def error_record(error: BaseException) -> Dict[str, Any]:
    """Machine-readable description of a failed run."""
    record: Dict[str, Any] = {
        "status": "error",
        "kind": type(error).__name__,
        "message": str(error),
    }
    key = getattr(error, "key", None)
    if key is not None:
        record["key"] = key
    return record
