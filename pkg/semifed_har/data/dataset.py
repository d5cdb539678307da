"""
Time-series HAR datasets and CSV ingestion.

The CSV contract is a header row ``f0,...,f{N^f-1},label`` followed by one
row per sample in temporal order. Cells must be numeric and present; labels
must be non-negative integers.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from semifed_har.errors import DataError, ParseError


logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_RATE_HZ = 33


@dataclass
class TimeSeriesDataset:
    """
    Labelled rows ordered by time.

    Attributes:
        features: float32 array [n, N^f]
        labels: int64 array [n]
        num_classes: number of activity classes
        sample_rate_hz: sampling rate of the rows
        participants: number of people the original recording came from (n^p)
        breaks: row offsets where the series jumps in time; rows on either
            side of a break are not neighbours
    """
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ
    participants: int = 1
    breaks: Tuple[int, ...] = ()

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DataError(f"features must be 2-D [rows, N^f], got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise DataError(
                f"{self.features.shape[0]} feature rows but labels have shape {self.labels.shape}"
            )
        if self.labels.size:
            bad = np.flatnonzero((self.labels < 0) | (self.labels >= self.num_classes))
            if bad.size:
                row = int(bad[0])
                raise DataError(
                    f"label {self.labels[row]} at row {row} outside [0, {self.num_classes})"
                )

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.features.shape[1])

    def take(self, ranges: Sequence[range]) -> "TimeSeriesDataset":
        """
        Concatenate the given row ranges, in the order given.

        A break is recorded wherever consecutive ranges are not adjacent.
        """
        if not ranges:
            return self._with(self.features[:0], self.labels[:0])
        index = np.concatenate([np.arange(r.start, r.stop) for r in ranges])
        breaks: List[int] = []
        offset = 0
        previous_stop = None
        for r in ranges:
            if offset and r.start != previous_stop:
                breaks.append(offset)
            breaks.extend(offset + b - r.start for b in self.breaks if r.start < b < r.stop)
            offset += len(r)
            previous_stop = r.stop
        return self._with(self.features[index], self.labels[index], tuple(breaks))

    def segments(self) -> List[range]:
        """Contiguous row ranges between breaks."""
        edges = [0, *self.breaks, len(self)]
        return [range(a, b) for a, b in zip(edges, edges[1:]) if b > a]

    def label_histogram(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def _with(self, features: np.ndarray, labels: np.ndarray, breaks: Tuple[int, ...] = ()) -> "TimeSeriesDataset":
        return TimeSeriesDataset(
            features=features,
            labels=labels,
            num_classes=self.num_classes,
            sample_rate_hz=self.sample_rate_hz,
            participants=self.participants,
            breaks=breaks,
        )


def _expected_header(num_features: int) -> list:
    return [f"f{i}" for i in range(num_features)] + ["label"]


def load_csv(
    path: Union[str, Path],
    num_classes: Optional[int] = None,
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ,
    participants: int = 1,
) -> TimeSeriesDataset:
    """
    Load a preprocessed HAR CSV file.

    Line numbers in errors are 1-based physical file lines; blank lines are
    skipped but still counted. The header is the first non-blank line.

    Raises:
        ParseError: For an empty file, an unknown header, a ragged row, a
            missing or non-numeric cell, or a non-integer label.
        DataError: If a label is not below ``num_classes``.
    """
    path = Path(path)
    lines = pd.Series(path.read_text(encoding="utf-8").splitlines(), dtype=object)
    lines.index = pd.RangeIndex(1, len(lines) + 1)
    lines = lines[lines.str.strip() != ""]
    if lines.empty:
        raise ParseError("no data rows")

    columns = [c.strip() for c in lines.iloc[0].split(",")]
    if len(columns) < 2 or columns != _expected_header(len(columns) - 1):
        raise ParseError(f"unknown header {','.join(columns)}", line=int(lines.index[0]))
    body = lines.iloc[1:]
    if body.empty:
        raise ParseError("no data rows")

    ragged = body.str.count(",") + 1 != len(columns)
    if ragged.any():
        raise ParseError("ragged row", line=int(ragged.idxmax()))

    frame = body.str.split(",", expand=True)
    frame.columns = columns
    feature_cols = columns[:-1]
    line_numbers = body.index.to_numpy()
    values = {}
    for name in columns:
        cells = frame[name].str.strip()
        missing = cells == ""
        if missing.any():
            raise ParseError(f"missing value in column {name}", line=int(missing.idxmax()))
        numeric = pd.to_numeric(cells, errors="coerce")
        bad = numeric.isna() | ~np.isfinite(numeric.to_numpy(dtype=np.float64, na_value=np.nan))
        if bad.any():
            raise ParseError(f"non-numeric cell in column {name}", line=int(bad.idxmax()))
        values[name] = numeric.to_numpy(dtype=np.float64)

    raw_labels = values["label"]
    non_integer = (raw_labels != np.floor(raw_labels)) | (raw_labels < 0)
    if non_integer.any():
        raise ParseError("non-integer label", line=int(line_numbers[np.flatnonzero(non_integer)[0]]))

    labels = raw_labels.astype(np.int64)
    features = np.stack([values[c] for c in feature_cols], axis=1).astype(np.float32)
    inferred = int(labels.max()) + 1
    dataset = TimeSeriesDataset(
        features=features,
        labels=labels,
        num_classes=num_classes if num_classes is not None else max(inferred, 2),
        sample_rate_hz=sample_rate_hz,
        participants=participants,
    )
    logger.info(
        f"Loaded {path.name}: {len(dataset)} rows, {dataset.num_features} features, "
        f"{dataset.num_classes} classes"
    )
    return dataset
