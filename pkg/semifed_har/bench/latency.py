"""
Inference latency on one-second windows.

The test series is cut into windows of ``sample_rate_hz`` rows; every
window runs through the full inference pipeline (encoder, if any, then the
classifier) once as warm-up and then ``repetitions`` times under
``time.perf_counter_ns``.
"""

import logging
import math
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional

import numpy as np
from scipy import stats as scipy_stats

from semifed_har.bench.macs import pipeline_macs
from semifed_har.data.dataset import TimeSeriesDataset
from semifed_har.errors import BenchError
from semifed_har.evaluation.metrics import predict_window
from semifed_har.infrastructure.checkpoint import serialized_size
from semifed_har.models.specs import ModelParams


logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_RATE_HZ = 33
DEFAULT_REPETITIONS = 10
MIN_COMPARISON_WINDOWS = 30
SIGNIFICANCE_LEVEL = 0.05


@dataclass
class LatencyReport:
    """Per-window inference latency of one pipeline plus its static costs."""
    scheme: str
    latencies_us: List[float]
    min_latencies_us: List[float]
    mean_us: float
    median_us: float
    p95_us: float
    macs: int
    parameter_count: int
    byte_size: int

    @property
    def windows(self) -> int:
        return len(self.latencies_us)

    def to_dict(self) -> Dict[str, Any]:
        """Summary without the per-window samples."""
        return {
            "scheme": self.scheme,
            "windows": self.windows,
            "mean_us": self.mean_us,
            "median_us": self.median_us,
            "p95_us": self.p95_us,
            "macs": self.macs,
            "parameter_count": self.parameter_count,
            "byte_size": self.byte_size,
        }


@dataclass
class LatencyComparison:
    """Two-sided Mann-Whitney U test between two reports' per-window latencies."""
    scheme_a: str
    scheme_b: str
    u_statistic: float
    p_value: float
    faster: Optional[str]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scheme_a": self.scheme_a,
            "scheme_b": self.scheme_b,
            "u_statistic": self.u_statistic,
            "p_value": self.p_value,
            "faster": self.faster,
        }


@contextmanager
def pinned_to_one_core(enabled: bool = True) -> Iterator[None]:
    """Restrict the process to a single logical core where the platform allows it."""
    if not enabled or not hasattr(os, "sched_setaffinity"):
        yield
        return
    original = os.sched_getaffinity(0)
    try:
        os.sched_setaffinity(0, {min(original)})
    except OSError as e:
        logger.warning(f"Could not pin to one core: {e}")
        yield
        return
    try:
        yield
    finally:
        os.sched_setaffinity(0, original)


def _clock_floor_ns() -> int:
    return max(1, int(math.ceil(time.get_clock_info("perf_counter").resolution * 1e9)))


def time_pipeline(
    encoder: Optional[ModelParams],
    classifier: ModelParams,
    test: TimeSeriesDataset,
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ,
    repetitions: int = DEFAULT_REPETITIONS,
    scheme: str = "",
    pin_cpu: bool = True,
) -> LatencyReport:
    """
    Time the inference pipeline on every full one-second window of ``test``.

    Raises:
        BenchError: For zero repetitions, a model without parameters, or a
            test set shorter than one window.
    """
    if repetitions < 1:
        raise BenchError("need ≥1 repetition")
    models = [m for m in (encoder, classifier) if m is not None]
    if not models or any(m.parameter_count() == 0 for m in models):
        raise BenchError("empty model: nothing to time")
    if sample_rate_hz < 1:
        raise BenchError(f"sample_rate_hz must be >= 1, got {sample_rate_hz}")
    count = len(test) // sample_rate_hz
    if count == 0:
        raise BenchError(f"test set of {len(test)} rows is shorter than one {sample_rate_hz}-row window")

    windows = [test.features[i * sample_rate_hz:(i + 1) * sample_rate_hz] for i in range(count)]
    samples = np.empty((repetitions, count), dtype=np.int64)
    floor_ns = _clock_floor_ns()

    with pinned_to_one_core(pin_cpu):
        for window in windows:
            predict_window(encoder, classifier, window)
        for r in range(repetitions):
            for i, window in enumerate(windows):
                start = time.perf_counter_ns()
                predict_window(encoder, classifier, window)
                samples[r, i] = max(time.perf_counter_ns() - start, floor_ns)

    micros = samples.astype(np.float64) / 1000.0
    per_window = micros.mean(axis=0)
    report = LatencyReport(
        scheme=scheme or ("SEMI" if encoder is not None else "SUPERVISED"),
        latencies_us=per_window.tolist(),
        min_latencies_us=micros.min(axis=0).tolist(),
        mean_us=float(per_window.mean()),
        median_us=float(np.median(per_window)),
        p95_us=float(np.percentile(per_window, 95)),
        macs=pipeline_macs(encoder, classifier, sample_rate_hz),
        parameter_count=sum(m.parameter_count() for m in models),
        byte_size=sum(serialized_size(m) for m in models),
    )
    logger.info(
        f"{report.scheme}: {count} windows x {repetitions} reps, "
        f"mean {report.mean_us:.1f}us, median {report.median_us:.1f}us, {report.macs} MACs"
    )
    return report


def compare_latency(a: LatencyReport, b: LatencyReport) -> LatencyComparison:
    """
    Two-sided Mann-Whitney U test on per-window latencies.

    ``faster`` names the scheme with the lower latencies when p < 0.05.

    Raises:
        BenchError: If either report has fewer than 30 windows.
    """
    for report in (a, b):
        if report.windows < MIN_COMPARISON_WINDOWS:
            raise BenchError(
                f"{report.scheme or 'report'} has {report.windows} windows, "
                f"need >= {MIN_COMPARISON_WINDOWS} to compare"
            )
    x = np.asarray(a.latencies_us, dtype=np.float64)
    y = np.asarray(b.latencies_us, dtype=np.float64)
    half = x.size * y.size / 2.0

    if np.ptp(np.concatenate([x, y])) == 0:
        return LatencyComparison(a.scheme, b.scheme, u_statistic=half, p_value=1.0, faster=None)

    result = scipy_stats.mannwhitneyu(x, y, alternative="two-sided")
    u, p = float(result.statistic), float(result.pvalue)
    faster = None
    if p < SIGNIFICANCE_LEVEL and u != half:
        faster = a.scheme if u < half else b.scheme
    return LatencyComparison(a.scheme, b.scheme, u_statistic=u, p_value=p, faster=faster)
