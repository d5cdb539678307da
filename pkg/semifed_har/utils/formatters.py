"""
Formatting utilities for terminal output.

Builds ``rich`` tables for aggregated accuracy, latency reports and
checkpoint inspection.
"""

from typing import Any, Dict, Iterable, Optional

from rich.table import Table

from semifed_har.models.specs import DEFAULT_HEAD, SCHEME_NAMES, ClassifierHead


def format_accuracy(mean: float, stderr: float) -> str:
    """Accuracy as a percentage with its standard error, e.g. ``81.25 ± 0.40 %``."""
    return f"{mean * 100:.2f} ± {stderr * 100:.2f} %"


def format_bytes(size: int) -> str:
    if size < 1024:
        return f"{size} B"
    if size < 1024 ** 2:
        return f"{size / 1024:.1f} KiB"
    return f"{size / 1024 ** 2:.1f} MiB"


def describe_scheme(federation: Any) -> str:
    """
    One-line description of a training scheme.

    Args:
        federation: A ``FederationConfig``

    Returns:
        e.g. ``SEMI LSTM-FC, IID, K=100 C=0.1 T=50``
    """
    scheme = federation.scheme.value
    if scheme == "SEMI":
        head = federation.classifier or DEFAULT_HEAD[federation.autoencoder]
        paired = DEFAULT_HEAD[federation.autoencoder] is head
        name = SCHEME_NAMES[federation.autoencoder] if paired else (
            f"{federation.autoencoder.value}-{'FC' if head is ClassifierHead.SOFTMAX else 'LSTM'}"
        )
        scheme = f"{scheme} {name}"
    return (
        f"{scheme}, {federation.partition.value}, "
        f"K={federation.K} C={federation.C} T={federation.T}"
    )


def aggregate_table(rows: Iterable[Any], title: str = "Test accuracy") -> Table:
    """Table of ``AggregateMetrics`` rows."""
    table = Table(title=title)
    table.add_column("Scheme")
    table.add_column("Round", justify="right")
    table.add_column("Accuracy", justify="right")
    table.add_column("n", justify="right")
    for row in rows:
        table.add_row(row.scheme, str(row.round), format_accuracy(row.mean, row.stderr), str(row.n))
    return table


def latency_table(reports: Iterable[Any], comparison: Optional[Any] = None) -> Table:
    """Table of ``LatencyReport`` summaries; the caption carries the significance test."""
    table = Table(title="Inference per one-second window")
    for name in ("Scheme", "Windows", "Mean µs", "Median µs", "p95 µs", "MACs", "Params", "Size"):
        table.add_column(name, justify="left" if name == "Scheme" else "right")
    for report in reports:
        table.add_row(
            report.scheme,
            str(report.windows),
            f"{report.mean_us:.1f}",
            f"{report.median_us:.1f}",
            f"{report.p95_us:.1f}",
            f"{report.macs:,}",
            f"{report.parameter_count:,}",
            format_bytes(report.byte_size),
        )
    if comparison is not None:
        verdict = f"{comparison.faster} faster" if comparison.faster else "no significant difference"
        table.caption = f"Mann-Whitney U={comparison.u_statistic:.1f}, p={comparison.p_value:.3g}: {verdict}"
    return table


def checkpoint_table(summary: Dict[str, Any]) -> Table:
    """Table of tensors in an ``inspect_checkpoint`` summary."""
    table = Table(title=f"{summary['path']} ({format_bytes(summary['bytes'])})")
    table.add_column("Tensor")
    table.add_column("Shape", justify="right")
    for model_name, model in summary["models"].items():
        for tensor_name, shape in model["tensors"].items():
            table.add_row(f"{model_name}/{tensor_name}", "×".join(str(d) for d in shape) or "scalar")
        table.add_row(f"[bold]{model_name}[/bold] parameters", f"{model['parameter_count']:,}", end_section=True)
    fingerprint = summary.get("fingerprint")
    table.caption = f"config fingerprint {fingerprint}" if fingerprint else "no config fingerprint"
    return table
