"""
Semi-supervised federated HAR - command-line entry point.

    semifed-har run <config> [--out DIR] [--replicates N] [--seed S]
    semifed-har bench <config> --checkpoint F [--out DIR] [--repetitions R]
    semifed-har inspect <checkpoint> [--json]

Exit codes: 0 on success, 1 for configuration errors, 2 for any other failure.
Failures also print a JSON error record on stderr (and to ``error.json`` in
the output directory when one is known).
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import structlog
from rich.console import Console

from semifed_har import __version__
from semifed_har.bench import compare_latency, time_pipeline, upload_traffic
from semifed_har.bench.latency import MIN_COMPARISON_WINDOWS, LatencyComparison, LatencyReport
from semifed_har.config.settings import ConfigManager, ExperimentConfig, Scheme, parse_config
from semifed_har.errors import BenchError, ConfigError
from semifed_har.evaluation.metrics import aggregate_replicates
from semifed_har.federation.experiment import Datasets, Experiment, load_datasets, plan_models
from semifed_har.federation.state import GlobalState
from semifed_har.infrastructure.checkpoint import inspect_checkpoint, load_checkpoint, save_checkpoint
from semifed_har.infrastructure.results import (
    AGGREGATE_FILE,
    ERROR_FILE,
    LATENCY_FILE,
    METRICS_FILE,
    error_record,
    write_aggregate,
    write_json,
    write_latency,
    write_metrics,
)
from semifed_har.infrastructure.worker_pool import create_worker_pool
from semifed_har.models.autoencoders import build_autoencoder
from semifed_har.models.classifiers import build_classifier
from semifed_har.models.records import RoundMetrics
from semifed_har.utils.formatters import aggregate_table, checkpoint_table, describe_scheme, latency_table


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2

LOG_FILE = "run.log"
CHECKPOINT_DIR = "checkpoints"
RESOLVED_CONFIG_FILE = "config.resolved.json"
LATENCY_SUMMARY_FILE = "latency.json"


def setup_logging(level: str = "INFO", fmt: str = "console", log_file: Optional[Path] = None) -> None:
    """
    Configure the root logger.

    Records are rendered by structlog; only the file handler stamps times, so
    everything printed to the terminal is reproducible.
    """
    pre_chain = [structlog.stdlib.add_log_level, structlog.stdlib.add_logger_name]
    if fmt == "json":
        renderer = structlog.processors.JSONRenderer(sort_keys=True)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(
        structlog.stdlib.ProcessorFormatter(
            foreign_pre_chain=pre_chain,
            processors=[structlog.stdlib.ProcessorFormatter.remove_processors_meta, renderer],
        )
    )
    root.addHandler(console)

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
        file_handler.setFormatter(
            structlog.stdlib.ProcessorFormatter(
                foreign_pre_chain=pre_chain + [structlog.processors.TimeStamper(fmt="iso", utc=True)],
                processors=[
                    structlog.stdlib.ProcessorFormatter.remove_processors_meta,
                    structlog.processors.JSONRenderer(sort_keys=True),
                ],
            )
        )
        root.addHandler(file_handler)

    root.setLevel(getattr(logging, level.upper()))


def _run_replicate(cfg: ExperimentConfig, datasets: Datasets, replicate_id: int) -> Tuple[List[RoundMetrics], GlobalState]:
    experiment = Experiment(cfg, replicate_id=replicate_id, datasets=datasets)
    experiment.setup()
    rows = list(experiment.rounds())
    return rows, experiment.state


def run(cfg: ExperimentConfig) -> List[RoundMetrics]:
    """
    Run every replicate of ``cfg`` and write results under ``cfg.output_dir``.

    Writes ``metrics.csv``, ``aggregate.csv``, one checkpoint per replicate
    and the resolved config. Returns the metric rows in file order.
    """
    out = Path(cfg.output_dir)
    datasets = load_datasets(cfg)
    logger.info(f"Running {cfg.replicates} replicate(s) of {describe_scheme(cfg.federation)}")

    with create_worker_pool(cfg.runtime.workers) as pool:
        results = pool.map(lambda i: _run_replicate(cfg, datasets, i), range(cfg.replicates))

    rows: List[RoundMetrics] = []
    fingerprint = cfg.fingerprint()
    for replicate_id, (replicate_rows, state) in enumerate(results):
        rows.extend(replicate_rows)
        models = {"classifier": state.classifier}
        if state.autoencoder is not None:
            models = {"autoencoder": state.autoencoder, "classifier": state.classifier}
        save_checkpoint(models, out / CHECKPOINT_DIR / f"replicate_{replicate_id:03d}.fsfl", fingerprint)

    aggregates = aggregate_replicates(rows)
    write_metrics(out / METRICS_FILE, rows)
    write_aggregate(out / AGGREGATE_FILE, aggregates)
    write_json(out / RESOLVED_CONFIG_FILE, {"fingerprint": fingerprint, "config": cfg.to_dict()})
    logger.info(f"Wrote {len(rows)} metric rows and {len(aggregates)} aggregate rows to {out}")
    return rows


def bench(
    cfg: ExperimentConfig,
    checkpoint_path: Path,
    repetitions: int = 10,
    pin_cpu: bool = True,
) -> Tuple[List[LatencyReport], Optional[LatencyComparison]]:
    """
    Time the checkpointed pipeline against its counterpart on the test set.

    A SEMI checkpoint (encoder + classifier) is compared with a freshly
    initialised supervised LSTM classifier, and vice versa. Writes
    ``latency.csv`` and ``latency.json`` under ``cfg.output_dir``.
    """
    out = Path(cfg.output_dir)
    train, test = load_datasets(cfg)
    checkpoint = load_checkpoint(checkpoint_path)
    if "classifier" not in checkpoint.models:
        raise BenchError(f"{checkpoint_path} holds no classifier")
    if checkpoint.fingerprint and checkpoint.fingerprint != cfg.fingerprint():
        logger.warning(f"Checkpoint fingerprint {checkpoint.fingerprint[:12]} does not match the config")

    encoder = checkpoint.models.get("autoencoder")
    classifier = checkpoint.models["classifier"]
    rate = test.sample_rate_hz
    seed = cfg.federation.seed

    if encoder is not None:
        scheme, other_scheme = Scheme.SEMI.value, Scheme.SUPERVISED.value
        plan = plan_models(
            replace(cfg, federation=replace(cfg.federation, scheme=Scheme.SUPERVISED)),
            train.num_features,
            train.num_classes,
        )
        other_encoder, other_classifier = None, build_classifier(plan.classifier, seed)
    else:
        scheme, other_scheme = cfg.federation.scheme.value, Scheme.SEMI.value
        plan = plan_models(
            replace(cfg, federation=replace(cfg.federation, scheme=Scheme.SEMI)),
            train.num_features,
            train.num_classes,
        )
        other_encoder = build_autoencoder(plan.autoencoder, seed)
        other_classifier = build_classifier(plan.classifier, seed)

    reports = [
        time_pipeline(encoder, classifier, test, rate, repetitions, scheme=scheme, pin_cpu=pin_cpu),
        time_pipeline(other_encoder, other_classifier, test, rate, repetitions, scheme=other_scheme, pin_cpu=pin_cpu),
    ]
    comparison = None
    if min(r.windows for r in reports) >= MIN_COMPARISON_WINDOWS:
        comparison = compare_latency(reports[0], reports[1])
    else:
        logger.warning(f"Fewer than {MIN_COMPARISON_WINDOWS} windows; skipping the significance test")

    write_latency(out / LATENCY_FILE, reports)
    write_json(
        out / LATENCY_SUMMARY_FILE,
        {
            "reports": [r.to_dict() for r in reports],
            "comparison": comparison.to_dict() if comparison else None,
            "upload": upload_traffic(cfg, train.num_features, train.num_classes),
            "sample_rate_hz": rate,
            "repetitions": repetitions,
        },
    )
    return reports, comparison


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semifed-har", description="Semi-supervised federated HAR simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", help="run all replicates of an experiment")
    run_cmd.add_argument("config", help="experiment config (.json or .yaml)")
    run_cmd.add_argument("--out", help="output directory (overrides output_dir)")
    run_cmd.add_argument("--replicates", type=int, help="number of replicates (overrides replicates)")
    run_cmd.add_argument("--seed", type=int, help="base seed (overrides seed)")

    bench_cmd = commands.add_parser("bench", help="time inference on one-second windows")
    bench_cmd.add_argument("config", help="experiment config (.json or .yaml)")
    bench_cmd.add_argument("--checkpoint", required=True, help="checkpoint to time")
    bench_cmd.add_argument("--out", help="output directory (overrides output_dir)")
    bench_cmd.add_argument("--repetitions", type=int, default=10, help="timed passes per window (default 10)")
    bench_cmd.add_argument("--no-pin", action="store_true", help="do not pin to one CPU core")

    inspect_cmd = commands.add_parser("inspect", help="describe a checkpoint")
    inspect_cmd.add_argument("checkpoint")
    inspect_cmd.add_argument("--json", action="store_true", help="print the summary as JSON")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = _parser().parse_args(argv)
    console = Console()
    out_dir: Optional[Path] = None

    try:
        runtime = ConfigManager.runtime_from_env()
        setup_logging(runtime.log_level, runtime.log_format)

        if args.command == "inspect":
            summary = inspect_checkpoint(args.checkpoint)
            if args.json:
                console.print_json(json.dumps(summary, sort_keys=True))
            else:
                console.print(checkpoint_table(summary))
            return EXIT_OK

        cfg = parse_config(args.config)
        if args.command == "run":
            cfg = cfg.with_overrides(output_dir=args.out, replicates=args.replicates, seed=args.seed)
        else:
            cfg = cfg.with_overrides(output_dir=args.out)
        out_dir = Path(cfg.output_dir)

        if args.command == "run":
            setup_logging(runtime.log_level, runtime.log_format, out_dir / LOG_FILE)
            rows = run(cfg)
            console.print(aggregate_table(aggregate_replicates(rows), title=describe_scheme(cfg.federation)))
        else:
            reports, comparison = bench(cfg, Path(args.checkpoint), args.repetitions, pin_cpu=not args.no_pin)
            console.print(latency_table(reports, comparison))
        return EXIT_OK

    except ConfigError as e:
        return _fail(e, EXIT_CONFIG_ERROR, out_dir)
    except Exception as e:
        logger.debug("Run failed", exc_info=True)
        return _fail(e, EXIT_RUNTIME_ERROR, out_dir)


def _fail(error: BaseException, code: int, out_dir: Optional[Path]) -> int:
    record = error_record(error)
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    if out_dir is not None:
        try:
            write_json(out_dir / ERROR_FILE, record)
        except OSError as e:
            logger.error(f"Could not write {ERROR_FILE}: {e}")
    return code


if __name__ == "__main__":
    sys.exit(main())
