"""
Command-line entry point: `python -m app.main <subcommand> --config <yaml>`.

Every subcommand exits with status 1 when any grid point failed.
"""
import sys

import click

from app.common.config import settings
from app.common.exceptions import ConfigError
from app.services import experiments
from app.services.config_loader import load_spec
from app.utils.logger import get_logger

logger = get_logger(__name__)


def _common(func):
    func = click.option("--threads", type=click.IntRange(min=1), default=None,
                        help="Work-pool size (overrides the document).")(func)
    func = click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                        help="Output directory (overrides the document).")(func)
    func = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                        required=True, help="YAML experiment document.")(func)
    return func


def _load(config_path, out_dir, threads):
    try:
        return load_spec(config_path, out_dir=out_dir, threads=threads)
    except ConfigError as e:
        raise click.ClickException(str(e))


def _finish(outcome) -> None:
    for path in outcome.files:
        click.echo(path)
    if outcome.failed:
        logger.error(f"{outcome.failed} grid point(s) failed")
        sys.exit(1)


@click.group()
def cli():
    """Reverse-annealing and counterdiabatic-driving experiments."""


@cli.command("fidelity-scan")
@_common
def fidelity_scan(config_path, out_dir, threads):
    """P_GS over the N x c x tau x K grid, with gamma fits."""
    spec = _load(config_path, out_dir, threads)
    _finish(experiments.run_sweep(spec))


@cli.command("tts-scan")
@_common
def tts_scan(config_path, out_dir, threads):
    """Time to solution over the tau grid, with the best tau per curve."""
    spec = _load(config_path, out_dir, threads)
    _finish(experiments.tts_scan(spec))


@cli.command("cost-scan")
@_common
def cost_scan(config_path, out_dir, threads):
    """Energy cost of the CD term per N, with power-law fits."""
    spec = _load(config_path, out_dir, threads)
    _finish(experiments.cost_scan(spec))


@cli.command("norm-trace")
@_common
def norm_trace(config_path, out_dir, threads):
    """Norm of the CD term along the anneal."""
    spec = _load(config_path, out_dir, threads)
    _finish(experiments.norm_trace_scan(spec))


@cli.command("gap-map")
@_common
def gap_map(config_path, out_dir, threads):
    """Rescaled inverse gap over the (lambda, s) plane."""
    spec = _load(config_path, out_dir, threads)
    _finish(experiments.gap_map_scan(spec))


@cli.command("compare-qa")
@_common
def compare_qa(config_path, out_dir, threads):
    """ARA / CRA1 against forward annealing QA / QA1."""
    spec = _load(config_path, out_dir, threads)
    _finish(experiments.compare_ara_qa(spec))


@cli.command("heatmap")
@_common
def heatmap(config_path, out_dir, threads):
    """ln P_GS over N x tau for each CD order."""
    spec = _load(config_path, out_dir, threads)
    _finish(experiments.pgs_heatmap(spec))


@cli.command("fit")
@click.option("--csv", "csv_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Sweep CSV written by fidelity-scan or cost-scan.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def fit(csv_path, out_dir):
    """Scaling-exponent fits from an existing sweep CSV."""
    try:
        outcome = experiments.fit_csv(csv_path, out_dir)
    except ValueError as e:
        raise click.ClickException(str(e))
    _finish(outcome)


if __name__ == "__main__":
    logger.info(f"{settings.APP_NAME} starting")
    cli()
