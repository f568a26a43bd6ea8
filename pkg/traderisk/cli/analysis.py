"""Commands which compute indicators, null models and correlations"""
from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path as P
from typing import Optional

import click

from traderisk.config import Config
from traderisk.nullmodels import Scheme
from traderisk.report import format_star_table

import traderisk.cli.options as options
from . import stages

archive_file = click.Path(exists=True, dir_okay=False, path_type=P)


@click.command(
    name="indicators",
    short_help="Compute global and regional indicators of a panel",
)
@click.argument("archive", type=archive_file)
@options.output_dir
@options.network_options
@options.verbosity
@options.pass_config
# pylint: disable=too-many-arguments
def traderisk_indicators(
    config: Config,
    verbose: int,
    archive: P,
    output: str,
    regions: Optional[str],
    stability: Optional[str],
    alpha_factor: Optional[float],
    threshold: Optional[float],
    orientation: Optional[str],
):
    """Compute global and regional indicators of a panel

    Writes `global.csv` and `regional.csv` (and their JSON variants) to the
    output directory, one row per resource.
    """
    config.update_verbosity(verbose)
    options.apply_overrides(
        config,
        stability=stability,
        alpha_factor=alpha_factor,
        threshold=threshold,
        orientation=orientation,
    )
    selected = stages.selected_regions(config, regions)
    panel = stages.load_panel(config, archive)
    click.secho("Computing indicators...", bold=True, err=True)
    stages.indicators(config, panel, selected, P(output))
    click.secho(f"Indicator tables written to {output}", bold=True, err=True)


@click.command(
    name="nullmodel",
    short_help="Run null-model ensembles of the indicators",
)
@click.argument("archive", type=archive_file)
@options.output_dir
@options.scheme
@options.realizations
@options.seed
@options.network_options
@options.verbosity
@options.pass_config
# pylint: disable=too-many-arguments
def traderisk_nullmodel(
    config: Config,
    verbose: int,
    archive: P,
    output: str,
    schemes: Iterable[str],
    realizations: Optional[int],
    seed: Optional[int],
    regions: Optional[str],
    stability: Optional[str],
    alpha_factor: Optional[float],
    threshold: Optional[float],
    orientation: Optional[str],
):
    """Run null-model ensembles of the indicators

    Every trade layer is randomized independently, with seeds derived from the
    base seed, the resource, the year and the realization. For each scheme,
    `ensemble_<scheme>.csv` holds the ensemble mean and standard error of every
    indicator and `correlations_<scheme>.csv` those of the correlation suite.
    Runs all schemes if no `--scheme` is given.
    """
    config.update_verbosity(verbose)
    options.apply_overrides(
        config,
        realizations=realizations,
        seed=seed,
        stability=stability,
        alpha_factor=alpha_factor,
        threshold=threshold,
        orientation=orientation,
    )
    selected = stages.selected_regions(config, regions)
    panel = stages.load_panel(config, archive)
    outdir = P(output)
    click.secho("Computing indicators of the observed panel...", bold=True, err=True)
    prepared, table = stages.indicators(config, panel, selected, outdir)
    to_run = [Scheme(s) for s in schemes] or list(Scheme)
    stages.nullmodels(config, prepared, table, to_run, outdir)
    click.secho(f"Null-model tables written to {output}", bold=True, err=True)


@click.command(
    name="correlate",
    short_help="Correlate indicators with volatility, supply risk and barriers",
)
@click.argument(
    "indir", type=click.Path(exists=True, file_okay=False, path_type=P)
)
@options.output_dir
@click.option(
    "--correlation",
    "specs",
    metavar="X~Y[|Z]",
    multiple=True,
    help="Correlation to compute instead of the default suite, e.g. "
    + "'TR_EU~sigma_EU|TRstr_EU'. Can be repeated.",
)
@options.verbosity
@options.pass_config
def traderisk_correlate(
    config: Config, verbose: int, indir: P, output: str, specs: Iterable[str]
):
    """Correlate indicators with volatility, supply risk and barriers

    Reads the indicator tables written by `indicators` from INDIR. Writes
    `correlations.csv` and `correlations.json`, the scatter data
    `scatter_<REGION>.csv` and the TradeRisk ranking `ranks.csv`, and prints the
    correlation table with significance stars.
    """
    config.update_verbosity(verbose)
    report = stages.correlate(config, indir, P(output), list(specs))
    click.echo(format_star_table(report))
