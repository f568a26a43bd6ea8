"""Command which runs the complete analysis"""
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

input_file = click.Path(exists=True, dir_okay=False, path_type=P)


@click.command(
    name="report",
    short_help="Run ingest, indicators, correlations and null models",
)
@click.argument("trade", type=input_file)
@click.argument("countries", type=input_file)
@click.argument("resources", type=input_file)
@options.output_dir
@options.years
@options.scheme
@options.realizations
@options.network_options
@options.verbosity
@options.pass_config
# pylint: disable=too-many-arguments,too-many-locals
def traderisk_report(
    config: Config,
    verbose: int,
    trade: P,
    countries: P,
    resources: P,
    output: str,
    years: Optional[str],
    schemes: Iterable[str],
    realizations: Optional[int],
    regions: Optional[str],
    stability: Optional[str],
    alpha_factor: Optional[float],
    threshold: Optional[float],
    orientation: Optional[str],
):
    """Run ingest, indicators, correlations and null models

    Writes the panel archive `panel.zip` and all tables of the `indicators` and
    `correlate` commands to the output directory. Null models only run for the
    schemes given with `--scheme`.
    """
    config.update_verbosity(verbose)
    options.apply_overrides(
        config,
        years=years,
        realizations=realizations,
        stability=stability,
        alpha_factor=alpha_factor,
        threshold=threshold,
        orientation=orientation,
    )
    selected = stages.selected_regions(config, regions)
    outdir = P(output)

    click.secho("Reading input files...", bold=True, err=True)
    archive = outdir / "panel.zip"
    checksum = stages.ingest(
        config, trade, countries, resources, archive, restrict_years=years is not None
    )
    if config.debug:
        click.echo(f" > Panel checksum {checksum}")

    click.secho("Computing indicators...", bold=True, err=True)
    panel = stages.load_panel(config, archive)
    prepared, table = stages.indicators(config, panel, selected, outdir)

    click.secho("Computing correlations...", bold=True, err=True)
    report = stages.correlate(config, outdir, outdir)

    if schemes:
        stages.nullmodels(config, prepared, table, [Scheme(s) for s in schemes], outdir)

    click.secho(f"Report written to {output}", bold=True, err=True)
    click.echo(format_star_table(report))
