"""Commands which create panel archives"""
from __future__ import annotations

from pathlib import Path as P
from typing import Optional

import click

from traderisk.config import Config
from traderisk.fixture import generate_fixture

import traderisk.cli.options as options
from . import stages

input_file = click.Path(exists=True, dir_okay=False, path_type=P)


@click.command(
    name="ingest",
    short_help="Build a panel archive from trade, country and resource files",
)
@click.argument("trade", type=input_file)
@click.argument("countries", type=input_file)
@click.argument("resources", type=input_file)
@click.option(
    "-o",
    "--output",
    required=True,
    metavar="ARCHIVE",
    type=click.Path(dir_okay=False, path_type=P),
    help="Path of the panel archive to write.",
)
@options.years
@options.verbosity
@options.pass_config
# pylint: disable=too-many-arguments
def traderisk_ingest(
    config: Config,
    verbose: int,
    trade: P,
    countries: P,
    resources: P,
    output: P,
    years: Optional[str],
):
    """Build a panel archive from trade, country and resource files

    Reconciles exporter and importer reports of every flow, validates the
    resulting panel and writes it as a self-describing archive. The archive's
    checksum is printed to stdout; identical inputs give identical archives.
    """
    config.update_verbosity(verbose)
    options.apply_overrides(config, years=years)
    click.secho("Reading input files...", bold=True, err=True)
    checksum = stages.ingest(
        config, trade, countries, resources, output, restrict_years=years is not None
    )
    click.secho(f"Panel archive written to {output}", bold=True, err=True)
    click.echo(checksum)


@click.command(
    name="fixture",
    short_help="Write the synthetic example input files",
)
@click.argument("outdir", type=click.Path(file_okay=False, path_type=P))
@click.option(
    "--seed",
    type=int,
    default=0,
    show_default=True,
    help="Seed of the generated example data.",
)
@options.verbosity
@options.pass_config
def traderisk_fixture(config: Config, verbose: int, outdir: P, seed: int):
    """Write the synthetic example input files

    Writes `trade.csv`, `countries.csv` and `resources.csv` for 20 resources,
    16 countries and the years 2000 to 2012. The data is constructed so that
    the example analysis shows the expected correlations.
    """
    config.update_verbosity(verbose)
    files = generate_fixture(outdir, seed=seed, verbose=config.debug)
    click.secho(f"Example inputs written to {outdir}", bold=True, err=True)
    for path in (files.trade, files.countries, files.resources):
        click.echo(path)
