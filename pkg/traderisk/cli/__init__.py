from __future__ import annotations

from pathlib import Path as P
from typing import Optional

import click

from dotenv import load_dotenv, find_dotenv
from traderisk import __version__
from traderisk.config import Config, find_config_file

import traderisk.cli.options as options

from .analysis import traderisk_correlate, traderisk_indicators, traderisk_nullmodel
from .ingest import traderisk_fixture, traderisk_ingest
from .report import traderisk_report

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}


@click.group(context_settings=CONTEXT_SETTINGS)
@click.version_option(__version__, prog_name="traderisk")
@options.verbosity
@click.option(
    "-c",
    "--config",
    "config_file",
    default=None,
    type=click.Path(exists=True, dir_okay=False, path_type=P),
    envvar="TRADERISK_CONFIG",
    help=(
        "YAML config file. Defaults to `traderisk/config.yml` in the user's "
        "config directory, if it exists. Command line flags take precedence."
    ),
)
@click.option(
    "--seed",
    type=int,
    default=None,
    help="Base seed for all randomized computations.",
)
@click.option(
    "-j",
    "--jobs",
    type=click.IntRange(min=1),
    default=None,
    help="Number of parallel workers. Results don't depend on it.",
)
@click.pass_context
def traderisk(
    ctx,
    verbose: int,
    config_file: Optional[P],
    seed: Optional[int],
    jobs: Optional[int],
):
    config = Config(verbose=verbose)
    path = find_config_file(config_file)
    if path is not None:
        config.load_file(path)
    options.apply_overrides(config, seed=seed, jobs=jobs)
    ctx.obj = config


traderisk.add_command(traderisk_ingest)
traderisk.add_command(traderisk_indicators)
traderisk.add_command(traderisk_nullmodel)
traderisk.add_command(traderisk_correlate)
traderisk.add_command(traderisk_report)
traderisk.add_command(traderisk_fixture)


def main():
    load_dotenv(dotenv_path=find_dotenv(usecwd=True))
    traderisk.main(
        prog_name="traderisk", auto_envvar_prefix="TRADERISK", max_content_width=100
    )
