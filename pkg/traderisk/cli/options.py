"""Click options which are reused for multiple commands"""
from __future__ import annotations

from typing import Any

import click

from traderisk.config import Config
from traderisk.indicators import Orientation, StabilityMode
from traderisk.nullmodels import Scheme

pass_config = click.make_pass_decorator(Config)

verbosity = click.option(
    "-v",
    "--verbose",
    count=True,
    help="Control verbosity. Can be repeated for more verbose output.",
)

output_dir = click.option(
    "-o",
    "--output",
    "output",
    required=True,
    metavar="DIR",
    type=click.Path(file_okay=False, dir_okay=True),
    help="Directory to write the result tables to.",
)

years = click.option(
    "--years",
    metavar="START:END",
    default=None,
    help="Restrict the panel to the given years (both inclusive), e.g. 2000:2012. "
    + "Trade records outside the range are dropped.",
)

regions = click.option(
    "--regions",
    metavar="NAMES",
    default=None,
    help="Comma-separated list of configured regions to compute regional "
    + "indicators for. Defaults to all configured regions (EU,US).",
)

stability = click.option(
    "--stability",
    type=click.Choice([m.value for m in StabilityMode]),
    default=None,
    help="Country stability score used to weight exports: political stability "
    + "(ps, default), the resource governance index (rgi) or none.",
)

alpha_factor = click.option(
    "--alpha-factor",
    type=float,
    default=None,
    metavar="FACTOR",
    help="PageRank damping factor, divided by the layer's leading eigenvalue. "
    + "Default 0.85.",
)

threshold = click.option(
    "--threshold",
    type=float,
    default=None,
    metavar="SHARE",
    help="Flows making up at most this share of a country's imports are "
    + "dropped. Default 0.01.",
)

orientation = click.option(
    "--orientation",
    type=click.Choice([o.value for o in Orientation]),
    default=None,
    help="Direction in which PageRank passes on shocks. 'exposure' (default) "
    + "passes a shock at an exporter on to its importers.",
)

scheme = click.option(
    "--scheme",
    "schemes",
    type=click.Choice([s.value for s in Scheme]),
    multiple=True,
    help="Null model to run. Can be repeated.",
)

realizations = click.option(
    "--realizations",
    type=click.IntRange(min=1),
    default=None,
    help="Number of randomized realizations per null model. Default 100.",
)

seed = click.option(
    "--seed",
    type=int,
    default=None,
    help="Base seed for the null models. Overrides the global --seed.",
)


def network_options(func):
    """All options which influence the indicator computation."""
    for option in reversed((regions, stability, alpha_factor, threshold, orientation)):
        func = option(func)
    return func


def apply_overrides(config: Config, **values: Any):
    """Set every given (not None) option value on `config`."""
    for key, value in values.items():
        if value is None:
            continue
        if config.trace:
            click.echo(f" > Setting {key} = {value} from command line")
        setattr(config, key, value)
