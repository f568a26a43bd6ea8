"""
Pipeline stages as run by the commands.

Every stage maps library errors to the CLI's exit codes: input problems exit
with status 2 (`InputError`), numerical degeneracies with status 1
(`DegeneracyError`).
"""
from __future__ import annotations

import contextlib

from collections.abc import Iterable, Sequence
from pathlib import Path as P
from typing import Optional

import click

from traderisk.config import Config, RegionSpec
from traderisk.graph import ConvergenceError
from traderisk.helpers import DegeneracyError, InputError
from traderisk.indicators import LayerNotFoundError, RegionNotFoundError
from traderisk.ingest import (
    ArchiveError,
    ParseError,
    RegionError,
    ValidationError,
    parse_files,
    read_archive,
    write_archive,
)
from traderisk.model import CorrelationReport, IndicatorTable, TradeFlowPanel
from traderisk.nullmodels import Scheme
from traderisk.pipeline import PreparedPanels, compute_table, prepare, run_ensemble
from traderisk.report import (
    read_indicator_tables,
    write_correlations,
    write_ensemble,
    write_figure_data,
    write_indicator_tables,
)
from traderisk.stats import CorrelationSpec, correlation_suite, default_suite


@contextlib.contextmanager
def translate_errors(action: str):
    try:
        yield
    except (ParseError, ValidationError, ArchiveError) as e:
        raise InputError(f"While {action}: {e}") from e
    except (RegionError, RegionNotFoundError, LayerNotFoundError) as e:
        raise InputError(f"While {action}: {e}") from e
    except ConvergenceError as e:
        raise DegeneracyError(f"While {action}: {e}") from e
    except FileNotFoundError as e:
        raise InputError(f"While {action}: {e.filename} doesn't exist") from e


def _written(config: Config, paths: Iterable[P]):
    if config.debug:
        for path in paths:
            click.echo(f" > Wrote {path}")


def ingest(
    config: Config,
    trade: P,
    countries: P,
    resources: P,
    archive: P,
    restrict_years: bool = False,
) -> str:
    """Parse the input files and write the panel archive. Returns its checksum."""
    with translate_errors("reading input files"):
        panel = parse_files(trade, countries, resources, config, restrict_years)
    if config.debug:
        click.echo(
            f" > Panel with {panel.size} countries, {len(panel.resource_ids)} "
            + f"resources and {len(panel.layer_keys())} trade layers"
        )
    archive.parent.mkdir(parents=True, exist_ok=True)
    checksum = write_archive(panel, archive, config.settings_hash())
    _written(config, [archive])
    return checksum


def load_panel(config: Config, archive: P) -> TradeFlowPanel:
    with translate_errors(f"reading panel archive {archive}"):
        panel = read_archive(archive)
    if config.debug:
        click.echo(f" > Loaded panel archive {archive}")
    return panel


def selected_regions(config: Config, names: Optional[str]) -> list[RegionSpec]:
    if names is None:
        return list(config.regions.values())
    return config.select_regions(names.split(","))


def indicators(
    config: Config,
    panel: TradeFlowPanel,
    regions: Sequence[RegionSpec],
    outdir: P,
) -> tuple[PreparedPanels, IndicatorTable]:
    with translate_errors("computing indicators"):
        prepared = prepare(panel, config, regions)
        table = compute_table(prepared, config)
    written = write_indicator_tables(
        table, [r.name for r in regions], outdir, config.settings_hash()
    )
    _written(config, written)
    return prepared, table


def correlate(
    config: Config,
    indir: P,
    outdir: P,
    specs: Optional[Sequence[str]] = None,
) -> CorrelationReport:
    """
    Correlation suite on the indicator tables in `indir`.

    Correlations are always computed from the written tables, so that a
    `report` run and a separate `correlate` run give the same numbers.
    """
    with translate_errors(f"reading indicator tables from {indir}"):
        table, regions = read_indicator_tables(indir)
    suite = suite_for(regions, specs)
    report = correlation_suite(table, suite)
    settings_hash = config.settings_hash()
    written = write_correlations(report, outdir, settings_hash)
    written += write_figure_data(table, regions, outdir, settings_hash)
    _written(config, written)
    return report


def suite_for(
    regions: Sequence[str], specs: Optional[Sequence[str]] = None
) -> list[CorrelationSpec]:
    if not specs:
        return default_suite(regions)
    try:
        return [CorrelationSpec.parse(s) for s in specs]
    except ValueError as e:
        raise InputError(str(e)) from e


# pylint: disable=too-many-arguments
def nullmodels(
    config: Config,
    prepared: PreparedPanels,
    original: IndicatorTable,
    schemes: Iterable[Scheme],
    outdir: P,
):
    suite = default_suite([r.name for r in prepared.regions])
    for scheme in schemes:
        click.secho(
            f"Running {config.realizations} realizations of null model {scheme.value}",
            bold=True,
            err=True,
        )
        with translate_errors(f"running null model {scheme.value}"):
            summary = run_ensemble(prepared, original, config, scheme, suite)
        if summary.failed:
            click.secho(
                f" > {summary.failed} of {summary.realizations} realizations "
                + "failed to converge and were dropped",
                fg="yellow",
                err=True,
            )
        if summary.failed == summary.realizations:
            raise DegeneracyError(
                f"No realization of null model {scheme.value} produced indicators"
            )
        written = write_ensemble(summary, suite, outdir, config.settings_hash())
        _written(config, written)
