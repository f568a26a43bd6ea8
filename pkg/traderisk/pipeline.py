"""
Panel preparation and indicator runs shared by the `indicators`, `nullmodel`
and `report` commands.

The stages are: threshold on the country-level panel, global metrics on that
panel, condensation of the tag-based regions, regional indicators on the
condensed panel. Null models randomize the thresholded country-level panel
and then run the same stages.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import click

from .config import Config, RegionSpec
from .indicators import NetworkSettings, global_table, traderisk
from .ingest import apply_threshold, condense_region
from .model import (
    GLOBAL_VARIABLES,
    REGIONAL_VARIABLES,
    IndicatorTable,
    RegionalIndicators,
    TradeFlowPanel,
)
from .nullmodels import EnsembleSummary, Scheme, ensemble_run
from .stats import CorrelationSpec, correlation_suite, report_as_mapping

# Indicators which only depend on flows and registries, never on network structure.
DATA_GLOBAL_FIELDS = ("scarcity", "total_trade_volume", "csr")
DATA_REGIONAL_FIELDS = ("import_reliance", "volatility", "trade_barrier")


@dataclass(frozen=True)
class PreparedPanels:
    country: TradeFlowPanel
    regional: TradeFlowPanel
    regions: tuple[RegionSpec, ...]


def network_settings(config: Config) -> NetworkSettings:
    return NetworkSettings(
        alpha_factor=config.alpha_factor,
        tolerance=config.tolerance,
        max_iterations=config.max_iterations,
        orientation=config.orientation,
    )


def condense_regions(
    panel: TradeFlowPanel, config: Config, regions: Sequence[RegionSpec]
) -> TradeFlowPanel:
    for region in regions:
        if region.tag is None:
            continue
        if config.trace:
            click.echo(f"   > Condensing region {region.name} (tag {region.tag})")
        panel = condense_region(
            panel, region.tag, region.name, config.region_members.get(region.tag)
        )
    return panel


def prepare(
    panel: TradeFlowPanel, config: Config, regions: Sequence[RegionSpec]
) -> PreparedPanels:
    thresholded = apply_threshold(panel, config.threshold)
    return PreparedPanels(
        thresholded, condense_regions(thresholded, config, regions), tuple(regions)
    )


def _map(func, items, jobs: int):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))
    return [func(i) for i in items]


def compute_table(
    prepared: PreparedPanels, config: Config, jobs: Optional[int] = None
) -> IndicatorTable:
    """Global and regional indicators for every resource of the panel."""
    settings = network_settings(config)
    table = global_table(prepared.country, config.stability, settings)

    def _regional(resource: str) -> list[tuple[tuple[str, str], RegionalIndicators]]:
        return [
            (
                (resource, region.name),
                traderisk(
                    prepared.regional,
                    resource,
                    region.name,
                    config.stability,
                    settings=settings,
                    node=region.node_id,
                ),
            )
            for region in prepared.regions
        ]

    resources = prepared.regional.resource_ids
    regional = dict(
        item
        for rows in _map(_regional, resources, jobs or config.jobs)
        for item in rows
    )
    return replace(table, per_resource_regional=regional)


def with_data_indicators(
    randomized: IndicatorTable, original: IndicatorTable
) -> IndicatorTable:
    """
    Take the flow- and registry-based indicators from `original`.

    TR and TRstr are recomputed from the randomized network terms and the
    original import reliance.
    """
    glob = {
        r: replace(
            g,
            **{
                f: getattr(original.per_resource_global[r], f)
                for f in DATA_GLOBAL_FIELDS
            },
        )
        for r, g in randomized.per_resource_global.items()
    }
    regional = {}
    for key, ind in randomized.per_resource_regional.items():
        orig = original.per_resource_regional[key]
        ir = orig.import_reliance
        regional[key] = replace(
            ind,
            **{f: getattr(orig, f) for f in DATA_REGIONAL_FIELDS},
            traderisk=None if ind.pagerank is None or ir is None else ind.pagerank * ir,
            instrength_traderisk=(
                None if ind.in_strength is None or ir is None else ind.in_strength * ir
            ),
        )
    return IndicatorTable(glob, regional)


def table_as_mapping(table: IndicatorTable) -> Mapping[str, Optional[float]]:
    """Flatten a table into `<variable>:<resource>` entries."""
    values: dict[str, Optional[float]] = {}
    for short, attr in GLOBAL_VARIABLES.items():
        for resource, ind in table.per_resource_global.items():
            values[f"{short}:{resource}"] = getattr(ind, attr)
    for short, attr in REGIONAL_VARIABLES.items():
        for (resource, region), ind in table.per_resource_regional.items():
            values[f"{short}_{region}:{resource}"] = getattr(ind, attr)
    return values


# pylint: disable=too-many-arguments
def run_ensemble(
    prepared: PreparedPanels,
    original: IndicatorTable,
    config: Config,
    scheme: Scheme,
    suite: Sequence[CorrelationSpec],
) -> EnsembleSummary:
    """
    Null-model ensemble of all indicators and of the correlation suite.

    Realizations run in parallel when `config.jobs` > 1; each realization's own
    indicator computation stays serial.
    """

    def _downstream(randomized: TradeFlowPanel, realization: int):
        if config.debug:
            click.echo(f" > {scheme.value}: realization {realization}")
        panels = PreparedPanels(
            randomized,
            condense_regions(randomized, config, prepared.regions),
            prepared.regions,
        )
        table = with_data_indicators(compute_table(panels, config, jobs=1), original)
        correlations = report_as_mapping(correlation_suite(table, suite))
        return {**table_as_mapping(table), **correlations}

    return ensemble_run(
        prepared.country,
        scheme,
        config.realizations,
        config.seed,
        _downstream,
        jobs=config.jobs,
    )
