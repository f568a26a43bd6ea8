"""
Vulnerability networks and the TradeRisk indicators derived from them.
"""
from __future__ import annotations

import math

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import sparse

from . import graph
from .helpers import sliding_window, warn, warn_once
from .model import (
    SUPPLY_RISK_SOURCES,
    CountryRecord,
    GlobalIndicators,
    IndicatorTable,
    RegionalIndicators,
    ResourceRecord,
    TradeFlowPanel,
    VulnerabilityNetwork,
)


class StabilityMode(Enum):
    PS = "ps"
    RGI = "rgi"
    NONE = "none"


class Orientation(Enum):
    """
    How shocks travel in the PageRank recursion.

    EXPOSURE passes a shock at an exporter on to the countries importing from it
    (kernel ``V^T`` with the exporters' out-degrees). AS_WRITTEN uses ``V``
    itself as the kernel.
    """

    EXPOSURE = "exposure"
    AS_WRITTEN = "as-written"


@dataclass(frozen=True)
class NetworkSettings:
    alpha_factor: float = 0.85
    tolerance: float = graph.DEFAULT_TOLERANCE
    max_iterations: int = graph.DEFAULT_MAX_ITERATIONS
    orientation: Orientation = Orientation.EXPOSURE


class LayerNotFoundError(LookupError):
    def __init__(self, resource: str, year: int):
        super().__init__(f"no trade layer for resource {resource} in {year}")
        self.resource = resource
        self.year = year


class RegionNotFoundError(LookupError):
    pass


def stability_score(
    country: CountryRecord, year: int, mode: StabilityMode
) -> Optional[float]:
    if mode is StabilityMode.NONE:
        return 0.0
    if mode is StabilityMode.PS:
        return country.ps(year)
    return country.rgi


def _stability_factors(
    panel: TradeFlowPanel, year: int, mode: StabilityMode
) -> np.ndarray:
    factors = np.ones(panel.size)
    for i, c in enumerate(panel.countries):
        s = stability_score(c, year, mode)
        if s is None:
            warn_once(
                f"No {mode.value.upper()} value for {c.id}, "
                + "treating its exports as maximally unstable"
            )
            continue
        factors[i] = 1.0 - s / 100.0
    return factors


def vulnerability_network(
    panel: TradeFlowPanel,
    resource: str,
    year: int,
    stability_mode: StabilityMode = StabilityMode.PS,
) -> VulnerabilityNetwork:
    """
    ``V_ij = (1 - s_i / 100) * M_ij / sum_i M_ij``

    `s_i` is the exporter's PS in `year`, its RGI, or 0, depending on
    `stability_mode`. Importers without imports have empty columns.
    """
    key = (resource, year)
    if key not in panel.value_usd:
        raise LayerNotFoundError(resource, year)
    m = panel.value_usd[key]
    imports = np.asarray(m.sum(axis=0)).ravel()
    inv_imports = np.divide(
        1.0, imports, out=np.zeros_like(imports), where=imports > 0
    )
    factors = _stability_factors(panel, year, stability_mode)
    v = (sparse.diags(factors) @ m @ sparse.diags(inv_imports)).tocsr()
    v.eliminate_zeros()
    v.sort_indices()
    return VulnerabilityNetwork(resource, year, v)


def layer_pagerank(
    network: VulnerabilityNetwork, settings: NetworkSettings = NetworkSettings()
) -> graph.PageRankResult:
    v = network.weights
    if settings.orientation is Orientation.AS_WRITTEN:
        return graph.pagerank(
            v, settings.alpha_factor, settings.tolerance, settings.max_iterations
        )
    return graph.pagerank(
        v.transpose().tocsr(),
        settings.alpha_factor,
        settings.tolerance,
        settings.max_iterations,
        out_degree=np.diff(v.indptr),
    )


def _mean(values: Sequence[float]) -> Optional[float]:
    if not values:
        return None
    return float(np.mean(values))


def _times(value: Optional[float], factor: Optional[float]) -> Optional[float]:
    if value is None or factor is None:
        return None
    return value * factor


# pylint: disable=too-many-arguments,too-many-locals
def traderisk(
    panel: TradeFlowPanel,
    resource: str,
    region: str,
    stability_mode: StabilityMode = StabilityMode.PS,
    years: Optional[Iterable[int]] = None,
    settings: NetworkSettings = NetworkSettings(),
    node: Optional[str] = None,
) -> RegionalIndicators:
    """
    Regional indicators of `resource` for `region`.

    `region` names the import reliance and trade barrier entries of the resource
    record; `node` is the country id of the region in the panel and defaults to
    `region`. PageRank, in-strength and in-degree are averaged over the years in
    which the layer exists. The reported PageRank is the per-layer fixed point
    rescaled to sum to the node count.
    """
    node = node or region
    if not panel.has_country(node):
        raise RegionNotFoundError(f"region node {node} is not part of the panel")
    idx = panel.index_of(node)
    record = panel.resource(resource)

    wanted = set(years) if years is not None else None
    pageranks, strengths, degrees = [], [], []
    for year in panel.years_of(resource):
        if wanted is not None and year not in wanted:
            continue
        v = vulnerability_network(panel, resource, year, stability_mode)
        result = layer_pagerank(v, settings)
        if result.degenerate:
            warn_once(f"Degenerate layer {resource} {year}: leading eigenvalue is 0")
        pageranks.append(float(result.normalized[idx]))
        metrics = graph.degrees_and_strengths(v.weights)
        strengths.append(float(metrics.in_strength[idx]))
        degrees.append(float(metrics.in_degree[idx]))

    pr = _mean(pageranks)
    w_in = _mean(strengths)
    ir = record.import_reliance.get(region)
    _, sigma = price_and_volatility(panel, resource, node, years)
    return RegionalIndicators(
        pagerank=pr,
        in_strength=w_in,
        in_degree=_mean(degrees),
        traderisk=_times(pr, ir),
        instrength_traderisk=_times(w_in, ir),
        import_reliance=ir,
        volatility=sigma,
        trade_barrier=record.trade_barriers.get(region),
    )


def total_trade_volume(panel: TradeFlowPanel, resource: str) -> float:
    """Traded mass in kg summed over all years and flows."""
    return float(sum(k.sum() for (r, _), k in panel.mass_kg.items() if r == resource))


def scarcity(panel: TradeFlowPanel, resource: str) -> Optional[float]:
    """``S = ln(TTV / R)``, None without positive reserves or trade volume."""
    reserves = panel.resource(resource).reserves_kg
    ttv = total_trade_volume(panel, resource)
    if not reserves or ttv <= 0:
        return None
    return math.log(ttv / reserves)


def price_and_volatility(
    panel: TradeFlowPanel,
    resource: str,
    region: str,
    years: Optional[Iterable[int]] = None,
) -> tuple[dict[int, float], Optional[float]]:
    """
    Export unit values of `region` and the volatility of their log returns.

    The price in year t is the region's export value over its exported mass.
    Returns are only formed between consecutive years which both have a price.
    The volatility is the sample standard deviation of the returns and needs at
    least two of them. Years with exports but no mass are skipped with a
    warning. A panel without any mass layer, such as a randomized one, has no
    prices.
    """
    if not panel.mass_kg:
        return {}, None
    idx = panel.index_of(region)
    wanted = set(years) if years is not None else None
    prices: dict[int, float] = {}
    for year in panel.years_of(resource):
        if wanted is not None and year not in wanted:
            continue
        key = (resource, year)
        value = float(panel.value_usd[key][idx, :].sum())
        if value <= 0:
            continue
        mass = float(panel.mass(key)[idx, :].sum())
        if mass <= 0:
            warn(
                f"{region} exports of {resource} in {year} have no mass, "
                + "skipping the year for prices"
            )
            continue
        prices[year] = value / mass

    returns = [
        math.log(prices[t] / prices[prev])
        for prev, t in sliding_window(sorted(prices), 2)
        if t == prev + 1
    ]
    if len(returns) < 2:
        return prices, None
    return prices, float(np.std(returns, ddof=1))


def composite_supply_risk(
    resources: Iterable[ResourceRecord],
) -> dict[str, Optional[float]]:
    """
    Mean of the min-max rescaled supply risk scores per resource.

    Each source list is rescaled on its own so that its riskiest resource gets
    1 and its least risky one 0. Sources with fewer than two distinct values
    are skipped.
    """
    resources = list(resources)
    rescaled: dict[str, list[float]] = {r.id: [] for r in resources}
    for source in SUPPLY_RISK_SOURCES:
        scores = {
            r.id: r.supply_risk_sources[source]
            for r in resources
            if r.supply_risk_sources.get(source) is not None
        }
        if len(set(scores.values())) < 2:
            if scores:
                warn(f"Supply risk source {source} has fewer than two distinct values")
            continue
        lo, hi = min(scores.values()), max(scores.values())
        for rid, score in scores.items():
            rescaled[rid].append((score - lo) / (hi - lo))
    return {rid: _mean(values) for rid, values in rescaled.items()}


def resource_global(
    panel: TradeFlowPanel,
    resource: str,
    stability_mode: StabilityMode = StabilityMode.PS,
    settings: NetworkSettings = NetworkSettings(),
    csr: Optional[float] = None,
) -> GlobalIndicators:
    degrees, lambdas, sccs = [], [], []
    for year in panel.years_of(resource):
        v = vulnerability_network(panel, resource, year, stability_mode).weights
        degrees.append(graph.degrees_and_strengths(v).avg_degree)
        sccs.append(graph.largest_scc_fraction(v))
        lambdas.append(
            graph.leading_eigenvalue(
                v, tol=settings.tolerance, max_iter=settings.max_iterations
            )
        )
    ttv = total_trade_volume(panel, resource)
    return GlobalIndicators(
        avg_degree=_mean(degrees),
        largest_eigenvalue=_mean(lambdas),
        scc_fraction=_mean(sccs),
        scarcity=scarcity(panel, resource),
        total_trade_volume=ttv if panel.years_of(resource) else None,
        csr=csr,
        classification=panel.resource(resource).classification,
    )


def global_table(
    panel: TradeFlowPanel,
    stability_mode: StabilityMode = StabilityMode.PS,
    settings: NetworkSettings = NetworkSettings(),
) -> IndicatorTable:
    """Per-resource time averages of k̄, λ and SCC plus S, TTV and CSR."""
    csr = composite_supply_risk(panel.resources)
    rows = {
        r: resource_global(panel, r, stability_mode, settings, csr.get(r))
        for r in panel.resource_ids
    }
    return IndicatorTable(per_resource_global=rows)
