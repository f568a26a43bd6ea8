"""
Deterministic synthetic input files.

The generated panel has 16 countries, 20 resources and the years 2000 to 2012.
Every resource has one unstable hub exporter which supplies a fixed share
(its concentration) of every other country's imports and imports the resource
back from a few spokes. The rest of each country's imports comes from stable
suppliers. The more concentrated a resource, the scarcer it is made.

Resource `BE` mimics beryllium: its hub sells only to the EU and the USA and
covers 85 % of the EU's imports, and the EU relies entirely on imports.

Export prices of the EU and the USA follow random walks whose volatility is an
affine function of the region's TradeRisk, scaled by lognormal noise. The
generator computes that TradeRisk with the library itself on the default
settings, so the correlation between TradeRisk and volatility in the panel
holds by construction.
"""
from __future__ import annotations

import math

from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path as P
from typing import Optional

import click
import numpy as np
import pandas as pd

from .config import EU_2012
from .indicators import StabilityMode, total_trade_volume, traderisk
from .ingest import (
    Direction,
    RawTradeRecord,
    apply_threshold,
    condense_region,
    reconcile,
)
from .model import Classification, CountryRecord, ResourceRecord

YEARS = tuple(range(2000, 2013))
EU_TAG = "EU-2012"

# id: (base PS, RGI, member of the EU in 2012)
COUNTRIES: dict[str, tuple[float, Optional[float], bool]] = {
    "AUS": (86.0, 71.0, False),
    "BRA": (44.0, 52.0, False),
    "CAN": (90.0, 78.0, False),
    "CHL": (72.0, 66.0, False),
    "CHN": (30.0, 48.0, False),
    "COD": (4.0, None, False),
    "DEU": (78.0, 80.0, True),
    "ESP": (58.0, 69.0, True),
    "FRA": (68.0, 74.0, True),
    "IND": (22.0, None, False),
    "ITA": (62.0, 65.0, True),
    "NLD": (84.0, 82.0, True),
    "POL": (70.0, 64.0, True),
    "RUS": (18.0, 41.0, False),
    "USA": (60.0, 76.0, False),
    "ZAF": (40.0, 58.0, False),
}
EU_MEMBERS = tuple(c for c, (_, _, eu) in COUNTRIES.items() if eu)
PS_GAP = {"COD": (2003, 2004, 2005, 2006)}

RESOURCES = (
    "AL",
    "BE",
    "CO",
    "CU",
    "FE",
    "GA",
    "GE",
    "IN",
    "LI",
    "MG",
    "MN",
    "MO",
    "NB",
    "NI",
    "PGM",
    "REE",
    "SB",
    "SN",
    "W",
    "ZN",
)
BERYLLIUM = "BE"
LATE_START = {"LI": 2002}

HUBS = ("COD", "RUS", "IND")
SPOKES = ("BRA", "ZAF", "CHN", "IND", "RUS")
STABLE = ("CAN", "AUS", "CHL", "NLD", "FRA")
OUTSIDE = ("BRA", "ZAF", "CHL", "IND", "CAN", "AUS", "RUS", "CHN", "COD")

REGION_SHARE = 0.05
VOLATILITY_BASE = 0.03
VOLATILITY_SLOPE = 0.08
VOLATILITY_NOISE = 0.1
WORLD_VOLATILITY = 0.15

FIXTURE_COUNTS = {
    "countries": len(COUNTRIES),
    "resources": len(RESOURCES),
    "years": len(YEARS),
}


@dataclass(frozen=True)
class FixtureFiles:
    trade: P
    countries: P
    resources: P


@dataclass
class _ResourcePlan:
    id: str
    concentration: float
    hub: str
    # importer -> exporter -> share of the importer's imports
    shares: dict[str, dict[str, float]] = field(default_factory=dict)
    start: int = YEARS[0]


def _country_records(rng: np.random.Generator) -> list[CountryRecord]:
    records = []
    for cid, (base, rgi, eu) in COUNTRIES.items():
        ps = {}
        for year in YEARS:
            value = round(float(np.clip(base + rng.normal(0, 1.5), 0, 100)), 2)
            if year not in PS_GAP.get(cid, ()):
                ps[year] = value
        tags = frozenset({EU_TAG}) if eu else frozenset()
        records.append(CountryRecord(cid, ps, rgi, tags))
    return records


def _split(
    rng: np.random.Generator, total: float, exporters: list[str]
) -> dict[str, float]:
    weights = rng.dirichlet(np.full(len(exporters), 4.0))
    return {e: total * float(w) for e, w in zip(exporters, weights)}


def _add(shares: dict[str, float], extra: Mapping[str, float]):
    for exporter, share in extra.items():
        shares[exporter] = shares.get(exporter, 0.0) + share


def _stable_suppliers(rng: np.random.Generator, importer: str, total: float):
    pool = [c for c in STABLE if c != importer]
    k = int(rng.integers(2, 4))
    chosen = rng.choice(pool, size=k, replace=False)
    return _split(rng, total, [str(c) for c in chosen])


def _region_flows(rng: np.random.Generator, hub: str) -> dict[str, str]:
    """The importers receiving the fixed USA and EU export shares."""
    outside = [c for c in OUTSIDE if c != hub]
    us_dest, eu_dest = rng.choice(outside, size=2, replace=False)
    return {"USA": str(us_dest), str(rng.choice(EU_MEMBERS)): str(eu_dest)}


def _plan_resource(
    rng: np.random.Generator, rid: str, c: float, hub: str
) -> _ResourcePlan:
    plan = _ResourcePlan(rid, c, hub, start=LATE_START.get(rid, YEARS[0]))
    region_flows = _region_flows(rng, hub)
    for importer in COUNTRIES:
        if importer == hub:
            continue
        shares = {hub: c}
        extra = {e: REGION_SHARE for e, d in region_flows.items() if d == importer}
        _add(shares, extra)
        _add(shares, _stable_suppliers(rng, importer, 1.0 - c - sum(extra.values())))
        plan.shares[importer] = shares
    spokes = [s for s in SPOKES if s != hub]
    k = int(rng.integers(2, 4))
    chosen = rng.choice(spokes, size=k, replace=False)
    plan.shares[hub] = _split(rng, 1.0, [str(s) for s in chosen])
    return plan


def _plan_beryllium(rng: np.random.Generator) -> _ResourcePlan:
    hub = "CHN"
    plan = _ResourcePlan(BERYLLIUM, 0.85, hub)
    region_flows = _region_flows(rng, hub)
    for importer in COUNTRIES:
        if importer == hub:
            continue
        if importer in EU_MEMBERS:
            shares = {hub: 0.85}
        elif importer == "USA":
            shares = {hub: 0.6}
        else:
            shares = {}
        extra = {e: REGION_SHARE for e, d in region_flows.items() if d == importer}
        _add(shares, extra)
        _add(shares, _stable_suppliers(rng, importer, 1.0 - sum(shares.values())))
        plan.shares[importer] = shares
    plan.shares[hub] = {"USA": 0.5, "DEU": 0.5}
    return plan


def _plans(rng: np.random.Generator) -> list[_ResourcePlan]:
    others = [r for r in RESOURCES if r != BERYLLIUM]
    concentrations = rng.permutation(np.linspace(0.25, 0.8, len(others)))
    plans = [
        _plan_resource(rng, rid, float(c), HUBS[i % len(HUBS)])
        for i, (rid, c) in enumerate(zip(others, concentrations))
    ]
    plans.append(_plan_beryllium(rng))
    return sorted(plans, key=lambda p: p.id)


def _values(
    rng: np.random.Generator, plans: list[_ResourcePlan]
) -> dict[tuple[str, int, str, str], float]:
    values = {}
    for plan in plans:
        for importer, shares in sorted(plan.shares.items()):
            base = float(np.exp(rng.normal(16.0, 1.0)))
            for year in YEARS:
                volume = base * float(np.exp(rng.normal(0.0, 0.1)))
                if year < plan.start:
                    continue
                for exporter, share in sorted(shares.items()):
                    values[(plan.id, year, exporter, importer)] = volume * share
    return values


def _records(values, masses=None) -> list[RawTradeRecord]:
    return [
        RawTradeRecord(
            year,
            exporter,
            importer,
            rid,
            Direction.EXPORT,
            value,
            None if masses is None else masses[(rid, year, exporter, importer)],
        )
        for (rid, year, exporter, importer), value in sorted(values.items())
    ]


def _regional_pagerank(
    countries, plans, values
) -> dict[tuple[str, str], Optional[float]]:
    stub = [ResourceRecord(p.id) for p in plans]
    panel = apply_threshold(reconcile(_records(values), countries, stub, YEARS), 0.01)
    condensed = condense_region(panel, EU_TAG, "EU", EU_2012)
    return {
        (p.id, region): traderisk(
            condensed, p.id, region, StabilityMode.PS, node=node
        ).pagerank
        for p in plans
        for region, node in (("EU", "EU"), ("US", "USA"))
    }


def _price_path(
    rng: np.random.Generator, years: list[int], sigma: float, p0: float
) -> dict[int, float]:
    """Prices whose log returns have sample standard deviation exactly `sigma`."""
    z = rng.normal(size=len(years) - 1)
    z = (z - z.mean()) / z.std(ddof=1)
    logs = np.concatenate([[0.0], np.cumsum(sigma * z)])
    return {year: p0 * float(np.exp(lp)) for year, lp in zip(years, logs)}


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


# pylint: disable=too-many-locals,too-many-statements
def generate_fixture(outdir: P, seed: int = 0, verbose=False) -> FixtureFiles:
    """Write `trade.csv`, `countries.csv` and `resources.csv` to `outdir`."""
    rng = np.random.default_rng(seed)
    countries = _country_records(rng)
    plans = _plans(rng)
    values = _values(rng, plans)

    pagerank = _regional_pagerank(countries, plans, values)
    be_eu = pagerank[(BERYLLIUM, "EU")] or 1.0
    import_reliance: dict[str, dict[str, float]] = {}
    for plan in plans:
        if plan.id == BERYLLIUM:
            eu = 1.0
        else:
            pr = pagerank[(plan.id, "EU")] or be_eu
            # keep BE the resource with the highest EU TradeRisk
            eu = round(min(float(rng.uniform(0.55, 0.95)), 0.9 * be_eu / pr), 4)
        us = round(float(rng.uniform(0.3, 0.9)), 4)
        import_reliance[plan.id] = {"EU": eu, "US": us}

    prices: dict[tuple[str, str], dict[int, float]] = {}
    for plan in plans:
        years = [t for t in YEARS if t >= plan.start]
        for region in ("EU", "US"):
            tr = (pagerank[(plan.id, region)] or 0.0) * import_reliance[plan.id][region]
            noise = float(np.exp(rng.normal(0.0, VOLATILITY_NOISE)))
            sigma = (VOLATILITY_BASE + VOLATILITY_SLOPE * tr) * noise
            p0 = float(rng.uniform(2, 50))
            prices[(plan.id, region)] = _price_path(rng, years, sigma, p0)
        p0 = float(rng.uniform(2, 50))
        prices[(plan.id, "world")] = _price_path(rng, years, WORLD_VOLATILITY, p0)

    masses = {}
    for (rid, year, exporter, importer), value in values.items():
        region = "world"
        if exporter in EU_MEMBERS:
            region = "EU"
        elif exporter == "USA":
            region = "US"
        masses[(rid, year, exporter, importer)] = value / prices[(rid, region)][year]

    stub = [ResourceRecord(p.id) for p in plans]
    thresholded = apply_threshold(
        reconcile(_records(values, masses), countries, stub, YEARS), 0.01
    )

    resource_rows = []
    classes = list(Classification)
    for i, plan in enumerate(plans):
        reserves = None
        if plan.id != BERYLLIUM:
            target = -6.0 + 3.0 * plan.concentration + float(rng.normal(0, 0.1))
            reserves = total_trade_volume(thresholded, plan.id) * math.exp(-target)
        sources = {
            src: None if rng.random() < 0.15 else round(float(rng.uniform(0.5, 9.5)), 2)
            for src in ("sr_nrc", "sr_bgs", "sr_ec")
        }
        resource_rows.append(
            {
                "id": plan.id,
                "reserves_kg": _fmt(reserves),
                **{k: _fmt(v) for k, v in sources.items()},
                "ir_EU": _fmt(import_reliance[plan.id]["EU"]),
                "ir_US": _fmt(import_reliance[plan.id]["US"]),
                "tb_EU": _fmt(round(float(rng.uniform(0, 5)), 2)),
                "tb_US": "" if i % 7 == 3 else _fmt(round(float(rng.uniform(0, 5)), 2)),
                "classification": classes[i % len(classes)].value,
            }
        )

    trade_rows = []
    for (rid, year, exporter, importer), value in sorted(values.items()):
        mass = masses[(rid, year, exporter, importer)]
        trade_rows.append(
            {
                "year": str(year),
                "reporter": exporter,
                "partner": importer,
                "resource": rid,
                "direction": Direction.EXPORT.value,
                "value_usd": _fmt(value),
                "mass_kg": _fmt(mass),
            }
        )
        if rng.random() < 0.1:
            continue
        # mirror record, reported lower by the importer
        u = float(rng.uniform(0.9, 1.0))
        trade_rows.append(
            {
                "year": str(year),
                "reporter": importer,
                "partner": exporter,
                "resource": rid,
                "direction": Direction.IMPORT.value,
                "value_usd": _fmt(value * u),
                "mass_kg": "" if rng.random() < 0.2 else _fmt(mass * u),
            }
        )

    country_rows = []
    for c in countries:
        tags = ";".join(sorted(c.region_tags))
        for year in sorted(c.ps_by_year):
            country_rows.append(
                {
                    "id": c.id,
                    "year": str(year),
                    "ps": _fmt(c.ps_by_year[year]),
                    "rgi": _fmt(c.rgi),
                    "region_tags": tags,
                }
            )

    outdir.mkdir(parents=True, exist_ok=True)
    files = FixtureFiles(
        outdir / "trade.csv", outdir / "countries.csv", outdir / "resources.csv"
    )
    for path, rows in (
        (files.trade, trade_rows),
        (files.countries, country_rows),
        (files.resources, resource_rows),
    ):
        pd.DataFrame(rows, dtype=str).to_csv(path, index=False, lineterminator="\n")
        if verbose:
            click.echo(f" > Wrote {len(rows)} rows to {path}")
    return files
