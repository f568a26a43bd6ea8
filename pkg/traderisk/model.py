"""
Core domain types shared by all TradeRisk modules.

Networks are stored as sparse ``n x n`` matrices over the panel's country
index space. Entry ``[i, j]`` is the flow from exporter ``i`` to importer ``j``.
The index space is the registry sorted by country id; indices never leave the
process, files always carry country ids.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Optional

import numpy as np
from scipy import sparse

SUPPLY_RISK_SOURCES = ("NRC", "BGS", "EC")


def normalize_id(raw: str) -> str:
    return raw.strip().upper()


def empty_layer(n: int) -> sparse.csr_matrix:
    return sparse.csr_matrix((n, n), dtype=float)


def make_layer(
    rows: Iterable[int], cols: Iterable[int], data: Iterable[float], n: int
) -> sparse.csr_matrix:
    """Build a CSR layer, summing duplicate cells and dropping exact zeros."""
    r = np.fromiter(rows, dtype=np.int64)
    c = np.fromiter(cols, dtype=np.int64)
    d = np.fromiter(data, dtype=float)
    layer = sparse.coo_matrix((d, (r, c)), shape=(n, n)).tocsr()
    layer.sum_duplicates()
    layer.eliminate_zeros()
    layer.sort_indices()
    return layer


def _frozen(mapping: Optional[Mapping]) -> Mapping:
    return MappingProxyType(dict(mapping or {}))


@dataclass(frozen=True)
class CountryRecord:
    id: str
    ps_by_year: Mapping[int, float] = field(default_factory=dict)
    rgi: Optional[float] = None
    region_tags: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "ps_by_year", _frozen(self.ps_by_year))
        object.__setattr__(self, "region_tags", frozenset(self.region_tags))

    def ps(self, year: int) -> Optional[float]:
        """
        Political stability in `year`.

        Falls back to the nearest year with a value, preferring the earlier year
        on ties. Returns None if the country has no PS value at all.
        """
        if year in self.ps_by_year:
            return self.ps_by_year[year]
        if not self.ps_by_year:
            return None
        nearest = min(self.ps_by_year, key=lambda y: (abs(y - year), y))
        return self.ps_by_year[nearest]


class Classification(Enum):
    MAJOR_METAL = "major-metal"
    BYPRODUCT = "byproduct"
    OTHER = "other"


@dataclass(frozen=True)
class ResourceRecord:
    id: str
    reserves_kg: Optional[float] = None
    supply_risk_sources: Mapping[str, float] = field(default_factory=dict)
    import_reliance: Mapping[str, float] = field(default_factory=dict)
    trade_barriers: Mapping[str, float] = field(default_factory=dict)
    classification: Optional[Classification] = None

    def __post_init__(self):
        for attr in ("supply_risk_sources", "import_reliance", "trade_barriers"):
            object.__setattr__(self, attr, _frozen(getattr(self, attr)))


LayerKey = tuple[str, int]


@dataclass(frozen=True)
class TradeFlowPanel:
    """
    Time-indexed multiplex of bilateral flows per resource.

    `value_usd` holds the layers `M` and `mass_kg` the layers `K`, both keyed by
    `(resource, year)`. Only layers with at least one flow are stored.
    """

    countries: tuple[CountryRecord, ...]
    resources: tuple[ResourceRecord, ...]
    years: tuple[int, ...]
    value_usd: Mapping[LayerKey, sparse.csr_matrix] = field(default_factory=dict)
    mass_kg: Mapping[LayerKey, sparse.csr_matrix] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "countries", tuple(sorted(self.countries, key=lambda c: c.id))
        )
        object.__setattr__(
            self, "resources", tuple(sorted(self.resources, key=lambda r: r.id))
        )
        object.__setattr__(self, "years", tuple(sorted(self.years)))
        object.__setattr__(self, "value_usd", _frozen(self.value_usd))
        object.__setattr__(self, "mass_kg", _frozen(self.mass_kg))
        object.__setattr__(
            self, "_index", {c.id: i for i, c in enumerate(self.countries)}
        )
        object.__setattr__(self, "_resources", {r.id: r for r in self.resources})

    @property
    def size(self) -> int:
        return len(self.countries)

    @property
    def country_ids(self) -> list[str]:
        return [c.id for c in self.countries]

    @property
    def resource_ids(self) -> list[str]:
        return [r.id for r in self.resources]

    def index_of(self, country_id: str) -> int:
        return self._index[country_id]  # type: ignore[attr-defined]

    def has_country(self, country_id: str) -> bool:
        return country_id in self._index  # type: ignore[attr-defined]

    def country(self, country_id: str) -> CountryRecord:
        return self.countries[self.index_of(country_id)]

    def resource(self, resource_id: str) -> ResourceRecord:
        return self._resources[resource_id]  # type: ignore[attr-defined]

    def layer_keys(self) -> list[LayerKey]:
        return sorted(self.value_usd)

    def years_of(self, resource_id: str) -> list[int]:
        return [t for (r, t) in self.layer_keys() if r == resource_id]

    def mass(self, key: LayerKey) -> sparse.csr_matrix:
        """Mass layer for `key`, an empty layer if no masses were reported."""
        if key in self.mass_kg:
            return self.mass_kg[key]
        return empty_layer(self.size)

    def with_layers(
        self,
        value_usd: Mapping[LayerKey, sparse.csr_matrix],
        mass_kg: Mapping[LayerKey, sparse.csr_matrix],
    ) -> TradeFlowPanel:
        return replace(self, value_usd=value_usd, mass_kg=mass_kg)


@dataclass(frozen=True)
class VulnerabilityNetwork:
    resource: str
    year: int
    weights: sparse.csr_matrix


@dataclass(frozen=True)
class GlobalIndicators:
    avg_degree: Optional[float] = None
    largest_eigenvalue: Optional[float] = None
    scc_fraction: Optional[float] = None
    scarcity: Optional[float] = None
    total_trade_volume: Optional[float] = None
    csr: Optional[float] = None
    classification: Optional[Classification] = None


@dataclass(frozen=True)
class RegionalIndicators:
    pagerank: Optional[float] = None
    in_strength: Optional[float] = None
    in_degree: Optional[float] = None
    traderisk: Optional[float] = None
    instrength_traderisk: Optional[float] = None
    import_reliance: Optional[float] = None
    volatility: Optional[float] = None
    trade_barrier: Optional[float] = None


GLOBAL_FIELDS = (
    "avg_degree",
    "largest_eigenvalue",
    "scc_fraction",
    "scarcity",
    "total_trade_volume",
    "csr",
)

REGIONAL_FIELDS = (
    "pagerank",
    "in_strength",
    "in_degree",
    "traderisk",
    "instrength_traderisk",
    "import_reliance",
    "volatility",
    "trade_barrier",
)

# Short variable names used in correlation specs, e.g. ``TR_EU`` or ``lambda``.
GLOBAL_VARIABLES = {
    "kbar": "avg_degree",
    "lambda": "largest_eigenvalue",
    "SCC": "scc_fraction",
    "S": "scarcity",
    "TTV": "total_trade_volume",
    "CSR": "csr",
}

REGIONAL_VARIABLES = {
    "PR": "pagerank",
    "w_in": "in_strength",
    "k_in": "in_degree",
    "TR": "traderisk",
    "TRstr": "instrength_traderisk",
    "IR": "import_reliance",
    "sigma": "volatility",
    "TB": "trade_barrier",
}


@dataclass(frozen=True)
class IndicatorTable:
    per_resource_global: Mapping[str, GlobalIndicators] = field(default_factory=dict)
    per_resource_regional: Mapping[tuple[str, str], RegionalIndicators] = field(
        default_factory=dict
    )

    @property
    def resources(self) -> list[str]:
        ids = set(self.per_resource_global) | {
            r for (r, _) in self.per_resource_regional
        }
        return sorted(ids)

    @property
    def regions(self) -> list[str]:
        return sorted({region for (_, region) in self.per_resource_regional})

    def series(self, variable: str) -> dict[str, Optional[float]]:
        """
        Values of `variable` for every resource, None where unavailable.

        Global variables are addressed by their short name (``lambda``, ``S``),
        regional ones as ``<name>_<REGION>`` (``TR_EU``, ``sigma_US``).
        """
        if variable in GLOBAL_VARIABLES:
            attr = GLOBAL_VARIABLES[variable]
            return {
                r: getattr(self.per_resource_global.get(r, GlobalIndicators()), attr)
                for r in self.resources
            }
        name, sep, region = variable.rpartition("_")
        if not sep or name not in REGIONAL_VARIABLES:
            raise KeyError(f"unknown indicator variable '{variable}'")
        attr = REGIONAL_VARIABLES[name]
        return {
            r: getattr(
                self.per_resource_regional.get((r, region), RegionalIndicators()), attr
            )
            for r in self.resources
        }


@dataclass(frozen=True)
class CorrelationEntry:
    x_name: str
    y_name: str
    n: int
    rho: Optional[float]
    p_value: Optional[float]
    controlling_for: Optional[str] = None
    partial_rho: Optional[float] = None
    partial_p: Optional[float] = None
    partial_n: Optional[int] = None


@dataclass(frozen=True)
class CorrelationReport:
    entries: tuple[CorrelationEntry, ...] = ()


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    resource: Optional[str] = None
    year: Optional[int] = None
    exporter: Optional[str] = None
    importer: Optional[str] = None

    def __str__(self) -> str:
        loc = ", ".join(
            str(p)
            for p in (self.resource, self.year, self.exporter, self.importer)
            if p is not None
        )
        return f"{self.rule} ({loc}): {self.message}" if loc else self.message


def _layer_violations(
    panel: TradeFlowPanel, key: tuple[str, int], layer, label: str
) -> list[Violation]:
    violations = []
    ids = panel.country_ids
    resource, year = key
    if layer.shape != (panel.size, panel.size):
        return [
            Violation(
                "shape",
                f"{label} layer has shape {layer.shape}, expected "
                + f"{(panel.size, panel.size)}",
                resource,
                year,
            )
        ]
    coo = layer.tocoo()
    for i, j, w in zip(coo.row, coo.col, coo.data):
        if w < 0 or not np.isfinite(w):
            violations.append(
                Violation(
                    "negative-weight",
                    f"{label} weight {w} is not a finite nonnegative number",
                    resource,
                    year,
                    ids[i],
                    ids[j],
                )
            )
        if i == j and w != 0:
            violations.append(
                Violation(
                    "self-loop",
                    f"{label} flow from a country to itself",
                    resource,
                    year,
                    ids[i],
                    ids[j],
                )
            )
    return violations


def validate_panel(panel: TradeFlowPanel) -> list[Violation]:
    """Return one `Violation` per broken panel invariant, an empty list if none."""
    violations: list[Violation] = []

    seen: set[str] = set()
    for c in panel.countries:
        if c.id in seen:
            violations.append(Violation("duplicate-id", f"country {c.id} listed twice"))
        seen.add(c.id)
        for year, ps in c.ps_by_year.items():
            if not 0 <= ps <= 100:
                violations.append(
                    Violation(
                        "ps-range",
                        f"PS {ps} of {c.id} outside [0, 100]",
                        year=year,
                        exporter=c.id,
                    )
                )
        if c.rgi is not None and not 0 <= c.rgi <= 100:
            violations.append(
                Violation("rgi-range", f"RGI {c.rgi} of {c.id} outside [0, 100]")
            )

    for r in panel.resources:
        if r.reserves_kg is not None and r.reserves_kg < 0:
            violations.append(
                Violation("reserves", f"negative reserves {r.reserves_kg}", r.id)
            )
        for region, ir in r.import_reliance.items():
            if not 0 <= ir <= 1:
                violations.append(
                    Violation(
                        "ir-range",
                        f"import reliance {ir} for {region} outside [0, 1]",
                        r.id,
                    )
                )

    resource_ids = set(panel.resource_ids)
    for key in panel.layer_keys():
        if key[0] not in resource_ids:
            violations.append(
                Violation("unknown-resource", "layer for unregistered resource", *key)
            )
        violations.extend(_layer_violations(panel, key, panel.value_usd[key], "value"))

    for key in sorted(panel.mass_kg):
        if key not in panel.value_usd:
            violations.append(
                Violation("mass-without-value", "mass layer without value layer", *key)
            )
            continue
        mass = panel.mass_kg[key]
        violations.extend(_layer_violations(panel, key, mass, "mass"))
        if mass.shape == panel.value_usd[key].shape:
            with_value = set(zip(*panel.value_usd[key].nonzero()))
            ids = panel.country_ids
            for i, j in zip(*mass.nonzero()):
                if (i, j) not in with_value:
                    violations.append(
                        Violation(
                            "mass-without-value",
                            "mass reported for a flow without value",
                            *key,
                            ids[i],
                            ids[j],
                        )
                    )

    return violations
