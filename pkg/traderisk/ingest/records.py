from __future__ import annotations

import math

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import sparse

from traderisk.model import (
    CountryRecord,
    LayerKey,
    ResourceRecord,
    TradeFlowPanel,
    make_layer,
    normalize_id,
)


class Direction(Enum):
    IMPORT = "import"
    EXPORT = "export"


class DuplicateRecordError(ValueError):
    pass


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class RawTradeRecord:
    """
    One bilateral flow as reported by `reporter`.

    For exports the reporter is the exporter, for imports it's the importer.
    """

    year: int
    reporter: str
    partner: str
    resource: str
    direction: Direction
    value_usd: float
    mass_kg: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "reporter", normalize_id(self.reporter))
        object.__setattr__(self, "partner", normalize_id(self.partner))
        object.__setattr__(self, "resource", normalize_id(self.resource))
        if self.reporter == self.partner:
            raise ValueError(f"reporter and partner are both {self.reporter}")
        if not math.isfinite(self.value_usd) or self.value_usd < 0:
            raise ValueError(
                f"trade value {self.value_usd} is not a nonnegative number"
            )
        if self.mass_kg is not None and (
            not math.isfinite(self.mass_kg) or self.mass_kg < 0
        ):
            raise ValueError(f"trade mass {self.mass_kg} is not a nonnegative number")

    @property
    def exporter(self) -> str:
        return self.reporter if self.direction is Direction.EXPORT else self.partner

    @property
    def importer(self) -> str:
        return self.partner if self.direction is Direction.EXPORT else self.reporter


FlowKey = tuple[str, int, str, str]


# pylint: disable=too-many-locals
def reconcile(
    records: Iterable[RawTradeRecord],
    countries: Optional[Iterable[CountryRecord]] = None,
    resources: Optional[Iterable[ResourceRecord]] = None,
    years: Optional[Iterable[int]] = None,
) -> TradeFlowPanel:
    """
    Merge mirror records into one panel.

    Every flow is reported up to twice, once by the exporter and once by the
    importer. The panel keeps the larger of the two values, and independently
    the larger of the two masses; a missing side counts as 0. Flows whose
    value is 0 are dropped.

    Without registries, bare country and resource records are created for
    every id found in `records`.
    """
    values: dict[FlowKey, list[float]] = {}
    masses: dict[FlowKey, list[float]] = {}
    seen: set[tuple[Direction, FlowKey]] = set()
    record_years: set[int] = set()
    for rec in records:
        flow = (rec.resource, rec.year, rec.exporter, rec.importer)
        if (rec.direction, flow) in seen:
            raise DuplicateRecordError(
                f"duplicate {rec.direction.value} record for {rec.resource} "
                + f"{rec.year} {rec.exporter} -> {rec.importer}"
            )
        seen.add((rec.direction, flow))
        record_years.add(rec.year)
        side = 0 if rec.direction is Direction.EXPORT else 1
        values.setdefault(flow, [0.0, 0.0])[side] = rec.value_usd
        if rec.mass_kg is not None:
            masses.setdefault(flow, [0.0, 0.0])[side] = rec.mass_kg

    if countries is None:
        ids = {f[2] for f in values} | {f[3] for f in values}
        countries = [CountryRecord(c) for c in sorted(ids)]
    if resources is None:
        resources = [ResourceRecord(r) for r in sorted({f[0] for f in values})]
    panel = TradeFlowPanel(
        tuple(countries),
        tuple(resources),
        tuple(years) if years is not None else tuple(sorted(record_years)),
    )

    cells: dict[LayerKey, list[tuple[int, int, float, float]]] = {}
    for flow in sorted(values):
        value = max(values[flow])
        if value == 0:
            continue
        resource, year, exporter, importer = flow
        mass = max(masses.get(flow, (0.0, 0.0)))
        cells.setdefault((resource, year), []).append(
            (panel.index_of(exporter), panel.index_of(importer), value, mass)
        )

    value_layers, mass_layers = {}, {}
    for key, entries in cells.items():
        rows, cols, vals, kgs = zip(*entries)
        value_layers[key] = make_layer(rows, cols, vals, panel.size)
        if any(kgs):
            mass_layers[key] = make_layer(rows, cols, kgs, panel.size)
    return panel.with_layers(value_layers, mass_layers)


def _keep_mask(layer: sparse.csr_matrix, theta: float) -> sparse.csr_matrix:
    coo = layer.tocoo()
    totals = np.asarray(layer.sum(axis=0)).ravel()
    keep = coo.data / totals[coo.col] > theta
    return sparse.csr_matrix(
        (np.ones(keep.sum()), (coo.row[keep], coo.col[keep])), shape=layer.shape
    )


def apply_threshold(panel: TradeFlowPanel, theta: float = 0.01) -> TradeFlowPanel:
    """
    Drop every flow which makes up at most `theta` of its importer's imports.

    Shares are computed on the import totals before thresholding. Masses are
    kept or dropped together with their flow. Layers without remaining flows
    are removed.
    """
    if not 0 <= theta < 1:
        raise ValueError(f"threshold {theta} outside [0, 1)")
    value_layers, mass_layers = {}, {}
    for key in panel.layer_keys():
        layer = panel.value_usd[key]
        mask = _keep_mask(layer, theta)
        if mask.nnz == 0:
            continue
        kept = sparse.csr_matrix(layer.multiply(mask))
        kept.eliminate_zeros()
        kept.sort_indices()
        value_layers[key] = kept
        if key in panel.mass_kg:
            kept_mass = sparse.csr_matrix(panel.mass_kg[key].multiply(mask))
            kept_mass.eliminate_zeros()
            if kept_mass.nnz:
                kept_mass.sort_indices()
                mass_layers[key] = kept_mass
    return panel.with_layers(value_layers, mass_layers)


def _weighted_mean(
    values: Mapping[str, Optional[float]], weights: Mapping[str, float]
) -> Optional[float]:
    available = {c: v for c, v in values.items() if v is not None}
    if not available:
        return None
    total = sum(weights[c] for c in available)
    if total <= 0:
        return float(np.mean(list(available.values())))
    return sum(v * weights[c] for c, v in available.items()) / total


def _external_imports(
    panel: TradeFlowPanel, member_idx: np.ndarray, keys: Iterable[LayerKey]
) -> np.ndarray:
    """Imports of each member from non-members, summed over `keys`."""
    outside = np.ones(panel.size, dtype=bool)
    outside[member_idx] = False
    totals = np.zeros(len(member_idx))
    for key in keys:
        layer = panel.value_usd[key]
        totals += np.asarray(layer[outside][:, member_idx].sum(axis=0)).ravel()
    return totals


def _condensed_country(
    panel: TradeFlowPanel, members: list[CountryRecord], new_node_id: str
) -> CountryRecord:
    member_idx = np.array([panel.index_of(c.id) for c in members], dtype=np.int64)
    keys = panel.layer_keys()

    years = set(panel.years)
    if not years:
        for c in members:
            years.update(c.ps_by_year)
    ps_by_year = {}
    for year in sorted(years):
        in_year = [k for k in keys if k[1] == year]
        imports = _external_imports(panel, member_idx, in_year)
        weights = {c.id: w for c, w in zip(members, imports)}
        ps = _weighted_mean({c.id: c.ps(year) for c in members}, weights)
        if ps is not None:
            ps_by_year[year] = ps

    imports = _external_imports(panel, member_idx, keys)
    weights = {c.id: w for c, w in zip(members, imports)}
    rgi = _weighted_mean({c.id: c.rgi for c in members}, weights)
    return CountryRecord(new_node_id, ps_by_year, rgi)


def condense_region(
    panel: TradeFlowPanel,
    region_tag: str,
    new_node_id: str,
    members: Optional[Iterable[str]] = None,
) -> TradeFlowPanel:
    """
    Replace all countries of a region by a single node.

    The region consists of the countries tagged with `region_tag` plus those
    listed in `members`. Flows between two members disappear; flows between a
    member and a non-member are summed onto the new node. The PS of the new node
    in year t is the mean of the members' PS weighted by their imports from
    outside the region in year t (uniform if they import nothing). The RGI is
    weighted by the imports over all years.
    """
    new_node_id = normalize_id(new_node_id)
    listed = {normalize_id(m) for m in members or ()}
    member_records = [
        c for c in panel.countries if region_tag in c.region_tags or c.id in listed
    ]
    if not member_records:
        raise RegionError(f"no country of the panel belongs to region '{region_tag}'")
    if panel.has_country(new_node_id):
        raise RegionError(
            f"region node id {new_node_id} collides with a country of the panel"
        )

    member_ids = {c.id for c in member_records}
    node = _condensed_country(panel, member_records, new_node_id)
    condensed = TradeFlowPanel(
        tuple(c for c in panel.countries if c.id not in member_ids) + (node,),
        panel.resources,
        panel.years,
    )
    mapping = np.array(
        [
            condensed.index_of(new_node_id if c.id in member_ids else c.id)
            for c in panel.countries
        ],
        dtype=np.int64,
    )
    is_member = np.array([c.id in member_ids for c in panel.countries])

    def _remap(layer: sparse.csr_matrix) -> sparse.csr_matrix:
        coo = layer.tocoo()
        external = ~(is_member[coo.row] & is_member[coo.col])
        return make_layer(
            mapping[coo.row[external]],
            mapping[coo.col[external]],
            coo.data[external],
            condensed.size,
        )

    value_layers, mass_layers = {}, {}
    for key in panel.layer_keys():
        layer = _remap(panel.value_usd[key])
        if layer.nnz == 0:
            continue
        value_layers[key] = layer
        if key in panel.mass_kg:
            mass = _remap(panel.mass_kg[key])
            if mass.nnz:
                mass_layers[key] = mass
    return condensed.with_layers(value_layers, mass_layers)
