"""
Panel archives.

An archive is a ZIP file with the members `countries.csv`, `resources.csv` and
`flows.csv` plus `manifest.json`, which lists the SHA-256 digest of every
member, an overall checksum, and the tool version and settings hash the
archive was written with. The checksum covers the members only. Members are
stored in sorted order with fixed timestamps so that the same panel always
produces the same bytes.
"""
from __future__ import annotations

import hashlib
import io
import json
import zipfile

from pathlib import Path as P
from typing import Optional

import pandas as pd

from traderisk import __version__
from traderisk.model import (
    SUPPLY_RISK_SOURCES,
    TradeFlowPanel,
    make_layer,
    normalize_id,
)

from .parse import (
    COUNTRY_COLUMNS,
    ParseError,
    _number,
    _rows,
    read_countries,
    read_resources,
)

FORMAT_VERSION = 1
FLOW_COLUMNS = ("resource", "year", "exporter", "importer", "value_usd", "mass_kg")
MANIFEST = "manifest.json"
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


class ArchiveError(ValueError):
    pass


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def _csv_bytes(rows: list[dict[str, str]], columns) -> bytes:
    frame = pd.DataFrame(rows, columns=list(columns), dtype=str)
    return frame.to_csv(index=False, lineterminator="\n").encode("utf-8")


def _countries_csv(panel: TradeFlowPanel) -> bytes:
    rows = []
    for c in panel.countries:
        common = {
            "id": c.id,
            "rgi": _fmt(c.rgi),
            "region_tags": ";".join(sorted(c.region_tags)),
        }
        if not c.ps_by_year:
            rows.append({**common, "year": "", "ps": ""})
        for year in sorted(c.ps_by_year):
            rows.append({**common, "year": str(year), "ps": _fmt(c.ps_by_year[year])})
    return _csv_bytes(rows, COUNTRY_COLUMNS)


def _resources_csv(panel: TradeFlowPanel) -> bytes:
    ir_regions = sorted({g for r in panel.resources for g in r.import_reliance})
    tb_regions = sorted({g for r in panel.resources for g in r.trade_barriers})
    columns = (
        ["id", "reserves_kg"]
        + [f"sr_{s.lower()}" for s in SUPPLY_RISK_SOURCES]
        + [f"ir_{g}" for g in ir_regions]
        + [f"tb_{g}" for g in tb_regions]
        + ["classification"]
    )
    rows = []
    for r in panel.resources:
        row = {
            "id": r.id,
            "reserves_kg": _fmt(r.reserves_kg),
            "classification": r.classification.value if r.classification else "",
        }
        for s in SUPPLY_RISK_SOURCES:
            row[f"sr_{s.lower()}"] = _fmt(r.supply_risk_sources.get(s))
        for g in ir_regions:
            row[f"ir_{g}"] = _fmt(r.import_reliance.get(g))
        for g in tb_regions:
            row[f"tb_{g}"] = _fmt(r.trade_barriers.get(g))
        rows.append(row)
    return _csv_bytes(rows, columns)


def _flows_csv(panel: TradeFlowPanel) -> bytes:
    ids = panel.country_ids
    rows = []
    for key in panel.layer_keys():
        value = panel.value_usd[key].tocoo()
        mass = panel.mass(key).todok()
        for i, j, v in sorted(zip(value.row, value.col, value.data)):
            kg = mass.get((i, j), 0.0)
            rows.append(
                {
                    "resource": key[0],
                    "year": str(key[1]),
                    "exporter": ids[i],
                    "importer": ids[j],
                    "value_usd": _fmt(v),
                    "mass_kg": _fmt(kg) if kg else "",
                }
            )
    return _csv_bytes(rows, FLOW_COLUMNS)


def _checksum(digests: dict[str, str]) -> str:
    h = hashlib.sha256()
    for name in sorted(digests):
        h.update(f"{name}:{digests[name]}\n".encode("utf-8"))
    return h.hexdigest()


def write_archive(panel: TradeFlowPanel, path: P, settings_hash: str) -> str:
    """Write `panel` to `path` and return the archive's content checksum."""
    members = {
        "countries.csv": _countries_csv(panel),
        "flows.csv": _flows_csv(panel),
        "resources.csv": _resources_csv(panel),
    }
    digests = {name: hashlib.sha256(data).hexdigest() for name, data in members.items()}
    checksum = _checksum(digests)
    manifest = {
        "format": FORMAT_VERSION,
        "years": list(panel.years),
        "members": digests,
        "checksum": checksum,
        "tool": f"traderisk {__version__}",
        "config": settings_hash,
    }
    members[MANIFEST] = (json.dumps(manifest, indent=1, sort_keys=True) + "\n").encode(
        "utf-8"
    )

    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name in sorted(members):
            info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, members[name])
    return checksum


def _read_members(path: P) -> tuple[dict, dict[str, bytes]]:
    try:
        with zipfile.ZipFile(path) as zf:
            members = {name: zf.read(name) for name in zf.namelist()}
    except (zipfile.BadZipFile, OSError) as e:
        raise ArchiveError(f"{path}: not a readable panel archive: {e}") from e
    if MANIFEST not in members:
        raise ArchiveError(f"{path}: archive has no {MANIFEST}")
    try:
        manifest = json.loads(members[MANIFEST])
    except json.JSONDecodeError as e:
        raise ArchiveError(f"{path}: malformed {MANIFEST}: {e}") from e
    if manifest.get("format") != FORMAT_VERSION:
        raise ArchiveError(
            f"{path}: unsupported archive format {manifest.get('format')}"
        )
    for name, digest in sorted(manifest.get("members", {}).items()):
        if name not in members:
            raise ArchiveError(f"{path}: member {name} is missing")
        if hashlib.sha256(members[name]).hexdigest() != digest:
            raise ArchiveError(f"{path}: checksum mismatch for member {name}")
    if _checksum(manifest["members"]) != manifest.get("checksum"):
        raise ArchiveError(f"{path}: archive checksum mismatch")
    return manifest, members


def read_archive(path: P) -> TradeFlowPanel:
    """Read a panel archive, verifying all member digests."""
    manifest, members = _read_members(path)
    for name in ("countries.csv", "resources.csv", "flows.csv"):
        if name not in manifest["members"]:
            raise ArchiveError(f"{path}: archive has no {name}")
    try:
        countries = read_countries(
            io.BytesIO(members["countries.csv"]), f"{path}:countries.csv"
        )
        resources = read_resources(
            io.BytesIO(members["resources.csv"]), f"{path}:resources.csv"
        )
    except ParseError as e:
        raise ArchiveError(str(e)) from e
    panel = TradeFlowPanel(tuple(countries), tuple(resources), tuple(manifest["years"]))

    name = f"{path}:flows.csv"
    cells: dict[tuple[str, int], list[tuple[int, int, float, float]]] = {}
    try:
        for line, row in _rows(io.BytesIO(members["flows.csv"]), name, FLOW_COLUMNS):
            key = (normalize_id(row["resource"]), int(row["year"]))
            cells.setdefault(key, []).append(
                (
                    panel.index_of(normalize_id(row["exporter"])),
                    panel.index_of(normalize_id(row["importer"])),
                    _number(row, "value_usd", name, line, required=True) or 0.0,
                    _number(row, "mass_kg", name, line) or 0.0,
                )
            )
    except (ParseError, KeyError, ValueError) as e:
        raise ArchiveError(f"{name}: {e}") from e

    value_layers, mass_layers = {}, {}
    for key, entries in sorted(cells.items()):
        rows, cols, vals, kgs = zip(*entries)
        value_layers[key] = make_layer(rows, cols, vals, panel.size)
        if any(kgs):
            mass_layers[key] = make_layer(rows, cols, kgs, panel.size)
    return panel.with_layers(value_layers, mass_layers)
