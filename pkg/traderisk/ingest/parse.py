"""
Strict readers for the trade, country and resource CSV files.

Every malformed row aborts with a `ParseError` naming file and line.
"""
from __future__ import annotations

import math

from collections.abc import Iterator
from pathlib import Path as P
from typing import IO, Optional, Union

import click
import pandas as pd

from traderisk.helpers import warn
from traderisk.model import (
    SUPPLY_RISK_SOURCES,
    Classification,
    CountryRecord,
    ResourceRecord,
    TradeFlowPanel,
    normalize_id,
    validate_panel,
)

from .records import Direction, DuplicateRecordError, RawTradeRecord, reconcile

Source = Union[P, str, IO[bytes]]

TRADE_COLUMNS = (
    "year",
    "reporter",
    "partner",
    "resource",
    "direction",
    "value_usd",
    "mass_kg",
)
COUNTRY_COLUMNS = ("id", "year", "ps", "rgi", "region_tags")
RESOURCE_COLUMNS = ("id", "reserves_kg", "sr_nrc", "sr_bgs", "sr_ec", "classification")


class ParseError(ValueError):
    def __init__(self, source: str, line: Optional[int], message: str):
        location = f"{source}:{line}" if line is not None else source
        super().__init__(f"{location}: {message}")
        self.source = source
        self.line = line


def _rows(
    source: Source, name: str, required: tuple[str, ...]
) -> Iterator[tuple[int, dict[str, str]]]:
    """
    Yield `(line, row)` for every non-blank data row.

    All cells are returned as stripped strings, missing cells as "".
    """
    try:
        frame = pd.read_csv(
            source,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        return
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ParseError(name, None, f"malformed CSV: {e}") from e

    frame = frame.fillna("")
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ParseError(name, 1, f"missing column(s) {', '.join(missing)}")
    for offset, row in enumerate(frame.to_dict("records")):
        cells = {k: str(v).strip() for k, v in row.items()}
        if not any(cells.values()):
            continue
        # header is line 1
        yield offset + 2, cells


def _number(
    cells: dict[str, str], column: str, name: str, line: int, required=False
) -> Optional[float]:
    raw = cells.get(column, "")
    if raw == "":
        if required:
            raise ParseError(name, line, f"missing value in column {column}")
        return None
    try:
        value = float(raw)
    except ValueError as e:
        raise ParseError(name, line, f"{column}: '{raw}' is not a number") from e
    if not math.isfinite(value) or value < 0:
        raise ParseError(name, line, f"{column}: {raw} is not a nonnegative number")
    return value


def _year(cells: dict[str, str], name: str, line: int) -> Optional[int]:
    raw = cells.get("year", "")
    if raw == "":
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise ParseError(name, line, f"year: '{raw}' is not an integer") from e


def _percentage(cells, column, name, line) -> Optional[float]:
    value = _number(cells, column, name, line)
    if value is not None and value > 100:
        raise ParseError(name, line, f"{column}: {value} outside [0, 100]")
    return value


def read_countries(source: Source, name: Optional[str] = None) -> list[CountryRecord]:
    """
    Read the country registry.

    A country may span several rows, one per year with a PS value. RGI and
    region tags may be given on any of them.
    """
    name = name or str(source)
    ps: dict[str, dict[int, float]] = {}
    rgi: dict[str, Optional[float]] = {}
    tags: dict[str, set[str]] = {}
    for line, cells in _rows(source, name, COUNTRY_COLUMNS):
        cid = normalize_id(cells["id"])
        if not cid:
            raise ParseError(name, line, "missing country id")
        ps.setdefault(cid, {})
        tags.setdefault(cid, set())
        year = _year(cells, name, line)
        value = _percentage(cells, "ps", name, line)
        if value is not None:
            if year is None:
                raise ParseError(name, line, "PS value without year")
            if year in ps[cid]:
                raise ParseError(name, line, f"second PS value for {cid} in {year}")
            ps[cid][year] = value
        country_rgi = _percentage(cells, "rgi", name, line)
        if country_rgi is not None:
            if rgi.get(cid) not in (None, country_rgi):
                raise ParseError(name, line, f"conflicting RGI values for {cid}")
            rgi[cid] = country_rgi
        tags[cid].update(
            t.strip() for t in cells["region_tags"].split(";") if t.strip()
        )
    return [
        CountryRecord(cid, ps[cid], rgi.get(cid), frozenset(tags[cid]))
        for cid in sorted(ps)
    ]


def _region_values(
    cells: dict[str, str], prefix: str, name: str, line: int
) -> dict[str, float]:
    values = {}
    for column in cells:
        if column.lower().startswith(prefix):
            value = _number(cells, column, name, line)
            if value is not None:
                values[normalize_id(column[len(prefix) :])] = value
    return values


def read_resources(source: Source, name: Optional[str] = None) -> list[ResourceRecord]:
    name = name or str(source)
    resources: dict[str, ResourceRecord] = {}
    for line, cells in _rows(source, name, RESOURCE_COLUMNS):
        rid = normalize_id(cells["id"])
        if not rid:
            raise ParseError(name, line, "missing resource id")
        if rid in resources:
            raise ParseError(name, line, f"resource {rid} listed twice")
        sources = {}
        for src in SUPPLY_RISK_SOURCES:
            value = _number(cells, f"sr_{src.lower()}", name, line)
            if value is not None:
                sources[src] = value
        ir = _region_values(cells, "ir_", name, line)
        for region, value in ir.items():
            if value > 1:
                raise ParseError(
                    name, line, f"import reliance {value} for {region} outside [0, 1]"
                )
        classification = None
        if cells["classification"]:
            try:
                classification = Classification(cells["classification"].lower())
            except ValueError as e:
                choices = ", ".join(c.value for c in Classification)
                raise ParseError(
                    name,
                    line,
                    f"unknown classification '{cells['classification']}', "
                    + f"expected one of {choices}",
                ) from e
        resources[rid] = ResourceRecord(
            rid,
            reserves_kg=_number(cells, "reserves_kg", name, line),
            supply_risk_sources=sources,
            import_reliance=ir,
            trade_barriers=_region_values(cells, "tb_", name, line),
            classification=classification,
        )
    return [resources[r] for r in sorted(resources)]


# pylint: disable=too-many-arguments,too-many-locals
def read_trade(
    source: Source,
    countries: set[str],
    resources: set[str],
    years: tuple[int, int],
    restrict_years: bool = False,
    name: Optional[str] = None,
) -> list[RawTradeRecord]:
    """
    Read raw trade records.

    Rows outside `years` are an error, unless `restrict_years` is set, in which
    case they are dropped and counted.
    """
    name = name or str(source)
    records = []
    dropped = 0
    for line, cells in _rows(source, name, TRADE_COLUMNS):
        year = _year(cells, name, line)
        if year is None:
            raise ParseError(name, line, "missing year")
        if not years[0] <= year <= years[1]:
            if restrict_years:
                dropped += 1
                continue
            raise ParseError(
                name,
                line,
                f"year {year} outside configured range {years[0]}:{years[1]}",
            )
        for column, known in (("reporter", countries), ("partner", countries)):
            if normalize_id(cells[column]) not in known:
                raise ParseError(name, line, f"unknown country '{cells[column]}'")
        if normalize_id(cells["resource"]) not in resources:
            raise ParseError(name, line, f"unknown resource '{cells['resource']}'")
        try:
            direction = Direction(cells["direction"].lower())
        except ValueError as e:
            raise ParseError(
                name,
                line,
                f"direction must be 'import' or 'export', not '{cells['direction']}'",
            ) from e
        try:
            records.append(
                RawTradeRecord(
                    year,
                    cells["reporter"],
                    cells["partner"],
                    cells["resource"],
                    direction,
                    _number(cells, "value_usd", name, line, required=True) or 0.0,
                    _number(cells, "mass_kg", name, line),
                )
            )
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(name, line, str(e)) from e
    if dropped:
        warn(
            f"Dropped {dropped} trade record(s) of {name} outside {years[0]}:{years[1]}"
        )
    return records


class ValidationError(ValueError):
    def __init__(self, violations):
        self.violations = violations
        details = "\n".join(f"  {v}" for v in violations[:20])
        more = ""
        if len(violations) > 20:
            more = f"\n  ... and {len(violations) - 20} more"
        super().__init__(f"panel violates {len(violations)} rule(s):\n{details}{more}")


def parse_files(
    trade_path: Source,
    countries_path: Source,
    resources_path: Source,
    config,
    restrict_years: bool = False,
) -> TradeFlowPanel:
    """
    Read the three input files and build the validated, reconciled panel.

    The panel spans `config.years`, also when some of those years have no trade.
    """
    countries = read_countries(countries_path)
    resources = read_resources(resources_path)
    records = read_trade(
        trade_path,
        {c.id for c in countries},
        {r.id for r in resources},
        config.years,
        restrict_years,
    )
    if config.debug:
        click.echo(
            f" > Read {len(records)} trade records, {len(countries)} countries, "
            + f"{len(resources)} resources"
        )
    try:
        panel = reconcile(records, countries, resources, config.year_list)
    except DuplicateRecordError as e:
        raise ParseError(str(trade_path), None, str(e)) from e
    violations = validate_panel(panel)
    if violations:
        raise ValidationError(violations)
    return panel
