from __future__ import annotations

from .archive import ArchiveError, read_archive, write_archive
from .parse import (
    ParseError,
    ValidationError,
    parse_files,
    read_countries,
    read_resources,
    read_trade,
)
from .records import (
    Direction,
    DuplicateRecordError,
    RawTradeRecord,
    RegionError,
    apply_threshold,
    condense_region,
    reconcile,
)

__all__ = [
    "ArchiveError",
    "Direction",
    "DuplicateRecordError",
    "ParseError",
    "RawTradeRecord",
    "RegionError",
    "ValidationError",
    "apply_threshold",
    "condense_region",
    "parse_files",
    "read_archive",
    "read_countries",
    "read_resources",
    "read_trade",
    "reconcile",
    "write_archive",
]
