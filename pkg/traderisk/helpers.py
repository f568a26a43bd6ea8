from __future__ import annotations

import collections
import functools
import itertools
import json

from collections.abc import Iterable
from pathlib import Path as P
from typing import Any, Optional

import click
import pandas as pd
import yaml

from traderisk import __version__

# Number format for every table we write
FLOAT_FORMAT = "%.12g"


class InputError(click.ClickException):
    """Input files or options which can't be processed. Exits with status 2."""

    exit_code = 2


class DegeneracyError(click.ClickException):
    """A numerical computation didn't produce a usable result. Exits with status 1."""

    exit_code = 1


def yaml_load(file):
    """
    Load single-document YAML and return document
    """
    with open(file, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)


def warn(message: str):
    click.secho(f" > {message}", fg="yellow", err=True)


@functools.lru_cache(maxsize=None)
def warn_once(message: str):
    """Emit `message` as a warning, only the first time it's seen in this process."""
    warn(message)


def header_line(settings_hash: str) -> str:
    return f"# traderisk {__version__} config={settings_hash}"


def write_csv(frame: pd.DataFrame, path: P, settings_hash: str):
    """
    Write `frame` as CSV preceded by the tool header comment line.

    Missing values are written as empty cells.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(header_line(settings_hash) + "\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_csv(path: P) -> pd.DataFrame:
    """Read a CSV written by `write_csv()`. Empty cells are returned as NaN."""
    return pd.read_csv(path, comment="#", keep_default_na=True, dtype={"resource": str})


def write_json(obj: Any, path: P, settings_hash: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "_meta": {"tool": f"traderisk {__version__}", "config": settings_hash},
        "data": obj,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1, sort_keys=True, allow_nan=False)
        f.write("\n")


def optional_float(value: Any) -> Optional[float]:
    """Convert table cells to float, mapping NaN and None to None."""
    if value is None:
        return None
    v = float(value)
    if v != v:
        return None
    return v


def sliding_window(iterable: Iterable, n: int):
    # sliding_window('ABCDEFG', 4) -> ABCD BCDE CDEF DEFG
    it = iter(iterable)
    window = collections.deque(itertools.islice(it, n), maxlen=n)
    if len(window) == n:
        yield tuple(window)
    for x in it:
        window.append(x)
        yield tuple(window)
