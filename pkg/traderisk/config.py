from __future__ import annotations

import hashlib
import json

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path as P
from typing import Any, Optional

import click
from xdg.BaseDirectory import xdg_config_home

from .helpers import InputError, yaml_load
from .indicators import Orientation, StabilityMode
from .model import normalize_id

default_config_file = P(xdg_config_home) / "traderisk" / "config.yml"

# Member states of the EU in 2012. The list is configuration data and can be
# replaced through `region_members` in the config file.
EU_2012 = (
    "AUT",
    "BEL",
    "BGR",
    "CYP",
    "CZE",
    "DEU",
    "DNK",
    "ESP",
    "EST",
    "FIN",
    "FRA",
    "GBR",
    "GRC",
    "HUN",
    "IRL",
    "ITA",
    "LTU",
    "LUX",
    "LVA",
    "MLT",
    "NLD",
    "POL",
    "PRT",
    "ROU",
    "SVK",
    "SVN",
    "SWE",
)


@dataclass(frozen=True)
class RegionSpec:
    """
    A region for which regional indicators are computed.

    A region is either a single country of the panel (`country`) or the
    condensation of all countries carrying `tag` into one node named `name`.
    """

    name: str
    tag: Optional[str] = None
    country: Optional[str] = None

    @property
    def node_id(self) -> str:
        if self.tag is not None:
            return self.name
        assert self.country is not None
        return self.country

    def as_dict(self) -> dict[str, str]:
        if self.tag is not None:
            return {"tag": self.tag}
        assert self.country is not None
        return {"country": self.country}

    @classmethod
    def parse(cls, name: str, info: Mapping[str, str]) -> RegionSpec:
        name = normalize_id(name)
        if not name or "_" in name:
            raise InputError(
                f"Invalid region name '{name}', names must be nonempty without '_'"
            )
        if not isinstance(info, Mapping) or set(info) - {"tag", "country"}:
            raise InputError(
                f"Region '{name}' must be given as a mapping with key 'tag' or 'country'"
            )
        if ("tag" in info) == ("country" in info):
            raise InputError(
                f"Region '{name}' needs exactly one of 'tag' or 'country'"
            )
        if "tag" in info:
            return RegionSpec(name, tag=str(info["tag"]).strip())
        return RegionSpec(name, country=normalize_id(str(info["country"])))


def parse_years(raw: str) -> tuple[int, int]:
    """Parse a year range of the form `START:END` (both inclusive)."""
    try:
        start, end = (int(p) for p in str(raw).split(":"))
    except ValueError as e:
        raise InputError(
            f"Malformed year range '{raw}', expected START:END, e.g. 2000:2012"
        ) from e
    if start > end:
        raise InputError(f"Year range '{raw}' ends before it starts")
    return start, end


# pylint: disable=too-many-instance-attributes,too-many-public-methods
class Config:
    _years: tuple[int, int]
    _regions: dict[str, RegionSpec]
    _region_members: dict[str, tuple[str, ...]]

    def __init__(self, verbose=0):
        self._verbose = verbose
        self._years = (2000, 2012)
        self._threshold = 0.01
        self._alpha_factor = 0.85
        self._tolerance = 1e-10
        self._max_iterations = 100000
        self._realizations = 100
        self._seed = 0
        self._jobs = 1
        self._stability = StabilityMode.PS
        self._orientation = Orientation.EXPOSURE
        self._regions = {
            "EU": RegionSpec("EU", tag="EU-2012"),
            "US": RegionSpec("US", country="USA"),
        }
        self._region_members = {"EU-2012": EU_2012}
        self.config_file: Optional[P] = None

    @property
    def verbose(self):
        return self._verbose

    @property
    def debug(self):
        return self._verbose > 0

    @property
    def trace(self):
        return self._verbose >= 3

    def update_verbosity(self, verbose):
        self._verbose += verbose

    @property
    def years(self) -> tuple[int, int]:
        return self._years

    @years.setter
    def years(self, years):
        if isinstance(years, str):
            years = parse_years(years)
        start, end = years
        if start > end:
            raise InputError(f"Year range {start}:{end} ends before it starts")
        self._years = (int(start), int(end))

    @property
    def year_list(self) -> list[int]:
        return list(range(self._years[0], self._years[1] + 1))

    @property
    def threshold(self) -> float:
        return self._threshold

    @threshold.setter
    def threshold(self, theta: float):
        theta = float(theta)
        if not 0 <= theta < 1:
            raise InputError(f"Threshold {theta} outside [0, 1)")
        self._threshold = theta

    @property
    def alpha_factor(self) -> float:
        return self._alpha_factor

    @alpha_factor.setter
    def alpha_factor(self, alpha: float):
        alpha = float(alpha)
        if not 0 < alpha < 1:
            raise InputError(f"Alpha factor {alpha} outside (0, 1)")
        self._alpha_factor = alpha

    @property
    def tolerance(self) -> float:
        return self._tolerance

    @tolerance.setter
    def tolerance(self, tol: float):
        tol = float(tol)
        if tol <= 0:
            raise InputError("Tolerance must be positive")
        self._tolerance = tol

    @property
    def max_iterations(self) -> int:
        return self._max_iterations

    @max_iterations.setter
    def max_iterations(self, n: int):
        if int(n) < 1:
            raise InputError("Maximum number of iterations must be at least 1")
        self._max_iterations = int(n)

    @property
    def realizations(self) -> int:
        return self._realizations

    @realizations.setter
    def realizations(self, n: int):
        if int(n) < 1:
            raise InputError("Number of realizations must be at least 1")
        self._realizations = int(n)

    @property
    def seed(self) -> int:
        return self._seed

    @seed.setter
    def seed(self, seed: int):
        self._seed = int(seed)

    @property
    def jobs(self) -> int:
        return self._jobs

    @jobs.setter
    def jobs(self, jobs: int):
        if int(jobs) < 1:
            raise InputError("Number of jobs must be at least 1")
        self._jobs = int(jobs)

    @property
    def stability(self) -> StabilityMode:
        return self._stability

    @stability.setter
    def stability(self, mode):
        try:
            self._stability = StabilityMode(str(mode).lower())
        except ValueError as e:
            choices = ", ".join(m.value for m in StabilityMode)
            raise InputError(
                f"Unknown stability mode '{mode}', expected one of {choices}"
            ) from e

    @property
    def orientation(self) -> Orientation:
        return self._orientation

    @orientation.setter
    def orientation(self, orientation):
        try:
            self._orientation = Orientation(str(orientation).lower())
        except ValueError as e:
            choices = ", ".join(o.value for o in Orientation)
            raise InputError(
                f"Unknown PageRank orientation '{orientation}', expected one of {choices}"
            ) from e

    @property
    def regions(self) -> dict[str, RegionSpec]:
        return self._regions

    @regions.setter
    def regions(self, regions: Mapping[str, Mapping[str, str]]):
        if not isinstance(regions, Mapping):
            raise InputError("'regions' must be a mapping of region name to spec")
        self._regions = {
            normalize_id(name): RegionSpec.parse(name, info)
            for name, info in regions.items()
        }

    @property
    def region_members(self) -> dict[str, tuple[str, ...]]:
        return self._region_members

    @region_members.setter
    def region_members(self, members: Mapping[str, Iterable[str]]):
        if not isinstance(members, Mapping):
            raise InputError(
                "'region_members' must be a mapping of tag to country list"
            )
        self._region_members = {
            str(tag).strip(): tuple(sorted(normalize_id(c) for c in countries))
            for tag, countries in members.items()
        }

    def select_regions(self, names: Iterable[str]) -> list[RegionSpec]:
        """Look up configured regions by name, in the order given."""
        selected = []
        for name in names:
            key = normalize_id(name)
            if not key:
                continue
            if key not in self._regions:
                known = ", ".join(sorted(self._regions))
                raise InputError(
                    f"Unknown region '{name}', configured regions: {known}"
                )
            selected.append(self._regions[key])
        return selected

    _FILE_KEYS = {
        "years",
        "threshold",
        "alpha_factor",
        "tolerance",
        "max_iterations",
        "realizations",
        "seed",
        "jobs",
        "stability",
        "orientation",
        "regions",
        "region_members",
    }

    def load_file(self, path: P):
        """Apply the settings of the YAML config file at `path`."""
        try:
            doc = yaml_load(path)
        except OSError as e:
            raise InputError(f"Unable to read config file {path}: {e}") from e
        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise InputError(f"Config file {path}: expected a top-level mapping")
        unknown = sorted(set(doc) - self._FILE_KEYS)
        if unknown:
            raise InputError(
                f"Config file {path}: unknown key(s) {', '.join(unknown)}"
            )
        # Region members are applied first so that region specs can refer to them.
        for key in sorted(doc, key=lambda k: (k != "region_members", k)):
            setattr(self, key, doc[key])
        self.config_file = path
        if self.debug:
            click.echo(f" > Loaded config file {path}")

    def settings(self) -> dict[str, Any]:
        return {
            "years": f"{self._years[0]}:{self._years[1]}",
            "threshold": self._threshold,
            "alpha_factor": self._alpha_factor,
            "tolerance": self._tolerance,
            "max_iterations": self._max_iterations,
            "realizations": self._realizations,
            "seed": self._seed,
            "stability": self._stability.value,
            "orientation": self._orientation.value,
            "regions": {n: r.as_dict() for n, r in sorted(self._regions.items())},
            "region_members": {
                t: list(m) for t, m in sorted(self._region_members.items())
            },
        }

    def settings_hash(self) -> str:
        """Short digest of the effective settings, written into output headers."""
        canonical = json.dumps(self.settings(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def find_config_file(explicit: Optional[P]) -> Optional[P]:
    """
    Return the config file to load.

    An explicitly given path (flag or `TRADERISK_CONFIG`) wins, otherwise the
    user's XDG config file is used if it exists.
    """
    if explicit is not None:
        return explicit
    if default_config_file.is_file():
        return default_config_file
    return None
