"""
Pearson and partial correlations with two-sided Student-t p-values.
"""
from __future__ import annotations

import itertools
import math

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .helpers import warn
from .model import CorrelationEntry, CorrelationReport, IndicatorTable

GLOBAL_SUITE_VARIABLES = ("CSR", "S", "TTV", "kbar", "lambda", "SCC")
REGIONAL_SUITE_X = ("TR", "IR", "PR", "TRstr")
REGIONAL_SUITE_Y = ("sigma", "TB")

SIGNIFICANCE_LEVELS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


@dataclass(frozen=True)
class CorrelationResult:
    rho: Optional[float]
    p_value: Optional[float]
    n: int


@dataclass(frozen=True)
class CorrelationSpec:
    x: str
    y: str
    control: Optional[str] = None

    def __str__(self):
        base = f"{self.x}~{self.y}"
        return f"{base}|{self.control}" if self.control else base

    @classmethod
    def parse(cls, raw: str) -> CorrelationSpec:
        """Parse `X~Y` or `X~Y|Z`."""
        pair, _, control = raw.partition("|")
        x, sep, y = pair.partition("~")
        if not sep or not x.strip() or not y.strip():
            raise ValueError(f"malformed correlation '{raw}', expected X~Y or X~Y|Z")
        return cls(x.strip(), y.strip(), control.strip() or None)


def _clean(*series: Sequence[Optional[float]]) -> list[np.ndarray]:
    """Drop every position where one of the series has no finite value."""
    arrays = [
        np.array([np.nan if v is None else v for v in s], dtype=float) for s in series
    ]
    keep = np.all([np.isfinite(a) for a in arrays], axis=0)
    return [a[keep] for a in arrays]


def t_test_p_value(rho: float, df: int) -> float:
    """
    Two-sided p-value of a correlation coefficient with `df` degrees of freedom.

    With ``t = rho * sqrt(df / (1 - rho^2))`` the tail probability is the
    regularized incomplete beta function ``I_x(df/2, 1/2)`` at
    ``x = df / (df + t^2) = 1 - rho^2``.
    """
    if abs(rho) >= 1:
        return 0.0
    return float(special.betainc(df / 2.0, 0.5, 1.0 - rho * rho))


def _corr(a: np.ndarray, b: np.ndarray) -> Optional[float]:
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0:
        return None
    return float(np.clip((da @ db) / denom, -1.0, 1.0))


def pearson(
    x: Sequence[Optional[float]], y: Sequence[Optional[float]]
) -> CorrelationResult:
    """
    Sample Pearson correlation of the complete pairs of `x` and `y`.

    Needs at least three pairs and nonzero variance on both sides.
    """
    a, b = _clean(x, y)
    n = len(a)
    if n < 3:
        return CorrelationResult(None, None, n)
    rho = _corr(a, b)
    if rho is None:
        return CorrelationResult(None, None, n)
    return CorrelationResult(rho, t_test_p_value(rho, n - 2), n)


def partial_pearson(
    x: Sequence[Optional[float]],
    y: Sequence[Optional[float]],
    z: Sequence[Optional[float]],
) -> CorrelationResult:
    """
    Linear partial correlation of `x` and `y` controlling for `z`.

    Computed from the pairwise correlations of the complete triples; the p-value
    uses ``n - 3`` degrees of freedom.
    """
    a, b, c = _clean(x, y, z)
    n = len(a)
    if n < 4:
        return CorrelationResult(None, None, n)
    r_xy, r_xz, r_yz = _corr(a, b), _corr(a, c), _corr(b, c)
    if r_xy is None or r_xz is None or r_yz is None:
        return CorrelationResult(None, None, n)
    denom = (1 - r_xz**2) * (1 - r_yz**2)
    if denom <= 0:
        return CorrelationResult(None, None, n)
    rho = float(np.clip((r_xy - r_xz * r_yz) / math.sqrt(denom), -1.0, 1.0))
    return CorrelationResult(rho, t_test_p_value(rho, n - 3), n)


def significance_stars(p_value: Optional[float]) -> str:
    if p_value is None:
        return ""
    for level, stars in SIGNIFICANCE_LEVELS:
        if p_value < level:
            return stars
    return ""


def _series(table: IndicatorTable, variable: str) -> Optional[list[Optional[float]]]:
    try:
        values = table.series(variable)
    except KeyError:
        warn(f"Unknown indicator variable '{variable}' in correlation suite")
        return None
    return [values[r] for r in table.resources]


def correlation_suite(
    table: IndicatorTable, specs: Iterable[CorrelationSpec]
) -> CorrelationReport:
    """
    Evaluate every spec on `table`.

    Each correlation uses the resources which have values for all of its
    variables. Entries which can't be computed are kept with empty values.
    """
    entries = []
    for spec in specs:
        x, y = _series(table, spec.x), _series(table, spec.y)
        z = _series(table, spec.control) if spec.control else None
        if x is None or y is None:
            entries.append(
                CorrelationEntry(spec.x, spec.y, 0, None, None, spec.control)
            )
            continue
        plain = pearson(x, y)
        partial = CorrelationResult(None, None, 0)
        if spec.control and z is not None:
            partial = partial_pearson(x, y, z)
        entries.append(
            CorrelationEntry(
                spec.x,
                spec.y,
                plain.n,
                plain.rho,
                plain.p_value,
                spec.control,
                partial.rho if spec.control else None,
                partial.p_value if spec.control else None,
                partial.n if spec.control else None,
            )
        )
    return CorrelationReport(tuple(entries))


def global_suite() -> list[CorrelationSpec]:
    """All pairs of the global network and supply risk indicators."""
    return [
        CorrelationSpec(x, y)
        for x, y in itertools.combinations(GLOBAL_SUITE_VARIABLES, 2)
    ]


def regional_suite(regions: Iterable[str]) -> list[CorrelationSpec]:
    """TR, IR, PR and TRstr against price volatility and trade barriers."""
    return [
        CorrelationSpec(f"{x}_{region}", f"{y}_{region}")
        for region in regions
        for y in REGIONAL_SUITE_Y
        for x in REGIONAL_SUITE_X
    ]


def default_suite(regions: Sequence[str]) -> list[CorrelationSpec]:
    extra = [CorrelationSpec(f"TR_{r}", "CSR") for r in regions] + [
        CorrelationSpec(f"TR_{r}", f"sigma_{r}", f"TRstr_{r}") for r in regions
    ]
    return global_suite() + regional_suite(regions) + extra


def report_as_mapping(report: CorrelationReport) -> Mapping[str, Optional[float]]:
    """Flatten a report into named values, e.g. for ensemble averaging."""
    values: dict[str, Optional[float]] = {}
    for e in report.entries:
        name = str(CorrelationSpec(e.x_name, e.y_name, e.controlling_for))
        values[f"corr:{name}:rho"] = e.rho
        values[f"corr:{name}:p"] = e.p_value
        if e.controlling_for:
            values[f"corr:{name}:partial_rho"] = e.partial_rho
            values[f"corr:{name}:partial_p"] = e.partial_p
    return values
