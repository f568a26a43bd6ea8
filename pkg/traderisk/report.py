"""
Tables written by the CLI and their readers.

Indicator tables have one row per resource. Regional indicators are written
as `<name>_<REGION>` columns, the same names correlation specs use.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path as P
from typing import Any, Optional

import pandas as pd

from .helpers import optional_float, read_csv, write_csv, write_json
from .model import (
    GLOBAL_VARIABLES,
    REGIONAL_VARIABLES,
    Classification,
    CorrelationReport,
    GlobalIndicators,
    IndicatorTable,
    RegionalIndicators,
)
from .nullmodels import EnsembleSummary
from .stats import CorrelationSpec, significance_stars

GLOBAL_CSV = "global.csv"
REGIONAL_CSV = "regional.csv"
CORRELATION_COLUMNS = (
    "x",
    "y",
    "controlling_for",
    "n",
    "rho",
    "p_value",
    "stars",
    "partial_rho",
    "partial_p",
    "partial_n",
    "partial_stars",
)


def global_frame(table: IndicatorTable) -> pd.DataFrame:
    rows = []
    for resource in sorted(table.per_resource_global):
        ind = table.per_resource_global[resource]
        row: dict[str, Any] = {"resource": resource}
        for short, attr in GLOBAL_VARIABLES.items():
            row[short] = getattr(ind, attr)
        row["classification"] = ind.classification.value if ind.classification else None
        rows.append(row)
    return pd.DataFrame(
        rows, columns=["resource", *GLOBAL_VARIABLES, "classification"]
    )


def regional_frame(table: IndicatorTable, regions: Sequence[str]) -> pd.DataFrame:
    columns = ["resource"] + [f"{s}_{g}" for g in regions for s in REGIONAL_VARIABLES]
    rows = []
    for resource in table.resources:
        row: dict[str, Any] = {"resource": resource}
        for region in regions:
            ind = table.per_resource_regional.get((resource, region))
            for short, attr in REGIONAL_VARIABLES.items():
                row[f"{short}_{region}"] = getattr(ind, attr) if ind else None
        rows.append(row)
    return pd.DataFrame(rows, columns=columns)


def _records(frame: pd.DataFrame) -> list[dict[str, Any]]:
    """Frame rows as JSON-safe dicts, NaN mapped to None."""
    return [
        {k: (None if isinstance(v, float) and v != v else v) for k, v in row.items()}
        for row in frame.to_dict("records")
    ]


def write_indicator_tables(
    table: IndicatorTable, regions: Sequence[str], outdir: P, settings_hash: str
) -> list[P]:
    """Write the global and regional tables as CSV and JSON."""
    written = []
    for stem, frame in (
        ("global", global_frame(table)),
        ("regional", regional_frame(table, regions)),
    ):
        csv_path = outdir / f"{stem}.csv"
        json_path = outdir / f"{stem}.json"
        write_csv(frame, csv_path, settings_hash)
        write_json(_records(frame), json_path, settings_hash)
        written += [csv_path, json_path]
    return written


def read_indicator_tables(indir: P) -> tuple[IndicatorTable, list[str]]:
    """Read the tables written by `write_indicator_tables()`."""
    glob = read_csv(indir / GLOBAL_CSV)
    per_global = {}
    for row in glob.to_dict("records"):
        cls = row.get("classification")
        per_global[str(row["resource"])] = GlobalIndicators(
            **{
                attr: optional_float(row.get(short))
                for short, attr in GLOBAL_VARIABLES.items()
            },
            classification=Classification(cls) if isinstance(cls, str) else None,
        )

    reg = read_csv(indir / REGIONAL_CSV)
    regions: list[str] = []
    for column in reg.columns:
        name, _, region = column.rpartition("_")
        if name in REGIONAL_VARIABLES and region not in regions:
            regions.append(region)
    per_regional = {}
    for row in reg.to_dict("records"):
        for region in regions:
            per_regional[(str(row["resource"]), region)] = RegionalIndicators(
                **{
                    attr: optional_float(row.get(f"{short}_{region}"))
                    for short, attr in REGIONAL_VARIABLES.items()
                }
            )
    return IndicatorTable(per_global, per_regional), regions


def correlation_frame(report: CorrelationReport) -> pd.DataFrame:
    rows = [
        {
            "x": e.x_name,
            "y": e.y_name,
            "controlling_for": e.controlling_for,
            "n": e.n,
            "rho": e.rho,
            "p_value": e.p_value,
            "stars": significance_stars(e.p_value),
            "partial_rho": e.partial_rho,
            "partial_p": e.partial_p,
            "partial_n": e.partial_n,
            "partial_stars": significance_stars(e.partial_p)
            if e.controlling_for
            else None,
        }
        for e in report.entries
    ]
    return pd.DataFrame(rows, columns=list(CORRELATION_COLUMNS)).astype(
        {"partial_n": "Int64"}
    )


def write_correlations(
    report: CorrelationReport, outdir: P, settings_hash: str, stem="correlations"
) -> list[P]:
    frame = correlation_frame(report)
    csv_path = outdir / f"{stem}.csv"
    json_path = outdir / f"{stem}.json"
    write_csv(frame, csv_path, settings_hash)
    write_json(
        [
            {**asdict(e), "stars": significance_stars(e.p_value)}
            for e in report.entries
        ],
        json_path,
        settings_hash,
    )
    return [csv_path, json_path]


def _cell(value: Optional[float], p_value: Optional[float]) -> str:
    if value is None:
        return "n/a"
    return f"{value:+.2f}{significance_stars(p_value)}"


def format_star_table(report: CorrelationReport) -> str:
    """
    Human-readable correlation table.

    Stars mark p < 0.05 (*), p < 0.01 (**) and p < 0.001 (***).
    """
    if not report.entries:
        return "No correlations requested."
    labels = [
        str(CorrelationSpec(e.x_name, e.y_name, e.controlling_for))
        for e in report.entries
    ]
    width = max(len(label) for label in labels)
    lines = [f"{'correlation':<{width}}  {'rho':>9}  {'n':>4}  {'partial':>9}"]
    for label, e in zip(labels, report.entries):
        partial = _cell(e.partial_rho, e.partial_p) if e.controlling_for else ""
        lines.append(
            f"{label:<{width}}  {_cell(e.rho, e.p_value):>9}  {e.n:>4}  {partial:>9}"
        )
    return "\n".join(lines)


def scatter_frame(table: IndicatorTable, region: str) -> pd.DataFrame:
    """TradeRisk against volatility and supply risk, one row per resource."""
    rows = []
    for resource in table.resources:
        ind = table.per_resource_regional.get((resource, region), RegionalIndicators())
        glob = table.per_resource_global.get(resource, GlobalIndicators())
        rows.append(
            {
                "resource": resource,
                "TR": ind.traderisk,
                "sigma": ind.volatility,
                "CSR": glob.csr,
                "classification": glob.classification.value
                if glob.classification
                else None,
            }
        )
    return pd.DataFrame(
        rows, columns=["resource", "TR", "sigma", "CSR", "classification"]
    )


def rank_frame(table: IndicatorTable, regions: Sequence[str]) -> pd.DataFrame:
    """
    Resources ranked by descending TradeRisk per region.

    Rank 1 is the highest TradeRisk, ties are broken by resource id. Resources
    without a TradeRisk aren't ranked.
    """
    rows = []
    for region in regions:
        values = [
            (resource, ind.traderisk)
            for (resource, g), ind in table.per_resource_regional.items()
            if g == region and ind.traderisk is not None
        ]
        values.sort(key=lambda item: (-item[1], item[0]))
        for rank, (resource, tr) in enumerate(values, start=1):
            rows.append(
                {"region": region, "rank": rank, "resource": resource, "TR": tr}
            )
    return pd.DataFrame(rows, columns=["region", "rank", "resource", "TR"])


def write_figure_data(
    table: IndicatorTable, regions: Sequence[str], outdir: P, settings_hash: str
) -> list[P]:
    written = []
    for region in regions:
        path = outdir / f"scatter_{region}.csv"
        write_csv(scatter_frame(table, region), path, settings_hash)
        written.append(path)
    path = outdir / "ranks.csv"
    write_csv(rank_frame(table, regions), path, settings_hash)
    written.append(path)
    return written


def ensemble_frame(summary: EnsembleSummary) -> pd.DataFrame:
    rows = [
        {
            "key": key,
            "mean": stat.mean,
            "stderr": stat.stderr,
            "n": stat.n,
            "scheme": summary.scheme.value,
            "realizations": summary.realizations,
        }
        for key, stat in sorted(summary.stats.items())
    ]
    return pd.DataFrame(
        rows, columns=["key", "mean", "stderr", "n", "scheme", "realizations"]
    )


def ensemble_correlation_frame(
    summary: EnsembleSummary, suite: Sequence[CorrelationSpec]
) -> pd.DataFrame:
    """Ensemble means of the correlation suite, one row per correlation."""
    rows = []
    for spec in suite:
        prefix = f"corr:{spec}"
        rho = summary.stats.get(f"{prefix}:rho")
        rows.append(
            {
                "x": spec.x,
                "y": spec.y,
                "controlling_for": spec.control,
                "rho_mean": rho.mean if rho else None,
                "rho_stderr": rho.stderr if rho else None,
                "p_mean": summary.mean(f"{prefix}:p"),
                "partial_rho_mean": summary.mean(f"{prefix}:partial_rho"),
                "partial_p_mean": summary.mean(f"{prefix}:partial_p"),
                "n": rho.n if rho else 0,
                "scheme": summary.scheme.value,
                "realizations": summary.realizations,
            }
        )
    return pd.DataFrame(
        rows,
        columns=[
            "x",
            "y",
            "controlling_for",
            "rho_mean",
            "rho_stderr",
            "p_mean",
            "partial_rho_mean",
            "partial_p_mean",
            "n",
            "scheme",
            "realizations",
        ],
    )


def write_ensemble(
    summary: EnsembleSummary,
    suite: Sequence[CorrelationSpec],
    outdir: P,
    settings_hash: str,
) -> list[P]:
    scheme = summary.scheme.value
    ensemble = outdir / f"ensemble_{scheme}.csv"
    correlations = outdir / f"correlations_{scheme}.csv"
    write_csv(ensemble_frame(summary), ensemble, settings_hash)
    write_csv(ensemble_correlation_frame(summary, suite), correlations, settings_hash)
    return [ensemble, correlations]
