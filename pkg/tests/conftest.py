"""
Shared test fixtures for all tests
See the pytest docs for more details:
https://docs.pytest.org/en/latest/how-to/fixtures.html#scope-sharing-fixtures-across-classes-modules-packages-or-session
"""
from __future__ import annotations

from pathlib import Path
from typing import Protocol

import pytest

from click.testing import CliRunner, Result

from traderisk import cli
from traderisk.config import Config
from traderisk.fixture import FixtureFiles, generate_fixture
from traderisk.ingest import Direction, RawTradeRecord, parse_files, reconcile
from traderisk.model import CountryRecord, ResourceRecord, TradeFlowPanel
from traderisk.pipeline import PreparedPanels, compute_table, prepare


class RunnerFunc(Protocol):
    def __call__(self, args: list[str]) -> Result:
        ...


@pytest.fixture(autouse=True)
def no_user_config(tmp_path, monkeypatch):
    """Keep the user's own config file and environment out of the tests."""
    monkeypatch.setattr(
        "traderisk.config.default_config_file", tmp_path / "no-such-config.yml"
    )
    monkeypatch.delenv("TRADERISK_CONFIG", raising=False)


@pytest.fixture
def cli_runner() -> RunnerFunc:
    r = CliRunner(mix_stderr=False)
    return lambda args: r.invoke(cli.traderisk, args)


@pytest.fixture
def config():
    """
    Setup test TradeRisk config
    """
    return Config()


@pytest.fixture(scope="session")
def fixture_files(tmp_path_factory) -> FixtureFiles:
    return generate_fixture(tmp_path_factory.mktemp("fixture"), seed=0)


@pytest.fixture(scope="session")
def fixture_panel(fixture_files) -> TradeFlowPanel:
    return parse_files(
        fixture_files.trade, fixture_files.countries, fixture_files.resources, Config()
    )


@pytest.fixture(scope="session")
def fixture_prepared(fixture_panel) -> PreparedPanels:
    config = Config()
    return prepare(fixture_panel, config, list(config.regions.values()))


@pytest.fixture(scope="session")
def fixture_table(fixture_prepared):
    return compute_table(fixture_prepared, Config())


def export(year, exporter, importer, value, mass=None, resource="CU"):
    return RawTradeRecord(
        year, exporter, importer, resource, Direction.EXPORT, value, mass
    )


def imports(year, importer, exporter, value, mass=None, resource="CU"):
    return RawTradeRecord(
        year, importer, exporter, resource, Direction.IMPORT, value, mass
    )


@pytest.fixture
def small_panel() -> TradeFlowPanel:
    """
    Four countries trading copper in 2000 and 2001.

    AAA and BBB form the region `R`, BBB has no RGI.
    """
    countries = [
        CountryRecord("AAA", {2000: 20.0, 2001: 20.0}, 10.0, {"R"}),
        CountryRecord("BBB", {2000: 60.0, 2001: 60.0}, None, {"R"}),
        CountryRecord("CCC", {2000: 50.0, 2001: 50.0}, 50.0),
        CountryRecord("DDD", {2000: 80.0, 2001: 80.0}, 80.0),
    ]
    resources = [
        ResourceRecord(
            "CU",
            reserves_kg=1000.0,
            supply_risk_sources={"NRC": 1.0, "BGS": 2.0},
            import_reliance={"R": 0.5, "DDD": 0.25},
            trade_barriers={"R": 1.0},
        ),
        ResourceRecord(
            "ZN",
            reserves_kg=None,
            supply_risk_sources={"NRC": 3.0, "BGS": 4.0},
            import_reliance={"R": 1.0},
        ),
    ]
    records = []
    for year, factor in ((2000, 1.0), (2001, 2.0)):
        records += [
            export(year, "AAA", "BBB", 5.0 * factor, 1.0 * factor),
            export(year, "AAA", "CCC", 3.0 * factor, 1.5 * factor),
            export(year, "BBB", "CCC", 2.0 * factor, 0.5 * factor),
            export(year, "CCC", "AAA", 4.0 * factor, 2.0 * factor),
            export(year, "CCC", "DDD", 6.0 * factor, 2.0 * factor),
            export(year, "DDD", "AAA", 1.0 * factor, 1.0 * factor),
            export(year, "CCC", "BBB", 1.0, None, resource="ZN"),
            export(year, "BBB", "CCC", 1.0, None, resource="ZN"),
        ]
    return reconcile(records, countries, resources, [2000, 2001])


def write_text(path: Path, content: str) -> Path:
    path.write_text(content, encoding="utf-8")
    return path
