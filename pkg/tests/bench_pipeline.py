from pathlib import Path

import pytest

from traderisk.config import Config
from traderisk.ingest import parse_files, read_archive, write_archive
from traderisk.nullmodels import Scheme, randomize_panel
from traderisk.pipeline import compute_table


@pytest.mark.bench
def bench_parse_files(benchmark, fixture_files):
    benchmark(
        parse_files,
        fixture_files.trade,
        fixture_files.countries,
        fixture_files.resources,
        Config(),
    )


@pytest.mark.bench
def bench_read_archive(benchmark, fixture_panel, tmp_path: Path):
    path = tmp_path / "panel.zip"
    write_archive(fixture_panel, path, "bench")
    benchmark(read_archive, path)


@pytest.mark.bench
def bench_compute_table(benchmark, fixture_prepared):
    benchmark(compute_table, fixture_prepared, Config())


@pytest.mark.bench
@pytest.mark.parametrize("scheme", list(Scheme))
def bench_randomize_panel(benchmark, fixture_prepared, scheme):
    benchmark(randomize_panel, fixture_prepared.country, scheme, 0, 0)
