from __future__ import annotations

import numpy as np
import pytest

from scipy import sparse

from traderisk.model import (
    CountryRecord,
    GlobalIndicators,
    IndicatorTable,
    RegionalIndicators,
    ResourceRecord,
    TradeFlowPanel,
    make_layer,
    normalize_id,
    validate_panel,
)


def test_normalize_id():
    assert normalize_id(" deu ") == "DEU"


def test_make_layer_sums_duplicates_and_drops_zeros():
    layer = make_layer([0, 0, 1], [1, 1, 0], [1.0, 2.0, 0.0], 2)
    assert layer.nnz == 1
    assert layer[0, 1] == 3.0


@pytest.mark.parametrize(
    "year,expected",
    [
        (2000, 10.0),
        (2002, 10.0),
        (2003, 30.0),
        (1990, 10.0),
        (2010, 30.0),
    ],
)
def test_country_ps_nearest_year(year, expected):
    c = CountryRecord("AAA", {2000: 10.0, 2004: 30.0})
    assert c.ps(year) == expected


def test_country_ps_missing():
    assert CountryRecord("AAA").ps(2000) is None


def test_panel_sorts_registries():
    panel = TradeFlowPanel(
        (CountryRecord("ZZZ"), CountryRecord("AAA")),
        (ResourceRecord("ZN"), ResourceRecord("CU")),
        (2001, 2000),
    )
    assert panel.country_ids == ["AAA", "ZZZ"]
    assert panel.resource_ids == ["CU", "ZN"]
    assert panel.years == (2000, 2001)
    assert panel.index_of("ZZZ") == 1
    assert not panel.has_country("BBB")


def test_panel_empty_mass_layer(small_panel):
    assert small_panel.mass(("ZN", 2000)).nnz == 0
    assert small_panel.mass(("CU", 2000)).nnz == 6


def test_indicator_table_series():
    table = IndicatorTable(
        {"CU": GlobalIndicators(largest_eigenvalue=0.5)},
        {
            ("CU", "EU"): RegionalIndicators(traderisk=0.25, in_strength=2.0),
            ("ZN", "EU"): RegionalIndicators(traderisk=0.5),
        },
    )
    assert table.resources == ["CU", "ZN"]
    assert table.regions == ["EU"]
    assert table.series("lambda") == {"CU": 0.5, "ZN": None}
    assert table.series("TR_EU") == {"CU": 0.25, "ZN": 0.5}
    assert table.series("w_in_EU") == {"CU": 2.0, "ZN": None}
    assert table.series("TR_US") == {"CU": None, "ZN": None}
    with pytest.raises(KeyError):
        table.series("foo_EU")
    with pytest.raises(KeyError):
        table.series("lambdas")


def test_validate_panel_clean(small_panel):
    assert validate_panel(small_panel) == []


def test_validate_panel_reports_violations():
    countries = (CountryRecord("AAA", {2000: 120.0}), CountryRecord("BBB"))
    resources = (ResourceRecord("CU", import_reliance={"EU": 1.5}),)
    layer = sparse.csr_matrix(np.array([[1.0, -2.0], [0.0, 0.0]]))
    mass = sparse.csr_matrix(np.array([[0.0, 0.0], [3.0, 0.0]]))
    panel = TradeFlowPanel(
        countries,
        resources,
        (2000,),
        {("CU", 2000): layer, ("PB", 2000): make_layer([0], [1], [1.0], 2)},
        {("CU", 2000): mass},
    )
    rules = sorted(v.rule for v in validate_panel(panel))
    assert rules == [
        "ir-range",
        "mass-without-value",
        "negative-weight",
        "ps-range",
        "self-loop",
        "unknown-resource",
    ]


def test_violation_str():
    panel = TradeFlowPanel(
        (CountryRecord("AAA"), CountryRecord("BBB")),
        (ResourceRecord("CU"),),
        (2000,),
        {("CU", 2000): make_layer([0], [0], [1.0], 2)},
    )
    (violation,) = validate_panel(panel)
    assert (
        str(violation)
        == "self-loop (CU, 2000, AAA, AAA): value flow from a country to itself"
    )
