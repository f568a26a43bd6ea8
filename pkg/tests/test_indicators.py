from __future__ import annotations

import math

import numpy as np
import pytest

from traderisk import graph
from traderisk.helpers import warn_once
from traderisk.indicators import (
    LayerNotFoundError,
    NetworkSettings,
    Orientation,
    RegionNotFoundError,
    StabilityMode,
    composite_supply_risk,
    global_table,
    layer_pagerank,
    price_and_volatility,
    resource_global,
    scarcity,
    stability_score,
    total_trade_volume,
    traderisk,
    vulnerability_network,
)
from traderisk.ingest import reconcile
from traderisk.model import CountryRecord, ResourceRecord

from conftest import export


def test_stability_score():
    c = CountryRecord("AAA", {2000: 30.0}, 70.0)
    assert stability_score(c, 2001, StabilityMode.PS) == 30.0
    assert stability_score(c, 2001, StabilityMode.RGI) == 70.0
    assert stability_score(c, 2001, StabilityMode.NONE) == 0.0


def test_vulnerability_network(small_panel):
    v = vulnerability_network(small_panel, "CU", 2000).weights.toarray()
    expected = np.zeros((4, 4))
    # AAA, BBB, CCC, DDD with PS 20, 60, 50, 80
    expected[0, 1] = 0.8 * 5 / 5
    expected[0, 2] = 0.8 * 3 / 5
    expected[1, 2] = 0.4 * 2 / 5
    expected[2, 0] = 0.5 * 4 / 5
    expected[2, 3] = 0.5 * 6 / 6
    expected[3, 0] = 0.2 * 1 / 5
    np.testing.assert_allclose(v, expected)


def test_vulnerability_network_without_stability(small_panel):
    v = vulnerability_network(small_panel, "CU", 2001, StabilityMode.NONE).weights
    np.testing.assert_allclose(np.asarray(v.sum(axis=0)).ravel(), [1.0] * 4)


def test_vulnerability_network_missing_rgi(small_panel, capsys):
    warn_once.cache_clear()
    v = vulnerability_network(small_panel, "CU", 2000, StabilityMode.RGI).weights
    # BBB has no RGI and counts as maximally unstable
    assert v[1, 2] == pytest.approx(1.0 * 2 / 5)
    assert "No RGI value for BBB" in capsys.readouterr().err


def test_vulnerability_network_missing_layer(small_panel):
    with pytest.raises(LayerNotFoundError):
        vulnerability_network(small_panel, "CU", 1999)


def test_layer_pagerank_orientation(small_panel):
    network = vulnerability_network(small_panel, "CU", 2000)
    v = network.weights
    as_written = layer_pagerank(
        network, NetworkSettings(orientation=Orientation.AS_WRITTEN)
    )
    np.testing.assert_allclose(as_written.scores, graph.pagerank(v).scores)

    exposure = layer_pagerank(network)
    expected = graph.pagerank(v.transpose(), out_degree=np.diff(v.indptr)).scores
    np.testing.assert_allclose(exposure.scores, expected)
    assert exposure.eigenvalue == pytest.approx(as_written.eigenvalue)


def test_traderisk(small_panel):
    ind = traderisk(small_panel, "CU", "DDD")
    idx = small_panel.index_of("DDD")
    pageranks = [
        layer_pagerank(vulnerability_network(small_panel, "CU", t)).normalized[idx]
        for t in (2000, 2001)
    ]
    assert ind.pagerank == pytest.approx(np.mean(pageranks))
    assert ind.in_strength == pytest.approx(0.5)
    assert ind.in_degree == 1.0
    assert ind.import_reliance == 0.25
    assert ind.traderisk == pytest.approx(ind.pagerank * 0.25)
    assert ind.instrength_traderisk == pytest.approx(0.5 * 0.25)
    # DDD's export price is flat, one return is too few
    assert ind.volatility is None
    assert ind.trade_barrier is None


def test_indicators_agree_with_layer_metrics(fixture_prepared):
    panel = fixture_prepared.regional
    idx = panel.index_of("EU")
    metrics = [
        graph.degrees_and_strengths(vulnerability_network(panel, "CU", t).weights)
        for t in panel.years_of("CU")
    ]
    ind = traderisk(panel, "CU", "EU")
    in_strength = np.mean([m.in_strength[idx] for m in metrics])
    assert ind.in_strength == pytest.approx(in_strength)
    assert ind.in_degree == pytest.approx(np.mean([m.in_degree[idx] for m in metrics]))
    glob = resource_global(panel, "CU")
    assert glob.avg_degree == pytest.approx(np.mean([m.avg_degree for m in metrics]))


def test_traderisk_years(small_panel):
    ind = traderisk(small_panel, "CU", "DDD", years=[2000])
    network = vulnerability_network(small_panel, "CU", 2000)
    idx = small_panel.index_of("DDD")
    assert ind.pagerank == pytest.approx(layer_pagerank(network).normalized[idx])


def test_traderisk_without_import_reliance(small_panel):
    ind = traderisk(small_panel, "ZN", "DDD")
    assert ind.pagerank is not None
    assert ind.import_reliance is None
    assert ind.traderisk is None
    assert ind.instrength_traderisk is None


def test_traderisk_node(small_panel):
    ind = traderisk(small_panel, "CU", "R", node="AAA")
    assert ind.import_reliance == 0.5
    assert ind.trade_barrier == 1.0


def test_traderisk_unknown_region(small_panel):
    with pytest.raises(RegionNotFoundError):
        traderisk(small_panel, "CU", "XXX")


def _priced_panel(prices, masses=None):
    records = []
    for year, price in prices.items():
        mass = 10.0 if masses is None else masses[year]
        records.append(export(year, "AAA", "BBB", price * 10.0, mass))
    return reconcile(records)


def test_price_and_volatility():
    panel = _priced_panel({2000: 1.0, 2001: 2.0, 2002: 4.0, 2003: 2.0})
    prices, sigma = price_and_volatility(panel, "CU", "AAA")
    assert prices == pytest.approx({2000: 1.0, 2001: 2.0, 2002: 4.0, 2003: 2.0})
    assert sigma == pytest.approx(2 * math.log(2) / math.sqrt(3))


def test_price_and_volatility_needs_consecutive_years():
    panel = _priced_panel({2000: 1.0, 2001: 2.0, 2003: 4.0, 2004: 2.0})
    # only 2000-2001 and 2003-2004 form returns
    _, sigma = price_and_volatility(panel, "CU", "AAA")
    assert sigma == pytest.approx(math.sqrt(2) * math.log(2))

    _, sigma = price_and_volatility(panel, "CU", "AAA", years=[2000, 2001, 2003])
    assert sigma is None


def test_price_and_volatility_missing_mass(capsys):
    panel = reconcile(
        [
            export(2000, "AAA", "BBB", 10.0, 10.0),
            export(2001, "AAA", "BBB", 10.0, 0.0),
            export(2001, "BBB", "AAA", 10.0, 5.0),
        ]
    )
    prices, sigma = price_and_volatility(panel, "CU", "AAA")
    assert prices == {2000: 1.0}
    assert sigma is None
    assert "AAA exports of CU in 2001 have no mass" in capsys.readouterr().err


def test_price_and_volatility_missing_mass_layer(capsys):
    panel = reconcile(
        [
            export(2000, "AAA", "BBB", 10.0, 10.0),
            export(2001, "AAA", "BBB", 10.0),
            export(2002, "AAA", "BBB", 30.0, 10.0),
        ]
    )
    assert ("CU", 2001) not in panel.mass_kg
    prices, sigma = price_and_volatility(panel, "CU", "AAA")
    assert prices == {2000: 1.0, 2002: 3.0}
    assert sigma is None
    assert "AAA exports of CU in 2001 have no mass" in capsys.readouterr().err


def test_price_and_volatility_without_masses(capsys):
    panel = reconcile(
        [export(2000, "AAA", "BBB", 10.0), export(2001, "AAA", "BBB", 9.0)]
    )
    assert price_and_volatility(panel, "CU", "AAA") == ({}, None)
    assert capsys.readouterr().err == ""


def test_total_trade_volume_and_scarcity(small_panel):
    assert total_trade_volume(small_panel, "CU") == pytest.approx(24.0)
    assert scarcity(small_panel, "CU") == pytest.approx(math.log(24.0 / 1000.0))
    assert total_trade_volume(small_panel, "ZN") == 0.0
    assert scarcity(small_panel, "ZN") is None


def test_composite_supply_risk(small_panel):
    assert composite_supply_risk(small_panel.resources) == {"CU": 0.0, "ZN": 1.0}


def test_composite_supply_risk_partial_sources(capsys):
    resources = [
        ResourceRecord("A", supply_risk_sources={"NRC": 1.0, "BGS": 5.0, "EC": 2.0}),
        ResourceRecord("B", supply_risk_sources={"NRC": 3.0, "EC": 2.0}),
        ResourceRecord("C", supply_risk_sources={"NRC": 2.0, "BGS": 1.0}),
        ResourceRecord("D"),
    ]
    csr = composite_supply_risk(resources)
    assert csr["A"] == pytest.approx((0.0 + 1.0) / 2)
    assert csr["B"] == pytest.approx(1.0)
    assert csr["C"] == pytest.approx((0.5 + 0.0) / 2)
    assert csr["D"] is None
    assert "EC has fewer than two distinct values" in capsys.readouterr().err


def test_resource_global(small_panel):
    cu = resource_global(small_panel, "CU")
    assert cu.avg_degree == 1.5
    assert cu.scc_fraction == 1.0
    lambdas = []
    for year in (2000, 2001):
        v = vulnerability_network(small_panel, "CU", year).weights.toarray()
        lambdas.append(max(abs(np.linalg.eigvals(v))))
    assert cu.largest_eigenvalue == pytest.approx(np.mean(lambdas), rel=1e-8)
    assert cu.total_trade_volume == pytest.approx(24.0)

    zn = resource_global(small_panel, "ZN")
    assert zn.avg_degree == 0.5
    assert zn.scc_fraction == 0.5
    assert zn.largest_eigenvalue == pytest.approx(math.sqrt(0.5 * 0.4))
    assert zn.total_trade_volume == 0.0
    assert zn.scarcity is None


def test_global_table(small_panel):
    table = global_table(small_panel)
    assert sorted(table.per_resource_global) == ["CU", "ZN"]
    assert table.per_resource_global["ZN"].csr == 1.0
    assert not table.per_resource_regional
