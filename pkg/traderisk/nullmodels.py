"""
Randomized surrogates of the trade layers and ensemble averaging over them.

Each scheme keeps a different set of structural properties of a layer:

* `fix-degree` keeps the link count and the multiset of weights, and places the
  flows into distinct random off-diagonal cells.
* `fix-in-deg` keeps every importer's flows and redraws their exporters.
* `fix-in-out-deg` keeps the links and permutes the weights among them.
"""
from __future__ import annotations

import hashlib
import math

from collections.abc import Callable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy import sparse

from .helpers import warn
from .model import TradeFlowPanel

Seed = Union[int, np.random.Generator]


class Scheme(Enum):
    FIX_DEGREE = "fix-degree"
    FIX_IN_DEG = "fix-in-deg"
    FIX_IN_OUT_DEG = "fix-in-out-deg"


def _rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(base_seed: int, resource: str, year: int, realization: int) -> int:
    """
    Seed of one randomized layer.

    The seed is the first 8 bytes of the SHA-256 of
    `"<base_seed>:<resource>:<year>:<realization>"`, read as an unsigned
    big-endian integer, so it's the same on every platform.
    """
    digest = hashlib.sha256(
        f"{base_seed}:{resource}:{year}:{realization}".encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "big")


def randomize_fix_degree(layer: sparse.csr_matrix, seed: Seed) -> sparse.csr_matrix:
    n = layer.shape[0]
    coo = layer.tocoo()
    links = coo.nnz
    if links > n * (n - 1):
        raise ValueError(
            f"{links} links don't fit into {n * (n - 1)} off-diagonal cells"
        )
    if links == 0:
        return sparse.csr_matrix(layer.shape, dtype=float)
    cells = _rng(seed).choice(n * (n - 1), size=links, replace=False)
    rows = cells // (n - 1)
    offsets = cells % (n - 1)
    # skip the diagonal cell of each row
    cols = np.where(offsets < rows, offsets, offsets + 1)
    out = sparse.csr_matrix((coo.data.copy(), (rows, cols)), shape=layer.shape)
    out.sort_indices()
    return out


def randomize_fix_indeg(layer: sparse.csr_matrix, seed: Seed) -> sparse.csr_matrix:
    """
    Redraw the exporter of every flow.

    The exporters of each importer are drawn without replacement from all other
    countries, so no two flows of an importer end up in the same cell.
    """
    rng = _rng(seed)
    n = layer.shape[0]
    csc = sparse.csc_matrix(layer)
    csc.sort_indices()
    rows = np.empty(csc.nnz, dtype=np.int64)
    for j in range(n):
        start, end = csc.indptr[j], csc.indptr[j + 1]
        if start == end:
            continue
        others = np.delete(np.arange(n), j)
        rows[start:end] = rng.choice(others, size=end - start, replace=False)
    out = sparse.csc_matrix(
        (csc.data.copy(), rows, csc.indptr.copy()), shape=layer.shape
    ).tocsr()
    out.sort_indices()
    return out


def randomize_fix_inout(layer: sparse.csr_matrix, seed: Seed) -> sparse.csr_matrix:
    csr = sparse.csr_matrix(layer, copy=True)
    csr.sort_indices()
    csr.data = _rng(seed).permutation(csr.data)
    return csr


RANDOMIZERS: dict[Scheme, Callable[[sparse.csr_matrix, Seed], sparse.csr_matrix]] = {
    Scheme.FIX_DEGREE: randomize_fix_degree,
    Scheme.FIX_IN_DEG: randomize_fix_indeg,
    Scheme.FIX_IN_OUT_DEG: randomize_fix_inout,
}


def randomize_panel(
    panel: TradeFlowPanel, scheme: Scheme, base_seed: int, realization: int
) -> TradeFlowPanel:
    """
    Randomize every value layer of `panel` independently.

    Mass layers don't survive randomization, so the result carries none.
    """
    randomize = RANDOMIZERS[scheme]
    layers = {
        key: randomize(
            panel.value_usd[key], derive_seed(base_seed, key[0], key[1], realization)
        )
        for key in panel.layer_keys()
    }
    return panel.with_layers(layers, {})


@dataclass(frozen=True)
class EnsembleStat:
    mean: Optional[float]
    stderr: Optional[float]
    n: int


def summarize(values: list[Optional[float]]) -> EnsembleStat:
    """
    Mean and standard error of the available values.

    A series of identical values is reported with exactly that value as mean.
    """
    available = [v for v in values if v is not None and math.isfinite(v)]
    n = len(available)
    if n == 0:
        return EnsembleStat(None, None, 0)
    if all(v == available[0] for v in available):
        return EnsembleStat(available[0], 0.0 if n > 1 else None, n)
    arr = np.array(available)
    stderr = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else None
    return EnsembleStat(float(arr.mean()), stderr, n)


@dataclass(frozen=True)
class EnsembleSummary:
    scheme: Scheme
    realizations: int
    failed: int = 0
    stats: Mapping[str, EnsembleStat] = field(default_factory=dict)

    def mean(self, key: str) -> Optional[float]:
        stat = self.stats.get(key)
        return stat.mean if stat else None


Downstream = Callable[[TradeFlowPanel, int], Mapping[str, Optional[float]]]


# pylint: disable=too-many-arguments
def ensemble_run(
    panel: TradeFlowPanel,
    scheme: Scheme,
    realizations: int,
    base_seed: int,
    downstream: Downstream,
    jobs: int = 1,
) -> EnsembleSummary:
    """
    Run `downstream` on `realizations` randomized copies of `panel`.

    `downstream` receives the randomized panel and the realization index and
    returns named values. Realizations whose computation fails numerically are
    left out of the averages and counted in `failed`. The summary doesn't
    depend on `jobs`.
    """
    if realizations < 1:
        raise ValueError("at least one realization is required")

    def _one(realization: int) -> Optional[Mapping[str, Optional[float]]]:
        randomized = randomize_panel(panel, scheme, base_seed, realization)
        try:
            return downstream(randomized, realization)
        except ArithmeticError as e:
            warn(f"Realization {realization} of {scheme.value} failed: {e}")
            return None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one, range(realizations)))
    else:
        results = [_one(r) for r in range(realizations)]

    succeeded = [r for r in results if r is not None]
    keys = sorted({k for r in succeeded for k in r})
    stats = {k: summarize([r.get(k) for r in succeeded]) for k in keys}
    return EnsembleSummary(scheme, realizations, len(results) - len(succeeded), stats)
