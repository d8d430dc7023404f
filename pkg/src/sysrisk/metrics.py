"""Network observables on exposure matrices: scalar assortativity over a
binned node property, degree and reciprocity counts, balance-sheet summary."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BankSet, ExposureMatrix
from .errors import DegenerateProperty

DEFAULT_BINS = 10

_PROPERTY_SELECTORS = {
    "leverage": lambda bs: bs.leverage,
    "liability_leverage": lambda bs: bs.liability_leverage,
    "equity": lambda bs: np.asarray(bs.equity),
    "assets": lambda bs: np.asarray(bs.interbank_assets),
    "liabilities": lambda bs: np.asarray(bs.interbank_liabilities),
}


def node_property(bs: BankSet, selector) -> tuple[np.ndarray, str]:
    """Resolve a property selector (name or explicit vector) to values."""
    if isinstance(selector, str):
        try:
            return _PROPERTY_SELECTORS[selector](bs), selector
        except KeyError:
            raise ValueError(
                f"unknown property {selector!r}; expected one of "
                f"{sorted(_PROPERTY_SELECTORS)} or an explicit vector"
            ) from None
    values = np.asarray(selector, dtype=float)
    if values.shape != (bs.n_banks,):
        raise ValueError("property vector length does not match bank count")
    return values, "custom"


@dataclass(frozen=True)
class NodeBinning:
    """Equal-width binning of a scalar node property over its observed range."""

    indices: np.ndarray
    midpoints: np.ndarray
    n_bins: int


def bin_nodes(values: np.ndarray, n_bins: int) -> NodeBinning:
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    lo = float(values.min())
    hi = float(values.max())
    if hi <= lo:
        raise DegenerateProperty("property takes a single value; "
                                 "mixing by it is undefined")
    width = (hi - lo) / n_bins
    idx = np.minimum(((values - lo) / width).astype(np.int64), n_bins - 1)
    midpoints = lo + (np.arange(n_bins) + 0.5) * width
    return NodeBinning(indices=idx, midpoints=midpoints, n_bins=n_bins)


def mixing_counts(support: np.ndarray, src: NodeBinning,
                  tgt: NodeBinning) -> np.ndarray:
    """Directed edge counts between source and target property bins."""
    srcs, tgts = np.nonzero(support)
    counts = np.zeros((src.n_bins, tgt.n_bins))
    np.add.at(counts, (src.indices[srcs], tgt.indices[tgts]), 1.0)
    return counts


def _r_from_counts(counts: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    m = counts.sum()
    if m <= 0:
        return math.nan
    e_xy = counts / m
    a_x = e_xy.sum(axis=1)
    b_y = e_xy.sum(axis=0)
    num = float(x @ (e_xy - np.outer(a_x, b_y)) @ y)
    var_a = float(x**2 @ a_x - (x @ a_x) ** 2)
    var_b = float(y**2 @ b_y - (y @ b_y) ** 2)
    if var_a <= 0.0 or var_b <= 0.0:
        return math.nan
    return num / math.sqrt(var_a * var_b)


def assortativity_from_support(support: np.ndarray, src: NodeBinning,
                               tgt: NodeBinning) -> tuple[float, np.ndarray]:
    """Assortativity r and the mixing counts; r is nan when degenerate."""
    counts = mixing_counts(support, src, tgt)
    return _r_from_counts(counts, src.midpoints, tgt.midpoints), counts


def _jackknife_variance(counts: np.ndarray, x: np.ndarray, y: np.ndarray,
                        r_full: float) -> float:
    """Leave-one-edge-out variance, grouped by mixing cell.

    Removing any edge of a given cell yields the same leave-one-out value,
    so only distinct cells are re-evaluated. Leave-one-out values that turn
    degenerate carry no information and fall back to the full estimate.
    """
    m = counts.sum()
    if m <= 1:
        return 0.0
    cells = np.transpose(np.nonzero(counts))
    weights = np.empty(len(cells))
    values = np.empty(len(cells))
    for k, (bx, by) in enumerate(cells):
        weights[k] = counts[bx, by]
        counts[bx, by] -= 1.0
        r_i = _r_from_counts(counts, x, y)
        counts[bx, by] += 1.0
        values[k] = r_full if math.isnan(r_i) else r_i
    mean = float(weights @ values) / m
    return (m - 1.0) / m * float(weights @ (values - mean) ** 2)


@dataclass(frozen=True)
class AssortativityResult:
    """Mixing coefficient of a scalar node property across directed edges."""

    r: float
    variance: float
    n_bins: int
    source_property: str
    target_property: str

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "variance": self.variance,
            "n_bins": self.n_bins,
            "source_property": self.source_property,
            "target_property": self.target_property,
        }


def scalar_assortativity(m: ExposureMatrix, source_property="leverage",
                         target_property=None,
                         n_bins: int = DEFAULT_BINS) -> AssortativityResult:
    """Assortativity of a scalar property over the directed support edges.

    The property is split into equal-width bins labelled by midpoints; the
    mixing matrix counts edges unweighted. Variance comes from the
    leave-one-edge-out jackknife. Raises DegenerateProperty when there are
    fewer than 2 edges or the property puts all mass in one bin.
    """
    if target_property is None:
        target_property = source_property
    bs = m.bank_set
    src_values, src_name = node_property(bs, source_property)
    tgt_values, tgt_name = node_property(bs, target_property)
    support = m.support()
    if int(support.sum()) < 2:
        raise DegenerateProperty("need at least 2 edges on support")
    src = bin_nodes(src_values, n_bins)
    tgt = (src if (isinstance(source_property, str)
                   and source_property == target_property)
           else bin_nodes(tgt_values, n_bins))
    counts = mixing_counts(support, src, tgt)
    r = _r_from_counts(counts, src.midpoints, tgt.midpoints)
    if math.isnan(r):
        raise DegenerateProperty("all edges fall in a single property bin")
    variance = _jackknife_variance(counts, src.midpoints, tgt.midpoints, r)
    return AssortativityResult(r=r, variance=variance, n_bins=n_bins,
                               source_property=src_name,
                               target_property=tgt_name)


def edge_property_correlation(m: ExposureMatrix,
                              source_property="liability_leverage",
                              target_property="leverage") -> float:
    """Binning-free Pearson correlation of node properties across edges.

    Pairs the source node's property with the target node's property on
    every support edge; the default pairing correlates lender impact
    (liabilities over equity) with borrower exposure (assets over equity).
    """
    bs = m.bank_set
    src_values, _ = node_property(bs, source_property)
    tgt_values, _ = node_property(bs, target_property)
    srcs, tgts = np.nonzero(m.support())
    if srcs.size < 2:
        raise DegenerateProperty("need at least 2 edges on support")
    xs = src_values[srcs]
    ys = tgt_values[tgts]
    if float(xs.std()) == 0.0 or float(ys.std()) == 0.0:
        raise DegenerateProperty("edge endpoint property has no variation")
    return float(np.corrcoef(xs, ys)[0, 1])


@dataclass(frozen=True)
class NetworkSummary:
    """Degree, reciprocity, and balance-sheet totals of a network."""

    edge_count: int
    mean_degree: float
    reciprocal_pairs: int
    assets_liabilities_correlation: float
    total_assets: float
    total_liabilities: float
    max_assets: float
    max_liabilities: float

    def as_dict(self) -> dict:
        return {
            "edge_count": self.edge_count,
            "mean_degree": self.mean_degree,
            "reciprocal_pairs": self.reciprocal_pairs,
            "assets_liabilities_correlation": self.assets_liabilities_correlation,
            "total_assets": self.total_assets,
            "total_liabilities": self.total_liabilities,
            "max_assets": self.max_assets,
            "max_liabilities": self.max_liabilities,
        }


def network_summary(m: ExposureMatrix) -> NetworkSummary:
    bs = m.bank_set
    support = m.support()
    edges = int(support.sum())
    assets = np.asarray(bs.interbank_assets)
    liabs = np.asarray(bs.interbank_liabilities)
    if float(assets.std()) > 0.0 and float(liabs.std()) > 0.0:
        corr = float(np.corrcoef(assets, liabs)[0, 1])
    else:
        corr = math.nan
    return NetworkSummary(
        edge_count=edges,
        mean_degree=edges / bs.n_banks,
        reciprocal_pairs=int((support & support.T).sum()) // 2,
        assets_liabilities_correlation=corr,
        total_assets=float(assets.sum()),
        total_liabilities=float(liabs.sum()),
        max_assets=float(assets.max()),
        max_liabilities=float(liabs.max()),
    )
