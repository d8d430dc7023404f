"""Network file formats: node balance sheets and exposure edge lists.

Nodes CSV carries ``id,equity,assets,liabilities`` (the equity column may
be absent, in which case equities are reconstructed from the flows).
Edges CSV carries ``source,target,exposure`` in currency units. Margins
are always derived from the edge matrix so they stay consistent under the
optional strongly-connected-component reduction and reciprocal netting.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import BankSet, ExposureMatrix, build_bank_set
from .errors import (
    NegativeExposure,
    ParseError,
    SelfLoopEdge,
    UnknownNodeId,
)
from .generators import reconstruct_equity

NODES_FIELDS = ("id", "equity", "assets", "liabilities")
EDGES_FIELDS = ("source", "target", "exposure")


@dataclass(frozen=True)
class LoadedNetwork:
    """A parsed network: balance sheets, exposures, and the original ids."""

    bank_set: BankSet
    exposures: ExposureMatrix
    ids: tuple


def _read_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            rows = [(lineno, row) for lineno, row in enumerate(reader, start=1)
                    if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [cell.strip() for cell in rows[0][1]]
    return header, rows[1:]


def _parse_float(cell: str, path, lineno: int, column: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(
            f"{path}: line {lineno}: cannot parse {column}={cell!r}"
        ) from None


def net_reciprocal_edges(weights: np.ndarray) -> np.ndarray:
    """Replace each reciprocal pair by one edge carrying the difference."""
    return weights - np.minimum(weights, weights.T)


def largest_strongly_connected(weights: np.ndarray) -> np.ndarray:
    """Indices of the largest strongly connected component."""
    n_comp, labels = connected_components(csr_matrix(weights > 0),
                                          connection="strong")
    sizes = np.bincount(labels, minlength=n_comp)
    return np.nonzero(labels == int(np.argmax(sizes)))[0]


def load_network(nodes_path, edges_path, *, largest_scc: bool = False,
                 net_reciprocal: bool = False,
                 equity_seed: int = 0) -> LoadedNetwork:
    """Read a network from node and edge files.

    Reciprocal netting (if requested) runs before the component reduction,
    so the reduction sees the cleared topology. Equities come from the
    nodes file when present, otherwise they are reconstructed from the
    (possibly reduced) edge flows with ``equity_seed``.
    """
    nodes_path = Path(nodes_path)
    edges_path = Path(edges_path)
    header, rows = _read_rows(nodes_path)
    if set(header) not in (set(NODES_FIELDS),
                           set(NODES_FIELDS) - {"equity"}) \
            or len(set(header)) != len(header):
        raise ParseError(f"{nodes_path}: expected header with columns "
                         f"{NODES_FIELDS} (equity optional), got {header}")
    has_equity = "equity" in header
    col = {name: header.index(name) for name in header}
    ids: list[str] = []
    index: dict[str, int] = {}
    equity_raw: list[float] = []
    for lineno, row in rows:
        if len(row) != len(header):
            raise ParseError(f"{nodes_path}: line {lineno}: expected "
                             f"{len(header)} fields, got {len(row)}")
        node_id = row[col["id"]].strip()
        if not node_id:
            raise ParseError(f"{nodes_path}: line {lineno}: empty id")
        if node_id in index:
            raise ParseError(f"{nodes_path}: line {lineno}: duplicate id "
                             f"{node_id!r}")
        index[node_id] = len(ids)
        ids.append(node_id)
        if has_equity:
            equity_raw.append(_parse_float(row[col["equity"]], nodes_path,
                                           lineno, "equity"))
    n = len(ids)
    if n < 2:
        raise ParseError(f"{nodes_path}: need at least 2 nodes")

    header, rows = _read_rows(edges_path)
    if header != list(EDGES_FIELDS):
        raise ParseError(f"{edges_path}: expected header "
                         f"{','.join(EDGES_FIELDS)}, got {header}")
    weights = np.zeros((n, n))
    for lineno, row in rows:
        if len(row) != 3:
            raise ParseError(f"{edges_path}: line {lineno}: expected 3 "
                             f"fields, got {len(row)}")
        src, tgt = row[0].strip(), row[1].strip()
        if src not in index:
            raise UnknownNodeId(f"{edges_path}: line {lineno}: unknown "
                                f"source {src!r}")
        if tgt not in index:
            raise UnknownNodeId(f"{edges_path}: line {lineno}: unknown "
                                f"target {tgt!r}")
        if src == tgt:
            raise SelfLoopEdge(f"{edges_path}: line {lineno}: self-loop "
                               f"on {src!r}")
        w = _parse_float(row[2], edges_path, lineno, "exposure")
        if w < 0:
            raise NegativeExposure(f"{edges_path}: line {lineno}: negative "
                                   f"exposure {w!r}")
        weights[index[src], index[tgt]] += w

    if net_reciprocal:
        weights = net_reciprocal_edges(weights)
    keep = np.arange(n)
    if largest_scc:
        keep = largest_strongly_connected(weights)
        weights = weights[np.ix_(keep, keep)]
    kept_ids = tuple(ids[int(i)] for i in keep)
    assets = weights.sum(axis=1)
    liabilities = weights.sum(axis=0)
    if has_equity:
        equity = np.asarray(equity_raw)[keep]
    else:
        equity = reconstruct_equity(assets, liabilities, rng_seed=equity_seed)
    bank_set = build_bank_set(equity, assets, liabilities)
    alpha = weights / bank_set.total_equity
    return LoadedNetwork(bank_set=bank_set,
                         exposures=ExposureMatrix(alpha, bank_set, copy=False),
                         ids=kept_ids)


def write_nodes_csv(path, bank_set: BankSet, ids=None) -> None:
    path = Path(path)
    if ids is None:
        ids = [str(i) for i in range(bank_set.n_banks)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(NODES_FIELDS)
        for i, node_id in enumerate(ids):
            writer.writerow([
                node_id,
                repr(float(bank_set.equity[i])),
                repr(float(bank_set.interbank_assets[i])),
                repr(float(bank_set.interbank_liabilities[i])),
            ])


def write_edges_csv(path, m: ExposureMatrix, ids=None) -> None:
    """Edge list of the support, in currency units, round-trip safe."""
    path = Path(path)
    bs = m.bank_set
    if ids is None:
        ids = [str(i) for i in range(bs.n_banks)]
    weights = m.alpha * bs.total_equity
    support = m.support()
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EDGES_FIELDS)
        for i, j in zip(*np.nonzero(support)):
            writer.writerow([ids[int(i)], ids[int(j)],
                             repr(float(weights[i, j]))])


def write_network(out_dir, label: str, m: ExposureMatrix,
                  ids=None) -> tuple[Path, Path]:
    """Write companion node and edge files; returns their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    nodes_path = out_dir / f"nodes_{label}.csv"
    edges_path = out_dir / f"edges_{label}.csv"
    write_nodes_csv(nodes_path, m.bank_set, ids)
    write_edges_csv(edges_path, m, ids)
    return nodes_path, edges_path
