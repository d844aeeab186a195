"""Stage 2: one pass of per-node MAP relabeling on the second sub-hypergraph.

Each node is relabeled from its incident hyperedge counts in G2, grouped by
the (estimated) community assignment of the other d-1 nodes, against the
fixed Stage-1 labels of everyone else.

The number of candidate hyperedges of each shape in the second split,
D_{v,m}, is not materialized. It is replaced by its mean
(1 - gamma_n / log n) * N_{v,m}, where N_{v,m} counts the (d-1)-subsets of
the other nodes whose labels realize m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Assignment, ModelParams, enumerate_assignments, oplus
from .sampler import Hypergraph


class RefinementError(RuntimeError):
    pass


@dataclass(frozen=True)
class IncidentCounts:
    node: int
    present: dict[Assignment, int]
    totals: dict[Assignment, float]


def _m_codes(k: int, d: int):
    M_set = enumerate_assignments(k, d - 1)
    weights = (d + 1) ** np.arange(k)
    lookup = np.full(int((d + 1) ** k), -1, dtype=np.int64)
    for idx, m in enumerate(M_set):
        lookup[int(np.dot(m, weights))] = idx
    return M_set, weights, lookup


def incident_count_matrix(g2: Hypergraph, labels: np.ndarray, k: int) -> np.ndarray:
    """(n, |M|) array: for each node, incident G2 edges by assignment of the other nodes.

    Columns follow ``enumerate_assignments(k, d - 1)``.
    """
    labels = np.asarray(labels, dtype=np.int64)
    M_set, weights, lookup = _m_codes(k, g2.d)
    out = np.zeros((g2.n, len(M_set)), dtype=np.int64)
    if g2.num_edges == 0:
        return out
    lab_w = weights[labels[g2.edges]]
    edge_key = lab_w.sum(axis=1)
    for pos in range(g2.d):
        midx = lookup[edge_key - lab_w[:, pos]]
        np.add.at(out, (g2.edges[:, pos], midx), 1)
    return out


def count_incident(g2: Hypergraph, labels: np.ndarray, v: int, k: int) -> dict[Assignment, int]:
    """Per-shape counts of the G2 edges containing ``v``."""
    labels = np.asarray(labels)
    counts = {m: 0 for m in enumerate_assignments(k, g2.d - 1)}
    hits = g2.edges[(g2.edges == v).any(axis=1)]
    for row in hits.tolist():
        m = [0] * k
        for u in row:
            if u != v:
                m[labels[u]] += 1
        counts[tuple(m)] += 1
    return counts


def _subset_counts(sizes, M_set) -> np.ndarray:
    return np.array([math.prod(math.comb(int(sizes[s]), m[s]) for s in range(len(sizes))) for m in M_set], dtype=float)


def effective_totals(labels: np.ndarray, v: int, gamma_n: float, k: int, d: int) -> dict[Assignment, float]:
    """Mean number of G2 candidate hyperedges through ``v`` per shape m."""
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    sizes = np.bincount(labels, minlength=k)
    sizes[labels[v]] -= 1
    M_set = enumerate_assignments(k, d - 1)
    keep = 1.0 - gamma_n / math.log(n)
    return dict(zip(M_set, keep * _subset_counts(sizes, M_set)))


def _totals_by_label(labels, gamma_n, k, d, M_set) -> np.ndarray:
    """(k, |M|) totals for a node currently labeled c, for every c."""
    n = len(labels)
    sizes = np.bincount(labels, minlength=k)
    keep = 1.0 - gamma_n / math.log(n)
    rows = []
    for c in range(k):
        avail = sizes.copy()
        avail[c] -= 1
        rows.append(keep * _subset_counts(np.maximum(avail, 0), M_set))
    return np.array(rows)


def _log_rates(params: ModelParams):
    """(|M|, k) arrays of log q_{m+i} and log(1 - q_{m+i})."""
    q = np.array([[params.edge_prob(params.Q[oplus(m, i)]) for i in range(params.k)] for m in params.M_set])
    if np.any(q >= 1.0):
        raise RefinementError("per-edge probabilities must be below 1 for MAP refinement")
    with np.errstate(divide="ignore"):
        return np.log(q), np.log1p(-q)


def log_posteriors(x: np.ndarray, D: np.ndarray, params: ModelParams) -> np.ndarray:
    """Unnormalized log posterior of each community for rows of counts.

    ``x`` and ``D`` are (nodes, |M|); returns (nodes, k). A community gets
    -inf when it assigns rate 0 to a shape that was observed.
    """
    log_q, log_not_q = _log_rates(params)
    x = np.asarray(x, dtype=float)[:, :, None]
    absent = np.asarray(D, dtype=float)[:, :, None] - x
    with np.errstate(invalid="ignore"):
        hit = np.where(x > 0, x * log_q[None], 0.0)
        miss = np.where(absent != 0, absent * log_not_q[None], 0.0)
    return np.log(params.p)[None, :] + hit.sum(axis=1) + miss.sum(axis=1)


def _argmax_rows(scores: np.ndarray, nodes) -> np.ndarray:
    dead = np.all(np.isneginf(scores), axis=1)
    if dead.any():
        bad = np.asarray(nodes)[dead][:5].tolist()
        raise RefinementError(f"every community has zero likelihood for node(s) {bad}")
    return np.argmax(scores, axis=1)


def map_refine(v: int, counts: IncidentCounts, params: ModelParams) -> int:
    """MAP community of node ``v`` given its grouped incident counts."""
    x = np.array([[counts.present.get(m, 0) for m in params.M_set]])
    D = np.array([[counts.totals[m] for m in params.M_set]])
    return int(_argmax_rows(log_posteriors(x, D, params), [v])[0])


def refine_all(g2: Hypergraph, initial: np.ndarray, params: ModelParams, gamma_n: float) -> np.ndarray:
    """Relabel every node against the fixed initial labels (no in-place updates)."""
    initial = np.asarray(initial, dtype=np.int64)
    x = incident_count_matrix(g2, initial, params.k)
    D = _totals_by_label(initial, gamma_n, params.k, params.d, params.M_set)[initial]
    scores = log_posteriors(x, D, params)
    return _argmax_rows(scores, np.arange(len(initial))).astype(np.int64)
