"""Ground-truth labels, random d-uniform hypergraphs and graph splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice, product

import numpy as np

from . import rng as _rng
from .model import ModelParams, ParameterError

# candidate count up to which sample_hsbm enumerates every d-subset by default
EXACT_LIMIT = 50_000_000
_CHUNK = 1 << 20


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """d-uniform hypergraph on nodes 0..n-1.

    ``edges`` is an (m, d) int64 array; each row is strictly increasing and
    rows are unique and sorted lexicographically.
    """

    n: int
    d: int
    edges: np.ndarray

    @classmethod
    def from_edges(cls, n, d, edges):
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, d)
        arr = np.sort(arr, axis=1)
        if len(arr):
            if arr.min() < 0 or arr.max() >= n:
                raise ValueError(f"node ids must lie in [0, {n})")
            if d > 1 and np.any(np.diff(arr, axis=1) == 0):
                raise ValueError("hyperedges must contain d distinct nodes")
            arr = np.unique(arr, axis=0)
        arr.setflags(write=False)
        return cls(n=n, d=d, edges=arr)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def edge_set(self) -> set[tuple[int, ...]]:
        return set(map(tuple, self.edges.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.n, self.d) == (other.n, other.d) and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n, self.d, self.edges.tobytes()))


@dataclass(frozen=True)
class SplitPair:
    g1: Hypergraph
    g2: Hypergraph
    gamma_n: float


def default_gamma(n: int) -> float:
    return math.sqrt(math.log(n))


def sample_labels(params: ModelParams, seed: int) -> np.ndarray:
    """i.i.d. community labels drawn from the prior ``params.p``."""
    gen = _rng.generator(seed, _rng.LABELS)
    p = np.asarray(params.p, dtype=float)
    return gen.choice(len(p), size=params.n, p=p).astype(np.int64)


def community_sizes(z: np.ndarray, k: int) -> np.ndarray:
    return np.bincount(np.asarray(z), minlength=k)


def is_typical(z: np.ndarray, params: ModelParams, delta: float) -> bool:
    """Whether every community size lies in the concentration band around n p_j."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    n = params.n
    slack = n ** (-0.5 + delta / 2)
    sizes = community_sizes(z, params.k)
    for j, pj in enumerate(params.p):
        if not (1 - slack) * pj * n <= sizes[j] <= (1 + slack) * pj * n:
            return False
    return True


def edge_classes(edges: np.ndarray, z: np.ndarray, params: ModelParams) -> np.ndarray:
    """Index into ``params.T_set`` of each hyperedge's community assignment."""
    code = _class_codes(params)
    if len(edges) == 0:
        return np.zeros(0, dtype=np.int64)
    labs = np.asarray(z)[edges]
    weights = (params.d + 1) ** np.arange(params.k)
    keys = (weights[labs]).sum(axis=1)
    return code[keys]


def _class_codes(params: ModelParams) -> np.ndarray:
    weights = (params.d + 1) ** np.arange(params.k)
    code = np.full(int((params.d + 1) ** params.k), -1, dtype=np.int64)
    for idx, T in enumerate(params.T_set):
        code[int(np.dot(T, weights))] = idx
    return code


def _class_probs(params: ModelParams) -> np.ndarray:
    return np.array([params.edge_prob(params.Q[T]) for T in params.T_set])


def sample_hsbm(params: ModelParams, z: np.ndarray, seed: int, strategy: str | None = None) -> Hypergraph:
    """Draw the random hypergraph: each d-subset e is present independently
    with probability Q_{T(e)} log n / n^(d-1).

    ``strategy="exact"`` flips a coin for every candidate; ``"stratified"``
    draws a binomial count per assignment class and then a uniform subset of
    that class. Both give the same distribution. The default is ``exact``
    when there are at most ``EXACT_LIMIT`` candidates.
    """
    probs = _class_probs(params)
    if np.any(probs > 1.0):
        raise ParameterError("hyperedge probability exceeds 1")
    z = np.asarray(z, dtype=np.int64)
    if len(z) != params.n:
        raise ValueError(f"label vector has length {len(z)}, expected n={params.n}")
    if strategy is None:
        strategy = "exact" if math.comb(params.n, params.d) <= EXACT_LIMIT else "stratified"
    gen = _rng.generator(seed, _rng.EDGES)
    if strategy == "exact":
        edges = _sample_exact(params, z, probs, gen)
    elif strategy == "stratified":
        edges = _sample_stratified(params, z, probs, gen)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return Hypergraph.from_edges(params.n, params.d, edges)


def _sample_exact(params, z, probs, gen):
    n, d = params.n, params.d
    code = _class_codes(params)
    weights = (d + 1) ** np.arange(params.k)
    lab_w = weights[z]
    combos = combinations(range(n), d)
    found = []
    dtype = np.dtype((np.int64, d))
    while True:
        chunk = np.fromiter(islice(combos, _CHUNK), dtype=dtype)
        if len(chunk) == 0:
            break
        p = probs[code[lab_w[chunk].sum(axis=1)]]
        keep = gen.random(len(chunk)) < p
        found.append(chunk[keep])
    return np.concatenate(found) if found else np.zeros((0, d), dtype=np.int64)


def _sample_stratified(params, z, probs, gen):
    members = [np.flatnonzero(z == s) for s in range(params.k)]
    sizes = [len(m) for m in members]
    found = []
    for T, q in zip(params.T_set, probs):
        total = math.prod(math.comb(sizes[s], T[s]) for s in range(params.k))
        if total == 0 or q == 0:
            continue
        count = int(gen.binomial(total, q))
        if count:
            found.append(_sample_class(gen, members, T, count, total))
    if not found:
        return np.zeros((0, params.d), dtype=np.int64)
    return np.concatenate(found)


def _sample_class(gen, members, T, count, total):
    """``count`` distinct hyperedges drawn uniformly from one assignment class."""
    parts = [(members[s], ts) for s, ts in enumerate(T) if ts > 0]
    if 2 * count > total:
        pools = [list(combinations(mem.tolist(), ts)) for mem, ts in parts]
        chosen = gen.choice(total, size=count, replace=False)
        rows = []
        for idx in np.sort(chosen):
            row = []
            for pool in reversed(pools):
                idx, r = divmod(int(idx), len(pool))
                row.extend(pool[r])
            rows.append(sorted(row))
        return np.array(rows, dtype=np.int64)

    collected = np.zeros((0, sum(T)), dtype=np.int64)
    while len(collected) < count:
        batch = int(1.2 * (count - len(collected))) + 8
        cols = []
        ok = np.ones(batch, dtype=bool)
        for mem, ts in parts:
            idx = np.sort(gen.integers(0, len(mem), size=(batch, ts)), axis=1)
            if ts > 1:
                ok &= np.all(np.diff(idx, axis=1) > 0, axis=1)
            cols.append(mem[idx])
        rows = np.sort(np.concatenate(cols, axis=1)[ok], axis=1)
        collected = np.unique(np.concatenate([collected, rows]), axis=0)
    # the collected set is exchangeable over the class, so a uniform
    # sub-selection of it is a uniform count-subset of the class
    if len(collected) > count:
        collected = collected[np.sort(gen.choice(len(collected), size=count, replace=False))]
    return collected


def split_hypergraph(g: Hypergraph, gamma_n: float, seed: int) -> SplitPair:
    """Route each edge to ``g1`` with probability gamma_n / log n, else ``g2``."""
    rate = gamma_n / math.log(g.n)
    if not 0 < rate < 1:
        raise ValueError(f"split rate gamma_n/log n = {rate} must lie in (0, 1)")
    gen = _rng.generator(seed, _rng.SPLIT)
    to_first = gen.random(g.num_edges) < rate
    g1 = Hypergraph.from_edges(g.n, g.d, g.edges[to_first])
    g2 = Hypergraph.from_edges(g.n, g.d, g.edges[~to_first])
    return SplitPair(g1=g1, g2=g2, gamma_n=gamma_n)
