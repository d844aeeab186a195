"""Stage 1: hypergraph spectral clustering.

Pair co-occurrence Laplacian, degree trimming, rank-k truncation and the
reference-node ball clustering that produces the initial label estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations
from pathlib import Path

import numpy as np

from . import rng as _rng
from .model import ModelParams, enumerate_assignments
from .sampler import Hypergraph


class SpectralError(RuntimeError):
    """Stage 1 cannot proceed (empty retained set, SVD failure)."""


@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    matrix: np.ndarray  # (n, n) int64, symmetric, zero diagonal
    degrees: np.ndarray  # (n,) int64

    @property
    def n(self) -> int:
        return len(self.degrees)


@dataclass(frozen=True, eq=False)
class TrimmedSpectral:
    gamma_set: np.ndarray  # sorted node ids with degree <= tau
    l_trimmed: np.ndarray
    tau: float
    l_rank_k: np.ndarray | None = None
    singular_values: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.l_trimmed.shape[0]


def build_laplacian(g: Hypergraph) -> LaplacianMatrix:
    """L = H H^T - D: entry (u, v) counts hyperedges containing both u and v."""
    n = g.n
    flat = np.zeros(n * n, dtype=np.int64)
    for a, b in combinations(range(g.d), 2):
        u, v = g.edges[:, a], g.edges[:, b]
        flat += np.bincount(u * n + v, minlength=n * n)
        flat += np.bincount(v * n + u, minlength=n * n)
    return LaplacianMatrix(matrix=flat.reshape(n, n), degrees=g.degrees().astype(np.int64))


def trim(lap: LaplacianMatrix, tau: float) -> TrimmedSpectral:
    """Zero the rows and columns of nodes whose degree exceeds ``tau``."""
    if not tau > 0:
        raise ValueError(f"trim threshold must be positive, got {tau}")
    keep = lap.degrees <= tau
    if not keep.any():
        raise SpectralError(f"no node has degree <= tau={tau:g}; retained set is empty")
    trimmed = lap.matrix * np.outer(keep, keep)
    return TrimmedSpectral(gamma_set=np.flatnonzero(keep), l_trimmed=trimmed, tau=float(tau))


def _truncated_svd(a: np.ndarray, k: int):
    a = np.asarray(a, dtype=float)
    n = min(a.shape)
    if not 1 <= k <= n:
        raise ValueError(f"rank must satisfy 1 <= k <= {n}, got {k}")
    try:
        u, s, vt = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(
            f"SVD did not converge for {a.shape} matrix "
            f"(finite={np.isfinite(a).all()}, frobenius={np.linalg.norm(a):.6g}): {exc}"
        ) from exc
    return (u[:, :k] * s[:k]) @ vt[:k], s


def rank_k_approx(l_trimmed: np.ndarray, k: int) -> np.ndarray:
    """Best rank-k approximation in Frobenius norm, by SVD truncation."""
    return _truncated_svd(l_trimmed, k)[0]


def with_rank_k(spec: TrimmedSpectral, k: int) -> TrimmedSpectral:
    approx, s = _truncated_svd(spec.l_trimmed, k)
    return replace(spec, l_rank_k=approx, singular_values=s)


def expected_laplacian(params: ModelParams, z: np.ndarray, gamma_n: float) -> np.ndarray:
    """E[L] when hyperedges appear with probability Q_T gamma_n / n^(d-1).

    Entry (u, v) sums, over the assignment m of the other d-2 nodes, the number
    of node subsets of [n] minus {u, v} realizing m times the hyperedge rate.
    """
    z = np.asarray(z, dtype=np.int64)
    k, d, n = params.k, params.d, params.n
    sizes = np.bincount(z, minlength=k)
    unit = gamma_n / float(n) ** (d - 1)
    rest = enumerate_assignments(k, d - 2)
    block = np.zeros((k, k))
    for a in range(k):
        for b in range(k):
            avail = sizes.copy()
            avail[a] -= 1
            avail[b] -= 1
            total = 0.0
            for m in rest:
                count = math.prod(math.comb(int(avail[s]), m[s]) if avail[s] >= 0 else 0 for s in range(k))
                T = list(m)
                T[a] += 1
                T[b] += 1
                total += count * params.Q[tuple(T)]
            block[a, b] = total * unit
    out = block[np.ix_(z, z)]
    np.fill_diagonal(out, 0.0)
    return out


def default_tau(params: ModelParams, gamma_n: float, constant: float = 20.0) -> float:
    return constant * params.q_max * gamma_n


def default_radius(n: int, gamma_n: float, multiplier: float = 1.0) -> float:
    return multiplier * gamma_n ** 2 / (n * math.log(gamma_n))


def _sq_dist_to(cols: np.ndarray, center: np.ndarray) -> np.ndarray:
    return ((cols - center[:, None]) ** 2).sum(axis=0)


def spectral_cluster(spec: TrimmedSpectral, k: int, r: float, seed: int) -> np.ndarray:
    """Reference-node ball clustering on the columns of the rank-k matrix.

    Draws ceil(log n) reference nodes from the retained set (with
    replacement), greedily takes the k balls of squared radius ``r`` covering
    the most unassigned nodes, sends leftover retained nodes to the nearest
    chosen center and labels trimmed nodes uniformly at random.
    Ties go to the smallest index.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    if spec.l_rank_k is None:
        raise ValueError("rank-k approximation missing; call with_rank_k first")
    n = spec.n
    gamma = spec.gamma_set
    if len(gamma) == 0:
        raise SpectralError("retained set is empty")
    gen = _rng.generator(seed, _rng.CLUSTER)
    labels = np.zeros(n, dtype=np.int64)
    if k == 1:
        return labels

    X = spec.l_rank_k
    cols = X[:, gamma]
    refs = gen.choice(gamma, size=math.ceil(math.log(n)), replace=True)
    balls = np.array([_sq_dist_to(cols, X[:, v]) <= r for v in refs])

    assigned = np.full(len(gamma), -1, dtype=np.int64)
    centers = []
    for j in range(k):
        fresh = balls & (assigned == -1)
        best = int(np.argmax(fresh.sum(axis=1)))
        centers.append(refs[best])
        assigned[fresh[best]] = j

    left = assigned == -1
    if left.any():
        dists = np.array([_sq_dist_to(cols[:, left], X[:, c]) for c in centers])
        assigned[left] = np.argmin(dists, axis=0)

    trimmed = np.ones(n, dtype=bool)
    trimmed[gamma] = False
    labels[gamma] = assigned
    labels[trimmed] = gen.integers(0, k, size=int(trimmed.sum()))
    return labels


def stage1(g1: Hypergraph, k: int, tau: float, r: float, seed: int):
    """Run the full spectral stage; returns (initial labels, TrimmedSpectral)."""
    spec = with_rank_k(trim(build_laplacian(g1), tau), k)
    return spectral_cluster(spec, k, r, seed), spec


def dump_debug(lap: LaplacianMatrix, spec: TrimmedSpectral, directory) -> None:
    """Write the Laplacian, retained set and singular values as CSV files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.savetxt(directory / "laplacian.csv", lap.matrix, fmt="%d", delimiter=",")
    np.savetxt(directory / "gamma.csv", spec.gamma_set, fmt="%d", delimiter=",")
    if spec.singular_values is not None:
        np.savetxt(directory / "singular_values.csv", spec.singular_values, fmt="%.17g", delimiter=",")
