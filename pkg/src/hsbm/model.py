"""Model parameters, assignment-vector combinatorics, degree profiles and the
GCH-divergence for the d-uniform hypergraph stochastic block model.

Communities are indexed from 0 throughout the package. An assignment vector
is a plain tuple of k nonnegative ints; ``T`` vectors sum to ``d`` and ``m``
vectors sum to ``d - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

Assignment = tuple[int, ...]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ParameterError(ValueError):
    """Raised for invalid model parameters."""


def enumerate_assignments(k: int, order: int) -> list[Assignment]:
    """All length-``k`` nonnegative integer vectors summing to ``order``.

    Ordered lexicographically descending, e.g. ``(2, 0), (1, 1), (0, 2)``.
    """
    if k < 1 or order < 0:
        raise ValueError(f"need k >= 1 and order >= 0, got k={k}, order={order}")
    if k == 1:
        return [(order,)]
    out = []
    for first in range(order, -1, -1):
        for rest in enumerate_assignments(k - 1, order - first):
            out.append((first,) + rest)
    return out


def assignment_of(labels: Sequence[int], k: int) -> Assignment:
    counts = [0] * k
    for lab in labels:
        counts[lab] += 1
    return tuple(counts)


def oplus(m: Assignment, i: int) -> Assignment:
    """Add one node of community ``i`` to the assignment ``m``."""
    if not 0 <= i < len(m):
        raise IndexError(f"community index {i} out of range for k={len(m)}")
    return m[:i] + (m[i] + 1,) + m[i + 1:]


def real_binom(x: float, j: int) -> float:
    """Falling-factorial binomial x(x-1)...(x-j+1)/j! for real ``x``.

    Returns 0 when ``x < j`` (fewer than ``j`` objects to choose from).
    """
    if j < 0:
        return 0.0
    if x < j:
        return 0.0
    out = 1.0
    for r in range(j):
        out *= (x - r) / (r + 1)
    return out


@dataclass(frozen=True)
class ModelParams:
    n: int
    k: int
    d: int
    p: tuple[float, ...]
    Q: Mapping[Assignment, float] = field(hash=False)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be positive, got {self.n}")
        if self.k < 2:
            raise ParameterError(f"k must be at least 2, got {self.k}")
        if self.d < 2:
            raise ParameterError(f"d must be at least 2, got {self.d}")
        p = tuple(float(x) for x in self.p)
        if len(p) != self.k:
            raise ParameterError(f"p has length {len(p)}, expected k={self.k}")
        if any(x <= 0 for x in p):
            raise ParameterError(f"every prior must be positive, got {p}")
        if abs(sum(p) - 1.0) > 1e-12:
            raise ParameterError(f"priors sum to {sum(p)!r}, not 1")
        object.__setattr__(self, "p", p)

        expected = enumerate_assignments(self.k, self.d)
        q = {}
        for T in expected:
            if T not in self.Q:
                raise ParameterError(f"Q is missing assignment {T}")
            val = float(self.Q[T])
            if not val >= 0 or math.isinf(val):
                raise ParameterError(f"Q{T} = {val} is not a finite nonnegative rate")
            q[T] = val
        extra = set(self.Q) - set(q)
        if extra:
            raise ParameterError(f"Q has entries outside the assignment set: {sorted(extra)}")
        object.__setattr__(self, "Q", q)
        if self.edge_prob(self.q_max) > 1.0:
            raise ParameterError(
                f"Q_max * log n / n^(d-1) = {self.edge_prob(self.q_max):.4g} exceeds 1"
            )

    @classmethod
    def symmetric(cls, n, k, d, q_in, q_out, p=None):
        """Equal priors; rate ``q_in`` when all d nodes share a community, else ``q_out``."""
        p = tuple([1.0 / k] * k) if p is None else tuple(p)
        Q = {T: (q_in if max(T) == d else q_out) for T in enumerate_assignments(k, d)}
        return cls(n=n, k=k, d=d, p=p, Q=Q)

    @classmethod
    def sbm(cls, n, matrix, p):
        """Graph SBM (d = 2) from a symmetric k x k rate matrix."""
        matrix = np.asarray(matrix, dtype=float)
        k = matrix.shape[0]
        if matrix.shape != (k, k) or not np.allclose(matrix, matrix.T):
            raise ParameterError("SBM rate matrix must be square and symmetric")
        Q = {}
        for T in enumerate_assignments(k, 2):
            idx = [s for s in range(k) for _ in range(T[s])]
            Q[T] = float(matrix[idx[0], idx[1]])
        return cls(n=n, k=k, d=2, p=tuple(p), Q=Q)

    @classmethod
    def from_function(cls, n, k, d, p, rate: Callable[[Assignment], float]):
        return cls(n=n, k=k, d=d, p=tuple(p), Q={T: rate(T) for T in enumerate_assignments(k, d)})

    def scaled(self, s: float) -> "ModelParams":
        """Same model with every rate multiplied by ``s``."""
        if not s > 0:
            raise ParameterError(f"scale factor must be positive, got {s}")
        return ModelParams(self.n, self.k, self.d, self.p, {T: s * q for T, q in self.Q.items()})

    @property
    def q_max(self) -> float:
        return max(self.Q.values())

    @property
    def q_min(self) -> float:
        return min(self.Q.values())

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    def edge_prob(self, rate: float) -> float:
        """Hyperedge probability rate * log n / n^(d-1)."""
        return rate * self.log_n / float(self.n) ** (self.d - 1)

    @cached_property
    def T_set(self) -> list[Assignment]:
        return enumerate_assignments(self.k, self.d)

    @cached_property
    def M_set(self) -> list[Assignment]:
        return enumerate_assignments(self.k, self.d - 1)


def normalized_weight(m: Assignment, params: ModelParams) -> float:
    """R'_m = prod_s C(n p_s, m_s) / n^(d-1)."""
    n = params.n
    out = 1.0
    for s, ms in enumerate(m):
        # divide per factor to stay in range for very large n
        out *= real_binom(n * params.p[s], ms) / float(n) ** ms
    return out


@dataclass(frozen=True)
class DegreeProfile:
    community: int
    values: dict[Assignment, float]
    weights: dict[Assignment, float]

    def as_array(self, M_set: Sequence[Assignment]) -> np.ndarray:
        return np.array([self.values[m] for m in M_set])


def degree_profile(i: int, params: ModelParams) -> DegreeProfile:
    """Normalized expected incident-hyperedge counts mu_{m+i} = R'_m Q_{m+i}."""
    if not 0 <= i < params.k:
        raise IndexError(f"community index {i} out of range for k={params.k}")
    weights = {m: normalized_weight(m, params) for m in params.M_set}
    values = {m: weights[m] * params.Q[oplus(m, i)] for m in params.M_set}
    return DegreeProfile(community=i, values=values, weights=weights)


def second_order_profile(i: int, params: ModelParams) -> np.ndarray:
    prof = degree_profile(i, params)
    out = np.zeros(params.k)
    for m, mu in prof.values.items():
        for s, ms in enumerate(m):
            if ms >= 1:
                out[s] += ms * mu
    return out


def in_xi(params: ModelParams, tol: float = 1e-9) -> tuple[bool, tuple[int, int] | None]:
    """Whether two communities share a second-order degree profile.

    Returns ``(True, (i, j))`` for the lexicographically first such pair, or
    ``(False, None)``. Entries are compared at relative tolerance ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    profiles = [second_order_profile(i, params) for i in range(params.k)]
    for i, j in combinations(range(params.k), 2):
        a, b = profiles[i], profiles[j]
        scale = np.maximum(np.abs(a), np.abs(b))
        if np.all(np.abs(a - b) <= tol * scale):
            return True, (i, j)
    return False, None


@dataclass(frozen=True)
class GchResult:
    value: float
    t_star: float
    pair: tuple[int, int]


def gch_objective(t, mu_i: np.ndarray, mu_j: np.ndarray):
    """f(t) = sum_m t mu_i + (1-t) mu_j - mu_i^t mu_j^(1-t).

    numpy's power gives 0**t = 0 for t > 0 and 0**0 = 1, which is the limit
    convention used for zero rates.
    """
    t = np.asarray(t, dtype=float)
    tt = t[..., None]
    terms = tt * mu_i + (1.0 - tt) * mu_j - np.power(mu_i, tt) * np.power(mu_j, 1.0 - tt)
    return terms.sum(axis=-1)


def _golden_max(f, lo, hi, tol=1e-12, max_iter=200):
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _maximize(mu_i: np.ndarray, mu_j: np.ndarray) -> tuple[float, float]:
    def f(t):
        return float(gch_objective(t, mu_i, mu_j))

    candidates = [(0.0, f(0.0)), (1.0, f(1.0))]
    if np.all(mu_i > 0) and np.all(mu_j > 0):
        # strictly concave unless the profiles coincide: the maximizer is the
        # root of the derivative, which locates t far better than the value does
        log_ratio = np.log(mu_i) - np.log(mu_j)
        drift = float(np.sum(mu_i - mu_j))

        def slope(t):
            return drift - float(np.sum(mu_i ** t * mu_j ** (1 - t) * log_ratio))

        if slope(0.0) > 0 > slope(1.0):
            t = brentq(slope, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            candidates.append((t, f(t)))
    else:
        # zero rates make f jump at the endpoints; scan, then refine locally
        step = 1e-4
        grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
        vals = gch_objective(grid, mu_i, mu_j)
        best = int(np.argmax(vals))
        lo = grid[max(best - 1, 0)]
        hi = grid[min(best + 1, len(grid) - 1)]
        candidates.append((float(grid[best]), float(vals[best])))
        lo_open = lo if lo > 0 else np.nextafter(0.0, 1.0)
        hi_open = hi if hi < 1 else np.nextafter(1.0, 0.0)
        candidates.append(_golden_max(f, lo_open, hi_open))
    t_star, value = max(candidates, key=lambda c: c[1])
    return float(t_star), float(value)


def gch_divergence(i: int, j: int, params: ModelParams) -> GchResult:
    if i == j:
        raise ValueError("GCH-divergence is defined only for distinct communities")
    mu_i = degree_profile(i, params).as_array(params.M_set)
    mu_j = degree_profile(j, params).as_array(params.M_set)
    t_star, value = _maximize(mu_i, mu_j)
    return GchResult(value=value, t_star=t_star, pair=(i, j))


def gch_threshold(params: ModelParams) -> tuple[float, tuple[int, int]]:
    """Minimum pairwise GCH-divergence and the pair attaining it."""
    best = None
    for i, j in combinations(range(params.k), 2):
        res = gch_divergence(i, j, params)
        if best is None or res.value < best.value:
            best = res
    return best.value, best.pair
