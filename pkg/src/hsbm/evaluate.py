"""Misclassification proportion under the best community relabeling."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

BRUTE_FORCE_MAX_K = 8


@dataclass(frozen=True, eq=False)
class RecoveryReport:
    misclassification: float
    best_permutation: tuple[int, ...]  # true community a is matched to estimate best_permutation[a]
    exact: bool
    confusion: np.ndarray  # confusion[a, b] = #{v : z_v = a, z_hat_v = b}


def confusion_matrix(z_hat, z, k: int) -> np.ndarray:
    z_hat, z = np.asarray(z_hat), np.asarray(z)
    return np.bincount(z * k + z_hat, minlength=k * k).reshape(k, k)


@lru_cache(maxsize=None)
def _all_permutations(k: int) -> np.ndarray:
    return np.array(list(permutations(range(k))), dtype=np.int64).reshape(-1, k)


def best_agreement_brute(conf: np.ndarray) -> tuple[int, tuple[int, ...]]:
    k = conf.shape[0]
    perms = _all_permutations(k)
    agree = conf[np.arange(k), perms].sum(axis=1)
    best = int(np.argmax(agree))  # first maximizer in lexicographic order
    return int(agree[best]), tuple(perms[best].tolist())


def best_agreement_assignment(conf: np.ndarray) -> tuple[int, tuple[int, ...]]:
    rows, cols = linear_sum_assignment(conf, maximize=True)
    perm = tuple(int(c) for c in cols[np.argsort(rows)])
    return int(conf[rows, cols].sum()), perm


def misclassification(z_hat, z, k: int | None = None) -> RecoveryReport:
    """min over relabelings pi of (1/n) #{v : z_hat_v != pi(z_v)}."""
    z_hat = np.asarray(z_hat, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    if z_hat.shape != z.shape:
        raise ValueError(f"label vectors differ in length: {len(z_hat)} vs {len(z)}")
    if k is None:
        k = int(max(z_hat.max(initial=0), z.max(initial=0))) + 1
    conf = confusion_matrix(z_hat, z, k)
    if k <= BRUTE_FORCE_MAX_K:
        agree, perm = best_agreement_brute(conf)
    else:
        agree, perm = best_agreement_assignment(conf)
    n = len(z)
    err = (n - agree) / n if n else 0.0
    return RecoveryReport(misclassification=err, best_permutation=perm, exact=agree == n, confusion=conf)
