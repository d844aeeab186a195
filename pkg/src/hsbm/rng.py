"""Seeded random streams.

All randomness comes from numpy's Philox4x64 generator, a counter-based
bit generator whose output is fully specified by its key, so results are
bit-reproducible across platforms. Each master seed is expanded with
``numpy.random.SeedSequence`` (hash-based entropy mixing); independent
streams for labels, hyperedges, splitting and clustering are selected via
the sequence's ``spawn_key``.
"""

from __future__ import annotations

import numpy as np

LABELS = 0
EDGES = 1
SPLIT = 2
CLUSTER = 3


def generator(seed: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(master: int, *path: int) -> int:
    """64-bit seed derived from ``master`` and an index path.

    Used for per-trial seeds: ``derive_seed(master, scale_index, trial_index)``.
    The mixing function is SeedSequence's entropy hash over the words
    ``[master, *path]``.
    """
    ss = np.random.SeedSequence([int(master), *map(int, path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
