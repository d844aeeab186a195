"""Plain-text hypergraph and label files.

Hypergraph file: a header line ``n d m`` followed by ``m`` lines of ``d``
space-separated, sorted, 1-based node ids. Label file: ``n`` lines holding
one 1-based community index each.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .sampler import Hypergraph


def write_hypergraph(path, g: Hypergraph) -> None:
    path = Path(path)
    lines = [f"{g.n} {g.d} {g.num_edges}"]
    lines.extend(" ".join(str(v + 1) for v in row) for row in g.edges.tolist())
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write hypergraph to {path}: {exc}") from exc


def read_hypergraph(path) -> Hypergraph:
    path = Path(path)
    tokens = path.read_text().split("\n")
    header = tokens[0].split()
    if len(header) != 3:
        raise ValueError(f"{path}: header must be 'n d m'")
    n, d, m = map(int, header)
    rows = [line.split() for line in tokens[1:] if line.strip()]
    if len(rows) != m:
        raise ValueError(f"{path}: header declares {m} edges, found {len(rows)}")
    if any(len(r) != d for r in rows):
        raise ValueError(f"{path}: every edge line must hold {d} node ids")
    edges = np.array(rows, dtype=np.int64).reshape(-1, d) - 1
    return Hypergraph.from_edges(n, d, edges)


def write_labels(path, z) -> None:
    path = Path(path)
    try:
        path.write_text("".join(f"{int(v) + 1}\n" for v in z))
    except OSError as exc:
        raise OSError(f"cannot write labels to {path}: {exc}") from exc


def read_labels(path) -> np.ndarray:
    vals = [int(line) for line in Path(path).read_text().split()]
    return np.array(vals, dtype=np.int64) - 1
