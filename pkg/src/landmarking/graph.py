"""Symmetrized K-nearest-neighbor graphs and shortest-path distances."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.spatial.distance import cdist

from .data import Dataset, FLOAT_FORMAT
from .exceptions import InvalidArgumentError, ParseError


@dataclass(frozen=True, eq=False)
class NeighborGraph:
    """Undirected weighted graph in CSR layout.

    ``indptr``/``indices``/``weights`` hold both orientations of every edge,
    neighbor lists sorted by index.  Weights are Euclidean distances and may
    be zero for duplicate points, so the structure (not the weight) defines an
    edge.
    """

    n: int
    k: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_edges(cls, n: int, k: int, i, j, w) -> "NeighborGraph":
        """Build from undirected edge triplets; each pair may appear in either orientation."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        w = np.asarray(w, dtype=float)
        if i.size and (i.min() < 0 or j.min() < 0 or max(i.max(), j.max()) >= n):
            raise InvalidArgumentError("edge endpoint out of range")
        if np.any(i == j):
            raise InvalidArgumentError("self-loops are not allowed")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidArgumentError("edge weights must be finite and nonnegative")
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        vals = np.concatenate([w, w])
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        keep = np.ones(rows.size, dtype=bool)
        keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        return cls(n, k, indptr, cols, vals)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def neighbor_weights(self, i: int) -> np.ndarray:
        return self.weights[self.indptr[i]:self.indptr[i + 1]]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def n_edges(self) -> int:
        return self.indices.size // 2

    def edges(self):
        """Undirected edges as ``(i, j, w)`` arrays with ``i < j``, sorted by ``(i, j)``."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        upper = rows < self.indices
        return rows[upper], self.indices[upper], self.weights[upper]

    def to_sparse(self) -> sp.csr_matrix:
        """Weighted adjacency; explicit zeros are kept for zero-length edges."""
        return sp.csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n, self.n))

    def has_edge(self, i: int, j: int) -> bool:
        nb = self.neighbors(i)
        pos = np.searchsorted(nb, j)
        return pos < nb.size and nb[pos] == j


def knn_graph(ds: Dataset, k: int) -> NeighborGraph:
    """Exact K-NN graph, symmetrized by union.

    Distance ties are resolved in favor of the lower node index.
    """
    x = ds.samples.T
    n = x.shape[0]
    if not 1 <= k <= n - 1:
        raise InvalidArgumentError(f"k must lie in [1, {n - 1}], got {k}")
    dist = cdist(x, x)
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps index order among equal distances
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
    rows = np.repeat(np.arange(n), k)
    cols = nearest.ravel()
    return NeighborGraph.from_edges(n, k, rows, cols, dist[rows, cols])


def geodesic_distances(g: NeighborGraph, sources) -> np.ndarray:
    """Shortest weighted path lengths, shape ``(len(sources), n)``; ``inf`` if unreachable."""
    src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    if src.size and (src.min() < 0 or src.max() >= g.n):
        raise InvalidArgumentError(f"source index out of range [0, {g.n})")
    if src.size == 0:
        return np.zeros((0, g.n))
    return csgraph.dijkstra(g.to_sparse(), directed=False, indices=src)


def connected_components(g: NeighborGraph):
    """Return ``(n_components, labels)``."""
    count, labels = csgraph.connected_components(g.to_sparse(), directed=False)
    return int(count), labels


def save_graph(g: NeighborGraph, path: str | os.PathLike) -> None:
    i, j, w = g.edges()
    with open(path, "w") as fh:
        fh.write(f"# n={g.n} k={g.k}\n")
        for a, b, c in zip(i, j, w):
            fh.write(f"{a},{b},{FLOAT_FORMAT % c}\n")


def load_graph(path: str | os.PathLike) -> NeighborGraph:
    if not os.path.exists(path):
        raise ParseError(f"{path}: no such file")
    n = k = None
    i, j, w = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "n":
                        n = int(val)
                    elif key == "k":
                        k = int(val)
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 'i,j,weight'")
            try:
                i.append(int(parts[0]))
                j.append(int(parts[1]))
                w.append(float(parts[2]))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: malformed edge {line!r}") from None
    if n is None:
        raise ParseError(f"{path}: missing '# n=<nodes>' header")
    return NeighborGraph.from_edges(n, k or 0, i, j, w)
