"""Alignment matrices of LE, LLE, LTSA and ISOMAP, and their Gershgorin regularization."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .data import Dataset, FLOAT_FORMAT, fix_signs
from .exceptions import DisconnectedGraphError, InvalidArgumentError, ParseError
from .graph import NeighborGraph, connected_components, geodesic_distances
from .spectral import gershgorin_circles

METHODS = ("LE", "LLE", "LTSA", "ISOMAP")


@dataclass(frozen=True, eq=False)
class AlignmentMatrix:
    matrix: sp.csr_matrix
    method: str
    graph_k: int = 0
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class RegularizedAlignment:
    """``matrix = origin.matrix + alpha * I``."""

    matrix: sp.csr_matrix
    alpha: float
    tau: float
    origin: Optional[AlignmentMatrix] = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _symmetrize(m: sp.spmatrix) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    out = sp.csr_matrix((m + m.T) * 0.5)
    out.sort_indices()
    return out


def _le(g: NeighborGraph, weight: str) -> sp.csr_matrix:
    w = g.weights
    if weight == "heat":
        sigma = np.median(w) if w.size else 1.0
        w = np.exp(-(w / (sigma if sigma > 0 else 1.0)) ** 2)
    elif weight != "distance":
        raise InvalidArgumentError(f"unknown LE weighting {weight!r}")
    adj = sp.csr_matrix((w, g.indices, g.indptr), shape=(g.n, g.n))
    deg = np.asarray(adj.sum(axis=1)).ravel()
    phi = sp.diags(deg) - adj
    return sp.csr_matrix(phi)


def lle_weights(ds: Dataset, g: NeighborGraph, lle_reg: float = 1e-3) -> sp.csr_matrix:
    """Sum-to-one reconstruction weights; row ``i`` reconstructs sample ``i`` from its neighbors."""
    x = ds.samples
    rows, cols, vals = [], [], []
    for i in range(g.n):
        nb = g.neighbors(i)
        if nb.size == 0:
            continue
        z = x[:, nb] - x[:, [i]]
        gram = z.T @ z
        if lle_reg > 0:
            tr = np.trace(gram)
            gram = gram + lle_reg * (tr if tr > 0 else 1.0) * np.eye(nb.size)
        elif np.linalg.matrix_rank(gram) < nb.size:
            raise InvalidArgumentError(
                f"local Gram matrix of node {i} is singular ({nb.size} neighbors in "
                f"{x.shape[0]} dimensions); use a positive lle_reg")
        w = np.linalg.solve(gram, np.ones(nb.size))
        w /= w.sum()
        rows.append(np.full(nb.size, i))
        cols.append(nb)
        vals.append(w)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(g.n, g.n))


def _lle(ds, g, lle_reg):
    w = lle_weights(ds, g, lle_reg)
    m = sp.identity(g.n, format="csr") - w
    return m.T @ m


def _ltsa(ds, g, d):
    x = ds.samples
    rows, cols, vals = [], [], []
    for i in range(g.n):
        patch = np.concatenate([[i], g.neighbors(i)])
        m = patch.size
        if m <= d:
            raise InvalidArgumentError(f"node {i} has {m - 1} neighbors; LTSA needs more than d={d}")
        xc = x[:, patch] - x[:, patch].mean(axis=1, keepdims=True)
        _, sv, vt = np.linalg.svd(xc, full_matrices=False)
        if sv.size < d or sv[d - 1] <= 1e-12 * max(sv[0], np.finfo(float).tiny):
            raise InvalidArgumentError(
                f"local patch of node {i} has rank < d={d} (singular values {sv[:d + 1]}); "
                "increase k or lower d")
        basis = np.hstack([np.full((m, 1), 1.0 / np.sqrt(m)), vt[:d].T])
        b = np.eye(m) - basis @ basis.T
        rows.append(np.repeat(patch, m))
        cols.append(np.tile(patch, m))
        vals.append(b.ravel())
    coo = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(g.n, g.n))
    return coo.tocsr()


def _isomap(g, d):
    count, _ = connected_components(g)
    if count != 1:
        raise DisconnectedGraphError(
            f"ISOMAP needs a connected neighbor graph; found {count} components (increase k)")
    n = g.n
    geo = geodesic_distances(g, np.arange(n))
    dsq = geo ** 2
    p = np.eye(n) - np.full((n, n), 1.0 / n)
    a = -0.5 * p.T @ dsq @ p
    a = (a + a.T) / 2
    lam, q = np.linalg.eigh(a)
    lam, q = lam[::-1], fix_signs(q[:, ::-1])
    phi = lam[0] * np.eye(n) - a
    for i in range(1, d):
        phi -= (lam[0] - lam[i]) * np.outer(q[:, i], q[:, i])
    phi -= lam[0] / n * np.ones((n, n))
    return sp.csr_matrix(phi)


def build_alignment(ds: Dataset, g: NeighborGraph, method: str = "LE", d: Optional[int] = None,
                    lle_reg: float = 1e-3, le_weight: str = "distance") -> AlignmentMatrix:
    """Alignment matrix of one of the four supported manifold learners.

    Parameters
    ----------
    method : {'LE', 'LLE', 'LTSA', 'ISOMAP'}
    d : int
        Latent dimension, required by LTSA and ISOMAP.
    lle_reg : float
        Local Gram regularization for LLE, relative to the Gram trace.
    le_weight : {'distance', 'heat'}
        LE edge weighting; ``'distance'`` uses ``phi_ij = -d_ij``.
    """
    method = method.upper()
    if method not in METHODS:
        raise InvalidArgumentError(f"unknown alignment method {method!r}; choose from {METHODS}")
    if ds.n_samples != g.n:
        raise InvalidArgumentError(f"dataset has {ds.n_samples} samples but graph has {g.n} nodes")
    if method in ("LTSA", "ISOMAP"):
        if d is None or not 1 <= d < min(max(g.k, 1), g.n):
            raise InvalidArgumentError(f"{method} needs 1 <= d < min(k, N) = {min(g.k, g.n)}, got {d}")
    if lle_reg < 0:
        raise InvalidArgumentError("lle_reg must be >= 0")

    if method == "LE":
        phi = _le(g, le_weight)
        params = {"le_weight": le_weight}
    elif method == "LLE":
        phi = _symmetrize(_lle(ds, g, lle_reg))
        params = {"lle_reg": lle_reg}
    elif method == "LTSA":
        phi = _symmetrize(_ltsa(ds, g, d))
        params = {"d": d}
    else:
        phi = _symmetrize(_isomap(g, d))
        params = {"d": d}
    phi.sort_indices()
    return AlignmentMatrix(phi, method, g.k, params)


def default_tau(a) -> float:
    m = a.matrix if hasattr(a, "matrix") else a
    diag = np.abs(sp.csr_matrix(m).diagonal())
    return 1e-8 * float(diag.max()) if diag.size else 0.0


def regularize_alignment(a: AlignmentMatrix, tau: Optional[float] = None) -> RegularizedAlignment:
    """Shift ``a`` by ``alpha = max(0, -b_min) + tau`` so every Gershgorin lower bound is >= tau.

    ``tau`` defaults to ``1e-8 * max |phi_ii|``.
    """
    if tau is None:
        tau = default_tau(a)
    if tau < 0:
        raise InvalidArgumentError("tau must be >= 0")
    _, _, b_min, _ = gershgorin_circles(a.matrix)
    alpha = max(0.0, -b_min) + tau
    psi = sp.csr_matrix(a.matrix + alpha * sp.identity(a.n)) if alpha else a.matrix.copy()
    psi.sort_indices()
    return RegularizedAlignment(psi, float(alpha), float(tau), a)


def save_alignment(a, path: str | os.PathLike) -> None:
    """Write the upper triangle plus diagonal as ``i,j,value`` triplets sorted by ``(i, j)``."""
    m = sp.triu(sp.csr_matrix(a.matrix if hasattr(a, "matrix") else a)).tocoo()
    order = np.lexsort((m.col, m.row))
    method = getattr(a, "method", "custom")
    k = getattr(a, "graph_k", 0)
    with open(path, "w") as fh:
        fh.write(f"# n={m.shape[0]} method={method} k={k}\n")
        for i, j, v in zip(m.row[order], m.col[order], m.data[order]):
            fh.write(f"{i},{j},{FLOAT_FORMAT % v}\n")


def load_alignment(path: str | os.PathLike) -> AlignmentMatrix:
    if not os.path.exists(path):
        raise ParseError(f"{path}: no such file")
    header = {}
    rows, cols, vals = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    header[key] = val
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 'i,j,value'")
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: malformed triplet {line!r}") from None
            if j < i:
                raise ParseError(f"{path}:{lineno}: entry below the diagonal")
            rows.append(i)
            cols.append(j)
            vals.append(v)
    if not rows and "n" not in header:
        raise ParseError(f"{path}: no entries")
    # plain triplet files carry no header; the size is then the largest index + 1
    n = int(header["n"]) if "n" in header else max(max(rows), max(cols)) + 1
    r, c, v = np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(vals)
    off = r != c
    m = sp.csr_matrix((np.concatenate([v, v[off]]), (np.concatenate([r, c[off]]),
                                                     np.concatenate([c, r[off]]))), shape=(n, n))
    m.sort_indices()
    return AlignmentMatrix(m, header.get("method", "custom"), int(header.get("k", 0)))
