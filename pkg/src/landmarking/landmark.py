"""Landmark selectors behind one contract: ``(..., L) -> SelectionResult``.

Deterministic selectors (``gcls``, ``mincond``) depend only on the matrix;
the randomized ones draw from ``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist
from sklearn.cluster import KMeans

from .alignment import AlignmentMatrix, RegularizedAlignment
from .data import Dataset
from .exceptions import InvalidArgumentError
from .graph import NeighborGraph, connected_components, geodesic_distances
from .spectral import GershgorinState, q_value, surrogate_q, sym_matrix_log

SELECTORS = ("gcls", "mincond", "maxmingeo", "approxdpp", "random", "nystrom", "kmeans")
DETERMINISTIC = ("gcls", "mincond")
MINCOND_MAX_N = 2000
MINCOND_DELTA = 0.05


@dataclass
class SelectionResult:
    landmarks: List[int]
    method: str
    seed: Optional[int] = None
    trace: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"method": self.method, "seed": self.seed,
                "landmarks": [int(i) for i in self.landmarks],
                "trace": [_json_float(v) for v in self.trace]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionResult":
        trace = [float(v) if v is not None else float("inf") for v in d.get("trace", [])]
        return cls([int(i) for i in d["landmarks"]], d["method"], d.get("seed"), trace)

    @classmethod
    def from_json(cls, text: str) -> "SelectionResult":
        return cls.from_dict(json.loads(text))


def _json_float(v):
    v = float(v)
    # JSON has no infinity; null marks an infinite objective
    return v if np.isfinite(v) else None


def _check_count(L: int, n: int, allow_all: bool) -> int:
    hi = n if allow_all else n - 1
    if not isinstance(L, (int, np.integer)) or not 1 <= L <= hi:
        raise InvalidArgumentError(f"L must lie in [1, {hi}] for N={n}, got {L}")
    return int(L)


def _psi_of(reg):
    return reg.matrix if isinstance(reg, (RegularizedAlignment, AlignmentMatrix)) else reg


def _top2(values: np.ndarray, largest: bool):
    """Best value, its position, and the runner-up value."""
    v = values if largest else -values
    first = int(np.argmax(v))
    if v.size == 1:
        return values[first], first, values[first]
    runner = np.max(np.delete(v, first))
    return values[first], first, (runner if largest else -runner)


def _excluding_each(values: np.ndarray, largest: bool) -> np.ndarray:
    """For every position p, the max (or min) of ``values`` with entry p removed."""
    best, pos, runner = _top2(values, largest)
    out = np.full(values.shape, best, dtype=float)
    out[pos] = runner
    return out


def _select_candidate(q: np.ndarray, min_cs: np.ndarray, idx: np.ndarray) -> int:
    """Lowest Q; infinite-Q ties go to the largest remaining min(c - s); then lowest index."""
    tiebreak = np.where(np.isinf(q), -min_cs, 0.0)
    order = np.lexsort((idx, tiebreak, q))
    return int(order[0])


def _first_outside(order: np.ndarray, blocked: set) -> int:
    for p in order:
        if p not in blocked:
            return p
    return -1


def _exact_candidate_scores(state: GershgorinState, u: np.ndarray):
    """Q of ``u \\ {i}`` for every candidate, with neighbors' residual radii decremented."""
    c, r, s = state.centers[u], state.radii[u], state.residual[u]
    a_val, b_val, m_val = r - s, c + s, c - s
    a_ord, b_ord, m_ord = np.argsort(-a_val), np.argsort(-b_val), np.argsort(m_val)
    pos_of = np.full(state.n, -1, dtype=np.int64)
    pos_of[u] = np.arange(u.size)
    q = np.empty(u.size)
    min_cs = np.empty(u.size)
    for p, i in enumerate(u):
        rows, vals = state.column(i)
        nb = pos_of[rows]
        keep = nb >= 0
        nb, vals = nb[keep], vals[keep]
        blocked = set(nb.tolist())
        blocked.add(p)
        pa, pb, pm = (_first_outside(o, blocked) for o in (a_ord, b_ord, m_ord))
        a_best = a_val[pa] if pa >= 0 else -np.inf
        b_best = b_val[pb] if pb >= 0 else -np.inf
        m_best = m_val[pm] if pm >= 0 else np.inf
        if nb.size:
            s_new = s[nb] - vals
            a_best = max(a_best, np.max(r[nb] - s_new))
            b_best = max(b_best, np.max(c[nb] + s_new))
            m_best = min(m_best, np.min(c[nb] - s_new))
        q[p] = q_value(a_best, b_best, m_best)
        min_cs[p] = m_best
    return q, min_cs


def gcls_select(reg, L: int, exact_eval: bool = False) -> SelectionResult:
    """Gershgorin circle-based landmark selection.

    Each round deletes the circle whose removal gives the smallest surrogate
    ``Q`` and then lowers the residual radii of its unlabeled neighbors.  By
    default a candidate is scored by dropping only its own circle from the
    extrema of ``Q`` (O(N) per round); ``exact_eval=True`` also applies the
    candidate's neighbor updates while scoring (O(NK) per round).

    Parameters
    ----------
    reg : RegularizedAlignment or symmetric matrix
        The shifted alignment matrix ``Psi``.
    L : int
        Number of landmarks, ``1 <= L < N``.
    """
    state = GershgorinState(_psi_of(reg))
    L = _check_count(L, state.n, allow_all=False)
    landmarks, trace = [], []
    for _ in range(L):
        u = state.unlabeled
        if exact_eval:
            q, min_cs = _exact_candidate_scores(state, u)
        else:
            c, r, s = state.centers[u], state.radii[u], state.residual[u]
            a = _excluding_each(r - s, largest=True)
            b = _excluding_each(c + s, largest=True)
            min_cs = _excluding_each(c - s, largest=False)
            q = q_value(a, b, min_cs)
        p = _select_candidate(q, min_cs, u)
        chosen = int(u[p])
        state.remove(chosen)
        landmarks.append(chosen)
        trace.append(surrogate_q(state))
    return SelectionResult(landmarks, "gcls", None, trace)


def _mincond_rescale(m: np.ndarray, delta: float) -> np.ndarray:
    c = np.diag(m)
    r = np.abs(m).sum(axis=1) - np.abs(c)
    lo, hi = np.min(c - r), np.max(c + r)
    if lo >= delta and hi <= 2.0 - delta:
        return m
    if hi - lo <= 0:
        return m - (lo - 1.0) * np.eye(m.shape[0])
    scale = (2.0 - 2.0 * delta) / (hi - lo)
    return scale * m + (delta - scale * lo) * np.eye(m.shape[0])


def mincond_select(reg, L: int, delta: float = MINCOND_DELTA) -> SelectionResult:
    """Greedy Gershgorin-range deletion on the logarithm of the remaining submatrix.

    Each round maps the current submatrix's Gershgorin interval into
    ``[delta, 2 - delta]`` (only when it is not already inside), takes the
    matrix logarithm, and deletes the index whose removal leaves the narrowest
    Gershgorin range of that logarithm.
    """
    psi = _psi_of(reg)
    n = psi.shape[0]
    if n > MINCOND_MAX_N:
        raise InvalidArgumentError(f"mincond is limited to N <= {MINCOND_MAX_N} (got {n})")
    L = _check_count(L, n, allow_all=False)
    dense = psi.toarray() if sp.issparse(psi) else np.array(psi, dtype=float)
    u = np.arange(n)
    landmarks, trace = [], []
    for _ in range(L):
        sub = _mincond_rescale(dense[np.ix_(u, u)], delta)
        lg = sym_matrix_log(sub)
        c = np.diag(lg)
        absl = np.abs(lg)
        np.fill_diagonal(absl, 0.0)
        rad = absl.sum(axis=1)
        upper = (c + rad)[:, None] - absl
        lower = (c - rad)[:, None] + absl
        np.fill_diagonal(upper, -np.inf)
        np.fill_diagonal(lower, np.inf)
        spread = np.abs(upper.max(axis=0) - lower.min(axis=0))
        p = int(np.argmin(spread))
        landmarks.append(int(u[p]))
        trace.append(float(spread[p]))
        u = np.delete(u, p)
    return SelectionResult(landmarks, "mincond", None, trace)


def maxmingeo_select(g: NeighborGraph, L: int, seed: int = 0,
                     first: Optional[int] = None) -> SelectionResult:
    """Farthest-point sampling under graph geodesic distance.

    The first landmark is drawn uniformly from ``seed`` unless ``first`` is
    given; unreachable nodes (infinite distance) are taken first.
    """
    n = g.n
    L = _check_count(L, n, allow_all=True)
    if connected_components(g)[0] > 1:
        warnings.warn("neighbor graph is disconnected; unreachable nodes rank first", RuntimeWarning)
    rng = np.random.default_rng(seed)
    start = int(rng.integers(n)) if first is None else int(first)
    landmarks = [start]
    mind = geodesic_distances(g, [start])[0]
    trace = []
    taken = np.zeros(n, dtype=bool)
    taken[start] = True
    while len(landmarks) < L:
        score = np.where(taken, -1.0, mind)
        nxt = int(np.argmax(score))
        trace.append(float(score[nxt]))
        landmarks.append(nxt)
        taken[nxt] = True
        mind = np.minimum(mind, geodesic_distances(g, [nxt])[0])
    return SelectionResult(landmarks, "maxmingeo", seed, trace)


def approxdpp_select(ds: Dataset, L: int, seed: int = 0,
                     first: Optional[int] = None) -> SelectionResult:
    """Sequential sampling with ``p_i ~ prod_j (1 - exp(-|x_i - x_j|^2 / 2D^2))`` over landmarks ``j``.

    The bandwidth ``D`` is the ambient dimension.
    """
    x = ds.samples.T
    n, dim = x.shape
    L = _check_count(L, n, allow_all=True)
    rng = np.random.default_rng(seed)
    start = int(rng.integers(n)) if first is None else int(first)
    landmarks = [start]
    weight = np.ones(n)
    taken = np.zeros(n, dtype=bool)
    taken[start] = True
    last = start
    while len(landmarks) < L:
        sq = np.sum((x - x[last]) ** 2, axis=1)
        weight *= 1.0 - np.exp(-sq / (2.0 * dim ** 2))
        w = np.where(taken, 0.0, weight)
        total = w.sum()
        if not total > 0:
            w = (~taken).astype(float)
            total = w.sum()
        last = int(rng.choice(n, p=w / total))
        landmarks.append(last)
        taken[last] = True
    return SelectionResult(landmarks, "approxdpp", seed, [])


def _weighted_without_replacement(weights: np.ndarray, L: int, rng) -> List[int]:
    w = np.asarray(weights, dtype=float).copy()
    picked = []
    for _ in range(L):
        total = w.sum()
        if total > 0:
            i = int(rng.choice(w.size, p=w / total))
        else:
            free = np.flatnonzero(~np.isin(np.arange(w.size), picked))
            i = int(rng.choice(free))
        picked.append(i)
        w[i] = 0.0
    return picked


def baseline_select(kind: str, ds: Optional[Dataset], a, L: int, seed: int = 0) -> SelectionResult:
    """Random, column-norm (Nystrom) and K-means baselines.

    ``random`` draws uniformly without replacement; ``nystrom`` draws
    sequentially with probability proportional to the Euclidean norm of each
    alignment-matrix column; ``kmeans`` clusters the samples into ``L`` groups
    and returns the sample nearest each center.
    """
    kind = "nystrom" if kind == "nystrom_column" else kind
    rng = np.random.default_rng(seed)
    if kind == "random":
        n = ds.n_samples if ds is not None else _psi_of(a).shape[0]
        L = _check_count(L, n, allow_all=True)
        picked = [int(i) for i in rng.choice(n, size=L, replace=False)]
    elif kind == "nystrom":
        m = sp.csc_matrix(_psi_of(a))
        L = _check_count(L, m.shape[0], allow_all=True)
        norms = np.sqrt(np.asarray(m.multiply(m).sum(axis=0)).ravel())
        picked = _weighted_without_replacement(norms, L, rng)
    elif kind == "kmeans":
        x = ds.samples.T
        L = _check_count(L, x.shape[0], allow_all=True)
        km = KMeans(n_clusters=L, init="k-means++", n_init=1, max_iter=100,
                    random_state=seed, algorithm="lloyd").fit(x)
        dist = cdist(km.cluster_centers_, x)
        used = np.zeros(x.shape[0], dtype=bool)
        picked = []
        for row in dist:
            for i in np.argsort(row, kind="stable"):
                if not used[i]:
                    used[i] = True
                    picked.append(int(i))
                    break
    else:
        raise InvalidArgumentError(f"unknown baseline {kind!r}")
    return SelectionResult(picked, kind, seed, [])


def select_landmarks(method: str, L: int, seed: int = 0, *, reg=None, alignment=None,
                     dataset=None, graph=None, exact_eval: bool = False) -> SelectionResult:
    """Dispatch to a selector by name, passing only the inputs it uses."""
    method = method.lower()
    if method == "gcls":
        return gcls_select(reg, L, exact_eval=exact_eval)
    if method == "mincond":
        return mincond_select(reg, L)
    if method == "maxmingeo":
        return maxmingeo_select(graph, L, seed)
    if method == "approxdpp":
        return approxdpp_select(dataset, L, seed)
    if method in ("random", "nystrom", "nystrom_column", "kmeans"):
        return baseline_select(method, dataset, alignment if alignment is not None else reg, L, seed)
    raise InvalidArgumentError(f"unknown selector {method!r}; choose from {SELECTORS}")
