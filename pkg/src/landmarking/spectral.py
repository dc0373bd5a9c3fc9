"""Gershgorin-circle machinery, condition numbers and the learning-error bound.

Matrices may be dense arrays or scipy sparse matrices; everything that needs
eigenvalues densifies (intended for N up to a few thousand).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .exceptions import InvalidArgumentError, NotPositiveDefiniteError

SYMMETRY_TOL = 1e-10
BRUTE_FORCE_MAX_N = 20


def _dense(m) -> np.ndarray:
    return m.toarray() if sp.issparse(m) else np.asarray(m, dtype=float)


def _check_square(m):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {m.shape}")


def check_symmetric(m, tol: float = SYMMETRY_TOL) -> None:
    _check_square(m)
    if sp.issparse(m):
        diff = abs(m - m.T)
        worst = diff.max() if diff.nnz else 0.0
        scale = abs(m).max() if m.nnz else 0.0
    else:
        m = np.asarray(m, dtype=float)
        worst = np.max(np.abs(m - m.T)) if m.size else 0.0
        scale = np.max(np.abs(m)) if m.size else 0.0
    if worst > tol * max(1.0, scale):
        raise InvalidArgumentError(f"matrix is not symmetric (max |m - m^T| = {worst:.3g})")


def _centers_radii(m):
    if sp.issparse(m):
        m = sp.csr_matrix(m)
        c = m.diagonal().astype(float)
        r = np.asarray(abs(m).sum(axis=1)).ravel() - np.abs(c)
    else:
        m = np.asarray(m, dtype=float)
        c = np.diag(m).copy()
        r = np.abs(m).sum(axis=1) - np.abs(c)
    return c, np.maximum(r, 0.0)


def gershgorin_circles(m):
    """Centers, radii and the eigenvalue enclosure ``[b_min, b_max]`` of a symmetric matrix.

    Returns
    -------
    centers, radii : ndarray
    b_min, b_max : float
    """
    check_symmetric(m)
    c, r = _centers_radii(m)
    return c, r, float(np.min(c - r)), float(np.max(c + r))


def condition_number(m) -> float:
    """Spectral condition number ``lambda_max / lambda_min`` of an SPD matrix."""
    a = _dense(m)
    _check_square(a)
    w = np.linalg.eigvalsh(a)
    if w[0] <= 0:
        raise NotPositiveDefiniteError(f"not positive definite (smallest eigenvalue {w[0]:.3g})")
    return float(w[-1] / w[0])


def _split(n: int, landmarks):
    lm = np.unique(np.asarray(landmarks, dtype=np.int64))
    if lm.size and (lm[0] < 0 or lm[-1] >= n):
        raise InvalidArgumentError(f"landmark index out of range [0, {n})")
    if lm.size == 0 or lm.size >= n:
        raise InvalidArgumentError("landmark set must be a nonempty proper subset")
    mask = np.ones(n, dtype=bool)
    mask[lm] = False
    return lm, np.flatnonzero(mask)


def block_l1_norms(psi, landmarks):
    """Absolute-sum norms of the unlabeled/landmark blocks.

    ``norm_uL`` is ``max_{i unlabeled} sum_{j landmark} |psi_ij|``, i.e. the
    largest per-node coupling to the landmarks (``r_i - s_i`` in circle
    terms).  ``norm_uu`` is the max column-absolute-sum of the
    unlabeled-unlabeled block.
    """
    n = psi.shape[0]
    lm, un = _split(n, landmarks)
    a = sp.csr_matrix(psi) if sp.issparse(psi) else np.asarray(psi, dtype=float)
    a_abs = abs(a)
    b_ul = a_abs[un][:, lm]
    b_uu = a_abs[un][:, un]
    norm_ul = float(np.max(np.asarray(b_ul.sum(axis=1)).ravel()))
    norm_uu = float(np.max(np.asarray(b_uu.sum(axis=0)).ravel()))
    return norm_ul, norm_uu


def error_bound(psi, landmarks) -> float:
    """``kappa(psi_uu) * (1/||psi_uL||_1 + 1/||psi_uu||_1)``; ``inf`` if the landmarks are uncoupled."""
    n = psi.shape[0]
    lm, un = _split(n, landmarks)
    norm_ul, norm_uu = block_l1_norms(psi, lm)
    sub = _dense(psi[un][:, un] if sp.issparse(psi) else np.asarray(psi)[np.ix_(un, un)])
    kappa = condition_number(sub)
    if norm_ul == 0:
        return float("inf")
    return kappa * (1.0 / norm_ul + 1.0 / norm_uu)


def q_value(max_r_minus_s, max_c_plus_s, min_c_minus_s):
    """The Gershgorin surrogate from its three extrema (vectorized, ``inf`` when degenerate)."""
    a = np.asarray(max_r_minus_s, dtype=float)
    b = np.asarray(max_c_plus_s, dtype=float)
    m = np.asarray(min_c_minus_s, dtype=float)
    bad = (m <= 0) | (a <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (a + b) / (m * a)
    q = np.where(bad, np.inf, q)
    return q if q.ndim else float(q)


class GershgorinState:
    """Centers ``c``, full radii ``r`` and residual radii ``s`` over the unlabeled set.

    ``s_i`` is the radius of circle ``i`` inside the unlabeled principal
    submatrix.  :meth:`remove` moves an index to the labeled side and updates
    the residual radii of its unlabeled neighbors.
    """

    def __init__(self, psi):
        check_symmetric(psi)
        self.psi = sp.csc_matrix(psi)
        self.psi.sort_indices()
        self.n = self.psi.shape[0]
        self.centers, self.radii = _centers_radii(self.psi)
        self.residual = self.radii.copy()
        self.unlabeled_mask = np.ones(self.n, dtype=bool)
        self._abs = abs(self.psi).tocsc()
        self._abs.sort_indices()

    @property
    def unlabeled(self) -> np.ndarray:
        return np.flatnonzero(self.unlabeled_mask)

    def column(self, i: int):
        """Row indices and absolute values of column ``i`` (excluding the diagonal)."""
        lo, hi = self._abs.indptr[i], self._abs.indptr[i + 1]
        rows = self._abs.indices[lo:hi]
        vals = self._abs.data[lo:hi]
        off = rows != i
        return rows[off], vals[off]

    def remove(self, i: int) -> None:
        if not self.unlabeled_mask[i]:
            raise InvalidArgumentError(f"index {i} already labeled")
        self.unlabeled_mask[i] = False
        rows, vals = self.column(i)
        keep = self.unlabeled_mask[rows]
        self.residual[rows[keep]] -= vals[keep]
        # guard against rounding drift below zero
        np.maximum(self.residual, 0.0, out=self.residual)

    def recompute_residual(self) -> np.ndarray:
        """Residual radii from scratch over the current unlabeled set."""
        a = self._abs.tocsr()
        masked = a @ self.unlabeled_mask.astype(float)
        diag = np.abs(self.centers) * self.unlabeled_mask
        return masked - diag


def surrogate_q(state: GershgorinState) -> float:
    """``Q`` of the current unlabeled set."""
    u = state.unlabeled
    if u.size == 0:
        raise InvalidArgumentError("unlabeled set is empty")
    c, r, s = state.centers[u], state.radii[u], state.residual[u]
    return q_value(np.max(r - s), np.max(c + s), np.min(c - s))


def surrogate_q_from_scratch(psi, unlabeled) -> float:
    """``Q`` computed directly from ``psi`` restricted to ``unlabeled``."""
    a = np.abs(_dense(psi))
    u = np.asarray(unlabeled, dtype=np.int64)
    if u.size == 0:
        raise InvalidArgumentError("unlabeled set is empty")
    c = np.diag(_dense(psi))[u]
    r = a[u].sum(axis=1) - np.abs(c)
    s = a[np.ix_(u, u)].sum(axis=1) - np.abs(c)
    return q_value(np.max(r - s), np.max(c + s), np.min(c - s))


def sym_matrix_log(m) -> np.ndarray:
    """Principal logarithm of an SPD matrix via its eigen-decomposition."""
    a = _dense(m)
    _check_square(a)
    w, v = np.linalg.eigh((a + a.T) / 2)
    if w[0] <= 0:
        raise NotPositiveDefiniteError(
            f"matrix logarithm needs positive eigenvalues (smallest {w[0]:.3g})")
    return (v * np.log(w)) @ v.T


def brute_force_best_submatrix(psi, L: int):
    """Exhaustively choose ``L`` rows/columns to delete so the remainder has minimal ``kappa``.

    Returns ``(deleted_indices, kappa)``; ties go to the lexicographically
    smallest deleted set.  Singular remainders score ``inf``.
    """
    a = _dense(psi)
    _check_square(a)
    n = a.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        raise InvalidArgumentError(
            f"exhaustive search is limited to N <= {BRUTE_FORCE_MAX_N} (got {n}); "
            "use a greedy selector instead")
    if not 1 <= L < n:
        raise InvalidArgumentError(f"L must lie in [1, {n - 1}], got {L}")
    best, best_kappa = None, np.inf
    for deleted in combinations(range(n), L):
        keep = np.setdiff1d(np.arange(n), deleted)
        w = np.linalg.eigvalsh(a[np.ix_(keep, keep)])
        kappa = w[-1] / w[0] if w[0] > 0 else np.inf
        if best is None or kappa < best_kappa:
            best, best_kappa = deleted, kappa
    return list(best), float(best_kappa)


def theorem2_bound(psi, L: int) -> float:
    """``[L(N-L)+1] * lambda_1 / lambda_{N-L}`` for a PSD matrix (eigenvalues descending)."""
    w = np.sort(np.linalg.eigvalsh(_dense(psi)))[::-1]
    n = w.size
    lam_low = w[n - L - 1]
    if lam_low <= 0:
        return float("inf")
    return float((L * (n - L) + 1) * w[0] / lam_low)
