"""Semi-supervised manifold learners: least squares (LS) and spectral (Spec)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu

from .data import fix_signs
from .exceptions import InvalidArgumentError, SingularSystemError

CONSTANT_TOL = 1e-8


@dataclass
class LabelAssignment:
    labeled_indices: np.ndarray
    labeled_values: np.ndarray
    unlabeled_indices: np.ndarray
    predicted_values: np.ndarray
    embedding: Optional[np.ndarray] = None

    def full(self) -> np.ndarray:
        """All labels as a ``(d, N)`` matrix, landmarks keeping their given values."""
        n = self.labeled_indices.size + self.unlabeled_indices.size
        z = np.empty((self.labeled_values.shape[0], n))
        z[:, self.labeled_indices] = self.labeled_values
        z[:, self.unlabeled_indices] = self.predicted_values
        return z


def _matrix(a):
    m = a.matrix if hasattr(a, "matrix") else a
    return sp.csr_matrix(m)


def _partition(n: int, landmarks, z_l):
    lm = np.asarray(landmarks, dtype=np.int64).ravel()
    if lm.size == 0 or lm.size >= n:
        raise InvalidArgumentError("landmarks must be a nonempty proper subset of the samples")
    if lm.min() < 0 or lm.max() >= n or np.unique(lm).size != lm.size:
        raise InvalidArgumentError("landmark indices must be distinct and within range")
    z = np.asarray(z_l, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    if z.shape[1] != lm.size:
        raise InvalidArgumentError(f"z_l has {z.shape[1]} columns for {lm.size} landmarks")
    mask = np.ones(n, dtype=bool)
    mask[lm] = False
    return lm, np.flatnonzero(mask), z


def _unanchored_component(phi: sp.csr_matrix, lm, un, gamma):
    """First connected component without a landmark whose block annihilates constants."""
    pattern = phi.copy()
    pattern.setdiag(0)
    pattern.eliminate_zeros()
    count, labels = csgraph.connected_components(pattern, directed=False)
    anchored = set(labels[lm].tolist())
    for comp in range(count):
        if comp in anchored:
            continue
        members = np.flatnonzero(labels == comp)
        block = phi[members][:, members] + gamma * sp.identity(members.size)
        row_sums = np.asarray(block.sum(axis=1)).ravel()
        scale = max(1.0, abs(block).max())
        if np.all(np.abs(row_sums) <= 1e-10 * scale):
            return members
    return None


def ls_learn(a, z_l, landmarks, gamma: float = 0.0) -> LabelAssignment:
    """Closed-form LS label propagation.

    Solves ``(Phi_uu + gamma I) Z_u^T = -Phi_uL Z_L^T``, the stationarity
    condition of ``tr(Z Phi Z^T) + gamma ||Z_u||_F^2``.

    Parameters
    ----------
    a : AlignmentMatrix, RegularizedAlignment or matrix
    z_l : ndarray of shape (d, L)
        Labels of ``landmarks`` in the same order.
    landmarks : sequence of int
    gamma : float
        Ridge weight on the unlabeled labels.
    """
    if gamma < 0:
        raise InvalidArgumentError("gamma must be >= 0")
    phi = _matrix(a)
    n = phi.shape[0]
    lm, un, z = _partition(n, landmarks, z_l)

    bad = _unanchored_component(phi, lm, un, gamma)
    if bad is not None:
        raise SingularSystemError(
            f"linear system is singular: connected component of {bad.size} nodes "
            f"(e.g. {bad[:5].tolist()}) contains no landmark")
    a_uu = sp.csc_matrix(phi[un][:, un] + gamma * sp.identity(un.size))
    rhs = -(phi[un][:, lm] @ z.T)
    try:
        zu = splu(a_uu).solve(np.asarray(rhs))
    except RuntimeError as exc:
        raise SingularSystemError(f"linear system is singular: {exc}") from None
    if not np.all(np.isfinite(zu)):
        raise SingularSystemError("linear system is singular (non-finite solution)")
    return LabelAssignment(lm, z, un, zu.T)


def ls_objective(phi, z_full: np.ndarray, unlabeled, gamma: float = 0.0) -> float:
    """``tr(Z Phi Z^T) + gamma ||Z_u||_F^2`` for a full ``(d, N)`` label matrix."""
    m = _matrix(phi)
    z = np.atleast_2d(z_full)
    return float(np.sum(z * (m @ z.T).T) + gamma * np.sum(z[:, unlabeled] ** 2))


def _constant_at_bottom(m: np.ndarray, lowest: float) -> bool:
    """True when the constant vector is an eigenvector for the smallest eigenvalue.

    Testing eigenvector-ness rather than nullity keeps the rule invariant
    under ``M -> M + alpha I``.
    """
    n = m.shape[0]
    ones = np.full(n, 1.0 / np.sqrt(n))
    image = m @ ones
    mu = float(ones @ image)
    scale = max(1.0, np.max(np.abs(m)))
    return (np.linalg.norm(image - mu * ones) <= CONSTANT_TOL * scale
            and mu - lowest <= CONSTANT_TOL * scale)


def smallest_eigenvectors(m, d: int, skip_constant: str = "auto") -> np.ndarray:
    """Rows are unit eigenvectors of the ``d`` smallest eigenvalues, shape ``(d, N)``.

    When the constant vector is the bottom eigenvector (e.g. the null vector
    of a Laplacian) it is excluded by lifting it above the rest of the
    spectrum.  ``skip_constant='always'`` otherwise drops the smallest
    eigenvector (the 2nd..(d+1)th convention).
    """
    a = m.toarray() if sp.issparse(m) else np.array(m, dtype=float)
    a = (a + a.T) / 2
    n = a.shape[0]
    if not 1 <= d <= n - 1:
        raise InvalidArgumentError(f"d must lie in [1, {n - 1}], got {d}")
    w, v = np.linalg.eigh(a)
    offset = 0
    if _constant_at_bottom(a, w[0]):
        lift = np.abs(a).sum(axis=1).max() + abs(w[0]) + 1.0
        w, v = np.linalg.eigh(a + lift * np.full((n, n), 1.0 / n))
    elif skip_constant == "always":
        offset = 1
    y = fix_signs(v[:, offset:offset + d])
    return y.T


def embed(a, d: int) -> np.ndarray:
    """Unsupervised embedding from the 2nd to (d+1)th smallest eigenvectors, shape ``(d, N)``."""
    return smallest_eigenvectors(_matrix(a), d, skip_constant="always")


def label_projection(z_l) -> np.ndarray:
    """Orthogonal projection whose null space is spanned by ``[1, Z_L^T]``."""
    z = np.atleast_2d(np.asarray(z_l, dtype=float))
    span = np.hstack([np.ones((z.shape[1], 1)), z.T])
    u, sv, _ = np.linalg.svd(span, full_matrices=False)
    rank = int(np.sum(sv > 1e-12 * sv[0]))
    u = u[:, :rank]
    return np.eye(z.shape[1]) - u @ u.T


def spec_system(a, z_l, landmarks, gamma: float = 1.0) -> np.ndarray:
    """Dense ``Phi + gamma * S_L G S_L^T``."""
    phi = _matrix(a)
    lm, _, z = _partition(phi.shape[0], landmarks, z_l)
    m = phi.toarray()
    m[np.ix_(lm, lm)] += gamma * label_projection(z)
    return m


def spec_learn(a, z_l, landmarks, gamma: float = 1.0, d: Optional[int] = None) -> LabelAssignment:
    """Spectral semi-supervised learning followed by an affine map to label space.

    Parameters
    ----------
    gamma : float
        Weight of the label-projection regularizer, must be positive.
    d : int, optional
        Latent dimension; defaults to the label dimension.
    """
    if not gamma > 0:
        raise InvalidArgumentError("gamma must be > 0 for the Spec learner")
    phi = _matrix(a)
    lm, un, z = _partition(phi.shape[0], landmarks, z_l)
    d = z.shape[0] if d is None else int(d)
    if d < z.shape[0]:
        raise InvalidArgumentError(f"d={d} is smaller than the label dimension {z.shape[0]}")
    if lm.size < d + 1:
        raise InvalidArgumentError(
            f"affine fit needs at least d+1={d + 1} landmarks, got {lm.size}; select more landmarks")

    y = smallest_eigenvectors(spec_system(phi, z, lm, gamma), d)
    design = np.hstack([y[:, lm].T, np.ones((lm.size, 1))])
    coef, _, rank, _ = np.linalg.lstsq(design, z.T, rcond=None)
    if rank < d + 1:
        warnings.warn(f"affine fit is rank deficient (rank {rank} < {d + 1}); "
                      "using the minimum-norm solution, more landmarks would help", RuntimeWarning)
    pred = np.hstack([y[:, un].T, np.ones((un.size, 1))]) @ coef
    return LabelAssignment(lm, z, un, pred.T, embedding=y)
