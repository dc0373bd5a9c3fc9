"""scikit-learn compatible wrappers.

These take the usual ``(n_samples, n_features)`` layout and compose with
pipelines and ``clone``; the functional modules underneath use the
column-per-sample layout.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .alignment import build_alignment, regularize_alignment
from .data import Dataset
from .exceptions import InvalidArgumentError
from .graph import knn_graph
from .landmark import select_landmarks
from .ssml import ls_learn, spec_learn


def _fit_alignment(X, n_neighbors, alignment, latent_dim, lle_reg):
    ds = Dataset(X.T)
    g = knn_graph(ds, n_neighbors)
    a = build_alignment(ds, g, alignment, d=latent_dim, lle_reg=lle_reg)
    return ds, g, a


class LandmarkSelector(TransformerMixin, BaseEstimator):
    """Pick ``n_landmarks`` representative samples.

    ``transform`` returns the landmark rows of ``X``.

    Parameters
    ----------
    n_landmarks : int
    method : str
        Any selector name, default ``'gcls'``.
    n_neighbors : int
        K of the neighbor graph.
    alignment : {'LE', 'LLE', 'LTSA', 'ISOMAP'}
    latent_dim : int, optional
        Needed by LTSA and ISOMAP.
    tau : float, optional
        Positivity margin of the regularized alignment matrix.
    exact_eval : bool
        GCLS candidate scoring variant.
    random_state : int
        Seed for the randomized selectors.

    Attributes
    ----------
    landmarks_ : ndarray of int
        Indices in selection order.
    alignment_ : AlignmentMatrix
    regularized_ : RegularizedAlignment
    trace_ : list of float
    """

    def __init__(self, n_landmarks=10, method="gcls", n_neighbors=10, alignment="LE",
                 latent_dim=None, lle_reg=1e-3, tau=None, exact_eval=False, random_state=0):
        self.n_landmarks = n_landmarks
        self.method = method
        self.n_neighbors = n_neighbors
        self.alignment = alignment
        self.latent_dim = latent_dim
        self.lle_reg = lle_reg
        self.tau = tau
        self.exact_eval = exact_eval
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        ds, g, a = _fit_alignment(X, self.n_neighbors, self.alignment, self.latent_dim,
                                  self.lle_reg)
        reg = regularize_alignment(a, self.tau)
        sel = select_landmarks(self.method, self.n_landmarks, self.random_state, reg=reg,
                               alignment=a, dataset=ds, graph=g, exact_eval=self.exact_eval)
        self.landmarks_ = np.asarray(sel.landmarks)
        self.alignment_ = a
        self.regularized_ = reg
        self.trace_ = sel.trace
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "landmarks_")
        X = check_array(X)
        return X[self.landmarks_]


class SemiSupervisedManifoldRegressor(RegressorMixin, BaseEstimator):
    """Transductive regression from a few labeled samples on a manifold.

    ``y`` marks unlabeled rows with NaN.  After ``fit`` the filled-in targets
    are in ``transduction_``; ``predict`` accepts only the training samples
    (row-for-row), since neither learner has an out-of-sample extension.

    Parameters
    ----------
    learner : {'ls', 'spec'}
    gamma : float, optional
        Defaults to 0 for LS and 1 for Spec.
    latent_dim : int, optional
        Spec latent dimension and LTSA/ISOMAP dimension.
    """

    def __init__(self, learner="ls", n_neighbors=10, alignment="LE", gamma=None,
                 latent_dim=None, lle_reg=1e-3):
        self.learner = learner
        self.n_neighbors = n_neighbors
        self.alignment = alignment
        self.gamma = gamma
        self.latent_dim = latent_dim
        self.lle_reg = lle_reg

    def fit(self, X, y):
        X = check_array(X, ensure_min_samples=2)
        y = check_array(y, ensure_2d=False, ensure_all_finite="allow-nan")
        y2 = y.reshape(len(y), -1).astype(float)
        if y2.shape[0] != X.shape[0]:
            raise InvalidArgumentError("X and y have different numbers of samples")
        labeled = ~np.isnan(y2).any(axis=1)
        lm = np.flatnonzero(labeled)
        _, _, a = _fit_alignment(X, self.n_neighbors, self.alignment, self.latent_dim,
                                 self.lle_reg)
        z_l = y2[lm].T
        if self.learner == "ls":
            res = ls_learn(a, z_l, lm, 0.0 if self.gamma is None else self.gamma)
        elif self.learner == "spec":
            res = spec_learn(a, z_l, lm, 1.0 if self.gamma is None else self.gamma,
                             self.latent_dim)
        else:
            raise InvalidArgumentError(f"unknown learner {self.learner!r}")
        full = res.full().T
        self.transduction_ = full[:, 0] if y.ndim == 1 else full
        self.X_fit_ = X
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "transduction_")
        X = check_array(X)
        if X.shape != self.X_fit_.shape or not np.array_equal(X, self.X_fit_):
            raise InvalidArgumentError("predict only covers the samples passed to fit")
        return self.transduction_
