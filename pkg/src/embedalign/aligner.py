"""Scikit-learn style estimators wrapping the closed-form and affine solvers.

Both estimators follow the fit(X, y) / transform(X) contract where X holds
the source vectors and y the row-corresponding target vectors, so they
compose with pipelines, cloning, and grid search.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import geometry
from ._validation import as_matrix, check_paired
from .baselines import apply_affine, fit_affine
from .metrics import rmse


class ProcrustesAligner(BaseEstimator, TransformerMixin):
    """Closed-form alignment of a source vector space onto a target space.

    Learns an orthogonal map with optional centering and uniform scaling:
    transform(X) = scale * (X - source_mean_) @ rotation_ + target_mean_.

    Parameters
    ----------
    center : bool, default=False
        Remove both means before fitting the rotation; the transform then
        re-translates into the target frame.
    scale : bool, default=False
        Also fit the closed-form least-squares scalar.
    proper : bool, default=False
        Force det(rotation_) = +1 (no reflections).
    normalize : bool, default=False
        Fit on row-normalized copies of the inputs. The learned transform
        is still applied to raw vectors.
    """

    def __init__(self, center: bool = False, scale: bool = False,
                 proper: bool = False, normalize: bool = False):
        self.center = center
        self.scale = scale
        self.proper = proper
        self.normalize = normalize

    def fit(self, X, y):
        """Learn the map from source X onto row-corresponding target y."""
        X, y = check_paired(X, y, "X", "y")
        if self.center and self.scale:
            t, _, _ = geometry.align_centered_scaling(
                y, X, proper=self.proper, normalize=self.normalize)
            t = geometry.Transform(
                rotation=t.rotation, scale=t.scale, source_mean=t.source_mean,
                target_mean=y.mean(axis=0), proper=t.proper,
                fit_normalized=t.fit_normalized, warnings=t.warnings)
        elif self.center:
            t, _ = geometry.absolute_orientation(
                y, X, proper=self.proper, normalize=self.normalize)
        elif self.scale:
            t, _ = geometry.align_scaling(
                y, X, proper=self.proper, normalize=self.normalize)
        else:
            t, _ = geometry.align_rotation(
                y, X, proper=self.proper, normalize=self.normalize)
        self.transform_ = t
        self.rotation_ = t.rotation
        self.scale_ = t.scale
        self.source_mean_ = t.source_mean
        self.target_mean_ = t.target_mean
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Map source vectors into the target space."""
        self._check_fitted()
        return geometry.apply_transform(as_matrix(X, "X"), self.transform_)

    def score(self, X, y):
        """Negative RMSE between transformed X and y (higher is better)."""
        self._check_fitted()
        return -rmse(y, self.transform(X))

    def _check_fitted(self):
        if not hasattr(self, "transform_"):
            raise NotFittedError("this ProcrustesAligner instance is not fitted yet")


class AffineAligner(BaseEstimator, TransformerMixin):
    """Unconstrained ridge-regularized linear alignment, fitted by gradient descent.

    Parameters
    ----------
    gamma : float, default=1.0
        Frobenius regularization weight.
    learning_rate : float or None, default=None
        Step size; None picks the safe 1 / (2 (||B^T B||_F + gamma)).
    max_iter : int, default=5000
        Gradient step cap.
    tol : float, default=1e-8
        Stop when the gradient Frobenius norm falls below this.
    """

    def __init__(self, gamma: float = 1.0, learning_rate: float | None = None,
                 max_iter: int = 5000, tol: float = 1e-8):
        self.gamma = gamma
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        X, y = check_paired(X, y, "X", "y")
        t = fit_affine(y, X, gamma=self.gamma, lr=self.learning_rate,
                       max_iters=self.max_iter, tol=self.tol)
        self.affine_ = t
        self.matrix_ = t.matrix
        self.n_iter_ = t.iterations_run
        self.objective_ = t.final_objective
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        if not hasattr(self, "affine_"):
            raise NotFittedError("this AffineAligner instance is not fitted yet")
        return apply_affine(as_matrix(X, "X"), self.affine_)

    def score(self, X, y):
        return -rmse(y, self.transform(X))
