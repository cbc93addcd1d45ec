"""Multinomial Naive Bayes over token counts, with additive smoothing."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .errors import ShapeMismatch


class MultinomialNaiveBayes(BaseEstimator, ClassifierMixin):
    """Probabilistic classifier with per-class token likelihoods.

    prior(c) = n_c / n and likelihood(t|c) = (count(t,c) + alpha) /
    (total_count(c) + alpha * |V|). Prediction takes the argmax of the log
    posterior; exact ties resolve to the lexicographically smaller class
    code. Confidence is the softmax-normalized posterior of the winner.
    """

    def __init__(self, alpha: float = 0.01):
        self.alpha = alpha

    def fit(self, X: sp.spmatrix, y) -> "MultinomialNaiveBayes":
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        y = np.asarray(y, dtype=object)
        if X.shape[0] != y.shape[0]:
            raise ShapeMismatch(f"{X.shape[0]} feature rows vs {y.shape[0]} labels")
        if X.shape[0] == 0:
            raise ShapeMismatch("cannot fit on zero samples")

        self.classes_ = np.array(sorted(set(y)), dtype=object)
        class_index = {c: i for i, c in enumerate(self.classes_)}
        n_classes = len(self.classes_)
        n_features = X.shape[1]

        X = sp.csr_matrix(X)
        y_idx = np.array([class_index[c] for c in y])
        membership = sp.csr_matrix(
            (np.ones(len(y_idx)), (y_idx, np.arange(len(y_idx)))),
            shape=(n_classes, X.shape[0]),
        )
        feature_count = np.asarray((membership @ X).todense(), dtype=np.float64)
        class_count = np.bincount(y_idx, minlength=n_classes).astype(np.float64)

        self.class_log_prior_ = np.log(class_count) - np.log(class_count.sum())
        smoothed = feature_count + self.alpha
        totals = feature_count.sum(axis=1) + self.alpha * n_features
        self.feature_log_prob_ = np.log(smoothed) - np.log(totals)[:, None]
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "classes_"):
            raise NotFittedError("MultinomialNaiveBayes used before fit")

    def joint_log_likelihood(self, X: sp.spmatrix) -> np.ndarray:
        """Unnormalized log posterior per (sample, class)."""
        self._check_fitted()
        X = sp.csr_matrix(X)
        return X @ self.feature_log_prob_.T + self.class_log_prior_

    def predict(self, X: sp.spmatrix) -> np.ndarray:
        codes, _ = self.predict_with_confidence(X)
        return codes

    def predict_proba(self, X: sp.spmatrix) -> np.ndarray:
        """Softmax-normalized posteriors, one row per sample."""
        scores = self.joint_log_likelihood(X)
        scores = scores - scores.max(axis=1, keepdims=True)
        probs = np.exp(scores)
        return probs / probs.sum(axis=1, keepdims=True)

    #: Posteriors this close (on the normalized scale) count as tied,
    #: absorbing float rounding differences on mathematically equal scores.
    TIE_EPS = 1e-12

    def predict_with_confidence(self, X: sp.spmatrix) -> tuple[np.ndarray, np.ndarray]:
        """Winning class per sample plus its normalized posterior.

        ``classes_`` is sorted, so taking the first class within TIE_EPS
        of the maximum implements the lexicographic tie-break.
        """
        probs = self.predict_proba(X)
        top = probs.max(axis=1, keepdims=True)
        winners = (probs >= top - self.TIE_EPS).argmax(axis=1)
        return self.classes_[winners], probs[np.arange(len(winners)), winners]
