"""Outlier detectors behind one estimator interface.

Four detectors share the sklearn idiom: construct with params, fit(X)
returns self, decision_function(X) yields scores where higher means more
anomalous, predict(X) thresholds them at the training contamination
quantile. LOF and isolation forest wrap scikit-learn (scores re-oriented
to the positive-is-anomalous convention); ECOD is implemented here
because the score is a short exact formula over empirical CDFs. The
memory-bank detector adapts nearest-neighbor scoring to the same
interface for side-by-side evaluation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.ensemble import IsolationForest
from sklearn.exceptions import NotFittedError
from sklearn.neighbors import LocalOutlierFactor

from ._validation import as_matrix, check_dim
from .bank import MemoryBank, SubsampleConfig, min_sq_dists
from .errors import ParamError


class _ScoringMixin:
    """Shared predict/threshold logic over a fitted decision_function."""

    def _check_fitted(self):
        if not hasattr(self, "train_scores_"):
            raise NotFittedError(
                f"{type(self).__name__} must be fitted before scoring")

    def _finish_fit(self, train_matrix: np.ndarray):
        self.n_features_in_ = int(train_matrix.shape[1])
        self.train_scores_ = self.decision_function_unchecked(train_matrix)
        self.threshold_ = float(
            np.quantile(self.train_scores_, 1.0 - self.contamination))
        return self

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        mat = as_matrix(X, "X")
        check_dim(mat.shape[1], self.n_features_in_, "X")
        return self.decision_function_unchecked(mat)

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > self.threshold_).astype(np.int64)


def _check_contamination(contamination: float):
    if not (0.0 < contamination < 0.5):
        raise ParamError(
            f"contamination must be in (0, 0.5), got {contamination}")


class LofDetector(_ScoringMixin, BaseEstimator):
    """Local outlier factor: ratio of neighbor density to own density.

    Scores sit near 1.0 for points inside homogeneous regions and grow
    with isolation. The reachability-distance guard keeps scores finite
    on duplicate-heavy data.
    """

    def __init__(self, n_neighbors: int = 20, contamination: float = 0.1):
        self.n_neighbors = n_neighbors
        self.contamination = contamination

    def fit(self, X, y=None):
        mat = as_matrix(X, "train")
        if self.n_neighbors < 1:
            raise ParamError(f"n_neighbors must be >= 1, got {self.n_neighbors}")
        if self.n_neighbors >= mat.shape[0]:
            raise ParamError(
                f"n_neighbors={self.n_neighbors} needs more than "
                f"{mat.shape[0]} training vectors")
        _check_contamination(self.contamination)
        self.lof_ = LocalOutlierFactor(n_neighbors=self.n_neighbors,
                                       novelty=True)
        self.lof_.fit(mat)
        return self._finish_fit(mat)

    def decision_function_unchecked(self, mat: np.ndarray) -> np.ndarray:
        # sklearn's score_samples is the negated LOF; flip back
        return -self.lof_.score_samples(mat)


class IsolationForestDetector(_ScoringMixin, BaseEstimator):
    """Isolation forest: 2^(−E[path length]/c(ψ)), in (0, 1).

    Shorter average isolation paths mean easier separation, so scores
    above 0.5 indicate likely anomalies.
    """

    def __init__(self, n_trees: int = 100, psi: int | None = None,
                 seed: int = 0, contamination: float = 0.1):
        self.n_trees = n_trees
        self.psi = psi
        self.seed = seed
        self.contamination = contamination

    def fit(self, X, y=None):
        mat = as_matrix(X, "train")
        if self.n_trees < 1:
            raise ParamError(f"n_trees must be >= 1, got {self.n_trees}")
        psi = self.psi if self.psi is not None else min(256, mat.shape[0])
        if psi < 2:
            raise ParamError(f"psi must be >= 2, got {psi}")
        if psi > mat.shape[0]:
            raise ParamError(
                f"psi={psi} exceeds training size {mat.shape[0]}")
        _check_contamination(self.contamination)
        self.psi_ = psi
        self.forest_ = IsolationForest(n_estimators=self.n_trees,
                                       max_samples=psi,
                                       random_state=self.seed)
        self.forest_.fit(mat)
        return self._finish_fit(mat)

    def decision_function_unchecked(self, mat: np.ndarray) -> np.ndarray:
        # sklearn's score_samples negates the 2^(−E[h]/c(ψ)) score; flip back
        return -self.forest_.score_samples(mat)


class EcodDetector(_ScoringMixin, BaseEstimator):
    """Empirical-CDF outlier detector; parameter-free and rank-based.

    Per dimension, tail probabilities come from the training ECDF with
    plus-one smoothing (count+1)/(n+1), which keeps every log finite.
    Three negative-log-likelihood aggregates are formed (left tails,
    right tails, and skewness-selected tails) and the score is their max.
    """

    def __init__(self, contamination: float = 0.1):
        self.contamination = contamination

    def fit(self, X, y=None):
        mat = as_matrix(X, "train")
        _check_contamination(self.contamination)
        self.sorted_cols_ = np.sort(mat, axis=0)
        self.n_train_ = int(mat.shape[0])
        centered = mat - mat.mean(axis=0)
        m2 = (centered ** 2).mean(axis=0)
        m3 = (centered ** 3).mean(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            skew = np.where(m2 > 0, m3 / np.where(m2 > 0, m2, 1.0) ** 1.5, 0.0)
        self.skew_ = skew
        return self._finish_fit(mat)

    def decision_function_unchecked(self, mat: np.ndarray) -> np.ndarray:
        n = self.n_train_
        d = self.sorted_cols_.shape[1]
        left_nll = np.zeros(mat.shape[0], dtype=np.float64)
        right_nll = np.zeros(mat.shape[0], dtype=np.float64)
        auto_nll = np.zeros(mat.shape[0], dtype=np.float64)
        for j in range(d):
            col = self.sorted_cols_[:, j]
            le_count = np.searchsorted(col, mat[:, j], side="right")
            ge_count = n - np.searchsorted(col, mat[:, j], side="left")
            left = -np.log((le_count + 1.0) / (n + 1.0))
            right = -np.log((ge_count + 1.0) / (n + 1.0))
            left_nll += left
            right_nll += right
            auto_nll += left if self.skew_[j] < 0 else right
        return np.maximum(np.maximum(left_nll, right_nll), auto_nll)


class MemoryBankDetector(_ScoringMixin, BaseEstimator):
    """Nearest-neighbor distance to a deduplicated bank of training rows.

    The estimator-shaped counterpart of bank scoring for detector
    comparisons over plain matrices; archive-backed workflows should
    build banks through the bank module instead.
    """

    def __init__(self, subsample: SubsampleConfig | None = None,
                 contamination: float = 0.1):
        self.subsample = subsample
        self.contamination = contamination

    def fit(self, X, y=None):
        mat = as_matrix(X, "train")
        _check_contamination(self.contamination)
        rows = mat.astype(np.float32)
        sub = self.subsample
        if sub is not None and sub.keep_fraction < 1.0:
            rng = np.random.default_rng(sub.seed)
            keep = max(1, int(round(sub.keep_fraction * rows.shape[0])))
            rows = rows[rng.choice(rows.shape[0], size=keep, replace=False)]
        self.bank_ = MemoryBank(vectors=np.unique(rows, axis=0))
        return self._finish_fit(mat)

    def decision_function_unchecked(self, mat: np.ndarray) -> np.ndarray:
        return np.sqrt(min_sq_dists(self.bank_.vectors, mat))
