"""Random forest of Gini decision trees over token counts."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ._tree import NO_FEATURE, build_tree, forest_votes
from .errors import ModelUnusable, ShapeMismatch

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def child_seed(seed: int, index: int) -> int:
    """Deterministic 32-bit stream seed for tree ``index`` (splitmix64)."""
    z = ((seed & _MASK64) + (index + 1) * _SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & 0xFFFFFFFF


@dataclass(frozen=True)
class Tree:
    """One fitted tree in flat-array form (leaf when feature == -1)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray
    leaf_count: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def leaf_ids(self) -> np.ndarray:
        return np.flatnonzero(self.feature == NO_FEATURE)


class RandomForest(BaseEstimator, ClassifierMixin):
    """Bagged Gini trees with integer count-threshold splits.

    Each tree trains on a bootstrap sample drawn from a child seed derived
    from ``(seed, tree index)``, considers ``floor(sqrt(|V|))`` random
    features per split, and votes its leaf's majority class at prediction
    time. The ensemble prediction is the majority vote; confidence is the
    winning vote fraction; ties resolve to the lexicographically smaller
    class code.
    """

    def __init__(
        self,
        n_trees: int = 600,
        seed: int = 0,
        max_depth: int | None = None,
        min_leaf: int = 1,
        n_jobs: int = 1,
    ):
        self.n_trees = n_trees
        self.seed = seed
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.n_jobs = n_jobs

    def _densify(self, X) -> np.ndarray:
        if sp.issparse(X):
            X = X.toarray()
        return np.ascontiguousarray(X, dtype=np.int32)

    def fit(self, X, y) -> "RandomForest":
        y = np.asarray(y, dtype=object)
        if X.shape[0] != y.shape[0]:
            raise ShapeMismatch(f"{X.shape[0]} feature rows vs {y.shape[0]} labels")
        if X.shape[0] == 0:
            raise ShapeMismatch("cannot fit on zero samples")

        Xc = sp.csc_matrix(X)
        Xc.sum_duplicates()
        col_indptr = np.asarray(Xc.indptr, dtype=np.int64)
        col_rows = np.asarray(Xc.indices, dtype=np.int32)
        col_vals = np.asarray(Xc.data, dtype=np.int32)

        self.classes_ = np.array(sorted(set(y)), dtype=object)
        class_index = {c: i for i, c in enumerate(self.classes_)}
        y_idx = np.array([class_index[c] for c in y], dtype=np.int32)

        n_features = Xc.shape[1]
        self.max_features_ = max(1, math.floor(math.sqrt(n_features)))
        max_depth = -1 if self.max_depth is None else self.max_depth
        max_val = int(col_vals.max()) if col_vals.size else 0

        def build(t: int) -> Tree:
            arrays = build_tree(
                col_indptr,
                col_rows,
                col_vals,
                y_idx,
                Xc.shape[0],
                len(self.classes_),
                self.max_features_,
                max_depth,
                self.min_leaf,
                child_seed(self.seed, t),
                max_val,
            )
            feature, threshold, left, right, leaf_class, leaf_count, n_nodes = arrays
            return Tree(
                feature=feature[:n_nodes].copy(),
                threshold=threshold[:n_nodes].copy(),
                left=left[:n_nodes].copy(),
                right=right[:n_nodes].copy(),
                leaf_class=leaf_class[:n_nodes].copy(),
                leaf_count=leaf_count[:n_nodes].copy(),
            )

        if self.n_jobs > 1 and self.n_trees > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                self.trees_ = list(pool.map(build, range(self.n_trees)))
        else:
            self.trees_ = [build(t) for t in range(self.n_trees)]
        self._pack()
        return self

    def _pack(self) -> None:
        """Concatenate per-tree arrays for the vote kernel."""
        roots = []
        offset = 0
        for tree in self.trees_:
            roots.append(offset)
            offset += tree.n_nodes
        self._roots = np.array(roots, dtype=np.int64)
        if self.trees_:
            shift = np.repeat(self._roots, [t.n_nodes for t in self.trees_])
            self._feature = np.concatenate([t.feature for t in self.trees_])
            self._threshold = np.concatenate([t.threshold for t in self.trees_])
            internal = self._feature != NO_FEATURE
            self._left = np.concatenate([t.left for t in self.trees_])
            self._right = np.concatenate([t.right for t in self.trees_])
            self._left[internal] += shift[internal]
            self._right[internal] += shift[internal]
            self._leaf_class = np.concatenate([t.leaf_class for t in self.trees_])

    def votes(self, X) -> np.ndarray:
        """Raw per-class vote counts, one row per sample."""
        if not hasattr(self, "trees_"):
            raise NotFittedError("RandomForest used before fit")
        if not self.trees_:
            raise ModelUnusable("forest has no trees")
        Xd = self._densify(X)
        return forest_votes(
            Xd,
            self._feature,
            self._threshold,
            self._left,
            self._right,
            self._leaf_class,
            self._roots,
            len(self.classes_),
        )

    def predict(self, X) -> np.ndarray:
        codes, _ = self.predict_with_confidence(X)
        return codes

    def predict_with_confidence(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Majority-vote class per sample plus the winning vote fraction.

        ``classes_`` is sorted and argmax returns the first maximum, which
        implements the lexicographic tie-break.
        """
        votes = self.votes(X)
        winners = votes.argmax(axis=1)
        conf = votes[np.arange(len(winners)), winners] / len(self.trees_)
        return self.classes_[winners], conf
