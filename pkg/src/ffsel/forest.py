"""Random forest of CART trees with Gini splits and impurity-based importances.

One learner serves two callers: the GINI relevance estimator (mean decrease
in impurity, averaged over trees and normalized to sum 1) and the forest
classifier (majority vote over trees).  Everything is deterministic for a
fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ForestParams", "RandomForest", "gini_index"]


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_features: int | None = None  # None -> floor(sqrt(n_cols)), min 1
    min_samples_split: int = 2
    bootstrap: bool = True
    seed: int = 0

    def resolve_max_features(self, n_cols: int) -> int:
        if self.max_features is None:
            return max(1, int(np.sqrt(n_cols)))
        return max(1, min(self.max_features, n_cols))

    def as_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_features": self.max_features,
            "min_samples_split": self.min_samples_split,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
        }


def gini_index(counts: np.ndarray) -> float:
    """Gini impurity 1 - sum(p_c^2) from per-class counts."""
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.dot(p, p))


class _Tree:
    """CART classification tree stored as parallel node arrays.

    Internal nodes carry (feature, threshold); rows with value <= threshold
    go left.  Leaves predict the majority class of their training rows,
    ties resolved toward the smaller class id.
    """

    __slots__ = ("feature", "threshold", "left", "right", "leaf_class")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.leaf_class: list[int] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_class.append(-1)
        return len(self.feature) - 1

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.int64)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            f = self.feature[node]
            if f < 0:
                out[idx] = self.leaf_class[node]
                continue
            goes_left = X[idx, f] <= self.threshold[node]
            stack.append((self.left[node], idx[goes_left]))
            stack.append((self.right[node], idx[~goes_left]))
        return out


def _best_split_for_feature(values, cum, total_counts, node_gini):
    """Best (gain, threshold) splitting sorted values at a class-count prefix.

    ``cum`` is the cumulative one-hot class count matrix of the sorted rows;
    only boundaries between distinct consecutive values are candidates.
    Returns (-1.0, 0.0) when the feature is constant at this node.
    """
    n = values.shape[0]
    boundaries = np.flatnonzero(values[1:] > values[:-1]) + 1
    if boundaries.size == 0:
        return -1.0, 0.0
    nl = boundaries.astype(np.float64)
    nr = n - nl
    lc = cum[boundaries - 1]
    rc = total_counts[None, :] - lc
    gini_l = 1.0 - np.square(lc / nl[:, None]).sum(axis=1)
    gini_r = 1.0 - np.square(rc / nr[:, None]).sum(axis=1)
    weighted = (nl * gini_l + nr * gini_r) / n
    gains = node_gini - weighted
    best = int(np.argmax(gains))
    i = boundaries[best]
    threshold = 0.5 * (values[i - 1] + values[i])
    return float(gains[best]), float(threshold)


class RandomForest:
    """Forest of Gini-split CART trees with MDI feature importances."""

    def __init__(self, params: ForestParams, n_classes: int):
        if params.n_trees < 1:
            raise ValueError("n_trees must be positive")
        self.params = params
        self.n_classes = n_classes
        self.trees: list[_Tree] = []
        self._raw_importances: np.ndarray | None = None
        self._n_cols: int | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n_rows, n_cols = X.shape
        self._n_cols = n_cols
        max_features = self.params.resolve_max_features(n_cols)
        importances = np.zeros(n_cols, dtype=np.float64)
        self.trees = []
        seeds = np.random.SeedSequence(self.params.seed).spawn(self.params.n_trees)
        for t in range(self.params.n_trees):
            rng = np.random.default_rng(seeds[t])
            if self.params.bootstrap:
                sample = rng.integers(0, n_rows, size=n_rows)
            else:
                sample = np.arange(n_rows)
            tree = self._grow_tree(X, y, sample, max_features, rng, importances)
            self.trees.append(tree)
        importances /= self.params.n_trees
        self._raw_importances = importances
        return self

    def _grow_tree(self, X, y, sample, max_features, rng, importances) -> _Tree:
        tree = _Tree()
        n_total = sample.shape[0]
        n_cols = X.shape[1]
        min_split = max(2, self.params.min_samples_split)
        root = tree._new_node()
        stack = [(root, sample)]
        while stack:
            node, idx = stack.pop()
            counts = np.bincount(y[idx], minlength=self.n_classes)
            node_gini = gini_index(counts)
            if idx.shape[0] < min_split or node_gini == 0.0:
                tree.leaf_class[node] = int(np.argmax(counts))
                continue
            if max_features >= n_cols:
                candidates = np.arange(n_cols)
            else:
                candidates = rng.choice(n_cols, size=max_features, replace=False)
            best_gain, best_feature, best_threshold = 0.0, -1, 0.0
            y_node = y[idx]
            for f in candidates:
                v = X[idx, f]
                order = np.argsort(v, kind="stable")
                vs = v[order]
                onehot = np.zeros((idx.shape[0], self.n_classes), dtype=np.float64)
                onehot[np.arange(idx.shape[0]), y_node[order]] = 1.0
                cum = onehot.cumsum(axis=0)
                gain, threshold = _best_split_for_feature(vs, cum, counts.astype(np.float64), node_gini)
                if gain > best_gain:
                    best_gain, best_feature, best_threshold = gain, int(f), threshold
            if best_feature < 0:
                tree.leaf_class[node] = int(np.argmax(counts))
                continue
            importances[best_feature] += (idx.shape[0] / n_total) * best_gain
            goes_left = X[idx, best_feature] <= best_threshold
            left = tree._new_node()
            right = tree._new_node()
            tree.feature[node] = best_feature
            tree.threshold[node] = best_threshold
            tree.left[node] = left
            tree.right[node] = right
            stack.append((left, idx[goes_left]))
            stack.append((right, idx[~goes_left]))
        return tree

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Majority vote over trees; vote ties go to the smaller class id."""
        if not self.trees:
            raise RuntimeError("forest is not fitted")
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        for tree in self.trees:
            pred = tree.predict(X)
            votes[np.arange(X.shape[0]), pred] += 1
        return votes.argmax(axis=1)

    def feature_importances(self) -> np.ndarray:
        """Per-feature mean weighted impurity decrease, normalized to sum 1.

        A forest that never split (all-constant features or pure labels)
        keeps the all-zero vector instead of dividing by zero.
        """
        if self._raw_importances is None:
            raise RuntimeError("forest is not fitted")
        total = self._raw_importances.sum()
        if total == 0.0:
            return np.zeros_like(self._raw_importances)
        return self._raw_importances / total
