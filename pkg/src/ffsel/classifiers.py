"""Built-in classifiers: k-nearest neighbors, Gaussian naive Bayes, random forest.

All three are deterministic given (training data, parameters, seed) and
break every internal tie toward the smaller class id so repeated runs
agree bit for bit.
"""

from __future__ import annotations

import numpy as np

from .forest import ForestParams, RandomForest

__all__ = [
    "KNN",
    "GNB",
    "RF",
    "CLASSIFIERS",
    "knn_classify",
    "gaussian_nb_classify",
    "rf_classify",
    "classify",
]

KNN = "KNN"
GNB = "GNB"
RF = "RF"
CLASSIFIERS = (KNN, GNB, RF)

# Variance floor factor for Gaussian naive Bayes, relative to the largest
# per-feature variance of the training block.  Post-scaling constant
# columns otherwise produce infinite densities.
GNB_VAR_FLOOR = 1e-9


def _as_blocks(train_x, train_y, test_x):
    train_x = np.ascontiguousarray(train_x, dtype=np.float64)
    test_x = np.ascontiguousarray(test_x, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.int64)
    if train_x.ndim != 2 or test_x.ndim != 2:
        raise ValueError("feature blocks must be 2-D")
    if train_x.shape[0] == 0:
        raise ValueError("training set is empty")
    if train_x.shape[0] != train_y.shape[0]:
        raise ValueError("training rows and labels disagree in length")
    if train_x.shape[1] != test_x.shape[1]:
        raise ValueError("train and test column counts differ")
    return train_x, train_y, test_x


def knn_classify(
    train_x: np.ndarray,
    train_y: np.ndarray,
    test_x: np.ndarray,
    *,
    n_classes: int,
    k_neighbors: int = 5,
) -> np.ndarray:
    """Euclidean majority vote over the k nearest training rows.

    Distance ties keep the lower row index; vote ties pick the smaller
    class id.
    """
    train_x, train_y, test_x = _as_blocks(train_x, train_y, test_x)
    n_train = train_x.shape[0]
    if not 1 <= k_neighbors <= n_train:
        raise ValueError(
            f"k_neighbors must lie in [1, {n_train}], got {k_neighbors}"
        )
    preds = np.empty(test_x.shape[0], dtype=np.int64)
    for t in range(test_x.shape[0]):
        diff = train_x - test_x[t]
        dist2 = (diff * diff).sum(axis=1)  # squared keeps the same ordering
        nearest = np.argsort(dist2, kind="stable")[:k_neighbors]
        votes = np.bincount(train_y[nearest], minlength=n_classes)
        preds[t] = np.argmax(votes)
    return preds


def gaussian_nb_classify(
    train_x: np.ndarray,
    train_y: np.ndarray,
    test_x: np.ndarray,
    *,
    n_classes: int,
) -> np.ndarray:
    """Argmax of per-class Gaussian log-posteriors with frequency priors.

    Per-feature variances are floored at GNB_VAR_FLOOR times the largest
    overall feature variance.  Classes absent from the training block are
    never predicted.  Posterior ties pick the smaller class id.
    """
    train_x, train_y, test_x = _as_blocks(train_x, train_y, test_x)
    counts = np.bincount(train_y, minlength=n_classes)
    present = np.flatnonzero(counts)
    floor = GNB_VAR_FLOOR * float(train_x.var(axis=0).max())
    if floor == 0.0:
        floor = 1e-300  # every feature constant: keep densities finite
    means = np.empty((present.size, train_x.shape[1]))
    variances = np.empty_like(means)
    for row, c in enumerate(present):
        block = train_x[train_y == c]
        means[row] = block.mean(axis=0)
        variances[row] = block.var(axis=0)
    variances = np.maximum(variances, floor)
    log_prior = np.log(counts[present] / train_y.shape[0])
    log_norm = -0.5 * np.log(2.0 * np.pi * variances).sum(axis=1)
    sq = (test_x[:, None, :] - means[None, :, :]) ** 2
    scores = log_prior + log_norm - 0.5 * (sq / variances[None, :, :]).sum(axis=2)
    best = np.argmax(scores, axis=1)  # first max == smallest present class
    return present[best].astype(np.int64)


def rf_classify(
    train_x: np.ndarray,
    train_y: np.ndarray,
    test_x: np.ndarray,
    *,
    n_classes: int,
    forest: ForestParams | None = None,
) -> np.ndarray:
    """Majority vote over a random forest; vote ties pick the smaller class id."""
    train_x, train_y, test_x = _as_blocks(train_x, train_y, test_x)
    model = RandomForest(forest if forest is not None else ForestParams(), n_classes)
    model.fit(train_x, train_y)
    return model.predict(test_x)


def classify(
    name: str,
    train_x: np.ndarray,
    train_y: np.ndarray,
    test_x: np.ndarray,
    *,
    n_classes: int,
    k_neighbors: int = 5,
    forest: ForestParams | None = None,
) -> np.ndarray:
    """Dispatch to a classifier by name."""
    if name == KNN:
        return knn_classify(
            train_x, train_y, test_x, n_classes=n_classes, k_neighbors=k_neighbors
        )
    if name == GNB:
        return gaussian_nb_classify(train_x, train_y, test_x, n_classes=n_classes)
    if name == RF:
        return rf_classify(train_x, train_y, test_x, n_classes=n_classes, forest=forest)
    raise ValueError(f"unknown classifier: {name!r}")
