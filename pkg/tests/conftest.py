"""Shared dataset builders for the test suite."""

import numpy as np

from ffsel import Dataset


def make_dataset(features, labels, name="toy"):
    """Wrap raw arrays in a Dataset, inventing feature and class names."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n_classes = int(labels.max()) + 1
    feature_names = tuple(f"f{i}" for i in range(features.shape[1]))
    class_names = tuple(f"c{i}" for i in range(n_classes))
    return Dataset(name, features, feature_names, labels, class_names)


def random_dataset(rng, n_rows, n_cols, n_classes=2, name="rand"):
    """Gaussian features with labels guaranteed to cover every class."""
    features = rng.normal(size=(n_rows, n_cols))
    labels = rng.integers(0, n_classes, size=n_rows)
    labels[:n_classes] = np.arange(n_classes)
    return make_dataset(features, labels, name)


def separable_dataset(rng, n_rows=60, n_cols=6, shift=4.0, name="sep"):
    """Two well-separated Gaussian blobs; every column carries the signal."""
    half = n_rows // 2
    labels = np.repeat([0, 1], (half, n_rows - half))
    features = rng.normal(size=(n_rows, n_cols)) + shift * labels[:, None]
    return make_dataset(features, labels, name)


def write_csv(path, features, labels, label_name="label", class_names=None):
    """Write a small labeled CSV the loader should accept."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    header = [f"f{i}" for i in range(features.shape[1])] + [label_name]
    lines = [",".join(header)]
    for row, lab in zip(features, labels):
        if class_names is not None:
            lab = class_names[int(lab)]
        lines.append(",".join(repr(float(v)) for v in row) + f",{lab}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
