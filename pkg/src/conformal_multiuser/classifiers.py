"""Score-producing classifiers: Gaussian naive Bayes, k-NN and a random forest.

Every model maps feature rows to a vector of per-class scores that lies in
[0, 1] and sums to one. The point prediction is the argmax, with the lowest
class index winning ties (``np.argmax`` semantics).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import make_rng

ALGORITHMS = ("gnb", "knn", "rf")


@dataclass(frozen=True)
class GNBConfig:
    var_smoothing: float = 1e-9


@dataclass(frozen=True)
class KNNConfig:
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    # None -> ceil(sqrt(d)); an int is used as-is (capped at d)
    features_per_split: int | None = None
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be a positive integer")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")

    def n_candidates(self, n_features: int) -> int:
        if self.features_per_split is None:
            return max(1, math.ceil(math.sqrt(n_features)))
        return max(1, min(int(self.features_per_split), n_features))


CONFIG_TYPES = {"gnb": GNBConfig, "knn": KNNConfig, "rf": ForestConfig}


def make_config(algorithm: str, params: dict | None = None):
    if algorithm not in CONFIG_TYPES:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    return CONFIG_TYPES[algorithm](**(params or {}))


class ScoreModel:
    """Base class for trained classifiers."""

    n_classes: int
    n_features: int

    def _scores(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_scores(self, x) -> np.ndarray:
        """Scores for one feature vector (returns ``[n_classes]``) or a matrix
        of rows (returns ``[n_rows, n_classes]``)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[None, :] if single else x
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"dimension mismatch: model expects {self.n_features} features, got {X.shape[-1]}"
            )
        scores = self._scores(X)
        return scores[0] if single else scores

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.predict_scores(x), axis=-1)


def _check_training(X, y, n_classes):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be [n, d] with one label per row")
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError("label out of range")
    counts = np.bincount(y, minlength=n_classes)
    absent = np.flatnonzero(counts == 0)
    if absent.size:
        raise ValueError(f"classes {absent.tolist()} have no training instances")
    return X, y, counts


class GaussianNB(ScoreModel):
    def __init__(self, config: GNBConfig | None = None):
        self.config = config or GNBConfig()

    def fit(self, X, y, n_classes: int) -> GaussianNB:
        X, y, counts = _check_training(X, y, n_classes)
        self.n_classes = n_classes
        self.n_features = X.shape[1]
        self.priors_ = counts / counts.sum()
        self.means_ = np.vstack([X[y == c].mean(axis=0) for c in range(n_classes)])
        var = np.vstack([X[y == c].var(axis=0) for c in range(n_classes)])
        largest = X.var(axis=0).max()
        # all-constant training data would otherwise leave a zero floor
        self.epsilon_ = self.config.var_smoothing * (largest if largest > 0 else 1.0)
        self.vars_ = var + self.epsilon_
        return self

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        log_norm = -0.5 * np.log(2.0 * np.pi * self.vars_).sum(axis=1)
        diff = X[:, None, :] - self.means_[None, :, :]
        quad = -0.5 * (diff**2 / self.vars_[None, :, :]).sum(axis=2)
        return np.log(self.priors_) + log_norm + quad

    def _scores(self, X):
        jll = self.joint_log_likelihood(X)
        jll -= jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)


class KNearestNeighbors(ScoreModel):
    """Lazy k-NN; the score of a class is the fraction of the k nearest
    training rows carrying it. Distance ties go to the earlier training row."""

    def __init__(self, config: KNNConfig | None = None):
        self.config = config or KNNConfig()

    def fit(self, X, y, n_classes: int) -> KNearestNeighbors:
        X, y, _ = _check_training(X, y, n_classes)
        self.n_classes = n_classes
        self.n_features = X.shape[1]
        self.X_ = X.copy()
        self.y_ = y.copy()
        self.k_ = min(self.config.k, X.shape[0])
        return self

    def neighbors(self, X: np.ndarray, chunk: int = 256) -> np.ndarray:
        out = np.empty((X.shape[0], self.k_), dtype=np.int64)
        for start in range(0, X.shape[0], chunk):
            block = X[start : start + chunk]
            d2 = ((block[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
            out[start : start + chunk] = np.argsort(d2, axis=1, kind="stable")[:, : self.k_]
        return out

    def _scores(self, X):
        labels = self.y_[self.neighbors(X)]
        counts = np.zeros((X.shape[0], self.n_classes))
        np.add.at(counts, (np.repeat(np.arange(X.shape[0]), self.k_), labels.ravel()), 1.0)
        return counts / self.k_


@dataclass
class _Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray = field(repr=False)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.left[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.left[node] >= 0
        return node

    @property
    def n_leaves(self) -> int:
        return int((self.left < 0).sum())


def _best_split(Xn, yn, n_classes, features):
    """Best Gini split over ``features`` for one node.

    Returns ``(feature, threshold)`` or ``None`` when every candidate feature
    is constant within the node.
    """
    n = Xn.shape[0]
    cols = Xn[:, features]
    order = np.argsort(cols, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(cols, order, axis=0)
    onehot = np.eye(n_classes)[yn[order]]  # [n, m, C]
    left = np.cumsum(onehot, axis=0)[:-1]
    total = left[-1] + onehot[-1]
    right = total[None] - left
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    # minimising weighted Gini == maximising sum(c^2)/n on both sides
    purity = (left**2).sum(axis=2) / n_left + (right**2).sum(axis=2) / n_right
    valid = sorted_vals[1:] > sorted_vals[:-1]
    if not valid.any():
        return None
    purity = np.where(valid, purity, -np.inf).T  # feature-major for tie order
    j, i = np.unravel_index(np.argmax(purity), purity.shape)
    threshold = 0.5 * (sorted_vals[i, j] + sorted_vals[i + 1, j])
    if not threshold < sorted_vals[i + 1, j]:
        threshold = sorted_vals[i, j]
    return int(features[j]), float(threshold)


def build_tree(X, y, n_classes, config: ForestConfig, rng: np.random.Generator) -> _Tree:
    n, d = X.shape
    if config.bootstrap:
        sample = rng.integers(0, n, size=n)
    else:
        sample = np.arange(n)
    mtry = config.n_candidates(d)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts = np.bincount(y[idx], minlength=n_classes).astype(float)
        value.append(counts / counts.sum())
        return len(feature) - 1

    stack = [(new_node(sample), sample, 0)]
    while stack:
        node, idx, depth = stack.pop()
        if (
            idx.size < config.min_samples_split
            or (config.max_depth is not None and depth >= config.max_depth)
            or value[node].max() == 1.0
        ):
            continue
        features = rng.choice(d, size=mtry, replace=False)
        split = _best_split(X[idx], y[idx], n_classes, features)
        if split is None:
            continue
        f, t = split
        mask = X[idx, f] <= t
        feature[node], threshold[node] = f, t
        left_idx, right_idx = idx[mask], idx[~mask]
        left[node] = new_node(left_idx)
        right[node] = new_node(right_idx)
        stack.append((right[node], right_idx, depth + 1))
        stack.append((left[node], left_idx, depth + 1))

    return _Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.vstack(value),
    )


class RandomForest(ScoreModel):
    """Bagged Gini trees; forest score is the mean of the leaf class frequencies."""

    def __init__(self, config: ForestConfig | None = None, seed: int = 0):
        self.config = config or ForestConfig()
        self.seed = int(seed)

    def fit(self, X, y, n_classes: int) -> RandomForest:
        X, y, _ = _check_training(X, y, n_classes)
        self.n_classes = n_classes
        self.n_features = X.shape[1]
        # one stream per tree keeps forests independent of build order
        self.trees_ = [
            build_tree(X, y, n_classes, self.config, make_rng(self.seed, t))
            for t in range(self.config.n_trees)
        ]
        return self

    def _scores(self, X):
        total = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees_:
            total += tree.value[tree.apply(X)]
        return total / len(self.trees_)


def fit(algorithm: str, X, y, n_classes: int, config=None, seed: int = 0) -> ScoreModel:
    """Train one of ``gnb``, ``knn`` or ``rf`` on ``(X, y)``.

    ``config`` may be a config dataclass, a dict of its fields, or None for
    defaults. Every class in ``range(n_classes)`` must occur in ``y``.
    """
    if config is None or isinstance(config, dict):
        config = make_config(algorithm, config)
    if algorithm == "gnb":
        return GaussianNB(config).fit(X, y, n_classes)
    if algorithm == "knn":
        return KNearestNeighbors(config).fit(X, y, n_classes)
    if algorithm == "rf":
        return RandomForest(config, seed).fit(X, y, n_classes)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def predict_scores(model: ScoreModel, x) -> np.ndarray:
    return model.predict_scores(x)
