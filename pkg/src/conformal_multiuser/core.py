"""Dataset representation, split containers and train-only min-max scaling."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class MultiUserDataset:
    """Feature matrix with per-row class and user indices.

    ``labels[i]`` indexes into ``class_names`` and ``users[i]`` into
    ``user_names``. Instances are immutable once built; ingestion creates
    new datasets instead of editing in place.
    """

    features: np.ndarray
    labels: np.ndarray
    users: np.ndarray
    class_names: tuple[str, ...]
    user_names: tuple[str, ...]
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        users = np.asarray(self.users, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n = features.shape[0]
        if labels.shape != (n,) or users.shape != (n,):
            raise ValueError("labels and users must have one entry per row")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain NaN or infinite values")
        class_names = tuple(str(c) for c in self.class_names)
        user_names = tuple(str(u) for u in self.user_names)
        feature_names = tuple(str(f) for f in self.feature_names) or tuple(
            f"f{j}" for j in range(features.shape[1])
        )
        if len(feature_names) != features.shape[1]:
            raise ValueError("feature_names length does not match feature count")
        if n and (labels.min() < 0 or labels.max() >= len(class_names)):
            raise ValueError("class index out of range")
        if n and (users.min() < 0 or users.max() >= len(user_names)):
            raise ValueError("user index out of range")
        for arr in (features, labels, users):
            arr.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "class_names", class_names)
        object.__setattr__(self, "user_names", user_names)
        object.__setattr__(self, "feature_names", feature_names)

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def n_users(self) -> int:
        return len(self.user_names)

    def user_rows(self, user: int) -> np.ndarray:
        return np.flatnonzero(self.users == user)

    def counts(self) -> np.ndarray:
        """Instance counts as a ``[n_users, n_classes]`` table."""
        table = np.zeros((self.n_users, self.n_classes), dtype=np.int64)
        np.add.at(table, (self.users, self.labels), 1)
        return table

    def subset(self, rows) -> MultiUserDataset:
        rows = np.asarray(rows, dtype=np.int64)
        return MultiUserDataset(
            self.features[rows],
            self.labels[rows],
            self.users[rows],
            self.class_names,
            self.user_names,
            self.feature_names,
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.features.copy(), columns=list(self.feature_names))
        frame.insert(0, "class", [self.class_names[c] for c in self.labels])
        frame.insert(0, "user", [self.user_names[u] for u in self.users])
        return frame

    def to_csv(self, path) -> None:
        """Write the preprocessed-dataset CSV (``user,class,<features...>``)."""
        frame = self.to_frame()
        frame.to_csv(Path(path), index=False, float_format="%.17g", lineterminator="\n")

    @staticmethod
    def read_frame(path) -> pd.DataFrame:
        return pd.read_csv(
            Path(path), dtype={"user": str, "class": str}, float_precision="round_trip"
        )

    @classmethod
    def read_csv(cls, path) -> MultiUserDataset:
        return cls.from_frame(cls.read_frame(path))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> MultiUserDataset:
        """Build a dataset from a frame with ``user``, ``class`` and numeric columns.

        Names are indexed in order of first appearance.
        """
        missing = {"user", "class"} - set(frame.columns)
        if missing:
            raise ValueError(f"missing required columns: {sorted(missing)}")
        feature_cols = [c for c in frame.columns if c not in ("user", "class")]
        user_codes, user_names = pd.factorize(frame["user"].astype(str), sort=False)
        class_codes, class_names = pd.factorize(frame["class"].astype(str), sort=False)
        return cls(
            frame[feature_cols].to_numpy(dtype=float),
            class_codes,
            user_codes,
            tuple(class_names),
            tuple(user_names),
            tuple(feature_cols),
        )


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    calibration: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("train", "calibration", "test"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, arr)
        if self.train.size == 0 or self.test.size == 0:
            raise ValueError("train and test parts must be non-empty")
        parts = np.concatenate([self.train, self.calibration, self.test])
        if np.unique(parts).size != parts.size:
            raise ValueError("split parts overlap")


@dataclass(frozen=True)
class ScaleParams:
    minimum: np.ndarray
    maximum: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.any(self.minimum > self.maximum):
            raise ValueError("min must not exceed max")


def fit_scaler(data: MultiUserDataset | np.ndarray, rows) -> ScaleParams:
    """Per-feature min and max over exactly ``rows``."""
    features = data.features if isinstance(data, MultiUserDataset) else np.asarray(data, float)
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("cannot fit a scaler on an empty row set")
    block = features[rows]
    return ScaleParams(block.min(axis=0), block.max(axis=0))


def apply_scaler(params: ScaleParams, x) -> np.ndarray:
    """Map ``x`` (a vector or a matrix of row vectors) to ``(x - min) / (max - min)``.

    Constant features map to 0. Values are not clamped, so test rows
    outside the training range extrapolate linearly.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.minimum.shape[0]:
        raise ValueError(
            f"dimension mismatch: got {x.shape[-1]}, scaler has {params.minimum.shape[0]}"
        )
    span = params.maximum - params.minimum
    constant = span == 0
    safe = np.where(constant, 1.0, span)
    out = (x - params.minimum) / safe
    return np.where(constant, 0.0, out)


def repetition_seed(base_seed: int, repetition: int) -> int:
    return int(base_seed) + int(repetition)


def make_rng(*key: int) -> np.random.Generator:
    """Independent generator for a tuple of non-negative integer keys."""
    return np.random.default_rng([int(k) for k in key])
