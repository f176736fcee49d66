"""Train/calibration/test partitioning for the four multi-user strategies.

MM   mixed: rows shuffled irrespective of user, 60/20/20 train/test/cal.
UDM  user-dependent: the same 60/20/20 split inside one user's rows.
UIM  user-independent: train/cal from the other users (60/40), test on
     half of the target user's rows.
UCM  user-calibrated: UIM's training rows and test rows, calibrated on the
     other half of the target user's rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import classifiers
from .conformal import PredictionRecord, calibrate
from .core import MultiUserDataset, SplitIndices, apply_scaler, fit_scaler, make_rng

MAX_RETRIES = 5
# added to the seed per retry; large enough not to collide with later repetitions
RETRY_OFFSET = 1_000_003


class StrategyKind(str, enum.Enum):
    MM = "MM"
    UDM = "UDM"
    UIM = "UIM"
    UCM = "UCM"


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierSpec:
    algorithm: str
    params: dict = field(default_factory=dict)
    name: str | None = None

    @property
    def label(self) -> str:
        return self.name or self.algorithm

    def config(self):
        return classifiers.make_config(self.algorithm, self.params)


def _holdout(rows: np.ndarray, rng: np.random.Generator) -> SplitIndices:
    n = rows.size
    if n < 5:
        raise SplitError(f"need at least 5 rows for a 60/20/20 split, got {n}")
    shuffled = rows[rng.permutation(n)]
    n_train = (6 * n) // 10
    n_test = (2 * n) // 10
    return SplitIndices(
        train=shuffled[:n_train],
        calibration=shuffled[n_train + n_test :],
        test=shuffled[n_train : n_train + n_test],
    )


def split_mixed(data: MultiUserDataset, seed: int) -> SplitIndices:
    return _holdout(np.arange(data.n_instances), make_rng(seed))


def split_user_dependent(data: MultiUserDataset, user: int, seed: int) -> SplitIndices:
    rows = data.user_rows(user)
    if rows.size == 0:
        raise SplitError(f"user {user} has no rows")
    return _holdout(rows, make_rng(seed, user))


def _loo_parts(data: MultiUserDataset, target: int, seed: int):
    if data.n_users < 2 or np.unique(data.users).size < 2:
        raise SplitError("leave-one-user-out strategies need at least two users")
    target_rows = data.user_rows(target)
    if target_rows.size < 2:
        raise SplitError(f"target user {target} needs at least two rows")
    other_rows = np.flatnonzero(data.users != target)
    rng = make_rng(seed, target)
    others = other_rows[rng.permutation(other_rows.size)]
    mine = target_rows[rng.permutation(target_rows.size)]
    n_train = (6 * others.size) // 10
    n_test = mine.size // 2
    return others[:n_train], others[n_train:], mine[:n_test], mine[n_test:]


def split_user_independent(data: MultiUserDataset, target_user: int, seed: int) -> SplitIndices:
    train, cal, test, _unused = _loo_parts(data, target_user, seed)
    return SplitIndices(train=train, calibration=cal, test=test)


def split_user_calibrated(data: MultiUserDataset, target_user: int, seed: int) -> SplitIndices:
    train, _other_cal, test, cal = _loo_parts(data, target_user, seed)
    return SplitIndices(train=train, calibration=cal, test=test)


def required_classes(data: MultiUserDataset, kind: StrategyKind, user: int | None) -> np.ndarray:
    """Classes a split's training part must contain."""
    if kind is StrategyKind.UDM:
        return np.unique(data.labels[data.user_rows(user)])
    if kind in (StrategyKind.UIM, StrategyKind.UCM):
        return np.unique(data.labels[data.users != user])
    return np.unique(data.labels)


def make_split(data: MultiUserDataset, kind: StrategyKind, seed: int, user: int | None = None):
    """Split for ``kind``, retried with shifted seeds until the training part
    holds every required class."""
    kind = StrategyKind(kind)
    needed = required_classes(data, kind, user)
    for attempt in range(MAX_RETRIES + 1):
        s = seed + attempt * RETRY_OFFSET
        if kind is StrategyKind.MM:
            split = split_mixed(data, s)
        elif kind is StrategyKind.UDM:
            split = split_user_dependent(data, user, s)
        elif kind is StrategyKind.UIM:
            split = split_user_independent(data, user, s)
        else:
            split = split_user_calibrated(data, user, s)
        if split.calibration.size and np.isin(needed, data.labels[split.train]).all():
            return split
    raise SplitError(
        f"{kind.value} split (user={user}) lacks a class in training after {MAX_RETRIES} retries"
    )


class _LocalModel(classifiers.ScoreModel):
    """Embeds a model trained on a subset of classes into the full label space."""

    def __init__(self, inner, classes: np.ndarray, n_classes: int):
        self.inner = inner
        self.classes = classes
        self.n_classes = n_classes
        self.n_features = inner.n_features

    def _scores(self, X):
        out = np.zeros((X.shape[0], self.n_classes))
        out[:, self.classes] = self.inner.predict_scores(X)
        return out


def _train(spec: ClassifierSpec, X, y, n_classes, seed):
    present = np.unique(y)
    if present.size == n_classes:
        return classifiers.fit(spec.algorithm, X, y, n_classes, spec.config(), seed)
    # a user who never performed some class (UDM only)
    local = np.searchsorted(present, y)
    inner = classifiers.fit(spec.algorithm, X, local, present.size, spec.config(), seed)
    return _LocalModel(inner, present, n_classes)


def evaluate_split(
    data: MultiUserDataset,
    split: SplitIndices,
    spec: ClassifierSpec,
    epsilon: float,
    seed: int,
) -> list[PredictionRecord]:
    """Scale on the training rows, train, calibrate and predict the test rows."""
    scaler = fit_scaler(data, split.train)
    X = apply_scaler(scaler, data.features)
    y = data.labels
    model = _train(spec, X[split.train], y[split.train], data.n_classes, seed)
    cmodel = calibrate(model, X[split.calibration], y[split.calibration], epsilon)
    return cmodel.predict(X[split.test], y[split.test], data.users[split.test])


def targets(data: MultiUserDataset) -> list[int]:
    return [int(u) for u in np.unique(data.users)]


def run_strategy(
    data: MultiUserDataset,
    kind: StrategyKind | str,
    classifier: ClassifierSpec | str,
    epsilon: float,
    seed: int,
) -> list[PredictionRecord]:
    """Prediction records of one repetition.

    MM evaluates a single split. The per-user strategies loop over every
    user as target and pool the records in user-index order.
    """
    kind = StrategyKind(kind)
    spec = classifier if isinstance(classifier, ClassifierSpec) else ClassifierSpec(classifier)
    if kind is StrategyKind.MM:
        split = make_split(data, kind, seed)
        return evaluate_split(data, split, spec, epsilon, seed)
    records: list[PredictionRecord] = []
    for user in targets(data):
        split = make_split(data, kind, seed, user)
        records.extend(evaluate_split(data, split, spec, epsilon, seed))
    return records
