"""Split conformal classification with the LAC nonconformity score."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import ScoreModel


def nonconformity(score):
    """LAC score: one minus the classifier score of the candidate label."""
    return 1.0 - np.asarray(score, dtype=float) if np.ndim(score) else 1.0 - float(score)


def quantile_rank(n_cal: int, epsilon: float) -> int:
    """1-based rank ``ceil((n + 1)(1 - epsilon))`` of the calibration threshold."""
    # rounding guards against 0.95 * 20 landing on 19.000000000000004
    return math.ceil(round((n_cal + 1) * (1.0 - epsilon), 9))


def threshold_from_scores(cal_scores: np.ndarray, epsilon: float) -> float:
    n = cal_scores.size
    m = quantile_rank(n, epsilon)
    if m > n:
        return 1.0
    return float(cal_scores[m - 1])


@dataclass(frozen=True)
class PredictionRecord:
    prediction_set: tuple[int, ...]
    p_values: np.ndarray
    point: int
    truth: int
    user: int

    def __contains__(self, label) -> bool:
        return label in self.prediction_set


@dataclass(frozen=True)
class ConformalModel:
    base: ScoreModel
    cal_scores: np.ndarray
    epsilon: float
    q_hat: float

    @property
    def n_classes(self) -> int:
        return self.base.n_classes

    @property
    def n_cal(self) -> int:
        return self.cal_scores.size

    def alphas(self, X) -> np.ndarray:
        return nonconformity(self.base.predict_scores(X))

    def p_values_from_alphas(self, alphas: np.ndarray) -> np.ndarray:
        n = self.cal_scores.size
        at_least = n - np.searchsorted(self.cal_scores, alphas, side="left")
        return (at_least + 1.0) / (n + 1.0)

    def predict(self, X, truths=None, users=None) -> list[PredictionRecord]:
        """Prediction records for every row of ``X``.

        ``truths`` and ``users`` are copied into the records; they default
        to -1 when unknown.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        scores = self.base.predict_scores(X)
        alphas = nonconformity(scores)
        pvals = self.p_values_from_alphas(alphas)
        members = alphas <= self.q_hat
        points = np.argmax(scores, axis=1)
        n = X.shape[0]
        truths = np.full(n, -1) if truths is None else np.asarray(truths)
        users = np.full(n, -1) if users is None else np.asarray(users)
        return [
            PredictionRecord(
                tuple(int(c) for c in np.flatnonzero(members[i])),
                pvals[i],
                int(points[i]),
                int(truths[i]),
                int(users[i]),
            )
            for i in range(n)
        ]


def calibrate(base: ScoreModel, X_cal, y_cal, epsilon: float) -> ConformalModel:
    """Score the calibration rows and fix the threshold for error level ``epsilon``.

    When the rank ``ceil((n+1)(1-epsilon))`` exceeds ``n`` the threshold is 1,
    so every label is admitted.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    y_cal = np.asarray(y_cal, dtype=np.int64)
    if y_cal.size == 0:
        raise ValueError("empty calibration set")
    scores = base.predict_scores(np.atleast_2d(np.asarray(X_cal, dtype=float)))
    cal = np.sort(nonconformity(scores[np.arange(y_cal.size), y_cal]))
    cal.setflags(write=False)
    return ConformalModel(base, cal, float(epsilon), threshold_from_scores(cal, epsilon))


def predict_set(model: ConformalModel, x, truth: int = -1, user: int = -1) -> PredictionRecord:
    return model.predict(np.asarray(x, dtype=float)[None, :], [truth], [user])[0]


def p_value(model: ConformalModel, x, y: int) -> float:
    alpha = nonconformity(model.base.predict_scores(x)[y])
    return float(model.p_values_from_alphas(np.asarray([alpha]))[0])


def write_records(path, records, class_names, user_names=None) -> None:
    """PredictionRecord log: ``user,truth,point,set,p_<class>...``.

    Sets are semicolon-joined class names. Without ``user_names`` the user
    column holds the user index.
    """
    class_names = list(class_names)
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["user", "truth", "point", "set"] + [f"p_{c}" for c in class_names])
        for r in records:
            user = user_names[r.user] if user_names is not None else r.user
            writer.writerow(
                [
                    user,
                    class_names[r.truth],
                    class_names[r.point],
                    ";".join(class_names[c] for c in r.prediction_set),
                ]
                + [repr(float(p)) for p in r.p_values]
            )


def read_records(path):
    """Read a record log back. Returns ``(records, class_names, user_names)``."""
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        class_names = [h[2:] for h in header[4:]]
        index = {c: i for i, c in enumerate(class_names)}
        user_names: list[str] = []
        user_index: dict[str, int] = {}
        records = []
        for row in reader:
            user = row[0]
            if user not in user_index:
                user_index[user] = len(user_names)
                user_names.append(user)
            members = tuple(sorted(index[c] for c in row[3].split(";") if c))
            records.append(
                PredictionRecord(
                    members,
                    np.array([float(v) for v in row[4:]]),
                    index[row[2]],
                    index[row[1]],
                    user_index[user],
                )
            )
    return records, class_names, user_names
