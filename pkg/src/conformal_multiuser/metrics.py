"""Non-conformal and conformal performance measures over prediction records."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .conformal import PredictionRecord

# row order of the report tables
REPORT_ROWS = (
    ("accuracy", "accuracy"),
    ("sensitivity", "sensitivity"),
    ("specificity", "specificity"),
    ("F1", "f1"),
    ("coverage", "coverage"),
    ("jaccard", "jaccard"),
    ("setsize", "setsize"),
    ("pctempty", "pctempty"),
    ("MCriterion", "m_criterion"),
    ("FCriterion", "f_criterion"),
    ("OM", "om"),
    ("OF", "of"),
    ("OU", "ou"),
    ("OE", "oe"),
)
# reported as percentages, like the published tables
PERCENT_METRICS = frozenset({"accuracy", "sensitivity", "specificity", "f1", "coverage"})


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    sensitivity: float
    specificity: float
    precision: float
    recall: float
    f1: float
    coverage: float
    jaccard: float
    setsize: float
    pctempty: float
    m_criterion: float
    f_criterion: float
    om: float
    of: float
    ou: float
    oe: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


def _n_classes(records, n_classes):
    if n_classes is not None:
        return n_classes
    return max(len(r.p_values) for r in records)


def confusion_matrix(records, n_classes: int | None = None) -> np.ndarray:
    """Counts with predicted classes on rows and true classes on columns."""
    if not records:
        raise ValueError("no records")
    n = _n_classes(records, n_classes)
    cm = np.zeros((n, n), dtype=np.int64)
    for r in records:
        cm[r.point, r.truth] += 1
    return cm


def _ratio(num, den):
    return np.divide(num, den, out=np.zeros_like(num, dtype=float), where=den > 0)


def nonconformal_metrics(records, n_classes: int | None = None) -> dict[str, float]:
    """Accuracy plus macro-averaged one-vs-rest rates. 0/0 counts as 0."""
    cm = confusion_matrix(records, n_classes).astype(float)
    total = cm.sum()
    tp = np.diag(cm)
    fp = cm.sum(axis=1) - tp
    fn = cm.sum(axis=0) - tp
    tn = total - tp - fp - fn
    sensitivity = _ratio(tp, tp + fn)
    specificity = _ratio(tn, tn + fp)
    precision = _ratio(tp, tp + fp)
    f1 = _ratio(2 * precision * sensitivity, precision + sensitivity)
    return {
        "accuracy": float(tp.sum() / total),
        "sensitivity": float(sensitivity.mean()),
        "specificity": float(specificity.mean()),
        "precision": float(precision.mean()),
        "recall": float(sensitivity.mean()),
        "f1": float(f1.mean()),
    }


def set_matrix(records, n_classes: int) -> np.ndarray:
    """Boolean membership matrix ``[k, n_classes]``."""
    sets = np.zeros((len(records), n_classes), dtype=bool)
    for i, r in enumerate(records):
        sets[i, list(r.prediction_set)] = True
    return sets


def conformal_metrics(records, n_classes: int | None = None) -> dict[str, float]:
    if not records:
        raise ValueError("no records")
    n = _n_classes(records, n_classes)
    k = len(records)
    sets = set_matrix(records, n)
    pvals = np.vstack([r.p_values for r in records])
    truth = np.array([r.truth for r in records])
    rows = np.arange(k)

    size = sets.sum(axis=1)
    hit = sets[rows, truth]
    false_mask = np.ones((k, n), dtype=bool)
    false_mask[rows, truth] = False
    false_in_set = (sets & false_mask).sum(axis=1)
    union = size + (~hit)
    false_p = np.where(false_mask, pvals, 0.0)
    coverage, oe = float(hit.mean()), float(false_in_set.mean())
    return {
        "coverage": coverage,
        "jaccard": float((hit / union).mean()),
        # |set| = hit + false members, summed here so the reported fields agree
        # bit for bit; this is within one rounding step of size.mean()
        "setsize": coverage + oe,
        "pctempty": float((size == 0).mean()),
        "m_criterion": float((size > 1).mean()),
        "f_criterion": float((pvals.sum(axis=1) - pvals.max(axis=1)).mean()),
        "om": float((false_in_set > 0).mean()),
        "of": float(false_p.sum(axis=1).mean()),
        "ou": float(false_p.max(axis=1).mean()),
        "oe": oe,
    }


def evaluate(records, n_classes: int | None = None) -> MetricsReport:
    return MetricsReport(**nonconformal_metrics(records, n_classes), **conformal_metrics(records, n_classes))


def per_user(records, n_classes: int | None = None) -> dict[int, MetricsReport]:
    groups: dict[int, list[PredictionRecord]] = {}
    for r in records:
        groups.setdefault(r.user, []).append(r)
    return {u: evaluate(groups[u], n_classes) for u in sorted(groups)}
