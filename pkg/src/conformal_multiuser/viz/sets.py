"""Data behind the prediction-set charts: co-occurrence, ZDCM, multisets."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..metrics import confusion_matrix


def _n_classes(records, n_classes):
    if not records:
        raise ValueError("no records")
    return n_classes if n_classes is not None else max(len(r.p_values) for r in records)


def column_normalize(counts: np.ndarray) -> np.ndarray:
    """Divide each column by its sum; all-zero columns stay zero."""
    counts = np.asarray(counts, dtype=float)
    sums = counts.sum(axis=0)
    return np.divide(counts, sums, out=np.zeros_like(counts), where=sums > 0)


def cooccurrence_counts(records, n_classes: int | None = None) -> np.ndarray:
    """Symmetric pair counts; each set adds one per unordered pair it contains."""
    n = _n_classes(records, n_classes)
    raw = np.zeros((n, n), dtype=np.int64)
    for r in records:
        for a, b in combinations(sorted(r.prediction_set), 2):
            raw[a, b] += 1
            raw[b, a] += 1
    return raw


def cooccurrence_matrix(records, n_classes: int | None = None) -> np.ndarray:
    return column_normalize(cooccurrence_counts(records, n_classes))


def zdcm(records, n_classes: int | None = None) -> np.ndarray:
    """Confusion matrix (predicted rows, true columns) with the diagonal
    zeroed before column normalisation."""
    cm = confusion_matrix(records, _n_classes(records, n_classes)).astype(float)
    np.fill_diagonal(cm, 0.0)
    return column_normalize(cm)


@dataclass(frozen=True)
class CooccurrenceGraph:
    n_classes: int
    edges: tuple[tuple[int, int, int], ...]  # (a, b, weight) with a < b

    @property
    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n_classes, dtype=np.int64)
        for a, b, w in self.edges:
            deg[a] += w
            deg[b] += w
        return deg


def cooccurrence_graph(records, n_classes: int | None = None) -> CooccurrenceGraph:
    raw = cooccurrence_counts(records, n_classes)
    n = raw.shape[0]
    edges = tuple(
        (a, b, int(raw[a, b])) for a in range(n) for b in range(a + 1, n) if raw[a, b] > 0
    )
    return CooccurrenceGraph(n, edges)


def set_frequencies(records, max_sets: int | None = 20) -> list[tuple[tuple[int, ...], int]]:
    """Distinct prediction sets (the empty set included) with their counts.

    Ordered by frequency, then by set size, then lexicographically on the
    class indices; truncated to ``max_sets`` entries.
    """
    if not records:
        raise ValueError("no records")
    freq = Counter(tuple(sorted(r.prediction_set)) for r in records)
    ordered = sorted(freq.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))
    return ordered if max_sets is None else ordered[:max_sets]


def box_stats(values) -> dict:
    """Quartiles by linear interpolation and 1.5 IQR whiskers."""
    v = np.sort(np.asarray(values, dtype=float))
    q1, median, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    return {
        "q1": float(q1),
        "median": float(median),
        "q3": float(q3),
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
        "outliers": [float(x) for x in v[(v < lo_fence) | (v > hi_fence)]],
        "mean": float(v.mean()),
        "n": int(v.size),
    }
