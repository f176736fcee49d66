"""Accelerometer windowing, smoothing and per-window feature extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AXES = ("x", "y", "z")
FEATURE_NAMES = (
    *(f"mean_{a}" for a in AXES),
    *(f"std_{a}" for a in AXES),
    *(f"max_{a}" for a in AXES),
    "corr_xy",
    "corr_xz",
    "corr_yz",
    "mean_mag",
    "std_mag",
    "auc",
    "mean_diff",
)


@dataclass(frozen=True)
class SensorWindow:
    samples: np.ndarray  # [window_len, 3]
    user: str
    label: str

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 3:
            raise ValueError("a window needs exactly three axes")
        if s.shape[0] < 2:
            raise ValueError("a window needs at least two samples")
        object.__setattr__(self, "samples", s)


def moving_average(series, width: int) -> np.ndarray:
    """Trailing moving average; the first ``width - 1`` outputs average the
    samples available so far, so the output length equals the input length."""
    s = np.asarray(series, dtype=float)
    if width < 1:
        raise ValueError("width must be >= 1")
    if s.shape[0] == 0:
        raise ValueError("empty series")
    csum = np.cumsum(np.concatenate([np.zeros((1,) + s.shape[1:]), s]), axis=0)
    idx = np.arange(1, s.shape[0] + 1)
    lo = np.maximum(0, idx - width)
    counts = (idx - lo).reshape((-1,) + (1,) * (s.ndim - 1))
    return (csum[idx] - csum[lo]) / counts


def _corr(a: np.ndarray, b: np.ndarray) -> float:
    da, db = a - a.mean(), b - b.mean()
    denom = np.sqrt((da * da).sum() * (db * db).sum())
    if denom == 0.0:
        return 0.0
    return float((da * db).sum() / denom)


def extract_features(window: SensorWindow | np.ndarray) -> np.ndarray:
    s = window.samples if isinstance(window, SensorWindow) else SensorWindow(window, "", "").samples
    mag = np.sqrt((s * s).sum(axis=1))
    x, y, z = s.T
    return np.concatenate(
        [
            s.mean(axis=0),
            s.std(axis=0, ddof=1),
            s.max(axis=0),
            [_corr(x, y), _corr(x, z), _corr(y, z)],
            [mag.mean(), mag.std(ddof=1), mag.sum(), np.abs(np.diff(s, axis=0)).mean()],
        ]
    )


def windowize(samples, labels, window_len: int, user: str = "") -> list[SensorWindow]:
    """Cut a time-ordered stream into non-overlapping windows.

    Windows whose samples carry more than one label are dropped, as is the
    trailing partial window.
    """
    samples = np.asarray(samples, dtype=float)
    labels = np.asarray(labels)
    out = []
    for start in range(0, samples.shape[0] - window_len + 1, window_len):
        lab = labels[start : start + window_len]
        if np.all(lab == lab[0]):
            out.append(SensorWindow(samples[start : start + window_len], user, str(lab[0])))
    return out


def feature_names(n_sensors: int = 1) -> tuple[str, ...]:
    if n_sensors == 1:
        return FEATURE_NAMES
    return tuple(f"s{i + 1}_{name}" for i in range(n_sensors) for name in FEATURE_NAMES)
