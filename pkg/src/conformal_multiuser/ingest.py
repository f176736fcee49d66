"""Loading datasets from the preprocessed and raw-stream CSV formats."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from . import features
from .core import MultiUserDataset

log = logging.getLogger(__name__)

MIN_PER_CLASS = 5
RAW_COLUMNS = ("timestamp", "user", "class", "ax", "ay", "az")


def filter_users(data: MultiUserDataset, min_per_class: int = MIN_PER_CLASS) -> MultiUserDataset:
    """Drop every user with fewer than ``min_per_class`` rows of any class
    they performed, then drop classes and users left without rows."""
    counts = data.counts()
    bad = ((counts > 0) & (counts < min_per_class)).any(axis=1)
    for u in np.flatnonzero(bad):
        log.info("dropping user %s: a class has fewer than %d instances", data.user_names[u], min_per_class)
    keep = ~bad[data.users]
    if not keep.any():
        raise ValueError("no user survives the per-class instance filter")
    kept = data.subset(np.flatnonzero(keep))
    used_classes = np.unique(kept.labels)
    used_users = np.unique(kept.users)
    return MultiUserDataset(
        kept.features,
        np.searchsorted(used_classes, kept.labels),
        np.searchsorted(used_users, kept.users),
        tuple(data.class_names[c] for c in used_classes),
        tuple(data.user_names[u] for u in used_users),
        data.feature_names,
    )


def read_preprocessed(path) -> MultiUserDataset:
    frame = MultiUserDataset.read_frame(path)
    before = len(frame)
    frame = frame.dropna().reset_index(drop=True)
    if len(frame) < before:
        log.info("dropped %d rows with missing values", before - len(frame))
    return MultiUserDataset.from_frame(frame)


def _read_stream(path) -> pd.DataFrame:
    frame = MultiUserDataset.read_frame(path)
    missing = set(RAW_COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    return frame[list(RAW_COLUMNS)].dropna()


def read_raw_streams(paths, window_len: int = 150, filter_width: int = 10) -> MultiUserDataset:
    """Windowed features from one raw stream per sensor.

    Sensors are joined on (user, timestamp); rows whose class labels
    disagree between sensors are dropped. Each user's stream is smoothed
    with a trailing moving average before being cut into windows, and the
    16 features of every sensor are concatenated.
    """
    paths = [paths] if isinstance(paths, (str, Path)) else list(paths)
    if not paths:
        raise ValueError("no raw stream files given")
    joined = None
    for i, path in enumerate(paths):
        f = _read_stream(path).rename(
            columns={"class": f"class_{i}", "ax": f"ax_{i}", "ay": f"ay_{i}", "az": f"az_{i}"}
        )
        joined = f if joined is None else joined.merge(f, on=["user", "timestamp"], how="inner")
    n_sensors = len(paths)
    agree = np.ones(len(joined), dtype=bool)
    for i in range(1, n_sensors):
        agree &= (joined[f"class_{i}"] == joined["class_0"]).to_numpy()
    joined = joined[agree]

    rows, users, labels = [], [], []
    for user, stream in joined.groupby("user", sort=False):
        stream = stream.sort_values("timestamp", kind="stable")
        cls = stream["class_0"].to_numpy()
        per_sensor = []
        for i in range(n_sensors):
            raw = stream[[f"ax_{i}", f"ay_{i}", f"az_{i}"]].to_numpy(dtype=float)
            smooth = features.moving_average(raw, filter_width)
            per_sensor.append(features.windowize(smooth, cls, window_len, str(user)))
        for windows in zip(*per_sensor):
            rows.append(np.concatenate([features.extract_features(w) for w in windows]))
            users.append(str(user))
            labels.append(windows[0].label)
    names = features.feature_names(n_sensors)
    if not rows:
        raise ValueError("no complete single-label window in the raw streams")
    frame = pd.DataFrame(np.vstack(rows), columns=list(names))
    frame.insert(0, "class", labels)
    frame.insert(0, "user", users)
    return MultiUserDataset.from_frame(frame)


def ingest(path, format: str = "preprocessed", window_len: int = 150, filter_width: int = 10,
           min_per_class: int = MIN_PER_CLASS) -> MultiUserDataset:
    """Read a dataset and apply the per-user class-count filter.

    ``path`` is a single CSV for ``preprocessed`` and one CSV (or a list,
    one per sensor) for ``raw-stream``.
    """
    if format == "preprocessed":
        data = read_preprocessed(path)
    elif format == "raw-stream":
        data = read_raw_streams(path, window_len, filter_width)
    else:
        raise ValueError(f"unknown format {format!r}; use 'preprocessed' or 'raw-stream'")
    return filter_users(data, min_per_class)
