"""Seeded multi-user Gaussian cluster data with per-user offsets."""

from __future__ import annotations

import numpy as np

from .core import MultiUserDataset, make_rng

MAX_REJECTIONS = 1000


def _class_centers(rng, n_classes, dims, noise, spread):
    min_dist = 4.0 * noise
    centers: list[np.ndarray] = []
    rejections = 0
    while len(centers) < n_classes:
        candidate = rng.normal(0.0, spread, size=dims)
        if all(np.linalg.norm(candidate - c) >= min_dist for c in centers):
            centers.append(candidate)
            continue
        rejections += 1
        if rejections >= MAX_REJECTIONS:
            raise RuntimeError(
                f"could not place {n_classes} centers {min_dist:g} apart after {MAX_REJECTIONS} tries"
            )
    return np.vstack(centers)


def generate(
    n_users: int,
    n_classes: int,
    per_user_per_class: int,
    dims: int,
    user_shift: float,
    noise: float,
    seed: int,
    spread: float | None = None,
) -> MultiUserDataset:
    """Instance = class center + user offset + N(0, noise^2 I).

    Class centers are drawn from N(0, spread^2 I) (default spread is
    ``4 * noise``) and kept only when at least ``4 * noise`` apart. Each
    user's offset is a uniformly random direction scaled to ``user_shift``.
    Rows are ordered user-major, then class, then draw.
    """
    if min(n_users, n_classes, per_user_per_class, dims) < 1:
        raise ValueError("all counts must be >= 1")
    if user_shift < 0 or noise <= 0:
        raise ValueError("need user_shift >= 0 and noise > 0")
    spread = 4.0 * noise if spread is None else spread
    rng = make_rng(seed)
    centers = _class_centers(rng, n_classes, dims, noise, spread)
    directions = rng.normal(size=(n_users, dims))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    offsets = user_shift * directions / np.where(norms == 0, 1.0, norms)

    users = np.repeat(np.arange(n_users), n_classes * per_user_per_class)
    labels = np.tile(np.repeat(np.arange(n_classes), per_user_per_class), n_users)
    X = centers[labels] + offsets[users] + rng.normal(0.0, noise, size=(users.size, dims))
    width = len(str(max(n_users, n_classes) - 1))
    return MultiUserDataset(
        X,
        labels,
        users,
        tuple(f"class{c:0{width}d}" for c in range(n_classes)),
        tuple(f"user{u:0{width}d}" for u in range(n_users)),
        tuple(f"x{j}" for j in range(dims)),
    )
