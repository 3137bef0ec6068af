"""Deterministic point sampling inside boxes."""

from __future__ import annotations

import itertools
from typing import Optional

import numpy as np

from .interval import IntervalVector


def box_corners(box: IntervalVector) -> np.ndarray:
    """All distinct vertices of ``box`` (flat coordinates contribute one value)."""
    axes = [(lo,) if lo == hi else (lo, hi) for lo, hi in zip(box.lo, box.hi)]
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, box.dim)


def sample_box(box: IntervalVector, n: int, rng: np.random.Generator,
               max_corners: Optional[int] = None) -> np.ndarray:
    """``n`` points in ``box``: every vertex first (if they fit), then uniform fill.

    Vertices are included only when all ``2**dim`` of them fit in ``n`` and,
    if given, in ``max_corners``.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    d = box.dim
    limit = n if max_corners is None else min(n, max_corners)
    pts = box_corners(box) if 2 ** d <= limit else np.empty((0, d))
    fill = n - len(pts)
    if fill > 0:
        pts = np.vstack([pts, rng.uniform(box.lo, box.hi, size=(fill, d))])
    return pts
