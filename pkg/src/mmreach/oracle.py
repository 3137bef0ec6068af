"""Monte-Carlo ground truth, soundness counting and projection tightness."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .integrate import IntegratorConfig, flow
from .interval import IntervalVector
from .model import NeuralOdeModel
from .sampling import sample_box

__all__ = [
    "SampleCloud",
    "TightnessReport",
    "sample_successors",
    "find_violations",
    "check_soundness",
    "convex_hull",
    "polygon_area",
    "tightness",
    "cloud_to_csv",
    "SOUNDNESS_SLACK",
]

SOUNDNESS_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class SampleCloud:
    initial_points: np.ndarray
    final_points: np.ndarray
    seed: int
    t_final: float
    x0_box: Optional[IntervalVector] = None

    def __post_init__(self):
        if self.initial_points.shape != self.final_points.shape:
            raise ValueError("initial and final point arrays differ in shape")
        if self.x0_box is not None:
            inside = np.all((self.x0_box.lo <= self.initial_points)
                            & (self.initial_points <= self.x0_box.hi), axis=1)
            if not np.all(inside):
                raise ValueError("initial points outside the declared box")

    def __len__(self) -> int:
        return self.final_points.shape[0]


def sample_successors(model: NeuralOdeModel, x0_box: IntervalVector, t_final: float, n: int,
                      seed: int = 0, cfg: Optional[IntegratorConfig] = None,
                      extra_points: Optional[np.ndarray] = None) -> SampleCloud:
    """Simulate ``n`` initial points (vertices first, then uniform) to ``t_final``.

    ``extra_points`` are prepended verbatim, e.g. to inject an equilibrium.
    """
    rng = np.random.default_rng(seed)
    pts = sample_box(x0_box, n, rng)
    if extra_points is not None:
        pts = np.vstack([np.atleast_2d(np.asarray(extra_points, dtype=float)), pts])
    final = flow(model, pts, t_final, cfg)
    return SampleCloud(pts, final, seed, float(t_final), x0_box)


def _box_of(result) -> IntervalVector:
    return result.box if hasattr(result, "box") else result


def find_violations(result, cloud: SampleCloud, slack: float = SOUNDNESS_SLACK) -> np.ndarray:
    """Indices of successors outside ``result.box`` (with absolute ``slack``)."""
    box = _box_of(result)
    pts = cloud.final_points
    if pts.shape[1] != box.dim:
        raise ValueError(f"cloud dim {pts.shape[1]} vs box dim {box.dim}")
    inside = np.all((box.lo - slack <= pts) & (pts <= box.hi + slack), axis=1)
    return np.flatnonzero(~inside)


def check_soundness(result, cloud: SampleCloud, slack: float = SOUNDNESS_SLACK,
                    t_final: Optional[float] = None) -> int:
    """Number of sampled successors the over-approximation misses.

    If ``t_final`` is given it must match the cloud's horizon.
    """
    if t_final is not None and not np.isclose(t_final, cloud.t_final, rtol=0, atol=1e-12):
        raise ValueError(f"result horizon {t_final} differs from cloud horizon {cloud.t_final}")
    return int(find_violations(result, cloud, slack).size)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise convex hull (Andrew's monotone chain), collinear points dropped."""
    pts = sorted(set(map(tuple, np.asarray(points, dtype=float).reshape(-1, 2))))
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)
    lower: List[tuple] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[tuple] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def polygon_area(vertices) -> float:
    """Shoelace area of a simple polygon given in order."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


@dataclass(frozen=True)
class TightnessReport:
    per_projection: Dict[Tuple[int, int], float]
    soundness_violations: int
    n_samples: int
    degenerate: Tuple[Tuple[int, int], ...] = ()

    def to_dict(self, one_based: bool = True) -> dict:
        k = 1 if one_based else 0
        ratios = {f"{i + k}-{j + k}": (r if np.isfinite(r) else None)
                  for (i, j), r in self.per_projection.items()}
        return {
            "ratios": ratios,
            "soundness_violations": self.soundness_violations,
            "n_samples": self.n_samples,
            "degenerate": [f"{i + k}-{j + k}" for i, j in self.degenerate],
        }


def tightness(result, cloud: SampleCloud, projections: Iterable[Sequence[int]]) -> TightnessReport:
    """Box area over sample-hull area in each 2-D projection (0-based pairs).

    A zero-area sample hull yields ``inf`` and lists the pair in
    ``degenerate``.
    """
    box = _box_of(result)
    ratios: Dict[Tuple[int, int], float] = {}
    degenerate = []
    for pair in projections:
        i, j = (int(pair[0]), int(pair[1]))
        if not (0 <= i < box.dim and 0 <= j < box.dim) or i == j:
            raise ValueError(f"invalid projection {(i, j)} for dimension {box.dim}")
        box_area = float(box.width[i] * box.width[j])
        hull_area = polygon_area(convex_hull(cloud.final_points[:, [i, j]]))
        if hull_area <= 0.0:
            ratios[(i, j)] = float("inf")
            degenerate.append((i, j))
        else:
            ratios[(i, j)] = box_area / hull_area
    return TightnessReport(ratios, check_soundness(result, cloud), len(cloud), tuple(degenerate))


def cloud_to_csv(cloud: SampleCloud) -> str:
    """Successors as CSV with header ``x1..xn``; floats written with ``repr``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = cloud.final_points.shape[1]
    w.writerow([f"x{k + 1}" for k in range(n)])
    for row in cloud.final_points:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
