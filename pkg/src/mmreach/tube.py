"""Reachable-tube boxes: regions containing every trajectory over ``[0, T]``.

Jacobian bounds are taken over the tube, so the tube must enclose all
trajectories for the resulting embedding to be valid. Two constructions
are provided: a Lipschitz inflation of the initial box (the fallback of
the continuous-time algorithm) and a sampled tube with relative padding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .integrate import IntegratorConfig, integrate
from .interval import IntervalVector, hull
from .jacobian import bound_field
from .model import NeuralOdeModel, eval_field, lipschitz_bound
from .sampling import sample_box

__all__ = ["TubeEstimate", "TubeError", "tube_lipschitz", "tube_monte_carlo", "tube_user",
           "picard_certified"]

SOURCES = ("lipschitz", "monte_carlo", "user")


class TubeError(RuntimeError):
    pass


@dataclass(frozen=True)
class TubeEstimate:
    box: IntervalVector
    source: str
    inflation: float = 0.0
    lipschitz: Optional[float] = None
    certified: Optional[bool] = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown tube source {self.source!r}")
        if not self.inflation >= 0:
            raise ValueError("inflation must be non-negative")

    def to_dict(self) -> dict:
        d = {"source": self.source, "inflation": self.inflation, **self.box.to_dict()}
        if self.lipschitz is not None:
            d["lipschitz"] = self.lipschitz
        if self.certified is not None:
            d["certified"] = self.certified
        return d


def picard_certified(model: NeuralOdeModel, x0_box: IntervalVector, tube: IntervalVector,
                     t_final: float) -> bool:
    """Check the a-priori enclosure ``x0_box + [0, T] * f(tube) ⊆ tube``.

    When it holds, no trajectory from ``x0_box`` can leave ``tube`` before
    ``t_final``, which makes the tube a proven enclosure.
    """
    F = bound_field(model, tube)
    lo = x0_box.lo + t_final * np.minimum(F.lo, 0.0)
    hi = x0_box.hi + t_final * np.maximum(F.hi, 0.0)
    return bool(np.all(tube.lo <= lo) and np.all(hi <= tube.hi))


def tube_lipschitz(model: NeuralOdeModel, x0_box: IntervalVector, t_final: float,
                   max_iter: int = 5, rtol: float = 0.01) -> TubeEstimate:
    """Inflate ``x0_box`` by ``L_f * T`` per side.

    ``L_f`` bounds the Jacobian norm over the tube itself, which depends on
    the tube, so it is refined by fixed-point iteration: evaluate on the
    current box, re-inflate, repeat until ``L_f`` moves by less than ``rtol``.
    If the iterates still move after ``max_iter`` rounds but their steps
    shrink geometrically, the extrapolated limit is accepted when it bounds
    the Jacobian over its own tube.
    """
    if not t_final > 0:
        raise ValueError("t_final must be positive")

    def done(L):
        box = x0_box.inflate(L * t_final)
        return TubeEstimate(box, "lipschitz", lipschitz=L,
                            certified=picard_certified(model, x0_box, box, t_final))

    L = lipschitz_bound(model, x0_box)
    steps = []
    for _ in range(max_iter):
        L_new = lipschitz_bound(model, x0_box.inflate(L * t_final))
        if not np.isfinite(L_new):
            break
        if abs(L_new - L) <= rtol * max(L, 1e-300):
            return done(max(L, L_new))
        steps.append(L_new - L)
        L = L_new
    if len(steps) >= 2 and steps[-1] > 0 and 0 < steps[-1] / steps[-2] < 1:
        q = steps[-1] / steps[-2]
        L_ext = L + steps[-1] * q / (1 - q) * (1 + rtol)
        if lipschitz_bound(model, x0_box.inflate(L_ext * t_final)) <= L_ext:
            return done(L_ext)
    raise TubeError(f"Lipschitz tube iteration did not stabilise (last L_f={L:.6g}); "
                    "the horizon is probably too long for a one-shot tube")


def tube_monte_carlo(model: NeuralOdeModel, x0_box: IntervalVector, t_final: float,
                     n_samples: int = 2000, inflation: float = 0.1, seed: int = 0,
                     cfg: Optional[IntegratorConfig] = None) -> TubeEstimate:
    """Sampled tube: min/max over simulated trajectories, padded by ``inflation * width``.

    Not a guaranteed enclosure; the padding absorbs unsampled extremes.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if not inflation >= 0:
        raise ValueError("inflation must be non-negative")
    x0 = sample_box(x0_box, n_samples, np.random.default_rng(seed))
    lo = x0.min(axis=0)
    hi = x0.max(axis=0)

    def track(t, y):
        np.minimum(lo, y.min(axis=0), out=lo)
        np.maximum(hi, y.max(axis=0), out=hi)

    integrate(lambda y: eval_field(model, y), x0, t_final, cfg, record=False, on_step=track)
    pad = inflation * (hi - lo + 1e-12) if inflation > 0 else 0.0
    box = hull([IntervalVector(lo - pad, hi + pad), x0_box])
    return TubeEstimate(box, "monte_carlo", inflation=float(inflation))


def tube_user(box: IntervalVector, x0_box: IntervalVector) -> TubeEstimate:
    if box.dim != x0_box.dim:
        raise ValueError("user tube dimension does not match the initial box")
    if not x0_box.issubset(box):
        raise TubeError("user tube does not contain the initial box")
    return TubeEstimate(box, "user")
