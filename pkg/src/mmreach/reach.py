"""Reachability drivers: single-step, incremental and boundary (facet) modes.

Two methods are available. ``ct_mm`` integrates the ``2n``-dimensional
embedded system built from Jacobian bounds over a reachable tube. ``sd_mm``
treats the flow over the horizon as one discrete map and evaluates the
sensitivity-based decomposition at the two corner pairs of the initial box.
Only ``ct_mm`` consumes a tube; ``sd_mm`` reports the envelope of the
trajectories it simulates for its sensitivity estimate.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .embedding import ShiftMatrix, ct_embedding, decomposition_pair, embedded_field, sd_embedding
from .integrate import IntegratorConfig, flow_and_sensitivity, integrate
from .interval import IntervalMatrix, IntervalVector, hull
from .jacobian import bound_jacobian
from .model import NeuralOdeModel
from .sampling import sample_box
from .tube import TubeEstimate, tube_lipschitz, tube_monte_carlo, tube_user

__all__ = [
    "ReachSpec",
    "ReachResult",
    "ReachError",
    "reach",
    "reach_ct_single",
    "reach_sd_single",
    "reach_incremental",
    "reach_boundary",
    "sensitivity_bounds",
    "facets",
]

METHODS = ("ct_mm", "sd_mm")
MODES = ("single", "incremental", "boundary")
TUBE_SOURCES = ("lipschitz", "monte_carlo", "user")


class ReachError(RuntimeError):
    """Numeric or precondition failure inside a reachability driver."""


@dataclass(frozen=True)
class ReachSpec:
    model: NeuralOdeModel
    x0_box: IntervalVector
    t_final: float
    method: str = "ct_mm"
    mode: str = "single"
    step: float = 0.05
    tube_source: str = "lipschitz"  # ct_mm only
    user_tube: Optional[IntervalVector] = None
    tube_samples: int = 2000
    tube_inflation: float = 0.1
    sensitivity_samples: int = 100
    sensitivity_inflation: float = 0.05
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    seed: int = 0

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.tube_source not in TUBE_SOURCES:
            raise ValueError(f"unknown tube source {self.tube_source!r}")
        if self.x0_box.dim != self.model.state_dim:
            raise ValueError(f"initial box of dim {self.x0_box.dim} for a {self.model.state_dim}-D model")
        if self.mode == "incremental" and not (0 < self.step <= self.t_final):
            raise ValueError("incremental mode needs 0 < step <= t_final")
        if self.tube_source == "user":
            if self.user_tube is None:
                raise ValueError("tube_source='user' needs user_tube")
            if not self.x0_box.issubset(self.user_tube):
                raise ValueError("user tube must contain the initial box")
        if self.sensitivity_samples < 1:
            raise ValueError("sensitivity_samples must be at least 1")
        if self.sensitivity_inflation < 0 or self.tube_inflation < 0:
            raise ValueError("inflations must be non-negative")

    def with_(self, **changes) -> "ReachSpec":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class ReachResult:
    box: IntervalVector
    method: str
    mode: str
    tube_used: IntervalVector
    shift_used: ShiftMatrix
    runtime_seconds: float
    steps_taken: int = 1
    per_facet: Optional[List[IntervalVector]] = None
    tube_certified: Optional[bool] = None

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = {
            "method": self.method,
            "mode": self.mode,
            "box": self.box.to_dict(),
            "tube": self.tube_used.to_dict(),
            "tube_certified": self.tube_certified,
            "shift": self.shift_used.to_dict(),
            "steps_taken": self.steps_taken,
        }
        if self.per_facet is not None:
            d["per_facet"] = [b.to_dict() for b in self.per_facet]
        if include_runtime:
            d["runtime_seconds"] = self.runtime_seconds
        return d


@dataclass(frozen=True, eq=False)
class _Step:
    box: IntervalVector
    tube: TubeEstimate
    shift: ShiftMatrix


def _tube(spec: ReachSpec, box: IntervalVector, horizon: float) -> TubeEstimate:
    if spec.tube_source == "lipschitz":
        return tube_lipschitz(spec.model, box, horizon)
    if spec.tube_source == "monte_carlo":
        return tube_monte_carlo(spec.model, box, horizon, spec.tube_samples, spec.tube_inflation,
                                spec.seed, spec.integrator)
    if not box.issubset(spec.user_tube):
        raise ReachError("current box left the user-provided tube")
    return tube_user(spec.user_tube, box)


def _ordered(lo: np.ndarray, hi: np.ndarray, what: str) -> IntervalVector:
    if np.any(lo > hi):
        bad = [int(i) for i in np.flatnonzero(lo > hi)]
        raise ReachError(f"{what} produced lower > upper bound in coordinates {bad} "
                         f"(lo={lo[bad].tolist()}, hi={hi[bad].tolist()}); "
                         "the Jacobian/sensitivity bounds do not cover the trajectories")
    return IntervalVector(lo, hi)


def _sampled_sensitivity(model: NeuralOdeModel, box: IntervalVector, horizon: float, n_samples: int,
                         inflation: float, seed: int, cfg: Optional[IntegratorConfig]):
    pts = sample_box(box, n_samples, np.random.default_rng(seed), max_corners=64)
    env_lo, env_hi = pts.min(axis=0), pts.max(axis=0)

    def track(t, x):
        np.minimum(env_lo, x.min(axis=0), out=env_lo)
        np.maximum(env_hi, x.max(axis=0), out=env_hi)

    _, S = flow_and_sensitivity(model, pts, horizon, cfg, on_step=track)
    lo, hi = S.min(axis=0), S.max(axis=0)
    # the magnitude term covers round-off on entries that are constant over the box
    pad = inflation * (hi - lo) + 1e-12 * np.maximum(np.abs(lo), np.abs(hi))
    return IntervalMatrix(lo - pad, hi + pad), IntervalVector(env_lo, env_hi)


def sensitivity_bounds(model: NeuralOdeModel, box: IntervalVector, horizon: float, n_samples: int,
                       inflation: float, seed: int,
                       cfg: Optional[IntegratorConfig] = None) -> IntervalMatrix:
    """Sampled entrywise range of the flow sensitivity over ``box``, padded.

    Samples every vertex (when ``2**n <= 64`` and they fit) plus uniform
    points, integrates the variational equation for all of them at once and
    pads each entry's range by ``inflation`` times its width (plus a
    round-off margin of ``1e-12`` times its magnitude). This is an
    estimate, not a proof: the sampled-data bound is only as good as it.
    """
    return _sampled_sensitivity(model, box, horizon, n_samples, inflation, seed, cfg)[0]


def _ct_step(spec: ReachSpec, box: IntervalVector, horizon: float) -> _Step:
    model = spec.model
    tube = _tube(spec, box, horizon)
    jac = bound_jacobian(model, tube.box)
    emb = ct_embedding(model, jac.matrix)
    n = model.state_dim
    y0 = np.concatenate([box.lo, box.hi])
    yT = integrate(embedded_field(emb), y0, horizon, spec.integrator, record=False).final
    out = _ordered(yT[:n], yT[n:], "continuous-time embedding")
    return _Step(out, tube, emb.shift)


def _sd_step(spec: ReachSpec, box: IntervalVector, horizon: float) -> _Step:
    # no tube enters the sampled-data map; report the envelope of the
    # trajectories simulated for the sensitivity estimate instead
    model = spec.model
    S, envelope = _sampled_sensitivity(model, box, horizon, spec.sensitivity_samples,
                                       spec.sensitivity_inflation, spec.seed, spec.integrator)
    tube = TubeEstimate(envelope, "monte_carlo")
    emb = sd_embedding(model, S, horizon, spec.integrator)
    lo, hi = decomposition_pair(emb, box.lo, box.hi)
    out = _ordered(lo, hi, "sampled-data decomposition")
    return _Step(out, tube, emb.shift)


def _step(spec: ReachSpec, box: IntervalVector, horizon: float) -> _Step:
    return (_ct_step if spec.method == "ct_mm" else _sd_step)(spec, box, horizon)


def _result(spec: ReachSpec, st: _Step, t0: float, **kw) -> ReachResult:
    return ReachResult(box=st.box, method=spec.method, mode=spec.mode, tube_used=st.tube.box,
                       shift_used=st.shift, runtime_seconds=time.perf_counter() - t0,
                       tube_certified=st.tube.certified, **kw)


def reach_ct_single(spec: ReachSpec) -> ReachResult:
    if spec.method != "ct_mm":
        raise ValueError("reach_ct_single needs method='ct_mm'")
    t0 = time.perf_counter()
    return _result(spec, _ct_step(spec, spec.x0_box, spec.t_final), t0)


def reach_sd_single(spec: ReachSpec) -> ReachResult:
    if spec.method != "sd_mm":
        raise ValueError("reach_sd_single needs method='sd_mm'")
    t0 = time.perf_counter()
    return _result(spec, _sd_step(spec, spec.x0_box, spec.t_final), t0)


def _n_steps(t_final: float, step: float) -> int:
    return max(1, math.ceil(t_final / step - 1e-9))


def reach_incremental(spec: ReachSpec) -> ReachResult:
    """Chain single steps of length ``spec.step``, rebuilding tube and shift each time."""
    t0 = time.perf_counter()
    n_steps = _n_steps(spec.t_final, spec.step)
    box = spec.x0_box
    tubes = []
    st = None
    t = 0.0
    for k in range(n_steps):
        t_next = spec.t_final if k == n_steps - 1 else (k + 1) * spec.step
        try:
            st = _step(spec, box, t_next - t)
        except Exception as exc:
            raise ReachError(f"incremental step {k} (t={t:.6g}..{t_next:.6g}): {exc}") from exc
        box, t = st.box, t_next
        tubes.append(st.tube)
    certified = None
    if all(tb.certified is not None for tb in tubes):
        certified = all(tb.certified for tb in tubes)
    return ReachResult(box=box, method=spec.method, mode=spec.mode,
                       tube_used=hull(tb.box for tb in tubes), shift_used=st.shift,
                       runtime_seconds=time.perf_counter() - t0, steps_taken=n_steps,
                       tube_certified=certified)


def facets(box: IntervalVector) -> List[IntervalVector]:
    """The ``2n`` faces of ``box``: coordinate ``i`` pinned to its lower, then upper end."""
    flat = [i for i in range(box.dim) if box.lo[i] == box.hi[i]]
    if flat:
        raise ReachError(f"boundary mode needs a full-dimensional box; coordinate(s) "
                         f"{[i + 1 for i in flat]} have zero width (use mode='single')")
    out = []
    for i in range(box.dim):
        for end in (box.lo[i], box.hi[i]):
            lo, hi = box.lo.copy(), box.hi.copy()
            lo[i] = hi[i] = end
            out.append(IntervalVector(lo, hi))
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MMREACH_THREADS", "1")))
    except ValueError:
        return 1


def reach_boundary(spec: ReachSpec) -> ReachResult:
    """Run the single-step driver on every facet and take the interval hull.

    The flow is a homeomorphism, so the image of the box's boundary is the
    boundary of the image; the hull of boxes enclosing the boundary image
    therefore also encloses its interior.
    """
    t0 = time.perf_counter()
    faces = facets(spec.x0_box)

    def run(face):
        return _step(spec, face, spec.t_final)

    workers = min(_threads(), len(faces))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            steps = list(pool.map(run, faces))
    else:
        steps = [run(face) for face in faces]
    per_facet = [st.box for st in steps]
    certs = [st.tube.certified for st in steps]
    return ReachResult(box=hull(per_facet), method=spec.method, mode=spec.mode,
                       tube_used=hull(st.tube.box for st in steps), shift_used=steps[-1].shift,
                       runtime_seconds=time.perf_counter() - t0, steps_taken=len(faces),
                       per_facet=per_facet,
                       tube_certified=None if None in certs else all(certs))


def reach(spec: ReachSpec) -> ReachResult:
    """Dispatch on ``spec.mode`` and ``spec.method``."""
    if spec.mode == "boundary":
        return reach_boundary(spec)
    if spec.mode == "incremental":
        return reach_incremental(spec)
    return reach_ct_single(spec) if spec.method == "ct_mm" else reach_sd_single(spec)
