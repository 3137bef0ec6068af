"""Explicit Runge-Kutta integration of autonomous ODEs.

The state may be any numpy array; fields are called as ``field(y)`` and must
return an array of the same shape. Batches of initial conditions are
therefore integrated in one sweep by passing a ``(batch, n)`` state and a
field that broadcasts over the leading axis. In adaptive mode the step size
is then shared by the whole batch and controlled by its worst member.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional

import numpy as np

from .model import NeuralOdeModel, eval_field, eval_jacobian

__all__ = [
    "IntegratorConfig",
    "IntegrationError",
    "Trajectory",
    "integrate",
    "flow",
    "sensitivity",
    "flow_and_sensitivity",
]

METHODS = ("rkf45_adaptive", "rk4_fixed")


class IntegrationError(RuntimeError):
    """Raised when an integration diverges or exhausts its step budget."""


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rkf45_adaptive"
    step: float = 1e-3
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown integration method {self.method!r}; choose from {METHODS}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if int(self.max_steps) < 1:
            raise ValueError("max_steps must be at least 1")

    def with_(self, **changes) -> "IntegratorConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {"method": self.method, "step": self.step, "rel_tol": self.rel_tol,
                "abs_tol": self.abs_tol, "max_steps": self.max_steps}


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def t_final(self) -> float:
        return float(self.times[-1])


# Fehlberg 4(5) tableau
_C2, _C3, _C4, _C5, _C6 = 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2
_A21 = 1 / 4
_A31, _A32 = 3 / 32, 9 / 32
_A41, _A42, _A43 = 1932 / 2197, -7200 / 2197, 7296 / 2197
_A51, _A52, _A53, _A54 = 439 / 216, -8.0, 3680 / 513, -845 / 4104
_A61, _A62, _A63, _A64, _A65 = -8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40
_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _rkf45_step(f, y, h):
    k1 = f(y)
    k2 = f(y + h * (_A21 * k1))
    k3 = f(y + h * (_A31 * k1 + _A32 * k2))
    k4 = f(y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
    k5 = f(y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
    k6 = f(y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
    y5 = y + h * (_B5[0] * k1 + _B5[2] * k3 + _B5[3] * k4 + _B5[4] * k5 + _B5[5] * k6)
    err = h * (_E[0] * k1 + _E[2] * k3 + _E[3] * k4 + _E[4] * k5 + _E[5] * k6)
    return y5, err


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _initial_step(f, y0, t_final, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale) if y0.size else 0.0
    d1 = np.max(np.abs(f(y0)) / scale) if y0.size else 0.0
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    return float(min(max(h, 1e-10), t_final))


def integrate(
    field: Callable[[np.ndarray], np.ndarray],
    x0,
    t_final: float,
    cfg: Optional[IntegratorConfig] = None,
    *,
    record: bool = True,
    on_step: Optional[Callable[[float, np.ndarray], None]] = None,
) -> Trajectory:
    """Integrate ``y' = field(y)`` from ``y(0) = x0`` to ``t_final``.

    With ``record=False`` only the initial and final states are kept, which
    matters for large batches. ``on_step(t, y)`` is called after every
    accepted step (and once at ``t = 0``).
    """
    cfg = cfg or IntegratorConfig()
    t_final = float(t_final)
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    y = np.array(x0, dtype=float)
    f0 = np.asarray(field(y))
    if f0.shape != y.shape:
        raise ValueError(f"field returns shape {f0.shape} for state of shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite initial state")

    times: List[float] = [0.0]
    states: List[np.ndarray] = [y.copy()]
    if on_step is not None:
        on_step(0.0, y)

    def accept(t, y_new):
        if not np.all(np.isfinite(y_new)):
            raise IntegrationError(f"state became non-finite at t={t:.6g} (divergence)")
        if record:
            times.append(t)
            states.append(y_new.copy())
        if on_step is not None:
            on_step(t, y_new)

    if cfg.method == "rk4_fixed":
        n_steps = max(1, math.ceil(t_final / cfg.step - 1e-9))
        if n_steps > cfg.max_steps:
            raise IntegrationError(f"{n_steps} fixed steps exceed max_steps={cfg.max_steps}")
        h = t_final / n_steps
        for k in range(1, n_steps + 1):
            y = _rk4_step(field, y, h)
            accept(t_final if k == n_steps else k * h, y)
    else:
        t = 0.0
        h = _initial_step(field, y, t_final, cfg)
        n_steps = 0
        while t < t_final:
            if n_steps >= cfg.max_steps:
                raise IntegrationError(f"max_steps={cfg.max_steps} exceeded at t={t:.6g}")
            last = t + h >= t_final * (1.0 - 1e-13)
            if last:
                h = t_final - t
            y_new, err = _rkf45_step(field, y, h)
            n_steps += 1
            if not np.all(np.isfinite(y_new)):
                err_norm = np.inf
            else:
                scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
                err_norm = float(np.max(np.abs(err) / scale)) if y.size else 0.0
            if err_norm <= 1.0:
                t = t_final if last else t + h
                y = y_new
                accept(t, y)
                factor = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
            else:
                factor = 0.2 if not np.isfinite(err_norm) else max(0.1, 0.9 * err_norm ** -0.2)
            h = h * factor
            if h < 1e-14 * max(1.0, t_final):
                raise IntegrationError(f"step size underflow at t={t:.6g} (divergence)")

    if not record:
        times.append(t_final)
        states.append(y.copy())
    return Trajectory(np.array(times), np.array(states))


def flow(model: NeuralOdeModel, x0, t_final: float, cfg: Optional[IntegratorConfig] = None) -> np.ndarray:
    """Flow map ``Phi(t_final, x0)``; ``x0`` may be a batch ``(k, n)``."""
    return integrate(lambda y: eval_field(model, y), x0, t_final, cfg, record=False).final


def _variational_field(model: NeuralOdeModel):
    n = model.state_dim

    def field(y):
        x = y[..., :n]
        S = y[..., n:].reshape(y.shape[:-1] + (n, n))
        dS = eval_jacobian(model, x) @ S
        return np.concatenate([eval_field(model, x), dS.reshape(y.shape[:-1] + (n * n,))], axis=-1)

    return field


def flow_and_sensitivity(model: NeuralOdeModel, x0, t_final: float, cfg: Optional[IntegratorConfig] = None,
                         on_step: Optional[Callable[[float, np.ndarray], None]] = None):
    """Integrate ``x' = f(x), S' = J(x) S, S(0) = I``; return ``(Phi, S)`` at ``t_final``.

    ``on_step(t, x)`` sees the state part of every accepted step.
    """
    x0 = np.asarray(x0, dtype=float)
    n = model.state_dim
    if x0.shape[-1] != n:
        raise ValueError(f"state of shape {x0.shape} does not match state_dim {n}")
    eye = np.broadcast_to(np.eye(n).ravel(), x0.shape[:-1] + (n * n,))
    y0 = np.concatenate([x0, eye], axis=-1)
    hook = None if on_step is None else (lambda t, y: on_step(t, y[..., :n]))
    yT = integrate(_variational_field(model), y0, t_final, cfg, record=False, on_step=hook).final
    return yT[..., :n], yT[..., n:].reshape(x0.shape[:-1] + (n, n))


def sensitivity(model: NeuralOdeModel, x0, t_final: float, cfg: Optional[IntegratorConfig] = None) -> np.ndarray:
    """Sensitivity matrix ``dPhi(t_final, x0) / dx0`` via the variational equation."""
    return flow_and_sensitivity(model, x0, t_final, cfg)[1]
