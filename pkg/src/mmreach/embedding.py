"""Shifted-Jacobian decomposition functions and the embedded monotone system.

Given entrywise bounds ``[M_lo, M_hi]`` on a derivative matrix (the Jacobian
of ``f`` in continuous time, the sensitivity of the flow in sampled-data
mode) a shift ``L`` is picked so that every ``[M_lo + L, M_hi + L]`` keeps
one sign. The decomposition

    g_i(x, xh) = base_i(xi_i) + sum_j |L_ij| (x_j - xh_j)

with ``xi_i[j] = x_j`` where the shifted entry is non-negative and ``xh_j``
where it is non-positive is then increasing in ``x`` and decreasing in
``xh``, and ``g(x, x) = base(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .integrate import IntegratorConfig, flow
from .interval import IntervalMatrix
from .model import NeuralOdeModel, eval_field

__all__ = [
    "ShiftMatrix",
    "Embedding",
    "shift_value",
    "build_shift",
    "make_embedding",
    "ct_embedding",
    "sd_embedding",
    "decomposition",
    "embedded_field",
]

BASES = ("jacobian", "sensitivity")


def shift_value(lo: float, hi: float) -> float:
    """Smallest-magnitude ``y`` with ``[lo + y, hi + y]`` not straddling zero.

    Ties ``|lo| == |hi|`` shift upwards.
    """
    if lo > hi:
        raise ValueError(f"inverted bounds ({lo}, {hi})")
    if abs(lo) <= abs(hi):
        return max(0.0, -lo)
    return min(0.0, -hi)


def _shift_array(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    up = np.abs(lo) <= np.abs(hi)
    return np.where(up, np.maximum(0.0, -lo), np.minimum(0.0, -hi))


@dataclass(frozen=True, eq=False)
class ShiftMatrix:
    entries: np.ndarray
    basis: str

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        e = np.array(self.entries, dtype=float)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def to_dict(self) -> dict:
        return {"basis": self.basis, "entries": self.entries.tolist()}


def build_shift(bounds: IntervalMatrix, basis: str = "jacobian") -> ShiftMatrix:
    """Shift every entry to the nearest sign-stable half-line.

    The Jacobian basis leaves the diagonal alone (continuous-time monotonicity
    places no sign requirement on it); the sensitivity basis shifts all
    entries, diagonal included.
    """
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}")
    n, m = bounds.shape
    if n != m:
        raise ValueError(f"shift needs a square matrix, got {bounds.shape}")
    L = _shift_array(bounds.lo, bounds.hi)
    if basis == "jacobian":
        np.fill_diagonal(L, 0.0)
    return ShiftMatrix(L, basis)


@dataclass(frozen=True, eq=False)
class Embedding:
    """Decomposition data: shift ``L``, selector and the base map.

    ``selector[i, j]`` is True when ``xi_i`` takes ``x_j`` (first argument),
    False when it takes ``xh_j``. ``base`` maps a ``(k, n)`` batch of states
    to ``(k, n)``.
    """

    shift: ShiftMatrix
    selector: np.ndarray
    base: Callable[[np.ndarray], np.ndarray]
    bounds: Optional[IntervalMatrix] = None

    @property
    def basis(self) -> str:
        return self.shift.basis

    @property
    def n(self) -> int:
        return self.shift.n


def make_embedding(bounds: IntervalMatrix, basis: str, base) -> Embedding:
    """Build shift and selector from derivative bounds.

    The selector follows the sign of the *shifted* entry: an entry that is
    already non-positive gets zero shift and must still read ``xh_j``,
    otherwise ``g`` would decrease in its first argument.
    """
    shift = build_shift(bounds, basis)
    selector = (bounds.lo + shift.entries) >= 0.0
    if basis == "jacobian":
        np.fill_diagonal(selector, True)
    selector.setflags(write=False)
    return Embedding(shift, selector, base, bounds)


def ct_embedding(model: NeuralOdeModel, jac_bounds: IntervalMatrix) -> Embedding:
    return make_embedding(jac_bounds, "jacobian", lambda X: eval_field(model, X))


def sd_embedding(model: NeuralOdeModel, sens_bounds: IntervalMatrix, t_final: float,
                 cfg: Optional[IntegratorConfig] = None) -> Embedding:
    return make_embedding(sens_bounds, "sensitivity", lambda X: flow(model, X, t_final, cfg))


def _check_pair(emb: Embedding, x, x_hat):
    x = np.asarray(x, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if x.shape != (emb.n,) or x_hat.shape != (emb.n,):
        raise ValueError(f"expected two vectors of length {emb.n}, got {x.shape} and {x_hat.shape}")
    return x, x_hat


def decomposition(emb: Embedding, x, x_hat) -> np.ndarray:
    """Evaluate ``g(x, x_hat)``."""
    x, x_hat = _check_pair(emb, x, x_hat)
    Xi = np.where(emb.selector, x, x_hat)
    vals = np.asarray(emb.base(Xi))
    return np.diagonal(vals).copy() + np.abs(emb.shift.entries) @ (x - x_hat)


def decomposition_pair(emb: Embedding, x, x_hat):
    """``(g(x, x_hat), g(x_hat, x))`` with a single batched base evaluation."""
    x, x_hat = _check_pair(emb, x, x_hat)
    n = emb.n
    Xi = np.concatenate([np.where(emb.selector, x, x_hat), np.where(emb.selector, x_hat, x)])
    vals = np.asarray(emb.base(Xi))
    corr = np.abs(emb.shift.entries) @ (x - x_hat)
    idx = np.arange(n)
    return vals[idx, idx] + corr, vals[n + idx, idx] - corr


def embedded_field(emb: Embedding) -> Callable[[np.ndarray], np.ndarray]:
    """The ``2n``-dimensional field ``h(x, xh) = (g(x, xh), g(xh, x))``."""
    if emb.basis != "jacobian":
        raise ValueError("the embedded ODE exists only for the continuous-time (jacobian) basis")
    n = emb.n
    absL = np.abs(emb.shift.entries)
    sel = emb.selector
    base = emb.base
    idx = np.arange(n)

    def h(y):
        x, xh = y[:n], y[n:]
        Xi = np.concatenate([np.where(sel, x, xh), np.where(sel, xh, x)])
        vals = base(Xi)
        corr = absL @ (x - xh)
        return np.concatenate([vals[idx, idx] + corr, vals[n + idx, idx] - corr])

    return h
