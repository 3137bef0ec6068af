"""Interval enclosures of a model's Jacobian and vector field over a box."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interval import (
    IntervalMatrix,
    IntervalVector,
    add,
    matmul_interval_point,
    mul,
    point_matvec,
    scale,
    sech2_range,
    tanh_range,
)
from .model import Linear, NeuralOdeModel

__all__ = ["JacobianBounds", "bound_jacobian", "bound_field"]


@dataclass(frozen=True)
class JacobianBounds:
    """Entrywise bounds ``[J_lo, J_hi]`` of ``df/dx`` valid for all x in ``domain``."""

    matrix: IntervalMatrix
    domain: IntervalVector

    @property
    def lo(self) -> np.ndarray:
        return self.matrix.lo

    @property
    def hi(self) -> np.ndarray:
        return self.matrix.hi

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist(), "domain": self.domain.to_dict()}


def _check_box(model: NeuralOdeModel, box: IntervalVector) -> None:
    if box.dim != model.state_dim:
        raise ValueError(f"box of dim {box.dim} does not match state_dim {model.state_dim}")


def _preactivations(model: NeuralOdeModel, box: IntervalVector) -> list:
    """Forward interval pass; returns the input box of every layer."""
    inputs = []
    z = box
    for layer in model.layers:
        inputs.append(z)
        z = point_matvec(layer.W, z, layer.b) if isinstance(layer, Linear) else tanh_range(z)
    inputs.append(z)
    return inputs


def bound_field(model: NeuralOdeModel, box: IntervalVector) -> IntervalVector:
    """Interval enclosure of ``f(x)`` for ``x`` in ``box``."""
    _check_box(model, box)
    out = _preactivations(model, box)[-1]
    if model.tau is not None:
        out = add(out, scale(model.tau, box))
    return out


def bound_jacobian(model: NeuralOdeModel, box: IntervalVector) -> JacobianBounds:
    """Enclose the Jacobian of ``model`` over ``box`` by the interval chain rule.

    The product ``J_K ... J_1`` is accumulated from the output side. Linear
    layers enter as point matrices (exact sign rule); tanh layers as
    ``diag(sech2_range(z))`` of their interval pre-activation ``z``. For a
    single-hidden-layer network the accumulator is a point matrix when it
    meets the diagonal, so no interval-interval product arises.
    """
    _check_box(model, box)
    inputs = _preactivations(model, box)
    n = model.state_dim
    P = IntervalMatrix.point(np.eye(n))
    for layer, z in zip(reversed(model.layers), reversed(inputs[:-1])):
        if isinstance(layer, Linear):
            P = matmul_interval_point(P, layer.W)
        else:
            d = sech2_range(z)
            cols = IntervalMatrix(np.broadcast_to(d.lo, P.shape), np.broadcast_to(d.hi, P.shape))
            if np.array_equal(P.lo, P.hi):
                P = scale(P.lo, cols)
            else:
                P = mul(P, cols)
    if model.tau is not None:
        P = add(P, IntervalMatrix.point(model.tau * np.eye(n)))
    return JacobianBounds(P, box)
