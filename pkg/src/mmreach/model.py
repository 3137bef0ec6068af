"""Neural ODE vector fields built from linear and tanh layers.

A model is ``f(x) = tau * x + layers(x)`` where ``layers`` is a sequential
stack of affine maps and elementwise tanh activations, and the optional
``tau`` term models the leak of the fixed-point attractor benchmark.
Every evaluation accepts a single state of shape ``(n,)`` or a batch of
shape ``(..., n)``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence, Union

import numpy as np

from .interval import IntervalVector, sech2

__all__ = [
    "Linear",
    "Tanh",
    "NeuralOdeModel",
    "ModelError",
    "eval_field",
    "eval_jacobian",
    "lipschitz_bound",
    "fpa_model",
    "spiral_model",
    "load_model",
    "save_model",
    "BUILTIN_MODELS",
]


class ModelError(ValueError):
    """Raised for malformed model files or dimension-chain violations."""


def _frozen(a, ndim: int, what: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != ndim:
        raise ModelError(f"{what} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{what} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Linear:
    W: np.ndarray
    b: np.ndarray

    kind = "linear"

    def __post_init__(self):
        W = _frozen(self.W, 2, "linear weight")
        b = _frozen(self.b, 1, "linear bias")
        if b.shape[0] != W.shape[0]:
            raise ModelError(f"bias of length {b.shape[0]} does not match weight {W.shape}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def in_dim(self) -> int:
        return self.W.shape[1]

    @property
    def out_dim(self) -> int:
        return self.W.shape[0]

    def __call__(self, x):
        return x @ self.W.T + self.b


@dataclass(frozen=True)
class Tanh:
    kind = "tanh"

    def __call__(self, x):
        return np.tanh(x)


Layer = Union[Linear, Tanh]


@dataclass(frozen=True, eq=False)
class NeuralOdeModel:
    """Autonomous vector field ``x' = tau * x + layers(x)`` on R^n."""

    layers: tuple
    state_dim: int
    tau: Optional[float] = None
    name: str = "model"

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        n = int(self.state_dim)
        if n < 1:
            raise ModelError("state_dim must be positive")
        object.__setattr__(self, "state_dim", n)
        if self.tau is not None:
            tau = float(self.tau)
            if not np.isfinite(tau):
                raise ModelError("tau must be finite")
            object.__setattr__(self, "tau", tau)
        width = n
        for k, layer in enumerate(layers):
            if isinstance(layer, Linear):
                if layer.in_dim != width:
                    raise ModelError(f"layer {k}: linear expects input {layer.in_dim}, "
                                     f"previous layer produces {width}")
                width = layer.out_dim
            elif not isinstance(layer, Tanh):
                raise ModelError(f"layer {k}: unsupported layer {layer!r}")
        if width != n:
            raise ModelError(f"layer stack maps R^{n} to R^{width}; a vector field needs R^{n}")

    def __call__(self, x):
        return eval_field(self, x)

    def __eq__(self, other):
        if not isinstance(other, NeuralOdeModel):
            return NotImplemented
        return model_to_dict(self) == model_to_dict(other)

    __hash__ = object.__hash__


def _check_state(model: NeuralOdeModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != model.state_dim:
        raise ValueError(f"state of shape {x.shape} does not match state_dim {model.state_dim}")
    return x


def eval_field(model: NeuralOdeModel, x) -> np.ndarray:
    """Evaluate ``f(x)``; ``x`` may be a single state or a batch ``(..., n)``."""
    x = _check_state(model, x)
    y = x
    for layer in model.layers:
        y = layer(y)
    if model.tau is not None:
        y = y + model.tau * x
    return y


def eval_jacobian(model: NeuralOdeModel, x) -> np.ndarray:
    """Exact Jacobian ``df/dx`` by the chain rule; returns shape ``(..., n, n)``."""
    x = _check_state(model, x)
    n = model.state_dim
    J = np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n))
    y = x
    for layer in model.layers:
        if isinstance(layer, Linear):
            J = layer.W @ J
            y = layer(y)
        else:
            J = sech2(y)[..., :, None] * J
            y = np.tanh(y)
    if model.tau is not None:
        J = J + model.tau * np.eye(n)
    return np.array(J)


def lipschitz_bound(model: NeuralOdeModel, box: IntervalVector) -> float:
    """Upper bound of the induced infinity-norm of the Jacobian over ``box``."""
    from .jacobian import bound_jacobian

    bounds = bound_jacobian(model, box)
    return float(np.max(bounds.matrix.mag.sum(axis=1)))


# Fixed-point attractor benchmark: tau * x + W tanh(x), W = [[0, A], [0, B A]].
_FPA_A = np.array([[-1.20327, -0.07202, -0.93635],
                   [1.18810, -1.50015, 0.93519]])
_FPA_B = np.array([[1.21464, -0.10502],
                   [0.12023, 0.19387],
                   [-1.36695, 0.12201]])
FPA_TAU = -1e-6


def fpa_weight() -> np.ndarray:
    W = np.zeros((5, 5))
    W[:2, 2:] = _FPA_A
    W[2:, 2:] = _FPA_B @ _FPA_A
    return W


def fpa_model() -> NeuralOdeModel:
    """The 5-D fixed-point attractor network."""
    return NeuralOdeModel(
        layers=(Tanh(), Linear(fpa_weight(), np.zeros(5))),
        state_dim=5,
        tau=FPA_TAU,
        name="fpa",
    )


def _spiral_synthetic() -> NeuralOdeModel:
    ref = resources.files("mmreach").joinpath("data/spiral_synthetic.json")
    model = model_from_dict(json.loads(ref.read_text()))
    return model


BUILTIN_MODELS = {
    "fpa": fpa_model,
    "spiral-synthetic": _spiral_synthetic,
}


def model_to_dict(model: NeuralOdeModel) -> dict:
    layers = []
    for layer in model.layers:
        if isinstance(layer, Linear):
            layers.append({"kind": "linear", "W": layer.W.tolist(), "b": layer.b.tolist()})
        else:
            layers.append({"kind": "tanh"})
    doc = {"state_dim": model.state_dim, "layers": layers}
    if model.tau is not None:
        doc["tau"] = model.tau
    return doc


def model_from_dict(doc: dict, name: str = "model") -> NeuralOdeModel:
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    try:
        state_dim = doc["state_dim"]
        raw_layers = doc["layers"]
    except KeyError as exc:
        raise ModelError(f"model document is missing {exc.args[0]!r}") from None
    if not isinstance(state_dim, int) or isinstance(state_dim, bool):
        raise ModelError("state_dim must be an integer")
    layers = []
    for k, spec in enumerate(raw_layers):
        kind = spec.get("kind") if isinstance(spec, dict) else None
        if kind == "linear":
            if "W" not in spec or "b" not in spec:
                raise ModelError(f"layer {k}: linear layer needs 'W' and 'b'")
            layers.append(Linear(spec["W"], spec["b"]))
        elif kind == "tanh":
            layers.append(Tanh())
        else:
            raise ModelError(f"layer {k}: unknown layer kind {kind!r}")
    return NeuralOdeModel(tuple(layers), state_dim, doc.get("tau"), name=doc.get("name", name))


def load_model(ref: Union[str, os.PathLike]) -> NeuralOdeModel:
    """Load a built-in model by name or a JSON model file by path."""
    if isinstance(ref, str) and ref in BUILTIN_MODELS:
        return BUILTIN_MODELS[ref]()
    try:
        with open(ref, "r") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{ref}: not valid JSON ({exc})") from None
    except OSError as exc:
        raise ModelError(f"{ref}: {exc.strerror or exc}") from None
    return model_from_dict(doc, name=os.path.splitext(os.path.basename(str(ref)))[0])


def save_model(model: NeuralOdeModel, path: Union[str, os.PathLike]) -> None:
    # json writes floats with repr(), which round-trips bitwise
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)


def spiral_model(W1, b1, W2, b2) -> NeuralOdeModel:
    """Two-layer ``W2 tanh(W1 x + b1) + b2`` field."""
    W1 = np.asarray(W1, dtype=float)
    return NeuralOdeModel(
        layers=(Linear(W1, b1), Tanh(), Linear(W2, b2)),
        state_dim=W1.shape[1],
        name="spiral",
    )
