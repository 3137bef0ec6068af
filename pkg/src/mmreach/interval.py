"""Closed-interval arithmetic on scalars, vectors and matrices.

Vectors and matrices store their endpoints as two read-only numpy arrays, so
every operation here is a handful of vectorized numpy calls. Endpoints are
evaluated in plain floating point; :func:`outward` installs an optional
outward inflation applied to every result produced inside its scope.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

__all__ = [
    "Interval",
    "IntervalVector",
    "IntervalMatrix",
    "add",
    "scale",
    "mul",
    "matmul_point_interval",
    "matmul_interval_point",
    "point_matvec",
    "tanh_range",
    "sech2",
    "sech2_range",
    "hull",
    "contains",
    "outward",
]

_EPS = contextvars.ContextVar("mmreach_outward_eps", default=0.0)


@contextlib.contextmanager
def outward(eps: float):
    """Inflate every interval result computed in this block by ``eps`` per side."""
    if not eps >= 0.0:
        raise ValueError("outward inflation must be non-negative")
    token = _EPS.set(float(eps))
    try:
        yield
    finally:
        _EPS.reset(token)


def _widen(lo, hi):
    eps = _EPS.get()
    if eps:
        return lo - eps, hi + eps
    return lo, hi


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_endpoints(lo: np.ndarray, hi: np.ndarray) -> None:
    if lo.shape != hi.shape:
        raise ValueError(f"endpoint shapes differ: {lo.shape} vs {hi.shape}")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("interval endpoints must be finite")
    if np.any(lo > hi):
        bad = np.argwhere(lo > hi)[0]
        raise ValueError(f"inverted interval at index {tuple(int(i) for i in bad)}: "
                         f"lo={lo[tuple(bad)]!r} > hi={hi[tuple(bad)]!r}")


@dataclass(frozen=True)
class Interval:
    """A closed, bounded real interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("interval endpoints must be finite")
        if lo > hi:
            raise ValueError(f"inverted interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def __contains__(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def straddles_zero(self) -> bool:
        return self.lo < 0.0 < self.hi

    def __add__(self, other):
        if isinstance(other, Interval):
            return add(self, other)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Interval):
            return mul(self, other)
        if isinstance(other, (int, float)):
            return scale(other, self)
        return NotImplemented

    __rmul__ = __mul__

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"


class IntervalVector:
    """Fixed-length vector of intervals, i.e. an axis-aligned box."""

    __slots__ = ("_lo", "_hi")

    def __init__(self, lo, hi):
        lo, hi = _frozen(lo), _frozen(hi)
        if lo.ndim != 1:
            raise ValueError(f"IntervalVector needs 1-D endpoints, got shape {lo.shape}")
        _check_endpoints(lo, hi)
        self._lo, self._hi = lo, hi

    @classmethod
    def from_intervals(cls, items: Iterable[Interval]) -> "IntervalVector":
        items = list(items)
        return cls([i.lo for i in items], [i.hi for i in items])

    @classmethod
    def point(cls, x) -> "IntervalVector":
        return cls(x, x)

    @property
    def lo(self) -> np.ndarray:
        return self._lo

    @property
    def hi(self) -> np.ndarray:
        return self._hi

    @property
    def dim(self) -> int:
        return self._lo.shape[0]

    @property
    def width(self) -> np.ndarray:
        return self._hi - self._lo

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self._lo + self._hi)

    @property
    def components(self) -> tuple:
        return tuple(Interval(a, b) for a, b in zip(self._lo, self._hi))

    def __len__(self) -> int:
        return self.dim

    def __getitem__(self, i: int) -> Interval:
        return Interval(self._lo[i], self._hi[i])

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalVector):
            return NotImplemented
        return np.array_equal(self._lo, other._lo) and np.array_equal(self._hi, other._hi)

    def __hash__(self):
        return hash((self._lo.tobytes(), self._hi.tobytes()))

    def issubset(self, other: "IntervalVector", tol: float = 0.0) -> bool:
        return bool(np.all(other.lo - tol <= self._lo) and np.all(self._hi <= other.hi + tol))

    def replace(self, i: int, value: Interval) -> "IntervalVector":
        lo, hi = self._lo.copy(), self._hi.copy()
        lo[i], hi[i] = value.lo, value.hi
        return IntervalVector(lo, hi)

    def inflate(self, margin) -> "IntervalVector":
        margin = np.asarray(margin, dtype=float)
        return IntervalVector(self._lo - margin, self._hi + margin)

    def to_dict(self) -> dict:
        return {"lo": self._lo.tolist(), "hi": self._hi.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "IntervalVector":
        return cls(d["lo"], d["hi"])

    def __repr__(self) -> str:
        pairs = ", ".join(f"[{a:.6g}, {b:.6g}]" for a, b in zip(self._lo, self._hi))
        return f"IntervalVector({pairs})"


class IntervalMatrix:
    """Rectangular grid of intervals."""

    __slots__ = ("_lo", "_hi")

    def __init__(self, lo, hi):
        lo, hi = _frozen(lo), _frozen(hi)
        if lo.ndim != 2:
            raise ValueError(f"IntervalMatrix needs 2-D endpoints, got shape {lo.shape}")
        _check_endpoints(lo, hi)
        self._lo, self._hi = lo, hi

    @classmethod
    def point(cls, m) -> "IntervalMatrix":
        return cls(m, m)

    @classmethod
    def diag(cls, v: IntervalVector) -> "IntervalMatrix":
        return cls(np.diag(v.lo), np.diag(v.hi))

    @property
    def lo(self) -> np.ndarray:
        return self._lo

    @property
    def hi(self) -> np.ndarray:
        return self._hi

    @property
    def shape(self) -> tuple:
        return self._lo.shape

    @property
    def width(self) -> np.ndarray:
        return self._hi - self._lo

    @property
    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self._lo), np.abs(self._hi))

    def __getitem__(self, ij) -> Interval:
        i, j = ij
        return Interval(self._lo[i, j], self._hi[i, j])

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalMatrix):
            return NotImplemented
        return np.array_equal(self._lo, other._lo) and np.array_equal(self._hi, other._hi)

    def __hash__(self):
        return hash((self._lo.tobytes(), self._hi.tobytes()))

    def contains_point(self, m, tol: float = 0.0) -> bool:
        m = np.asarray(m, dtype=float)
        return bool(np.all(self._lo - tol <= m) and np.all(m <= self._hi + tol))

    def issubset(self, other: "IntervalMatrix", tol: float = 0.0) -> bool:
        return bool(np.all(other.lo - tol <= self._lo) and np.all(self._hi <= other.hi + tol))

    def to_dict(self) -> dict:
        return {"lo": self._lo.tolist(), "hi": self._hi.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "IntervalMatrix":
        return cls(d["lo"], d["hi"])

    def __repr__(self) -> str:
        return f"IntervalMatrix(shape={self.shape})"


IntervalLike = Union[Interval, IntervalVector, IntervalMatrix]


def _endpoints(a):
    if isinstance(a, Interval):
        return np.float64(a.lo), np.float64(a.hi)
    return a.lo, a.hi


def _rebuild(template, lo, hi):
    lo, hi = _widen(lo, hi)
    if isinstance(template, Interval):
        return Interval(float(lo), float(hi))
    return type(template)(lo, hi)


def add(a, b):
    """Endpoint-wise sum of two intervals (or interval vectors/matrices)."""
    alo, ahi = _endpoints(a)
    blo, bhi = _endpoints(b)
    if np.shape(alo) != np.shape(blo):
        raise ValueError(f"shape mismatch: {np.shape(alo)} vs {np.shape(blo)}")
    return _rebuild(a, alo + blo, ahi + bhi)


def scale(c, a):
    """Multiply an interval object by a real scalar (or an array of scalars).

    A negative factor swaps the endpoints.
    """
    alo, ahi = _endpoints(a)
    c = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(c)):
        raise ValueError("scale factor must be finite")
    pos = c >= 0
    lo = np.where(pos, c * alo, c * ahi)
    hi = np.where(pos, c * ahi, c * alo)
    return _rebuild(a, lo, hi)


def _mul_arrays(alo, ahi, blo, bhi):
    cands = np.stack([alo * blo, alo * bhi, ahi * blo, ahi * bhi])
    return cands.min(axis=0), cands.max(axis=0)


def mul(a, b):
    """Elementwise interval product (four-corner rule)."""
    alo, ahi = _endpoints(a)
    blo, bhi = _endpoints(b)
    if np.shape(alo) != np.shape(blo):
        raise ValueError(f"shape mismatch: {np.shape(alo)} vs {np.shape(blo)}")
    lo, hi = _mul_arrays(alo, ahi, blo, bhi)
    return _rebuild(a, lo, hi)


def matmul_point_interval(W, D: IntervalMatrix) -> IntervalMatrix:
    """Enclose ``W @ D`` for a point matrix ``W`` and interval matrix ``D``.

    Entry ``(i, j)`` is the interval sum of ``scale(W[i, k], D[k, j])``.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[1] != D.shape[0]:
        raise ValueError(f"cannot multiply {W.shape} by {D.shape}")
    Wp, Wn = np.maximum(W, 0.0), np.minimum(W, 0.0)
    lo = Wp @ D.lo + Wn @ D.hi
    hi = Wp @ D.hi + Wn @ D.lo
    return _rebuild(D, lo, hi)


def matmul_interval_point(D: IntervalMatrix, W) -> IntervalMatrix:
    """Enclose ``D @ W`` for an interval matrix ``D`` and point matrix ``W``."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or D.shape[1] != W.shape[0]:
        raise ValueError(f"cannot multiply {D.shape} by {W.shape}")
    Wp, Wn = np.maximum(W, 0.0), np.minimum(W, 0.0)
    lo = D.lo @ Wp + D.hi @ Wn
    hi = D.hi @ Wp + D.lo @ Wn
    return _rebuild(D, lo, hi)


def point_matvec(W, x: IntervalVector, b=None) -> IntervalVector:
    """Exact range of the affine map ``W x + b`` over the box ``x``."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[1] != x.dim:
        raise ValueError(f"cannot multiply {W.shape} by vector of length {x.dim}")
    Wp, Wn = np.maximum(W, 0.0), np.minimum(W, 0.0)
    lo = Wp @ x.lo + Wn @ x.hi
    hi = Wp @ x.hi + Wn @ x.lo
    if b is not None:
        lo = lo + b
        hi = hi + b
    return _rebuild(x, lo, hi)


def tanh_range(a):
    """Exact range of tanh over ``a`` (tanh is increasing)."""
    lo, hi = _endpoints(a)
    return _rebuild(a, np.tanh(lo), np.tanh(hi))


def sech2(x):
    """Pointwise ``1 - tanh(x)**2``, the derivative of tanh."""
    # 1/cosh^2 keeps full relative precision in the tails, unlike 1 - tanh^2
    with np.errstate(over="ignore"):
        return 1.0 / np.cosh(x) ** 2


def sech2_range(a):
    """Exact range of ``1 - tanh(x)**2`` over ``a``.

    The function is even and decreasing in ``|x|``: the maximum sits at the
    endpoint closest to zero (or is 1 when the interval contains zero), the
    minimum at the endpoint of largest magnitude.
    """
    lo, hi = _endpoints(a)
    alo, ahi = np.abs(lo), np.abs(hi)
    near = np.where((lo <= 0.0) & (hi >= 0.0), 0.0, np.minimum(alo, ahi))
    far = np.maximum(alo, ahi)
    return _rebuild(a, sech2(far), sech2(near))


def hull(boxes: Iterable[IntervalVector]) -> IntervalVector:
    """Smallest box containing every box in ``boxes``."""
    boxes = list(boxes)
    if not boxes:
        raise ValueError("hull of an empty collection")
    dims = {b.dim for b in boxes}
    if len(dims) != 1:
        raise ValueError(f"boxes have mixed dimensions {sorted(dims)}")
    lo = np.min([b.lo for b in boxes], axis=0)
    hi = np.max([b.hi for b in boxes], axis=0)
    return IntervalVector(lo, hi)


def contains(box: IntervalVector, point: Sequence[float], tol: float = 0.0) -> bool:
    """Closed-box membership test, optionally with an absolute slack ``tol``."""
    p = np.asarray(point, dtype=float)
    if p.shape != (box.dim,):
        raise ValueError(f"point of shape {p.shape} vs box of dim {box.dim}")
    return bool(np.all(box.lo - tol <= p) and np.all(p <= box.hi + tol))
