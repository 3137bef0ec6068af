import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmreach.interval import (
    Interval,
    IntervalMatrix,
    IntervalVector,
    add,
    contains,
    hull,
    matmul_interval_point,
    matmul_point_interval,
    mul,
    outward,
    scale,
    sech2_range,
    tanh_range,
)

finite = st.floats(-5, 5, allow_nan=False)


@st.composite
def nested(draw):
    """An interval and a sub-interval of it."""
    a, b = sorted([draw(finite), draw(finite)])
    u, v = sorted([draw(st.floats(0, 1)), draw(st.floats(0, 1))])
    lo, hi = (min(max(a + t * (b - a), a), b) for t in (u, v))
    return Interval(a, b), Interval(lo, hi)


def test_constructor_rejects_bad_endpoints():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        Interval(0.0, float("inf"))
    with pytest.raises(ValueError):
        IntervalVector([0.0, 2.0], [1.0, 1.0])


@pytest.mark.parametrize("a, b, expected", [
    (Interval(0, 0), Interval(1, 2), (1, 2)),
    (Interval(-1, 1), Interval(-1, 1), (-2, 2)),
    (Interval(0.3, 0.5), Interval(0.2, 0.2), (0.5, 0.7)),
])
def test_add(a, b, expected):
    r = add(a, b)
    assert r.lo == pytest.approx(expected[0]) and r.hi == pytest.approx(expected[1])


@pytest.mark.parametrize("c, a, expected", [
    (0.0, Interval(3, 7), (0, 0)),
    (-2.0, Interval(0.3, 1), (-2, -0.6)),
    (1.5, Interval(-1, 2), (-1.5, 3)),
])
def test_scale(c, a, expected):
    r = scale(c, a)
    assert (r.lo, r.hi) == pytest.approx(expected)


def test_matmul_point_interval_examples():
    D = IntervalMatrix([[0.5, 0], [0, 0.2]], [[1, 0], [0, 0.8]])
    assert matmul_point_interval(np.eye(2), D) == D
    r = matmul_point_interval([[1, -1], [0, 2]], D)
    np.testing.assert_allclose(r.lo, [[0.5, -0.8], [0, 0.4]])
    np.testing.assert_allclose(r.hi, [[1, -0.2], [0, 1.6]])
    z = matmul_point_interval(np.zeros((2, 2)), D)
    assert np.all(z.lo == 0) and np.all(z.hi == 0)
    with pytest.raises(ValueError):
        matmul_point_interval(np.eye(3), D)


def test_matmul_point_interval_encloses_point_products():
    rng = np.random.default_rng(0)
    W = rng.normal(size=(3, 4))
    lo = rng.normal(size=(4, 2))
    D = IntervalMatrix(lo, lo + rng.uniform(0, 1, size=(4, 2)))
    r = matmul_point_interval(W, D)
    r2 = matmul_interval_point(IntervalMatrix(D.lo.T, D.hi.T), W.T)
    for _ in range(500):
        P = rng.uniform(D.lo, D.hi)
        assert r.contains_point(W @ P, tol=1e-12)
        assert r2.contains_point((W @ P).T, tol=1e-12)


@pytest.mark.parametrize("a, expected", [
    (Interval(0, 0), (0, 0)),
    (Interval(-1, 1), (-0.761594, 0.761594)),
    (Interval(1, 2), (0.761594, 0.964028)),
])
def test_tanh_range(a, expected):
    r = tanh_range(a)
    assert (r.lo, r.hi) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("a, expected", [
    (Interval(0, 0), (1, 1)),
    (Interval(1, 2), (0.070651, 0.419974)),
    (Interval(-1, 2), (0.070651, 1)),
    (Interval(-2, -1), (0.070651, 0.419974)),
])
def test_sech2_range(a, expected):
    r = sech2_range(a)
    assert (r.lo, r.hi) == pytest.approx(expected, abs=1e-6)


def test_activation_ranges_sound_and_exact():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b = np.sort(rng.uniform(-4, 4, size=2))
        box = Interval(a, b)
        xs = rng.uniform(a, b, size=10_000)
        t, s = tanh_range(box), sech2_range(box)
        assert np.all((t.lo <= np.tanh(xs)) & (np.tanh(xs) <= t.hi))
        d = 1 - np.tanh(xs) ** 2
        assert np.all((s.lo - 1e-15 <= d) & (d <= s.hi + 1e-15))
        # exact: endpoints attained at an endpoint or at zero
        cand = [a, b] + ([0.0] if a <= 0 <= b else [])
        vals = 1 - np.tanh(np.array(cand)) ** 2
        assert min(abs(vals - s.lo)) < 1e-12 and min(abs(vals - s.hi)) < 1e-12
        assert abs(np.tanh(a) - t.lo) < 1e-12 and abs(np.tanh(b) - t.hi) < 1e-12


def test_vectorized_ranges_match_scalar():
    v = IntervalVector([-1, 1, -2], [1, 2, -1])
    s = sech2_range(v)
    for k, comp in enumerate(v):
        r = sech2_range(comp)
        assert (s.lo[k], s.hi[k]) == (r.lo, r.hi)


@settings(max_examples=200, deadline=None)
@given(nested(), nested(), st.floats(-3, 3))
def test_inclusion_monotonicity(ab, cd, c):
    a, a_sub = ab
    b, b_sub = cd
    for op in (add, mul):
        assert op(a_sub, b_sub) in op(a, b)
    assert scale(c, a_sub) in scale(c, a)
    assert tanh_range(a_sub) in tanh_range(a)
    assert sech2_range(a_sub) in sech2_range(a)


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite)
def test_mul_encloses_products(a, b, c, d):
    x, y = Interval(*sorted([a, b])), Interval(*sorted([c, d]))
    r = mul(x, y)
    for p in (x.lo, x.mid, x.hi):
        for q in (y.lo, y.mid, y.hi):
            assert r.lo - 1e-12 <= p * q <= r.hi + 1e-12


def test_hull_examples():
    B = IntervalVector([0, 0], [1, 1])
    assert hull([B]) == B
    h = hull([B, IntervalVector([2, -1], [3, 0])])
    assert h == IntervalVector([0, -1], [3, 1])
    with pytest.raises(ValueError):
        hull([])
    with pytest.raises(ValueError):
        hull([B, IntervalVector([0], [1])])


def test_hull_of_random_sub_boxes():
    rng = np.random.default_rng(2)
    outer = IntervalVector([-1, 0, 2], [1, 3, 5])
    subs = []
    for _ in range(10):
        a = rng.uniform(outer.lo, outer.hi)
        b = rng.uniform(outer.lo, outer.hi)
        subs.append(IntervalVector(np.minimum(a, b), np.maximum(a, b)))
    h = hull(subs)
    assert h.issubset(outer)
    assert all(s.issubset(h) for s in subs)
    assert hull([h]) == h


def test_contains():
    B = IntervalVector([0, 0], [1, 1])
    assert contains(B, [0.5, 0.5])
    assert contains(B, [1, 1])
    assert not contains(B, [1.0001, 0.5])
    with pytest.raises(ValueError):
        contains(B, [0.5])


def test_outward_inflation():
    with outward(1e-3):
        r = add(Interval(0, 1), Interval(0, 1))
    assert (r.lo, r.hi) == (-1e-3, 2 + 1e-3)
    assert add(Interval(0, 1), Interval(0, 1)) == Interval(0, 2)


def test_values_are_immutable():
    v = IntervalVector([0, 0], [1, 1])
    with pytest.raises(ValueError):
        v.lo[0] = 5
