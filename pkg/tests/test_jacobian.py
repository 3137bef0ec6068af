import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmreach.interval import IntervalVector
from mmreach.jacobian import bound_field, bound_jacobian
from mmreach.model import FPA_TAU, eval_field, eval_jacobian, fpa_weight
from mmreach.tube import tube_lipschitz

from conftest import linear_model


def _samples(box, n, seed=0):
    return np.random.default_rng(seed).uniform(box.lo, box.hi, size=(n, box.dim))


def test_fpa_closed_form(fpa, fpa_box):
    # off-diagonal entries are W_ij * sech^2(x_j), with sech^2 in [sech^2(0.1), 1]
    s = 1 / np.cosh(0.1) ** 2
    W = fpa_weight()
    lo = FPA_TAU * np.eye(5) + np.minimum(W, W * s)
    hi = FPA_TAU * np.eye(5) + np.maximum(W, W * s)
    jb = bound_jacobian(fpa, fpa_box)
    np.testing.assert_allclose(jb.lo, lo, rtol=1e-14, atol=1e-18)
    np.testing.assert_allclose(jb.hi, hi, rtol=1e-14, atol=1e-18)


def test_linear_model_bounds_are_exact():
    A = np.array([[0.0, -1.5], [2.0, 0.3]])
    jb = bound_jacobian(linear_model(A), IntervalVector([-5, -5], [5, 5]))
    np.testing.assert_array_equal(jb.lo, A)
    np.testing.assert_array_equal(jb.hi, A)


def test_identity_spiral_origin_box(identity_spiral):
    jb = bound_jacobian(identity_spiral, IntervalVector([-1, -1], [1, 1]))
    s = 1 / np.cosh(1.0) ** 2
    np.testing.assert_allclose(jb.lo, np.diag([s, s]), rtol=1e-14)
    np.testing.assert_allclose(jb.hi, np.eye(2))


@pytest.mark.parametrize("name", ["fpa", "random_mlp", "identity_spiral"])
def test_sampled_jacobians_inside_bounds(name, request):
    model = request.getfixturevalue(name)
    n = model.state_dim
    box = IntervalVector(-0.6 * np.ones(n), 0.9 * np.ones(n))
    jb = bound_jacobian(model, box)
    J = eval_jacobian(model, _samples(box, 5000))
    assert np.all(J >= jb.lo - 1e-12) and np.all(J <= jb.hi + 1e-12)


def test_fpa_tube_containment(fpa, fpa_box):
    tube = tube_lipschitz(fpa, fpa_box, 2.0).box
    jb = bound_jacobian(fpa, tube)
    J = eval_jacobian(fpa, _samples(tube, 10_000, seed=4))
    assert np.all(jb.matrix.lo <= J) and np.all(J <= jb.matrix.hi)


def test_fpa_bounds_shrink_to_point(fpa):
    c = np.linspace(-0.3, 0.4, 5)
    jb = bound_jacobian(fpa, IntervalVector(c - 5e-8, c + 5e-8))
    assert np.max(jb.hi - jb.lo) < 1e-6
    J = eval_jacobian(fpa, c)
    assert np.all(jb.lo <= J) and np.all(J <= jb.hi)


def test_bound_width_scales_linearly(random_mlp):
    c = np.array([-0.3, 0.05, 0.4])
    widths = []
    for r in (1e-4, 1e-5, 1e-6):
        jb = bound_jacobian(random_mlp, IntervalVector(c - r, c + r))
        widths.append(np.max(jb.hi - jb.lo))
    assert widths[0] / widths[1] == pytest.approx(10, rel=0.05)
    assert widths[1] / widths[2] == pytest.approx(10, rel=0.05)


@pytest.mark.parametrize("name", ["fpa", "random_mlp"])
def test_field_bounds_contain_samples(name, request):
    model = request.getfixturevalue(name)
    n = model.state_dim
    box = IntervalVector(-np.ones(n), 0.5 * np.ones(n))
    fb = bound_field(model, box)
    F = eval_field(model, _samples(box, 5000))
    assert np.all(F >= fb.lo - 1e-12) and np.all(F <= fb.hi + 1e-12)


def test_dimension_check(fpa):
    with pytest.raises(ValueError):
        bound_jacobian(fpa, IntervalVector([0, 0], [1, 1]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
                min_size=3, max_size=3))
def test_inclusion_monotone(rows):
    from mmreach.model import Linear, NeuralOdeModel, Tanh
    rng = np.random.default_rng(11)
    model = NeuralOdeModel((Linear(rng.normal(size=(4, 3)), rng.normal(size=4)), Tanh(),
                            Linear(rng.normal(size=(3, 4)), rng.normal(size=3))), 3, tau=-0.5)
    c = np.array([r[0] for r in rows])
    w = np.array([r[1] for r in rows])
    inner_lo = c - w * np.array([r[2] for r in rows])
    inner_hi = c + w * np.array([r[3] for r in rows])
    outer = IntervalVector(c - w, c + w)
    inner = IntervalVector(inner_lo, inner_hi)
    a, b = bound_jacobian(model, inner), bound_jacobian(model, outer)
    assert a.matrix.issubset(b.matrix, tol=1e-12)
