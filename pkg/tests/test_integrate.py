import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from mmreach.integrate import (
    IntegrationError,
    IntegratorConfig,
    flow,
    flow_and_sensitivity,
    integrate,
    sensitivity,
)
from mmreach.model import eval_field

from conftest import linear_model

RK4 = IntegratorConfig(method="rk4_fixed", step=1e-3)


def test_decay_closed_form(decay):
    assert flow(decay, [1.0], 1.0)[0] == pytest.approx(math.exp(-1), abs=1e-6)
    assert flow(decay, [1.0], 1.0, RK4)[0] == pytest.approx(math.exp(-1), abs=1e-12)


def test_zero_field_is_identity(zero2):
    x0 = np.array([0.3, -1.7])
    np.testing.assert_array_equal(flow(zero2, x0, 5.0), x0)
    np.testing.assert_array_equal(flow(zero2, x0, 5.0, RK4), x0)


@pytest.mark.parametrize("cfg", [None, RK4])
def test_linear_flow_matches_expm(cfg):
    A = np.array([[-0.1, 2.0], [-2.0, -0.1]])
    m = linear_model(A)
    x0 = np.array([1.0, 0.5])
    np.testing.assert_allclose(flow(m, x0, 3.0, cfg), expm(3.0 * A) @ x0, atol=1e-6)


@pytest.mark.parametrize("cfg", [None, RK4])
def test_linear_sensitivity_matches_expm(cfg):
    A = np.random.default_rng(2).normal(size=(3, 3))
    m = linear_model(A)
    np.testing.assert_allclose(sensitivity(m, np.zeros(3), 1.0, cfg), expm(A), rtol=1e-5)


def test_decay_sensitivity_closed_form(decay):
    assert sensitivity(decay, [1.0], 1.0)[0, 0] == pytest.approx(math.exp(-1), abs=1e-6)


def test_nonlinear_flow_matches_scipy(random_mlp):
    x0 = np.array([0.2, -0.4, 0.9])
    ref = solve_ivp(lambda t, y: eval_field(random_mlp, y), (0, 2.0), x0,
                    method="DOP853", rtol=1e-12, atol=1e-12).y[:, -1]
    np.testing.assert_allclose(flow(random_mlp, x0, 2.0), ref, atol=1e-6)
    np.testing.assert_allclose(flow(random_mlp, x0, 2.0, RK4), ref, atol=1e-9)


def test_sensitivity_matches_finite_differences(fpa):
    x0 = np.array([0.05, -0.03, 0.08, -0.02, 0.01])
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
    S = sensitivity(fpa, x0, 2.0, cfg)
    h = 1e-6
    fd = np.stack([(flow(fpa, x0 + h * e, 2.0, cfg) - flow(fpa, x0 - h * e, 2.0, cfg)) / (2 * h)
                   for e in np.eye(5)], axis=1)
    np.testing.assert_allclose(S, fd, atol=1e-6)


def test_batch_matches_individual(random_mlp):
    X = np.random.default_rng(0).uniform(-1, 1, size=(5, 3))
    batch = flow(random_mlp, X, 1.0, RK4)
    for k in range(5):
        np.testing.assert_allclose(batch[k], flow(random_mlp, X[k], 1.0, RK4), rtol=1e-14, atol=1e-15)
    Fb, Sb = flow_and_sensitivity(random_mlp, X, 1.0, RK4)
    F1, S1 = flow_and_sensitivity(random_mlp, X[2], 1.0, RK4)
    np.testing.assert_allclose(Sb[2], S1, rtol=1e-12, atol=1e-14)


def test_rk4_uses_uniform_steps(decay):
    traj = integrate(lambda y: -y, [1.0], 1.0, IntegratorConfig(method="rk4_fixed", step=0.3))
    assert len(traj.times) == 5
    np.testing.assert_allclose(np.diff(traj.times), 0.25)
    assert traj.t_final == 1.0


def test_adaptive_lands_exactly_on_horizon():
    traj = integrate(lambda y: -y, [1.0], 0.7)
    assert traj.times[-1] == 0.7
    assert np.all(np.diff(traj.times) > 0)


def test_record_false_keeps_endpoints():
    traj = integrate(lambda y: -y, [1.0], 1.0, record=False)
    assert traj.states.shape == (2, 1)
    full = integrate(lambda y: -y, [1.0], 1.0)
    np.testing.assert_array_equal(traj.final, full.final)


def test_on_step_sees_every_accepted_state():
    seen = []
    traj = integrate(lambda y: -y, [1.0], 1.0, on_step=lambda t, y: seen.append(t))
    assert seen == list(traj.times)


def test_divergence_is_reported():
    with pytest.raises(IntegrationError):
        integrate(lambda y: y ** 2, [1.0], 2.0)
    with np.errstate(over="ignore"), pytest.raises(IntegrationError):
        integrate(lambda y: y ** 2, [1.0], 2.0, IntegratorConfig(method="rk4_fixed", step=0.01))


def test_max_steps_is_enforced():
    with pytest.raises(IntegrationError, match="max_steps"):
        integrate(lambda y: -y, [1.0], 10.0, IntegratorConfig(max_steps=3))


@pytest.mark.parametrize("kw", [{"method": "euler"}, {"step": 0}, {"rel_tol": -1}, {"max_steps": 0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        IntegratorConfig(**kw)


def test_non_positive_horizon():
    with pytest.raises(ValueError):
        integrate(lambda y: -y, [1.0], 0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(0.05, 3.0), st.floats(-3, 3))
def test_linear_scalar_property(a, T, x0):
    m = linear_model([[a]])
    assert flow(m, [x0], T)[0] == pytest.approx(x0 * math.exp(a * T), rel=1e-5, abs=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 1.5), st.floats(0.1, 1.5))
def test_flow_semigroup(s, t):
    m = linear_model([[-0.1, 2.0], [-2.0, -0.1]])
    x0 = np.array([1.0, -0.5])
    np.testing.assert_allclose(flow(m, flow(m, x0, s), t), flow(m, x0, s + t), atol=1e-6)
