import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from vortint import flows
from vortint.errors import DomainError
from vortint.flows import (IdealGasEOS, curl_and_bernoulli, euler_residual, from_primitives, make_flow,
                           max_residuals, sample_flow)
from vortint.geom import hook, sharp, volume_tensors


def test_rigid_rotation_sample():
    s = sample_flow(flows.rigid_rotation(1.0), np.array([1.0, 0.0]), 3.7)
    assert np.allclose(s.u, [0.0, 1.0], atol=1e-15)
    assert abs(np.trace(s.grad_u)) < 1e-15


def test_taylor_green_stagnation():
    s = sample_flow(flows.taylor_green(), np.array([np.pi / 2, np.pi / 2]), 0.0)
    assert np.allclose(s.u, 0.0, atol=1e-15)


def test_abc_origin():
    s = sample_flow(flows.abc(1, 1, 1), np.zeros(3), 0.0)
    assert np.allclose(s.u, [1.0, 1.0, 1.0])


@pytest.mark.parametrize("omega", [0.5, 1.0, 2.0])
def test_rigid_rotation_vorticity(omega):
    x = np.random.default_rng(0).normal(size=(20, 2))
    c = curl_and_bernoulli(flows.rigid_rotation(omega), x, 0.0)
    assert np.allclose(c.omega.coeffs[..., 0], 2 * omega)


def test_taylor_green_vorticity_at_center():
    c = curl_and_bernoulli(flows.taylor_green(), np.array([np.pi / 2, np.pi / 2]), 0.0)
    assert np.isclose(c.omega.coeffs[0], 2.0)


def test_uniform_has_no_vorticity():
    x = np.random.default_rng(1).normal(size=(10, 3))
    c = curl_and_bernoulli(flows.uniform((1.0, -2.0, 0.5)), x, 0.3)
    assert np.all(c.omega.coeffs == 0)


def test_abc_is_beltrami():
    x = np.random.default_rng(2).uniform(0, 2 * np.pi, size=(50, 3))
    flow = flows.abc(1.0, 0.7, 0.4)
    c = curl_and_bernoulli(flow, x, 0.0)
    # vorticity vector = eps_g -| omega; Beltrami: equals u
    vv = hook(c.omega, volume_tensors(np.eye(3)).eps_g)
    assert np.allclose(vv.coeffs, flow.sample(x, 0.0).u, atol=1e-12)


def test_taylor_green_pressure():
    # p = (cos 2x + cos 2y)/4 balances (u . grad) u
    x = np.random.default_rng(3).uniform(0, 2 * np.pi, size=(100, 2))
    s = flows.taylor_green().sample(x, 0.0)
    assert np.allclose(s.p, 0.25 * (np.cos(2 * x[:, 0]) + np.cos(2 * x[:, 1])))


@pytest.mark.parametrize("name", sorted(flows.CATALOG))
def test_catalog_residuals(name):
    flow = make_flow(name)
    res = max_residuals(flow, count=200, seed=4)
    for key, val in res.items():
        assert val < 1e-8, (name, key, val)


def test_isentropic_flows_freeze_vorticity():
    for name in ["rigid_rotation", "taylor_green", "abc", "boosted_abc", "isentropic_vortex"]:
        flow = make_flow(name)
        assert flow.isentropic
        assert max_residuals(flow, count=100, seed=5)["curl_transport"] < 1e-8


def test_flags_consistent():
    x = np.random.default_rng(6).uniform(0.1, 1.0, size=(50, 2))
    for name in ["rigid_rotation", "taylor_green", "uniform"]:
        s = make_flow(name).sample(x, 0.2)
        assert np.all(s.grad_S == 0) and np.all(s.grad_rho == 0)
        assert np.max(np.abs(np.trace(s.grad_u, axis1=-2, axis2=-1))) < 1e-10
    s = make_flow("isentropic_vortex").sample(x, 0.2)
    assert np.all(s.grad_S == 0) and np.all(s.rho > 0)


@pytest.mark.parametrize("gamma", [1.4, 5.0 / 3.0, 2.0])
def test_eos_energy_derivative(gamma):
    eos = IdealGasEOS(gamma)
    rho, S = np.linspace(0.3, 2.0, 7), np.linspace(-1.0, 1.0, 7)
    h = 1e-5
    fd = (eos.energy(rho, S + h) - eos.energy(rho, S - h)) / (2 * h)
    assert np.max(np.abs(fd - eos.energy_S(rho, S))) < 1e-7
    # e = int rho^-2 P drho with zero constant
    for r, s in zip(rho, S):
        val, _ = quad(lambda q: eos.pressure(q, s) / q ** 2, 0.0, r)
        assert np.isclose(val, eos.energy(r, s), rtol=1e-9)


def test_finite_difference_fallback():
    U = lambda x, t: np.stack([np.sin(x[..., 1]) + 0 * t, 0 * x[..., 0]], -1)
    flow = from_primitives("fd_shear", 2, U, p=lambda x, t: 1.0 + 0 * x[..., 0], steady=True,
                           isentropic=True, sample_box=(np.zeros(2), np.full(2, 2 * np.pi)))
    res = max_residuals(flow, count=200, seed=7)
    assert max(res.values()) < 1e-5


def test_stratified_shear_entropy_form_frozen():
    # steady flow: D_t of the top form dS ^ omega is its Lie derivative
    flow = flows.stratified_shear(U={"kind": "sine", "a": 0.2, "b": 1.0}, S={"kind": "tanh", "b": 0.5}, n=3)
    x = np.random.default_rng(8).uniform(0, 1, size=(50, 3))
    from vortint.geom import wedge
    from vortint.integrals import _dS, _omega

    def form(y):
        s = flow.sample(y, 0.0)
        return wedge(_dS(s), _omega(s)).coeffs[..., 0]

    h = 1e-4
    grad = np.stack([(form(x + h * e) - form(x - h * e)) / (2 * h) for e in np.eye(3)], -1)
    s = flow.sample(x, 0.0)
    # Lie derivative of a top form: d(u -| a) = div(a u) = u . grad a + a div u
    lie = np.sum(s.u * grad, -1) + form(x) * np.trace(s.grad_u, axis1=-2, axis2=-1)
    assert np.max(np.abs(lie)) < 1e-8


def test_baroclinic_torque():
    flow = flows.baroclinic_affine(kappa=0.5, gamma=1.4)
    hist = flow.history
    x = np.array([[0.4, 1.0]])
    T = np.linspace(0, 1.5, 7)
    lhs = []
    for t in T:
        c = curl_and_bernoulli(flow, x, t)
        b, d = hist.state(t)[:2]
        lhs.append(c.omega.coeffs[0, 0] * d)
    lhs = np.array(lhs)
    for t, v in zip(T, lhs):
        val, _ = quad(lambda s: hist.kappa * hist.state(s)[1] ** (1 - hist.gamma), 0.0, t,
                      epsabs=1e-13, epsrel=1e-12)
        assert abs(v - lhs[0] - val) < 1e-9


def test_periodic_wrap_and_domain():
    tg = flows.taylor_green()
    x = np.array([0.3, 1.1])
    assert np.allclose(tg.sample(x + 2 * np.pi * np.array([3, -2]), 0).u, tg.sample(x, 0).u)
    vort = flows.baroclinic_affine()
    with pytest.raises(DomainError):
        vort.sample(np.array([0.5, -1.0]), 0.0)
    with pytest.raises(DomainError):
        vort.sample(np.array([0.5, 1.0]), 10.0)


def test_unknown_flow():
    with pytest.raises(KeyError):
        make_flow("nope")


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2))
def test_bernoulli_sign_flag(x, y, t):
    flow = flows.isentropic_vortex()
    pt = np.array([x, y])
    minus = curl_and_bernoulli(flow, pt, t).sigma
    plus = curl_and_bernoulli(flow, pt, t, energy_sign=1.0).sigma
    s = flow.sample(pt, t)
    assert np.isclose(plus - minus, 2 * s.e)


def test_residual_record_keys():
    r = euler_residual(flows.uniform((1.0, 2.0)), np.zeros((3, 2)), 0.0)
    assert set(r) == {"momentum", "continuity", "entropy", "curl_transport"}
