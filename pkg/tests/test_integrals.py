import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.stats import special_ortho_group

from vortint import flows, meshes
from vortint import integrals as I
from vortint.advect import TimeGrid, advect_to
from vortint.errors import DegreeError

pytestmark = pytest.mark.filterwarnings("ignore:.*not conserved:UserWarning")

TWO_PI = 2 * np.pi


def shear2(**kw):
    return flows.stratified_shear(U={"kind": "sine", "a": 0.3, "b": 1.0, "k": 1.0},
                                  S={"kind": "linear", "a": 0.1, "b": 0.5}, **kw)


def shear3():
    return flows.stratified_shear(U={"kind": "sine", "a": 0.3, "b": 1.0, "k": 1.0},
                                  S={"kind": "tanh", "a": 0.2, "b": 0.7, "k": 1.3}, n=3)


def tg3():
    """Taylor-Green in the xy-plane, trivially extended along z."""
    return flows.product(flows.taylor_green(), flows.uniform((0.0,), p0=0.0))


# --- circulation -------------------------------------------------------------

@pytest.mark.parametrize("omega,r", [(1.0, 1.0), (0.7, 1.9), (-1.5, 0.4)])
def test_circulation_rigid_rotation(omega, r):
    loop = meshes.circle(r, center=(0.3, 0.1), nodes=64)
    v = I.circulation(loop, flows.rigid_rotation(omega), 0.0)
    assert np.isclose(v.value, 2 * np.pi * omega * r * r, rtol=1e-12)
    assert v.flux == 0.0


def test_circulation_uniform_zero():
    loop = meshes.polyline([[0, 0], [1, 0.2], [0.4, 1.3]], closed=True)
    assert abs(I.circulation(loop, flows.uniform((0.7, -0.2)), 0.0).value) < 1e-14


def test_circulation_taylor_green_dense_oracle():
    v = I.circulation(meshes.circle(1.0, center=(np.pi, np.pi), nodes=256), flows.taylor_green(), 0.0)
    tg = flows.taylor_green()

    def integrand(th):
        x = np.array([np.pi + np.cos(th), np.pi + np.sin(th)])
        return tg.sample(x, 0.0).u @ np.array([-np.sin(th), np.cos(th)])
    ref, _ = quad(integrand, 0, TWO_PI, limit=200, epsabs=1e-13)
    assert abs(v.value - ref) < 1e-12


def test_circulation_rejects_open_curve():
    with pytest.raises(ValueError):
        I.circulation(meshes.segment([0, 0], [1, 1]), flows.uniform(), 0.0)


# --- helicity ------------------------------------------------------------------

def test_helicity_abc_box():
    box = meshes.box_domain(3, hi=TWO_PI, nodes=8, periodic=True)
    v = I.helicity(box, flows.abc(1, 1, 1), 0.0)
    assert np.isclose(v.value, 3 * TWO_PI ** 3, rtol=1e-12)
    assert v.flux == 0.0


def test_helicity_uniform_zero():
    ball = meshes.ball(1.0, nodes=(4, 6, 8))
    assert abs(I.helicity(ball, flows.uniform((1.0, 2.0, 3.0)), 0.0).value) < 1e-13


def test_helicity_rigid_rotation_ball():
    ball = meshes.ball(0.8, center=(0.1, 0.2, 0.3), nodes=(6, 8, 12))
    v = I.helicity(ball, flows.rigid_rotation(1.0, n=3), 0.0)
    assert abs(v.value) < 1e-13


def test_helicity_rejects_even_surface():
    with pytest.raises(DegreeError):
        I.helicity(meshes.disk(1.0, dim=3, center=(0, 0, 0)), flows.abc(), 0.0)


def test_helicity_warns_when_not_isentropic():
    with pytest.warns(UserWarning):
        I.helicity(meshes.box_domain(3, nodes=3), shear3(), 0.0)


def test_helicity_3d_componentwise():
    # int u . curl u dV on a ball
    flow = flows.abc(1.0, 0.6, 0.3)
    ball = meshes.ball(1.0, center=(0.5, 1.0, 1.5), nodes=(8, 12, 16))
    v = I.helicity(ball, flow, 0.0).value
    s = flow.sample(ball.x, 0.0)
    gu = s.grad_u
    curl = np.stack([gu[:, 2, 1] - gu[:, 1, 2], gu[:, 0, 2] - gu[:, 2, 0], gu[:, 1, 0] - gu[:, 0, 1]], -1)
    jac = np.abs(np.linalg.det(ball.J))
    assert np.isclose(v, np.sum(ball.w * jac * np.sum(s.u * curl, -1)), rtol=1e-12)


def test_helicity_flux_balance_half_box():
    flow = flows.boosted_abc()
    box = meshes.box_domain(3, lo=(0, 0, 0), hi=(np.pi, TWO_PI, TWO_PI), nodes=(8, 10, 10), periodic=(1, 2))
    t, dt = 0.2, 1e-3
    mid = advect_to(box, flow, TimeGrid(0.0, t, dt))
    fwd = advect_to(mid, flow, TimeGrid(t, t + dt, dt))
    bwd = advect_to(box, flow, TimeGrid(0.0, t - dt, dt))
    rate = (I.helicity(fwd, flow, t + dt).value - I.helicity(bwd, flow, t - dt).value) / (2 * dt)
    flux = I.helicity(mid, flow, t).flux
    assert abs(flux) > 1.0
    assert abs(rate - flux) < 1e-4 * abs(flux)


# --- enstrophy -----------------------------------------------------------------

@pytest.mark.parametrize("omega,r", [(1.0, 1.0), (0.5, 1.5)])
def test_enstrophy_disk_rigid_rotation(omega, r):
    v = I.enstrophy(meshes.disk(r, center=(0.2, 0.0)), flows.rigid_rotation(omega), 0.0, "identity")
    assert np.isclose(v.value, 4 * omega ** 2 * np.pi * r * r, rtol=1e-12)
    assert v.flux == 0.0


def test_enstrophy_constant_weight_closed_zero():
    box = meshes.box_domain(2, hi=TWO_PI, nodes=8, periodic=True)
    v = I.enstrophy(box, flows.taylor_green(), 0.0, {"kind": "constant", "c": 2.5})
    assert abs(v.value) < 1e-12


def test_enstrophy_rejects_odd_n():
    with pytest.raises(DegreeError):
        I.enstrophy(meshes.disk(1.0, center=(0, 0, 0)), flows.abc(), 0.0, "identity")
    v = I.enstrophy(meshes.disk(1.0, center=(0, 0, 0)), flows.rigid_rotation(1.0, n=3), 0.0, 1.0)
    assert np.isclose(v.value, 2 * np.pi)


def test_enstrophy_sheared_square_oracle():
    flow = shear2()
    sq = meshes.rectangle((0.0, 1.0), (0.0, 1.0), nodes=10)
    Up = lambda y: np.cos(y)
    rho = lambda y: (1.0 * np.exp(-(0.1 + 0.5 * y))) ** (1 / 1.4)
    ref, _ = quad(lambda y: (-Up(y) / rho(y)) ** 2 * (-Up(y)), 0.0, 1.0, epsabs=1e-14)
    f = {"kind": "power", "k": 2}
    v0 = I.enstrophy(sq, flow, 0.0, f).value
    v1 = I.enstrophy(advect_to(sq, flow, TimeGrid(0.0, 1.0, 1e-2)), flow, 1.0, f).value
    assert abs(v0 - ref) < 1e-12
    assert abs(v1 - ref) < 1e-10


def test_enstrophy_2d_componentwise():
    flow = flows.isentropic_vortex()
    d = meshes.disk(1.5, center=(0.3, -0.2), nodes=(20, 64))
    f = {"kind": "power", "k": 3}
    v = I.enstrophy(d, flow, 0.4, f).value
    s = flow.sample(d.x, 0.4)
    vort = s.grad_u[:, 1, 0] - s.grad_u[:, 0, 1]
    jac = np.linalg.det(d.J)
    assert np.isclose(v, np.sum(d.w * jac * (vort / s.rho) ** 3 * vort), rtol=1e-12)


# --- entropy circulation ---------------------------------------------------------

def test_entropy_even_rectangle_oracle():
    flow = shear2()
    L, y1, y2 = 1.7, 0.2, 1.1
    rect = meshes.rectangle((0.0, L), (y1, y2), nodes=10)
    v = I.entropy_circ_even(rect, flow, 0.0, "identity")
    ref, _ = quad(lambda y: (0.1 + 0.5 * y) * np.cos(y), y1, y2, epsabs=1e-14)
    assert abs(v.value - (-L * ref)) < 1e-12


def test_entropy_even_flux_matches_rate():
    flow = shear2()
    rect = meshes.rectangle((0.0, 1.0), (0.2, 1.1), nodes=10)
    t, dt = 0.5, 1e-3
    mid = advect_to(rect, flow, TimeGrid(0.0, t, 1e-2))
    fwd = advect_to(mid, flow, TimeGrid(t, t + dt, dt))
    bwd = advect_to(rect, flow, TimeGrid(0.0, t - dt, 1e-3))
    rate = (I.entropy_circ_even(fwd, flow, t + dt).value - I.entropy_circ_even(bwd, flow, t - dt).value) / (2 * dt)
    flux = I.entropy_circ_even(mid, flow, t).flux
    assert abs(rate - flux) < 1e-6 * max(1.0, abs(flux))


def test_entropy_even_isentropic_reduces_to_enstrophy():
    box = meshes.box_domain(2, hi=TWO_PI, nodes=8, periodic=True)
    flow = flows.taylor_green()
    a = I.entropy_circ_even(box, flow, 0.0, "identity")
    b = I.enstrophy(box, flow, 0.0, {"kind": "constant", "c": 0.0})
    assert a.flux == 0.0 and abs(a.value - b.value) < 1e-12


def test_entropy_even_q_limit():
    with pytest.raises(DegreeError):
        I.entropy_circ_even(meshes.box_domain(4, nodes=2), flows.stratified_shear(n=3), 0.0)


def test_entropy_odd_box_oracle():
    flow = shear3()
    lo, hi = np.array([0.0, 0.1, -0.4]), np.array([1.3, 0.9, 0.6])
    box = meshes.box_domain(3, lo=lo, hi=hi, nodes=10)
    v = I.entropy_circ_odd(box, flow, 0.0, "identity")
    # dS ^ omega = -S'(z) U'(y) dx dy dz; f(S) = S
    S = lambda z: 0.2 + 0.7 * np.tanh(1.3 * z)
    dS = lambda z: 0.7 * 1.3 / np.cosh(1.3 * z) ** 2
    Iz, _ = quad(lambda z: S(z) * dS(z), lo[2], hi[2], epsabs=1e-14)
    Iy, _ = quad(lambda y: np.cos(y), lo[1], hi[1], epsabs=1e-14)
    ref = -(hi[0] - lo[0]) * Iz * Iy
    assert abs(v.value - ref) < 1e-11
    v1 = I.entropy_circ_odd(advect_to(box, flow, TimeGrid(0.0, 1.0, 1e-2)), flow, 1.0, "identity")
    assert abs(v1.value - ref) < 1e-9


def test_entropy_odd_isentropic_zero():
    ball = meshes.ball(1.0, nodes=(4, 6, 8))
    assert I.entropy_circ_odd(ball, flows.abc(), 0.0, "identity").value == 0.0


def test_entropy_odd_rejects_even_n_with_z():
    with pytest.raises(DegreeError):
        I.entropy_circ_odd(meshes.circle(1.0), shear2(), 0.0, "identity", weight_of="z")


def test_entropy_odd_constant_weight_reduces_to_boundary():
    flow = shear3()
    box = meshes.box_domain(3, lo=(0, 0.1, -0.4), hi=(1, 0.8, 0.5), nodes=8)
    v = I.entropy_circ_odd(box, flow, 0.0, {"kind": "constant", "c": 1.7}).value
    assert np.isclose(I.entropy_odd_rearranged(box, flow, 0.0, {"kind": "constant", "c": 1.7}), v, rtol=1e-12)


def test_entropy_3d_componentwise():
    # int f(S) grad S . curl u dV on a ball
    flow = flows.stratified_shear(U={"kind": "sine", "b": 1.0}, S={"kind": "sine", "b": 0.4, "k": 2.0},
                                  n=3, shear_axis=2, entropy_axis=1)
    ball = meshes.ball(0.9, center=(0.1, 0.2, 0.3), nodes=(8, 12, 16))
    v = I.entropy_circ_odd(ball, flow, 0.0, {"kind": "power", "k": 2}).value
    s = flow.sample(ball.x, 0.0)
    gu = s.grad_u
    curl = np.stack([gu[:, 2, 1] - gu[:, 1, 2], gu[:, 0, 2] - gu[:, 2, 0], gu[:, 1, 0] - gu[:, 0, 1]], -1)
    jac = np.abs(np.linalg.det(ball.J))
    assert abs(v) > 1e-3
    assert np.isclose(v, np.sum(ball.w * jac * s.S ** 2 * np.sum(s.grad_S * curl, -1)), rtol=1e-12)


def test_entropy_2d_componentwise():
    flow = shear2()
    d = meshes.disk(0.8, center=(0.2, 0.9), nodes=(16, 48))
    v = I.entropy_circ_even(d, flow, 0.0, {"kind": "power", "k": 3}).value
    s = flow.sample(d.x, 0.0)
    vort = s.grad_u[:, 1, 0] - s.grad_u[:, 0, 1]
    assert np.isclose(v, np.sum(d.w * np.linalg.det(d.J) * s.S ** 3 * vort), rtol=1e-12)


# --- mass ------------------------------------------------------------------------

def test_mass_constant_density():
    v = I.mass(meshes.box_domain(2, nodes=3), flows.taylor_green(), 0.0)
    assert np.isclose(v.value, 1.0)


def test_mass_stratified_box():
    flow = shear2()
    v = I.mass(meshes.box_domain(2, lo=(0, 0), hi=(2.0, 1.5), nodes=12), flow, 0.0).value
    ref, _ = quad(lambda y: (np.exp(-(0.1 + 0.5 * y))) ** (1 / 1.4), 0, 1.5, epsabs=1e-14)
    assert abs(v - 2.0 * ref) < 1e-10


def test_mass_rejects_surface():
    with pytest.raises(DegreeError):
        I.mass(meshes.circle(1.0), flows.taylor_green(), 0.0)


# --- two routes ------------------------------------------------------------------

ROUTE_CASES = [
    ("circulation", lambda: meshes.circle(0.7, center=(1.0, 2.0), nodes=24), flows.taylor_green, None),
    ("helicity", lambda: meshes.ball(0.9, center=(1, 2, 3), nodes=(4, 6, 8)), flows.abc, None),
    ("helicity", lambda: meshes.circle(0.9, center=(1, 2, 3), plane=(0, 2), nodes=16), flows.abc, None),
    ("enstrophy", lambda: meshes.disk(0.9, center=(1, 2), nodes=(6, 12)), flows.isentropic_vortex, "identity"),
    ("entropy_circ_even", lambda: meshes.rectangle((0, 1), (0, 1), nodes=5), shear2, "identity"),
    ("entropy_circ_odd", lambda: meshes.ball(0.5, center=(0.5, 0.5, 0.5), nodes=(4, 6, 8)), shear3, "identity"),
    ("mass", lambda: meshes.disk(0.9, center=(1, 2), nodes=(6, 12)), flows.isentropic_vortex, None),
]


@pytest.mark.parametrize("kind,mesh,flow,f", ROUTE_CASES)
def test_pullback_and_surface_routes_agree(kind, mesh, flow, f):
    m, fl = mesh(), flow()
    a = I.evaluate(kind, m, fl, 0.1, f=f, form="pullback").value
    b = I.evaluate(kind, m, fl, 0.1, f=f, form="surface").value
    assert abs(a - b) < 1e-11 * max(1.0, abs(a))


def test_surface_route_tilted_plane_in_4d():
    flow = flows.taylor_green_4d()
    E = np.array([[1.0, 0.2], [0.3, 1.0], [0.5, -0.4], [0.1, 0.7]])
    m = meshes.parallelepiped([0.2, 0.4, 0.1, 0.3], E, nodes=5)
    a = I.enstrophy(m, flow, 0.0, "identity", form="pullback").value
    b = I.enstrophy(m, flow, 0.0, "identity", form="surface").value
    assert abs(a) > 1e-3 and abs(a - b) < 1e-12


# --- reductions and identities ---------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_helicity_q0_is_circulation(seed):
    rng = np.random.default_rng(seed)
    loop = meshes.circle(rng.uniform(0.2, 2), center=rng.uniform(0, 6, 2), nodes=32)
    for flow in (flows.taylor_green(), flows.isentropic_vortex()):
        t = rng.uniform(0, 1)
        assert abs(I.helicity(loop, flow, t).value - I.circulation(loop, flow, t).value) < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_full_domain_vorticity_scalar(seed):
    rng = np.random.default_rng(seed)
    flow = [flows.taylor_green(), flows.isentropic_vortex(), flows.taylor_green_4d()][seed % 3]
    n = flow.dim
    m = meshes.parallelepiped(rng.uniform(-1, 1, n), np.eye(n) + 0.2 * rng.normal(size=(n, n)), nodes=2)
    if np.linalg.det(m.J[0]) < 0:
        m = meshes.parallelepiped(rng.uniform(-1, 1, n), np.eye(n), nodes=2)
    sv = I.surface_vorticity(m, flow, 0.2).vort_scalar
    assert np.allclose(sv, I.vorticity_scalar(flow, m.x, 0.2), atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_vortvec_normal_identity(seed):
    rng = np.random.default_rng(seed)
    E = rng.normal(size=(3, 3))
    if abs(np.linalg.det(E)) < 0.1:
        E = np.eye(3)
    m = meshes.parallelepiped(rng.uniform(0, 1, 3), E, nodes=2)
    lhs, rhs = I.vortvec_normal_identity(m, flows.abc(1.0, 0.5, 0.2), 0.0)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_surface_vorticity_xz_plane_abc():
    flow = flows.abc(1.0, 0.6, 0.3)
    E = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    m = meshes.parallelepiped([0.3, 0.5, 0.7], E, nodes=3)
    sv = I.surface_vorticity(m, flow, 0.0).vort_scalar
    gu = flow.sample(m.x, 0.0).grad_u
    # omega_xz = d_x u_z - d_z u_x
    assert np.allclose(sv, gu[:, 2, 0] - gu[:, 0, 2], atol=1e-14)


def rotated_torus():
    T = meshes.product_mesh(meshes.circle(1.0, center=(1.0, 2.0), nodes=24),
                            meshes.circle(0.8, center=(0.5, 1.5), nodes=24))
    Q = special_ortho_group.rvs(4, random_state=3)
    return T.transformed(Q)


@pytest.mark.parametrize("mesh,flow,f", [
    (lambda: meshes.disk(1.2, center=(1.0, 0.7), nodes=(24, 64)), flows.taylor_green, {"kind": "power", "k": 2}),
    (lambda: meshes.disk(0.9, center=(0.2, 0.1), nodes=(24, 64)), flows.isentropic_vortex, "identity"),
    (lambda: meshes.product_mesh(meshes.disk(0.8, center=(1.0, 2.0), nodes=(12, 32)),
                                 meshes.disk(0.7, center=(2.0, 0.5), nodes=(12, 32))),
     flows.taylor_green_4d, "identity"),
    (rotated_torus, flows.taylor_green_4d, {"kind": "power", "k": 3}),
])
def test_enstrophy_rearranged(mesh, flow, f):
    m, fl = mesh(), flow()
    a = I.enstrophy(m, fl, 0.0, f).value
    b = I.enstrophy_rearranged(m, fl, 0.0, f)
    assert abs(a) > 1e-4
    assert abs(a - b) < 1e-8 * max(1.0, abs(a))


def test_entropy_odd_rearranged_nonconstant():
    flow = shear3()
    box = meshes.box_domain(3, lo=(0, 0.1, -0.4), hi=(1, 0.8, 0.5), nodes=12)
    f = {"kind": "power", "k": 2}
    a = I.entropy_circ_odd(box, flow, 0.0, f, weight_of="z").value
    b = I.entropy_odd_rearranged(box, flow, 0.0, f)
    assert abs(a) > 1e-4
    assert abs(a - b) < 1e-8 * max(1.0, abs(a))


# --- boundary conditions and lemma ------------------------------------------------

def test_boundary_conditions_uniform():
    bc = I.boundary_conditions(meshes.disk(1.0), flows.uniform((1.0, 0.5)), 0.0)
    assert bc["entropy_bc"] == 0.0 and bc["helicity_bc"] is None
    bc = I.boundary_conditions(meshes.ball(1.0, nodes=(4, 6, 8)), flows.uniform((1.0, 0.5, 0.0)), 0.0)
    assert bc["helicity_bc"] == 0.0


def test_helicity_bc_on_vorticity_zero_set():
    box = meshes.box_domain(3, lo=(0, 0, 0), hi=(np.pi, np.pi, TWO_PI), nodes=6, periodic=(2,))
    bc = I.boundary_conditions(box, tg3(), 0.0)
    assert bc["helicity_bc"] < 1e-14
    # capped box: the z-faces span the vorticity plane
    off = meshes.box_domain(3, lo=(0, 0, 0), hi=(np.pi, np.pi, 1.0), nodes=6)
    assert I.boundary_conditions(off, tg3(), 0.0)["helicity_bc"] > 0.1


def test_entropy_bc_on_constant_entropy_edges():
    flow = shear2()
    rect = meshes.rectangle((0, 1), (0.2, 0.9), nodes=6)
    kind, vals = I._boundary_quantities(rect.boundary, flow, 0.0)
    assert kind == "entropy"
    horizontal = np.isin(rect.boundary.elements, [2, 3])
    assert np.max(np.abs(vals[horizontal])) < 1e-15
    assert np.min(np.abs(vals[~horizontal])) > 0.1


def test_boundary_conditions_closed_rejected():
    with pytest.raises(ValueError):
        I.boundary_conditions(meshes.circle(1.0), flows.uniform(), 0.0)


def test_lemma_uniform_zero():
    ball = meshes.ball(1.0, nodes=(3, 4, 6))
    assert I.lemma_transport_check(ball, flows.uniform((1.0, 0.0, 0.5)), TimeGrid(0, 0.1, 0.01)) == 0.0


def test_lemma_rigid_rotation_sphere_boundary():
    ball = meshes.ball(1.0, center=(0.3, 0.0, 0.2), nodes=(3, 6, 12))
    res = I.lemma_transport_check(ball, flows.rigid_rotation(1.0, n=3), TimeGrid(0, 0.5, 1e-3), cadence=10)
    assert res < 1e-8


def test_lemma_stratified_shear_order():
    flow = shear2()
    d = meshes.disk(0.4, center=(0.5, 0.6), nodes=(4, 32))
    res = [I.lemma_transport_check(d, flow, TimeGrid(0, 0.4, dt)) for dt in (4e-2, 2e-2, 1e-2)]
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(np.abs(orders - 2) < 0.3), orders


# --- spanning surfaces ---------------------------------------------------------

def test_spanning_disk_vs_loop():
    flow = flows.rigid_rotation(1.3)
    r = I.spanning_constant(meshes.disk(0.9, center=(0.4, 0.2)), flow, 0.0)
    circ = I.circulation(meshes.circle(0.9, center=(0.4, 0.2), nodes=64), flow, 0.0).value
    assert abs(r.value - 2 * 1.3 * np.pi * 0.81) < 1e-10
    assert abs(r.value - r.boundary_value) < 1e-10 and abs(r.boundary_value - circ) < 1e-10


def test_spanning_uniform_zero():
    r = I.spanning_constant(meshes.disk(1.0), flows.uniform((1.0, 2.0)), 0.0)
    assert r.value == 0.0 and abs(r.boundary_value) < 1e-14


def test_spanning_ball_entropy():
    r = I.spanning_constant(meshes.ball(0.8, center=(0.4, 0.5, 0.3), nodes=(10, 16, 32)), shear3(), 0.0)
    assert abs(r.value) > 1e-3
    assert abs(r.value - r.boundary_value) < 1e-6 * abs(r.value)


def test_spanning_requires_boundary():
    with pytest.raises(ValueError):
        I.spanning_constant(meshes.sphere_s2(1.0, nodes=(4, 8)), flows.abc(), 0.0)


# --- weights -----------------------------------------------------------------------

@pytest.mark.parametrize("spec", ["identity", {"kind": "power", "k": 3}, 2.0, {"kind": "s_times_z"}])
def test_weight_derivatives(spec):
    assert I.WeightFn.make(spec).check_derivative() < 1e-7


def test_user_weight_checked():
    w = I.WeightFn("user", fn=np.sin, dfn=np.cos)
    assert np.isclose(w(0.3), np.sin(0.3))
    with pytest.raises(ValueError):
        I.WeightFn("user", fn=np.sin, dfn=np.sin)


def test_weight_errors():
    with pytest.raises(ValueError):
        I.WeightFn("power", k=1.5)
    with pytest.raises(ValueError):
        I.WeightFn("bogus")
