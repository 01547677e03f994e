import itertools
import json
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vortint.geom import (
    AltTensor, COVARIANT, CONTRAVARIANT, MetricChart, SurfaceFrame, compound_matrix,
    evaluate_form, flat, frame_minors, frame_volume, frame_volume_tensor, hook,
    metric_contraction, outward_unit_normal, permutation_sign, sharp,
    surface_volume_tensors, volume_tensors, wedge, wedge_power,
)
from vortint.errors import DegenerateFrameError, DegreeError, MetricError


# --- brute-force oracles on full antisymmetric arrays ----------------------

def full_wedge(A, B):
    j, k = A.ndim, B.ndim
    n = A.shape[0] if j else B.shape[0]
    out = np.zeros((n,) * (j + k))
    for idx in itertools.product(range(n), repeat=j + k):
        tot = 0.0
        for perm in itertools.permutations(range(j + k)):
            p = [idx[m] for m in perm]
            tot += permutation_sign(perm) * A[tuple(p[:j])] * B[tuple(p[j:])]
        out[idx] = tot / (factorial(j) * factorial(k))
    return out


def full_hook(V, A):
    p = V.ndim
    return np.tensordot(V, A, axes=(list(range(p)), list(range(p)))) / factorial(p)


def random_form(rng, n, k, variance=COVARIANT):
    return AltTensor(n, k, variance, rng.normal(size=len(list(itertools.combinations(range(n), k)))))


# --- wedge -----------------------------------------------------------------

def test_wedge_basis_case():
    dx, dy = AltTensor.basis(2, [0]), AltTensor.basis(2, [1])
    w = wedge(dx, dy)
    assert w.degree == 2
    assert w.coeffs.tolist() == [1.0]


def test_one_form_wedge_itself_vanishes():
    rng = np.random.default_rng(0)
    a = random_form(rng, 4, 1)
    assert np.all(wedge(a, a).coeffs == 0)


def test_omega_squared_in_r4_matches_bruteforce():
    om = AltTensor.basis(4, [0, 1]) + AltTensor.basis(4, [2, 3])
    ww = wedge(om, om)
    oracle = AltTensor.from_full(full_wedge(om.full(), om.full()))
    np.testing.assert_allclose(ww.coeffs, oracle.coeffs)
    np.testing.assert_allclose(ww.coeffs, [2.0])


@pytest.mark.parametrize("n,j,k", [(3, 1, 1), (3, 1, 2), (4, 2, 2), (4, 1, 2), (5, 2, 3), (4, 0, 3)])
def test_wedge_matches_full_array_oracle(n, j, k):
    rng = np.random.default_rng(n * 100 + j * 10 + k)
    a, b = random_form(rng, n, j), random_form(rng, n, k)
    oracle = AltTensor.from_full(full_wedge(a.full(), b.full())) if j + k else None
    np.testing.assert_allclose(wedge(a, b).coeffs, oracle.coeffs, atol=1e-12)


@pytest.mark.parametrize("n,j,k", [(3, 1, 1), (4, 1, 2), (4, 2, 2), (5, 2, 1), (5, 1, 3)])
def test_wedge_graded_antisymmetry(n, j, k):
    rng = np.random.default_rng(7)
    a, b = random_form(rng, n, j), random_form(rng, n, k)
    np.testing.assert_allclose(wedge(a, b).coeffs, (-1) ** (j * k) * wedge(b, a).coeffs, atol=1e-12)


def test_wedge_associative():
    rng = np.random.default_rng(3)
    a, b, c = random_form(rng, 5, 1), random_form(rng, 5, 2), random_form(rng, 5, 1)
    np.testing.assert_allclose(wedge(wedge(a, b), c).coeffs, wedge(a, wedge(b, c)).coeffs, atol=1e-12)


def test_wedge_degree_overflow_rejected():
    with pytest.raises(DegreeError):
        wedge(AltTensor.basis(3, [0, 1]), AltTensor.basis(3, [1, 2]))


def test_wedge_power():
    om = AltTensor.basis(6, [0, 1]) + AltTensor.basis(6, [2, 3]) + AltTensor.basis(6, [4, 5])
    np.testing.assert_allclose(wedge_power(om, 3).coeffs, [6.0])
    assert wedge_power(om, 0).degree == 0


# --- hook ------------------------------------------------------------------

def test_hook_basis_case():
    r = hook(AltTensor.basis(2, [0], CONTRAVARIANT), AltTensor.basis(2, [0, 1]))
    np.testing.assert_allclose(r.coeffs, [0.0, 1.0])


def test_hook_rigid_rotation_vorticity_scalar():
    Om = 0.7
    vol = volume_tensors(np.eye(2))
    val = hook(vol.eps_g, AltTensor.basis(2, [0, 1], value=2 * Om)).value()
    brute = full_hook(vol.eps_g.full(), AltTensor.basis(2, [0, 1], value=2 * Om).full())
    assert val == pytest.approx(2 * Om)
    assert float(brute) == pytest.approx(2 * Om)


def test_hook_omega_squared_r4():
    om = AltTensor.basis(4, [0, 1]) + AltTensor.basis(4, [2, 3])
    eps = volume_tensors(np.eye(4)).eps_g
    assert hook(eps, wedge(om, om)).value() == pytest.approx(2.0)
    assert float(full_hook(eps.full(), wedge(om, om).full())) == pytest.approx(2.0)


@pytest.mark.parametrize("n,p,k", [(3, 1, 2), (3, 2, 3), (4, 2, 3), (4, 1, 4), (5, 2, 4), (4, 2, 2)])
def test_hook_matches_full_contraction(n, p, k):
    rng = np.random.default_rng(11 * n + p + k)
    v = random_form(rng, n, p, CONTRAVARIANT)
    a = random_form(rng, n, k)
    r = hook(v, a)
    oracle = full_hook(v.full(), a.full())
    if k - p:
        np.testing.assert_allclose(r.coeffs, AltTensor.from_full(oracle).coeffs, atol=1e-12)
    else:
        assert r.value() == pytest.approx(float(oracle))


def test_hook_errors():
    with pytest.raises(DegreeError):
        hook(AltTensor.basis(3, [0, 1], CONTRAVARIANT), AltTensor.basis(3, [2]))
    with pytest.raises(DegreeError):
        hook(AltTensor.basis(3, [0]), AltTensor.basis(3, [0, 1]))


@pytest.mark.parametrize("n,j,k", [(3, 1, 1), (4, 2, 1), (4, 1, 2), (5, 2, 2), (5, 3, 1)])
def test_graded_leibniz(n, j, k):
    rng = np.random.default_rng(5)
    for _ in range(10):
        v = random_form(rng, n, 1, CONTRAVARIANT)
        a, b = random_form(rng, n, j), random_form(rng, n, k)
        lhs = hook(v, wedge(a, b))
        rhs = wedge(hook(v, a), b) + (-1) ** j * wedge(a, hook(v, b))
        np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-10)


@given(st.integers(1, 6), st.floats(-1e3, 1e3, allow_nan=False))
def test_volume_pairing_recovers_top_coefficient(n, c):
    eps = volume_tensors(np.eye(n)).eps_g
    alpha = AltTensor(n, n, COVARIANT, [c])
    assert hook(eps, alpha).value() == c


def test_pure_functions_bit_identical():
    rng = np.random.default_rng(1)
    a, b = random_form(rng, 5, 2), random_form(rng, 5, 2)
    r1, r2 = wedge(a, b).coeffs.copy(), wedge(a, b).coeffs.copy()
    assert np.array_equal(r1, r2)


def test_batched_wedge_and_hook():
    rng = np.random.default_rng(2)
    a = AltTensor(3, 1, COVARIANT, rng.normal(size=(7, 3)))
    b = AltTensor(3, 2, COVARIANT, rng.normal(size=(7, 3)))
    w = wedge(a, b)
    assert w.batch_shape == (7,)
    for i in range(7):
        np.testing.assert_allclose(w.coeffs[i], wedge(a[i], b[i]).coeffs)


# --- full expansion, json -------------------------------------------------

@pytest.mark.parametrize("n,k", [(3, 2), (4, 2), (4, 3), (5, 3)])
def test_full_roundtrip_exact(n, k):
    a = random_form(np.random.default_rng(k), n, k)
    assert np.array_equal(AltTensor.from_full(a.full()).coeffs, a.coeffs)
    F = a.full()
    assert np.allclose(F, -np.swapaxes(F, 0, 1))


def test_json_dump():
    a = AltTensor.basis(3, [2, 0], value=1.5)
    d = json.loads(a.to_json())
    assert d["degree"] == 2 and d["variance"] == "covariant"
    assert d["indices"] == [[0, 1], [0, 2], [1, 2]]
    assert np.array_equal(AltTensor.from_json(a.to_json()).coeffs, a.coeffs)


def test_invalid_coefficient_count():
    with pytest.raises(DegreeError):
        AltTensor(3, 2, COVARIANT, np.zeros(2))


# --- metric ----------------------------------------------------------------

def test_sharp_euclidean_identity():
    r = sharp(AltTensor.basis(3, [0]), np.eye(3))
    assert r.variance == CONTRAVARIANT
    assert r.coeffs.tolist() == [1.0, 0.0, 0.0]


def test_sharp_diagonal_metric():
    r = sharp(AltTensor.basis(2, [0]), np.diag([4.0, 1.0]))
    np.testing.assert_allclose(r.coeffs, [0.25, 0.0])


def random_spd(rng, n):
    A = rng.normal(size=(n, n))
    return A @ A.T + n * np.eye(n)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_flat_sharp_roundtrip(seed, k):
    rng = np.random.default_rng(seed)
    g = random_spd(rng, 3)
    a = random_form(rng, 3, k)
    back = flat(sharp(a, g), g)
    np.testing.assert_allclose(back.coeffs, a.coeffs, rtol=1e-12, atol=1e-12)


def test_sharp_matches_full_index_raising():
    rng = np.random.default_rng(9)
    g = random_spd(rng, 4)
    gi = np.linalg.inv(g)
    a = random_form(rng, 4, 2)
    full = np.einsum("ia,jb,ab->ij", gi, gi, a.full())
    np.testing.assert_allclose(sharp(a, g).coeffs, AltTensor.from_full(full).coeffs, atol=1e-12)


def test_singular_metric_rejected():
    with pytest.raises(MetricError):
        sharp(AltTensor.basis(2, [0]), np.array([[1.0, 1.0], [1.0, 1.0]]))
    chart = MetricChart(2, lambda x: np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(MetricError, match="x="):
        chart.metric(np.array([0.5, 0.5]))


def test_euclidean_chart_and_fd_metric_derivative():
    ch = MetricChart.flat(3)
    assert np.array_equal(ch.metric(np.array([1.0, 2.0, 3.0])), np.eye(3))
    polar_like = MetricChart(2, lambda x: np.diag([1.0, x[0] ** 2 + 1.0]))
    dg = polar_like.metric_derivative(np.array([0.7, 0.2]))
    assert dg[0][1, 1] == pytest.approx(1.4, rel=1e-9)
    assert dg[1][1, 1] == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_volume_tensor_normalization(n):
    rng = np.random.default_rng(n)
    g = random_spd(rng, n)
    vol = volume_tensors(g)
    assert metric_contraction(vol.eps_g, vol.eps_g, g) == pytest.approx(factorial(n), rel=1e-10)
    assert pair_value(vol) == pytest.approx(1.0)


def pair_value(vol):
    return hook(vol.eps_g, vol.eps_form).value()


def test_compound_matrix_first_and_top():
    M = np.random.default_rng(4).normal(size=(4, 4))
    np.testing.assert_allclose(compound_matrix(M, 1), M)
    np.testing.assert_allclose(compound_matrix(M, 4), [[np.linalg.det(M)]])


# --- surface frames --------------------------------------------------------

def test_xy_plane_volume_tensor_in_r3():
    frame = SurfaceFrame.from_tangents(np.eye(3)[:, :2])
    eps_S, _, dens = surface_volume_tensors(frame)
    np.testing.assert_allclose(eps_S.coeffs, AltTensor.basis(3, [0, 1], CONTRAVARIANT).coeffs, atol=1e-14)
    np.testing.assert_allclose(frame.normals[:, 0], [0, 0, 1])
    assert dens == 1.0


def test_circle_arclength_density():
    r, th = 2.5, 0.4
    frame = SurfaceFrame.from_tangents(np.array([[-r * np.sin(th)], [r * np.cos(th)]]))
    _, _, dens = surface_volume_tensors(frame)
    assert dens == pytest.approx(r)


def random_orthonormal(rng, n):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Q


def test_tilted_plane_boundary_identity_r4():
    rng = np.random.default_rng(12)
    for _ in range(50):
        J = rng.normal(size=(4, 2))
        T = J[:, 1:]
        transversal = J[:, 0]
        nhat = outward_unit_normal(T, transversal)
        frame = SurfaceFrame.from_tangents(J, boundary_normal=nhat)
        frame.check()
        eps_S, eps_dS, _ = surface_volume_tensors(frame)
        recon = wedge(AltTensor.vector(nhat), eps_dS)
        np.testing.assert_allclose(recon.coeffs, eps_S.coeffs, atol=1e-10)


def test_normals_path_matches_minor_path():
    rng = np.random.default_rng(13)
    for n, s in [(3, 1), (3, 2), (4, 2), (4, 3), (5, 2), (3, 3)]:
        for _ in range(10):
            J = rng.normal(size=(n, s))
            frame = SurfaceFrame.from_tangents(J)
            eps_S, _, dens = surface_volume_tensors(frame)
            np.testing.assert_allclose(eps_S.coeffs, frame_volume_tensor(J).coeffs, atol=1e-10)
            assert dens == pytest.approx(float(frame_volume(J)))


def test_nonuniform_metric_frame():
    rng = np.random.default_rng(14)
    g = random_spd(rng, 3)
    J = rng.normal(size=(3, 2))
    frame = SurfaceFrame.from_tangents(J, g=g)
    frame.check()
    vol = volume_tensors(g)
    eps_S, _, dens = surface_volume_tensors(frame, vol)
    np.testing.assert_allclose(eps_S.coeffs, frame_volume_tensor(J, g).coeffs, atol=1e-10)
    assert dens == pytest.approx(np.sqrt(np.linalg.det(J.T @ g @ J)))


def test_degenerate_frame_rejected():
    J = np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(DegenerateFrameError):
        SurfaceFrame.from_tangents(J, node=17)


def test_axis_aligned_contraction_consistency():
    """eps(S) -| omega^q agrees with picking the tangential component directly."""
    rng = np.random.default_rng(15)
    om = AltTensor(4, 2, COVARIANT, rng.normal(size=6))
    J = np.eye(4)[:, [1, 3]]
    eps_S = frame_volume_tensor(J)
    assert hook(eps_S, om).value() == pytest.approx(om.coeffs[4])   # slot (1, 3)
    assert evaluate_form(om, J) == pytest.approx(om.coeffs[4])


def test_frame_minors_batched():
    rng = np.random.default_rng(16)
    J = rng.normal(size=(5, 3, 2))
    m = frame_minors(J)
    assert m.shape == (5, 3)
    np.testing.assert_allclose(m[:, 0], J[:, 0, 0] * J[:, 1, 1] - J[:, 1, 0] * J[:, 0, 1])
