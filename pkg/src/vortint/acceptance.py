"""
Built-in acceptance suite: one row per criterion with the measured value,
its tolerance and the verdict.

``quick=True`` lowers time and mesh resolution where the criterion still
holds at the same tolerance (kelvin, kelvin_compressible, helicity_closed,
enstrophy_boundary, entropy_even, entropy_odd, lemma, identities with 20
configurations, catalog with 200 samples, negative_control).  The spectral
rows keep N=128 because at N=64 the interpolation error no longer dominates.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import flows, meshes
from . import integrals as I
from .advect import TimeGrid, advect_mesh
from .config import validate
from .flows import fd_gradient
from .geom import COVARIANT, AltTensor, wedge
from .harness import drift_metrics, fit_order, flux_balance_error, run
from .spectral import SpectralSolver, as_flow_field

TWO_PI = 2 * np.pi


@dataclass
class Row:
    name: str
    measured: Dict[str, float]
    tolerance: str
    passed: bool
    seconds: float = 0.0
    detail: str = ""

    def line(self) -> str:
        vals = ", ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}" for k, v in self.measured.items())
        verdict = "PASS" if self.passed else "FAIL"
        extra = f" [{self.detail}]" if self.detail else ""
        return f"[{verdict}] {self.name:<20} {vals}  (tol: {self.tolerance}; {self.seconds:.1f}s){extra}"


def _series(mesh, flow, fn, t1, dt, cadence=10, t0=0.0) -> List[I.FunctionalValue]:
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        for snap in advect_mesh(mesh, flow, TimeGrid(t0, t1, dt), cadence=cadence):
            out.append(fn(snap, flow, snap.t))
    return out


def _config(**doc):
    return validate(doc)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def kelvin(quick=False) -> Row:
    nodes, dt = (128, 2e-3) if quick else (256, 1e-3)
    cfg = _config(name="kelvin", flow={"name": "taylor_green"},
                  surface={"builder": "circle", "params": {"r": 1.0, "center": ["pi", "pi"], "nodes": nodes,
                                                           "rule": "gauss"}},
                  integrals=[{"kind": "circulation"}], grid={"t0": 0, "t1": 1.0, "dt": dt},
                  tolerances={"drift_rel": 1e-8})
    rep = run(cfg, write=False).reports[0]
    # the loop about the saddle at (pi, pi) has zero circulation, so the
    # dt-halving ratio is measured on a loop that encloses vorticity
    loop = meshes.circle(1.0, center=(np.pi / 2 + 0.4, np.pi / 2), nodes=nodes, rule="gauss")
    tg = flows.taylor_green()
    d = [drift_metrics(_series(loop, tg, I.circulation, 2.0, h, cadence=1))[0] for h in (0.025, 0.0125)]
    ratio = d[0] / d[1]
    judged = rep.drift_abs if abs(rep.series[0].value) < 1e-12 else rep.drift_rel
    ok = judged < 1e-8 and 16 / 1.5 <= ratio <= 16 * 1.5
    return Row("kelvin", {"value_t0": rep.series[0].value, "drift_abs": rep.drift_abs, "drift_rel": rep.drift_rel,
                          "halving_ratio": ratio},
               "drift < 1e-8 (absolute for a zero-valued loop); halving ratio 16 within x1.5", ok)


def kelvin_compressible(quick=False) -> Row:
    nodes, dt = (128, 2e-3) if quick else (256, 1e-3)
    flow = flows.isentropic_vortex()
    loop = meshes.circle(1.0, center=(0.3, 0.2), nodes=nodes, rule="gauss")
    s = _series(loop, flow, I.circulation, 1.0, dt, cadence=10)
    d_abs, d_rel = drift_metrics(s)
    box = meshes.disk(1.5, center=(0.3, 0.2), nodes=(16, 64) if not quick else (12, 32))
    m = drift_metrics(_series(box, flow, I.mass, 1.0, dt * 5, cadence=20))[1]
    return Row("kelvin_compressible", {"value_t0": s[0].value, "drift_rel": d_rel, "mass_drift_rel": m},
               "drift_rel < 1e-6, mass drift_rel < 1e-6", d_rel < 1e-6 and m < 1e-6)


def helicity_closed(quick=False) -> Row:
    nodes, dt = (12, 5e-3) if quick else (24, 1e-3)
    cfg = _config(name="helicity_closed", flow={"name": "boosted_abc", "params": {"A": 1, "B": 1, "C": 1}},
                  surface={"builder": "box_domain", "params": {"n": 3, "hi": "2*pi", "nodes": nodes, "periodic": True}},
                  integrals=[{"kind": "helicity"}], grid={"t0": 0, "t1": 0.5, "dt": dt, "cadence": 50},
                  tolerances={"drift_rel": 1e-6})
    rep = run(cfg, write=False).reports[0]
    exact = 3 * TWO_PI ** 3
    err0 = abs(rep.series[0].value - exact) / exact
    return Row("helicity_closed", {"value_t0": rep.series[0].value, "rel_err_t0": err0, "drift_rel": rep.drift_rel},
               "|H(0) - 3(2pi)^3|/3(2pi)^3 < 1e-4, drift_rel < 1e-6", err0 < 1e-4 and rep.drift_rel < 1e-6)


def helicity_flux(quick=False) -> Row:
    nodes = (8, 12, 12)
    cfg = _config(name="helicity_flux", flow={"name": "boosted_abc"},
                  surface={"builder": "box_domain",
                           "params": {"n": 3, "lo": [0, 0, 0], "hi": ["pi", "2*pi", "2*pi"], "nodes": list(nodes),
                                      "periodic": [1, 2]}},
                  integrals=[{"kind": "helicity"}], grid={"t0": 0, "t1": 0.5, "dt": 1e-2},
                  refinement={"dt_levels": [1e-2, 5e-3, 2.5e-3], "metric": "flux_balance_err"},
                  tolerances={"order_dt": [2.0, 0.3]})
    rep = run(cfg, write=False).reports[0]
    fit = rep.convergence_orders["dt"]
    # sign of e in the flux factor, on a compressible flow (open curve, q = 0)
    vortex = flows.isentropic_vortex()
    seg = meshes.segment([-0.8, -0.3], [0.6, 0.9], nodes=16)
    errs = {}
    for sign in (-1.0, 1.0):
        s = _series(seg, vortex, lambda m, f, t: I.helicity(m, f, t, energy_sign=sign), 0.5, 2.5e-3, cadence=4)
        errs[sign] = flux_balance_error(s)
    ok = abs(fit.order - 2.0) <= 0.3
    return Row("helicity_flux", {"order": fit.order, "r2": fit.r2, "err_finest": fit.errors[-1],
                                 "vortex_err_minus_e": errs[-1.0], "vortex_err_plus_e": errs[1.0]},
               "flux-balance order 2 +- 0.3 over dt {1e-2, 5e-3, 2.5e-3}", ok,
               detail="minus-e flux balances, plus-e does not" if errs[-1.0] < errs[1.0] else "")


def enstrophy_boundary(quick=False) -> Row:
    dt = 5e-3 if quick else 1e-3
    cfg = _config(name="enstrophy_boundary",
                  flow={"name": "stratified_shear",
                        "params": {"U": {"kind": "sine", "a": 0.3, "b": 1.0}, "S": {"kind": "linear", "a": 0.1, "b": 0.5}}},
                  surface={"builder": "rectangle", "params": {"x_range": [0, 1], "y_range": [0, 1], "nodes": 10}},
                  integrals=[{"kind": "enstrophy", "f": {"kind": "power", "k": 2}}],
                  grid={"t0": 0, "t1": 1.0, "dt": dt}, tolerances={"drift_rel": 1e-8})
    rep = run(cfg, write=False).reports[0]
    fmax = max(abs(s.flux) for s in rep.series)
    return Row("enstrophy_boundary", {"value_t0": rep.series[0].value, "drift_rel": rep.drift_rel, "max_flux": fmax},
               "drift_rel < 1e-8, flux identically 0", rep.drift_rel < 1e-8 and fmax == 0.0)


def enstrophy_spectral(quick=False) -> Row:
    sol = SpectralSolver(128)
    s0 = sol.random(seed=0, band=(1, 4), amplitude=1.0)
    disk = meshes.disk(1.0, center=(3.0, 3.0), nodes=(12, 48))
    drifts = {}
    for cad in (10, 5):
        f = as_flow_field(sol.run(s0, 0.5, 2.5e-3, cadence=cad))
        s = _series(disk, f, lambda m, fl, t: I.enstrophy(m, fl, t, "identity"), 0.5, 5e-3, cadence=10)
        drifts[cad] = drift_metrics(s)[1]
    ok = drifts[10] < 1e-4 and drifts[5] <= drifts[10]
    return Row("enstrophy_spectral", {"drift_rel_cadence10": drifts[10], "drift_rel_cadence5": drifts[5]},
               "drift_rel < 1e-4, not worse at finer snapshot cadence", ok)


def entropy_even(quick=False) -> Row:
    # flux balance on a baroclinic flow, where the boundary flux is nonzero
    flow = flows.baroclinic_affine()
    rect = meshes.rectangle((0.2, 0.8), (0.8, 1.2), nodes=8 if quick else 10)
    levels = [1e-2, 5e-3, 2.5e-3]
    errs = [flux_balance_error(_series(rect, flow, I.entropy_circ_even, 1.0, h, cadence=10)) for h in levels]
    fit = fit_order(levels, errs)
    # stratified shear: horizontal edges are constant-S lines
    shear = flows.stratified_shear(U={"kind": "sine", "a": 0.3, "b": 1.0}, S={"kind": "linear", "a": 0.1, "b": 0.5})
    sq = meshes.rectangle((0.0, 1.0), (0.2, 1.1), nodes=10)
    s = _series(sq, shear, I.entropy_circ_even, 1.0, 5e-3 if quick else 1e-3)
    d_rel = drift_metrics(s)[1]
    kind, vals = I._boundary_quantities(sq.boundary, shear, 0.0)
    edge_bc = float(np.max(np.abs(vals[np.isin(sq.boundary.elements, [2, 3])])))
    ok = abs(fit.order - 2.0) <= 0.3 and d_rel < 1e-8
    return Row("entropy_even", {"order": fit.order, "r2": fit.r2, "shear_drift_rel": d_rel, "edge_entropy_bc": edge_bc},
               "flux-balance order 2 +- 0.3; drift_rel < 1e-8 with constant-S edges", ok)


def entropy_odd(quick=False) -> Row:
    flow = flows.stratified_shear(U={"kind": "sine", "a": 0.3, "b": 1.0},
                                  S={"kind": "tanh", "a": 0.2, "b": 0.7, "k": 1.3}, n=3)
    box = meshes.box_domain(3, lo=(0.0, 0.1, -0.4), hi=(1.0, 0.9, 0.6), nodes=6 if quick else 10)
    s = _series(box, flow, lambda m, f, t: I.entropy_circ_odd(m, f, t, {"kind": "s_times_z"}),
                1.0, 5e-3 if quick else 1e-3)
    d_rel = drift_metrics(s)[1]
    return Row("entropy_odd", {"value_t0": s[0].value, "drift_rel": d_rel}, "drift_rel < 1e-7", d_rel < 1e-7)


def lemma(quick=False) -> Row:
    ball = meshes.ball(1.0, center=(0.3, 0.0, 0.2), nodes=(3, 6, 12))
    rot = flows.rigid_rotation(1.0, n=3)
    r_rot = I.lemma_transport_check(ball, rot, TimeGrid(0.0, 0.5, 1e-3), cadence=1)
    shear = flows.stratified_shear(U={"kind": "sine", "a": 0.3, "b": 1.0}, S={"kind": "linear", "a": 0.1, "b": 0.5})
    disk = meshes.disk(0.4, center=(0.5, 0.6), nodes=(4, 32 if quick else 64))
    levels = [2e-3, 1e-3, 5e-4]
    res = [I.lemma_transport_check(disk, shear, TimeGrid(0.0, 1.0, h)) for h in levels]
    fit = fit_order(levels, res)
    ok = r_rot < 1e-6 and res[1] < 1e-6 and abs(fit.order - 2.0) <= 0.3
    return Row("lemma", {"rotation_residual": r_rot, "shear_residual_dt1e-3": res[1], "shear_order": fit.order},
               "residual < 1e-6 at dt=1e-3; order 2 +- 0.3", ok)


def _random_identities(count, rng):
    worst = {"helicity_q0": 0.0, "full_domain_varpi": 0.0, "vortvec_normal": 0.0,
             "enstrophy_rearranged": 0.0, "entropy_rearranged": 0.0}
    tg, vortex, tg4 = flows.taylor_green(), flows.isentropic_vortex(), flows.taylor_green_4d()
    shear3 = flows.stratified_shear(U={"kind": "sine", "a": 0.3, "b": 1.0},
                                    S={"kind": "tanh", "a": 0.2, "b": 0.7, "k": 1.3}, n=3)
    abc = flows.abc(1.0, 0.7, 0.4)

    def rel(a, b):
        return abs(a - b) / max(1.0, abs(a))

    for k in range(count):
        # helicity of a loop (q = 0) against circulation
        flow = [tg, vortex][k % 2]
        loop = meshes.circle(rng.uniform(0.2, 1.5), center=rng.uniform(-1, 1, 2), nodes=32)
        t = rng.uniform(0, 1)
        worst["helicity_q0"] = max(worst["helicity_q0"], rel(I.helicity(loop, flow, t).value,
                                                             I.circulation(loop, flow, t).value))
        # surface vorticity of a full-dimensional patch
        flow = [tg, vortex, tg4][k % 3]
        n = flow.dim
        E = np.eye(n) + 0.3 * rng.normal(size=(n, n))
        if np.linalg.det(E) < 0:
            E[:, 0] *= -1
        patch = meshes.parallelepiped(rng.uniform(-1, 1, n), E, nodes=2)
        worst["full_domain_varpi"] = max(worst["full_domain_varpi"], float(np.max(np.abs(
            I.surface_vorticity(patch, flow, 0.3).vort_scalar - I.vorticity_scalar(flow, patch.x, 0.3)))))
        # g(vartheta_S, n_S) = varpi_dS on the boundary of a 3-patch
        E = rng.normal(size=(3, 3))
        while abs(np.linalg.det(E)) < 0.2:
            E = rng.normal(size=(3, 3))
        p3 = meshes.parallelepiped(rng.uniform(0, 2, 3), E, nodes=2)
        lhs, rhs = I.vortvec_normal_identity(p3, abc, 0.0)
        worst["vortvec_normal"] = max(worst["vortvec_normal"], float(np.max(np.abs(lhs - rhs))))
        # rearranged enstrophy: disks in 2-D, tilted 2-planes in 4-D
        f = {"kind": "power", "k": int(rng.integers(1, 4))}
        if k % 2:
            m = meshes.disk(rng.uniform(0.3, 1.2), center=rng.uniform(0, 3, 2), nodes=(20, 48))
            flow = [tg, vortex][(k // 2) % 2]
        else:
            m = meshes.parallelepiped(rng.uniform(0, 2, 4), rng.normal(size=(4, 2)) * 0.8, nodes=16)
            flow = tg4
        worst["enstrophy_rearranged"] = max(worst["enstrophy_rearranged"],
                                            rel(I.enstrophy(m, flow, 0.0, f).value,
                                                I.enstrophy_rearranged(m, flow, 0.0, f)))
        # rearranged odd entropy circulation on random boxes in the stratified shear
        lo = rng.uniform(-0.5, 0.5, 3)
        box = meshes.box_domain(3, lo=lo, hi=lo + rng.uniform(0.3, 0.8, 3), nodes=8)
        fz = {"kind": "constant", "c": float(rng.uniform(-2, 2))} if k % 2 else {"kind": "power", "k": int(rng.integers(1, 3))}
        worst["entropy_rearranged"] = max(worst["entropy_rearranged"],
                                          rel(I.entropy_circ_odd(box, shear3, 0.0, fz, weight_of="z").value,
                                              I.entropy_odd_rearranged(box, shear3, 0.0, fz)))
    return worst


def identities(quick=False) -> Row:
    rng = np.random.default_rng(2024)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        worst = _random_identities(20 if quick else 100, rng)
    return Row("identities", worst, "each < 1e-8 over random configurations", all(v < 1e-8 for v in worst.values()))


def spanning(quick=False) -> Row:
    rot = flows.rigid_rotation(1.3)
    r = I.spanning_constant(meshes.disk(0.9, center=(0.4, 0.2)), rot, 0.0)
    circ = I.circulation(meshes.circle(0.9, center=(0.4, 0.2), nodes=64), rot, 0.0).value
    exact = 2 * 1.3 * np.pi * 0.81
    d_disk = max(abs(r.value - circ), abs(r.value - exact), abs(r.boundary_value - circ))
    shear3 = flows.stratified_shear(U={"kind": "sine", "a": 0.3, "b": 1.0},
                                    S={"kind": "tanh", "a": 0.2, "b": 0.7, "k": 1.3}, n=3)
    b = I.spanning_constant(meshes.ball(0.8, center=(0.4, 0.5, 0.3), nodes=(10, 16, 32)), shear3, 0.0)
    d_ball = abs(b.value - b.boundary_value) / abs(b.value)
    return Row("spanning", {"disk_vs_loop": d_disk, "ball_pairing_rel": d_ball},
               "disk vs loop < 1e-10, 3-ball pairing < 1e-6", d_disk < 1e-10 and d_ball < 1e-6)


def catalog(quick=False) -> Row:
    count = 200 if quick else 1000
    worst = 0.0
    for name in sorted(flows.CATALOG):
        res = flows.max_residuals(flows.make_flow(name), count=count, seed=11)
        worst = max(worst, max(res.values()))
    sol = SpectralSolver(128)
    traj = sol.run(sol.random(seed=0, band=(1, 4)), 0.5, 2.5e-3)
    spec = max(flows.max_residuals(as_flow_field(traj), count=count // 4, seed=11, t_range=(0.0, 0.5)).values())
    return Row("catalog", {"analytic_worst": worst, "spectral_worst": spec},
               "analytic < 1e-8, spectral < 1e-4", worst < 1e-8 and spec < 1e-4)


def negative_control(quick=False) -> Row:
    flow = flows.baroclinic_affine(n=3, W=0.3)
    box = meshes.box_domain(3, lo=(0.2, 0.8, 0.0), hi=(0.8, 1.2, 1.0), nodes=4 if quick else 6)
    x = box.x
    grad_eS = fd_gradient(lambda y: flow.sample(y, 0.0).e_S, x)
    dS = AltTensor(3, 1, COVARIANT, flow.sample(x, 0.0).grad_S)
    baro = float(np.max(np.abs(wedge(AltTensor(3, 1, COVARIANT, grad_eS), dS).coeffs)))
    levels = [1e-2, 5e-3, 2.5e-3]
    drifts = [drift_metrics(_series(box, flow, I.helicity, 1.0, h))[1] for h in levels]
    ok = baro > 0 and min(drifts) > 1e-3 and drifts[-1] / drifts[0] > 0.5
    return Row("negative_control", {"max_deS_wedge_dS": baro, "drift_rel_coarse": drifts[0],
                                    "drift_rel_fine": drifts[-1]},
               "drift_rel > 1e-3 at every dt and not shrinking (fine/coarse > 0.5)", ok)


SUITE: Dict[str, Callable[..., Row]] = {
    "kelvin": kelvin,
    "kelvin_compressible": kelvin_compressible,
    "helicity_closed": helicity_closed,
    "helicity_flux": helicity_flux,
    "enstrophy_boundary": enstrophy_boundary,
    "enstrophy_spectral": enstrophy_spectral,
    "entropy_even": entropy_even,
    "entropy_odd": entropy_odd,
    "lemma": lemma,
    "identities": identities,
    "spanning": spanning,
    "catalog": catalog,
    "negative_control": negative_control,
}


def run_criterion(name: str, quick: bool = False) -> Row:
    start = time.perf_counter()
    row = SUITE[name](quick=quick)
    row.seconds = time.perf_counter() - start
    return row


def run_suite(quick: bool = False, only: Optional[List[str]] = None, echo: Optional[Callable] = None) -> List[Row]:
    names = list(SUITE) if not only else list(only)
    unknown = [n for n in names if n not in SUITE]
    if unknown:
        raise KeyError(f"unknown criteria {unknown}; known: {list(SUITE)}")
    rows = []
    for name in names:
        row = run_criterion(name, quick)
        if echo:
            echo(row.line())
        rows.append(row)
    return rows
