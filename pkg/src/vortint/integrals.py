"""
Conserved integrals, their boundary fluxes and surface vorticity quantities.

Each integral has two evaluation routes:

* ``form="pullback"`` feeds the frames J to the ambient form
  (alpha(J_1..J_s) from s x s minors);
* ``form="surface"`` builds the surface volume tensor eps(S) from an
  orthonormal completion of the normal space and contracts it with the
  ambient tensors, e.g. int (eps(S) -| omega^q) -| u dV_S for helicity.

Both are exact in the continuum and agree to roundoff on any mesh.  The
``flux`` of a :class:`FunctionalValue` is the boundary term whose value is
d(value)/dt along the flow; it is 0 for closed surfaces.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .advect import SurfaceMesh, TimeGrid, advect_mesh, pullback_values
from .errors import DegreeError
from .flows import FlowField, bernoulli, fd_gradient, vorticity_from_gradient
from .geom import (AltTensor, COVARIANT, SurfaceFrame, frame_volume, hook, outward_unit_normal,
                   surface_volume_tensors, volume_tensors, wedge, wedge_power)

FD_CHECK_TOL = 1e-7


# ---------------------------------------------------------------------------
# weight functions
# ---------------------------------------------------------------------------

class WeightFn:
    """Weight f of one argument z, or of two arguments (S, z).

    ``antiderivative`` integrates in the first argument (z for arity 1,
    S for arity 2).
    """

    def __init__(self, kind="identity", k=None, c=None, fn=None, dfn=None, Fn=None, arity=1,
                 d2fn=None, check=True):
        self.kind, self.arity = kind, arity
        self.k, self.c = k, c
        if kind == "identity":
            self._f, self._df, self._F = (lambda z: z), (lambda z: np.ones_like(z)), (lambda z: 0.5 * z * z)
        elif kind == "power":
            if k is None or int(k) != k or k < 0:
                raise ValueError("power weight needs a non-negative integer exponent")
            k = int(k)
            self._f = lambda z: z ** k
            self._df = (lambda z: k * z ** (k - 1)) if k > 0 else (lambda z: np.zeros_like(z))
            self._F = lambda z: z ** (k + 1) / (k + 1)
        elif kind == "constant":
            cc = 1.0 if c is None else float(c)
            self._f, self._df, self._F = (lambda z: np.full_like(z, cc)), (lambda z: np.zeros_like(z)), (lambda z: cc * z)
        elif kind == "s_times_z":
            self.arity = 2
            self._f = lambda S, z: S * z
            self._df = (lambda S, z: z, lambda S, z: S)
            self._F = lambda S, z: 0.5 * S * S * z
        elif kind == "user":
            if fn is None or dfn is None:
                raise ValueError("user weight needs fn and its derivative dfn")
            self._f, self._df, self._F = fn, dfn, Fn
        else:
            raise ValueError(f"unknown weight kind {kind!r}")
        if kind == "user" and check:
            err = self.check_derivative()
            if err > FD_CHECK_TOL:
                raise ValueError(f"user weight derivative disagrees with central differences ({err:.2e})")

    @classmethod
    def make(cls, spec) -> "WeightFn":
        if isinstance(spec, WeightFn):
            return spec
        if spec is None:
            return cls("identity")
        if isinstance(spec, str):
            return cls(spec)
        if isinstance(spec, (int, float)):
            return cls("constant", c=spec)
        return cls(**spec)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def uses_z(self) -> bool:
        return self.arity == 2

    def __call__(self, *args):
        args = [np.asarray(a, dtype=float) for a in args]
        return self._f(*args)

    def derivative(self, *args, wrt: int = 0):
        args = [np.asarray(a, dtype=float) for a in args]
        if self.arity == 2:
            return self._df[wrt](*args)
        return self._df(*args)

    def antiderivative(self, *args):
        if self._F is None:
            raise ValueError(f"weight {self.kind!r} has no antiderivative")
        return self._F(*[np.asarray(a, dtype=float) for a in args])

    def check_derivative(self, lo=-2.0, hi=2.0, m=41, h=1e-5) -> float:
        z = np.linspace(lo, hi, m)
        if self.arity == 1:
            fd = (self(z + h) - self(z - h)) / (2 * h)
            return float(np.max(np.abs(fd - self.derivative(z))))
        S, Z = np.meshgrid(z, z)
        e0 = (self(S + h, Z) - self(S - h, Z)) / (2 * h) - self.derivative(S, Z, wrt=0)
        e1 = (self(S, Z + h) - self(S, Z - h)) / (2 * h) - self.derivative(S, Z, wrt=1)
        return float(max(np.max(np.abs(e0)), np.max(np.abs(e1))))

    def __repr__(self):
        return f"WeightFn({self.kind!r})"


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionalValue:
    value: float
    flux: float
    t: float


@dataclass(frozen=True)
class SurfaceVorticity:
    q: int
    vort_scalar: Optional[np.ndarray] = None
    vort_vector: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# pointwise fields
# ---------------------------------------------------------------------------

def _u_flat(s):
    return AltTensor(s.u.shape[-1], 1, COVARIANT, s.u)


def _dS(s):
    return AltTensor(s.grad_S.shape[-1], 1, COVARIANT, s.grad_S)


def _omega(s):
    return vorticity_from_gradient(s.grad_u)


def _top_coefficient(form: AltTensor):
    if form.degree != form.dim:
        raise DegreeError("not a top-degree form")
    return form.coeffs[..., 0]


def vorticity_scalar(flow: FlowField, x, t) -> np.ndarray:
    """varpi = eps_g -| omega^(n/2); needs even n."""
    if flow.dim % 2:
        raise DegreeError(f"vorticity scalar is undefined in odd dimension n={flow.dim}")
    return _top_coefficient(wedge_power(_omega(flow.sample(x, t)), flow.dim // 2))


def entropy_circulation_scalar(flow: FlowField, x, t) -> np.ndarray:
    """c = eps_g -| (dS ^ omega^((n-1)/2)); needs odd n."""
    if flow.dim % 2 == 0:
        raise DegreeError(f"entropy circulation scalar is undefined in even dimension n={flow.dim}")
    s = flow.sample(x, t)
    return _top_coefficient(wedge(_dS(s), wedge_power(_omega(s), (flow.dim - 1) // 2)))


def vorticity_over_rho(flow, x, t):
    return vorticity_scalar(flow, x, t) / flow.sample(x, t).rho


def entropy_circ_over_rho(flow, x, t):
    return entropy_circulation_scalar(flow, x, t) / flow.sample(x, t).rho


def _grad_form(fn, flow, x, t):
    return AltTensor(flow.dim, 1, COVARIANT, fd_gradient(lambda y: fn(flow, y, t), x))


# ---------------------------------------------------------------------------
# quadrature routes
# ---------------------------------------------------------------------------

def _integrate(mesh: SurfaceMesh, alpha: AltTensor, form: str = "pullback",
               surface_scalar: Optional[Callable] = None) -> float:
    """int_mesh alpha.

    ``surface_scalar(eps_S, k)`` optionally replaces the plain pairing of
    eps(S) with alpha in the surface route, so that quantities can be built
    exactly as the surface formulation states them (e.g. via the vorticity
    vector).
    """
    if alpha.degree != mesh.sdim:
        raise DegreeError(f"form of degree {alpha.degree} on a {mesh.sdim}-dimensional surface")
    if form == "pullback":
        return mesh.quadrature(pullback_values(mesh, alpha))
    if form != "surface":
        raise ValueError(f"unknown formulation {form!r}")
    return mesh.quadrature(_surface_density(mesh, alpha, surface_scalar))


def _surface_density(mesh: SurfaceMesh, alpha: AltTensor, surface_scalar=None) -> np.ndarray:
    vol = volume_tensors(np.eye(mesh.dim))
    out = np.empty(mesh.size)
    dens = frame_volume(mesh.J) if mesh.sdim else np.ones(mesh.size)
    for k in range(mesh.size):
        if mesh.sdim == 0:
            out[k] = alpha.coeffs[k, 0]
            continue
        frame = SurfaceFrame.from_tangents(mesh.J[k], node=k)
        eps_S, _, _ = surface_volume_tensors(frame, vol)
        if surface_scalar is not None:
            val = surface_scalar(eps_S, k)
        else:
            val = hook(alpha[k], eps_S).value()
        out[k] = dens[k] * float(val)
    return out


def _require_closed_or_boundary(mesh):
    if not mesh.closed and mesh.boundary is None:
        raise ValueError(f"{mesh.label}: open surface without a boundary mesh")


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------

def circulation(loop: SurfaceMesh, flow: FlowField, t: Optional[float] = None,
                form: str = "pullback") -> FunctionalValue:
    """Kelvin circulation of a closed loop."""
    if loop.sdim != 1:
        raise DegreeError("circulation needs a curve")
    if not loop.closed:
        raise ValueError("circulation is defined on closed loops only")
    t = loop.t if t is None else t
    s = flow.sample(loop.x, t)
    u = _u_flat(s)
    val = _integrate(loop, u, form, lambda eps, k: hook(u[k], eps).value())
    return FunctionalValue(val, 0.0, t)


def helicity(surface: SurfaceMesh, flow: FlowField, t: Optional[float] = None, form: str = "pullback",
             energy_sign: float = -1.0) -> FunctionalValue:
    """int_S u ^ omega^q on a (2q+1)-surface; flux = oint_dS sigma omega^q."""
    s_dim = surface.sdim
    if s_dim % 2 == 0:
        raise DegreeError(f"helicity needs an odd-dimensional surface, got sdim={s_dim}")
    if not flow.isentropic:
        warnings.warn(f"helicity is not conserved in the non-isentropic flow {flow.name}", stacklevel=2)
    q = (s_dim - 1) // 2
    t = surface.t if t is None else t
    s = flow.sample(surface.x, t)
    u, om = _u_flat(s), _omega(s)
    omq = wedge_power(om, q)
    alpha = wedge(u, omq)
    val = _integrate(surface, alpha, form, lambda eps, k: hook(u[k], hook(omq[k], eps)).value())
    return FunctionalValue(val, helicity_flux(surface, flow, t, energy_sign), t)


def helicity_flux(surface: SurfaceMesh, flow: FlowField, t: float, energy_sign: float = -1.0) -> float:
    if surface.closed:
        return 0.0
    _require_closed_or_boundary(surface)
    q = (surface.sdim - 1) // 2
    bd = surface.boundary
    sb = flow.sample(bd.x, t)
    beta = wedge_power(_omega(sb), q) * bernoulli(sb, energy_sign)
    return bd.quadrature(pullback_values(bd, beta))


def _varpi_over_rho(flow, x, t):
    return vorticity_over_rho(flow, x, t)


def enstrophy(surface: SurfaceMesh, flow: FlowField, t: Optional[float] = None, f=None,
              form: str = "pullback") -> FunctionalValue:
    """int_S f(varpi/rho) omega^q on a 2q-surface; no flux."""
    f = WeightFn.make(f)
    if surface.sdim % 2:
        raise DegreeError(f"enstrophy needs an even-dimensional surface, got sdim={surface.sdim}")
    if flow.dim % 2 and not f.is_constant:
        raise DegreeError(f"vorticity scalar is undefined in odd dimension n={flow.dim}; "
                          "only constant weights are allowed there")
    if not flow.isentropic:
        warnings.warn(f"enstrophy is not conserved in the non-isentropic flow {flow.name}", stacklevel=2)
    q = surface.sdim // 2
    t = surface.t if t is None else t
    s = flow.sample(surface.x, t)
    omq = wedge_power(_omega(s), q)
    if f.is_constant:
        weight = f(np.zeros(surface.size))
    else:
        weight = f(_varpi_over_rho(flow, surface.x, t))
    alpha = omq * weight
    val = _integrate(surface, alpha, form, lambda eps, k: weight[k] * hook(omq[k], eps).value())
    return FunctionalValue(val, 0.0, t)


def enstrophy_rearranged(surface: SurfaceMesh, flow: FlowField, t: Optional[float] = None, f=None) -> float:
    """-int_S f' d(varpi/rho) ^ u ^ omega^(q-1) + oint_dS f u ^ omega^(q-1).

    Equals the enstrophy integral by Stokes, with or without boundary.
    """
    f = WeightFn.make(f)
    q = surface.sdim // 2
    t = surface.t if t is None else t
    s = flow.sample(surface.x, t)
    u, om = _u_flat(s), _omega(s)
    rest = wedge(u, wedge_power(om, q - 1))
    if f.is_constant:
        interior = 0.0
    else:
        z = _varpi_over_rho(flow, surface.x, t)
        dz = _grad_form(_varpi_over_rho, flow, surface.x, t)
        interior = -surface.quadrature(pullback_values(surface, wedge(dz, rest) * f.derivative(z)))
    bdry = 0.0
    if not surface.closed:
        bd = surface.boundary
        sb = flow.sample(bd.x, t)
        wb = f(np.zeros(bd.size)) if f.is_constant else f(_varpi_over_rho(flow, bd.x, t))
        beta = wedge(_u_flat(sb), wedge_power(_omega(sb), q - 1)) * wb
        bdry = bd.quadrature(pullback_values(bd, beta))
    return interior + bdry


def _check_even_entropy_degree(surface, flow):
    if surface.sdim % 2:
        raise DegreeError(f"even entropy circulation needs an even-dimensional surface, got {surface.sdim}")
    q = surface.sdim // 2
    if not 1 <= q <= flow.dim // 2:
        raise DegreeError(f"q={q} outside 1..floor(n/2) for n={flow.dim}")
    return q


def entropy_circ_even(surface: SurfaceMesh, flow: FlowField, t: Optional[float] = None, f=None,
                      form: str = "pullback") -> FunctionalValue:
    """int_S f(S) omega^q; flux = q oint_dS e_S f(S) dS ^ omega^(q-1)."""
    f = WeightFn.make(f)
    q = _check_even_entropy_degree(surface, flow)
    t = surface.t if t is None else t
    s = flow.sample(surface.x, t)
    omq = wedge_power(_omega(s), q)
    weight = f(s.S)
    alpha = omq * weight
    val = _integrate(surface, alpha, form, lambda eps, k: weight[k] * hook(omq[k], eps).value())
    return FunctionalValue(val, entropy_even_flux(surface, flow, t, f), t)


def entropy_even_flux(surface: SurfaceMesh, flow: FlowField, t: float, f=None) -> float:
    f = WeightFn.make(f)
    if surface.closed:
        return 0.0
    _require_closed_or_boundary(surface)
    q = surface.sdim // 2
    bd = surface.boundary
    sb = flow.sample(bd.x, t)
    beta = wedge(_dS(sb), wedge_power(_omega(sb), q - 1)) * (q * sb.e_S * f(sb.S))
    return bd.quadrature(pullback_values(bd, beta))


def _odd_weight(f: WeightFn, flow, s, x, t, weight_of="S"):
    if f.is_constant:
        return f(np.zeros(len(x)))
    if f.uses_z or weight_of == "z":
        if flow.dim % 2 == 0:
            raise DegreeError(f"c/rho is undefined in even dimension n={flow.dim}")
        z = entropy_circ_over_rho(flow, x, t)
        return f(s.S, z) if f.uses_z else f(z)
    return f(s.S)


def entropy_circ_odd(surface: SurfaceMesh, flow: FlowField, t: Optional[float] = None, f=None,
                     form: str = "pullback", weight_of: str = "S") -> FunctionalValue:
    """int_S f dS ^ omega^q on a (2q+1)-surface; no flux.

    f is a function of (S, c/rho) for two-argument weights, otherwise of S
    (``weight_of="S"``) or of c/rho (``weight_of="z"``).
    """
    f = WeightFn.make(f)
    if surface.sdim % 2 == 0:
        raise DegreeError(f"odd entropy circulation needs an odd-dimensional surface, got {surface.sdim}")
    q = (surface.sdim - 1) // 2
    t = surface.t if t is None else t
    s = flow.sample(surface.x, t)
    dS, omq = _dS(s), wedge_power(_omega(s), q)
    weight = _odd_weight(f, flow, s, surface.x, t, weight_of)
    alpha = wedge(dS, omq) * weight
    val = _integrate(surface, alpha, form, lambda eps, k: weight[k] * hook(dS[k], hook(omq[k], eps)).value())
    return FunctionalValue(val, 0.0, t)


def entropy_odd_rearranged(surface: SurfaceMesh, flow: FlowField, t: Optional[float] = None, f=None) -> float:
    """-int_S f' S d(c/rho) ^ omega^q + oint_dS f S omega^q, for f = f(c/rho)."""
    f = WeightFn.make(f)
    if f.arity != 1:
        raise ValueError("the rearranged form is stated for f of c/rho alone")
    q = (surface.sdim - 1) // 2
    t = surface.t if t is None else t
    s = flow.sample(surface.x, t)
    omq = wedge_power(_omega(s), q)
    if f.is_constant:
        interior = 0.0
    else:
        z = entropy_circ_over_rho(flow, surface.x, t)
        dz = _grad_form(entropy_circ_over_rho, flow, surface.x, t)
        interior = -surface.quadrature(pullback_values(surface, wedge(dz, omq) * (f.derivative(z) * s.S)))
    bdry = 0.0
    if not surface.closed:
        bd = surface.boundary
        sb = flow.sample(bd.x, t)
        zb = np.zeros(bd.size) if f.is_constant else entropy_circ_over_rho(flow, bd.x, t)
        beta = wedge_power(_omega(sb), q) * (f(zb) * sb.S)
        bdry = bd.quadrature(pullback_values(bd, beta))
    return interior + bdry


def mass(domain: SurfaceMesh, flow: FlowField, t: Optional[float] = None, form: str = "pullback") -> FunctionalValue:
    if domain.sdim != flow.dim:
        raise DegreeError(f"mass needs a full-dimensional domain (sdim {domain.sdim} != n {flow.dim})")
    t = domain.t if t is None else t
    rho = flow.sample(domain.x, t).rho
    vol = volume_tensors(np.eye(flow.dim))
    alpha = AltTensor(flow.dim, flow.dim, COVARIANT, rho[..., None])
    val = _integrate(domain, alpha, form, lambda eps, k: rho[k] * hook(vol.eps_form, eps).value())
    return FunctionalValue(val, 0.0, t)


# ---------------------------------------------------------------------------
# surface vorticity and boundary conditions
# ---------------------------------------------------------------------------

def surface_vorticity(mesh: SurfaceMesh, flow: FlowField, t: Optional[float] = None) -> SurfaceVorticity:
    """varpi_S (even s) or the tangent vector vartheta_S (odd s) at every node.

    Boundary meshes use the induced orientation carried by their nodes.
    """
    t = mesh.t if t is None else t
    s = flow.sample(mesh.x, t)
    om = _omega(s)
    vol = volume_tensors(np.eye(mesh.dim))
    if mesh.sdim % 2 == 0:
        q = mesh.sdim // 2
        if mesh.sdim == 0:
            return SurfaceVorticity(0, vort_scalar=mesh.orientation.copy())
        vals = evaluate_density(wedge_power(om, q), mesh)
        return SurfaceVorticity(q, vort_scalar=vals)
    q = (mesh.sdim - 1) // 2
    omq = wedge_power(om, q)
    vecs = np.empty((mesh.size, mesh.dim))
    for k in range(mesh.size):
        eps_S, _, _ = surface_volume_tensors(SurfaceFrame.from_tangents(mesh.J[k], node=k), vol)
        vecs[k] = mesh.orientation[k] * hook(omq[k], eps_S).coeffs
    return SurfaceVorticity(q, vort_vector=vecs)


def evaluate_density(alpha: AltTensor, mesh: SurfaceMesh) -> np.ndarray:
    """eps(S) -| alpha at each node: alpha(J)/|J| times the node orientation."""
    return mesh.orientation * pullback_values(mesh, alpha) / frame_volume(mesh.J)


def boundary_normals(surface: SurfaceMesh) -> np.ndarray:
    bd = surface.boundary
    return np.stack([outward_unit_normal(bd.J[k], bd.transversal[k]) for k in range(bd.size)])


def vortvec_normal_identity(surface: SurfaceMesh, flow: FlowField, t: Optional[float] = None):
    """(g(vartheta_S, n_hat), varpi_dS) at every boundary node of an odd surface."""
    if surface.sdim % 2 == 0 or surface.boundary is None:
        raise ValueError("needs an odd-dimensional surface with boundary")
    t = surface.t if t is None else t
    bd = surface.boundary
    # the surface frame at a boundary node is [transversal | tangents] with orientation o_B
    frames = bd.frames()
    surf = SurfaceMesh(bd.x, frames, bd.w, bd.orientation, surface.sdim, True, t=t)
    vv = surface_vorticity(surf, flow, t).vort_vector
    lhs = np.sum(vv * boundary_normals(surface), axis=-1)
    rhs = surface_vorticity(bd, flow, t).vort_scalar
    return lhs, rhs


def _boundary_quantities(bd: SurfaceMesh, flow: FlowField, t: float):
    """Per-node varpi_dS (even boundary) or vartheta_dS -| d S (odd boundary)."""
    s = flow.sample(bd.x, t)
    om = _omega(s)
    if bd.sdim % 2 == 0:
        if bd.sdim == 0:
            return "helicity", bd.orientation.copy()
        return "helicity", evaluate_density(wedge_power(om, bd.sdim // 2), bd)
    alpha = wedge(_dS(s), wedge_power(om, (bd.sdim - 1) // 2))
    return "entropy", evaluate_density(alpha, bd)


def boundary_conditions(surface: SurfaceMesh, flow: FlowField, t: Optional[float] = None) -> dict:
    """Sup norms of the two flux conditions; the one that does not apply is None."""
    if surface.closed or surface.boundary is None:
        raise ValueError("boundary conditions are vacuous on a closed surface")
    t = surface.t if t is None else t
    kind, vals = _boundary_quantities(surface.boundary, flow, t)
    out = {"helicity_bc": None, "entropy_bc": None}
    out[kind + "_bc"] = float(np.max(np.abs(vals)))
    return out


def boundary_divergence(bd: SurfaceMesh, flow: FlowField, t: float) -> np.ndarray:
    """div_dS u = tr((T^T T)^-1 T^T grad(u) T) for boundary tangents T."""
    if bd.sdim == 0:
        return np.zeros(bd.size)
    _, gu = flow.velocity(bd.x, t)
    T = bd.J
    TT = np.swapaxes(T, -1, -2)
    G = TT @ T
    return np.trace(np.linalg.solve(G, TT @ gu @ T), axis1=-2, axis2=-1)


def lemma_transport_check(mesh: SurfaceMesh, flow: FlowField, grid: TimeGrid, cadence: int = 1) -> float:
    """Max relative residual of dQ/dt = -Q div_dS u along advected boundary nodes.

    Q is varpi_dS for even-dimensional boundaries and vartheta_dS -| d S for
    odd ones; dQ/dt by central differences over the snapshots.
    """
    if mesh.boundary is None:
        raise ValueError("lemma check needs a surface with boundary")
    Qs, divs, ts = [], [], []
    for snap in advect_mesh(mesh, flow, grid, cadence=cadence):
        bd = snap.boundary
        Qs.append(_boundary_quantities(bd, flow, snap.t)[1])
        divs.append(boundary_divergence(bd, flow, snap.t))
        ts.append(snap.t)
    Q, D, T = np.array(Qs), np.array(divs), np.array(ts)
    if len(T) < 3:
        raise ValueError("need at least three snapshots")
    dQ = (Q[2:] - Q[:-2]) / (T[2:] - T[:-2])[:, None]
    res = np.abs(dQ + Q[1:-1] * D[1:-1])
    return float(np.max(res) / max(float(np.max(np.abs(Q))), 1e-12))


# ---------------------------------------------------------------------------
# spanning surfaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpanningResult:
    value: float
    boundary_value: float
    kind: str


def spanning_constant(sigma: SurfaceMesh, flow: FlowField, t: Optional[float] = None, f=None,
                      kind: Optional[str] = None) -> SpanningResult:
    """Generalized vorticity constant on Sigma and its Stokes-equivalent boundary form.

    kind "vorticity" (even Sigma): int f(varpi/rho) varpi_Sigma dV, with f
    constant when n is odd; boundary form oint f u ^ omega^(q-1) plus the
    interior correction for non-constant f.
    kind "entropy" (odd Sigma): int f(S, c/rho) vartheta_Sigma -| dS dV;
    boundary form oint F(S) varpi_dSigma dV with dF/dS = f (f of S only).
    """
    f = WeightFn.make(f if f is not None else {"kind": "constant", "c": 1.0})
    if sigma.closed or sigma.boundary is None:
        raise ValueError("spanning surface must have a (closed) boundary")
    if not sigma.boundary.closed:
        raise ValueError("boundary of the spanning surface must be closed")
    t = sigma.t if t is None else t
    kind = kind or ("vorticity" if sigma.sdim % 2 == 0 else "entropy")
    if kind == "vorticity":
        if sigma.sdim % 2:
            raise DegreeError("vorticity constant needs an even-dimensional spanning surface")
        if flow.dim % 2 and not f.is_constant:
            raise DegreeError("in odd dimension the vorticity constant needs a constant weight")
        val = enstrophy(sigma, flow, t, f).value
        return SpanningResult(val, enstrophy_rearranged(sigma, flow, t, f), kind)
    if sigma.sdim % 2 == 0:
        raise DegreeError("entropy constant needs an odd-dimensional spanning surface")
    val = entropy_circ_odd(sigma, flow, t, f).value
    if f.uses_z:
        raise ValueError("boundary form is available for f of S only")
    bd = sigma.boundary
    q = (sigma.sdim - 1) // 2
    sb = flow.sample(bd.x, t)
    beta = wedge_power(_omega(sb), q) * f.antiderivative(sb.S)
    return SpanningResult(val, bd.quadrature(pullback_values(bd, beta)), kind)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

INTEGRALS = {
    "circulation": circulation,
    "helicity": helicity,
    "enstrophy": enstrophy,
    "entropy_circ_even": entropy_circ_even,
    "entropy_circ_odd": entropy_circ_odd,
    "mass": mass,
}


def required_parity(kind: str):
    """(surface parity, needs closed) constraints used by config validation."""
    return {"circulation": ("odd", True), "helicity": ("odd", False), "enstrophy": ("even", False),
            "entropy_circ_even": ("even", False), "entropy_circ_odd": ("odd", False),
            "mass": ("full", False)}[kind]


def evaluate(kind: str, mesh: SurfaceMesh, flow: FlowField, t=None, f=None, **params) -> FunctionalValue:
    fn = INTEGRALS[kind]
    if kind in ("enstrophy", "entropy_circ_even", "entropy_circ_odd"):
        return fn(mesh, flow, t, f=f, **params)
    return fn(mesh, flow, t, **params)
