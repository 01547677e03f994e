"""
Exact and manufactured inviscid flows with their thermodynamics.

Every flow is Euclidean and vectorized: ``flow.sample(x, t)`` takes points
of shape ``(..., n)`` and a scalar time and returns a :class:`FluidSample`
of arrays.  ``grad_u[..., i, j]`` is ``d u^i / d x^j``.

Compressible flows use the ideal-gas-like law P(rho, S) = rho^gamma e^S,
whose energy e = int rho^-2 P drho = e^S rho^(gamma-1) / (gamma-1) is
taken with zero integration constant.  Incompressible flows carry e = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .errors import DomainError
from .geom import AltTensor, COVARIANT, multi_indices

TWO_PI = 2.0 * np.pi
FD_REL_STEP = 1e-4


# ---------------------------------------------------------------------------
# samples and thermodynamics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FluidSample:
    u: np.ndarray
    grad_u: np.ndarray
    rho: np.ndarray
    grad_rho: np.ndarray
    S: np.ndarray
    grad_S: np.ndarray
    p: np.ndarray
    grad_p: np.ndarray
    e: np.ndarray
    e_S: np.ndarray

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(getattr(self, f))) for f in self.__dataclass_fields__)


@dataclass(frozen=True)
class IdealGasEOS:
    """P(rho, S) = rho^gamma exp(S)."""

    gamma: float = 1.4

    def pressure(self, rho, S):
        return rho ** self.gamma * np.exp(S)

    def energy(self, rho, S):
        return np.exp(S) * rho ** (self.gamma - 1.0) / (self.gamma - 1.0)

    def energy_S(self, rho, S):
        # de/dS = e for this law
        return self.energy(rho, S)

    def grad_energy_S(self, rho, S, grad_rho, grad_S):
        e = self.energy_S(rho, S)[..., None]
        return e * (grad_S + (self.gamma - 1.0) * grad_rho / rho[..., None])


@dataclass(frozen=True)
class CurlSample:
    omega: AltTensor
    sigma: np.ndarray


def _incompressible_thermo(shape, n, p, grad_p):
    z = np.zeros(shape)
    zv = np.zeros(shape + (n,))
    return dict(rho=np.ones(shape), grad_rho=zv, S=z, grad_S=zv.copy(), p=p, grad_p=grad_p,
                e=z.copy(), e_S=z.copy())


def _compressible_thermo(eos: IdealGasEOS, rho, grad_rho, S, grad_S):
    p = eos.pressure(rho, S)
    # dP = P (gamma drho/rho + dS)
    grad_p = p[..., None] * (eos.gamma * grad_rho / rho[..., None] + grad_S)
    e = eos.energy(rho, S)
    return dict(rho=rho, grad_rho=grad_rho, S=S, grad_S=grad_S, p=p, grad_p=grad_p,
                e=e, e_S=eos.energy_S(rho, S))


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def fd_gradient(f: Callable, x: np.ndarray, rel_step: float = FD_REL_STEP) -> np.ndarray:
    """4th-order central gradient of ``f`` (values of shape ``(..., *m)``) at x.

    Returns shape ``(..., *m, n)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    h = rel_step * (1.0 + np.abs(x))
    cols = []
    for j in range(n):
        e = np.zeros_like(x)
        e[..., j] = h[..., j]
        hj = h[..., j]
        d = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e))
        hj = hj.reshape(hj.shape + (1,) * (d.ndim - hj.ndim))
        cols.append(d / (12.0 * hj))
    return np.stack(cols, axis=-1)


def fd_time(f: Callable, t: float, rel_step: float = FD_REL_STEP):
    h = rel_step * (1.0 + abs(t))
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12.0 * h)


# ---------------------------------------------------------------------------
# flow container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowField:
    """Immutable flow: fields as functions of (x, t).

    ``rates`` optionally returns analytic time derivatives
    (keys ``u``, ``grad_u``, ``rho``, ``S``); missing keys fall back to
    central differences in time.
    """

    name: str
    dim: int
    isentropic: bool
    incompressible: bool
    steady: bool
    _sample: Callable = field(repr=False)
    eos: Optional[IdealGasEOS] = None
    periodic: bool = False
    params: Dict = field(default_factory=dict)
    t_range: tuple = (-np.inf, np.inf)
    in_domain: Optional[Callable] = field(default=None, repr=False)
    sample_box: tuple = None
    rates: Optional[Callable] = field(default=None, repr=False)
    _velocity: Optional[Callable] = field(default=None, repr=False)
    analytic: bool = True

    @property
    def flags(self):
        return {"isentropic": self.isentropic, "incompressible": self.incompressible,
                "steady": self.steady}

    def _prepare(self, x, t):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DomainError(f"{self.name}: expected points of dimension {self.dim}, got {x.shape[-1]}")
        if not np.all(np.isfinite(x)):
            raise DomainError(f"{self.name}: non-finite position")
        lo, hi = self.t_range
        if not lo - 1e-12 <= t <= hi + 1e-12:
            raise DomainError(f"{self.name}: t={t} outside horizon [{lo}, {hi}]")
        if self.periodic:
            x = np.mod(x, TWO_PI)
        elif self.in_domain is not None and not np.all(self.in_domain(x, t)):
            raise DomainError(f"{self.name}: point outside domain at t={t}")
        return x

    def sample(self, x, t: float) -> FluidSample:
        return self._sample(self._prepare(x, t), float(t))

    def velocity(self, x, t: float):
        """(u, grad_u) only; the cheap path used by advection."""
        x = self._prepare(x, t)
        if self._velocity is not None:
            return self._velocity(x, float(t))
        s = self._sample(x, float(t))
        return s.u, s.grad_u

    def wrap(self, x):
        return np.mod(x, TWO_PI) if self.periodic else np.asarray(x, dtype=float)


def sample_flow(flow: FlowField, x, t: float) -> FluidSample:
    return flow.sample(x, t)


def from_primitives(name, dim, u, rho=None, S=None, p=None, eos=None, steady=False,
                    isentropic=True, periodic=False, sample_box=None,
                    t_range=(-np.inf, np.inf)) -> FlowField:
    """Flow from field callables only; gradients by 4th-order differences.

    Incompressible flows pass ``p`` and leave ``rho``/``S``/``eos`` unset.
    Compressible flows pass ``rho``, ``S`` and ``eos``.  A missing pressure
    is taken as zero (kinematic use only).
    """
    incompressible = eos is None
    if p is None:
        p = lambda y, t: np.zeros(np.shape(y)[:-1])

    def velocity(x, t):
        uf = lambda y: u(y, t)
        return uf(x), fd_gradient(uf, x)

    def sample(x, t):
        val, gu = velocity(x, t)
        shape = x.shape[:-1]
        if incompressible:
            pf = lambda y: p(y, t)
            thermo = _incompressible_thermo(shape, dim, pf(x), fd_gradient(pf, x))
        else:
            rf, sf = (lambda y: rho(y, t)), (lambda y: S(y, t))
            thermo = _compressible_thermo(eos, rf(x), fd_gradient(rf, x), sf(x), fd_gradient(sf, x))
        return FluidSample(u=val, grad_u=gu, **thermo)

    return FlowField(name, dim, isentropic=incompressible or isentropic, incompressible=incompressible,
                     steady=steady, _sample=sample, eos=eos, periodic=periodic,
                     sample_box=sample_box, t_range=t_range, _velocity=velocity, analytic=False)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def _rotation_generator(omega, n, generator):
    if generator is not None:
        A = np.asarray(generator, dtype=float)
        if A.shape != (n, n) and n == 2:
            n = A.shape[0]
        if not np.allclose(A, -A.T):
            raise ValueError("rotation generator must be antisymmetric")
        return A
    A = np.zeros((n, n))
    A[0, 1], A[1, 0] = -omega, omega
    return A


def rigid_rotation(omega: float = 1.0, n: int = 2, generator=None, p0: float = 0.0) -> FlowField:
    """u = A x for an antisymmetric A (default: rotation by omega in the x-y plane)."""
    A = _rotation_generator(omega, n, generator)
    n = A.shape[0]
    AtA = A.T @ A

    def velocity(x, t):
        return x @ A.T, np.broadcast_to(A, x.shape[:-1] + (n, n)).copy()

    def sample(x, t):
        u, gu = velocity(x, t)
        p = 0.5 * np.sum(u * u, axis=-1) + p0
        return FluidSample(u=u, grad_u=gu, **_incompressible_thermo(x.shape[:-1], n, p, x @ AtA.T))

    return FlowField("rigid_rotation", n, True, True, True, sample,
                     params={"omega": omega, "n": n}, sample_box=(-np.ones(n), np.ones(n)),
                     _velocity=velocity)


def _tg_velocity(x):
    sx, cx = np.sin(x[..., 0]), np.cos(x[..., 0])
    sy, cy = np.sin(x[..., 1]), np.cos(x[..., 1])
    u = np.stack([sx * cy, -cx * sy], axis=-1)
    gu = np.stack([np.stack([cx * cy, -sx * sy], -1), np.stack([sx * sy, -cx * cy], -1)], -2)
    return u, gu


def taylor_green() -> FlowField:
    """Steady cellular flow u = (sin x cos y, -cos x sin y), p = (cos 2x + cos 2y)/4."""

    def sample(x, t):
        u, gu = _tg_velocity(x)
        p = 0.25 * (np.cos(2 * x[..., 0]) + np.cos(2 * x[..., 1]))
        gp = np.stack([-0.5 * np.sin(2 * x[..., 0]), -0.5 * np.sin(2 * x[..., 1])], -1)
        return FluidSample(u=u, grad_u=gu, **_incompressible_thermo(x.shape[:-1], 2, p, gp))

    return FlowField("taylor_green", 2, True, True, True, sample, periodic=True,
                     sample_box=(np.zeros(2), np.full(2, TWO_PI)),
                     _velocity=lambda x, t: _tg_velocity(x))


def _abc_fields(x, A, B, C):
    sx, cx = np.sin(x[..., 0]), np.cos(x[..., 0])
    sy, cy = np.sin(x[..., 1]), np.cos(x[..., 1])
    sz, cz = np.sin(x[..., 2]), np.cos(x[..., 2])
    u = np.stack([A * sz + C * cy, B * sx + A * cz, C * sy + B * cx], -1)
    z = np.zeros_like(sx)
    gu = np.stack([
        np.stack([z, -C * sy, A * cz], -1),
        np.stack([B * cx, z, -A * sz], -1),
        np.stack([-B * sx, C * cy, z], -1),
    ], -2)
    return u, gu


def _abc_sample(x, A, B, C, shift=None):
    u, gu = _abc_fields(x, A, B, C)
    p = -0.5 * np.sum(u * u, axis=-1)
    gp = -np.einsum("...i,...ij->...j", u, gu)
    if shift is not None:
        u = u + shift
    return FluidSample(u=u, grad_u=gu, **_incompressible_thermo(x.shape[:-1], 3, p, gp))


def abc(A: float = 1.0, B: float = 1.0, C: float = 1.0) -> FlowField:
    """Arnold-Beltrami-Childress flow; curl u = u and p = -|u|^2/2."""
    return FlowField("abc", 3, True, True, True, lambda x, t: _abc_sample(x, A, B, C),
                     periodic=True, params={"A": A, "B": B, "C": C},
                     sample_box=(np.zeros(3), np.full(3, TWO_PI)),
                     _velocity=lambda x, t: _abc_fields(x, A, B, C))


def boosted_abc(A: float = 1.0, B: float = 1.0, C: float = 1.0, U=(0.3, 0.2, 0.1)) -> FlowField:
    """Galilean boost of the ABC flow: u(x, t) = U + u_ABC(x - U t)."""
    U = np.asarray(U, dtype=float)

    def velocity(x, t):
        u, gu = _abc_fields(x - U * t, A, B, C)
        return u + U, gu

    return FlowField("boosted_abc", 3, True, True, False,
                     lambda x, t: _abc_sample(x - U * t, A, B, C, shift=U),
                     periodic=True, params={"A": A, "B": B, "C": C, "U": U.tolist()},
                     sample_box=(np.zeros(3), np.full(3, TWO_PI)), t_range=(-np.inf, np.inf),
                     _velocity=velocity)


def uniform(U=(1.0, 0.0), p0: float = 1.0) -> FlowField:
    U = np.asarray(U, dtype=float)
    n = U.size

    def velocity(x, t):
        shape = x.shape[:-1]
        return np.broadcast_to(U, shape + (n,)).copy(), np.zeros(shape + (n, n))

    def sample(x, t):
        u, gu = velocity(x, t)
        shape = x.shape[:-1]
        return FluidSample(u=u, grad_u=gu,
                           **_incompressible_thermo(shape, n, np.full(shape, p0), np.zeros(shape + (n,))))

    return FlowField("uniform", n, True, True, True, sample, params={"U": U.tolist()},
                     sample_box=(-np.ones(n), np.ones(n)), _velocity=velocity)


def isentropic_vortex(beta: float = 5.0, gamma: float = 1.4, U_inf=(1.0, 0.0),
                      center=(0.0, 0.0), K: float = 1.0) -> FlowField:
    """Translating compressible vortex, an exact solution of the Euler equations.

    u = U_inf + beta/(2 pi) exp((1 - r^2)/2) (-y, x),
    T = 1 - (gamma - 1) beta^2 / (8 gamma pi^2) exp(1 - r^2),
    rho = T^(1/(gamma-1)), p = K rho^gamma, coordinates relative to the
    centre moving with U_inf.
    """
    U = np.asarray(U_inf, dtype=float)
    x0 = np.asarray(center, dtype=float)
    eos = IdealGasEOS(gamma)
    c = beta / (2 * np.pi)
    a = (gamma - 1) * beta ** 2 / (8 * gamma * np.pi ** 2)
    S0 = math.log(K)

    def velocity(x, t):
        xb = x - x0 - U * t
        X, Y = xb[..., 0], xb[..., 1]
        f = c * np.exp(0.5 * (1 - X * X - Y * Y))
        u = np.stack([U[0] - f * Y, U[1] + f * X], -1)
        gu = np.stack([np.stack([f * X * Y, -f * (1 - Y * Y)], -1),
                       np.stack([f * (1 - X * X), -f * X * Y], -1)], -2)
        return u, gu

    def sample(x, t):
        u, gu = velocity(x, t)
        xb = x - x0 - U * t
        ex = np.exp(1 - np.sum(xb * xb, axis=-1))
        T = 1 - a * ex
        grad_T = (2 * a * ex)[..., None] * xb
        rho = T ** (1.0 / (gamma - 1))
        grad_rho = (rho / ((gamma - 1) * T))[..., None] * grad_T
        S = np.full(T.shape, S0)
        thermo = _compressible_thermo(eos, rho, grad_rho, S, np.zeros_like(xb))
        return FluidSample(u=u, grad_u=gu, **thermo)

    return FlowField("isentropic_vortex", 2, True, False, False, sample, eos=eos,
                     params={"beta": beta, "gamma": gamma, "U_inf": U.tolist(),
                             "center": x0.tolist(), "K": K},
                     sample_box=(x0 - 3, x0 + 3), _velocity=velocity)


@dataclass(frozen=True)
class Profile:
    """One-dimensional profile with its derivative: linear, sine, tanh or constant."""

    kind: str = "linear"
    a: float = 0.0
    b: float = 1.0
    k: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "sine", "tanh", "constant"):
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def make(cls, spec) -> "Profile":
        if isinstance(spec, Profile):
            return spec
        if isinstance(spec, (int, float)):
            return cls("constant", a=float(spec), b=0.0)
        return cls(**spec)

    def __call__(self, y):
        if self.kind == "linear":
            return self.a + self.b * y
        if self.kind == "sine":
            return self.a + self.b * np.sin(self.k * y + self.phase)
        if self.kind == "tanh":
            return self.a + self.b * np.tanh(self.k * y + self.phase)
        return self.a + 0.0 * y

    def deriv(self, y):
        if self.kind == "linear":
            return self.b + 0.0 * y
        if self.kind == "sine":
            return self.b * self.k * np.cos(self.k * y + self.phase)
        if self.kind == "tanh":
            return self.b * self.k / np.cosh(self.k * y + self.phase) ** 2
        return 0.0 * y

    @property
    def periodic(self):
        return self.kind in ("sine", "constant") and (self.kind == "constant" or float(self.k).is_integer())


def stratified_shear(U=None, S=None, gamma: float = 1.4, p0: float = 1.0, n: int = 2,
                     shear_axis: int = 1, entropy_axis: Optional[int] = None) -> FlowField:
    """Steady parallel shear u = (U(x_a), 0, ...) with entropy S(x_b) and uniform pressure.

    rho = (p0 exp(-S))^(1/gamma).  Defaults: a = 1, b = 1 in 2-D and b = n-1
    otherwise, so the 3-D flow has S = S(z).
    """
    Up = Profile.make(U if U is not None else {"kind": "linear", "a": 0.0, "b": 1.0})
    Sp = Profile.make(S if S is not None else {"kind": "linear", "a": 0.0, "b": 0.5})
    if entropy_axis is None:
        entropy_axis = 1 if n == 2 else n - 1
    if shear_axis == 0 or entropy_axis == 0:
        raise ValueError("shear and entropy profiles must not depend on the streamwise coordinate")
    eos = IdealGasEOS(gamma)

    def velocity(x, t):
        y = x[..., shear_axis]
        u = np.zeros_like(x)
        u[..., 0] = Up(y)
        gu = np.zeros(x.shape + (n,))
        gu[..., 0, shear_axis] = Up.deriv(y)
        return u, gu

    def sample(x, t):
        u, gu = velocity(x, t)
        zb = x[..., entropy_axis]
        Sv = Sp(zb)
        grad_S = np.zeros_like(x)
        grad_S[..., entropy_axis] = Sp.deriv(zb)
        rho = (p0 * np.exp(-Sv)) ** (1.0 / gamma)
        grad_rho = -(rho / gamma)[..., None] * grad_S
        thermo = _compressible_thermo(eos, rho, grad_rho, Sv, grad_S)
        return FluidSample(u=u, grad_u=gu, **thermo)

    box_hi = np.full(n, TWO_PI) if (Up.periodic and Sp.periodic) else np.ones(n)
    return FlowField("stratified_shear", n, False, False, True, sample, eos=eos,
                     params={"U": Up.__dict__.copy(), "S": Sp.__dict__.copy(), "gamma": gamma,
                             "p0": p0, "n": n, "shear_axis": shear_axis, "entropy_axis": entropy_axis},
                     sample_box=(np.zeros(n), box_hi), _velocity=velocity)


class _AffineHistory:
    """L(t) = [[1, b], [0, d]] solving b'' = -k d^(1-g), d'' = k b d^(-g)."""

    def __init__(self, kappa, gamma, a0, t_span):
        from scipy.integrate import solve_ivp

        self.kappa, self.gamma = kappa, gamma

        def rhs(t, y):
            b, d, db, dd = y
            return [db, dd, -kappa * d ** (1 - gamma), kappa * b * d ** (-gamma)]

        y0 = [0.0, 1.0, a0, 0.0]
        lo, hi = t_span
        opts = dict(method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True)
        self._fwd = solve_ivp(rhs, (0.0, hi), y0, **opts).sol if hi > 0 else None
        self._bwd = solve_ivp(rhs, (0.0, lo), y0, **opts).sol if lo < 0 else None
        self._rhs = rhs

    def state(self, t):
        """(b, d, b', d', b'', d'')."""
        sol = self._fwd if t >= 0 else self._bwd
        y = sol(t) if sol is not None else np.array([0.0, 1.0, 0.0, 0.0])
        acc = self._rhs(t, y)
        return (*y, acc[2], acc[3])


def baroclinic_affine(kappa: float = 0.5, gamma: float = 1.4, a0: float = 0.4, c0: float = 2.0,
                      W: float = 0.0, n: int = 2, t_span=(-0.5, 2.0)) -> FlowField:
    """Compressible non-isentropic affine flow with de_S ^ dS != 0.

    Particles move as x = L(t) xi with L = [[1, b], [0, d]] (plus a uniform
    drift W along z when n = 3).  Fields:

        rho = 1/x2,  S = ln(kappa xi1 + c0) + gamma ln xi2,
        p = d^-gamma (kappa xi1 + c0),  xi = L^-1 x.

    Momentum closes when b'' = -kappa d^(1-gamma) and d'' = kappa b d^-gamma,
    integrated numerically.  The planar vorticity obeys
    d/dt (omega_12 det L) = -b'' = kappa d^(1-gamma), a baroclinic torque.
    """
    if n not in (2, 3):
        raise ValueError("baroclinic_affine is defined for n = 2 or 3")
    hist = _AffineHistory(kappa, gamma, a0, t_span)
    eos = IdealGasEOS(gamma)

    def matrices(t):
        b, d, db, dd, ddb, ddd = hist.state(t)
        M = np.zeros((n, n))
        M[0, 1], M[1, 1] = db / d, dd / d
        # M' = L'' L^-1 - M^2
        M2 = np.zeros((n, n))
        M2[0, 1], M2[1, 1] = ddb / d, ddd / d
        Mdot = M2 - M @ M
        return b, d, db, dd, M, Mdot

    def velocity(x, t):
        M = matrices(t)[4]
        u = x @ M.T
        if n == 3:
            u[..., 2] += W
        return u, np.broadcast_to(M, x.shape[:-1] + (n, n)).copy()

    def labels(x, t):
        b, d = matrices(t)[:2]
        return x[..., 0] - b * x[..., 1] / d, x[..., 1] / d

    def sample(x, t):
        u, gu = velocity(x, t)
        b, d = matrices(t)[:2]
        x2 = x[..., 1]
        xi1, xi2 = labels(x, t)
        arg = kappa * xi1 + c0
        rho = 1.0 / x2
        grad_rho = np.zeros_like(x)
        grad_rho[..., 1] = -1.0 / x2 ** 2
        S = np.log(arg) + gamma * np.log(xi2)
        grad_S = np.zeros_like(x)
        grad_S[..., 0] = kappa / arg
        grad_S[..., 1] = -kappa * b / (d * arg) + gamma / x2
        thermo = _compressible_thermo(eos, rho, grad_rho, S, grad_S)
        return FluidSample(u=u, grad_u=gu, **thermo)

    def rates(x, t):
        b, d, db, dd, M, Mdot = matrices(t)
        x2 = x[..., 1]
        xi1 = x[..., 0] - b * x2 / d
        dxi1 = -(db * d - b * dd) * x2 / d ** 2
        S_t = kappa * dxi1 / (kappa * xi1 + c0) - gamma * dd / d
        return {"u": x @ Mdot.T, "grad_u": np.broadcast_to(Mdot, x.shape[:-1] + (n, n)),
                "rho": np.zeros(x.shape[:-1]), "S": S_t}

    def in_domain(x, t):
        xi1, xi2 = labels(x, t)
        return (x[..., 1] > 0) & (kappa * xi1 + c0 > 0)

    lo = np.array([0.0, 0.5] + [0.0] * (n - 2))
    hi = np.array([1.0, 1.5] + [1.0] * (n - 2))
    flow = FlowField("baroclinic_affine", n, False, False, False, sample, eos=eos,
                     params={"kappa": kappa, "gamma": gamma, "a0": a0, "c0": c0, "W": W, "n": n},
                     t_range=tuple(t_span), in_domain=in_domain, sample_box=(lo, hi),
                     rates=rates, _velocity=velocity)
    object.__setattr__(flow, "history", hist)
    return flow


def product(first: FlowField, second: FlowField) -> FlowField:
    """Direct sum of two unit-density incompressible flows on R^(n1 + n2)."""
    if not (first.incompressible and second.incompressible):
        raise ValueError("product flows require incompressible factors")
    n1, n2 = first.dim, second.dim
    n = n1 + n2

    def velocity(x, t):
        u1, g1 = first.velocity(x[..., :n1], t)
        u2, g2 = second.velocity(x[..., n1:], t)
        gu = np.zeros(x.shape[:-1] + (n, n))
        gu[..., :n1, :n1] = g1
        gu[..., n1:, n1:] = g2
        return np.concatenate([u1, u2], -1), gu

    def sample(x, t):
        a, b = first.sample(x[..., :n1], t), second.sample(x[..., n1:], t)
        u, gu = velocity(x, t)
        thermo = _incompressible_thermo(x.shape[:-1], n, a.p + b.p,
                                        np.concatenate([a.grad_p, b.grad_p], -1))
        return FluidSample(u=u, grad_u=gu, **thermo)

    box = (np.concatenate([first.sample_box[0], second.sample_box[0]]),
           np.concatenate([first.sample_box[1], second.sample_box[1]]))
    return FlowField(f"{first.name}+{second.name}", n, True, True, first.steady and second.steady,
                     sample, periodic=first.periodic and second.periodic,
                     params={"first": first.params, "second": second.params}, sample_box=box,
                     _velocity=velocity)


def taylor_green_4d() -> FlowField:
    """Taylor-Green on each of two orthogonal planes of R^4 (non-constant vorticity scalar)."""
    f = product(taylor_green(), taylor_green())
    object.__setattr__(f, "name", "taylor_green_4d")
    return f


CATALOG: Dict[str, Callable[..., FlowField]] = {
    "rigid_rotation": rigid_rotation,
    "taylor_green": taylor_green,
    "abc": abc,
    "boosted_abc": boosted_abc,
    "isentropic_vortex": isentropic_vortex,
    "stratified_shear": stratified_shear,
    "uniform": uniform,
    "baroclinic_affine": baroclinic_affine,
    "taylor_green_4d": taylor_green_4d,
}


def make_flow(name: str, **params) -> FlowField:
    try:
        ctor = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown flow {name!r}; known: {sorted(CATALOG)}") from None
    return ctor(**params)


# ---------------------------------------------------------------------------
# derived quantities
# ---------------------------------------------------------------------------

def vorticity_from_gradient(grad_u: np.ndarray) -> AltTensor:
    """omega = d(u_flat) in a Euclidean chart: omega_ij = d_i u^j - d_j u^i."""
    n = grad_u.shape[-1]
    idx = np.array(multi_indices(n, 2), dtype=np.intp)
    i, j = idx[:, 0], idx[:, 1]
    return AltTensor(n, 2, COVARIANT, grad_u[..., j, i] - grad_u[..., i, j])


def bernoulli(s: FluidSample, energy_sign: float = -1.0) -> np.ndarray:
    """sigma = |u|^2/2 - e - p/rho (``energy_sign=+1`` gives the +e variant)."""
    return 0.5 * np.sum(s.u * s.u, axis=-1) + energy_sign * s.e - s.p / s.rho


def curl_and_bernoulli(flow: FlowField, x, t: float, energy_sign: float = -1.0) -> CurlSample:
    s = flow.sample(x, t)
    return CurlSample(omega=vorticity_from_gradient(s.grad_u), sigma=bernoulli(s, energy_sign))


def _time_rates(flow: FlowField, x, t):
    """Time derivatives of u, grad_u, rho, S at fixed x."""
    shape = np.shape(x)[:-1]
    n = flow.dim
    if flow.steady:
        return {"u": np.zeros(shape + (n,)), "grad_u": np.zeros(shape + (n, n)),
                "rho": np.zeros(shape), "S": np.zeros(shape)}
    out = dict(flow.rates(x, t)) if flow.rates is not None else {}
    need = [k for k in ("u", "grad_u", "rho", "S") if k not in out]
    if need:
        fields = {"u": "u", "grad_u": "grad_u", "rho": "rho", "S": "S"}
        for k in need:
            out[k] = fd_time(lambda tt: getattr(flow.sample(x, tt), fields[k]), t)
    return out


def euler_residual(flow: FlowField, x, t: float) -> dict:
    """Pointwise residuals of the inviscid equations at points ``x`` (batched).

    momentum:  |u_t + (u . grad) u + grad p / rho|
    continuity: |rho_t + div(rho u)|   (0 for incompressible flows)
    entropy:   |S_t + u . grad S|
    curl_transport: |omega_t + L_u omega - de_S ^ dS|
    """
    x = np.asarray(x, dtype=float)
    s = flow.sample(x, t)
    r = _time_rates(flow, x, t)
    n = flow.dim

    adv_u = np.einsum("...ij,...j->...i", s.grad_u, s.u)
    mom = r["u"] + adv_u + s.grad_p / s.rho[..., None]
    momentum = np.linalg.norm(mom, axis=-1)

    if flow.incompressible:
        continuity = np.abs(np.trace(s.grad_u, axis1=-2, axis2=-1))
    else:
        div = np.trace(s.grad_u, axis1=-2, axis2=-1)
        continuity = np.abs(r["rho"] + np.sum(s.u * s.grad_rho, -1) + s.rho * div)
    entropy = np.abs(r["S"] + np.sum(s.u * s.grad_S, -1))

    # curl transport: second derivatives by differencing the analytic gradient
    om = vorticity_from_gradient(s.grad_u).full()
    om_t = vorticity_from_gradient(r["grad_u"]).full()
    d_om = fd_gradient(lambda y: vorticity_from_gradient(flow.sample(y, t).grad_u).full(), x)
    # d_om[..., i, j, k] = d_k omega_ij
    lie = (np.einsum("...k,...ijk->...ij", s.u, d_om)
           + np.einsum("...kj,...ki->...ij", om, s.grad_u)
           + np.einsum("...ik,...kj->...ij", om, s.grad_u))
    if flow.eos is not None and not flow.isentropic:
        de_S = flow.eos.grad_energy_S(s.rho, s.S, s.grad_rho, s.grad_S)
        baro = np.einsum("...i,...j->...ij", de_S, s.grad_S)
        baro = baro - np.swapaxes(baro, -1, -2)
    else:
        baro = 0.0
    curl_res = om_t + lie - baro
    curl_transport = np.sqrt(np.sum(curl_res ** 2, axis=(-2, -1)) / 2.0)
    return {"momentum": momentum, "continuity": continuity, "entropy": entropy,
            "curl_transport": curl_transport}


def random_points(flow: FlowField, count: int, seed: int = 0, t_range=(0.0, 1.0)):
    """Uniform random points in the flow's sample box and times in t_range."""
    rng = np.random.default_rng(seed)
    lo, hi = flow.sample_box
    x = lo + (hi - lo) * rng.random((count, flow.dim))
    t = rng.uniform(*t_range, size=count)
    return x, t


def max_residuals(flow: FlowField, count: int = 1000, seed: int = 0, t_range=(0.0, 1.0)) -> dict:
    """Maximum residuals over random samples; unsteady flows are grouped per time."""
    x, t = random_points(flow, count, seed, t_range)
    if flow.steady:
        res = euler_residual(flow, x, 0.0)
        return {k: float(np.max(v)) for k, v in res.items()}
    worst = {}
    for xi, ti in zip(x, t):
        res = euler_residual(flow, xi, float(ti))
        for k, v in res.items():
            worst[k] = max(worst.get(k, 0.0), float(np.max(v)))
    return worst
