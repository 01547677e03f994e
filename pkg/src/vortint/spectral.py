"""
Pseudo-spectral 2-D incompressible Euler solver on the 2 pi periodic torus.

The state is the scalar vorticity varpi in Fourier space (``rfft2`` layout,
x along axis 0).  The stream function is psi_hat = varpi_hat / |k|^2 and the
velocity is u = (d_y psi, -d_x psi).  Time stepping is classical RK4 on

    d varpi_hat / dt = -FFT(u . grad varpi)

with the 2/3 rule (modes with |k_x| or |k_y| above N/3 are zeroed).

A stored trajectory becomes a :class:`FlowField` by summing the retained
Fourier modes directly at arbitrary points and interpolating the
coefficients in time with 5-point Lagrange polynomials.
"""
from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import CFLError, DomainError
from .flows import FlowField, FluidSample, TWO_PI, _incompressible_thermo

CFL_LIMIT = 0.5


@dataclass(frozen=True)
class SpectralState:
    N: int
    coeffs: np.ndarray  # rfft2 of vorticity, shape (N, N//2 + 1)
    t: float = 0.0

    @property
    def vorticity_hat(self) -> np.ndarray:
        """Full fft2 layout (N x N)."""
        return np.fft.fft2(self.vorticity)

    @property
    def vorticity(self) -> np.ndarray:
        return np.fft.irfft2(self.coeffs, s=(self.N, self.N))


class SpectralSolver:
    def __init__(self, N: int):
        if N < 8 or N & (N - 1):
            raise ValueError("grid size must be a power of two >= 8")
        self.N = N
        k = np.fft.fftfreq(N, 1.0 / N)
        ky = np.fft.rfftfreq(N, 1.0 / N)
        self.kx = k[:, None]
        self.ky = ky[None, :]
        self.k2 = self.kx ** 2 + self.ky ** 2
        self.inv_k2 = np.where(self.k2 > 0, 1.0 / np.where(self.k2 > 0, self.k2, 1.0), 0.0)
        cut = N / 3.0
        self.mask = (np.abs(self.kx) < cut) & (np.abs(self.ky) < cut)
        self.x = TWO_PI * np.arange(N) / N

    # --- fields ---------------------------------------------------------
    def _irfft(self, a):
        return np.fft.irfft2(a, s=(self.N, self.N))

    def velocity_hat(self, w_hat):
        psi = w_hat * self.inv_k2
        return 1j * self.ky * psi, -1j * self.kx * psi

    def velocity(self, state: SpectralState):
        uh, vh = self.velocity_hat(state.coeffs)
        return self._irfft(uh), self._irfft(vh)

    def rhs(self, w_hat):
        uh, vh = self.velocity_hat(w_hat)
        u, v = self._irfft(uh), self._irfft(vh)
        wx, wy = self._irfft(1j * self.kx * w_hat), self._irfft(1j * self.ky * w_hat)
        return -np.fft.rfft2(u * wx + v * wy) * self.mask

    def max_speed(self, w_hat):
        uh, vh = self.velocity_hat(w_hat)
        return float(np.sqrt(np.max(self._irfft(uh) ** 2 + self._irfft(vh) ** 2)))

    def energy(self, state: SpectralState) -> float:
        """int |u|^2 over the torus."""
        u, v = self.velocity(state)
        return float(TWO_PI ** 2 * np.mean(u * u + v * v))

    def enstrophy(self, state: SpectralState) -> float:
        """int varpi^2 over the torus."""
        return float(TWO_PI ** 2 * np.mean(state.vorticity ** 2))

    def check_cfl(self, w_hat, dt):
        c = dt * self.max_speed(w_hat) * self.N / TWO_PI
        if c >= CFL_LIMIT:
            raise CFLError(f"CFL number {c:.3f} >= {CFL_LIMIT} (dt={dt})")
        return c

    # --- stepping -------------------------------------------------------
    def step(self, state: SpectralState, dt: float, check: bool = True) -> SpectralState:
        w = state.coeffs
        if check:
            self.check_cfl(w, dt)
        k1 = self.rhs(w)
        k2 = self.rhs(w + 0.5 * dt * k1)
        k3 = self.rhs(w + 0.5 * dt * k2)
        k4 = self.rhs(w + dt * k3)
        w = w + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        w[0, 0] = 0.0
        return SpectralState(self.N, w, state.t + dt)

    def run(self, state: SpectralState, t1: float, dt: float, cadence: int = 10) -> "SpectralTrajectory":
        steps = int(round((t1 - state.t) / dt))
        if steps < 1 or abs(steps * dt - (t1 - state.t)) > 1e-12 * max(1.0, steps):
            raise ValueError("(t1 - t0)/dt must be a positive integer")
        times, snaps = [state.t], [state.coeffs.copy()]
        t0 = state.t
        for k in range(steps):
            state = self.step(state, dt, check=(k % cadence == 0))
            state = SpectralState(self.N, state.coeffs, t0 + (k + 1) * dt)
            if (k + 1) % cadence == 0 or k + 1 == steps:
                times.append(state.t)
                snaps.append(state.coeffs.copy())
        return SpectralTrajectory(self.N, np.array(times), snaps, dt=dt, cadence=cadence)

    # --- initial conditions ----------------------------------------------
    def from_grid(self, w, t=0.0) -> SpectralState:
        c = np.fft.rfft2(np.asarray(w, dtype=float)) * self.mask
        c[0, 0] = 0.0
        return SpectralState(self.N, c, t)

    def modes(self, modes) -> SpectralState:
        """Sum of a cos(k.x) + b sin(k.x) over entries {k: [kx, ky], a, b}."""
        X, Y = np.meshgrid(self.x, self.x, indexing="ij")
        w = np.zeros((self.N, self.N))
        for m in modes:
            kx, ky = m["k"]
            ph = kx * X + ky * Y
            w += m.get("a", 0.0) * np.cos(ph) + m.get("b", 0.0) * np.sin(ph)
        return self.from_grid(w)

    def taylor_green(self) -> SpectralState:
        # 2 sin x sin y = cos(x - y) - cos(x + y)
        return self.modes([{"k": [1, -1], "a": 1.0}, {"k": [1, 1], "a": -1.0}])

    def random(self, seed: int = 0, band=(1, 4), amplitude: float = 1.0) -> SpectralState:
        """Random-phase field with |k| in band, zero mean and RMS ``amplitude``."""
        rng = np.random.default_rng(seed)
        kmag = np.sqrt(self.k2)
        sel = (kmag >= band[0]) & (kmag <= band[1]) & self.mask
        c = np.zeros_like(self.k2, dtype=complex)
        c[sel] = rng.normal(size=sel.sum()) + 1j * rng.normal(size=sel.sum())
        state = self.from_grid(self._irfft(c))
        rms = np.sqrt(np.mean(state.vorticity ** 2))
        if rms == 0:
            raise ValueError("empty wavenumber band")
        return SpectralState(self.N, state.coeffs * (amplitude / rms), 0.0)

    def initial_condition(self, spec: dict) -> SpectralState:
        kind = spec.get("type", "random")
        if kind == "random":
            return self.random(spec.get("seed", 0), tuple(spec.get("band", (1, 4))), spec.get("amplitude", 1.0))
        if kind == "modes":
            return self.modes(spec["modes"])
        if kind == "taylor_green":
            return self.taylor_green()
        raise ValueError(f"unknown initial condition type {kind!r}")


def step(state: SpectralState, dt: float) -> SpectralState:
    return SpectralSolver(state.N).step(state, dt)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class SpectralTrajectory:
    N: int
    times: np.ndarray
    coeffs: List[np.ndarray]
    dt: float = 0.0
    cadence: int = 10
    _pressure: dict = field(default_factory=dict, repr=False)

    def state(self, i: int) -> SpectralState:
        return SpectralState(self.N, self.coeffs[i], float(self.times[i]))

    # checkpoint: u32 N, u32 count, f64 times[count], complex128 coeffs[count][N][N]
    def save(self, path: str):
        full = np.stack([np.fft.fft2(np.fft.irfft2(c, s=(self.N, self.N))) for c in self.coeffs])
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(struct.pack("<II", self.N, len(self.times)))
            fh.write(np.asarray(self.times, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(full, dtype="<c16").tobytes())
        os.replace(tmp, path)
        meta = {"N": self.N, "count": len(self.times), "times": [float(t) for t in self.times],
                "dt": self.dt, "cadence": self.cadence, "layout": "fft2, axis 0 = x, row-major",
                "dtype": "complex128 little-endian", "quantity": "vorticity"}
        with open(path + ".json.tmp", "w") as fh:
            json.dump(meta, fh, indent=2)
        os.replace(path + ".json.tmp", path + ".json")

    @classmethod
    def load(cls, path: str) -> "SpectralTrajectory":
        with open(path, "rb") as fh:
            N, count = struct.unpack("<II", fh.read(8))
            times = np.frombuffer(fh.read(8 * count), dtype="<f8").copy()
            full = np.frombuffer(fh.read(16 * count * N * N), dtype="<c16").reshape(count, N, N)
        meta = {}
        if os.path.exists(path + ".json"):
            with open(path + ".json") as fh:
                meta = json.load(fh)
        coeffs = [np.fft.rfft2(np.fft.ifft2(f).real) for f in full]
        return cls(N, times, coeffs, dt=meta.get("dt", 0.0), cadence=meta.get("cadence", 10))

    # time interpolation ----------------------------------------------------
    def weights(self, t: float):
        """Indices and 5-point Lagrange weights (value, d/dt) at time t."""
        T = self.times
        if not T[0] - 1e-12 <= t <= T[-1] + 1e-12:
            raise DomainError(f"t={t} outside stored horizon [{T[0]}, {T[-1]}]")
        m = min(5, len(T))
        i = int(np.searchsorted(T, t))
        lo = max(0, min(i - m // 2, len(T) - m))
        idx = np.arange(lo, lo + m)
        nodes = T[idx]
        w = np.empty(m)
        dw = np.empty(m)
        for j in range(m):
            others = np.delete(nodes, j)
            den = np.prod(nodes[j] - others)
            w[j] = np.prod(t - others) / den
            s = 0.0
            for a in range(m - 1):
                s += np.prod(np.delete(t - others, a))
            dw[j] = s / den
        return idx, w, dw

    def pressure_hat(self, i: int) -> np.ndarray:
        """p_hat from -Lap p = d_i u_j d_j u_i, zero-mean gauge (cached per snapshot)."""
        if i not in self._pressure:
            sol = SpectralSolver(self.N)
            uh, vh = sol.velocity_hat(self.coeffs[i])
            ir = sol._irfft
            ux, uy = ir(1j * sol.kx * uh), ir(1j * sol.ky * uh)
            vx, vy = ir(1j * sol.kx * vh), ir(1j * sol.ky * vh)
            src = ux * ux + 2 * uy * vx + vy * vy
            self._pressure[i] = np.fft.rfft2(src) * sol.inv_k2
        return self._pressure[i]


class _ModeEvaluator:
    """Direct summation of retained modes at scattered points."""

    def __init__(self, N: int):
        sol = SpectralSolver(N)
        self.N = N
        rows = np.flatnonzero(sol.mask[:, 0])
        cols = np.flatnonzero(sol.mask[0, :])
        self.rows, self.cols = rows, cols
        self.kx = sol.kx[rows, 0]
        self.ky = sol.ky[0, cols]
        self.inv_k2 = sol.inv_k2[np.ix_(rows, cols)]
        self.herm = np.where(self.ky == 0, 1.0, 2.0) / N ** 2

    def restrict(self, c):
        return c[np.ix_(self.rows, self.cols)]

    def evaluate(self, x, fields):
        """Real fields sum_k F_k e^{i k.x}; ``fields`` is (F, rows, cols)."""
        Ex = np.exp(1j * np.outer(x[:, 0], self.kx))
        Ey = np.exp(1j * np.outer(x[:, 1], self.ky)) * self.herm
        nf, nk, nl = fields.shape
        A = Ex @ fields.transpose(1, 0, 2).reshape(nk, nf * nl)
        return np.einsum("pfl,pl->fp", A.reshape(-1, nf, nl), Ey).real


def as_flow_field(traj: SpectralTrajectory) -> FlowField:
    """Band-limited, time-interpolated flow field of a stored trajectory."""
    ev = _ModeEvaluator(traj.N)
    kx, ky = ev.kx[:, None], ev.ky[None, :]
    w_r = [ev.restrict(c) for c in traj.coeffs]

    def combine(arrs, idx, wts):
        return sum(wt * arrs[j] for j, wt in zip(idx, wts))

    def vel_fields(w_hat):
        psi = w_hat * ev.inv_k2
        uh, vh = 1j * ky * psi, -1j * kx * psi
        return np.stack([uh, vh, 1j * kx * uh, 1j * ky * uh, 1j * kx * vh, 1j * ky * vh])

    def evaluate(x, t, deriv=False):
        pts = np.asarray(x, dtype=float).reshape(-1, 2)
        idx, w, dw = traj.weights(t)
        vals = ev.evaluate(pts, vel_fields(combine(w_r, idx, w)))
        u = np.stack([vals[0], vals[1]], -1)
        gu = np.stack([np.stack([vals[2], vals[3]], -1), np.stack([vals[4], vals[5]], -1)], -2)
        if not deriv:
            return pts, u, gu, None
        dvals = ev.evaluate(pts, vel_fields(combine(w_r, idx, dw)))
        du = np.stack([dvals[0], dvals[1]], -1)
        dgu = np.stack([np.stack([dvals[2], dvals[3]], -1), np.stack([dvals[4], dvals[5]], -1)], -2)
        return pts, u, gu, (du, dgu)

    def velocity(x, t):
        shape = np.shape(x)[:-1]
        _, u, gu, _ = evaluate(x, t)
        return u.reshape(shape + (2,)), gu.reshape(shape + (2, 2))

    def sample(x, t):
        shape = np.shape(x)[:-1]
        pts, u, gu, _ = evaluate(x, t)
        idx, w, _ = traj.weights(t)
        ph = combine({j: ev.restrict(traj.pressure_hat(j)) for j in idx}, idx, w)
        pv = ev.evaluate(pts, np.stack([ph, 1j * kx * ph, 1j * ky * ph]))
        thermo = _incompressible_thermo(shape, 2, pv[0].reshape(shape),
                                        np.stack([pv[1], pv[2]], -1).reshape(shape + (2,)))
        return FluidSample(u=u.reshape(shape + (2,)), grad_u=gu.reshape(shape + (2, 2)), **thermo)

    def rates(x, t):
        shape = np.shape(x)[:-1]
        _, _, _, (du, dgu) = evaluate(x, t, deriv=True)
        return {"u": du.reshape(shape + (2,)), "grad_u": dgu.reshape(shape + (2, 2)),
                "rho": np.zeros(shape), "S": np.zeros(shape)}

    return FlowField("spectral2d", 2, True, True, False, sample, periodic=True,
                     params={"N": traj.N, "snapshots": len(traj.times)},
                     t_range=(float(traj.times[0]), float(traj.times[-1])),
                     sample_box=(np.zeros(2), np.full(2, TWO_PI)), rates=rates,
                     _velocity=velocity, analytic=False)
