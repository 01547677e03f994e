"""
Lagrangian transport of parametrized surfaces and pullback quadrature.

A surface is a set of material quadrature nodes.  Each node carries its
position ``x`` and an n x s frame ``J`` (the pushforward of the reference
tangents).  Positions follow dx/dt = u and frames follow dJ/dt = grad(u) J,
integrated together by classical RK4, so that

    int_{S(t)} alpha = sum_k w_k o_k alpha(x_k)(J_k[:, 0], ..., J_k[:, s-1])

holds at every time without remeshing.

Boundary nodes live in a separate mesh of dimension s - 1.  They carry the
boundary tangents and, in addition, one transversal vector pointing out of
the surface.  During advection the transversal and the tangents form an
n x s frame that is pooled with the surface frames and pushed by the same
RK4 map, so the boundary of the advected surface is the advected boundary.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional

import numpy as np

from .errors import AdvectionError, DegreeError
from .geom import AltTensor, evaluate_form

RANK_TOL = 1e-10


@dataclass(frozen=True)
class MaterialNode:
    x: np.ndarray
    J: np.ndarray
    w_ref: float = 1.0
    ref_coords: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    dt: float
    scheme: str = "rk4"

    def __post_init__(self):
        if self.scheme != "rk4":
            raise ValueError(f"unsupported scheme {self.scheme!r}")
        if not self.dt > 0 or not self.t1 > self.t0:
            raise ValueError("TimeGrid needs dt > 0 and t1 > t0")
        r = (self.t1 - self.t0) / self.dt
        if abs(r - round(r)) > 1e-12 * max(1.0, r):
            raise ValueError(f"(t1 - t0)/dt = {r!r} is not an integer")

    @property
    def steps(self) -> int:
        return int(round((self.t1 - self.t0) / self.dt))

    def time(self, k: int) -> float:
        return self.t0 + k * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.steps + 1)


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Material surface of dimension ``sdim`` in R^dim at time ``t``.

    ``orientation`` and ``elements`` are per node; ``elements`` groups nodes
    into quadrature cells (faces of a box, edges of a polygon, ...).
    ``transversal`` is set only on boundary meshes: the outward vector of the
    parent surface at each boundary node.
    """

    x: np.ndarray
    J: np.ndarray
    w: np.ndarray
    orientation: np.ndarray
    sdim: int
    closed: bool
    boundary: Optional["SurfaceMesh"] = None
    elements: Optional[np.ndarray] = None
    ref: Optional[np.ndarray] = None
    transversal: Optional[np.ndarray] = None
    t: float = 0.0
    label: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        J = np.asarray(self.J, dtype=float)
        if x.ndim != 2 or J.shape != x.shape + (self.sdim,):
            raise ValueError(f"inconsistent node arrays x{x.shape}, J{J.shape}, sdim={self.sdim}")
        if self.closed and self.boundary is not None:
            raise ValueError("a closed surface has no boundary")
        if self.boundary is not None and self.boundary.sdim != self.sdim - 1:
            raise ValueError("boundary must have dimension sdim - 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, dtype=float)
                           * np.ones(len(x)))
        if self.elements is None:
            object.__setattr__(self, "elements", np.zeros(len(x), dtype=int))

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def size(self) -> int:
        return self.x.shape[0]

    @property
    def n_elements(self) -> int:
        return int(np.max(self.elements)) + 1 if self.size else 0

    @property
    def nodes(self):
        ref = self.ref if self.ref is not None else np.zeros((self.size, 0))
        return [MaterialNode(self.x[k], self.J[k], float(self.w[k]), ref[k]) for k in range(self.size)]

    def quadrature(self, values) -> float:
        """sum_k w_k o_k values_k, a fixed-order pairwise reduction."""
        return float(np.sum(self.w * self.orientation * np.asarray(values, dtype=float)))

    def frames(self) -> np.ndarray:
        """n x s frames pushed by the flow map (boundary: transversal first)."""
        if self.transversal is None:
            return self.J
        return np.concatenate([self.transversal[:, :, None], self.J], axis=2)

    def with_frames(self, x, frames, t) -> "SurfaceMesh":
        if self.transversal is None:
            return replace(self, x=x, J=frames, t=t)
        return replace(self, x=x, J=frames[:, :, 1:], transversal=frames[:, :, 0], t=t)

    def transformed(self, A=None, b=None) -> "SurfaceMesh":
        """Image under x -> A x + b (orientation of the parametrization is kept)."""
        A = np.eye(self.dim) if A is None else np.asarray(A, dtype=float)
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
        bd = self.boundary.transformed(A, b) if self.boundary is not None else None
        tr = None if self.transversal is None else self.transversal @ A.T
        return replace(self, x=self.x @ A.T + b, J=np.einsum("ij,kjs->kis", A, self.J),
                       transversal=tr, boundary=bd)

    def to_json(self) -> str:
        cells = [np.flatnonzero(self.elements == e).tolist() for e in range(self.n_elements)]
        doc = {
            "sdim": self.sdim, "closed": self.closed, "t": self.t,
            "nodes": [{"x": self.x[k].tolist(), "J": self.J[k].tolist(), "w_ref": float(self.w[k]),
                       "orientation": float(self.orientation[k])} for k in range(self.size)],
            "simplices": cells,
        }
        if self.boundary is not None:
            doc["boundary"] = json.loads(self.boundary.to_json())
        return json.dumps(doc)


# ---------------------------------------------------------------------------
# RK4
# ---------------------------------------------------------------------------

def _rates(flow, x, J, t, stage):
    u, gu = flow.velocity(x, t)
    dJ = gu @ J
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(dJ))):
        bad = np.flatnonzero(~(np.isfinite(u).all(-1) & np.isfinite(dJ).all((-2, -1))))
        raise AdvectionError("non-finite flow sample", node=int(bad[0]), stage=stage, t=t)
    return u, dJ


def rk4_step(flow, x, J, t: float, dt: float):
    """One classical RK4 step of the coupled position/frame ODE (batched)."""
    k1x, k1J = _rates(flow, x, J, t, 1)
    h = 0.5 * dt
    k2x, k2J = _rates(flow, x + h * k1x, J + h * k1J, t + h, 2)
    k3x, k3J = _rates(flow, x + h * k2x, J + h * k2J, t + h, 3)
    k4x, k4J = _rates(flow, x + dt * k3x, J + dt * k3J, t + dt, 4)
    c = dt / 6.0
    return (x + c * (k1x + 2 * k2x + 2 * k3x + k4x),
            J + c * (k1J + 2 * k2J + 2 * k3J + k4J))


def advect_step(node: MaterialNode, flow, t: float, dt: float) -> MaterialNode:
    x, J = rk4_step(flow, node.x[None, :], node.J[None], t, dt)
    return replace(node, x=x[0], J=J[0])


def check_rank(J: np.ndarray, t: float, tol: float = RANK_TOL):
    """Raise when a frame's smallest singular value falls below tol * |J|."""
    if J.shape[-1] == 0:
        return
    sv = np.linalg.svd(J, compute_uv=False)
    bad = sv[:, -1] < tol * np.maximum(sv[:, 0], 1e-300)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise AdvectionError(f"frame rank loss (sigma_min/sigma_max = {sv[k, -1] / sv[k, 0]:.3e})",
                             node=k, t=t)


def frame_conditioning(mesh: SurfaceMesh) -> float:
    """Worst sigma_min/sigma_max over the surface frames."""
    if mesh.sdim == 0:
        return 1.0
    sv = np.linalg.svd(mesh.J, compute_uv=False)
    return float(np.min(sv[:, -1] / sv[:, 0]))


def advect_mesh(mesh: SurfaceMesh, flow, grid: TimeGrid, cadence: int = 10,
                monitor_rank: bool = True) -> Iterator[SurfaceMesh]:
    """Yield snapshots of the advected mesh at t0 and every ``cadence`` steps.

    The final time is always emitted.  Surface and boundary nodes are
    advanced as one batch.
    """
    if flow.dim != mesh.dim:
        raise ValueError(f"mesh in R^{mesh.dim} but flow is {flow.dim}-dimensional")
    cadence = max(1, int(cadence))
    parts = [mesh] + ([mesh.boundary] if mesh.boundary is not None else [])
    sizes = [p.size for p in parts]
    x = np.concatenate([p.x for p in parts])
    J = np.concatenate([p.frames() for p in parts])

    def snapshot(x, J, t):
        pieces, start = [], 0
        for p, m in zip(parts, sizes):
            pieces.append(p.with_frames(x[start:start + m], J[start:start + m], t))
            start += m
        out = pieces[0]
        if len(pieces) > 1:
            out = replace(out, boundary=pieces[1])
        return out

    yield snapshot(x, J, grid.t0)
    n = grid.steps
    for k in range(n):
        t = grid.time(k)
        x, J = rk4_step(flow, x, J, t, grid.dt)
        if (k + 1) % cadence == 0 or k + 1 == n:
            if monitor_rank:
                check_rank(J, grid.time(k + 1))
            yield snapshot(x, J, grid.time(k + 1))


def advect_to(mesh: SurfaceMesh, flow, grid: TimeGrid) -> SurfaceMesh:
    last = None
    for last in advect_mesh(mesh, flow, grid, cadence=grid.steps):
        pass
    return last


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def pullback_values(mesh: SurfaceMesh, alpha: AltTensor) -> np.ndarray:
    """alpha(J_1, ..., J_s) at every node for a batched covariant form."""
    if alpha.degree != mesh.sdim:
        raise DegreeError(f"form of degree {alpha.degree} on a {mesh.sdim}-dimensional surface")
    return evaluate_form(alpha, mesh.J)


def pullback_integrate(mesh: SurfaceMesh, form_field: Callable, t: Optional[float] = None) -> float:
    """int_S alpha by pullback quadrature; ``form_field(x, t)`` returns a batched AltTensor."""
    t = mesh.t if t is None else t
    alpha = form_field(mesh.x, t)
    return mesh.quadrature(pullback_values(mesh, alpha))
