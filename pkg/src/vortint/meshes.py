"""
Mesh builders.  Every builder maps a tensor reference cube [0, 1]^s into
R^n and places Gauss-Legendre nodes on bounded axes and equispaced
(trapezoid) nodes on periodic axes.  Faces of the cube become the boundary
mesh, except faces that the map collapses (poles, disk centre, Duffy
vertices) and faces on periodic axes.  Weights are reference weights and
sum to 1; the metric factor lives in the frames.
"""
from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from .advect import SurfaceMesh
from .geom import AltTensor, evaluate_form


def rule_1d(m: int, periodic: bool = False):
    """Nodes and weights on [0, 1]."""
    if m < 1:
        raise ValueError("need at least one node per axis")
    if periodic:
        return np.arange(m) / m, np.full(m, 1.0 / m)
    z, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (z + 1.0), 0.5 * w


def _tensor_rule(counts, periodic):
    if not counts:
        return np.zeros((1, 0)), np.ones(1)
    rules = [rule_1d(m, p) for m, p in zip(counts, periodic)]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    xi = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return xi, w


def param_patch(phi: Callable, dphi: Callable, sdim: int, nodes, periodic: Sequence[int] = (),
                collapsed: Sequence = (), orientation: float = 1.0, label: str = "patch",
                check: bool = True) -> SurfaceMesh:
    """Surface from a parametrization of the unit cube.

    ``phi(xi)`` maps (N, s) reference points to (N, n); ``dphi(xi)`` returns
    (N, n, s) Jacobians.  ``collapsed`` lists (axis, end) faces to drop.
    The induced boundary orientation follows Stokes: on the face
    xi_k = end the outward transversal is +-d phi/d xi_k and the sign is
    +-(-1)^k times the surface orientation.
    """
    counts = [nodes] * sdim if np.isscalar(nodes) else list(nodes)
    if len(counts) != sdim:
        raise ValueError("one node count per reference axis")
    per = [k in periodic for k in range(sdim)]
    xi, w = _tensor_rule(counts, per)
    x, J = phi(xi), dphi(xi)

    faces = []
    for k in range(sdim):
        if per[k]:
            continue
        for end in (0, 1):
            if (k, end) in collapsed:
                continue
            faces.append((k, end))
    boundary = None
    if faces:
        bx, bJ, bT, bw, bo, be, bref = [], [], [], [], [], [], []
        for fid, (k, end) in enumerate(faces):
            others = [a for a in range(sdim) if a != k]
            fxi, fw = _tensor_rule([counts[a] for a in others], [per[a] for a in others])
            full = np.empty((len(fw), sdim))
            full[:, others] = fxi
            full[:, k] = float(end)
            sgn = 1.0 if end == 1 else -1.0
            Jf = dphi(full)
            bx.append(phi(full))
            bJ.append(Jf[:, :, others])
            bT.append(sgn * Jf[:, :, k])
            bw.append(fw)
            bo.append(np.full(len(fw), orientation * sgn * (-1) ** k))
            be.append(np.full(len(fw), fid))
            bref.append(full)
        boundary = SurfaceMesh(np.concatenate(bx), np.concatenate(bJ), np.concatenate(bw),
                               np.concatenate(bo), sdim - 1, True, elements=np.concatenate(be),
                               ref=np.concatenate(bref), transversal=np.concatenate(bT),
                               label=label + ":boundary")
    mesh = SurfaceMesh(x, J, w, np.full(len(w), float(orientation)), sdim, boundary is None,
                       boundary=boundary, ref=xi, label=label)
    if check and boundary is not None:
        check_orientation(mesh)
    return mesh


def stokes_mismatch(mesh: SurfaceMesh) -> float:
    """Worst relative gap between int_S d(beta) and int_dS beta over test forms.

    beta = x_k dx^I with |I| = s - 1, so d(beta) = dx^k ^ dx^I is constant.
    """
    s, n = mesh.sdim, mesh.dim
    bd = mesh.boundary
    worst, scale = 0.0, 0.0
    for k in range(n):
        for I in itertools.combinations([i for i in range(n) if i != k], s - 1):
            dbeta = AltTensor.basis(n, (k,) + I)
            lhs = mesh.quadrature(evaluate_form(dbeta, mesh.J))
            beta_b = AltTensor(n, s - 1, "covariant",
                               bd.x[:, k:k + 1] * AltTensor.basis(n, I).coeffs)
            rhs = bd.quadrature(evaluate_form(beta_b, bd.J))
            worst = max(worst, abs(lhs - rhs))
            scale = max(scale, abs(lhs), abs(rhs))
    return worst / scale if scale > 1e-12 else worst


def check_orientation(mesh: SurfaceMesh, tol: float = 0.5):
    # a flipped face gives a gap of order one; coarse quadrature stays far below
    gap = stokes_mismatch(mesh)
    if gap > tol:
        raise ValueError(f"{mesh.label}: boundary orientation inconsistent with Stokes (gap {gap:.2e})")


# ---------------------------------------------------------------------------
# concrete builders
# ---------------------------------------------------------------------------

def _frame(n, axes):
    E = np.eye(n)
    return E[axes[0]], E[axes[1]]


def circle(r: float = 1.0, center=(0.0, 0.0), plane=(0, 1), nodes: int = 256, dim: int = None,
           rule: str = "trapezoid") -> SurfaceMesh:
    """Closed counter-clockwise circle in the (plane[0], plane[1]) coordinate plane."""
    center = np.asarray(center, dtype=float)
    n = dim or center.size
    if r <= 0:
        raise ValueError("radius must be positive")
    ea, eb = _frame(n, plane)
    if rule == "trapezoid":
        xi, w = rule_1d(nodes, periodic=True)
    elif rule == "gauss":
        xi, w = rule_1d(nodes)
    else:
        raise ValueError(f"unknown rule {rule!r}")
    th = 2 * np.pi * xi
    x = center + r * (np.cos(th)[:, None] * ea + np.sin(th)[:, None] * eb)
    J = (2 * np.pi * r) * (-np.sin(th)[:, None] * ea + np.cos(th)[:, None] * eb)
    return SurfaceMesh(x, J[:, :, None], w, 1.0, 1, True, ref=xi[:, None], label="circle")


def polyline(points, nodes_per_edge: int = 8, closed: bool = False) -> SurfaceMesh:
    """Piecewise straight curve through ``points`` with Gauss nodes per edge."""
    P = np.asarray(points, dtype=float)
    if closed:
        P = np.vstack([P, P[:1]])
    xi, w = rule_1d(nodes_per_edge)
    xs, Js, ws, el = [], [], [], []
    for e in range(len(P) - 1):
        d = P[e + 1] - P[e]
        if np.linalg.norm(d) == 0:
            raise ValueError("degenerate polyline edge")
        xs.append(P[e] + xi[:, None] * d)
        Js.append(np.repeat(d[None, :, None], len(xi), 0))
        ws.append(w)
        el.append(np.full(len(xi), e))
    x, J = np.concatenate(xs), np.concatenate(Js)
    boundary = None
    if not closed:
        t0, t1 = P[1] - P[0], P[-1] - P[-2]
        boundary = SurfaceMesh(np.stack([P[0], P[-1]]), np.zeros((2, P.shape[1], 0)), [1.0, 1.0],
                               [-1.0, 1.0], 0, True, elements=np.array([0, 1]),
                               transversal=np.stack([-t0, t1]), label="polyline:boundary")
    return SurfaceMesh(x, J, np.concatenate(ws), 1.0, 1, closed, boundary=boundary,
                       elements=np.concatenate(el), label="polyline")


def segment(a, b, nodes: int = 16) -> SurfaceMesh:
    return polyline([a, b], nodes_per_edge=nodes)


def parallelepiped(origin, edges, nodes=8, periodic: Sequence[int] = (), label="parallelepiped") -> SurfaceMesh:
    """Affine patch origin + E xi, xi in [0,1]^s; ``edges`` is n x s."""
    o = np.asarray(origin, dtype=float)
    E = np.asarray(edges, dtype=float)
    if E.ndim != 2 or E.shape[0] != o.size:
        raise ValueError("edges must be an n x s matrix")
    if np.linalg.matrix_rank(E) < E.shape[1]:
        raise ValueError("degenerate parallelepiped")
    s = E.shape[1]
    return param_patch(lambda xi: o + xi @ E.T,
                       lambda xi: np.broadcast_to(E, (len(xi),) + E.shape).copy(),
                       s, nodes, periodic=periodic, label=label,
                       # x_k is not periodic along identified edges, so the Stokes probe does not apply
                       check=not periodic)


def box_domain(n: int = 2, lo=None, hi=None, nodes=8, periodic=False) -> SurfaceMesh:
    """Full-dimensional box; ``periodic=True`` closes it on the torus."""
    lo = np.zeros(n) if lo is None else np.broadcast_to(np.asarray(lo, dtype=float), (n,))
    hi = np.ones(n) if hi is None else np.broadcast_to(np.asarray(hi, dtype=float), (n,))
    per = tuple(range(n)) if periodic is True else tuple(periodic or ())
    return parallelepiped(lo, np.diag(hi - lo), nodes, periodic=per, label="box")


def rectangle(x_range, y_range, nodes=8, dim: int = 2) -> SurfaceMesh:
    o = np.zeros(dim)
    o[0], o[1] = x_range[0], y_range[0]
    E = np.zeros((dim, 2))
    E[0, 0], E[1, 1] = x_range[1] - x_range[0], y_range[1] - y_range[0]
    return parallelepiped(o, E, nodes, label="rectangle")


def disk(r: float = 1.0, center=(0.0, 0.0), nodes=(16, 64), plane=(0, 1), dim: int = None) -> SurfaceMesh:
    """Polar disk; Gauss in radius, trapezoid in angle; boundary is the rim circle."""
    c = np.asarray(center, dtype=float)
    n = dim or c.size
    ea, eb = _frame(n, plane)
    if r <= 0:
        raise ValueError("radius must be positive")

    def phi(xi):
        rr, th = r * xi[:, :1], 2 * np.pi * xi[:, 1:2]
        return c + rr * (np.cos(th) * ea + np.sin(th) * eb)

    def dphi(xi):
        rr, th = r * xi[:, 0:1], 2 * np.pi * xi[:, 1:2]
        radial = r * (np.cos(th) * ea + np.sin(th) * eb)
        ang = 2 * np.pi * rr * (-np.sin(th) * ea + np.cos(th) * eb)
        return np.stack([radial, ang], axis=-1)

    return param_patch(phi, dphi, 2, nodes, periodic=(1,), collapsed=[(0, 0)], label="disk")


def _spherical(R, c, rho, th, ph):
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    rhat = np.stack([st * cp, st * sp, ct], -1)
    that = np.stack([ct * cp, ct * sp, -st], -1)
    phat = np.stack([-sp, cp, np.zeros_like(sp)], -1)
    return c + R * rho[:, None] * rhat, rhat, that, phat, st


def sphere_s2(r: float = 1.0, center=(0.0, 0.0, 0.0), level: int = None, nodes=(24, 48)) -> SurfaceMesh:
    """Closed outward-oriented sphere; (theta, phi) parameters, Gauss in theta."""
    c = np.asarray(center, dtype=float)
    if level is not None:
        nodes = (2 ** (level + 1), 2 ** (level + 2))

    def phi(xi):
        return _spherical(r, c, np.ones(len(xi)), np.pi * xi[:, 0], 2 * np.pi * xi[:, 1])[0]

    def dphi(xi):
        _, _, that, phat, st = _spherical(r, c, np.ones(len(xi)), np.pi * xi[:, 0], 2 * np.pi * xi[:, 1])
        return np.stack([np.pi * r * that, 2 * np.pi * r * st[:, None] * phat], -1)

    return param_patch(phi, dphi, 2, nodes, periodic=(1,), collapsed=[(0, 0), (0, 1)], label="sphere")


def ball(r: float = 1.0, center=(0.0, 0.0, 0.0), nodes=(10, 16, 32)) -> SurfaceMesh:
    """Solid ball in R^3, parameters (radius, theta, phi); boundary is the outward sphere."""
    c = np.asarray(center, dtype=float)

    def parts(xi):
        return _spherical(r, c, xi[:, 0], np.pi * xi[:, 1], 2 * np.pi * xi[:, 2])

    def phi(xi):
        return parts(xi)[0]

    def dphi(xi):
        _, rhat, that, phat, st = parts(xi)
        rho = xi[:, 0:1]
        return np.stack([r * rhat, np.pi * r * rho * that, 2 * np.pi * r * rho * st[:, None] * phat], -1)

    return param_patch(phi, dphi, 3, nodes, periodic=(2,),
                       collapsed=[(0, 0), (1, 0), (1, 1)], label="ball")


def torus(R: float = 2.0, r: float = 0.5, center=(0.0, 0.0, 0.0), nodes=(48, 24)) -> SurfaceMesh:
    """Closed torus of revolution about the z axis in R^3."""
    c = np.asarray(center, dtype=float)
    if not 0 < r < R:
        raise ValueError("torus needs 0 < r < R")

    def phi(xi):
        a, b = 2 * np.pi * xi[:, 0], 2 * np.pi * xi[:, 1]
        rr = R + r * np.cos(b)
        return c + np.stack([rr * np.cos(a), rr * np.sin(a), r * np.sin(b)], -1)

    def dphi(xi):
        a, b = 2 * np.pi * xi[:, 0], 2 * np.pi * xi[:, 1]
        rr = R + r * np.cos(b)
        da = 2 * np.pi * np.stack([-rr * np.sin(a), rr * np.cos(a), 0 * a], -1)
        db = 2 * np.pi * np.stack([-r * np.sin(b) * np.cos(a), -r * np.sin(b) * np.sin(a), r * np.cos(b)], -1)
        return np.stack([da, db], -1)

    return param_patch(phi, dphi, 2, nodes, periodic=(0, 1), label="torus")


def simplex_patch(vertices, nodes: int = 8) -> SurfaceMesh:
    """Affine s-simplex with vertices v0..vs (rows), by a Duffy-collapsed Gauss rule."""
    V = np.asarray(vertices, dtype=float)
    s = V.shape[0] - 1
    if s < 1:
        raise ValueError("a simplex needs at least two vertices")
    A = (V[1:] - V[0]).T
    if np.linalg.matrix_rank(A) < s:
        raise ValueError("degenerate simplex")

    def duffy(xi):
        y = np.empty_like(xi)
        rest = np.ones(len(xi))
        for k in range(s):
            y[:, k] = rest * xi[:, k]
            rest = rest * (1 - xi[:, k])
        return y

    def dduffy(xi):
        D = np.zeros((len(xi), s, s))
        for k in range(s):
            pref = np.prod(1 - xi[:, :k], axis=1)
            D[:, k, k] = pref
            for j in range(k):
                others = np.prod(np.delete(1 - xi[:, :k], j, axis=1), axis=1) if k > 1 else np.ones(len(xi))
                D[:, k, j] = -others * xi[:, k]
        return D

    # the map sends [e0 .. e_{s-1}] to a positively ordered simplex only up to a sign
    sign = 1.0
    mesh = param_patch(lambda xi: V[0] + duffy(xi) @ A.T,
                       lambda xi: np.einsum("ij,kjl->kil", A, dduffy(xi)),
                       s, nodes, collapsed=[(k, 1) for k in range(s - 1)],
                       orientation=sign, label="simplex")
    return mesh


def product_mesh(A: SurfaceMesh, B: SurfaceMesh) -> SurfaceMesh:
    """A x B in R^(nA + nB), boundary dA x B  u  (-1)^sA A x dB."""

    def cross(P, Q, sign=1.0, transversal_from=None):
        nP, nQ = P.size, Q.size
        x = np.concatenate([np.repeat(P.x, nQ, 0), np.tile(Q.x, (nP, 1))], 1)
        dimP, dimQ = P.dim, Q.dim
        J = np.zeros((nP * nQ, dimP + dimQ, P.sdim + Q.sdim))
        J[:, :dimP, :P.sdim] = np.repeat(P.J, nQ, 0)
        J[:, dimP:, P.sdim:] = np.tile(Q.J, (nP, 1, 1))
        w = np.repeat(P.w, nQ) * np.tile(Q.w, nP)
        o = sign * np.repeat(P.orientation, nQ) * np.tile(Q.orientation, nP)
        el = np.repeat(P.elements, nQ) * Q.n_elements + np.tile(Q.elements, nP)
        tr = None
        if transversal_from == "P":
            tr = np.concatenate([np.repeat(P.transversal, nQ, 0), np.zeros((nP * nQ, dimQ))], 1)
        elif transversal_from == "Q":
            tr = np.concatenate([np.zeros((nP * nQ, dimP)), np.tile(Q.transversal, (nP, 1))], 1)
        return x, J, w, o, el, tr

    x, J, w, o, el, _ = cross(A, B)
    pieces = []
    if A.boundary is not None:
        pieces.append(cross(A.boundary, B, 1.0, "P"))
    if B.boundary is not None:
        pieces.append(cross(A, B.boundary, (-1.0) ** A.sdim, "Q"))
    boundary = None
    if pieces:
        offset, els = 0, []
        for p in pieces:
            els.append(p[4] + offset)
            offset += int(p[4].max()) + 1
        boundary = SurfaceMesh(np.concatenate([p[0] for p in pieces]), np.concatenate([p[1] for p in pieces]),
                               np.concatenate([p[2] for p in pieces]), np.concatenate([p[3] for p in pieces]),
                               A.sdim + B.sdim - 1, True, elements=np.concatenate(els),
                               transversal=np.concatenate([p[5] for p in pieces]),
                               label=f"{A.label}x{B.label}:boundary")
    return SurfaceMesh(x, J, w, o, A.sdim + B.sdim, boundary is None, boundary=boundary,
                       elements=el, label=f"{A.label}x{B.label}")


BUILDERS = {
    "circle": circle,
    "polyline": polyline,
    "segment": segment,
    "parallelepiped": parallelepiped,
    "box_domain": box_domain,
    "rectangle": rectangle,
    "disk": disk,
    "sphere_s2": sphere_s2,
    "ball": ball,
    "torus": torus,
    "simplex_patch": simplex_patch,
}

SDIM = {"circle": 1, "polyline": 1, "segment": 1, "disk": 2, "sphere_s2": 2, "ball": 3, "torus": 2,
        "rectangle": 2}


def build_mesh(builder: str, **params) -> SurfaceMesh:
    try:
        fn = BUILDERS[builder]
    except KeyError:
        raise KeyError(f"unknown mesh builder {builder!r}; known: {sorted(BUILDERS)}") from None
    return fn(**params)
