"""
Pointwise exterior algebra on a metric chart.

Antisymmetric tensors are stored by their coefficients over strictly
increasing multi-indices, so a degree-k tensor in n dimensions carries
C(n, k) numbers.  The coefficient of ``dx^I`` equals the fully
antisymmetric component ``a_{i1..ik}`` for increasing ``I``.  With this
layout

    dx^I ^ dx^J = sign(I, J) dx^{I u J}

and the interior product of a degree-p tensor into a degree-k tensor of
opposite variance contracts the first p slots with weight 1/p!:

    (v -| a)_{J} = sum_{I increasing} v^I a_{I J}.

So ``eps_g -| (c dx^1 ^ ... ^ dx^n) = c`` in a Euclidean chart, and the
planar vorticity scalar of rigid rotation u = W(-y, x) comes out as 2W.

All tensors may carry leading batch dimensions; operations broadcast over
them.  Everything here is pure: no cached state other than index tables.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import comb
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateFrameError, DegreeError, MetricError

COVARIANT = "covariant"
CONTRAVARIANT = "contravariant"
_VARIANCES = (COVARIANT, CONTRAVARIANT)

GS_PIVOT_TOL = 1e-12


# ---------------------------------------------------------------------------
# index tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def multi_indices(n: int, k: int) -> tuple:
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def _position(n: int, k: int) -> dict:
    return {I: i for i, I in enumerate(multi_indices(n, k))}


def permutation_sign(seq) -> int:
    seq = list(seq)
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def _merge_table(n: int, j: int, k: int):
    """Disjoint pairs (I, J) with the slot of sorted(I+J) and the sorting sign.

    Returns index arrays (ia, ib, ic), signs, and dense scatter matrices onto
    the merged slot (for wedge) and onto the J slot (for hook).
    """
    target = _position(n, j + k)
    ia, ib, ic, sg = [], [], [], []
    for a, I in enumerate(multi_indices(n, j)):
        sI = set(I)
        for b, J in enumerate(multi_indices(n, k)):
            if sI.intersection(J):
                continue
            ia.append(a)
            ib.append(b)
            ic.append(target[tuple(sorted(I + J))])
            sg.append(permutation_sign(I + J))
    ia, ib, ic = (np.asarray(v, dtype=np.intp) for v in (ia, ib, ic))
    sg = np.asarray(sg, dtype=float)
    to_merged = np.zeros((len(ia), comb(n, j + k)))
    to_merged[np.arange(len(ia)), ic] = 1.0
    to_second = np.zeros((len(ia), comb(n, k)))
    to_second[np.arange(len(ia)), ib] = 1.0
    for arr in (ia, ib, ic, sg, to_merged, to_second):
        arr.setflags(write=False)
    return ia, ib, ic, sg, to_merged, to_second


@lru_cache(maxsize=None)
def _expansion_matrix(n: int, k: int) -> np.ndarray:
    """Matrix E with full.ravel() = coeffs @ E for the antisymmetric expansion."""
    E = np.zeros((comb(n, k), n ** k))
    strides = [n ** (k - 1 - m) for m in range(k)]
    for i, I in enumerate(multi_indices(n, k)):
        for perm in permutations(range(k)):
            idx = [I[p] for p in perm]
            E[i, sum(s * v for s, v in zip(strides, idx))] = permutation_sign(perm)
    E.setflags(write=False)
    return E


@lru_cache(maxsize=None)
def _compression_index(n: int, k: int) -> np.ndarray:
    strides = [n ** (k - 1 - m) for m in range(k)]
    out = np.array([sum(s * v for s, v in zip(strides, I)) for I in multi_indices(n, k)], dtype=np.intp)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# AltTensor
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AltTensor:
    """Antisymmetric tensor of one degree and variance, optionally batched.

    ``coeffs`` has shape ``batch + (C(dim, degree),)``.
    """

    dim: int
    degree: int
    variance: str
    coeffs: np.ndarray

    def __post_init__(self):
        if self.variance not in _VARIANCES:
            raise DegreeError(f"unknown variance {self.variance!r}")
        if not 0 <= self.degree <= self.dim:
            raise DegreeError(f"degree {self.degree} outside [0, {self.dim}]")
        c = np.array(self.coeffs, dtype=float)
        if c.ndim == 0:
            c = c.reshape(1)
        if c.shape[-1] != comb(self.dim, self.degree):
            raise DegreeError(
                f"expected {comb(self.dim, self.degree)} coefficients for degree "
                f"{self.degree} in dimension {self.dim}, got {c.shape[-1]}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, dim, degree, variance=COVARIANT, batch=()):
        return cls(dim, degree, variance, np.zeros(tuple(batch) + (comb(dim, degree),)))

    @classmethod
    def scalar(cls, dim, value, variance=COVARIANT):
        return cls(dim, 0, variance, np.asarray(value, dtype=float)[..., None])

    @classmethod
    def basis(cls, dim, indices, variance=COVARIANT, value=1.0):
        """``value * dx^{i1} ^ ... ^ dx^{ik}`` for any (not necessarily sorted) indices."""
        indices = tuple(indices)
        k = len(indices)
        c = np.zeros(comb(dim, k))
        if len(set(indices)) == k:
            c[_position(dim, k)[tuple(sorted(indices))]] = value * permutation_sign(indices)
        return cls(dim, k, variance, c)

    @classmethod
    def vector(cls, components, variance=CONTRAVARIANT):
        components = np.asarray(components, dtype=float)
        return cls(components.shape[-1], 1, variance, components)

    @classmethod
    def from_full(cls, full, variance=COVARIANT, batch_ndim=0):
        """Compress a fully antisymmetric array (no antisymmetry check)."""
        full = np.asarray(full, dtype=float)
        k = full.ndim - batch_ndim
        if k == 0:
            raise DegreeError("from_full needs at least one tensor index; use AltTensor.scalar")
        n = full.shape[-1]
        flat = full.reshape(full.shape[:batch_ndim] + (n ** k,))
        return cls(n, k, variance, flat[..., _compression_index(n, k)])

    # views --------------------------------------------------------------
    @property
    def batch_shape(self):
        return self.coeffs.shape[:-1]

    @property
    def indices(self):
        return multi_indices(self.dim, self.degree)

    def full(self) -> np.ndarray:
        """Expanded antisymmetric array of shape ``batch + (dim,)*degree``."""
        if self.degree == 0:
            return self.coeffs[..., 0]
        flat = self.coeffs @ _expansion_matrix(self.dim, self.degree)
        return flat.reshape(self.batch_shape + (self.dim,) * self.degree)

    def value(self):
        """Scalar value of a degree-0 tensor."""
        if self.degree != 0:
            raise DegreeError("value() requires a degree-0 tensor")
        return self.coeffs[..., 0]

    def __getitem__(self, item):
        return AltTensor(self.dim, self.degree, self.variance, self.coeffs[item])

    # arithmetic ---------------------------------------------------------
    def _check_same(self, other):
        if (self.dim, self.degree, self.variance) != (other.dim, other.degree, other.variance):
            raise DegreeError("tensors differ in dimension, degree or variance")

    def __add__(self, other):
        self._check_same(other)
        return AltTensor(self.dim, self.degree, self.variance, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_same(other)
        return AltTensor(self.dim, self.degree, self.variance, self.coeffs - other.coeffs)

    def __neg__(self):
        return AltTensor(self.dim, self.degree, self.variance, -self.coeffs)

    def __mul__(self, s):
        s = np.asarray(s, dtype=float)
        return AltTensor(self.dim, self.degree, self.variance, self.coeffs * s[..., None])

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / np.asarray(s, dtype=float))

    def __xor__(self, other):
        return wedge(self, other)

    def norm(self):
        """Euclidean norm of the coefficient vector (batched)."""
        return np.linalg.norm(self.coeffs, axis=-1)

    # serialization ------------------------------------------------------
    def to_json(self) -> str:
        if self.batch_shape:
            raise ValueError("only unbatched tensors serialize")
        return json.dumps({
            "degree": self.degree,
            "variance": self.variance,
            "dim": self.dim,
            "indices": [list(I) for I in self.indices],
            "coeffs": self.coeffs.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "AltTensor":
        d = json.loads(text)
        return cls(d["dim"], d["degree"], d["variance"], np.asarray(d["coeffs"]))

    def __repr__(self):
        return (f"AltTensor(dim={self.dim}, degree={self.degree}, variance={self.variance!r}, "
                f"batch={self.batch_shape})")


def wedge(a: AltTensor, b: AltTensor) -> AltTensor:
    """Exterior product of two tensors of equal variance."""
    if a.variance != b.variance:
        raise DegreeError("wedge of tensors with different variance")
    if a.dim != b.dim:
        raise DegreeError("wedge of tensors on different dimensions")
    n, j, k = a.dim, a.degree, b.degree
    if j + k > n:
        raise DegreeError(f"wedge degree {j}+{k} exceeds dimension {n}")
    ia, ib, _, sg, to_merged, _ = _merge_table(n, j, k)
    prod = a.coeffs[..., ia] * b.coeffs[..., ib] * sg
    return AltTensor(n, j + k, a.variance, prod @ to_merged)


def wedge_power(a: AltTensor, q: int) -> AltTensor:
    """``a ^ a ^ ... ^ a`` (q factors); q = 0 gives the constant 1."""
    out = AltTensor(a.dim, 0, a.variance, np.ones(a.batch_shape + (1,)))
    for _ in range(q):
        out = wedge(out, a)
    return out


def hook(v: AltTensor, a: AltTensor) -> AltTensor:
    """Interior product: contract ``v`` into the first slots of ``a``.

    ``v`` and ``a`` must have opposite variance and ``v.degree <= a.degree``.
    The result keeps the variance of ``a``.
    """
    if v.variance == a.variance:
        raise DegreeError("hook needs tensors of opposite variance")
    if v.dim != a.dim:
        raise DegreeError("hook of tensors on different dimensions")
    n, p, k = a.dim, v.degree, a.degree
    if p > k:
        raise DegreeError(f"cannot contract degree {p} into degree {k}")
    ia, _, ic, sg, _, to_second = _merge_table(n, p, k - p)
    prod = v.coeffs[..., ia] * a.coeffs[..., ic] * sg
    return AltTensor(n, k - p, a.variance, prod @ to_second)


def pair(a: AltTensor, b: AltTensor):
    """Normalized full pairing of equal-degree tensors of opposite variance."""
    if a.degree != b.degree:
        raise DegreeError("pairing needs equal degrees")
    return hook(a, b).value()


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

def compound_matrix(M: np.ndarray, k: int) -> np.ndarray:
    """k-th compound (matrix of k x k minors) of a batched square matrix."""
    M = np.asarray(M, dtype=float)
    n = M.shape[-1]
    if k == 0:
        return np.ones(M.shape[:-2] + (1, 1))
    idx = np.array(multi_indices(n, k), dtype=np.intp)
    sub = M[..., idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def _check_metric(g, point=None):
    g = np.asarray(g, dtype=float)
    scale = np.max(np.abs(g), axis=(-2, -1), keepdims=True)
    if np.any(np.abs(g - np.swapaxes(g, -1, -2)) > 1e-12 * scale):
        raise MetricError("metric not symmetric", point)
    eig = np.linalg.eigvalsh(g)
    if np.any(eig <= 0):
        raise MetricError("metric not positive definite", point)
    return g


def _fd4(f, x, h):
    """4th-order central difference of f along each coordinate; returns [k, ...]."""
    x = np.asarray(x, dtype=float)
    out = []
    for kk in range(x.shape[-1]):
        e = np.zeros_like(x)
        e[..., kk] = h
        out.append((-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h))
    return np.stack(out)


@dataclass(frozen=True)
class MetricChart:
    """Riemannian metric on a coordinate chart of R^n."""

    dim: int
    g: Callable
    dg: Optional[Callable] = None
    euclidean: bool = False

    @classmethod
    def flat(cls, n: int) -> "MetricChart":
        eye = np.eye(n)
        return cls(n, lambda x: np.broadcast_to(eye, np.shape(x)[:-1] + (n, n)).copy(),
                   lambda x: np.zeros((n,) + np.shape(x)[:-1] + (n, n)), euclidean=True)

    @classmethod
    def constant(cls, G) -> "MetricChart":
        G = _check_metric(G)
        n = G.shape[0]
        return cls(n, lambda x: np.broadcast_to(G, np.shape(x)[:-1] + (n, n)).copy(),
                   lambda x: np.zeros((n,) + np.shape(x)[:-1] + (n, n)))

    def metric(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return _check_metric(self.g(x), x)

    def inverse(self, x) -> np.ndarray:
        return np.linalg.inv(self.metric(x))

    def metric_derivative(self, x) -> np.ndarray:
        """``dg[k, ..., i, j] = d_k g_ij`` (analytic, else 4th-order differences)."""
        x = np.asarray(x, dtype=float)
        if self.dg is not None:
            return np.asarray(self.dg(x), dtype=float)
        h = 1e-5 * (1.0 + np.max(np.abs(x)))
        return _fd4(self.g, x, h)

    def volume(self, x) -> "VolumeTensors":
        return volume_tensors(self.metric(x))


def sharp(a: AltTensor, g) -> AltTensor:
    """Raise every index of a covariant tensor with the inverse of ``g``."""
    if a.variance != COVARIANT:
        raise DegreeError("sharp expects a covariant tensor")
    g = np.asarray(g, dtype=float)
    if abs(np.linalg.det(g)) < 1e-300 or np.linalg.cond(g) > 1e14:
        raise MetricError("singular metric in sharp")
    ginv = np.linalg.inv(g)
    C = compound_matrix(ginv, a.degree)
    return AltTensor(a.dim, a.degree, CONTRAVARIANT, np.einsum("...ij,...j->...i", C, a.coeffs))


def flat(v: AltTensor, g) -> AltTensor:
    """Lower every index of a contravariant tensor with ``g``."""
    if v.variance != CONTRAVARIANT:
        raise DegreeError("flat expects a contravariant tensor")
    C = compound_matrix(np.asarray(g, dtype=float), v.degree)
    return AltTensor(v.dim, v.degree, COVARIANT, np.einsum("...ij,...j->...i", C, v.coeffs))


def metric_contraction(a: AltTensor, b: AltTensor, g) -> np.ndarray:
    """Unnormalized full contraction ``a^{i..} b^{j..} g_ij ...`` of like tensors.

    For contravariant arguments; equals k! times the normalized pairing.
    """
    from math import factorial
    if a.variance != CONTRAVARIANT or b.variance != CONTRAVARIANT:
        raise DegreeError("metric_contraction expects contravariant tensors")
    return factorial(a.degree) * pair(flat(a, g), b)


# ---------------------------------------------------------------------------
# volume tensors and surface frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VolumeTensors:
    """Volume tensor eps_g (contravariant) and volume form dV (covariant)."""

    eps_g: AltTensor
    eps_form: AltTensor


def volume_tensors(g) -> VolumeTensors:
    g = np.asarray(g, dtype=float)
    n = g.shape[-1]
    root = np.sqrt(np.linalg.det(g))
    return VolumeTensors(
        AltTensor(n, n, CONTRAVARIANT, (1.0 / root)[..., None]),
        AltTensor(n, n, COVARIANT, root[..., None]),
    )


@dataclass(frozen=True, eq=False)
class SurfaceFrame:
    """Tangent frame of an s-surface at one point with orthonormal normals.

    ``tangents`` is n x s, ``normals`` n x (n - s); ``orientation`` is +1
    unless s = n and the tangents are negatively oriented.
    """

    tangents: np.ndarray
    normals: np.ndarray
    g: np.ndarray
    boundary_normal: Optional[np.ndarray] = None
    orientation: int = 1

    @property
    def dim(self):
        return self.tangents.shape[0]

    @property
    def sdim(self):
        return self.tangents.shape[1]

    @classmethod
    def from_tangents(cls, tangents, g=None, normal_span=None, boundary_normal=None, node=None):
        """Complete a tangent frame with g-orthonormal normals.

        Normals come from Gram-Schmidt over the rows of ``normal_span``
        (default: coordinate axes, in order) after removing the tangent
        space; candidates whose remainder falls below the pivot tolerance are
        skipped.  The first normal is flipped if needed so that the normals
        followed by the tangents are positively oriented.
        """
        J = np.asarray(tangents, dtype=float)
        if J.ndim == 1:
            J = J[:, None]
        n, s = J.shape
        g = np.eye(n) if g is None else np.asarray(g, dtype=float)
        if s:
            ev = np.linalg.eigvalsh(J.T @ g @ J)
            if ev[0] <= 1e-12 * max(ev[-1], 1e-300):
                raise DegenerateFrameError(f"tangent frame has rank < {s}", node)

        basis = []
        for col in J.T:
            w = col.copy()
            for b in basis:
                w -= (b @ g @ w) * b
            basis.append(w / np.sqrt(w @ g @ w))
        cand = np.eye(n) if normal_span is None else np.asarray(normal_span, dtype=float).reshape(-1, n)
        normals = []
        for c in cand:
            if len(normals) == n - s:
                break
            w = c.copy()
            for b in basis + normals:
                w -= (b @ g @ w) * b
            nrm = np.sqrt(max(w @ g @ w, 0.0))
            if nrm <= GS_PIVOT_TOL:
                continue
            normals.append(w / nrm)
        if len(normals) != n - s:
            raise DegenerateFrameError("normal span does not complete the tangent frame", node)
        N = np.array(normals, dtype=float).T.reshape(n, n - s)

        orient = 1
        if np.linalg.det(np.hstack([N, J])) < 0:
            if n > s:
                N[:, 0] *= -1
            else:
                orient = -1
        if boundary_normal is not None:
            boundary_normal = np.asarray(boundary_normal, dtype=float)
        return cls(J, N, g, boundary_normal, orient)

    def check(self, tol=1e-10):
        N, J, g = self.normals, self.tangents, self.g
        if N.size:
            if np.max(np.abs(N.T @ g @ N - np.eye(N.shape[1]))) > tol:
                raise DegenerateFrameError("normals not g-orthonormal")
            if J.size and np.max(np.abs(N.T @ g @ J)) > tol * max(1.0, np.max(np.abs(J))):
                raise DegenerateFrameError("normals not orthogonal to tangents")
        return True


def outward_unit_normal(boundary_tangents, transversal, g=None):
    """Unit normal of a boundary inside its surface.

    ``transversal`` is any surface tangent pointing outward; its component
    g-orthogonal to the boundary tangents is normalized.
    """
    v = np.asarray(transversal, dtype=float).copy()
    n = v.shape[-1]
    g = np.eye(n) if g is None else np.asarray(g, dtype=float)
    B = np.asarray(boundary_tangents, dtype=float).reshape(n, -1)
    if B.shape[1]:
        v = v - B @ np.linalg.solve(B.T @ g @ B, B.T @ g @ v)
    return v / np.sqrt(v @ g @ v)


def surface_volume_tensors(frame: SurfaceFrame, vol: Optional[VolumeTensors] = None):
    """Volume tensors of a surface and its boundary at one point.

    Returns ``(eps_S, eps_dS, dV_density)`` where ``eps_S`` is the
    contravariant s-vector with ``e_1 ^ .. ^ e_{n-s} ^ eps_S = eps_g``,
    ``eps_dS`` satisfies ``nhat ^ eps_dS = eps_S`` (None without a boundary
    normal) and ``dV_density = sqrt(det(J^T g J))``.
    """
    g = frame.g
    n, s = frame.dim, frame.sdim
    vol = volume_tensors(g) if vol is None else vol
    J = frame.tangents
    gram = J.T @ g @ J
    ev = np.linalg.eigvalsh(gram) if s else np.ones(1)
    if s and ev[0] <= (1e-12 * max(ev[-1], 1e-300)):
        raise DegenerateFrameError(f"tangent frame has rank < {s}")
    density = float(np.sqrt(np.linalg.det(gram))) if s else 1.0

    normals = AltTensor(n, 0, COVARIANT, np.ones(1))
    for e in frame.normals.T:
        normals = wedge(normals, flat(AltTensor.vector(e), g))
    eps_S = hook(normals, vol.eps_g) * frame.orientation

    eps_dS = None
    if frame.boundary_normal is not None:
        eps_dS = hook(flat(AltTensor.vector(frame.boundary_normal), g), eps_S)
    return eps_S, eps_dS, density


# ---------------------------------------------------------------------------
# batched frame helpers (Euclidean or constant metric)
# ---------------------------------------------------------------------------

def frame_minors(J: np.ndarray) -> np.ndarray:
    """Coefficients of ``J[:,0] ^ ... ^ J[:,s-1]`` for a batch of n x s frames."""
    J = np.asarray(J, dtype=float)
    n, s = J.shape[-2], J.shape[-1]
    if s == 0:
        return np.ones(J.shape[:-2] + (1,))
    idx = np.array(multi_indices(n, s), dtype=np.intp)
    return np.linalg.det(J[..., idx, :])


def evaluate_form(alpha: AltTensor, J: np.ndarray) -> np.ndarray:
    """``alpha(J_1, ..., J_s)`` for covariant ``alpha`` and frames ``J``."""
    if alpha.variance != COVARIANT:
        raise DegreeError("only covariant forms are evaluated on frames")
    if alpha.degree != np.shape(J)[-1]:
        raise DegreeError(f"form degree {alpha.degree} != frame rank {np.shape(J)[-1]}")
    return np.sum(alpha.coeffs * frame_minors(J), axis=-1)


def frame_volume(J: np.ndarray, g=None) -> np.ndarray:
    """s-volume ``sqrt(det(J^T g J))`` of a batch of frames."""
    J = np.asarray(J, dtype=float)
    if J.shape[-1] == 0:
        return np.ones(J.shape[:-2])
    gJ = J if g is None else np.asarray(g) @ J
    return np.sqrt(np.clip(np.linalg.det(np.swapaxes(J, -1, -2) @ gJ), 0, None))


def frame_volume_tensor(J: np.ndarray, g=None) -> AltTensor:
    """Unit contravariant s-vector eps(S) oriented like the frame columns."""
    J = np.asarray(J, dtype=float)
    n = J.shape[-2]
    vol = frame_volume(J, g)
    return AltTensor(n, J.shape[-1], CONTRAVARIANT, frame_minors(J) / vol[..., None])
