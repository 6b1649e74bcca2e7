"""Cauchy kernel and midpoint quadratures on box surfaces, box volumes and spheres.

The oriented surface form ``psi_eta`` pulls back to ``sum_k n_k psi_k dS`` with
``n`` the outward unit normal, so a face with normal ``+-e_k`` carries the
constant quaternion weight ``+-psi_k`` times the cell area.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .grid import Box
from .quat import STANDARD, StructuralSet, qconj, qmul
from .reduce import blocked_sum


def cauchy_kernel(x, psi: StructuralSet = STANDARD) -> np.ndarray:
    """``conj(x) / (4 pi |x|^3)`` for A-valued ``x`` shaped ``(..., 4)``.

    ``psi`` is accepted for symmetry with the other operators; the kernel only
    depends on the embedded point.
    """
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise DomainError("Cauchy kernel is singular at the origin")
    return qconj(x) / (4.0 * np.pi * r[..., None] ** 3)


def kernel_at(d, psi: StructuralSet = STANDARD) -> np.ndarray:
    """Cauchy kernel of the embedded coordinate differences ``d`` shaped ``(..., 3)``."""
    return cauchy_kernel(psi.embed(d), psi)


#: Relative slack of the exclusion test, so distances that equal the radius up
#: to rounding are always treated as touching the ball.
EXCLUSION_SLACK = 1e-9


def outside_exclusion(distance, eps: float):
    """True where a cell at ``distance`` from the point lies clear of the exclusion ball."""
    return np.asarray(distance) > eps * (1.0 + EXCLUSION_SLACK)


def _as_values(h, nodes):
    if h is None:
        return None
    if callable(h):
        return np.asarray(h(nodes))
    return np.asarray(h)


@dataclass(frozen=True)
class SurfaceQuadrature:
    """Midpoint rule on the six faces of a box, ``m x m`` cells per face.

    Attributes
    ----------
    nodes : ndarray (N, 3)
        Cell midpoints.
    weights : ndarray (N, 4)
        Quaternion surface weights ``n_k psi_k dA``.
    areas : ndarray (N,)
        Cell areas.
    face : ndarray (N,)
        ``2 k`` for the lower face normal to axis ``k`` and ``2 k + 1`` for the upper one.
    """

    box: Box
    m: int
    psi: StructuralSet
    nodes: np.ndarray
    weights: np.ndarray
    areas: np.ndarray
    face: np.ndarray

    @classmethod
    def build(cls, box: Box, m: int, psi: StructuralSet = STANDARD) -> SurfaceQuadrature:
        m = int(m)
        if m < 1:
            raise DomainError(f"surface resolution must be positive, got {m}")
        nodes, weights, areas, face = [], [], [], []
        mat = psi.matrix
        for k in range(3):
            i, j = [a for a in range(3) if a != k]
            ui = box.a[i] + (np.arange(m) + 0.5) * (box.b[i] - box.a[i]) / m
            uj = box.a[j] + (np.arange(m) + 0.5) * (box.b[j] - box.a[j]) / m
            gi, gj = np.meshgrid(ui, uj, indexing="ij")
            da = (box.b[i] - box.a[i]) * (box.b[j] - box.a[j]) / m**2
            for upper, sign in ((0, -1.0), (1, 1.0)):
                pts = np.empty((m * m, 3))
                pts[:, i] = gi.ravel()
                pts[:, j] = gj.ravel()
                pts[:, k] = box.b[k] if upper else box.a[k]
                nodes.append(pts)
                weights.append(np.broadcast_to(sign * da * mat[k], (m * m, 4)))
                areas.append(np.full(m * m, da))
                face.append(np.full(m * m, 2 * k + upper))
        return cls(box, m, psi, np.concatenate(nodes), np.concatenate(weights), np.concatenate(areas), np.concatenate(face))

    def __len__(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class VolumeQuadrature:
    """Tensor midpoint rule with ``n`` cells per axis."""

    box: Box
    n: int
    nodes: np.ndarray
    dv: float
    cell: np.ndarray

    @classmethod
    def build(cls, box: Box, n: int) -> VolumeQuadrature:
        n = int(n)
        if n < 1:
            raise DomainError(f"volume resolution must be positive, got {n}")
        axes = [box.a[k] + (np.arange(n) + 0.5) * (box.b[k] - box.a[k]) / n for k in range(3)]
        nodes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        cell = box.widths / n
        return cls(box, n, nodes, float(np.prod(cell)), cell)

    @property
    def h(self) -> float:
        """Largest cell width."""
        return float(np.max(self.cell))

    def outside_ball(self, x, eps: float) -> np.ndarray:
        """Mask of cells whose closed box does not meet the ball ``B(x, eps)``."""
        x = np.asarray(x, dtype=float)
        gap = np.maximum(np.abs(self.nodes - x) - 0.5 * self.cell, 0.0)
        return outside_exclusion(np.linalg.norm(gap, axis=-1), eps)

    def __len__(self) -> int:
        return self.nodes.shape[0]


def surface_integral(g, f, sq: SurfaceQuadrature, weight: Optional[Callable] = None):
    """``sum_nodes g (weight psi_eta) f``, keeping the factor order.

    ``g`` and ``f`` are callables on points ``(N, 3)`` or precomputed node
    values ``(N, 4)``; ``weight`` is an optional real callable on points.
    """
    gv = _as_values(g, sq.nodes)
    fv = _as_values(f, sq.nodes)
    wv = sq.weights
    if weight is not None:
        wv = wv * np.asarray(weight(sq.nodes))[:, None]

    def term(s, e):
        return np.sum(qmul(qmul(gv[s:e], wv[s:e]), fv[s:e]), axis=0)

    return blocked_sum(term, len(sq))


def volume_integral(values, vq: VolumeQuadrature, mask=None):
    """Midpoint sum of node values ``(N, 4)`` (optionally masked)."""
    values = np.asarray(values)
    if mask is not None:
        values = values * mask[:, None]

    def term(s, e):
        return np.sum(values[s:e], axis=0)

    return blocked_sum(term, len(vq)) * vq.dv


def sphere_quadrature(center, r: float, m: int, psi: StructuralSet = STANDARD):
    """Nodes and quaternion surface weights on a sphere.

    Latitude-longitude midpoint rule with ``m`` polar and ``2 m`` azimuthal
    cells; weights are the parametrization cross products times the cell size.
    """
    if r <= 0:
        raise DomainError(f"sphere radius must be positive, got {r}")
    m = int(m)
    theta = (np.arange(m) + 0.5) * np.pi / m
    phi = (np.arange(2 * m) + 0.5) * np.pi / m
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    normal = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1).reshape(-1, 3)
    dS = (r**2 * np.sin(th) * (np.pi / m) ** 2).reshape(-1)
    nodes = np.asarray(center, dtype=float) + r * normal
    weights = psi.embed(normal * dS[:, None])
    return nodes, weights


def sphere_moment(x0, r: float, m: int, psi: StructuralSet = STANDARD) -> np.ndarray:
    """Surface integral of ``conj(tau - x0) psi_eta`` over the sphere ``|tau - x0| = r``."""
    nodes, weights = sphere_quadrature(x0, r, m, psi)
    d = qconj(psi.embed(nodes - np.asarray(x0, dtype=float)))

    def term(s, e):
        return np.sum(qmul(d[s:e], weights[s:e]), axis=0)

    return blocked_sum(term, nodes.shape[0])
