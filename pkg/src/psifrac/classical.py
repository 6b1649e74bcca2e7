"""Classical integral identities: Stokes, Borel-Pompeiu and kernel hyperholomorphy."""

from __future__ import annotations

import numpy as np

from .convergence import IdentityReport, Resolution
from .errors import DomainError
from .grid import Box
from .quadrature import SurfaceQuadrature, VolumeQuadrature, kernel_at, surface_integral, volume_integral
from .quat import STANDARD, StructuralSet, qmul, qnorm
from .reduce import blocked_sum


def pointwise_partials(f, pts, h: float) -> np.ndarray:
    """Central differences of the callable ``f`` at ``pts``; shape ``(N, 3, 4)``."""
    pts = np.asarray(pts, dtype=float)
    eye = np.eye(3) * h
    return np.stack([(np.asarray(f(pts + eye[k])) - np.asarray(f(pts - eye[k]))) / (2.0 * h) for k in range(3)], axis=-2)


def pointwise_dbar(f, pts, psi: StructuralSet = STANDARD, side: str = "left", h: float = 1e-4) -> np.ndarray:
    """``sum_k psi_k d_k f`` (left) or ``sum_k d_k f psi_k`` (right) at ``pts``."""
    d = pointwise_partials(f, pts, h)
    m = psi.matrix
    if side == "left":
        return sum(qmul(m[k], d[..., k, :]) for k in range(3))
    if side == "right":
        return sum(qmul(d[..., k, :], m[k]) for k in range(3))
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def closed_surface_null(box: Box, m: int, psi: StructuralSet = STANDARD) -> float:
    """Norm of the sum of all surface weights; zero by pairwise cancellation of faces."""
    sq = SurfaceQuadrature.build(box, m, psi)
    total = blocked_sum(lambda s, e: np.sum(sq.weights[s:e], axis=0), len(sq))
    return float(qnorm(total))


def stokes_residual(g, f, box: Box, n_vol: int, m_surf: int, psi: StructuralSet = STANDARD, h_fd: float = 1e-4) -> IdentityReport:
    """Surface integral of ``g psi_eta f`` against the volume integral of ``g (psi_dbar f) + (psi_dbar_r g) f``."""
    sq = SurfaceQuadrature.build(box, m_surf, psi)
    vq = VolumeQuadrature.build(box, n_vol)
    lhs = surface_integral(g, f, sq)
    pts = vq.nodes
    integrand = qmul(g(pts), pointwise_dbar(f, pts, psi, "left", h_fd)) + qmul(pointwise_dbar(g, pts, psi, "right", h_fd), f(pts))
    rhs = volume_integral(integrand, vq)
    scale = max(float(qnorm(lhs)), float(qnorm(rhs)), 1e-300)
    return IdentityReport("stokes", lhs, rhs, Resolution(n_vol, m_surf, 0, h_fd), scale=scale)


def borel_pompeiu_classical(
    f, g, x, box: Box, n_vol: int, m_surf: int, eps: float | None = None, psi: StructuralSet = STANDARD, h_fd: float = 1e-4
) -> IdentityReport:
    """Boundary Cauchy integrals minus the volume Teodorescu terms, against ``f(x) + g(x)`` or 0.

    For interior ``x`` volume cells meeting the ball ``B(x, eps)`` are dropped,
    with ``eps = 2 h`` by default (``h`` the cell width). The report's scale is
    ``|f(x) + g(x)|`` inside and the largest ``|f| + |g|`` on the surface nodes
    outside.
    """
    x = np.asarray(x, dtype=float)
    sq = SurfaceQuadrature.build(box, m_surf, psi)
    vq = VolumeQuadrature.build(box, n_vol)
    inside = box.contains(x, strict=True)
    if not inside and box.contains(x, strict=False):
        raise DomainError(f"point {x.tolist()} lies on the boundary")
    eps = 2.0 * vq.h if eps is None else float(eps)
    if inside and eps <= 0:
        raise DomainError("interior points need a positive exclusion radius")

    fs, gs = f(sq.nodes), g(sq.nodes)
    ks = kernel_at(sq.nodes - x, psi)
    boundary = surface_integral(ks, fs, sq) + surface_integral(gs, ks, sq)

    pts = vq.nodes
    mask = vq.outside_ball(x, eps) if inside else np.ones(len(vq), dtype=bool)
    safe = np.where(mask[:, None], pts - x, 1.0)
    kv = kernel_at(safe, psi)
    integrand = qmul(kv, pointwise_dbar(f, pts, psi, "left", h_fd)) + qmul(pointwise_dbar(g, pts, psi, "right", h_fd), kv)
    volume = volume_integral(integrand, vq, mask)

    lhs = boundary - volume
    if inside:
        rhs = np.asarray(f(x[None]))[0] + np.asarray(g(x[None]))[0]
        scale = float(qnorm(rhs))
    else:
        rhs = np.zeros(4)
        scale = float(np.max(qnorm(fs) + qnorm(gs)))
    return IdentityReport(
        "borel-pompeiu", lhs, rhs, Resolution(n_vol, m_surf, 0, h_fd), scale=scale or 1.0, extra={"inside": inside, "eps": eps}
    )


def shell_points(count: int = 200, r_min: float = 0.5, r_max: float = 1.0, seed: int = 0) -> np.ndarray:
    """Deterministic random points with ``r_min <= |x| <= r_max``."""
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=(count, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = rng.uniform(r_min, r_max, size=count)
    return direction * radius[:, None]


def kernel_dbar_residual(h: float, psi: StructuralSet = STANDARD, points=None, side: str = "right") -> float:
    """Largest ``|psi_dbar K|`` over ``points`` by central differences of step ``h``."""
    pts = shell_points() if points is None else np.asarray(points, dtype=float)
    vals = pointwise_dbar(lambda p: kernel_at(p, psi), pts, psi, side, h)
    return float(np.max(qnorm(vals)))
