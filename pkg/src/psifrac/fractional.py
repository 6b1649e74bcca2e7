"""Exponential weights and the fractional Stokes and Borel-Pompeiu identities.

Notation used in this module, for fractional parameters ``p`` and a base point
``y``:

* ``I(x)`` is the slice-integral sum of complement order ``1 - alpha``.
* ``op(x)`` is the fractional proportional psi-Cauchy-Riemann operator.
* ``Lambda(x) = sum_k lambda_k(x)`` is the exponent of the weight built by
  :func:`build_lambda` from ``D phi(x, y) sigma^{-1} (1 - sigma)``.
* ``C = D phi sigma^{-1}`` (left) and ``C_r = rho^{-1} D theta`` (right) are the
  quaternion factors multiplying the operators in the volume terms.

In the Riemann-Liouville specialization the weight is 1 and both factors are 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import frac1d
from .convergence import IdentityReport, Resolution
from .errors import DomainError, PreconditionError
from .grid import Box
from .psi_ops import FracParams, Weight3, combine_operator, frac_prop_integral_3d, slice_integral, slice_state
from .quadrature import SurfaceQuadrature, VolumeQuadrature, kernel_at, outside_exclusion, surface_integral, volume_integral
from .quat import STANDARD, StructuralSet, qinv, qmul, qnorm
from .reduce import parallel_map

_E0 = np.array([1.0, 0.0, 0.0, 0.0])

#: Gauss-Legendre points for the exponent integrals.
GAUSS_POINTS = 16


# --- exponential weights -------------------------------------------------------


@dataclass(frozen=True)
class LambdaSet:
    """Exponent functions ``lambda_k(x) = int_{a_k}^{x_k} rate_k(x with x_k = t) dt``.

    ``rate(x) = D phi(x, y) c`` with ``c`` the structural-set coordinates of
    ``sigma^{-1} (1 - sigma)``, so ``d lambda_k / d x_k = rate_k`` exactly.
    """

    weight: Weight3 | None
    coeffs: np.ndarray
    y: tuple
    box: Box
    target: np.ndarray = field(default_factory=lambda: np.zeros(4))
    psi: StructuralSet = STANDARD
    n_gauss: int = GAUSS_POINTS

    @classmethod
    def zero(cls, box: Box, psi: StructuralSet = STANDARD) -> LambdaSet:
        return cls(None, np.zeros(3), (0.0, 0.0, 0.0), box, np.zeros(4), psi)

    @property
    def is_zero(self) -> bool:
        return self.weight is None or not np.any(self.coeffs)

    def rate(self, x) -> np.ndarray:
        """``d lambda_k / d x_k`` at ``x``, shape ``(..., 3)``."""
        x = np.asarray(x, dtype=float)
        if self.weight is None:
            return np.zeros(x.shape)
        return self.weight.slice_derivative_sum(x, self.y)[..., None] * self.coeffs

    def values(self, x) -> np.ndarray:
        """``lambda_k(x)``, shape ``(..., 3)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        if self.is_zero:
            return out
        nodes, weights = np.polynomial.legendre.leggauss(self.n_gauss)
        for k in range(3):
            if self.coeffs[k] == 0.0:
                continue
            lo = self.box.a[k]
            half = 0.5 * (x[..., k] - lo)
            t = lo + half[..., None] * (nodes + 1.0)
            pts = np.repeat(x[..., None, :], self.n_gauss, axis=-2)
            pts[..., k] = t
            out[..., k] = half * np.sum(weights * self.rate(pts)[..., k], axis=-1)
        return out

    def total(self, x) -> np.ndarray:
        return np.sum(self.values(x), axis=-1)

    def _partials(self, x, h):
        # fourth-order central differences: d_j lambda_k at x, shape (..., j, k)
        x = np.asarray(x, dtype=float)
        eye = np.eye(3) * h
        out = []
        for j in range(3):
            d = (
                self.values(x - 2 * eye[j]) - 8.0 * self.values(x - eye[j]) + 8.0 * self.values(x + eye[j]) - self.values(x + 2 * eye[j])
            ) / (12.0 * h)
            out.append(d)
        return np.stack(out, axis=-2)

    def defining_condition_residual(self, points, h: float = 1e-3) -> float:
        """Largest ``|sum_k psi_k d lambda_k / d x_k - D phi sigma^{-1} (1 - sigma)|`` by differences."""
        points = np.asarray(points, dtype=float)
        d = self._partials(points, h)
        diag = np.stack([d[..., k, k] for k in range(3)], axis=-1)
        lhs = self.psi.embed(diag)
        dphi = self.weight.slice_derivative_sum(points, self.y) if self.weight is not None else np.zeros(points.shape[:-1])
        rhs = dphi[..., None] * self.target
        return float(np.max(qnorm(lhs - rhs)))

    def integrability_defect(self, points, h: float = 1e-3) -> float:
        """Largest ``|sum_k psi_k sum_{j != k} d lambda_j / d x_k|``.

        The product rule for ``exp(sum_k lambda_k)`` needs this to vanish; it
        does when each ``lambda_k`` depends on ``x_k`` alone.
        """
        points = np.asarray(points, dtype=float)
        d = self._partials(points, h)
        off = np.stack([np.sum(d[..., k, :], axis=-1) - d[..., k, k] for k in range(3)], axis=-1)
        return float(np.max(qnorm(self.psi.embed(off))))


def build_lambda(w: Weight3, sigma, y, psi: StructuralSet, box: Box, n_gauss: int = GAUSS_POINTS) -> LambdaSet:
    """Exponent functions for the weight ``w`` and proportion components ``sigma``.

    Raises
    ------
    DomainError
        If ``sigma^{-1} (1 - sigma)`` has an ``e3`` component, in which case no
        real exponents satisfy the defining condition over ``psi``.
    """
    sig = psi.embed(np.asarray(sigma, dtype=float))
    if qnorm(sig) < 1e-10:
        raise DomainError("proportion quaternion is not invertible")
    target = qmul(qinv(sig), _E0 - sig)
    if abs(target[3]) > 1e-12 * max(1.0, float(qnorm(target))):
        raise DomainError(f"sigma^-1 (1 - sigma) leaves A: e3 component {target[3]!r}")
    target = np.array([target[0], target[1], target[2], 0.0])
    coeffs = psi.coords(target)
    return LambdaSet(w, coeffs, tuple(float(v) for v in y), box, target, psi, n_gauss)


def lambda_for(p: FracParams, y, psi: StructuralSet, box: Box) -> LambdaSet:
    if p.riemann_liouville:
        return LambdaSet.zero(box, psi)
    return build_lambda(p.weight, p.sigma, y, psi, box)


def left_factor(p: FracParams, psi: StructuralSet, x, y) -> np.ndarray:
    """``C = D phi(x, y) sigma^{-1}`` at points ``x``; 1 in the Riemann-Liouville case."""
    x = np.asarray(x, dtype=float)
    if p.riemann_liouville:
        return np.broadcast_to(_E0, x.shape[:-1] + (4,))
    return p.dphi(x, y)[..., None] * qinv(p.sigma_quaternion(psi))


def right_factor(p: FracParams, psi: StructuralSet, x, y) -> np.ndarray:
    """``C_r = rho^{-1} D theta(x, y)``; 1 in the Riemann-Liouville case."""
    return left_factor(p, psi, x, y)


# --- product rule -------------------------------------------------------------


def weighted_product_rule_sides(
    f, p: FracParams, ls: LambdaSet, psi: StructuralSet, y, x, box: Box, n_quad: int = 256, h_fd: float = 1e-3
) -> dict[str, np.ndarray]:
    """Both sides of the left and right exponential-weight product rules at points ``x``.

    Left: ``psi_dbar[e^Lambda I] = D phi sigma^{-1} op e^Lambda``; right:
    ``psi_dbar_r[e^Lambda I] = op_r sigma^{-1} D phi e^Lambda``. The outer
    derivatives are central differences of step ``h_fd``. Keys are
    ``lhs_left``, ``rhs_left``, ``lhs_right`` and ``rhs_right``, each ``(N, 4)``.
    """
    x = np.asarray(x, dtype=float).reshape(-1, 3)
    eye = np.eye(3) * h_fd
    order = p.complement_orders()

    def weighted(pts):
        return np.exp(ls.total(pts))[..., None] * frac_prop_integral_3d(f, p, y, pts, box, "left", n_quad, order=order)

    parts = [(weighted(x + eye[k]) - weighted(x - eye[k])) / (2.0 * h_fd) for k in range(3)]
    m = psi.matrix
    state = slice_state(f, p, y, x, box, "a", n_quad, h_fd)
    e = np.exp(ls.total(x))[..., None]
    sig_inv = qinv(p.sigma_quaternion(psi))
    d = p.dphi(x, y)[..., None]
    return {
        "lhs_left": sum(qmul(m[k], parts[k]) for k in range(3)),
        "rhs_left": d * qmul(sig_inv, combine_operator(state, p, psi, x, y, "left")) * e,
        "lhs_right": sum(qmul(parts[k], m[k]) for k in range(3)),
        "rhs_right": qmul(combine_operator(state, p, psi, x, y, "right"), sig_inv) * d * e,
    }


def weighted_product_rule_residual(
    f, p: FracParams, ls: LambdaSet, psi: StructuralSet, y, x, box: Box, n_quad: int = 256, h_fd: float = 1e-3
) -> float:
    """Largest residual of the left and right product rules over the points ``x``."""
    s = weighted_product_rule_sides(f, p, ls, psi, y, x, box, n_quad, h_fd)
    return float(max(np.max(qnorm(s["lhs_left"] - s["rhs_left"])), np.max(qnorm(s["lhs_right"] - s["rhs_right"]))))


# --- fractional Stokes ----------------------------------------------------------


@dataclass(frozen=True)
class FracSetup:
    """Both parameter sets and their exponent functions at a base point."""

    pf: FracParams
    pg: FracParams
    y: tuple
    box: Box
    psi: StructuralSet
    lam: LambdaSet
    mu: LambdaSet

    @classmethod
    def build(cls, pf, pg, y, box, psi=STANDARD) -> FracSetup:
        y = tuple(float(v) for v in y)
        if not box.contains(y, strict=True):
            raise DomainError(f"base point {y} must be interior to the box")
        return cls(pf, pg, y, box, psi, lambda_for(pf, y, psi, box), lambda_for(pg, y, psi, box))


def frac_stokes_residual(
    f, g, pf: FracParams, pg: FracParams, y, box: Box, n_vol: int, m_surf: int, psi: StructuralSet = STANDARD, n_quad: int = 128, h_fd: float | None = None
) -> IdentityReport:
    """Weighted surface integral of ``I_g psi_eta I_f`` against the operator volume integral.

    ``h_fd`` defaults to a quarter of the volume cell width so that every
    difference stencil stays inside the box.
    """
    st = FracSetup.build(pf, pg, y, box, psi)
    sq = SurfaceQuadrature.build(box, m_surf, psi)
    vq = VolumeQuadrature.build(box, n_vol)
    h_fd = 0.25 * vq.h if h_fd is None else float(h_fd)

    def exponent(pts):
        return np.exp(st.lam.total(pts) + st.mu.total(pts))

    i_f = frac_prop_integral_3d(f, pf, st.y, sq.nodes, box, "left", n_quad, order=pf.complement_orders())
    i_g = frac_prop_integral_3d(g, pg, st.y, sq.nodes, box, "left", n_quad, order=pg.complement_orders())
    lhs = surface_integral(i_g, i_f, sq, weight=exponent)

    pts = vq.nodes
    sf = slice_state(f, pf, st.y, pts, box, "a", n_quad, h_fd)
    sg = slice_state(g, pg, st.y, pts, box, "a", n_quad, h_fd)
    op_f = combine_operator(sf, pf, psi, pts, st.y, "left")
    op_g = combine_operator(sg, pg, psi, pts, st.y, "right")
    cf = left_factor(pf, psi, pts, st.y)
    cg = right_factor(pg, psi, pts, st.y)
    integrand = qmul(qmul(sg.integral, cf), op_f) + qmul(qmul(op_g, cg), sf.integral)
    rhs = volume_integral(integrand * exponent(pts)[:, None], vq)
    scale = max(float(qnorm(lhs)), float(qnorm(rhs)), 1e-300)
    return IdentityReport("frac-stokes", lhs, rhs, Resolution(n_vol, m_surf, n_quad, h_fd), scale=scale)


# --- fractional Borel-Pompeiu ----------------------------------------------------


def _line_interval(box: Box, axis: int, x) -> tuple[float, float]:
    return box.a[axis], max(box.b[axis], float(x[axis]))


def derivative_of_one(p: FracParams, y, box: Box, axis: int, t, n_quad: int, h_fd: float, hi: float | None = None):
    """Fractional proportional derivative of order ``1 - alpha[axis]`` of the constant 1 at ``t``."""
    rho = p.slice_proportion(axis)
    if rho == 0.0:
        return np.ones(np.shape(t))
    order = p.complement_orders()[axis]
    hi = box.b[axis] if hi is None else hi
    return frac1d.prop_frac_derivative(
        lambda s: np.ones(np.shape(s)), order, rho, p.slice_weight(y, axis), box.a[axis], hi, t, "left", n_quad, h_fd
    )


def remainder_R(f, p: FracParams, x, y, box: Box, n_quad: int = 128, h_fd: float = 1e-3) -> np.ndarray:
    """``sum_i I_i(x_i) sum_{j != i} D_j(1)(x_j)`` with the derivatives of 1 evaluated at ``x_j``."""
    x = np.asarray(x, dtype=float)
    ones = [derivative_of_one(p, y, box, j, x[j], n_quad, h_fd) for j in range(3)]
    total = 0.0
    for i in range(3):
        s_i, _ = slice_integral(f, p, y, box, i, np.array(x[i]), n_quad=n_quad)
        total = total + s_i * sum(ones[j] for j in range(3) if j != i)
    return np.asarray(total)


@dataclass
class KernelSums:
    """Node data for the Cauchy-type sums ``P(x')`` whose fractional derivatives form the left side.

    For the left family ``P(x') = sum_s K(z_s - x') e^(L_s - L(x')) W_s``
    minus the masked volume sum with ``V_v``; the right family multiplies the
    kernel from the right instead.
    """

    side: str
    lam: LambdaSet
    surf_nodes: np.ndarray
    surf_exp: np.ndarray
    surf_w: np.ndarray
    vol_nodes: np.ndarray
    vol_exp: np.ndarray
    vol_w: np.ndarray
    vol_cell: np.ndarray
    eps: float
    psi: StructuralSet

    CHUNK = 16

    def _sum(self, xp, nodes, expo, w, mask_cells):
        d = nodes[None] - xp[:, None]
        # coincident volume nodes are masked below; keep the kernel finite there
        d = np.where((d == 0.0).all(-1, keepdims=True), 1.0, d)
        k = kernel_at(d, self.psi)
        scale = np.exp(expo[None, :] - self.lam.total(xp)[:, None])
        if mask_cells:
            gap = np.maximum(np.abs(nodes[None] - xp[:, None]) - 0.5 * self.vol_cell, 0.0)
            scale = scale * outside_exclusion(np.linalg.norm(gap, axis=-1), self.eps)
        k = k * scale[..., None]
        prod = qmul(k, w[None]) if self.side == "left" else qmul(w[None], k)
        return np.sum(prod, axis=1)

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, 3)

        def chunk(se):
            s, e = se
            xp = flat[s:e]
            total = self._sum(xp, self.surf_nodes, self.surf_exp, self.surf_w, False)
            if self.vol_w is not None:
                total = total - self._sum(xp, self.vol_nodes, self.vol_exp, self.vol_w, True)
            return total

        bounds = [(s, min(s + self.CHUNK, len(flat))) for s in range(0, len(flat), self.CHUNK)]
        out = np.concatenate(parallel_map(chunk, bounds), axis=0) if bounds else np.zeros((0, 4))
        return out.reshape(pts.shape[:-1] + out.shape[-1:])


def _kernel_sums(fn, p, st: FracSetup, side, sq, vq, n_quad, h_fd, eps, with_volume) -> KernelSums:
    psi, y, box = st.psi, st.y, st.box
    lam = st.lam if side == "left" else st.mu
    integral = frac_prop_integral_3d(fn, p, y, sq.nodes, box, "left", n_quad, order=p.complement_orders())
    surf_w = qmul(sq.weights, integral) if side == "left" else qmul(integral, sq.weights)
    vol_w = None
    if with_volume:
        state = slice_state(fn, p, y, vq.nodes, box, "a", n_quad, h_fd)
        op = combine_operator(state, p, psi, vq.nodes, y, side)
        if side == "left":
            vol_w = qmul(left_factor(p, psi, vq.nodes, y), op) * vq.dv
        else:
            vol_w = qmul(op, right_factor(p, psi, vq.nodes, y)) * vq.dv
    return KernelSums(
        side, lam, sq.nodes, lam.total(sq.nodes), surf_w, vq.nodes, lam.total(vq.nodes), vol_w, vq.cell, eps, psi
    )


def line_derivatives(P, p: FracParams, st: FracSetup, x, n_quad: int, h_fd: float) -> np.ndarray:
    """``sum_i D_i[P](x)``: fractional derivative of order ``1 - alpha_i`` along the ``x_i`` line."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for i in range(3):
        rho = p.slice_proportion(i)
        if rho == 0.0:
            total = total + P(x[None])[0]
            continue
        lo, hi = _line_interval(st.box, i, x)

        def along(t, i=i):
            t = np.asarray(t, dtype=float)
            pts = np.broadcast_to(x, t.shape + (3,)).copy()
            pts[..., i] = t
            return P(pts)

        total = total + frac1d.prop_frac_derivative(
            along, p.complement_orders()[i], rho, p.slice_weight(st.y, i), lo, hi, x[i], "left", n_quad, h_fd
        )
    return np.asarray(total)


def frac_borel_pompeiu(
    f,
    g,
    pf: FracParams,
    pg: FracParams,
    x,
    y,
    box: Box,
    n_vol: int,
    m_surf: int,
    n_quad: int = 64,
    h_fd: float | None = None,
    psi: StructuralSet = STANDARD,
    eps: float | None = None,
    with_volume: bool = True,
) -> IdentityReport:
    """Left side assembled as fractional line derivatives of the weighted Cauchy sums.

    The right side is ``sum_i (f + g)(slice_i) + R(f) + R(g)`` for interior
    ``x`` and 0 for exterior ``x``. Points within two cell widths of the
    boundary are rejected.
    """
    x = np.asarray(x, dtype=float)
    st = FracSetup.build(pf, pg, y, box, psi)
    sq = SurfaceQuadrature.build(box, m_surf, psi)
    vq = VolumeQuadrature.build(box, n_vol)
    dist = box.distance_to_boundary(x)
    if abs(dist) < 2.0 * vq.h:
        raise DomainError(f"point {x.tolist()} is within two cell widths of the boundary")
    inside = dist > 0
    eps = 2.0 * vq.h if eps is None else float(eps)
    h_fd = 0.25 * vq.h if h_fd is None else float(h_fd)

    pf_sum = _kernel_sums(f, pf, st, "left", sq, vq, n_quad, min(h_fd, 0.25 * vq.h), eps, with_volume)
    pg_sum = _kernel_sums(g, pg, st, "right", sq, vq, n_quad, min(h_fd, 0.25 * vq.h), eps, with_volume)
    lhs = line_derivatives(pf_sum, pf, st, x, n_quad, h_fd) + line_derivatives(pg_sum, pg, st, x, n_quad, h_fd)

    if inside:
        rhs = reproduction_value(f, g, pf, pg, x, st, n_quad, h_fd)
        scale = float(qnorm(rhs)) or 1.0
    else:
        rhs = np.zeros(4)
        scale = float(np.max(qnorm(pf_sum.surf_w) + qnorm(pg_sum.surf_w)) / np.max(sq.areas))
    name = "frac-bp" if with_volume else "frac-bp-boundary"
    return IdentityReport(name, lhs, rhs, Resolution(n_vol, m_surf, n_quad, h_fd), scale=scale, extra={"inside": inside})


def reproduction_value(f, g, pf, pg, x, st: FracSetup, n_quad, h_fd) -> np.ndarray:
    """``sum_i (f + g)(y with coordinate i replaced by x_i) + R(f) + R(g)``."""
    slices = np.broadcast_to(np.array(st.y), (3, 3)).copy()
    for i in range(3):
        slices[i, i] = x[i]
    base = np.sum(np.asarray(f(slices)) + np.asarray(g(slices)), axis=0)
    return base + remainder_R(f, pf, x, st.y, st.box, n_quad, h_fd) + remainder_R(g, pg, x, st.y, st.box, n_quad, h_fd)


# --- Cauchy corollary ----------------------------------------------------------


def certification_points(box: Box, count: int = 3) -> np.ndarray:
    """Interior tensor sample ``count^3`` points away from the faces."""
    axes = [box.a[k] + (np.arange(count) + 1.0) * (box.b[k] - box.a[k]) / (count + 1) for k in range(3)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)


def certify_member(fn, p: FracParams, psi, y, box, side, n_quad, h_fd, points=None):
    """Return ``(residual, tau)``; membership is certified when ``residual <= tau``.

    ``tau`` is ten times the change of the operator between the given
    resolution and one refined by a factor 2 in both ``n_quad`` and ``h_fd``.
    """
    from .psi_ops import frac_prop_psi_cr

    pts = certification_points(box) if points is None else np.asarray(points, dtype=float)
    coarse = frac_prop_psi_cr(fn, p, psi, y, pts, box, side, "a", n_quad, h_fd)
    fine = frac_prop_psi_cr(fn, p, psi, y, pts, box, side, "a", 2 * n_quad, 0.5 * h_fd)
    return float(np.max(qnorm(coarse))), 10.0 * float(np.max(qnorm(coarse - fine)))


def cauchy_corollary_check(
    f,
    g,
    pf: FracParams,
    pg: FracParams,
    x,
    y,
    box: Box,
    n_vol: int,
    m_surf: int,
    n_quad: int = 64,
    h_fd: float | None = None,
    psi: StructuralSet = STANDARD,
) -> IdentityReport:
    """Certify ``f`` (left class) and ``g`` (right class), then check the boundary-only formulas.

    The report compares the boundary-only Borel-Pompeiu value with the
    reproduction value; ``extra["stokes_boundary"]`` holds the norm of the
    weighted Stokes boundary integral, which vanishes for members.

    Raises
    ------
    PreconditionError
        If either function fails certification.
    """
    vq_h = float(np.max(box.widths)) / n_vol
    h_fd = 0.25 * vq_h if h_fd is None else float(h_fd)
    res_f, tau_f = certify_member(f, pf, psi, y, box, "left", n_quad, h_fd)
    res_g, tau_g = certify_member(g, pg, psi, y, box, "right", n_quad, h_fd)
    if res_f > tau_f:
        raise PreconditionError(f"f is not certified in the left class: residual {res_f:.3e} > tau {tau_f:.3e}")
    if res_g > tau_g:
        raise PreconditionError(f"g is not certified in the right class: residual {res_g:.3e} > tau {tau_g:.3e}")
    stokes = frac_stokes_residual(f, g, pf, pg, y, box, n_vol, m_surf, psi, n_quad, h_fd)
    bp = frac_borel_pompeiu(f, g, pf, pg, x, y, box, n_vol, m_surf, n_quad, h_fd, psi, with_volume=False)
    extra = dict(bp.extra, stokes_boundary=float(qnorm(stokes.lhs)), residual_f=res_f, tau_f=tau_f, residual_g=res_g, tau_g=tau_g)
    return IdentityReport("cauchy-corollary", bp.lhs, bp.rhs, bp.resolution, scale=bp.scale, extra=extra)
