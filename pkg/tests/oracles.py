"""Independent reference computations used to derive and check frozen test values.

Nothing here calls the package's assembled operators (``psi_ops``,
``classical``, ``fractional``); where a discretization must be shared, only
the one-dimensional primitives of ``psifrac.frac1d`` are reused.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from psifrac import frac1d

# --- quaternion algebra ---------------------------------------------------------

# table[i][j] = (sign, index) of e_i e_j
_TABLE = [
    [(1, 0), (1, 1), (1, 2), (1, 3)],
    [(1, 1), (-1, 0), (1, 3), (-1, 2)],
    [(1, 2), (-1, 3), (-1, 0), (1, 1)],
    [(1, 3), (1, 2), (-1, 1), (-1, 0)],
]


def table_product(p, q) -> np.ndarray:
    """Product by expanding all sixteen basis products from the multiplication table."""
    out = np.zeros(4, dtype=np.result_type(np.asarray(p), np.asarray(q), float))
    for i in range(4):
        for j in range(4):
            sign, k = _TABLE[i][j]
            out[k] += sign * p[i] * q[j]
    return out


def table_conj(q) -> np.ndarray:
    q = np.asarray(q)
    return np.concatenate([q[:1], -q[1:]])


def table_kernel(d) -> np.ndarray:
    """Cauchy kernel ``conj(d) / (4 pi |d|^3)`` for a single quaternion ``d``."""
    d = np.asarray(d, dtype=float)
    return table_conj(d) / (4.0 * math.pi * np.linalg.norm(d) ** 3)


# --- one-dimensional fractional calculus -----------------------------------------


def rl_integral_of_one(alpha: float, t: float, a: float = 0.0) -> float:
    """Riemann-Liouville integral of 1: ``(t - a)^alpha / Gamma(alpha + 1)``."""
    return (t - a) ** alpha / math.gamma(alpha + 1.0)


def rl_derivative_of_one(alpha: float, t: float, a: float = 0.0) -> float:
    """Riemann-Liouville derivative of 1: ``(t - a)^(-alpha) / Gamma(1 - alpha)``."""
    return (t - a) ** (-alpha) / math.gamma(1.0 - alpha)


def adaptive_prop_integral(f, alpha: float, rho: float, phi, a: float, t: float) -> float:
    """Left fractional proportional integral by adaptive quadrature (real ``alpha``).

    The kernel ``e^{c U} U^{alpha-1} phi'(tau)`` with ``U = phi(t) - phi(tau)`` is
    split as ``(t - tau)^{alpha-1}`` times a smooth factor, which QUADPACK's
    algebraic weight handles exactly.
    """
    c = (rho - 1.0) / rho
    h = 1e-6

    def smooth(tau):
        u = phi(t) - phi(tau)
        dphi = (phi(tau + h) - phi(tau - h)) / (2.0 * h)
        ratio = u / (t - tau) if t != tau else dphi
        return math.exp(c * u) * ratio ** (alpha - 1.0) * dphi * f(tau)

    val, _ = integrate.quad(smooth, a, t, weight="alg", wvar=(0.0, alpha - 1.0), epsabs=1e-13, epsrel=1e-12, limit=200)
    return val / (rho**alpha * math.gamma(alpha))


# --- term-by-term fractional Borel-Pompeiu assembly --------------------------------


def _embed(coords):
    coords = np.asarray(coords, dtype=float)
    return np.concatenate([coords, np.zeros(coords.shape[:-1] + (1,))], axis=-1)


def _kernel_rows(d):
    # vectorized conj(d)/(4 pi |d|^3) for standard-set coordinates d (..., 3)
    r = np.linalg.norm(d, axis=-1)
    q = _embed(d)
    q[..., 1:] *= -1.0
    return q / (4.0 * math.pi * r[..., None] ** 3)


def _qmul(p, q):
    # row-wise Hamilton product written out component by component
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def _surface(a, b, m):
    nodes, normals, areas = [], [], []
    for k in range(3):
        i, j = [s for s in range(3) if s != k]
        ui = a[i] + (np.arange(m) + 0.5) * (b[i] - a[i]) / m
        uj = a[j] + (np.arange(m) + 0.5) * (b[j] - a[j]) / m
        for side, level in ((-1.0, a[k]), (1.0, b[k])):
            for p in ui:
                for q in uj:
                    pt = np.zeros(3)
                    pt[i], pt[j], pt[k] = p, q, level
                    nodes.append(pt)
                    nrm = np.zeros(3)
                    nrm[k] = side
                    normals.append(nrm)
                    areas.append((b[i] - a[i]) * (b[j] - a[j]) / m**2)
    return np.array(nodes), np.array(normals), np.array(areas)


def rl_slice_integral(f, alpha_c, y, a, b, axis, t, n_quad):
    """Riemann-Liouville integral of order ``alpha_c`` of the slice of ``f`` through ``y``."""

    def line(s):
        s = np.asarray(s, dtype=float)
        pts = np.broadcast_to(np.asarray(y, dtype=float), s.shape + (3,)).copy()
        pts[..., axis] = s
        return f(pts)

    return frac1d.prop_frac_integral(line, alpha_c, 1.0, frac1d.Weight.identity(), a[axis], b[axis], t, "left", n_quad)


def rl_frac_bp_oracle(f, alpha, x, y, a, b, n_vol, m_surf, n_quad, h_fd, eps):
    """Both sides of the Riemann-Liouville fractional Borel-Pompeiu formula for the left family with ``g = 0``.

    Standard structural set, interior ``x``. Every surface and volume node
    contributes its own line derivative of the kernel, and the contributions are
    summed afterwards. Returns ``(lhs, rhs)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    comp = [1.0 - al for al in alpha]
    psi = np.eye(4)[:3]

    def integral_sum(pts):
        return sum(rl_slice_integral(f, comp[i], y, a, b, i, pts[:, i], n_quad) for i in range(3))

    # surface weights: outward normal times psi, times area, times the integral sum
    s_nodes, s_normals, s_areas = _surface(a, b, m_surf)
    s_form = (s_normals @ psi) * s_areas[:, None]
    s_w = _qmul(s_form, integral_sum(s_nodes))

    # volume weights: psi-operator of the integral sum by central differences
    cell = (b - a) / n_vol
    axes = [a[k] + (np.arange(n_vol) + 0.5) * cell[k] for k in range(3)]
    v_nodes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    v_op = np.zeros((len(v_nodes), 4))
    for k in range(3):
        def along(s, k=k):
            return rl_slice_integral(f, comp[k], y, a, b, k, s, n_quad)

        dk = frac1d.fd_derivative(along, v_nodes[:, k], h_fd, a[k], b[k])
        v_op = v_op + _qmul(np.broadcast_to(psi[k], dk.shape), dk)
    v_w = v_op * float(np.prod(cell))

    lhs = np.zeros(4)
    for i in range(3):
        def surf_kernels(t, i=i):
            t = np.asarray(t, dtype=float)
            xp = np.broadcast_to(x, t.shape + (3,)).copy()
            xp[..., i] = t
            return _kernel_rows(s_nodes - xp[..., None, :])

        def vol_kernels(t, i=i):
            t = np.asarray(t, dtype=float)
            xp = np.broadcast_to(x, t.shape + (3,)).copy()
            xp[..., i] = t
            d = v_nodes - xp[..., None, :]
            gap = np.maximum(np.abs(d) - 0.5 * cell, 0.0)
            # cells within a relative 1e-9 of the radius count as touching it
            keep = np.linalg.norm(gap, axis=-1) > eps * (1.0 + 1e-9)
            safe = np.where(keep[..., None], d, 1.0)
            return _kernel_rows(safe) * keep[..., None]

        args = (comp[i], 1.0, frac1d.Weight.identity(), a[i], b[i], x[i], "left", n_quad, h_fd)
        ds = frac1d.prop_frac_derivative(surf_kernels, *args)
        dv = frac1d.prop_frac_derivative(vol_kernels, *args)
        lhs = lhs + np.sum(_qmul(ds, s_w), axis=0) - np.sum(_qmul(dv, v_w), axis=0)

    # right side: slices through y plus the remainder built from derivatives of 1
    slices = np.broadcast_to(np.asarray(y, dtype=float), (3, 3)).copy()
    for i in range(3):
        slices[i, i] = x[i]
    rhs = np.sum(f(slices), axis=0)
    one = lambda s: np.ones(np.shape(s))
    d_one = [
        frac1d.prop_frac_derivative(one, comp[j], 1.0, frac1d.Weight.identity(), a[j], b[j], x[j], "left", n_quad, h_fd)
        for j in range(3)
    ]
    for i in range(3):
        ii = rl_slice_integral(f, comp[i], y, a, b, i, np.array(x[i]), n_quad)
        rhs = rhs + ii * sum(float(d_one[j]) for j in range(3) if j != i)
    return lhs, rhs
