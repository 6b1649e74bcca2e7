"""psi-Cauchy-Riemann operators and their fractional proportional versions.

Grid operators (``psi_dbar``, ``laplacian``) act on :class:`GridField`
samples. The fractional operators act on callables and are evaluated
point-wise: for a base point ``y`` the three-dimensional integral

    I(x, y) = sum_i I_i[f restricted to axis i through y](x_i)

is a sum of one-dimensional integrals ("slice integrals") that each depend on a
single coordinate of ``x``. Partial derivatives in ``x`` therefore only touch
one slice, and slice values are computed once per distinct coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import frac1d
from .errors import DomainError
from .grid import Box, GridField, SlicePoint, axis_slice, partial_fd, second_partial_fd
from .quat import STANDARD, StructuralSet, qconj, qinv, qmul, qnorm

# --- classical operators on grids ---------------------------------------------


def psi_dbar(g: GridField, psi: StructuralSet = STANDARD, side: str = "left", scheme: str = "order2") -> GridField:
    """``sum_k psi_k d_k g`` (left) or ``sum_k (d_k g) psi_k`` (right) by finite differences."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    m = psi.matrix
    out = np.zeros_like(g.values)
    for k in range(3):
        dk = partial_fd(g, k, scheme).values
        out = out + (qmul(m[k], dk) if side == "left" else qmul(dk, m[k]))
    return g.with_values(out)


def laplacian(g: GridField) -> GridField:
    """Sum of second differences along the three axes."""
    out = second_partial_fd(g, 0).values
    for k in (1, 2):
        out = out + second_partial_fd(g, k).values
    return g.with_values(out)


def laplacian_compositions(g: GridField, psi: StructuralSet = STANDARD) -> dict[str, GridField]:
    """The four first-order factorizations of the Laplacian, by nested differences.

    Keys name the operator applied last, e.g. ``"psi∘conj"`` is the left
    operator of ``psi`` applied to the left operator of the conjugate set.
    """
    cpsi = psi.conj()
    return {
        "psi∘conj": psi_dbar(psi_dbar(g, cpsi, "left"), psi, "left"),
        "conj∘psi": psi_dbar(psi_dbar(g, psi, "left"), cpsi, "left"),
        "psi∘conj_r": psi_dbar(psi_dbar(g, cpsi, "right"), psi, "right"),
        "conj∘psi_r": psi_dbar(psi_dbar(g, psi, "right"), cpsi, "right"),
    }


# --- weights and parameters ----------------------------------------------------


@dataclass(frozen=True)
class Weight3:
    """Real weight function of three variables with its gradient.

    ``phi`` maps ``(..., 3) -> (...)`` and ``grad`` maps ``(..., 3) -> (..., 3)``.
    """

    phi: Callable
    grad: Callable
    name: str = field(default="custom", compare=False)

    @classmethod
    def linear(cls, coeffs=(1.0, 1.0, 1.0), offset=0.0) -> Weight3:
        c = np.asarray(coeffs, dtype=float)

        def phi(x):
            return np.asarray(x, dtype=float) @ c + offset

        def grad(x):
            return np.broadcast_to(c, np.shape(x)).copy()

        return cls(phi, grad, "linear")

    @classmethod
    def quadratic(cls, linear=(1.0, 1.0, 1.0), square=(0.1, 0.0, 0.0)) -> Weight3:
        c = np.asarray(linear, dtype=float)
        q = np.asarray(square, dtype=float)

        def phi(x):
            x = np.asarray(x, dtype=float)
            return x @ c + (x * x) @ q

        def grad(x):
            return c + 2.0 * np.asarray(x, dtype=float) * q

        return cls(phi, grad, "quadratic")

    @classmethod
    def exp_shift(cls, scale=(1.0, 1.0, 1.0), shift=(0.0, 0.0, 0.0)) -> Weight3:
        """``phi(x) = sum_k scale_k exp(x_k - shift_k)``."""
        c = np.asarray(scale, dtype=float)
        d = np.asarray(shift, dtype=float)

        def phi(x):
            return np.exp(np.asarray(x, dtype=float) - d) @ c

        def grad(x):
            return c * np.exp(np.asarray(x, dtype=float) - d)

        return cls(phi, grad, "exp-shift")

    def on_slice(self, y, axis: int) -> frac1d.Weight:
        """``t -> phi(y with coordinate axis replaced by t)`` as a 1-D weight."""
        y = np.asarray(y, dtype=float)

        def embed(t):
            t = np.asarray(t, dtype=float)
            pts = np.broadcast_to(y, t.shape + (3,)).copy()
            pts[..., axis] = t
            return pts

        return frac1d.Weight(lambda t: self.phi(embed(t)), lambda t: self.grad(embed(t))[..., axis])

    def slice_derivative_sum(self, x, y) -> np.ndarray:
        """``D phi(x, y) = sum_i d_i phi(y with coordinate i replaced by x_i)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = 0.0
        for i in range(3):
            pts = np.broadcast_to(y, x.shape).copy()
            pts[..., i] = x[..., i]
            total = total + self.grad(pts)[..., i]
        return np.asarray(total)


@dataclass(frozen=True)
class FracParams:
    """Orders, proportion components and weight of the fractional operators.

    ``sigma`` holds the real components of the proportion in the structural
    set in use, so the quaternion is ``sum_k sigma[k] psi_k``. A component equal
    to 0 makes its slice operator the identity (the limit of vanishing
    proportion) and a component equal to 1 is the plain fractional case.

    ``riemann_liouville`` selects the specialization in which every slice uses
    proportion 1 with the weight restricted to a unit-slope coordinate, and the
    operator reduces to the psi-Cauchy-Riemann operator of the slice integral.
    """

    alpha: tuple
    sigma: tuple[float, float, float]
    weight: Weight3 = field(default_factory=Weight3.linear)
    riemann_liouville: bool = False

    def __post_init__(self):
        alpha = tuple(self.alpha) if np.ndim(self.alpha) else (self.alpha,) * 3
        if len(alpha) != 3:
            raise ValueError("alpha needs three components")
        alpha = tuple(frac1d.normalize_order(a, allow_zero=False) for a in alpha)
        sigma = tuple(float(s) for s in self.sigma)
        if len(sigma) != 3:
            raise ValueError("sigma needs three components")
        for k, s in enumerate(sigma):
            if not 0.0 <= s <= 1.0:
                raise DomainError(f"proportion component sigma_{k}={s} outside [0, 1]")
        if np.linalg.norm(sigma) < 1e-10:
            raise DomainError("proportion quaternion is not invertible")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def rl(cls, alpha) -> FracParams:
        """Riemann-Liouville specialization: unit proportions, coordinate-sum weight."""
        return cls(alpha, (1.0, 1.0, 1.0), Weight3.linear(), riemann_liouville=True)

    def complement_orders(self) -> tuple:
        return tuple(_demote(1.0 - a) for a in self.alpha)

    def sigma_quaternion(self, psi: StructuralSet) -> np.ndarray:
        return psi.embed(np.array(self.sigma))

    def slice_weight(self, y, axis: int) -> frac1d.Weight:
        if self.riemann_liouville:
            return frac1d.Weight.identity()
        return self.weight.on_slice(y, axis)

    def slice_proportion(self, axis: int) -> float:
        return 1.0 if self.riemann_liouville else self.sigma[axis]

    def dphi(self, x, y) -> np.ndarray:
        """``D phi(x, y)``; validated positive."""
        d = self.weight.slice_derivative_sum(x, y)
        if np.any(~(d > 0)):
            raise DomainError("D phi(x, y) must be positive")
        return d


def _demote(z):
    z = complex(z)
    return z.real if z.imag == 0.0 else z


# --- slice integrals -----------------------------------------------------------


def _check_end(end: str) -> str:
    if end not in ("a", "b"):
        raise ValueError(f"end must be 'a' or 'b', got {end!r}")
    return end


def slice_integral(f, p: FracParams, y, box: Box, axis: int, t, order=None, end="a", n_quad=256, h_fd=None):
    """One slice integral ``I_i[f along axis i through y](t)`` and optionally its derivative.

    Parameters
    ----------
    order : complex, optional
        Order of the integral; defaults to ``1 - alpha[axis]``.
    h_fd : float, optional
        When given, also return the finite-difference derivative in ``t``;
        the stencil must fit inside ``[a_i, b_i]``.

    Returns
    -------
    value, derivative
        Arrays shaped ``t.shape + (4,)``; ``derivative`` is None without ``h_fd``.
    """
    end = _check_end(end)
    order = p.complement_orders()[axis] if order is None else _demote(order)
    t = np.asarray(t, dtype=float)
    lo, hi = box.a[axis], box.b[axis]
    uniq, inverse = np.unique(t, return_inverse=True)
    inverse = inverse.reshape(t.shape)
    g = axis_slice(f, SlicePoint(tuple(y), axis))
    rho = p.slice_proportion(axis)
    w = p.slice_weight(y, axis)
    side = "left" if end == "a" else "right"

    def u(s):
        if rho == 0.0:
            return np.asarray(g(s))
        return frac1d.prop_frac_integral(g, order, rho, w, lo, hi, s, side, n_quad)

    if h_fd is None:
        if np.any(uniq < lo) or np.any(uniq > hi):
            raise DomainError(f"slice coordinate outside [{lo}, {hi}] on axis {axis}")
        return u(uniq)[inverse], None
    if np.any(uniq - h_fd < lo) or np.any(uniq + h_fd > hi):
        raise DomainError(f"finite-difference stencil leaves [{lo}, {hi}] on axis {axis}")
    val, der = frac1d._value_and_derivative(u, uniq, h_fd, lo, hi)
    return val[inverse], der[inverse]


def frac_prop_integral_3d(f, p: FracParams, y, x, box: Box, side="left", n_quad=256, order=None):
    """Sum over the three axes of the slice integrals of order ``alpha`` (or ``order``).

    ``side`` selects integrals from the lower corner (``"left"``) or to the
    upper corner (``"right"``). ``x`` may be an array of points ``(..., 3)``.
    """
    x = np.asarray(x, dtype=float)
    end = {"left": "a", "right": "b"}[side]
    total = 0.0
    for i in range(3):
        o = p.alpha[i] if order is None else order[i]
        v, _ = slice_integral(f, p, y, box, i, x[..., i], order=o, end=end, n_quad=n_quad)
        total = total + v
    return np.asarray(total)


@dataclass
class SliceState:
    """Value of the complement-order integral and its psi-derivatives at points ``x``."""

    integral: np.ndarray
    partials: np.ndarray  # (..., 3, 4): d_k I(x, y)


def slice_state(f, p: FracParams, y, x, box: Box, end="a", n_quad=256, h_fd=1e-3) -> SliceState:
    x = np.asarray(x, dtype=float)
    vals, ders = [], []
    for i in range(3):
        v, d = slice_integral(f, p, y, box, i, x[..., i], end=end, n_quad=n_quad, h_fd=h_fd)
        vals.append(v)
        ders.append(d)
    return SliceState(sum(vals), np.stack(ders, axis=-2))


def combine_operator(state: SliceState, p: FracParams, psi: StructuralSet, x, y, side="left") -> np.ndarray:
    """Assemble the fractional operator from the integral and its partials."""
    m = psi.matrix
    if side == "left":
        dbar = sum(qmul(m[k], state.partials[..., k, :]) for k in range(3))
    elif side == "right":
        dbar = sum(qmul(state.partials[..., k, :], m[k]) for k in range(3))
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if p.riemann_liouville:
        return dbar
    sigma = p.sigma_quaternion(psi)
    one_minus = np.array([1.0, 0.0, 0.0, 0.0]) - sigma
    d = p.dphi(x, y)[..., None]
    if side == "left":
        return qmul(one_minus, state.integral) + qmul(sigma, dbar / d)
    return qmul(state.integral, one_minus) + qmul(dbar / d, sigma)


def frac_prop_psi_cr(f, p: FracParams, psi: StructuralSet, y, x, box: Box, side="left", end="a", n_quad=256, h_fd=1e-3):
    """Fractional proportional psi-Cauchy-Riemann operator at ``x`` (array of points allowed).

    ``side`` is the multiplication side (left or right operator) and ``end``
    the corner the slice integrals start from (``"a"``) or run to (``"b"``).
    """
    _check_end(end)
    state = slice_state(f, p, y, x, box, end, n_quad, h_fd)
    return combine_operator(state, p, psi, x, y, side)


def hyperholomorphy_residual(f, p: FracParams, psi: StructuralSet, y, xs, box: Box, side="left", n_quad=256, h_fd=1e-3) -> float:
    """Largest operator norm over the sample points ``xs``; small values certify membership."""
    vals = frac_prop_psi_cr(f, p, psi, y, xs, box, side, "a", n_quad, h_fd)
    return float(np.max(qnorm(vals)))


def conjugation_identity_residual(f, p: FracParams, psi: StructuralSet, y, x, box: Box, n_quad=256, h_fd=1e-3) -> float:
    """Distance between the conjugated left operator on ``f`` and the right operator on ``conj(f)``.

    The right operator uses the conjugate structural set, under which the
    stored proportion components describe the conjugate proportion.
    """
    lhs = qconj(frac_prop_psi_cr(f, p, psi, y, x, box, "left", "a", n_quad, h_fd))

    def fbar(pts):
        return qconj(f(pts))

    rhs = frac_prop_psi_cr(fbar, p, psi.conj(), y, x, box, "right", "a", n_quad, h_fd)
    return float(np.max(qnorm(lhs - rhs)))


def perturbed_operator_residual(f, p: FracParams, psi: StructuralSet, y, x, box: Box, n_quad=256, h_fd=1e-3) -> float:
    """``|psi_dbar I + D phi sigma^{-1} (1 - sigma) I|``: vanishes exactly for members of the left class."""
    state = slice_state(f, p, y, x, box, "a", n_quad, h_fd)
    m = psi.matrix
    dbar = sum(qmul(m[k], state.partials[..., k, :]) for k in range(3))
    sigma = p.sigma_quaternion(psi)
    h = qmul(qinv(sigma), np.array([1.0, 0.0, 0.0, 0.0]) - sigma)
    d = p.dphi(x, y)[..., None]
    return float(np.max(qnorm(dbar + d * qmul(h, state.integral))))


def laplacian_composition_residual(f, alpha, psi: StructuralSet, y, x, box: Box, n_quad=256, h=1e-2) -> float:
    """Compare the conjugate operator applied to the fractional operator with the Laplacian of the integral.

    Both sides use Riemann-Liouville parameters. The left side differentiates
    the fractional operator by central differences of step ``h`` (the operator
    itself uses the same step), the right side takes second differences of the
    complement-order integral.
    """
    p = FracParams.rl(alpha)
    x = np.asarray(x, dtype=float)
    cm = psi.conj().matrix
    eye = np.eye(3)

    def op(pts):
        return frac_prop_psi_cr(f, p, psi, y, pts, box, "left", "a", n_quad, h)

    def integral(pts):
        return frac_prop_integral_3d(f, p, y, pts, box, "left", n_quad, order=p.complement_orders())

    lhs = 0.0
    rhs = -6.0 * integral(x) / h**2
    for j in range(3):
        up, dn = op(x + h * eye[j]), op(x - h * eye[j])
        lhs = lhs + qmul(cm[j], (up - dn) / (2.0 * h))
        rhs = rhs + (integral(x + h * eye[j]) + integral(x - h * eye[j])) / h**2
    return float(np.max(qnorm(lhs - rhs)))
