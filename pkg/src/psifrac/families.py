"""Closed-form test functions and weights selected by name.

Three-dimensional fields map points ``(..., 3)`` to A-valued coefficients
``(..., 4)``; one-dimensional functions map arrays to arrays of the same shape.
Randomized families draw their coefficients from ``numpy.random.default_rng(seed)``
so a seed fully determines the function.
"""

from __future__ import annotations

from itertools import combinations_with_replacement
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .frac1d import Weight
from .grid import Box
from .psi_ops import Weight3
from .quat import STANDARD, StructuralSet, qconj, qexp, qmul

FIELD_FAMILIES = ("zero", "const", "poly", "trig", "witness", "vanishing", "member-left", "member-right")
LINE_FAMILIES = ("sin", "poly", "exp", "const")
WEIGHT_FAMILIES = ("linear", "quadratic", "exp-shift")


def _zeros(x):
    return np.zeros(np.shape(x)[:-1] + (4,))


def constant_field(value) -> Callable:
    v = np.zeros(4)
    v[: len(value)] = value

    def f(x):
        return np.broadcast_to(v, np.shape(x)[:-1] + (4,)).copy()

    return f


def polynomial_field(degree: int = 3, seed: int = 0, scale: float = 1.0) -> Callable:
    """Random A-valued polynomial of total degree ``degree``."""
    rng = np.random.default_rng(seed)
    monomials = [m for d in range(degree + 1) for m in combinations_with_replacement(range(3), d)]
    coeffs = scale * rng.normal(size=(len(monomials), 3))

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (4,))
        for mono, c in zip(monomials, coeffs):
            term = np.ones(x.shape[:-1])
            for axis in mono:
                term = term * x[..., axis]
            out[..., :3] += term[..., None] * c
        return out

    return f


def trig_field(seed: int = 0, frequency: float = 1.0) -> Callable:
    """``f_k(x) = sin(w_k . x + p_k)`` per A-component with random ``w_k``, ``p_k``."""
    rng = np.random.default_rng(seed)
    w = frequency * rng.normal(size=(3, 3))
    ph = rng.uniform(0.0, 2.0 * np.pi, size=3)

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (4,))
        out[..., :3] = np.sin(x @ w.T + ph)
        return out

    return f


def witness_field(psi: StructuralSet = STANDARD) -> Callable:
    """``x0 conj(psi0) - x1 conj(psi1)``: annihilated by the left psi operator.

    For the standard set this is ``x0 e0 + x1 e1``.
    """
    c0 = qconj(psi.psi0.array)
    c1 = -qconj(psi.psi1.array)

    def f(x):
        x = np.asarray(x, dtype=float)
        return x[..., 0, None] * c0 + x[..., 1, None] * c1

    return f


def vanishing_field(inner: Callable, box: Box) -> Callable:
    """``(x0 - a0)(x1 - a1)(x2 - a2) inner(x)``: zero on the three lower faces."""
    a = box.lower

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.prod(x - a, axis=-1)[..., None] * np.asarray(inner(x))

    return f


def member_field(side: str, s: float, dphi: float, y, psi: StructuralSet = STANDARD, v0=(1.0, 0.5, 0.0), k=(0.4, -0.4, 0.0)) -> Callable:
    """Exact member of the left or right class for orders 1 and proportion ``s e0``.

    With ``kappa = (1 - s) dphi / s`` the axis profiles are

        f_i(t) = k_i / kappa + exp(-kappa (t - y_i) conj(psi_i)) (v0 - k_i / kappa)

    (the exponential on the right of the bracket for the right class), and
    ``f(x) = v0 + sum_i (f_i(x_i) - v0)``. The coefficients ``k_i`` sum to zero.
    Keeping ``v0`` and ``k_i`` in span{psi0, psi1} with ``k_2 = kappa v0`` keeps
    values in A. The constants are combined with the structural set, i.e. ``v0``
    holds components along ``psi_k``.
    """
    if not 0.0 < s < 1.0:
        raise DomainError(f"member construction needs 0 < s < 1, got {s}")
    kappa = (1.0 - s) * dphi / s
    y = np.asarray(y, dtype=float)
    v = psi.embed(np.asarray(v0, dtype=float))
    kv = psi.embed(np.array([k[0], k[1], 0.0]))
    # k_2 = kappa v0 makes the third profile constant; the first two balance the sum
    ks = [kv - 0.5 * kappa * v, -kv - 0.5 * kappa * v, kappa * v]
    conj_psi = [qconj(p.array) for p in psi.elements]

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.broadcast_to(v, x.shape[:-1] + (4,)).copy()
        for i in range(3):
            e = qexp(-kappa * (x[..., i] - y[i])[..., None] * conj_psi[i])
            rest = v - ks[i] / kappa
            prof = ks[i] / kappa + (qmul(e, rest) if side == "left" else qmul(rest, e))
            out = out + prof - v
        return out

    return f


def make_field(family: str, coeffs: Sequence[float] = (), seed: int = 0, box: Box | None = None, psi: StructuralSet = STANDARD, **context) -> Callable:
    """Build a named three-dimensional test field.

    ``coeffs`` meaning per family: const takes A-components; poly takes
    ``[degree]``; trig takes ``[frequency]``; vanishing takes ``[degree]`` of
    a random polynomial factor; member families take ``[s, dphi]`` and need a
    ``y`` keyword.
    """
    coeffs = list(coeffs)
    if family == "zero":
        return _zeros
    if family == "const":
        return constant_field(coeffs or [1.0])
    if family == "poly":
        return polynomial_field(int(coeffs[0]) if coeffs else 3, seed)
    if family == "trig":
        return trig_field(seed, coeffs[0] if coeffs else 1.0)
    if family == "witness":
        return witness_field(psi)
    if family == "vanishing":
        if box is None:
            raise ValueError("vanishing family needs a box")
        return vanishing_field(polynomial_field(int(coeffs[0]) if coeffs else 1, seed), box)
    if family in ("member-left", "member-right"):
        if len(coeffs) < 2:
            raise ValueError("member families need coefficients [s, dphi]")
        return member_field(family.split("-")[1], coeffs[0], coeffs[1], context["y"], psi)
    raise ValueError(f"unknown field family {family!r}; valid: {', '.join(FIELD_FAMILIES)}")


def make_line_function(family: str, coeffs: Sequence[float] = ()) -> Callable:
    """Named one-dimensional test function."""
    coeffs = [float(c) for c in coeffs]
    if family == "sin":
        w = coeffs[0] if coeffs else 1.0
        return lambda t: np.sin(w * np.asarray(t, dtype=float))
    if family == "poly":
        p = np.polynomial.Polynomial(coeffs or [0.0, 1.0])
        return lambda t: p(np.asarray(t, dtype=float))
    if family == "exp":
        w = coeffs[0] if coeffs else 1.0
        return lambda t: np.exp(w * np.asarray(t, dtype=float))
    if family == "const":
        c = coeffs[0] if coeffs else 1.0
        return lambda t: np.full(np.shape(t), c)
    raise ValueError(f"unknown line family {family!r}; valid: {', '.join(LINE_FAMILIES)}")


def make_weight3(family: str, coeffs: Sequence[float] = ()) -> Weight3:
    """``linear``: [c0 c1 c2]; ``quadratic``: [c0 c1 c2 q0 q1 q2]; ``exp-shift``: [s0 s1 s2 d0 d1 d2]."""
    coeffs = [float(c) for c in coeffs]
    if family == "linear":
        return Weight3.linear(coeffs[:3] or (1.0, 1.0, 1.0))
    if family == "quadratic":
        c = coeffs + [1.0, 1.0, 1.0, 0.1, 0.0, 0.0][len(coeffs) :]
        return Weight3.quadratic(c[:3], c[3:6])
    if family == "exp-shift":
        c = coeffs + [1.0, 1.0, 1.0, 0.0, 0.0, 0.0][len(coeffs) :]
        return Weight3.exp_shift(c[:3], c[3:6])
    raise ValueError(f"unknown weight family {family!r}; valid: {', '.join(WEIGHT_FAMILIES)}")


def make_weight1(family: str, coeffs: Sequence[float] = ()) -> Weight:
    """``linear`` / ``quadratic``: polynomial coefficients; ``exp-shift``: ``[s, d]`` for ``s exp(t - d)``."""
    coeffs = [float(c) for c in coeffs]
    if family in ("linear", "quadratic"):
        return Weight.polynomial(coeffs or ([0.0, 1.0] if family == "linear" else [0.0, 1.0, 0.1]))
    if family == "exp-shift":
        s, d = (coeffs + [1.0, 0.0][len(coeffs) :])[:2]
        return Weight(lambda t: s * np.exp(np.asarray(t, dtype=float) - d), lambda t: s * np.exp(np.asarray(t, dtype=float) - d))
    raise ValueError(f"unknown weight family {family!r}; valid: {', '.join(WEIGHT_FAMILIES)}")
