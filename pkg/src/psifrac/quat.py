"""Quaternion arithmetic, the subspace A = span{e0, e1, e2} and structural sets.

Two layers live here. The array functions (``qmul``, ``qconj``, ...) work on
numpy arrays whose last axis holds the four coefficients ``(w, x, y, z)`` of
``w e0 + x e1 + y e2 + z e3``; they broadcast and accept complex coefficients,
which is what the fractional operators produce for complex orders. The
:class:`Quaternion` dataclass is the scalar, immutable front end built on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import DomainError, StructuralSetError

#: Tolerance for algebraic identities on unit-scale inputs.
ALGEBRA_TOL = 1e-12

_CONJ_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


# --- array layer -------------------------------------------------------------


def qmul(p, q):
    """Hamilton product of quaternion arrays ``p`` and ``q`` (last axis = 4)."""
    p = np.asarray(p)
    q = np.asarray(q)
    a0, a1, a2, a3 = np.moveaxis(p, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(q):
    """Quaternionic conjugation; complex coefficients are left untouched."""
    return np.asarray(q) * _CONJ_SIGNS


def qnorm(q):
    """Euclidean norm over the four coefficients (moduli for complex ones)."""
    q = np.asarray(q)
    return np.sqrt(np.sum(np.abs(q) ** 2, axis=-1))


def qinv(q):
    q = np.asarray(q)
    n2 = np.sum(q * q, axis=-1)
    if np.any(np.abs(n2) == 0):
        raise DomainError("cannot invert the zero quaternion")
    return qconj(q) / n2[..., None]


def qpairing(u, v):
    """``conj(u) v + conj(v) u``, i.e. twice the scalar product, as a quaternion."""
    return qmul(qconj(u), v) + qmul(qconj(v), u)


def qexp(q):
    """Exponential of a real quaternion array."""
    q = np.asarray(q, dtype=float)
    w = q[..., 0]
    vec = q[..., 1:]
    theta = np.linalg.norm(vec, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(theta > 0, np.sin(theta) / np.where(theta > 0, theta, 1.0), 1.0)
    out = np.empty_like(q)
    out[..., 0] = np.cos(theta)
    out[..., 1:] = vec * sinc[..., None]
    return out * np.exp(w)[..., None]


def as_qarray(value):
    """Coerce a :class:`Quaternion` or array-like into a coefficient array."""
    if isinstance(value, Quaternion):
        return value.array
    return np.asarray(value)


# --- scalar layer ------------------------------------------------------------


@dataclass(frozen=True)
class Quaternion:
    """Immutable quaternion ``w e0 + x e1 + y e2 + z e3`` with float coefficients."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("w", "x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_array(cls, arr) -> Quaternion:
        arr = np.asarray(arr)
        if arr.shape != (4,):
            raise ValueError(f"expected 4 coefficients, got shape {arr.shape}")
        if np.iscomplexobj(arr):
            if np.any(arr.imag != 0):
                raise ValueError("Quaternion coefficients must be real")
            arr = arr.real
        return cls(*arr.tolist())

    @property
    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def scalar(self) -> float:
        return self.w

    def in_A(self) -> bool:
        return self.z == 0.0

    def conj(self) -> Quaternion:
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def inv(self) -> Quaternion:
        n2 = self.w**2 + self.x**2 + self.y**2 + self.z**2
        if n2 == 0.0:
            raise DomainError("cannot invert the zero quaternion")
        c = self.conj()
        return Quaternion(c.w / n2, c.x / n2, c.y / n2, c.z / n2)

    def isclose(self, other, tol=ALGEBRA_TOL) -> bool:
        return bool(qnorm(self.array - as_qarray(other)) <= tol)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w + other, self.x, self.y, self.z)
        if isinstance(other, Quaternion):
            return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        if isinstance(other, (int, float, Quaternion)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        if isinstance(other, Quaternion):
            return Quaternion.from_array(qmul(self.array, other.array))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w / other, self.x / other, self.y / other, self.z / other)
        return NotImplemented

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


class AValue(Quaternion):
    """A quaternion in A = span{e0, e1, e2}; the e3 coefficient is exactly zero.

    A is not closed under multiplication, so products of AValues come back as
    plain :class:`Quaternion` instances.
    """

    def __post_init__(self):
        super().__post_init__()
        if self.z != 0.0:
            raise ValueError(f"AValue requires a zero e3 coefficient, got {self.z!r}")

    @classmethod
    def from_quaternion(cls, q: Quaternion) -> AValue:
        return cls(q.w, q.x, q.y, q.z)

    def __repr__(self):
        return f"AValue({self.w!r}, {self.x!r}, {self.y!r})"


E0 = AValue(1.0, 0.0, 0.0)
E1 = AValue(0.0, 1.0, 0.0)
E2 = AValue(0.0, 0.0, 1.0)
E3 = Quaternion(0.0, 0.0, 0.0, 1.0)


def quat_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    return p * q


def quat_conj(q: Quaternion) -> Quaternion:
    return q.conj()


def quat_norm(q: Quaternion) -> float:
    return q.norm()


def quat_inv(q: Quaternion) -> Quaternion:
    return q.inv()


def scalar_product(u: Quaternion, v: Quaternion) -> Quaternion:
    """Pairing ``conj(u) v + conj(v) u``: real-valued, symmetric, and ``2 delta`` on a structural set."""
    return Quaternion.from_array(qpairing(u.array, v.array))


# --- structural sets ---------------------------------------------------------


@dataclass(frozen=True)
class StructuralSet:
    """Ordered orthonormal triple ``(psi0, psi1, psi2)`` spanning A.

    Orthonormality is ``conj(psi_k) psi_s + conj(psi_s) psi_k == 2 delta_ks e0``.
    Build instances through :func:`make_structural_set`, which validates.
    """

    psi0: AValue
    psi1: AValue
    psi2: AValue

    @property
    def elements(self) -> tuple[AValue, AValue, AValue]:
        return (self.psi0, self.psi1, self.psi2)

    @property
    def matrix(self) -> np.ndarray:
        """Coefficient rows, shape (3, 4)."""
        return np.stack([p.array for p in self.elements])

    def embed(self, coords) -> np.ndarray:
        """Map coordinate arrays ``(..., 3)`` to A-valued arrays ``(..., 4)``."""
        return np.asarray(coords) @ self.matrix

    def coords(self, values) -> np.ndarray:
        """Inverse of :meth:`embed` for A-valued arrays: ``<q, psi_k>`` per k."""
        values = np.asarray(values)
        return values @ self.matrix.T

    def conj(self) -> StructuralSet:
        return StructuralSet(*(AValue.from_quaternion(p.conj()) for p in self.elements))


def orthonormality_defect(p0, p1, p2) -> tuple[float, tuple[int, int], np.ndarray]:
    """Largest deviation of the pairing table from ``2 delta``, with its pair."""
    elems = [as_qarray(p) for p in (p0, p1, p2)]
    worst = (0.0, (0, 0), np.zeros(4))
    for k, s in combinations_with_replacement(range(3), 2):
        value = qpairing(elems[k], elems[s])
        target = np.array([2.0 if k == s else 0.0, 0.0, 0.0, 0.0])
        dev = float(qnorm(value - target))
        if dev > worst[0]:
            worst = (dev, (k, s), value)
    return worst


def make_structural_set(p0, p1, p2, tol=ALGEBRA_TOL) -> StructuralSet:
    elems = []
    for i, p in enumerate((p0, p1, p2)):
        q = p if isinstance(p, Quaternion) else Quaternion.from_array(np.asarray(p, dtype=float))
        if not q.in_A():
            raise StructuralSetError(f"psi{i} has a nonzero e3 coefficient", pair=(i, i))
        elems.append(AValue.from_quaternion(q))
    dev, pair, value = orthonormality_defect(*elems)
    if dev > tol:
        k, s = pair
        raise StructuralSetError(
            f"orthonormality fails for (psi{k}, psi{s}): pairing = {value.tolist()}",
            pair=pair,
            value=value,
        )
    return StructuralSet(*elems)


STANDARD = make_structural_set(E0, E1, E2)


def rotated_set(angle: float = math.pi / 4) -> StructuralSet:
    """Standard set with psi1, psi2 rotated by ``angle`` inside span{e1, e2}."""
    c, s = math.cos(angle), math.sin(angle)
    return make_structural_set(E0, AValue(0.0, c, s), AValue(0.0, -s, c))


def embed_point(x0: float, x1: float, x2: float, psi: StructuralSet) -> AValue:
    return AValue.from_quaternion(Quaternion.from_array(psi.embed([x0, x1, x2])))
