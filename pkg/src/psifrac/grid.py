"""Quaternion-valued fields sampled on uniform tensor grids over a box.

Three-dimensional callables follow one convention throughout the package: they
take an array of points shaped ``(..., 3)`` and return coefficients shaped
``(..., 4)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

#: Stencils for the fourth-order first derivative near a lower boundary, in units of 1/(12 h).
_FWD4 = (
    np.array([-25.0, 48.0, -36.0, 16.0, -3.0]),
    np.array([-3.0, -10.0, 18.0, -6.0, 1.0]),
)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``(a0, b0) x (a1, b1) x (a2, b2)``."""

    a: tuple[float, float, float]
    b: tuple[float, float, float]

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        if len(a) != 3 or len(b) != 3:
            raise ValueError("box corners need three coordinates")
        for k in range(3):
            if not a[k] < b[k]:
                raise DomainError(f"box needs a_k < b_k, axis {k} has [{a[k]}, {b[k]}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def unit(cls) -> Box:
        return cls((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.a)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.b)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, x, strict: bool = True) -> bool:
        x = np.asarray(x, dtype=float)
        if strict:
            return bool(np.all(x > self.lower) and np.all(x < self.upper))
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def distance_to_boundary(self, x) -> float:
        """Signed distance to the boundary: positive inside, negative outside."""
        x = np.asarray(x, dtype=float)
        if self.contains(x, strict=False):
            return float(np.min(np.minimum(x - self.lower, self.upper - x)))
        outside = np.maximum(np.maximum(self.lower - x, x - self.upper), 0.0)
        return -float(np.linalg.norm(outside))


def _counts(n) -> tuple[int, int, int]:
    if np.ndim(n) == 0:
        n = (int(n),) * 3
    n = tuple(int(v) for v in n)
    if len(n) != 3:
        raise ValueError("grid counts need three entries")
    return n


def grid_axes(box: Box, n) -> list[np.ndarray]:
    n = _counts(n)
    return [np.linspace(box.a[k], box.b[k], n[k] + 1) for k in range(3)]


def grid_points(box: Box, n) -> np.ndarray:
    """Node coordinates, shape ``(n0+1, n1+1, n2+1, 3)``."""
    return np.stack(np.meshgrid(*grid_axes(box, n), indexing="ij"), axis=-1)


@dataclass(frozen=True)
class GridField:
    """Quaternion coefficients at the nodes of a uniform grid over ``box``.

    ``values`` has shape ``(n0+1, n1+1, n2+1, 4)`` and is read-only.
    """

    box: Box
    n: tuple[int, int, int]
    values: np.ndarray
    source: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        n = _counts(self.n)
        values = np.array(self.values, dtype=float)
        expected = tuple(k + 1 for k in n) + (4,)
        if values.shape != expected:
            raise ValueError(f"values shape {values.shape} does not match grid {expected}")
        if not np.all(np.isfinite(values)):
            raise DomainError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> np.ndarray:
        return self.box.widths / np.array(self.n)

    @property
    def axes(self) -> list[np.ndarray]:
        return grid_axes(self.box, self.n)

    @property
    def points(self) -> np.ndarray:
        return grid_points(self.box, self.n)

    def with_values(self, values) -> GridField:
        return GridField(self.box, self.n, values)

    def __add__(self, other: GridField) -> GridField:
        return self.with_values(self.values + other.values)

    def __sub__(self, other: GridField) -> GridField:
        return self.with_values(self.values - other.values)

    def max_norm(self, interior: int = 0) -> float:
        """Largest node norm, optionally skipping ``interior`` layers at each face."""
        v = self.values
        if interior:
            v = v[interior:-interior, interior:-interior, interior:-interior]
        return float(np.max(np.linalg.norm(v, axis=-1)))


def sample_field(f: Callable, box: Box, n) -> GridField:
    """Sample ``f`` at every node of the uniform grid with ``n`` cells per axis."""
    n = _counts(n)
    if min(n) < 2:
        raise DomainError(f"need at least 2 cells per axis, got {n}")
    pts = grid_points(box, n)
    vals = np.asarray(f(pts), dtype=float)
    vals = np.broadcast_to(vals, pts.shape[:-1] + (4,))
    bad = ~np.all(np.isfinite(vals), axis=-1)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise DomainError(f"non-finite sample at node {idx}, point {pts[idx].tolist()}")
    return GridField(box, n, vals, source=f)


@dataclass(frozen=True)
class SlicePoint:
    """Base point ``y`` and the axis along which a slice varies."""

    y: tuple[float, float, float]
    axis: int

    def __post_init__(self):
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if self.axis not in (0, 1, 2):
            raise ValueError(f"axis must be 0, 1 or 2, got {self.axis}")

    def validate(self, box: Box) -> SlicePoint:
        if not box.contains(self.y, strict=True):
            raise DomainError(f"slice base point {self.y} is not interior to the box")
        return self


def axis_slice(f: Callable, p: SlicePoint) -> Callable:
    """One-variable restriction ``t -> f(y with coordinate p.axis replaced by t)``."""
    y = np.array(p.y)
    axis = p.axis

    def restricted(t):
        t = np.asarray(t, dtype=float)
        pts = np.broadcast_to(y, t.shape + (3,)).copy()
        pts[..., axis] = t
        return f(pts)

    return restricted


def partial_fd(g: GridField, k: int, scheme: str = "order2") -> GridField:
    """Finite-difference partial derivative along axis ``k``.

    ``order2`` uses central differences inside and second-order one-sided
    stencils on the faces; ``order4`` does the same at fourth order.
    """
    h = g.spacing[k]
    v = g.values
    if scheme == "order2":
        if g.n[k] < 2:
            raise DomainError("order2 differences need at least 2 cells")
        return g.with_values(np.gradient(v, h, axis=k, edge_order=2))
    if scheme != "order4":
        raise ValueError(f"unknown scheme {scheme!r}")
    if g.n[k] < 4:
        raise DomainError(f"order4 differences need at least 4 cells along axis {k}, got {g.n[k]}")
    v = np.moveaxis(v, k, 0)
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    for i, stencil in enumerate(_FWD4):
        out[i] = np.tensordot(stencil, v[:5], axes=(0, 0)) / (12.0 * h)
        out[-1 - i] = -np.tensordot(stencil, v[::-1][:5], axes=(0, 0)) / (12.0 * h)
    return g.with_values(np.moveaxis(out, 0, k))


def second_partial_fd(g: GridField, k: int) -> GridField:
    """Second derivative along ``k``: ``[1, -2, 1]`` inside, ``[2, -5, 4, -1]`` on faces."""
    if g.n[k] < 3:
        raise DomainError("second differences need at least 3 cells")
    h2 = g.spacing[k] ** 2
    v = np.moveaxis(g.values, k, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / h2
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
    out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h2
    return g.with_values(np.moveaxis(out, 0, k))
