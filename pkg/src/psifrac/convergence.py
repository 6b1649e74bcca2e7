"""Identity reports and refinement-study helpers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .quat import qnorm


@dataclass(frozen=True)
class Resolution:
    """Discretization parameters of one refinement level."""

    n_vol: int = 0
    m_surf: int = 0
    n_quad: int = 0
    h_fd: float = 0.0


@dataclass
class IdentityReport:
    """Both sides of a numerically checked identity at one resolution.

    ``residual`` is ``|lhs - rhs|``; ``scale`` is the magnitude used for
    relative residuals and ``extra`` carries identity-specific diagnostics.
    """

    name: str
    lhs: np.ndarray
    rhs: np.ndarray
    resolution: Resolution
    scale: float = 1.0
    order: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = np.asarray(self.lhs)
        self.rhs = np.asarray(self.rhs)

    @property
    def residual(self) -> float:
        return float(qnorm(self.lhs - self.rhs))

    @property
    def relative_residual(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual


def observed_orders(errors: Sequence[float], steps: Sequence[float]) -> list[Optional[float]]:
    """``log(e_i / e_{i+1}) / log(h_i / h_{i+1})`` for consecutive levels; None when undefined."""
    out: list[Optional[float]] = [None]
    for i in range(1, len(errors)):
        e0, e1 = errors[i - 1], errors[i]
        h0, h1 = steps[i - 1], steps[i]
        if e0 > 0 and e1 > 0 and h0 != h1:
            out.append(float(np.log(e0 / e1) / np.log(h0 / h1)))
        else:
            out.append(None)
    return out


def fitted_order(errors: Sequence[float], steps: Sequence[float]) -> float:
    """Least-squares slope of ``log e`` against ``log h``."""
    e = np.log(np.asarray(errors, dtype=float))
    h = np.log(np.asarray(steps, dtype=float))
    return float(np.polyfit(h, e, 1)[0])


def strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))
