"""Flat ``key = value`` experiment configuration with dotted section names.

Every key has the form ``<experiment>.<field>`` or ``<experiment>.<field>.<sub>``;
blank lines and ``#`` comments are ignored. Experiments run in the order of
their first key. Example::

    sphere.identity = sphere-moment
    sphere.radius = 1
    sphere.resolutions = 0 16 0 0; 0 32 0 0; 0 64 0 0
    sphere.tol = 1e-3
    sphere.min_order = 1.9

Numbers are decimal; order components accept an ``i`` suffix for imaginary
parts, e.g. ``0.5+0.2i``. Each resolution level is ``n_vol m_surf n_quad
h_fd``; an ``h_fd`` of 0 selects the identity's default step.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .convergence import Resolution
from .errors import ConfigError
from .families import FIELD_FAMILIES, LINE_FAMILIES, WEIGHT_FAMILIES
from .grid import Box
from .quat import STANDARD, StructuralSet, rotated_set

IDENTITIES = (
    "fund-theorem",
    "stokes",
    "borel-pompeiu",
    "prop32",
    "frac-stokes",
    "frac-bp",
    "cauchy-corollary",
    "kernel-hyperholo",
    "sphere-moment",
    "laplacian-factor",
)

_FIELDS = {
    "identity", "box.a", "box.b", "resolutions", "alpha", "beta", "sigma", "rho", "rl",
    "phi.family", "phi.coeffs", "theta.family", "theta.coeffs", "f.family", "f.coeffs",
    "g.family", "g.coeffs", "x", "y", "center", "seed", "radius", "psi", "tol", "monotone",
    "min_order", "max_order", "side", "interval", "points",
}  # fmt: skip

_LINE = re.compile(r"^\s*([A-Za-z0-9_\-]+)\.([A-Za-z0-9_.]+)\s*=\s*(.*?)\s*$")


@dataclass(frozen=True)
class FunctionSpec:
    """A named closed-form family with coefficients."""

    family: str
    coeffs: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    """One named experiment with its refinement levels, parameters and contracts."""

    name: str
    identity: str
    resolutions: tuple
    line: int = 0
    box: Box = field(default_factory=Box.unit)
    alpha: tuple = (0.5, 0.5, 0.5)
    beta: tuple = (0.5, 0.5, 0.5)
    sigma: tuple = (0.5, 0.3, 0.0)
    rho: tuple = (0.5, 0.3, 0.0)
    rl: bool = False
    phi: FunctionSpec = FunctionSpec("linear")
    theta: FunctionSpec = FunctionSpec("linear")
    f: FunctionSpec = FunctionSpec("trig")
    g: FunctionSpec = FunctionSpec("trig")
    x: Optional[tuple] = None
    y: tuple = (0.5, 0.5, 0.5)
    center: tuple = (0.0, 0.0, 0.0)
    seed: int = 0
    radius: float = 1.0
    psi: StructuralSet = STANDARD
    tol: Optional[float] = None
    monotone: bool = False
    min_order: Optional[float] = None
    max_order: Optional[float] = None
    side: str = "left"
    interval: tuple = (0.0, 1.0)
    points: int = 10


def parse_number(text: str, allow_complex: bool = False):
    """Decimal number, or with ``allow_complex`` a value like ``0.5+0.2i``."""
    text = text.strip()
    if allow_complex and text.endswith("i"):
        z = complex(text[:-1] + "j")
        return z if z.imag != 0 else z.real
    return float(text)


def _floats(raw: str, count: Optional[int] = None, allow_complex: bool = False, broadcast: bool = False) -> tuple:
    vals = tuple(parse_number(t, allow_complex) for t in raw.split())
    if broadcast and len(vals) == 1 and count:
        vals = vals * count
    if count is not None and len(vals) != count:
        raise ValueError(f"expected {count} numbers, got {len(vals)}")
    return vals


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true or false, got {raw!r}")


def parse_resolutions(raw: str) -> tuple:
    """``"n m q h; n m q h; ..."`` into a strictly refining tuple of levels."""
    levels = []
    for chunk in raw.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split()
        if len(parts) != 4:
            raise ValueError(f"each level needs 'n_vol m_surf n_quad h_fd', got {chunk.strip()!r}")
        n, m, q = (int(p) for p in parts[:3])
        h = float(parts[3])
        if min(n, m, q) < 0 or h < 0:
            raise ValueError("resolution fields must be non-negative")
        levels.append(Resolution(n, m, q, h))
    if not levels:
        raise ValueError("resolutions list is empty")
    for prev, cur in zip(levels, levels[1:]):
        coarser = (cur.n_vol < prev.n_vol, cur.m_surf < prev.m_surf, cur.n_quad < prev.n_quad, cur.h_fd > prev.h_fd)
        finer = (cur.n_vol > prev.n_vol, cur.m_surf > prev.m_surf, cur.n_quad > prev.n_quad, cur.h_fd < prev.h_fd)
        if any(coarser) or not any(finer):
            raise ValueError(f"resolutions must strictly increase: {prev} then {cur}")
    return tuple(levels)


def _psi(raw: str) -> StructuralSet:
    parts = raw.split()
    if parts == ["standard"]:
        return STANDARD
    if len(parts) == 2 and parts[0] == "rotated":
        return rotated_set(float(parts[1]))
    raise ValueError(f"psi must be 'standard' or 'rotated <angle>', got {raw!r}")


def _convert(key: str, raw: str):
    if key == "identity":
        if raw not in IDENTITIES:
            raise ValueError(f"unknown identity {raw!r}; valid names: {', '.join(IDENTITIES)}")
        return raw
    if key == "resolutions":
        return parse_resolutions(raw)
    if key in ("alpha", "beta"):
        return _floats(raw, 3, allow_complex=True, broadcast=True)
    if key in ("sigma", "rho"):
        return _floats(raw, 3, broadcast=True)
    if key in ("box.a", "box.b", "x", "y", "center"):
        return _floats(raw, 3, broadcast=True)
    if key == "interval":
        return _floats(raw, 2)
    if key.endswith(".coeffs"):
        return _floats(raw)
    if key.endswith(".family"):
        valid = WEIGHT_FAMILIES if key.split(".")[0] in ("phi", "theta") else FIELD_FAMILIES + LINE_FAMILIES
        if raw not in valid:
            raise ValueError(f"unknown family {raw!r}; valid: {', '.join(dict.fromkeys(valid))}")
        return raw
    if key in ("seed", "points"):
        return int(raw)
    if key in ("radius", "tol", "min_order", "max_order"):
        return float(raw)
    if key in ("monotone", "rl"):
        return _bool(raw)
    if key == "psi":
        return _psi(raw)
    if key == "side":
        if raw not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {raw!r}")
        return raw
    raise ValueError(f"unknown field {key!r}")


def _build(name: str, entries: dict) -> ExperimentConfig:
    first_line = min(line for line, _ in entries.values())
    if "identity" not in entries:
        raise ConfigError("experiment has no identity", first_line, f"{name}.identity")
    if "resolutions" not in entries:
        raise ConfigError("experiment has no resolutions", first_line, f"{name}.resolutions")
    kw = {"name": name, "line": first_line}
    specs = {}
    for key, (line, value) in entries.items():
        if key in ("box.a", "box.b"):
            continue
        head, _, sub = key.partition(".")
        if sub:
            specs.setdefault(head, {})[sub] = value
        else:
            kw[key] = value
    for head, parts in specs.items():
        default = ExperimentConfig.__dataclass_fields__[head].default
        kw[head] = FunctionSpec(parts.get("family", default.family), tuple(parts.get("coeffs", default.coeffs)))
    if "box.a" in entries or "box.b" in entries:
        a = entries.get("box.a", (0, (0.0, 0.0, 0.0)))[1]
        b = entries.get("box.b", (0, (1.0, 1.0, 1.0)))[1]
        try:
            kw["box"] = Box(a, b)
        except ValueError as exc:
            raise ConfigError(str(exc), entries.get("box.b", entries.get("box.a"))[0], f"{name}.box") from exc
    return ExperimentConfig(**kw)


def parse_config(text: str) -> list[ExperimentConfig]:
    """Parse configuration text into experiments in order of appearance.

    Raises
    ------
    ConfigError
        With the offending line number and dotted field name.
    """
    grouped: dict[str, dict] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ConfigError("expected '<experiment>.<field> = <value>'", lineno, line.split("=", 1)[0].strip())
        name, key, raw = m.groups()
        dotted = f"{name}.{key}"
        if key not in _FIELDS:
            raise ConfigError(f"unknown field; valid fields: {', '.join(sorted(_FIELDS))}", lineno, dotted)
        entries = grouped.setdefault(name, {})
        if key in entries:
            raise ConfigError(f"duplicate key (first set on line {entries[key][0]})", lineno, dotted)
        try:
            entries[key] = (lineno, _convert(key, raw))
        except ValueError as exc:
            raise ConfigError(str(exc), lineno, dotted) from exc
    if not grouped:
        raise ConfigError("configuration defines no experiments", 1, "")
    return [_build(name, entries) for name, entries in grouped.items()]


def load_config(path) -> list[ExperimentConfig]:
    return parse_config(Path(path).read_text())
