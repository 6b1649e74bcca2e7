"""Catalogue of verifiable identities and their per-level runners.

Each runner turns an :class:`ExperimentConfig` and one :class:`Resolution`
into an :class:`IdentityReport`. The step used for observed orders is given by
``Identity.step``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import frac1d
from .classical import borel_pompeiu_classical, pointwise_dbar, shell_points, stokes_residual
from .config import ExperimentConfig
from .convergence import IdentityReport, Resolution
from .families import make_field, make_line_function, make_weight1, make_weight3
from .fractional import (
    cauchy_corollary_check,
    certification_points,
    frac_borel_pompeiu,
    frac_stokes_residual,
    lambda_for,
    weighted_product_rule_sides,
)
from .grid import sample_field
from .psi_ops import FracParams, laplacian, laplacian_compositions
from .quadrature import kernel_at, sphere_moment
from .quat import qnorm


def _h(res: Resolution):
    return res.h_fd if res.h_fd > 0 else None


def _params(cfg: ExperimentConfig, which: str) -> FracParams:
    order, prop, spec = (cfg.alpha, cfg.sigma, cfg.phi) if which == "f" else (cfg.beta, cfg.rho, cfg.theta)
    if cfg.rl:
        return FracParams.rl(order)
    return FracParams(order, prop, make_weight3(spec.family, spec.coeffs))


def _field(cfg: ExperimentConfig, which: str, params: FracParams | None = None):
    spec = cfg.f if which == "f" else cfg.g
    coeffs = spec.coeffs
    if spec.family.startswith("member") and not coeffs:
        if params is None:
            raise ValueError("member families need fractional parameters")
        coeffs = (params.sigma[0], float(params.dphi(np.array(cfg.y), cfg.y)))
    seed = cfg.seed if which == "f" else cfg.seed + 1
    return make_field(spec.family, coeffs, seed, box=cfg.box, psi=cfg.psi, y=cfg.y)


def _worst(lhs, rhs):
    i = int(np.argmax(qnorm(lhs - rhs)))
    return lhs[i], rhs[i]


def run_sphere(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    lhs = sphere_moment(cfg.center, cfg.radius, res.m_surf, cfg.psi)
    target = 4.0 * np.pi * cfg.radius**3
    return IdentityReport("sphere-moment", lhs, np.array([target, 0.0, 0.0, 0.0]), res, scale=target)


def run_fund_theorem(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    """Complex values store the real part in ``w`` and the imaginary part in ``x``."""
    f = make_line_function(cfg.f.family, cfg.f.coeffs)
    w = make_weight1(cfg.phi.family, cfg.phi.coeffs)
    a, b = cfg.interval
    ts = a + (b - a) * (np.arange(cfg.points) + 1.0) / (cfg.points + 1)
    h = _h(res) or 1e-3

    def integral(s):
        return frac1d.prop_frac_integral(f, cfg.alpha[0], cfg.rho[0], w, a, b, s, cfg.side, res.n_quad)

    lhs = frac1d.prop_frac_derivative(integral, cfg.alpha[0], cfg.rho[0], w, a, b, ts, cfg.side, res.n_quad, h)
    rhs = f(ts)
    i = int(np.argmax(np.abs(lhs - rhs)))

    def as_q(z):
        return np.array([np.real(z), np.imag(z), 0.0, 0.0])

    scale = float(np.max(np.abs(rhs))) or 1.0
    return IdentityReport("fund-theorem", as_q(lhs[i]), as_q(rhs[i]), res, scale=scale)


def run_laplacian(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    f = _field(cfg, "f")
    g = sample_field(f, cfg.box, res.n_vol)
    lap = laplacian(g).values.reshape(-1, 4)
    best = None
    for comp in laplacian_compositions(g, cfg.psi).values():
        vals = comp.values.reshape(-1, 4)
        pair = _worst(vals, lap)
        if best is None or qnorm(pair[0] - pair[1]) > qnorm(best[0] - best[1]):
            best = pair
    scale = max(float(np.max(qnorm(lap))), 1.0)
    return IdentityReport("laplacian-factor", best[0], best[1], res, scale=scale)


def run_stokes(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    return stokes_residual(_field(cfg, "g"), _field(cfg, "f"), cfg.box, res.n_vol, res.m_surf, cfg.psi, _h(res) or 1e-4)


def run_borel_pompeiu(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    x = cfg.x if cfg.x is not None else tuple(0.5 * (cfg.box.lower + cfg.box.upper))
    return borel_pompeiu_classical(_field(cfg, "f"), _field(cfg, "g"), x, cfg.box, res.n_vol, res.m_surf, psi=cfg.psi, h_fd=_h(res) or 1e-4)


def run_kernel(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    pts = shell_points(cfg.points, seed=cfg.seed)
    vals = pointwise_dbar(lambda p: kernel_at(p, cfg.psi), pts, cfg.psi, cfg.side, res.h_fd)
    lhs, rhs = _worst(vals, np.zeros_like(vals))
    return IdentityReport("kernel-hyperholo", lhs, rhs, res, scale=1.0)


def run_prop32(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    p = _params(cfg, "f")
    f = _field(cfg, "f")
    ls = lambda_for(p, cfg.y, cfg.psi, cfg.box)
    pts = np.array([cfg.x]) if cfg.x is not None else certification_points(cfg.box)
    s = weighted_product_rule_sides(f, p, ls, cfg.psi, cfg.y, pts, cfg.box, res.n_quad, _h(res) or 1e-3)
    lhs, rhs = _worst(s[f"lhs_{cfg.side}"], s[f"rhs_{cfg.side}"])
    scale = max(float(qnorm(lhs)), float(qnorm(rhs)), 1e-300)
    return IdentityReport("prop32", lhs, rhs, res, scale=scale)


def run_frac_stokes(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    pf, pg = _params(cfg, "f"), _params(cfg, "g")
    return frac_stokes_residual(
        _field(cfg, "f", pf), _field(cfg, "g", pg), pf, pg, cfg.y, cfg.box, res.n_vol, res.m_surf, cfg.psi, res.n_quad or 128, _h(res)
    )


def run_frac_bp(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    pf, pg = _params(cfg, "f"), _params(cfg, "g")
    x = cfg.x if cfg.x is not None else tuple(0.5 * (cfg.box.lower + cfg.box.upper))
    return frac_borel_pompeiu(
        _field(cfg, "f", pf), _field(cfg, "g", pg), pf, pg, x, cfg.y, cfg.box, res.n_vol, res.m_surf, res.n_quad or 64, _h(res), cfg.psi
    )


def run_cauchy(cfg: ExperimentConfig, res: Resolution) -> IdentityReport:
    pf, pg = _params(cfg, "f"), _params(cfg, "g")
    x = cfg.x if cfg.x is not None else tuple(0.5 * (cfg.box.lower + cfg.box.upper))
    return cauchy_corollary_check(
        _field(cfg, "f", pf), _field(cfg, "g", pg), pf, pg, x, cfg.y, cfg.box, res.n_vol, res.m_surf, res.n_quad or 64, _h(res), cfg.psi
    )


@dataclass(frozen=True)
class Identity:
    """Catalogue entry: runner, description and refinement step of one identity."""

    name: str
    description: str
    runner: Callable[[ExperimentConfig, Resolution], IdentityReport]
    step: Callable[[Resolution], float]


def _inv(attr):
    return lambda r: 1.0 / max(getattr(r, attr), 1)


CATALOGUE = (
    Identity("fund-theorem", "derivative of the fractional proportional integral reproduces f", run_fund_theorem, _inv("n_quad")),
    Identity("stokes", "classical psi-Stokes formula on a box", run_stokes, _inv("n_vol")),
    Identity("borel-pompeiu", "classical psi-Borel-Pompeiu formula at an interior or exterior point", run_borel_pompeiu, _inv("n_vol")),
    Identity("prop32", "exponential-weight product rule for the fractional operator", run_prop32, _inv("n_quad")),
    Identity("frac-stokes", "fractional proportional Stokes formula on a box", run_frac_stokes, _inv("n_vol")),
    Identity("frac-bp", "fractional proportional Borel-Pompeiu formula", run_frac_bp, _inv("n_vol")),
    Identity("cauchy-corollary", "boundary-only formulas for certified hyperholomorphic members", run_cauchy, _inv("n_vol")),
    Identity("kernel-hyperholo", "right psi-operator annihilates the Cauchy kernel away from 0", run_kernel, lambda r: r.h_fd),
    Identity("sphere-moment", "sphere integral of the conjugate radius against the surface form", run_sphere, _inv("m_surf")),
    Identity("laplacian-factor", "four psi-operator compositions against the grid Laplacian", run_laplacian, _inv("n_vol")),
)

BY_NAME = {ident.name: ident for ident in CATALOGUE}


def catalogue_text() -> str:
    """One ``name: description`` line per identity, in fixed order."""
    return "\n".join(f"{i.name}: {i.description}" for i in CATALOGUE) + "\n"
