"""``verify`` command line: run experiment configs and list the identity catalogue.

Exit codes: 0 when every contract passes, 1 when a contract fails, 2 for an
invalid configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import reduce
from .config import ExperimentConfig, load_config
from .convergence import IdentityReport, observed_orders, strictly_decreasing
from .errors import ConfigError
from .experiments import BY_NAME, catalogue_text

SCHEMA = 1
COLUMNS = (
    "schema", "experiment", "identity", "n_vol", "m_surf", "n_quad", "h_fd",
    "lhs_w", "lhs_x", "lhs_y", "lhs_z", "rhs_w", "rhs_x", "rhs_y", "rhs_z",
    "residual", "order", "status",
)  # fmt: skip


def _num(v) -> str:
    return "" if v is None else format(float(v), ".17g")


def run_experiment(cfg: ExperimentConfig, tol_scale: float = 1.0):
    """Run every level of ``cfg``; return ``(rows, failures)``.

    ``residual`` is the identity's relative residual. Runtime errors are
    recorded in the row status and count as contract failures.
    """
    ident = BY_NAME[cfg.identity]
    results: list[Optional[IdentityReport]] = []
    statuses = []
    for res in cfg.resolutions:
        try:
            results.append(ident.runner(cfg, res))
            statuses.append("ok")
        except (ValueError, ArithmeticError) as exc:
            results.append(None)
            statuses.append(f"error: {type(exc).__name__}: {exc}")
    residuals = [r.relative_residual if r is not None else None for r in results]
    ok = [r is not None for r in residuals]
    orders: list = [None] * len(residuals)
    if all(ok):
        orders = observed_orders(residuals, [ident.step(res) for res in cfg.resolutions])

    failures = []
    if not all(ok):
        failures.append("runtime error at one or more levels")
    else:
        if cfg.tol is not None and residuals[-1] > cfg.tol * tol_scale:
            failures.append(f"finest residual {residuals[-1]:.3e} > tol {cfg.tol * tol_scale:.3e}")
        if cfg.monotone and not strictly_decreasing(residuals):
            failures.append("residuals not strictly decreasing")
        measured = [o for o in orders[1:]]
        if cfg.min_order is not None and any(o is None or o < cfg.min_order for o in measured):
            failures.append(f"observed orders {measured} below {cfg.min_order}")
        if cfg.max_order is not None and any(o is None or o > cfg.max_order for o in measured):
            failures.append(f"observed orders {measured} above {cfg.max_order}")

    rows = []
    for res, rep, resid, order, status in zip(cfg.resolutions, results, residuals, orders, statuses):
        lhs = rep.lhs if rep is not None else [None] * 4
        rhs = rep.rhs if rep is not None else [None] * 4
        rows.append(
            [str(SCHEMA), cfg.name, cfg.identity, str(res.n_vol), str(res.m_surf), str(res.n_quad), _num(res.h_fd)]
            + [_num(v) for v in lhs]
            + [_num(v) for v in rhs]
            + [_num(resid), _num(order), status]
        )
    return rows, failures


def format_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_run(args) -> int:
    try:
        experiments = load_config(args.config)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    jobs = args.jobs if args.jobs is not None else reduce.get_jobs()
    reduce.set_jobs(jobs)
    all_rows, passed = [], True
    for cfg in experiments:
        rows, failures = run_experiment(cfg, args.tol_scale)
        all_rows.extend(rows)
        verdict = "PASS" if not failures else "FAIL: " + "; ".join(failures)
        print(f"{cfg.name} ({cfg.identity}): {verdict}")
        passed = passed and not failures
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / (Path(args.config).stem + ".csv")
    target.write_text(format_csv(all_rows))
    print(f"wrote {target}")
    return 0 if passed else 1


def cmd_list(args) -> int:
    sys.stdout.write(catalogue_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="verify", description="Numerical verification of psi-hyperholomorphic integral identities.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiments of a config file")
    run.add_argument("config", help="path to a key = value experiment file")
    run.add_argument("--out", default="reports", help="directory for the CSV report (default: reports)")
    run.add_argument("--jobs", type=int, default=None, help="worker threads (default: $VERIFY_JOBS or 1)")
    run.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance contract by this factor")
    run.set_defaults(func=cmd_run)
    lst = sub.add_parser("list", help="print the identity catalogue")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
