"""Command-line front end for day-ahead microgrid scheduling.

Three subcommands:

  run       solve one case (deterministic or unscented) and write artifacts
  compare   sweep both cases x both modes and emit a comparison table
  validate  load a case file and report every invariant violation

Exit codes: 0 solved to optimality, 2 infeasible (or any non-optimal
outcome), 3 invalid input.  Nothing is written on exit 3.  All hours in
user-facing files are 1-based.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .model import CaseError, GridModel, load_case, bundled_case_path
from .scheduler import (
    CASE1,
    CASE2,
    SchedulerOptions,
    cost_dict,
    run_deterministic,
    schedule_rows,
)
from .stochastic import (
    ScenarioInfeasible,
    gaussian_factors,
    monte_carlo_reference,
    run_stochastic,
    stats_dict,
)


class CliError(Exception):
    """Bad flags or unreadable input; maps to exit 3."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags, which collides with the
    # "infeasible" exit code; route usage errors to 3 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


@dataclass
class RunConfig:
    """Everything one invocation needs, resolved from flags."""

    case_path: str
    case_flag: int = 1
    mode: str = "det"                     # det | ut
    w0: float = 1.0 / 3.0
    sigma_load: float = 0.05
    sigma_wind: float = 0.05
    sigma_price: float = 0.05
    out_dir: str = "."
    fmt: str = "csv"                      # tabular artifact format
    seed: int = 0
    mc_samples: int = 0
    verbosity: int = 0


# ---------------------------------------------------------------- artifacts

def _write_table(rows: list[dict], path: Path, fmt: str) -> None:
    if fmt == "json":
        path.with_suffix(".json").write_text(json.dumps(rows, indent=1))
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


# ------------------------------------------------------------- subcommands

def _options(cfg: RunConfig) -> SchedulerOptions:
    return SchedulerOptions()


def _load(cfg: RunConfig) -> GridModel:
    path = Path(cfg.case_path)
    if not path.exists():
        raise CliError(f"case file not found: {path}")
    return load_case(path)


def _flag(cfg: RunConfig):
    return CASE1 if cfg.case_flag == 1 else CASE2


def cmd_run(cfg: RunConfig) -> int:
    model = _load(cfg)
    out = Path(cfg.out_dir)
    flag = _flag(cfg)

    if cfg.mode == "det":
        res = run_deterministic(model, flag, options=_options(cfg))
        if res.status != "OPTIMAL":
            print(f"run ended {res.status}: no feasible day-ahead schedule "
                  f"under the given bounds", file=sys.stderr)
            return 2
        stats = None
    else:
        unc = gaussian_factors(sigma_load=cfg.sigma_load,
                               sigma_wind=cfg.sigma_wind,
                               sigma_price=cfg.sigma_price, w0=cfg.w0,
                               horizon=model.settings.horizon)
        try:
            sr = run_stochastic(model, flag, uncertain=unc, options=_options(cfg))
        except ScenarioInfeasible as exc:
            print(f"stochastic run aborted: {exc}", file=sys.stderr)
            return 2
        res = sr.runs[0]                  # mean point == deterministic run
        stats = stats_dict(sr)
        if cfg.mc_samples > 0:
            mc = monte_carlo_reference(model, flag, uncertain=unc,
                                       sample_count=cfg.mc_samples,
                                       seed=cfg.seed, options=_options(cfg))
            stats["monte_carlo"] = {
                "samples": mc.sample_count,
                "mean_cost": mc.mean_cost,
                "exclusion_rate": mc.exclusion_rate,
            }

    out.mkdir(parents=True, exist_ok=True)
    _write_table(schedule_rows(model, res.schedule), out / "schedule.csv", cfg.fmt)
    (out / "cost.json").write_text(json.dumps(cost_dict(res.cost), indent=1))
    if stats is not None:
        (out / "stats.json").write_text(json.dumps(stats, indent=1))
    if cfg.verbosity:
        print(f"status {res.status}  total ${res.cost.total:,.2f}  "
              f"gap {res.gap:.2e}  nodes {res.node_count}")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    model = _load(cfg)
    unc = gaussian_factors(sigma_load=cfg.sigma_load, sigma_wind=cfg.sigma_wind,
                           sigma_price=cfg.sigma_price, w0=cfg.w0,
                           horizon=model.settings.horizon)
    cells: dict[tuple[int, str], dict] = {}
    for case_flag, flag in ((1, CASE1), (2, CASE2)):
        det = run_deterministic(model, flag, options=_options(cfg))
        ok = det.status == "OPTIMAL"
        cells[(case_flag, "det")] = {
            "status": det.status, "cost": det.cost.total if ok else None}
        if not ok:
            cells[(case_flag, "ut")] = {"status": "SKIPPED", "cost": None}
            continue
        try:
            sr = run_stochastic(model, flag, uncertain=unc,
                                options=_options(cfg), mean_run=det)
            cells[(case_flag, "ut")] = {"status": "OPTIMAL", "cost": sr.mean_cost}
        except ScenarioInfeasible as exc:
            cells[(case_flag, "ut")] = {"status": f"INFEASIBLE ({exc})",
                                        "cost": None}

    rows = [{"case": c, "mode": m, "status": cells[(c, m)]["status"],
             "total_cost": cells[(c, m)]["cost"]}
            for c in (1, 2) for m in ("det", "ut")]
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_table(rows, out / "compare.csv", cfg.fmt)

    def delta(a, b):
        return None if a is None or b is None else b - a

    table = {
        "cells": {f"case{c}_{m}": cells[(c, m)] for c in (1, 2)
                  for m in ("det", "ut")},
        "deltas": {
            "network_constraints_det":
                delta(cells[(1, "det")]["cost"], cells[(2, "det")]["cost"]),
            "network_constraints_ut":
                delta(cells[(1, "ut")]["cost"], cells[(2, "ut")]["cost"]),
            "uncertainty_case1":
                delta(cells[(1, "det")]["cost"], cells[(1, "ut")]["cost"]),
            "uncertainty_case2":
                delta(cells[(2, "det")]["cost"], cells[(2, "ut")]["cost"]),
        },
    }
    (out / "compare.json").write_text(json.dumps(table, indent=1))
    if cfg.verbosity:
        for r in rows:
            cost = "-" if r["total_cost"] is None else f"${r['total_cost']:,.2f}"
            print(f"case {r['case']} {r['mode']:3s}: {r['status']:8s} {cost}")
    return 0 if all(v["status"] == "OPTIMAL" for v in cells.values()) else 2


def cmd_validate(case_path: str) -> int:
    path = Path(case_path)
    if not path.exists():
        raise CliError(f"case file not found: {path}")
    try:
        model = load_case(path)
    except CaseError as exc:
        print(exc)
        return 3
    print(f"{model.name}: 0 violations "
          f"({len(model.buses)} buses, {len(model.units)} units, "
          f"{len(model.ties)} ties, horizon {model.settings.horizon})")
    return 0


# ------------------------------------------------------------------ parser

def _nonneg(text: str) -> float:
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mgsched", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_modes=True):
        p.add_argument("case_path", nargs="?", default=str(bundled_case_path()),
                       help="case JSON (default: bundled 17-bus case)")
        if with_modes:
            p.add_argument("--case", type=int, choices=(1, 2), default=1,
                           help="1 = copper plate, 2 = network constrained")
            p.add_argument("--mode", default="det",
                           choices=("det", "ut", "deterministic", "stochastic"),
                           help="deterministic or unscented-transform run")
        p.add_argument("--w0", type=float, default=1.0 / 3.0,
                       help="center sigma-point weight")
        p.add_argument("--sigma-load", type=_nonneg, default=0.05)
        p.add_argument("--sigma-wind", type=_nonneg, default=0.05)
        p.add_argument("--sigma-price", type=_nonneg, default=0.05)
        p.add_argument("--out", default=".", help="artifact directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="tabular artifact format")
        p.add_argument("--seed", type=int, default=0,
                       help="Monte-Carlo check seed")
        p.add_argument("--mc-samples", type=int, default=0,
                       help="run a seeded Monte-Carlo check with this many draws")
        p.add_argument("-v", "--verbose", action="count", default=0)

    common(sub.add_parser("run", help="solve one case"))
    common(sub.add_parser("compare", help="both cases x both modes"),
           with_modes=False)
    vp = sub.add_parser("validate", help="check a case file")
    vp.add_argument("case_path", nargs="?", default=str(bundled_case_path()))
    return ap


def _config(ns: argparse.Namespace) -> RunConfig:
    mode = getattr(ns, "mode", "det")
    mode = {"deterministic": "det", "stochastic": "ut"}.get(mode, mode)
    return RunConfig(
        case_path=ns.case_path,
        case_flag=getattr(ns, "case", 1),
        mode=mode,
        w0=ns.w0,
        sigma_load=ns.sigma_load,
        sigma_wind=ns.sigma_wind,
        sigma_price=ns.sigma_price,
        out_dir=ns.out,
        fmt=ns.format,
        seed=ns.seed,
        mc_samples=ns.mc_samples,
        verbosity=ns.verbose,
    )


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        if ns.command == "validate":
            return cmd_validate(ns.case_path)
        cfg = _config(ns)
        if ns.command == "run":
            return cmd_run(cfg)
        return cmd_compare(cfg)
    except (CliError, CaseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
