"""Command-line driver: ``hylomorph <subcommand> [--config file] [flags]``.

Flags override values read from ``--config``; see :mod:`hylomorph.config`.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from hylomorph.config import ConfigError, RunConfig
from hylomorph.diagnostics import drift_report
from hylomorph.experiments import (
    atomic_write,
    evolve_soliton,
    evolve_vortex,
    experiment_soliton_stability,
    experiment_vortex_stability,
    flow_config,
    read_run,
    sweep_csv,
    sweep_profiles,
)
from hylomorph.functionals import write_profile
from hylomorph.potential import PotentialError, check_assumptions, get_potential
from hylomorph.profile_solver import reported_lambda, solve_profile


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML key-value file; flags override it")
    p.add_argument("--log-level", default="WARNING")


def _evolve_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--h", type=float)
    p.add_argument("--potential")
    p.add_argument("--dt-ratio", type=float, dest="dt_ratio")
    p.add_argument("--periods", type=float)
    p.add_argument("--monitor-every", type=int, dest="monitor_every")
    p.add_argument("--rupture-threshold", type=float, dest="rupture_threshold")
    p.add_argument("--stop-after", type=int, dest="stop_after")
    p.add_argument("--profile", help="precomputed profile csv")
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--rtilde", type=float)
    p.add_argument("--profile-dr", type=float, dest="profile_dr")
    p.add_argument("--e-omega", type=float, dest="e_omega")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hylomorph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-potential", help="check the structural assumptions on W")
    _common(p)
    p.add_argument("--name", dest="potential")
    p.add_argument("--smax", type=float)
    p.add_argument("--eps", type=float)

    p = sub.add_parser("profile", help="solve one vortex or soliton profile")
    _common(p)
    p.add_argument("--potential")
    p.add_argument("--ell", type=int)
    p.add_argument("--h", type=float)
    p.add_argument("--rtilde", type=float)
    p.add_argument("--dr", type=float, dest="profile_dr")
    p.add_argument("--e-omega", type=float, dest="e_omega")
    p.add_argument("--e-lambda", type=float, dest="e_lambda")
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--record-every", type=int, dest="record_every")
    p.add_argument("--out")
    p.add_argument("--trace")

    p = sub.add_parser("sweep", help="profile table over lists of h and ell")
    _common(p)
    p.add_argument("--potential")
    p.add_argument("--h-list", type=float, nargs="+", dest="h_list")
    p.add_argument("--ell-list", type=int, nargs="+", dest="ell_list")
    p.add_argument("--rtilde", type=float)
    p.add_argument("--dr", type=float, dest="profile_dr")
    p.add_argument("--e-omega", type=float, dest="e_omega")
    p.add_argument("--exact-paper", action="store_true", help="full figure parameter lists")
    p.add_argument("--out")

    p = sub.add_parser("evolve-soliton", help="boosted soliton on the torus")
    _common(p)
    _evolve_flags(p)
    p.add_argument("--v", type=float)
    p.add_argument("--dx", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--out")

    p = sub.add_parser("evolve-vortex", help="rotating vortex on the polar grid")
    _common(p)
    _evolve_flags(p)
    p.add_argument("--ell", type=int)
    p.add_argument("--dr", type=float)
    p.add_argument("--out")

    p = sub.add_parser("drift-report", help="drift statistics and rupture time of a run.csv")
    _common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--threshold", type=float, dest="rupture_threshold")
    p.add_argument("--json", dest="json_out", help="default: <in>.report.json")

    p = sub.add_parser("experiment", help="stability experiments over several grids")
    esub = p.add_subparsers(dest="experiment", required=True)
    for name, spacing in (("soliton-stability", "dx"), ("vortex-stability", "dr")):
        e = esub.add_parser(name)
        _common(e)
        _evolve_flags(e)
        e.add_argument(f"--{spacing}-list", type=float, nargs="+", dest=f"{spacing}_list")
        if spacing == "dx":
            e.add_argument("--v", type=float)
            e.add_argument("--L", type=float)
        else:
            e.add_argument("--ell", type=int)
        e.add_argument("--outdir")
        e.add_argument("--exact-paper", action="store_true", help="full figure grid lists and horizons")
    return parser


_NOT_CONFIG = {"command", "experiment", "config", "log_level", "exact_paper", "inp", "json_out"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "exact_paper", False):
        cfg = cfg.exact_paper()
    flags = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    return cfg.updated(flags)


# --------------------------------------------------------------------------
# subcommands


def cmd_check_potential(cfg: RunConfig, args) -> int:
    pot = get_potential(cfg.potential)
    rep = check_assumptions(pot, s_max=cfg.smax, eps=cfg.eps)
    for line in rep.lines():
        print(line)
    return 0 if rep.core_ok else 1


def cmd_profile(cfg: RunConfig, args) -> int:
    pot = get_potential(cfg.potential)
    trace = solve_profile(pot, cfg.ell, cfg.h, flow_config(cfg))
    out = cfg.out or "profile.csv"
    write_profile(out, trace.final, pot.m)
    if cfg.trace:
        lines = ["step,omega,lambda,residual"]
        lines += [f"{k},{om!r},{lam!r},{res!r}" for k, om, lam, res in trace.rows()]
        atomic_write(cfg.trace, "\n".join(lines) + "\n")
    p = trace.final
    print(f"converged: {str(trace.converged).lower()}")
    print(f"steps: {trace.steps_used}")
    print(f"omega: {p.omega:.15g}")
    print(f"lambda: {reported_lambda(trace, pot):.15g}")
    print(f"peak_r: {p.peak_r:.6g}")
    print(f"peak_u: {p.peak_u:.15g}")
    print(f"residual: {trace.final_residual:.3e}")
    return 0 if trace.converged else 1


def cmd_sweep(cfg: RunConfig, args) -> int:
    rows = sweep_profiles(cfg)
    text = sweep_csv(rows)
    if cfg.out:
        atomic_write(cfg.out, text)
    else:
        sys.stdout.write(text)
    return 0 if all(r["converged"] for r in rows) else 1


def _finish_run(res, cfg: RunConfig, default: str) -> int:
    out = cfg.out or default
    atomic_write(out, res.to_csv())
    print(f"wrote {out}: {len(res.records)} records, T = {res.period:.12g} ({res.meta['time_convention']})")
    if len(res.records) > 1:
        rep = drift_report(res.records, cfg.rupture_threshold, res.period)
        for line in rep.lines():
            print(line)
    print(f"status: {res.status}")
    return 0 if res.status == "ok" else 1


def cmd_evolve_soliton(cfg: RunConfig, args) -> int:
    return _finish_run(evolve_soliton(cfg, cfg.dx), cfg, "run.csv")


def cmd_evolve_vortex(cfg: RunConfig, args) -> int:
    return _finish_run(evolve_vortex(cfg, cfg.dr), cfg, "run.csv")


def cmd_drift_report(cfg: RunConfig, args) -> int:
    records, header = read_run(args.inp)
    period = float(header["meta.period"]) if "meta.period" in header else None
    rep = drift_report(records, cfg.rupture_threshold, period)
    for line in rep.lines():
        print(line)
    path = args.json_out or os.path.splitext(args.inp)[0] + ".report.json"
    atomic_write(path, json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_experiment(cfg: RunConfig, args) -> int:
    if args.experiment == "soliton-stability":
        out = experiment_soliton_stability(cfg)
    else:
        out = experiment_vortex_stability(cfg)
    sys.stdout.write(out.summary_csv())
    for path in out.paths:
        print(f"wrote {path}")
    return 0 if all(r["status"] == "ok" for r in out.summary) else 1


COMMANDS = {
    "check-potential": cmd_check_potential,
    "profile": cmd_profile,
    "sweep": cmd_sweep,
    "evolve-soliton": cmd_evolve_soliton,
    "evolve-vortex": cmd_evolve_vortex,
    "drift-report": cmd_drift_report,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, PotentialError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
