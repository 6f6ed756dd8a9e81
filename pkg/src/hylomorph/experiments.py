"""Experiment pipelines: profile sweeps and soliton/vortex stability runs.

Every job is a pure function of (config, grid spacing), so results do not
depend on how jobs are scheduled. ``HYLO_THREADS`` bounds the number of
worker processes; outputs are gathered in submission order and each file is
written atomically.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from hylomorph.config import RunConfig
from hylomorph.diagnostics import DiagnosticsRecord, drift_report
from hylomorph.evolver import (
    DiagnosticsPlan,
    EvolutionBlowUp,
    TheoreticalOrbit,
    init_from_orbit,
    run,
)
from hylomorph.functionals import RadialProfile, read_profile, write_profile
from hylomorph.grids import PolarGrid, TorusGrid
from hylomorph.potential import get_potential
from hylomorph.profile_solver import FlowConfig, InitialGuessSpec, reported_lambda, solve_profile

log = logging.getLogger(__name__)

RUN_COLUMNS = ("t", "energy", "charge", "angmom", "delta_os")
SWEEP_COLUMNS = ("h", "ell", "omega", "lambda", "peak_u", "peak_r", "converged", "status")
TIME_CONVENTION = "T = 2 pi / |omega|"
CFL_SAFETY = 0.9


class ProfileNotConverged(RuntimeError):
    pass


# --------------------------------------------------------------------------
# scheduling and files


def thread_count() -> int:
    env = os.environ.get("HYLO_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("HYLO_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def map_jobs(fn, items: list, threads: int | None = None) -> list:
    """Ordered map, in worker processes when more than one thread is allowed."""
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))


def atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


# --------------------------------------------------------------------------
# profiles


def flow_config(cfg: RunConfig, init: InitialGuessSpec | None = None) -> FlowConfig:
    return FlowConfig(
        r_tilde=cfg.rtilde,
        dr=cfg.profile_dr,
        e_omega=cfg.e_omega,
        e_lambda=cfg.e_lambda,
        max_steps=int(cfg.max_steps),
        record_every=int(cfg.record_every),
        init=init or InitialGuessSpec(),
    )


def _cache_path(cfg: RunConfig, ell: int, h: float) -> str:
    name = f"{cfg.potential}_l{ell}_h{h:g}_rt{cfg.rtilde:g}_dr{cfg.profile_dr:g}_eo{cfg.e_omega:g}.csv"
    return os.path.join(cfg.cache_dir, name)


def obtain_profile(cfg: RunConfig, ell: int, h: float) -> RadialProfile:
    """Profile from ``cfg.profile``, the cache directory, or a fresh solve."""
    pot = get_potential(cfg.potential)
    if cfg.profile:
        p = read_profile(cfg.profile, pot)
        if p.ell != ell or not math.isclose(p.h, h, rel_tol=1e-12):
            raise ValueError(f"profile {cfg.profile} has ell={p.ell}, h={p.h}; wanted ell={ell}, h={h}")
        return p
    path = _cache_path(cfg, ell, h) if cfg.cache_dir else None
    if path and os.path.exists(path):
        return read_profile(path, pot)
    trace = solve_profile(pot, ell, h, flow_config(cfg))
    if not trace.converged:
        raise ProfileNotConverged(f"profile ell={ell} h={h:g} did not converge in {trace.steps_used} steps")
    if path:
        os.makedirs(cfg.cache_dir, exist_ok=True)
        write_profile(path, trace.final, pot.m)
        return read_profile(path, pot)
    return trace.final


# --------------------------------------------------------------------------
# sweep


def _sweep_cell(job) -> dict:
    cfg, h, ell = job
    row = {"h": float(h), "ell": int(ell)}
    try:
        pot = get_potential(cfg.potential)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            trace = solve_profile(pot, int(ell), float(h), flow_config(cfg))
        p = trace.final
        row.update(
            omega=p.omega,
            **{"lambda": reported_lambda(trace, pot)},
            peak_u=p.peak_u,
            peak_r=p.peak_r,
            converged=trace.converged,
            status="ok" if trace.support_ok else "support touches boundary",
        )
    except Exception as exc:  # a failed cell must not stop the sweep
        row.update(omega=math.nan, peak_u=math.nan, peak_r=math.nan, converged=False,
                   status=f"{type(exc).__name__}: {exc}".replace(",", ";"))
        row["lambda"] = math.nan
    return row


def sweep_profiles(cfg: RunConfig, threads: int | None = None) -> list[dict]:
    """One row per (h, ell) cell, h outer ascending and ell inner ascending."""
    jobs = [(cfg, h, ell) for h in sorted(float(x) for x in cfg.h_list) for ell in sorted(int(x) for x in cfg.ell_list)]
    return map_jobs(_sweep_cell, jobs, threads)


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(",".join(SWEEP_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row[c]) for c in SWEEP_COLUMNS) + "\n")
    return buf.getvalue()


# --------------------------------------------------------------------------
# single evolutions


@dataclass
class RunResult:
    records: list
    meta: dict
    config: RunConfig
    status: str = "ok"

    @property
    def period(self) -> float:
        return self.meta["period"]

    def delta(self) -> np.ndarray:
        return np.array([r.delta_os for r in self.records])

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# hylomorph run\n")
        for line in self.config.header_lines():
            buf.write(line + "\n")
        for k, v in self.meta.items():
            buf.write(f"# meta.{k}: {_fmt(v)}\n")
        buf.write(f"# meta.status: {self.status}\n")
        buf.write(",".join(RUN_COLUMNS) + "\n")
        for r in self.records:
            buf.write(",".join(repr(float(getattr(r, c))) for c in RUN_COLUMNS) + "\n")
        return buf.getvalue()


def torus_side(support_radius: float, dx: float) -> float:
    """Side of at least four support diameters, a multiple of 20 when that
    keeps Nx even, else the next multiple of 2 dx."""
    L = 20.0 * math.ceil(8.0 * support_radius / 20.0)
    n = L / dx
    if abs(n - round(n)) < 1e-9 * n and round(n) % 2 == 0:
        return L
    return 2.0 * dx * math.ceil(L / (2.0 * dx))


def polar_extent(support_radius: float) -> float:
    return support_radius + 10.0


def evolve_soliton(cfg: RunConfig, dx: float, profile: RadialProfile | None = None) -> RunResult:
    """Boosted soliton on the torus over ``cfg.periods`` periods."""
    pot = get_potential(cfg.potential)
    profile = profile or obtain_profile(cfg, 0, cfg.h)
    orbit = TheoreticalOrbit("translating-soliton", profile, v=cfg.v)
    L = cfg.L if cfg.L is not None else torus_side(orbit.support_radius, dx)
    grid = TorusGrid(L, dx)
    dt = cfg.torus_dt_ratio() * dx
    return _evolve(cfg, pot, orbit, grid, dt, dt_capped=False, stop_after=cfg.stop_after)


def vortex_grid(cfg: RunConfig, dr: float, orbit: TheoreticalOrbit):
    """(grid, dt, capped): polar grid for ``orbit`` and the configured dt,
    capped at 0.9 of the explicit stability limit."""
    grid = PolarGrid.build(polar_extent(orbit.support_radius), dr)
    dt = cfg.polar_dt_ratio() * dr
    limit = CFL_SAFETY * 2.0 / math.sqrt(grid.max_eigenvalue())
    return grid, min(dt, limit), dt > limit


def evolve_vortex(cfg: RunConfig, dr: float, profile: RadialProfile | None = None,
                  stop_after: Optional[int] = None) -> RunResult:
    """Rotating vortex on the polar grid; dt is capped at 0.9 of the explicit
    stability limit where the ratio alone would exceed it."""
    pot = get_potential(cfg.potential)
    profile = profile or obtain_profile(cfg, cfg.ell, cfg.h)
    orbit = TheoreticalOrbit("rotating-vortex", profile)
    grid, dt, capped = vortex_grid(cfg, dr, orbit)
    return _evolve(cfg, pot, orbit, grid, dt, dt_capped=capped,
                   stop_after=stop_after if stop_after is not None else cfg.stop_after)


def _evolve(cfg, pot, orbit, grid, dt, dt_capped, stop_after) -> RunResult:
    T = orbit.period
    steps = int(round(cfg.periods * T / dt))
    meta = {
        "kind": orbit.kind,
        **{f"grid.{k}": v for k, v in grid.describe().items()},
        "dt": dt,
        "dt_capped_by_stability": dt_capped,
        "steps": steps,
        "omega": orbit.omega,
        "gamma": orbit.gamma,
        "period": T,
        "time_convention": TIME_CONVENTION,
        "integrals": "time-centred velocity; cell-area quadrature",
        "delta_os": "Simpson H1 + L2 norms",
    }
    plan = DiagnosticsPlan(
        cadence=int(cfg.monitor_every),
        orbit=orbit,
        rupture_threshold=cfg.rupture_threshold,
        stop_after=stop_after,
    )
    state = init_from_orbit(orbit, grid, dt)
    status = "ok"
    try:
        _, records = run(state, pot, steps, plan)
    except EvolutionBlowUp as exc:
        records = exc.records
        status = f"blow-up at step {exc.step}"
    log.info("%s %s: %d records, %s", orbit.kind, grid.describe(), len(records), status)
    return RunResult(records=records, meta=meta, config=cfg, status=status)


# --------------------------------------------------------------------------
# stability experiments


def _soliton_job(job):
    cfg, dx, profile = job
    return evolve_soliton(cfg, dx, profile)


def _vortex_job(job):
    cfg, dr, profile, stop_after = job
    return evolve_vortex(cfg, dr, profile, stop_after)


@dataclass
class ExperimentOutput:
    runs: list
    summary: list = field(default_factory=list)
    paths: list = field(default_factory=list)

    def summary_csv(self) -> str:
        if not self.summary:
            return ""
        cols = list(self.summary[0])
        lines = [",".join(cols)] + [",".join(_fmt(row[c]) for c in cols) for row in self.summary]
        return "\n".join(lines) + "\n"


def _spacing_tag(x: float) -> str:
    return f"{x:g}".replace(".", "p")


def experiment_soliton_stability(cfg: RunConfig, threads: int | None = None, write: bool = True) -> ExperimentOutput:
    profile = obtain_profile(cfg, 0, cfg.h)
    jobs = [(cfg, float(dx), profile) for dx in cfg.dx_list]
    runs = map_jobs(_soliton_job, jobs, threads)
    out = ExperimentOutput(runs=runs)
    for (_, dx, _), res in zip(jobs, runs):
        d = res.delta()
        half = d[len(d) // 2:] if d.size else d
        out.summary.append({
            "dx": dx,
            "L": res.meta["grid.L"],
            "dt": res.meta["dt"],
            "periods": cfg.periods,
            "final_delta_os": float(d[-1]) if d.size else math.nan,
            "max_delta_os": float(d.max()) if d.size else math.nan,
            "late_mean_delta_os": float(half.mean()) if half.size else math.nan,
            "status": res.status,
        })
        if write:
            path = os.path.join(cfg.outdir, f"soliton_dx{_spacing_tag(dx)}.csv")
            atomic_write(path, res.to_csv())
            out.paths.append(path)
    if write:
        path = os.path.join(cfg.outdir, "soliton_summary.csv")
        atomic_write(path, out.summary_csv())
        out.paths.append(path)
    return out


def experiment_vortex_stability(cfg: RunConfig, threads: int | None = None, write: bool = True) -> ExperimentOutput:
    """Per-dr vortex runs; each stops a few periods after rupture unless
    ``stop_after`` is configured."""
    profile = obtain_profile(cfg, cfg.ell, cfg.h)
    jobs = []
    for dr in cfg.dr_list:
        stop = cfg.stop_after
        if stop is None:
            # about three periods of samples past rupture
            _, dt, _ = vortex_grid(cfg, float(dr), TheoreticalOrbit("rotating-vortex", profile))
            stop = max(1, int(round(3.0 * profile.period / (dt * cfg.monitor_every))))
        jobs.append((cfg, float(dr), profile, stop))
    runs = map_jobs(_vortex_job, jobs, threads)
    out = ExperimentOutput(runs=runs)
    for (_, dr, _, _), res in zip(jobs, runs):
        rep = drift_report(res.records, cfg.rupture_threshold, res.period) if len(res.records) > 1 else None
        d = res.delta()
        out.summary.append({
            "dr": dr,
            "dt": res.meta["dt"],
            "period": res.period,
            "rupture_time": rep.rupture_time if rep and rep.rupture_time is not None else math.nan,
            "rupture_periods": rep.rupture_periods if rep and rep.rupture_periods is not None else math.nan,
            "final_delta_os": float(d[-1]) if d.size else math.nan,
            "status": res.status,
        })
        if write:
            path = os.path.join(cfg.outdir, f"vortex_l{cfg.ell}_h{cfg.h:g}_dr{_spacing_tag(dr)}.csv")
            atomic_write(path, res.to_csv())
            out.paths.append(path)
    if write:
        path = os.path.join(cfg.outdir, f"vortex_l{cfg.ell}_h{cfg.h:g}_summary.csv")
        atomic_write(path, out.summary_csv())
        out.paths.append(path)
    return out


# --------------------------------------------------------------------------
# reading runs back


def read_run(path: str):
    """(records, header) from a run.csv; header maps keys to raw strings."""
    header = {}
    records = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, sep, val = line[1:].strip().partition(": ")
            if sep:
                header[key] = val
        elif line.strip():
            body.append(line)
    reader = csv.DictReader(body)
    for i, row in enumerate(reader):
        records.append(DiagnosticsRecord(
            t=float(row["t"]), energy=float(row["energy"]), charge=float(row["charge"]),
            angmom=float(row["angmom"]), momentum_x=0.0, momentum_y=0.0,
            delta_os=float(row["delta_os"]), n=i,
        ))
    return records, header


def config_from_header(header: dict) -> RunConfig:
    """The RunConfig recorded in a run.csv header."""
    keys = set(RunConfig.keys())
    data = {k: yaml.safe_load(v) for k, v in header.items() if k in keys}
    return RunConfig.from_mapping(data)
