"""Staggered leap-frog integration of psi_tt = Lap psi - W'(psi).

State at step n holds psi^n and the half-step velocity psi_t^(n-1/2). One step
is a kick followed by a drift:

    psi_t^(n+1/2) = psi_t^(n-1/2) + dt (Lap psi^n - W'(psi^n))
    psi^(n+1)     = psi^n + dt psi_t^(n+1/2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

from hylomorph.functionals import RadialProfile
from hylomorph.grids import PolarGrid, TorusGrid
from hylomorph.potential import PotentialSpec

Grid = Union[TorusGrid, PolarGrid]


class EvolutionBlowUp(FloatingPointError):
    def __init__(self, step: int, records=None, state=None):
        super().__init__(f"evolution blow-up at step {step}")
        self.step = step
        self.records = records or []
        self.state = state


class OrbitSupportOverflow(ValueError):
    pass


@dataclass
class FieldState:
    grid: Grid
    psi: np.ndarray
    psi_t: np.ndarray  # velocity at (n - 1/2) dt
    n: int
    dt: float

    @property
    def t(self) -> float:
        return self.n * self.dt

    def copy(self) -> "FieldState":
        return replace(self, psi=self.psi.copy(), psi_t=self.psi_t.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.psi).all() and np.isfinite(self.psi_t).all())


# --------------------------------------------------------------------------
# theoretical orbits


@dataclass
class TheoreticalOrbit:
    """Exact solution built from a radial profile.

    ``translating-soliton`` boosts the standing wave u(r) exp(-i omega t) to
    speed ``v`` along x; ``rotating-vortex`` is u(r) exp(i(ell theta - omega t)).
    """

    kind: str
    profile: RadialProfile
    v: float = 0.0
    support_tol: float = 1e-8
    _spline: Optional[CubicSpline] = field(default=None, init=False, repr=False, compare=False)
    _samples: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("translating-soliton", "rotating-vortex"):
            raise ValueError(f"unknown orbit kind {self.kind!r}")
        if not abs(self.v) < 1:
            raise ValueError(f"boost speed must satisfy |v| < 1, got {self.v}")
        if self.kind == "rotating-vortex" and self.v != 0:
            raise ValueError("rotating vortices are not boosted")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.v * self.v)

    @property
    def omega(self) -> float:
        return self.profile.omega

    @property
    def ell(self) -> int:
        return self.profile.ell if self.kind == "rotating-vortex" else 0

    @property
    def period(self) -> float:
        return 2.0 * math.pi / abs(self.omega)

    @property
    def spline(self) -> CubicSpline:
        if self._spline is None:
            p = self.profile
            bc = ((1, 0.0), "not-a-knot") if p.ell == 0 else "not-a-knot"
            self._spline = CubicSpline(p.r, p.u, bc_type=bc)
        return self._spline

    @property
    def support_radius(self) -> float:
        u = self.profile.u
        idx = np.nonzero(u > self.support_tol * np.max(u))[0]
        return float(self.profile.r[idx[-1] + 1]) if idx.size else 0.0

    def radial(self, rho: np.ndarray):
        """u(rho) and u'(rho), zero beyond the profile grid."""
        rt = self.profile.grid.r_tilde
        inside = rho <= rt
        rr = np.where(inside, rho, rt)
        u = np.where(inside, self.spline(rr), 0.0)
        du = np.where(inside, self.spline(rr, 1), 0.0)
        return u, du


def _check_support(o: TheoreticalOrbit, grid: Grid) -> None:
    R = o.support_radius
    if isinstance(grid, TorusGrid):
        if R >= 0.5 * grid.L:
            raise OrbitSupportOverflow(
                f"orbit support overflow: support radius {R:g} vs half side {0.5 * grid.L:g}"
            )
    elif R > grid.r_max:
        raise OrbitSupportOverflow(
            f"orbit support overflow: support radius {R:g} beyond r_max={grid.r_max:g}"
        )


def eval_orbit(o: TheoreticalOrbit, grid: Grid, t: float):
    """Sample (psi, psi_t) of the orbit at time t on the grid."""
    _check_support(o, grid)
    om = o.omega
    if o.kind == "translating-soliton":
        if not isinstance(grid, TorusGrid):
            raise ValueError("translating solitons live on the torus")
        g, v = o.gamma, o.v
        X, Y = grid.mesh()
        xc = grid.wrap(X - v * t)
        rho = np.sqrt((g * xc) ** 2 + Y**2)
        u, du = o.radial(rho)
        phase = np.exp(1j * (-(om / g) * t + om * g * v * xc))
        with np.errstate(invalid="ignore", divide="ignore"):
            drho_dt = np.where(rho > 0, -(g * g) * v * xc / rho, 0.0)
        psi = u * phase
        psi_t = (du * drho_dt - 1j * om * g * u) * phase
    else:
        cached = o._samples.get(grid)
        if cached is None:
            if isinstance(grid, PolarGrid):
                R, TH = grid.mesh()
            else:
                X, Y = grid.mesh()
                R, TH = np.hypot(X, Y), np.arctan2(Y, X)
            u, _ = o.radial(R)
            cached = o._samples[grid] = u * np.exp(1j * o.ell * TH)
        psi = cached * np.exp(-1j * om * t)
        psi_t = -1j * om * psi
    grid.enforce_bc(psi)
    grid.enforce_bc(psi_t)
    return psi, psi_t


def init_from_orbit(o: TheoreticalOrbit, grid: Grid, dt: float) -> FieldState:
    psi, _ = eval_orbit(o, grid, 0.0)
    _, psi_t = eval_orbit(o, grid, -0.5 * dt)
    return FieldState(grid=grid, psi=psi, psi_t=psi_t, n=0, dt=dt)


# --------------------------------------------------------------------------
# stepping


def acceleration(psi: np.ndarray, grid: Grid, pot: PotentialSpec) -> np.ndarray:
    return grid.laplacian(psi) - pot.Wprime(psi)


def leapfrog_step(s: FieldState, pot: PotentialSpec) -> FieldState:
    psi_t = s.psi_t + s.dt * acceleration(s.psi, s.grid, pot)
    s.grid.enforce_bc(psi_t)
    psi = s.psi + s.dt * psi_t
    out = FieldState(grid=s.grid, psi=psi, psi_t=psi_t, n=s.n + 1, dt=s.dt)
    if not out.is_finite():
        raise EvolutionBlowUp(out.n, state=out)
    return out


def reverse(s: FieldState, pot: PotentialSpec) -> FieldState:
    """Time-reversed state: advance the velocity to n+1/2, then negate it.

    Stepping the result k times retraces psi^(n-1), ..., psi^(n-k).
    """
    psi_t = s.psi_t + s.dt * acceleration(s.psi, s.grid, pot)
    s.grid.enforce_bc(psi_t)
    return FieldState(grid=s.grid, psi=s.psi.copy(), psi_t=-psi_t, n=s.n, dt=s.dt)


@dataclass
class DiagnosticsPlan:
    """What ``run`` measures and how often.

    With ``stop_after`` set, the run ends that many recorded samples after
    delta_OS first exceeds ``rupture_threshold``.
    """

    cadence: int = 10
    orbit: Optional[TheoreticalOrbit] = None
    rupture_threshold: Optional[float] = None
    stop_after: Optional[int] = None

    def __post_init__(self):
        if self.cadence < 1:
            raise ValueError("monitor cadence must be >= 1")


def run(s: FieldState, pot: PotentialSpec, steps: int, monitors: DiagnosticsPlan | None = None):
    """Advance ``steps`` leap-frog steps, recording diagnostics every cadence.

    Returns (final state, records). The input state is not modified.
    """
    from hylomorph.diagnostics import OrbitReference, make_record

    monitors = monitors or DiagnosticsPlan()
    state = s.copy()
    if steps <= 0:
        return state, []
    grid, dt = state.grid, state.dt
    ref = OrbitReference(monitors.orbit, grid, dt) if monitors.orbit is not None else None
    psi, psi_t = state.psi, state.psi_t
    records = []
    ruptured_at = None
    n0 = state.n
    for k in range(steps + 1):
        acc = acceleration(psi, grid, pot)
        new_t = psi_t + dt * acc
        grid.enforce_bc(new_t)
        n = n0 + k
        if k % monitors.cadence == 0 or k == steps:
            cur = FieldState(grid=grid, psi=psi, psi_t=psi_t, n=n, dt=dt)
            if not cur.is_finite():
                raise EvolutionBlowUp(n, records, cur)
            rec = make_record(cur, pot, new_t, ref)
            records.append(rec)
            thr = monitors.rupture_threshold
            if thr is not None and ruptured_at is None and rec.delta_os > thr:
                ruptured_at = len(records)
            if (
                ruptured_at is not None
                and monitors.stop_after is not None
                and len(records) - ruptured_at >= monitors.stop_after
            ):
                return cur.copy(), records
        if k == steps:
            break
        psi_t = new_t
        psi = psi + dt * psi_t
    return FieldState(grid=grid, psi=psi, psi_t=psi_t, n=n0 + steps, dt=dt), records
