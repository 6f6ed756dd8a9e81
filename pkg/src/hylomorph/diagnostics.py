"""First integrals, orbital-stability norm and drift statistics for field runs.

Integrals pair psi^n with the time-centred velocity
(psi_t^(n-1/2) + psi_t^(n+1/2)) / 2 to remove the half-step staggering bias.
They are summed with the grid's cell areas, the inner product in which the
discrete Laplacian is symmetric, and the gradient energy is written as
-1/2 Re <psi, Lap psi>. With that pairing the leap-frog charge is conserved to
round-off. The stability norm uses Simpson quadrature.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from hylomorph.evolver import FieldState, TheoreticalOrbit, acceleration, eval_orbit
from hylomorph.functionals import discrete_h1_norm, discrete_l2_norm
from hylomorph.potential import PotentialSpec

INTEGRALS = ("energy", "charge", "angmom", "momentum_x", "momentum_y")


class DegenerateNormalization(ZeroDivisionError):
    pass


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    charge: float
    angmom: float
    momentum_x: float
    momentum_y: float
    delta_os: float = 0.0
    n: int = 0

    def as_row(self) -> dict:
        return asdict(self)


def centred_velocity(s: FieldState, pot: PotentialSpec, psi_t_next=None) -> np.ndarray:
    if psi_t_next is None:
        psi_t_next = s.psi_t + s.dt * acceleration(s.psi, s.grid, pot)
        s.grid.enforce_bc(psi_t_next)
    return 0.5 * (s.psi_t + psi_t_next)


def first_integrals(s: FieldState, pot: PotentialSpec, psi_t_next=None) -> dict:
    """Energy, charge, angular momentum (z) and momentum of a field state."""
    grid, psi = s.grid, s.psi
    w = grid.volume_weights
    v = centred_velocity(s, pot, psi_t_next)
    g1, g2 = grid.gradient(psi)
    dens = 0.5 * (np.abs(v) ** 2 - (np.conj(psi) * grid.laplacian(psi)).real) + pot.W(psi)
    energy = float(np.sum(w * dens))
    charge = float(np.sum(w * (v * np.conj(psi)).imag))
    angmom = float(np.sum(w * (grid.angular_derivative(psi) * np.conj(v)).real))
    if hasattr(grid, "L"):
        px = -float(np.sum(w * (v * np.conj(g1)).real))
        py = -float(np.sum(w * (v * np.conj(g2)).real))
    else:
        # polar components rotated back to Cartesian axes
        _, TH = grid.mesh()
        c, sn = np.cos(TH), np.sin(TH)
        gx, gy = c * g1 - sn * g2, sn * g1 + c * g2
        px = -float(np.sum(w * (v * np.conj(gx)).real))
        py = -float(np.sum(w * (v * np.conj(gy)).real))
    return {"energy": energy, "charge": charge, "angmom": angmom, "momentum_x": px, "momentum_y": py}


class OrbitReference:
    """Orbit sampler with the fixed normalisations of delta_OS cached."""

    def __init__(self, orbit: TheoreticalOrbit, grid, dt: float):
        self.orbit, self.grid, self.dt = orbit, grid, dt
        psi0, _ = eval_orbit(orbit, grid, 0.0)
        _, vel = eval_orbit(orbit, grid, -0.5 * dt)
        self.h1_ref = discrete_h1_norm(psi0, grid)
        self.l2_ref = discrete_l2_norm(vel, grid)
        if not (self.h1_ref > 0 and self.l2_ref > 0):
            raise DegenerateNormalization("degenerate orbit normalization")

    def delta(self, s: FieldState) -> float:
        psi_th, _ = eval_orbit(self.orbit, self.grid, s.n * s.dt)
        _, vel_th = eval_orbit(self.orbit, self.grid, (s.n - 0.5) * s.dt)
        return (
            discrete_h1_norm(s.psi - psi_th, self.grid) / self.h1_ref
            + discrete_l2_norm(s.psi_t - vel_th, self.grid) / self.l2_ref
        )


def orbital_stability_norm(s: FieldState, o: TheoreticalOrbit) -> float:
    """H1 distance of psi^n plus L2 distance of psi_t^(n-1/2) to the orbit,
    each scaled by the orbit's own norm at the start."""
    return OrbitReference(o, s.grid, s.dt).delta(s)


def make_record(s: FieldState, pot: PotentialSpec, psi_t_next=None, ref: Optional[OrbitReference] = None):
    fi = first_integrals(s, pot, psi_t_next)
    d = ref.delta(s) if ref is not None else 0.0
    return DiagnosticsRecord(t=s.t, delta_os=d, n=s.n, **fi)


# --------------------------------------------------------------------------
# drift statistics


@dataclass
class DriftReport:
    stats: dict  # name -> (time average, min rel. deviation, max rel. deviation)
    rupture_time: Optional[float]
    rupture_threshold: float
    period: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def rupture_periods(self) -> Optional[float]:
        if self.rupture_time is None or not self.period:
            return None
        return self.rupture_time / self.period

    def to_dict(self) -> dict:
        return {
            "integrals": {
                k: {"mean": m, "min_rel_dev": lo, "max_rel_dev": hi}
                for k, (m, lo, hi) in self.stats.items()
            },
            "rupture_time": self.rupture_time,
            "rupture_threshold": self.rupture_threshold,
            "period": self.period,
            "rupture_periods": self.rupture_periods,
            "time_convention": "T = 2 pi / |omega|",
            **self.extra,
        }

    def lines(self) -> list[str]:
        out = []
        for k, (m, lo, hi) in self.stats.items():
            out.append(f"{k + '.mean':<22} {m:.12g}")
            out.append(f"{k + '.min_rel_dev':<22} {lo:.6e}")
            out.append(f"{k + '.max_rel_dev':<22} {hi:.6e}")
        out.append(f"{'rupture_threshold':<22} {self.rupture_threshold:g}")
        out.append(f"{'rupture_time':<22} {self.rupture_time}")
        if self.period:
            out.append(f"{'period':<22} {self.period:.12g}")
            out.append(f"{'rupture_periods':<22} {self.rupture_periods}")
        return out


def relative_deviation(values) -> tuple[float, float, float]:
    """(mean, min, max) of (x - mean) / |mean|; raw deviations if the mean is 0."""
    x = np.asarray(values, dtype=float)
    mean = float(np.mean(x))
    scale = abs(mean) if mean != 0 else 1.0
    dev = (x - mean) / scale
    return mean, float(np.min(dev)), float(np.max(dev))


def drift_report(records, rupture_threshold: float = 0.5, period: float | None = None, names=None) -> DriftReport:
    if len(records) < 2:
        raise ValueError("drift report needs at least two records")
    names = names or ("energy", "charge", "angmom")
    stats = {k: relative_deviation([getattr(r, k) for r in records]) for k in names}
    rupture = next((r.t for r in records if r.delta_os > rupture_threshold), None)
    return DriftReport(stats=stats, rupture_time=rupture, rupture_threshold=rupture_threshold, period=period)


def rupture_time(records, threshold: float = 0.5) -> Optional[float]:
    return next((r.t for r in records if r.delta_os > threshold), None)
