import json
import math

import numpy as np
import pytest

from hylomorph.diagnostics import (
    DegenerateNormalization,
    DiagnosticsRecord,
    OrbitReference,
    drift_report,
    first_integrals,
    relative_deviation,
    rupture_time,
)
from hylomorph.evolver import FieldState, TheoreticalOrbit, eval_orbit, init_from_orbit
from hylomorph.functionals import RadialGrid, RadialProfile
from hylomorph.grids import PolarGrid, TorusGrid


def test_vortex_charge_and_angular_momentum(logpot, small_vortex):
    g = PolarGrid.build(64.0, 0.5)
    o = TheoreticalOrbit("rotating-vortex", small_vortex)
    fi = first_integrals(init_from_orbit(o, g, 1e-3), logpot)
    assert fi["charge"] == pytest.approx(small_vortex.h, rel=2e-3)
    assert fi["angmom"] == pytest.approx(small_vortex.ell * fi["charge"], rel=1e-3)
    assert abs(fi["momentum_x"]) < 1e-8 * fi["energy"] and abs(fi["momentum_y"]) < 1e-8 * fi["energy"]


def test_real_static_field_carries_no_charge(logpot, rng):
    g = TorusGrid(16.0, 1.0)
    psi = rng.normal(size=g.shape).astype(complex)
    fi = first_integrals(FieldState(g, psi, np.zeros(g.shape, complex), 0, 0.1), logpot)
    assert fi["charge"] == 0.0

    pg = PolarGrid.build(10.0, 1.0)
    r, _ = np.meshgrid(pg.r, np.zeros(pg.Ntheta), indexing="ij")
    psi = np.exp(-r**2 / 8).astype(complex)
    pg.enforce_bc(psi)
    fi = first_integrals(FieldState(pg, psi, np.zeros(pg.shape, complex), 0, 0.1), logpot)
    assert fi["charge"] == 0.0 and fi["angmom"] == 0.0


def test_translation_equivariance(logpot, rng):
    g = TorusGrid(16.0, 1.0)
    psi = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    vel = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    a = first_integrals(FieldState(g, psi, vel, 0, 0.1), logpot)
    b = first_integrals(FieldState(g, np.roll(psi, (3, -5), (0, 1)), np.roll(vel, (3, -5), (0, 1)), 0, 0.1), logpot)
    for k in ("energy", "charge", "momentum_x", "momentum_y"):
        assert b[k] == pytest.approx(a[k], rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("alpha", [math.pi, 0.5, 2.0])
def test_delta_under_global_phase(small_soliton, alpha):
    g = TorusGrid(64.0, 1.0)
    o = TheoreticalOrbit("translating-soliton", small_soliton, v=0.5)
    ref = OrbitReference(o, g, 0.1)
    s = init_from_orbit(o, g, 0.1)
    c = np.exp(1j * alpha)
    both = FieldState(g, c * s.psi, c * s.psi_t, 0, 0.1)
    assert ref.delta(both) == pytest.approx(2 * abs(c - 1), rel=1e-12)
    first_only = FieldState(g, c * s.psi, s.psi_t, 0, 0.1)
    assert ref.delta(first_only) == pytest.approx(abs(c - 1), rel=1e-12)


def test_phase_flip_first_term_is_two(small_soliton):
    g = TorusGrid(64.0, 1.0)
    o = TheoreticalOrbit("translating-soliton", small_soliton)
    s = init_from_orbit(o, g, 0.1)
    assert OrbitReference(o, g, 0.1).delta(FieldState(g, -s.psi, s.psi_t, 0, 0.1)) == pytest.approx(2.0, rel=1e-14)


def test_delta_tracks_the_clock(small_soliton):
    g = TorusGrid(64.0, 1.0)
    o = TheoreticalOrbit("translating-soliton", small_soliton, v=0.5)
    ref = OrbitReference(o, g, 0.1)
    psi, _ = eval_orbit(o, g, 3.0)
    _, vel = eval_orbit(o, g, 2.95)
    assert ref.delta(FieldState(g, psi, vel, 30, 0.1)) < 1e-12


def test_degenerate_normalization():
    rg = RadialGrid(0.5, 20)
    zero = RadialProfile(rg, np.zeros(21), 0, 10.0, -1.0)
    o = TheoreticalOrbit("translating-soliton", zero)
    with pytest.raises(DegenerateNormalization, match="degenerate orbit normalization"):
        OrbitReference(o, TorusGrid(32.0, 1.0), 0.1)


def records(deltas, energy=None):
    out = []
    for n, d in enumerate(deltas):
        e = 3.0 if energy is None else energy[n]
        out.append(DiagnosticsRecord(t=0.5 * n, energy=e, charge=2.0, angmom=0.0,
                                     momentum_x=0.0, momentum_y=0.0, delta_os=d, n=n))
    return out


def test_drift_report_constant_series():
    rep = drift_report(records([0.0] * 6), 0.5, period=2.0)
    assert rep.stats["energy"] == (3.0, 0.0, 0.0)
    assert rep.stats["angmom"] == (0.0, 0.0, 0.0)
    assert rep.rupture_time is None and rep.rupture_periods is None
    json.dumps(rep.to_dict())


def test_drift_report_crossing_at_fifth_record():
    recs = records([0.0, 0.1, 0.2, 0.4, 0.6, 0.3, 0.9], energy=[1, 2, 3, 2, 1, 2, 3])
    rep = drift_report(recs, 0.5, period=0.25)
    assert rep.rupture_time == recs[4].t == rupture_time(recs, 0.5)
    assert rep.rupture_periods == pytest.approx(8.0)
    mean = 2.0
    assert rep.stats["energy"] == pytest.approx((mean, -0.5, 0.5))
    d = rep.to_dict()
    assert d["rupture_time"] == 2.0 and d["integrals"]["charge"]["max_rel_dev"] == 0.0
    assert any(line.startswith("rupture_time") for line in rep.lines())
    assert drift_report(recs, 1.0).rupture_time is None


def test_relative_deviation_and_short_series():
    assert relative_deviation([1.0, 3.0]) == (2.0, -0.5, 0.5)
    with pytest.raises(ValueError):
        drift_report(records([0.0]))
