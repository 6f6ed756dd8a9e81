import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from hylomorph.functionals import (
    DegenerateProfileError,
    ProfileError,
    RadialGrid,
    RadialProfile,
    alpha0_sampled,
    charge_integral,
    charge_term,
    discrete_h1_norm,
    discrete_l2_norm,
    energy,
    hylomorphy_probe,
    hylomorphy_ratio,
    j_functional,
    omega_from_charge,
    read_profile,
    write_profile,
)
from hylomorph.grids import PolarGrid, TorusGrid
from hylomorph.quadrature import QuadratureParityError


def bump(grid, ell=1, c=3.0, w=1.5, A=1.0):
    r = grid.r
    u = A * (r / c) ** abs(ell) * np.exp(-((r - c) ** 2) / w**2)
    u[-1] = 0.0
    if ell:
        u[0] = 0.0
    return u


def test_grid_parity():
    with pytest.raises(QuadratureParityError):
        RadialGrid(0.1, 101)
    assert RadialGrid.from_extent(10.0, 0.1).J == 100


def test_charge_of_plateau_converges_to_3pi():
    errs = []
    for dr in (0.01, 0.005, 0.0025):
        g = RadialGrid.from_extent(4.0, dr)
        r = g.r
        u = np.clip(np.minimum((r - 1 + dr) / dr, (2 + dr - r) / dr), 0, 1)
        p = RadialProfile.from_u(g, u, 1, 1.0)
        errs.append(abs(charge_integral(p) - 3 * math.pi))
    assert errs[-1] < 0.02
    assert errs[0] > errs[1] > errs[2]


def test_simpson_exact_on_cubic_integrand():
    g = RadialGrid(0.5, 8)
    R = g.r_tilde
    u = np.sqrt(g.r * (R - g.r))  # u^2 r is a cubic
    p = RadialProfile.from_u(g, u, 1, 1.0)
    assert charge_integral(p) == pytest.approx(2 * math.pi * R**4 / 12, rel=1e-14)


def test_zero_profile_is_degenerate():
    g = RadialGrid(0.1, 10)
    with pytest.raises(DegenerateProfileError):
        RadialProfile.from_u(g, np.zeros(11), 1, 5.0)


def test_omega_examples():
    g = RadialGrid(0.5, 8)
    R = g.r_tilde
    u = np.sqrt(g.r * (R - g.r))
    q = 2 * math.pi * R**4 / 12
    u100 = u * math.sqrt(100 / q)
    p = RadialProfile.from_u(g, u100, 1, 500.0)
    assert omega_from_charge(p) == pytest.approx(-5.0, rel=1e-13)
    assert omega_from_charge(p, 100.0) == pytest.approx(-1.0, rel=1e-13)


def test_energy_of_zero_field():
    g = RadialGrid(0.1, 10)
    p = RadialProfile(grid=g, u=np.zeros(11), ell=2, h=1.0, omega=-0.5)
    from hylomorph import make_log_potential

    assert energy(p, make_log_potential()) == 0.0


def test_energy_against_trapezoid_oracle(logpot):
    g = RadialGrid.from_extent(20.0, 0.01)
    u = 0.8 * np.exp(-(g.r**2) / 4)
    u[-1] = 0.0
    p = RadialProfile.from_u(g, u, 0, 50.0)
    # oracle: analytic integrand, trapezoid on a 10x finer grid
    r = np.linspace(0, 20, 20001)
    uf = 0.8 * np.exp(-(r**2) / 4)
    dens = 0.5 * (r / 2 * uf) ** 2 + 0.5 * p.omega**2 * uf**2 + logpot.F(uf)
    oracle = 2 * math.pi * trapezoid(dens * r, r)
    assert energy(p, logpot) == pytest.approx(oracle, rel=1e-6)


def test_energy_increases_with_ell(logpot):
    g = RadialGrid.from_extent(15.0, 0.05)
    u = bump(g, ell=1)
    es = [energy(RadialProfile.from_u(g, u, ell, 10.0), logpot) for ell in (1, 2, 3, 5)]
    assert all(a < b for a, b in zip(es, es[1:]))


def test_j_identity_random_bumps(logpot, rng):
    g = RadialGrid.from_extent(20.0, 0.05)
    for _ in range(10):
        ell = int(rng.integers(0, 5))
        u = bump(g, ell or 1, c=rng.uniform(2, 8), w=rng.uniform(1, 3), A=rng.uniform(0.1, 4))
        p = RadialProfile.from_u(g, u, ell, rng.uniform(5, 700))
        E = energy(p, logpot)
        assert abs(j_functional(p, logpot) - E) <= 1e-10 * abs(E)


def test_charge_term_bound():
    h, m = 37.0, 1.3
    assert charge_term(h / m, h, m) == pytest.approx(m, abs=1e-12)
    for q in (0.1, 10.0, 100.0):
        assert charge_term(q, h, m) >= m


def test_charge_term_equality_on_scaled_profile(linpot):
    g = RadialGrid.from_extent(10.0, 0.05)
    u = bump(g)
    h = 40.0
    q = charge_integral(RadialProfile.from_u(g, u, 1, h))
    u *= math.sqrt(h / linpot.m / q)
    q2 = charge_integral(RadialProfile.from_u(g, u, 1, h))
    assert charge_term(q2, h, linpot.m) == pytest.approx(linpot.m, abs=1e-12)


def test_homogeneity(linpot):
    g = RadialGrid.from_extent(12.0, 0.05)
    u = bump(g, ell=0 or 1)
    h = 20.0
    base = RadialProfile.from_u(g, u, 0, h)
    c = 1.7
    scaled = RadialProfile.from_u(g, c * u, 0, h)
    q0, q1 = charge_integral(base), charge_integral(scaled)
    rest0 = j_functional(base, linpot) - 0.5 * (h * h / q0 + q0)
    rest1 = j_functional(scaled, linpot) - 0.5 * (h * h / q1 + q1)
    assert rest1 == pytest.approx(c * c * rest0, rel=1e-12)
    assert q1 == pytest.approx(c * c * q0, rel=1e-12)


def test_lambda_at_least_mass_without_nonlinearity(linpot, rng):
    g = RadialGrid.from_extent(12.0, 0.05)
    for _ in range(5):
        p = RadialProfile.from_u(g, bump(g, A=rng.uniform(0.1, 3)), 1, rng.uniform(1, 100))
        assert hylomorphy_ratio(p, linpot) >= linpot.m


def test_dilation_scales_charge():
    g = RadialGrid.from_extent(40.0, 0.02)
    base = lambda r: np.exp(-((r - 3) ** 2))
    lam = 2.0
    q1 = charge_integral(RadialProfile.from_u(g, base(g.r), 1, 1.0))
    q2 = charge_integral(RadialProfile.from_u(g, base(g.r / lam), 1, 1.0))
    assert q2 == pytest.approx(lam**2 * q1, rel=1e-8)


def test_zero_padding_invariance(logpot):
    g = RadialGrid.from_extent(10.0, 0.05)
    u = bump(g, c=3, w=1)
    u[g.r > 8] = 0.0
    p = RadialProfile.from_u(g, u, 1, 30.0)
    g2 = RadialGrid(g.dr, g.J + 40)
    p2 = RadialProfile.from_u(g2, np.concatenate([u, np.zeros(40)]), 1, 30.0)
    assert charge_integral(p2) == pytest.approx(charge_integral(p), rel=1e-14)
    assert energy(p2, logpot) == pytest.approx(energy(p, logpot), rel=1e-14)


def test_validate():
    g = RadialGrid(0.1, 10)
    u = np.linspace(0, 1, 11)
    with pytest.raises(ProfileError):
        RadialProfile.from_u(g, u, 1, 1.0).validate()
    u[-1] = 0.0
    RadialProfile.from_u(g, u, 1, 1.0).validate()
    bad = RadialProfile(grid=g, u=u, ell=1, h=1.0, omega=-1.0)
    with pytest.raises(ProfileError):
        bad.validate()


def test_alpha0_sampled_log(logpot):
    a0, s = alpha0_sampled(logpot)
    assert s == pytest.approx(10.0)
    assert a0 == pytest.approx(2 * (10 - math.log(11)) / 100, rel=1e-12)


def test_probe_decreases(logpot):
    a0, s0 = alpha0_sampled(logpot)
    seq = hylomorphy_probe(logpot, s0, [10, 30, 100])
    vals = [a for _, a in seq]
    assert vals[0] > vals[1] > vals[2] > a0


def test_probe_gradient_term_oracle(logpot):
    # closed form of the piecewise-linear annulus: gradient + centrifugal + potential over charge
    s0, R = 10.0, 30.0
    grad = 0.5 * s0**2 * ((R**2 - (R - 1) ** 2) / 2 + ((2 * R + 1) ** 2 - (2 * R) ** 2) / 2)
    from scipy.integrate import quad

    def v(r):
        if r < R:
            return s0 * (r - R + 1)
        if r <= 2 * R:
            return s0
        return s0 * (2 * R + 1 - r)

    pts = [R - 1, R, 2 * R, 2 * R + 1]
    num = grad
    den = 0.0
    for a, b in zip(pts, pts[1:]):
        num += quad(lambda r: r * (0.5 * v(r) ** 2 / r**2 + float(logpot.F(v(r)))), a, b, epsabs=0, epsrel=1e-13)[0]
        den += quad(lambda r: r * 0.5 * v(r) ** 2, a, b, epsabs=0, epsrel=1e-13)[0]
    (_, got), = hylomorphy_probe(logpot, s0, [R])
    assert got == pytest.approx(num / den, rel=1e-9)


def test_probe_without_nonlinearity(linpot):
    with pytest.raises(ValueError, match="hylomorphy point invalid"):
        hylomorphy_probe(linpot, 1.0, [10])


def test_probe_alpha_at_least_mass_squared():
    from hylomorph.functionals import annulus_alpha
    from hylomorph import make_quadratic_potential

    pot = make_quadratic_potential(1.5)
    for R in (10, 30, 100):
        assert annulus_alpha(pot, 1.0, R) >= 1.5**2


def test_norms_on_torus():
    g = TorusGrid(20.0, 0.5)
    assert discrete_l2_norm(np.zeros(g.shape), g) == 0.0
    c = 0.3 - 0.4j
    assert discrete_l2_norm(np.full(g.shape, c), g) == pytest.approx(abs(c) * 20.0, rel=1e-14)
    X, Y = g.mesh()
    kx, ky = 2 * math.pi / 20 * 2, 2 * math.pi / 20 * 5
    psi = np.exp(1j * (kx * X + ky * Y))
    kd2 = (math.sin(kx * g.dx) / g.dx) ** 2 + (math.sin(ky * g.dx) / g.dx) ** 2
    assert discrete_h1_norm(psi, g) ** 2 == pytest.approx(400.0 * (1 + kd2), rel=1e-12)


def test_polar_norm_converges():
    errs = []
    for dr in (0.2, 0.1):
        g = PolarGrid.build(12.0, dr, r_min=0.0)
        R, _ = g.mesh()
        psi = np.exp(-(R**2))
        errs.append(abs(discrete_l2_norm(psi, g) ** 2 - math.pi / 2))
    assert errs[0] / errs[1] >= 12


def test_profile_roundtrip(tmp_path, logpot, rng):
    g = RadialGrid.from_extent(10.0, 0.1)
    u = bump(g) * rng.uniform(0.5, 2.0)
    p = RadialProfile.from_u(g, u, 1, 123.456)
    path = tmp_path / "p.csv"
    write_profile(path, p, logpot.m)
    q = read_profile(path, logpot)
    assert q.h == p.h and q.omega == p.omega and q.ell == 1
    assert np.array_equal(q.u, p.u)
    assert path.read_text().splitlines()[0].startswith("# h=")


def test_read_profile_mass_mismatch(tmp_path, logpot):
    g = RadialGrid(0.1, 10)
    u = np.linspace(0, 1, 11)
    u[-1] = u[0] = 0
    write_profile(tmp_path / "p.csv", RadialProfile.from_u(g, u, 1, 1.0), 2.0)
    with pytest.raises(ProfileError):
        read_profile(tmp_path / "p.csv", logpot)
