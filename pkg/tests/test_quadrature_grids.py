import math

import numpy as np
import pytest

from hylomorph.grids import GridError, PolarGrid, TorusGrid
from hylomorph.quadrature import QuadratureParityError, periodic_simpson_weights, simpson, simpson_weights


def test_simpson_exact_on_cubics():
    x = np.linspace(0, 3, 7)
    f = 2 * x**3 - x + 1
    assert simpson(f, 0.5) == pytest.approx(2 * 81 / 4 - 4.5 + 3, rel=1e-14)


def test_simpson_fourth_order():
    errs = []
    for n in (16, 32):
        x = np.linspace(0, 1, n + 1)
        errs.append(abs(simpson(np.exp(x), 1 / n) - (math.e - 1)))
    assert errs[0] / errs[1] >= 12


def test_simpson_parity():
    with pytest.raises(QuadratureParityError):
        simpson_weights(5, 0.1)


def test_periodic_weights_sum():
    w = periodic_simpson_weights(10, 0.3)
    assert w.sum() == pytest.approx(3.0)
    assert w[0] == pytest.approx(0.2) and w[1] == pytest.approx(0.4)


def test_torus_grid_basics():
    g = TorusGrid(20.0, 0.5)
    assert g.Nx == 40 and g.x[0] == -10.0
    assert g.weights.sum() == pytest.approx(400.0)
    with pytest.raises(QuadratureParityError):
        TorusGrid(21.0, 1.0)
    with pytest.raises(GridError):
        TorusGrid(10.0, 3.0)


def test_torus_laplacian_symbol():
    g = TorusGrid(16.0, 0.5)
    X, Y = g.mesh()
    k = 2 * math.pi / 16.0 * 3
    psi = np.exp(1j * k * X)
    sym = -(2 / g.dx * math.sin(k * g.dx / 2)) ** 2
    assert np.allclose(g.laplacian(psi), sym * psi, atol=1e-12)


def test_polar_grid_build_rules():
    g = PolarGrid.build(40.0, 1.0)
    assert g.r_min == 0.5 and g.Nr % 2 == 0 and g.Ntheta % 2 == 0
    assert g.r_max >= 40.0
    assert g.r_max * g.dtheta <= g.dr
    assert (g.Ntheta - 2) * g.dr < 2 * math.pi * g.r_max  # smallest such even count
    assert g.r_min + g.Nr * g.dr == pytest.approx(g.r_max)


def test_polar_laplacian_of_quadratic():
    g = PolarGrid.build(10.0, 0.25)
    R, TH = g.mesh()
    psi = (R * np.cos(TH)) ** 2 + (R * np.sin(TH)) ** 2  # x^2 + y^2, Laplacian 4
    lap = g.laplacian(psi)
    assert np.allclose(lap[1:-1], 4.0, atol=1e-9)
    assert np.all(lap[0] == 0) and np.all(lap[-1] == 0)


def test_polar_laplacian_symmetric_in_cell_areas():
    g = PolarGrid.build(6.0, 0.5)
    rng = np.random.default_rng(1)
    a = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    b = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    for f in (a, b):
        g.enforce_bc(f)
    w = g.volume_weights
    lhs = np.sum(w * np.conj(a) * g.laplacian(b))
    rhs = np.sum(w * np.conj(g.laplacian(a)) * b)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_max_eigenvalue_bounds_spectrum():
    g = PolarGrid.build(8.0, 1.0)
    rng = np.random.default_rng(2)
    v = g.enforce_bc(rng.normal(size=g.shape))
    w = g.volume_weights
    for _ in range(300):  # power iteration on -Lap in the weighted inner product
        v = -g.laplacian(v)
        v /= math.sqrt(np.sum(w * v * v))
    rayleigh = -np.sum(w * v * g.laplacian(v))
    assert rayleigh <= g.max_eigenvalue()
    assert rayleigh >= 0.5 * g.max_eigenvalue()
