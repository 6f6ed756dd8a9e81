"""Reduced functionals on radial profiles and discrete field norms.

Radial integrals are planar: int f dx = 2 pi int_0^R f(r) r dr, evaluated with
composite Simpson on the profile grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from hylomorph.potential import PotentialSpec
from hylomorph.quadrature import QuadratureParityError, simpson, simpson_weights

TWO_PI = 2.0 * math.pi


class DegenerateProfileError(ValueError):
    """Profile with vanishing charge integral."""


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    dr: float
    J: int

    def __post_init__(self):
        if not self.dr > 0:
            raise ProfileError(f"dr must be positive, got {self.dr}")
        if self.J < 4:
            raise ProfileError(f"J must be >= 4, got {self.J}")
        if self.J % 2:
            raise QuadratureParityError(f"quadrature parity error: J={self.J} is odd")

    @classmethod
    def from_extent(cls, r_tilde: float, dr: float) -> "RadialGrid":
        J = int(round(r_tilde / dr))
        J += J % 2
        return cls(dr=dr, J=J)

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(self.J + 1)

    @property
    def r_tilde(self) -> float:
        return self.J * self.dr

    @property
    def weights(self) -> np.ndarray:
        """Planar Simpson weights: int f dx ~ sum(weights * f)."""
        return TWO_PI * simpson_weights(self.J, self.dr) * self.r


@dataclass(frozen=True)
class RadialProfile:
    """Radial amplitude u(r) of psi = u(r) exp(i(ell theta - omega t))."""

    grid: RadialGrid
    u: np.ndarray = field(repr=False)
    ell: int
    h: float
    omega: float

    @classmethod
    def from_u(cls, grid: RadialGrid, u, ell: int, h: float) -> "RadialProfile":
        u = np.asarray(u, dtype=float)
        return cls(grid=grid, u=u, ell=int(ell), h=float(h), omega=_omega(grid, u, h))

    def validate(self, rtol: float = 1e-10) -> None:
        u = self.u
        if u.shape != (self.grid.J + 1,):
            raise ProfileError(f"u has shape {u.shape}, grid needs {(self.grid.J + 1,)}")
        if u[-1] != 0.0:
            raise ProfileError("u must vanish at r = r_tilde")
        if self.ell != 0 and u[0] != 0.0:
            raise ProfileError("u must vanish at r = 0 when ell != 0")
        if np.any(u < 0):
            raise ProfileError("u must be non-negative")
        if self.h <= 0:
            raise ProfileError("charge h must be positive")
        om = _omega(self.grid, u, self.h)
        if abs(self.omega - om) > rtol * abs(om):
            raise ProfileError(f"omega={self.omega} inconsistent with charge (expected {om})")

    def with_u(self, u: np.ndarray) -> "RadialProfile":
        return replace(self, u=u, omega=_omega(self.grid, u, self.h))

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.u))

    @property
    def peak_r(self) -> float:
        return float(self.r[self.peak_index])

    @property
    def peak_u(self) -> float:
        return float(self.u[self.peak_index])

    @property
    def period(self) -> float:
        """Internal phase period 2 pi / |omega|."""
        return TWO_PI / abs(self.omega)


def _charge(grid: RadialGrid, u: np.ndarray) -> float:
    q = float(np.sum(grid.weights * u * u))
    if not q > 0:
        raise DegenerateProfileError("degenerate profile: int u^2 dx = 0")
    return q


def _omega(grid, u, h) -> float:
    return -h / _charge(grid, u)


def charge_integral(p: RadialProfile) -> float:
    """int u^2 dx."""
    return _charge(p.grid, p.u)


def omega_from_charge(p: RadialProfile, h: float | None = None) -> float:
    """Frequency fixed by the charge constraint, -h / int u^2 dx."""
    return _omega(p.grid, p.u, p.h if h is None else h)


def _radial_derivative(p: RadialProfile) -> np.ndarray:
    return np.gradient(p.u, p.grid.dr, edge_order=2)


def _centrifugal(p: RadialProfile) -> np.ndarray:
    r = p.r
    out = np.zeros_like(r)
    out[1:] = p.ell**2 / r[1:] ** 2
    return out


def _local_terms(p: RadialProfile, pot_fn) -> np.ndarray:
    """1/2 u'^2 + 1/2 ell^2 u^2 / r^2 + pot_fn(u); zero centrifugal term at r=0."""
    du = _radial_derivative(p)
    u = p.u
    return 0.5 * du * du + 0.5 * _centrifugal(p) * u * u + pot_fn(u)


def energy(p: RadialProfile, pot: PotentialSpec) -> float:
    """E(u, omega, ell) with the profile's own omega."""
    dens = _local_terms(p, pot.F) + 0.5 * p.omega**2 * p.u**2
    return float(np.sum(p.grid.weights * dens))


def j_functional(p: RadialProfile, pot: PotentialSpec, h: float | None = None) -> float:
    """Energy with omega eliminated through the charge constraint."""
    h = p.h if h is None else h
    q = charge_integral(p)
    g = float(np.sum(p.grid.weights * _local_terms(p, pot.N)))
    return g + 0.5 * (h * h / q + pot.m**2 * q)


def hylomorphy_ratio(p: RadialProfile, pot: PotentialSpec) -> float:
    """Energy-to-charge ratio J_h / h."""
    return j_functional(p, pot) / p.h


def charge_term(q: float, h: float, m: float) -> float:
    """1/2 (h / q + m^2 q / h); bounded below by m, equality at q = h/m."""
    return 0.5 * (h / q + m * m * q / h)


# --------------------------------------------------------------------------
# existence-proof probe


def alpha0_sampled(pot: PotentialSpec, s_max: float = 10.0, n: int = 10_000):
    """Minimum of F(s) / (s^2/2) on a log-spaced grid of (0, s_max].

    Returns (alpha0, argmin).
    """
    s = np.geomspace(s_max * 1e-6, s_max, n)
    ratio = pot.F(s) / (0.5 * s * s)
    k = int(np.argmin(ratio))
    return float(ratio[k]), float(s[k])


def _annulus_pieces(R: float, s0: float):
    """(a, b, value(r), slope) for the pieces of the plateau annulus."""
    return [
        (R - 1.0, R, lambda r: s0 * (r - R + 1.0), s0),
        (R, 2.0 * R, lambda r: np.full_like(r, s0), 0.0),
        (2.0 * R, 2.0 * R + 1.0, lambda r: s0 * (2.0 * R - r + 1.0), -s0),
    ]


def annulus_alpha(pot: PotentialSpec, s0: float, R: float, ell: int = 1, per_unit: int = 200) -> float:
    """alpha(v) = int(1/2|grad v|^2 + 1/2 ell^2 v^2/r^2 + F(v)) / int(v^2/2) for
    the piecewise-linear annulus; Simpson on each smooth piece separately."""
    num = den = 0.0
    for a, b, val, slope in _annulus_pieces(R, s0):
        n = int(math.ceil((b - a) * per_unit))
        n += n % 2
        r = np.linspace(a, b, n + 1)
        v = val(r)
        h = (b - a) / n
        num += simpson(r * (0.5 * slope**2 + 0.5 * ell**2 * v * v / (r * r) + pot.F(v)), h)
        den += simpson(r * 0.5 * v * v, h)
    return num / den


def hylomorphy_probe(
    pot: PotentialSpec,
    s0: float,
    Rn_list,
    ell: int = 1,
) -> list[tuple[float, float]]:
    """alpha along the annulus test functions with plateau ``s0`` and radii Rn."""
    if not float(np.asarray(pot.N(np.array([s0])))[0]) < 0:
        raise ValueError(f"hylomorphy point invalid: N({s0}) >= 0")
    Rn = [float(R) for R in Rn_list]
    if any(R <= 1 for R in Rn) or any(b <= a for a, b in zip(Rn, Rn[1:])):
        raise ValueError("Rn must be increasing and > 1")
    return [(R, annulus_alpha(pot, s0, R, ell)) for R in Rn]


# --------------------------------------------------------------------------
# field norms on 2-D grids


def discrete_l2_norm(psi: np.ndarray, grid) -> float:
    return math.sqrt(float(np.sum(grid.weights * (psi.real**2 + psi.imag**2))))


def discrete_h1_norm(psi: np.ndarray, grid) -> float:
    g1, g2 = grid.gradient(psi)
    dens = np.abs(psi) ** 2 + np.abs(g1) ** 2 + np.abs(g2) ** 2
    return math.sqrt(float(np.sum(grid.weights * dens)))


# --------------------------------------------------------------------------
# profile files


def write_profile(path, p: RadialProfile, m: float) -> None:
    path = Path(path)
    lines = [
        f"# h={p.h!r} ell={p.ell} omega={p.omega!r} m={float(m)!r} dr={p.grid.dr!r} J={p.grid.J}"
    ]
    for r, u in zip(p.r, p.u):
        lines.append(f"{r:.17g},{u:.17g}")
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(path)


def read_profile_header(path) -> dict:
    with open(path) as fh:
        head = fh.readline()
    if not head.startswith("#"):
        raise ProfileError(f"{path}: missing header line")
    out = {}
    for tok in head[1:].split():
        k, _, v = tok.partition("=")
        out[k] = v
    return out


def read_profile(path, pot: PotentialSpec | None = None) -> RadialProfile:
    hdr = read_profile_header(path)
    try:
        h, ell, omega = float(hdr["h"]), int(hdr["ell"]), float(hdr["omega"])
        m, dr, J = float(hdr["m"]), float(hdr["dr"]), int(hdr["J"])
    except KeyError as exc:
        raise ProfileError(f"{path}: header lacks {exc}") from None
    if pot is not None and pot.m != m:
        raise ProfileError(f"{path}: profile mass {m} differs from potential mass {pot.m}")
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    grid = RadialGrid(dr=dr, J=J)
    if data.shape != (J + 1, 2):
        raise ProfileError(f"{path}: expected {J + 1} rows, found {data.shape[0]}")
    return RadialProfile(grid=grid, u=data[:, 1].copy(), ell=ell, h=h, omega=omega)
