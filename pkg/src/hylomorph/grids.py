"""Spatial grids for 2-D fields: a periodic square torus and a polar annulus.

Both expose the same small surface used by the evolver and the diagnostics:
node coordinates, Simpson quadrature weights, the discrete Laplacian, and a
central-difference gradient returning two orthonormal components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hylomorph.quadrature import (
    QuadratureParityError,
    periodic_simpson_weights,
    simpson_weights,
)


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class TorusGrid:
    """Square [-L/2, L/2)^2 with periodic wrap; arrays are indexed [ix, iy]."""

    L: float
    dx: float
    Nx: int = field(init=False)

    def __post_init__(self):
        n = self.L / self.dx
        nx = int(round(n))
        if nx < 2 or abs(n - nx) > 1e-9 * n:
            raise GridError(f"L={self.L} is not an integer multiple of dx={self.dx}")
        if nx % 2:
            raise QuadratureParityError(f"quadrature parity error: Nx={nx} is odd")
        object.__setattr__(self, "Nx", nx)

    @property
    def shape(self):
        return (self.Nx, self.Nx)

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.L + self.dx * np.arange(self.Nx)

    def mesh(self):
        return np.meshgrid(self.x, self.x, indexing="ij")

    @property
    def weights(self) -> np.ndarray:
        w = periodic_simpson_weights(self.Nx, self.dx)
        return np.outer(w, w)

    @property
    def volume_weights(self) -> np.ndarray:
        """Uniform cell areas; the inner product in which the Laplacian is symmetric."""
        return np.full(self.shape, self.dx**2)

    @property
    def area(self) -> float:
        return self.L**2

    def max_eigenvalue(self) -> float:
        """Upper bound on the spectrum of -laplacian."""
        return 8.0 / self.dx**2

    def wrap(self, d):
        """Minimum-image displacement in [-L/2, L/2)."""
        return (d + 0.5 * self.L) % self.L - 0.5 * self.L

    def laplacian(self, psi: np.ndarray) -> np.ndarray:
        s = -4.0 * psi
        s += np.roll(psi, 1, axis=0)
        s += np.roll(psi, -1, axis=0)
        s += np.roll(psi, 1, axis=1)
        s += np.roll(psi, -1, axis=1)
        return s / self.dx**2

    def gradient(self, psi: np.ndarray):
        c = 0.5 / self.dx
        gx = (np.roll(psi, -1, axis=0) - np.roll(psi, 1, axis=0)) * c
        gy = (np.roll(psi, -1, axis=1) - np.roll(psi, 1, axis=1)) * c
        return gx, gy

    def angular_derivative(self, psi: np.ndarray) -> np.ndarray:
        """x d/dy - y d/dx about the domain centre."""
        X, Y = self.mesh()
        gx, gy = self.gradient(psi)
        return X * gy - Y * gx

    def enforce_bc(self, psi: np.ndarray) -> np.ndarray:
        return psi

    def describe(self) -> dict:
        return {"grid": "torus", "L": self.L, "dx": self.dx, "Nx": self.Nx}


@dataclass(frozen=True)
class PolarGrid:
    """Annulus r_min <= r <= r_max, Dirichlet on both rings, periodic in theta.

    Arrays are indexed [ir, itheta] with ``Nr + 1`` radial rows; rows 0 and Nr
    are the boundary rings and stay zero.
    """

    r_min: float
    dr: float
    Nr: int
    Ntheta: int

    def __post_init__(self):
        if self.dr <= 0 or self.r_min < 0:
            raise GridError("need dr > 0 and r_min >= 0")
        if self.Nr < 2 or self.Nr % 2:
            raise QuadratureParityError(f"quadrature parity error: Nr={self.Nr}")
        if self.Ntheta < 4 or self.Ntheta % 2:
            raise QuadratureParityError(f"quadrature parity error: Ntheta={self.Ntheta}")

    @classmethod
    def build(cls, extent: float, dr: float, r_min: float | None = None) -> "PolarGrid":
        """Grid reaching at least ``extent`` with the half-cell axis offset and
        the smallest even Ntheta satisfying r_max * dtheta <= dr."""
        if r_min is None:
            r_min = 0.5 * dr
        nr = int(math.ceil((extent - r_min) / dr - 1e-9))
        nr += nr % 2
        r_max = r_min + nr * dr
        nth = int(math.ceil(2.0 * math.pi * r_max / dr - 1e-9))
        nth += nth % 2
        return cls(r_min=r_min, dr=dr, Nr=nr, Ntheta=nth)

    @property
    def r_max(self) -> float:
        return self.r_min + self.Nr * self.dr

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.Ntheta

    @property
    def shape(self):
        return (self.Nr + 1, self.Ntheta)

    @property
    def r(self) -> np.ndarray:
        return self.r_min + self.dr * np.arange(self.Nr + 1)

    @property
    def theta(self) -> np.ndarray:
        return self.dtheta * np.arange(self.Ntheta)

    def mesh(self):
        return np.meshgrid(self.r, self.theta, indexing="ij")

    @property
    def weights(self) -> np.ndarray:
        wr = simpson_weights(self.Nr, self.dr) * self.r
        wt = periodic_simpson_weights(self.Ntheta, self.dtheta)
        return np.outer(wr, wt)

    @property
    def volume_weights(self) -> np.ndarray:
        """Cell areas r dr dtheta; the inner product in which the Laplacian is symmetric."""
        return np.outer(self.r * self.dr, np.full(self.Ntheta, self.dtheta))

    def max_eigenvalue(self) -> float:
        """Gershgorin bound on -laplacian over the interior rings."""
        r = self.r[1:-1]
        return float(np.max(4.0 / self.dr**2 + 4.0 / (r * self.dtheta) ** 2))

    def laplacian(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi)
        r = self.r[1:-1, None]
        c, up, dn = psi[1:-1], psi[2:], psi[:-2]
        out[1:-1] = (up - 2.0 * c + dn) / self.dr**2 + (up - dn) / (2.0 * self.dr * r)
        out[1:-1] += (np.roll(c, 1, axis=1) - 2.0 * c + np.roll(c, -1, axis=1)) / (
            r * self.dtheta
        ) ** 2
        return out

    def gradient(self, psi: np.ndarray):
        """(d/dr, r^-1 d/dtheta); one-sided second order at the radial edges."""
        gr = np.gradient(psi, self.dr, axis=0, edge_order=2)
        gt = (np.roll(psi, -1, axis=1) - np.roll(psi, 1, axis=1)) / (2.0 * self.dtheta)
        return gr, gt / self.r[:, None]

    def angular_derivative(self, psi: np.ndarray) -> np.ndarray:
        return (np.roll(psi, -1, axis=1) - np.roll(psi, 1, axis=1)) / (2.0 * self.dtheta)

    def enforce_bc(self, psi: np.ndarray) -> np.ndarray:
        psi[0] = 0.0
        psi[-1] = 0.0
        return psi

    def describe(self) -> dict:
        return {
            "grid": "polar",
            "r_min": self.r_min,
            "r_max": self.r_max,
            "dr": self.dr,
            "Nr": self.Nr,
            "Ntheta": self.Ntheta,
        }
