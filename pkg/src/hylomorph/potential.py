"""Scalar nonlinearity W(psi) = F(|psi|) and checks of its structural assumptions.

F is split as F(s) = m^2 s^2 / 2 + N(s). Potentials are plain callables on
non-negative reals (numpy-vectorised); nothing here is symbolic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import nnls

Func = Callable[[np.ndarray], np.ndarray]


class PotentialError(ValueError):
    """Raised when a potential cannot be evaluated or is ill-formed."""


@dataclass(frozen=True)
class PotentialSpec:
    """Nonlinearity W(psi) = F(|psi|) with mass ``m``.

    ``Fprime_over_s`` is F'(s)/s, used for W'(psi) = (F'(|psi|)/|psi|) psi so
    that no division by |psi| happens at the vortex core. When omitted it is
    derived from ``Fprime`` with the limit value m^2 at s = 0.
    """

    name: str
    m: float
    F: Func
    Fprime: Func
    Fprime_over_s: Optional[Func] = field(default=None, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.m) and self.m > 0):
            raise PotentialError(f"mass must be positive, got {self.m}")

    def N(self, s):
        s = np.asarray(s, dtype=float)
        return self.F(s) - 0.5 * self.m**2 * s**2

    def Nprime(self, s):
        s = np.asarray(s, dtype=float)
        return self.Fprime(s) - self.m**2 * s

    def g(self, s):
        """F'(s)/s, extended by continuity (value m^2) at s = 0."""
        if self.Fprime_over_s is not None:
            return self.Fprime_over_s(s)
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, self.m**2)
        nz = s > 0
        out[nz] = self.Fprime(s[nz]) / s[nz]
        return out

    def W(self, psi):
        return self.F(np.abs(psi))

    def Wprime(self, psi):
        """Complex derivative F'(|psi|) psi/|psi|, zero at psi = 0."""
        return self.g(np.abs(psi)) * psi


def make_log_potential() -> PotentialSpec:
    """F(s) = s - log(1 + s); m = 1 and N(s) ~ -s^3/3 near zero."""
    return PotentialSpec(
        name="log",
        m=1.0,
        F=lambda s: s - np.log1p(s),
        Fprime=lambda s: s / (1.0 + s),
        Fprime_over_s=lambda s: 1.0 / (1.0 + s),
    )


def make_quadratic_potential(m: float = 1.0) -> PotentialSpec:
    """Linear Klein-Gordon: F(s) = m^2 s^2 / 2, so N vanishes identically."""
    m2 = float(m) ** 2
    return PotentialSpec(
        name="quadratic",
        m=float(m),
        F=lambda s: 0.5 * m2 * np.asarray(s) ** 2,
        Fprime=lambda s: m2 * np.asarray(s),
        Fprime_over_s=lambda s: np.full(np.shape(s), m2),
    )


_BUILTINS = {"log": make_log_potential, "quadratic": make_quadratic_potential}


def get_potential(name: str) -> PotentialSpec:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise PotentialError(
            f"unknown potential {name!r}; choose from {sorted(_BUILTINS)}"
        ) from None


# --------------------------------------------------------------------------
# assumption checks


@dataclass
class AssumptionReport:
    positivity: bool  # (W-i)
    nondegeneracy: bool  # (W-ii)
    hylomorphy: bool  # (W-iii)
    growth_a: bool  # (W-iv)(a)
    growth_b: bool  # (W-iv)(b)
    small_s: bool  # (W-v)
    F0: float
    Fprime0: float
    F2_0: float
    s0: Optional[float]
    N_s0: Optional[float]
    s1: Optional[float]
    growth_coeffs: tuple
    growth_exponents: tuple
    growth_residual: float
    eps: float
    s_small: Optional[float]

    @property
    def growth(self) -> bool:
        return self.growth_a or self.growth_b

    @property
    def core_ok(self) -> bool:
        """(W-i)-(W-iii), the minimum needed by the profile solver."""
        return self.positivity and self.nondegeneracy and self.hylomorphy

    def lines(self) -> list[str]:
        flag = lambda b: "true" if b else "false"
        out = [
            f"W-i: {flag(self.positivity)}",
            f"W-ii: {flag(self.nondegeneracy)}",
            f"W-iii: {flag(self.hylomorphy)}",
            f"W-iv: {flag(self.growth)}",
            f"W-iv-a: {flag(self.growth_a)}",
            f"W-iv-b: {flag(self.growth_b)}",
            f"W-v: {flag(self.small_s)}",
            f"F2_0: {self.F2_0:.12g}",
            f"s0: {self.s0}",
            f"s_small: {self.s_small}",
            f"growth_coeffs: {self.growth_coeffs[0]:.6g} {self.growth_coeffs[1]:.6g}",
        ]
        return out


def _eval(fn: Func, s: np.ndarray, what: str) -> np.ndarray:
    with np.errstate(all="ignore"):
        v = np.asarray(fn(s), dtype=float)
    bad = ~np.isfinite(v)
    if np.any(bad):
        s_bad = np.atleast_1d(s)[np.atleast_1d(bad)][0]
        raise PotentialError(f"potential evaluation failure: {what} at s={s_bad!r}")
    return v


def second_derivative_at_zero(p: PotentialSpec, step: float = 1e-3) -> float:
    """Richardson-extrapolated central difference for F''(0).

    Falls back to a one-sided second-order stencil when F is not finite at
    negative arguments.
    """

    def d2(h):
        with np.errstate(all="ignore"):
            fm = float(np.asarray(p.F(np.array([-h])))[0])
        f0 = float(_eval(p.F, np.array([0.0]), "F")[0])
        fp = float(_eval(p.F, np.array([h]), "F")[0])
        if np.isfinite(fm):
            return (fp - 2.0 * f0 + fm) / h**2
        f2, f3 = _eval(p.F, np.array([2 * h, 3 * h]), "F")
        return (2.0 * f0 - 5.0 * fp + 4.0 * f2 - f3) / h**2

    return (4.0 * d2(step / 2) - d2(step)) / 3.0


def _fit_growth(s, dN, p_exp, q_exp):
    """Least-squares a, b >= 0 for |N'| <= a s^(p-1) + b s^(q-1), then inflated
    until the bound holds on every sample."""
    target = np.abs(dN)
    if p_exp == q_exp:
        X = (s ** (p_exp - 1))[:, None]
    else:
        X = np.stack([s ** (p_exp - 1), s ** (q_exp - 1)], axis=1)
    coef, _ = nnls(X, target)
    fit = X @ coef
    resid = float(np.sqrt(np.mean((fit - target) ** 2)) / max(np.max(target), 1e-300))
    pos = fit > 0
    if not np.any(pos) or np.any((target > 0) & ~pos):
        return False, (0.0, 0.0), resid
    kappa = max(1.0, float(np.max(target[pos] / fit[pos])))
    coef = coef * kappa
    if coef.size == 1:
        a = b = 0.5 * float(coef[0])
    else:
        a, b = (float(c) for c in coef)
        # the assumption wants strictly positive constants; a zero slot can be
        # any positive number without breaking the bound
        a = a if a > 0 else 1e-12
        b = b if b > 0 else 1e-12
    ok = bool(np.all(target <= (a * s ** (p_exp - 1) + b * s ** (q_exp - 1)) * (1 + 1e-12)))
    return ok and a > 0 and b > 0, (a, b), resid


def check_assumptions(
    p: PotentialSpec,
    s_max: float = 10.0,
    samples: int = 4000,
    eps: float = 1.5,
    growth_exponents: tuple = (3.0, 3.0),
    tol: float = 1e-12,
) -> AssumptionReport:
    """Sample-based check of (W-i)..(W-v) for dimension 2."""
    if samples < 100:
        raise ValueError("samples must be >= 100")
    if not 0 < eps < 2:
        raise ValueError("eps must lie in (0, 2) in two dimensions")
    p_exp, q_exp = growth_exponents
    if not (2 < p_exp <= q_exp):
        raise ValueError("growth exponents must satisfy 2 < p <= q")

    s = np.linspace(0.0, s_max, samples + 1)[1:]
    F = _eval(p.F, s, "F")
    N = F - 0.5 * p.m**2 * s**2

    positivity = bool(np.all(F >= -tol))

    F0 = float(_eval(p.F, np.array([0.0]), "F")[0])
    Fp0 = float(_eval(p.Fprime, np.array([0.0]), "Fprime")[0])
    F2 = second_derivative_at_zero(p)
    nondeg = abs(F0) <= tol and abs(Fp0) <= tol and p.m > 0 and abs(F2 - p.m**2) <= 1e-6 * p.m**2

    neg = N < 0
    hylo = bool(np.any(neg))
    s0 = N_s0 = None
    if hylo:
        k = int(np.argmin(N))
        s0, N_s0 = float(s[k]), float(N[k])

    # central differences of N
    d = 1e-6 * max(s_max, 1.0)
    dN = (_eval(p.N, s + d, "N") - _eval(p.N, np.maximum(s - d, 0.0), "N")) / (
        (s + d) - np.maximum(s - d, 0.0)
    )

    s1 = None
    growth_b = False
    if hylo:
        first_neg = int(np.argmax(neg))
        later = np.nonzero(dN[first_neg + 1 :] >= 0)[0]
        if later.size:
            growth_b = True
            s1 = float(s[first_neg + 1 + later[0]])

    growth_a, coeffs, resid = _fit_growth(s, dN, p_exp, q_exp)

    # (W-v): N(s) <= -s^(2+eps) on an initial interval
    s_log = np.geomspace(1e-4, s_max, samples)
    holds = _eval(p.N, s_log, "N") <= -(s_log ** (2.0 + eps))
    if holds[0]:
        k = int(np.argmin(holds)) if not np.all(holds) else holds.size
        small_s, s_small = True, float(s_log[k - 1])
    else:
        small_s, s_small = False, None

    return AssumptionReport(
        positivity=positivity,
        nondegeneracy=bool(nondeg),
        hylomorphy=hylo,
        growth_a=growth_a,
        growth_b=growth_b,
        small_s=small_s,
        F0=F0,
        Fprime0=Fp0,
        F2_0=F2,
        s0=s0,
        N_s0=N_s0,
        s1=s1,
        growth_coeffs=coeffs,
        growth_exponents=(p_exp, q_exp),
        growth_residual=resid,
        eps=eps,
        s_small=s_small,
    )
