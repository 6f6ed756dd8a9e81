"""Composite Simpson weights on uniform and periodic 1-D grids."""

from __future__ import annotations

import numpy as np


class QuadratureParityError(ValueError):
    """Composite Simpson needs an even number of intervals."""


def simpson_weights(n_intervals: int, h: float) -> np.ndarray:
    """Weights for nodes 0..n on a closed interval: h/3 * (1, 4, 2, ..., 4, 1)."""
    if n_intervals < 2 or n_intervals % 2:
        raise QuadratureParityError(
            f"quadrature parity error: {n_intervals} intervals (need an even count >= 2)"
        )
    w = np.empty(n_intervals + 1)
    w[0::2] = 2.0
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def periodic_simpson_weights(n: int, h: float) -> np.ndarray:
    """Simpson on a periodic grid of n nodes (node n identified with node 0)."""
    if n < 2 or n % 2:
        raise QuadratureParityError(
            f"quadrature parity error: {n} periodic intervals (need an even count)"
        )
    w = np.empty(n)
    w[0::2] = 2.0
    w[1::2] = 4.0
    return w * (h / 3.0)


def simpson(values: np.ndarray, h: float) -> float:
    """Composite Simpson of samples on n+1 equispaced nodes.

    Fixed-order (pairwise numpy) summation, so results are reproducible.
    """
    values = np.asarray(values)
    return float(np.sum(simpson_weights(values.shape[0] - 1, h) * values))
