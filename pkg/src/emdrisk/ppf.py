"""Empirical quantile functions (PPFs) of per-sample losses, and the risk functional."""

from dataclasses import dataclass

import numpy as np

from .validation import check_losses

__all__ = [
    "DEFAULT_RESOLUTION",
    "EmpiricalPPF",
    "build_empirical_ppf",
    "risk",
    "empirical_cdf_value",
]

DEFAULT_RESOLUTION = 1024


@dataclass(frozen=True, eq=False)
class EmpiricalPPF:
    """A non-decreasing quantile function tabulated on ``K + 1`` equispaced points of [0, 1].

    Use :func:`build_empirical_ppf` to construct one from losses, or
    :meth:`from_values` to tabulate an arbitrary monotone function.
    """

    q_values: np.ndarray

    def __post_init__(self):
        q = np.array(self.q_values, dtype=float)
        if q.ndim != 1 or q.size < 3:
            raise ValueError("an EmpiricalPPF needs at least 3 grid values")
        if not np.all(np.isfinite(q)):
            raise ValueError("EmpiricalPPF values must be finite")
        if np.any(np.diff(q) < 0):
            raise ValueError("EmpiricalPPF values must be non-decreasing")
        q.flags.writeable = False
        object.__setattr__(self, "q_values", q)

    @classmethod
    def from_values(cls, q_values):
        return cls(np.asarray(q_values, dtype=float))

    @property
    def resolution(self):
        """Number of grid intervals K."""
        return self.q_values.size - 1

    @property
    def grid(self):
        return np.linspace(0.0, 1.0, self.q_values.size)

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        if np.any((phi < 0) | (phi > 1)):
            raise ValueError("PPF arguments must lie in [0, 1]")
        out = np.interp(phi, self.grid, self.q_values)
        return float(out) if out.ndim == 0 else out

    def same_grid(self, other):
        return self.q_values.size == other.q_values.size


def build_empirical_ppf(losses, resolution=DEFAULT_RESOLUTION):
    """Tabulate the empirical PPF of `losses` on a uniform grid.

    The i-th smallest of L losses is placed at ``i / (L + 1)``; between those
    abscissae the PPF is linear and outside them it is held flat.

    Raises
    ------
    InvalidLossError, InsufficientSamplesError
        See :func:`emdrisk.validation.check_losses`.
    """
    values = np.sort(check_losses(losses))
    if int(resolution) != resolution or resolution < 2:
        raise ValueError(f"resolution must be an integer >= 2, got {resolution!r}")
    L = values.size
    abscissae = np.arange(1, L + 1) / (L + 1)
    grid = np.linspace(0.0, 1.0, int(resolution) + 1)
    q = np.interp(grid, abscissae, values)
    # Interpolation of sorted data is monotone up to rounding; make it exact.
    return EmpiricalPPF(np.maximum.accumulate(q))


def risk(ppf):
    """Integral of the PPF over [0, 1] (trapezoid rule on its grid)."""
    q = ppf.q_values
    h = 1.0 / (q.size - 1)
    return float(h * (q.sum() - 0.5 * (q[0] + q[-1])))


def empirical_cdf_value(losses, q):
    """Fraction of `losses` that are <= `q`."""
    values = check_losses(losses)
    return float(np.count_nonzero(values <= q)) / values.size
