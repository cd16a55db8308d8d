"""Hierarchical beta process over monotone quantile functions.

A realization starts from two Gaussian endpoint draws and is refined
level by level: each dyadic interval is split at its midpoint by a
beta-distributed fraction whose Aitchison centre and metric variance are
set by the centre PPF ``q*`` and the discrepancy ``delta``.

The beta parameters of a node depend only on ``(q*, delta, c)``, never on
the realization, so :class:`HBParams` solves them once per level and
caches them. Random draws use one independent stream per (realization
seed, level), consumed in node-index order; adding a level therefore
never perturbs the values at coarser levels.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .exceptions import DegenerateEndpointsError, SolverError
from .ppf import EmpiricalPPF
from .special import digamma, inverse_digamma, inverse_trigamma, tetragamma, trigamma

__all__ = [
    "BetaParams",
    "Clamps",
    "HBParams",
    "PPFRealization",
    "solve_alpha_beta",
    "solve_alpha_beta_array",
    "refine_increment",
    "sample_realization",
    "sample_realizations",
    "realization_stream",
    "DEFAULT_DEPTH",
    "ENDPOINT_RETRIES",
]

DEFAULT_DEPTH = 8
ENDPOINT_RETRIES = 10_000
MAX_ITERATIONS = 100
RESIDUAL_TOL = 1e-10

# Newton stops once both residuals are below this; anything left above it
# goes to the bracketing fallback.
_NEWTON_TOL = 1e-12
# Working range for ln(alpha), ln(beta).
_U_MIN, _U_MAX = -60.0, 80.0


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)
                and self.alpha > 0 and self.beta > 0):
            raise ValueError(f"invalid beta parameters ({self.alpha!r}, {self.beta!r})")


@dataclass(frozen=True)
class Clamps:
    """Limits applied to (r, v) before solving for the beta parameters.

    ``v_max`` keeps the digamma values of the solution below ~1e4 so that
    the first equation can still be resolved to 1e-10 in double precision.
    Above it the beta draw is already a near-Bernoulli split.
    """

    r_min: float = 1e-8
    r_max: float = 1e8
    v_min: float = 1e-12
    v_max: float = 1e8

    def apply(self, r, v):
        r = np.asarray(r, dtype=float)
        # 0/0 on flat stretches of q*: no information, split evenly
        r = np.where(np.isnan(r), 1.0, r)
        r = np.clip(r, self.r_min, self.r_max)
        v = np.clip(np.asarray(v, dtype=float), self.v_min, self.v_max)
        return r, v


# --------------------------------------------------------------------------
# (r, v) -> (alpha, beta)

def _residuals(u1, u2, lnr, lnv):
    a, b = np.exp(u1), np.exp(u2)
    s = trigamma(a) + trigamma(b)
    return digamma(a) - digamma(b) - lnr, np.log(s) - lnv


def _tolerance(u1, u2, lnr):
    # Rounding floor of the first residual: when alpha or beta is tiny the
    # digamma values reach ~1e4 and the difference cannot be resolved
    # better than a few ulps of them.
    floor = 16 * np.finfo(float).eps * (
        np.abs(digamma(np.exp(u1))) + np.abs(digamma(np.exp(u2))) + np.abs(lnr))
    return np.maximum(_NEWTON_TOL, floor)


def _newton(u1, u2, lnr, lnv):
    f1, f2 = _residuals(u1, u2, lnr, lnv)
    err = np.maximum(np.abs(f1), np.abs(f2))
    for _ in range(MAX_ITERATIONS):
        active = err >= _tolerance(u1, u2, lnr)
        if not active.any():
            break
        a, b = np.exp(u1[active]), np.exp(u2[active])
        t1a, t1b = trigamma(a), trigamma(b)
        s = t1a + t1b
        j11, j12 = a * t1a, -b * t1b
        j21, j22 = a * tetragamma(a) / s, b * tetragamma(b) / s
        det = j11 * j22 - j12 * j21  # strictly negative
        g1, g2 = f1[active], f2[active]
        d1 = (j22 * g1 - j12 * g2) / det
        d2 = (j11 * g2 - j21 * g1) / det
        scale = np.minimum(1.0, 4.0 / np.maximum(np.abs(d1), np.abs(d2)))
        d1 *= scale
        d2 *= scale

        # Backtrack until the residual norm decreases.
        idx = np.flatnonzero(active)
        step = np.ones(idx.size)
        todo = np.ones(idx.size, dtype=bool)
        for _ in range(40):
            n1 = np.clip(u1[idx] - step * d1, _U_MIN, _U_MAX)
            n2 = np.clip(u2[idx] - step * d2, _U_MIN, _U_MAX)
            h1, h2 = _residuals(n1, n2, lnr[idx], lnv[idx])
            new_err = np.maximum(np.abs(h1), np.abs(h2))
            better = todo & (new_err < err[idx])
            sel = idx[better]
            u1[sel], u2[sel] = n1[better], n2[better]
            f1[sel], f2[sel], err[sel] = h1[better], h2[better], new_err[better]
            todo &= ~better
            if not todo.any():
                break
            step = np.where(todo, 0.5 * step, step)
        if todo.all():
            break  # no entry can make progress any more
    return u1, u2, err


def _inverse_digamma_log(target):
    """ln x such that digamma(x) = target."""
    def g(u):
        return digamma(np.exp(u)) - target
    lo, hi = _U_MIN, _U_MAX
    if g(lo) > 0 or g(hi) < 0:
        raise ValueError("target outside the working range")
    return brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=500)


def _fallback(lnr, lnv):
    """One-dimensional bracketed solve.

    For a given alpha the first equation fixes beta; the second equation's
    residual is then strictly decreasing in alpha, so its root can be
    bracketed and bisected.
    """
    def beta_of(u1):
        return _inverse_digamma_log(digamma(np.exp(u1)) - lnr)

    def g(u1):
        u2 = beta_of(u1)
        return np.log(trigamma(np.exp(u1)) + trigamma(np.exp(u2))) - lnv

    # Keep both ln(alpha) and ln(beta) inside the working range.
    lo, hi = _U_MIN + max(0.0, lnr), _U_MAX - max(0.0, -lnr)
    for _ in range(200):
        try:
            g(lo)
            break
        except ValueError:
            lo += 0.5
    for _ in range(200):
        try:
            g(hi)
            break
        except ValueError:
            hi -= 0.5
    u1 = brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=500)
    return u1, beta_of(u1)


def solve_alpha_beta_array(r, v):
    """Vectorized solve of ``psi(a) - psi(b) = ln r`` and ``ln(psi1(a) + psi1(b)) = ln v``.

    Inputs must already be clamped. Returns ``(alpha, beta)`` arrays.

    Raises
    ------
    SolverError
        If any node cannot be solved to residual below 1e-10.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    r, v = np.broadcast_arrays(r, v)
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v)) and np.all(r > 0) and np.all(v > 0)):
        raise ValueError("r and v must be finite and positive")
    lnr, lnv = np.log(r), np.log(v)

    # Start from alpha = beta = y with trigamma(y) = v/2, then shift the
    # larger parameter along the first equation so that it holds exactly.
    # The second residual is then confined to [ln 1/2, 0].
    y = inverse_trigamma(v / 2)
    moved = inverse_digamma(digamma(y) + np.abs(lnr), lo=1e-26, hi=1e34)
    u1 = np.clip(np.log(np.where(lnr >= 0, moved, y)), _U_MIN, _U_MAX)
    u2 = np.clip(np.log(np.where(lnr >= 0, y, moved)), _U_MIN, _U_MAX)
    u1, u2, err = _newton(u1, u2, lnr, lnv)

    for i in np.flatnonzero(~(err < _tolerance(u1, u2, lnr))):
        try:
            a1, a2 = _fallback(lnr[i], lnv[i])
        except (ValueError, RuntimeError):
            continue
        f1, f2 = _residuals(np.array([a1]), np.array([a2]), lnr[i:i + 1], lnv[i:i + 1])
        e = max(abs(f1[0]), abs(f2[0]))
        if e < err[i]:
            u1[i], u2[i], err[i] = a1, a2, e

    bad = ~(err < RESIDUAL_TOL)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        res = _residuals(u1[i:i + 1], u2[i:i + 1], lnr[i:i + 1], lnv[i:i + 1])
        raise SolverError(float(r[i]), float(v[i]), (float(res[0][0]), float(res[1][0])))
    return np.exp(u1), np.exp(u2)


def solve_alpha_beta(r, v):
    """Beta parameters whose Aitchison centre ratio is `r` and metric variance sum is `v`.

    >>> p = solve_alpha_beta(1.0, np.pi**2 / 3)
    >>> round(p.alpha, 9), round(p.beta, 9)
    (1.0, 1.0)
    """
    if not (np.isfinite(r) and np.isfinite(v) and r > 0 and v > 0):
        raise ValueError(f"r and v must be finite and positive, got r={r!r}, v={v!r}")
    a, b = solve_alpha_beta_array(r, v)
    return BetaParams(float(a[0]), float(b[0]))


def refine_increment(q_lo, q_hi, r, v, rng, clamps=Clamps()):
    """Split ``[q_lo, q_hi]`` at a Beta(alpha, beta) fraction; returns the midpoint value."""
    if q_hi < q_lo:
        raise ValueError("q_hi must be >= q_lo")
    r, v = clamps.apply(r, v)
    p = solve_alpha_beta(float(r), float(v))
    x1 = rng.beta(p.alpha, p.beta)
    return float(min(max(q_lo + x1 * (q_hi - q_lo), q_lo), q_hi))


# --------------------------------------------------------------------------
# the process

@dataclass(frozen=True, eq=False)
class HBParams:
    """Parameters of the hierarchical beta process.

    Parameters
    ----------
    q_star : EmpiricalPPF
        Centre of the process (the mixed PPF).
    delta_emd : DiscrepancyFn
        Non-negative discrepancy on the same grid as `q_star`.
    c : float
        Sensitivity; scales the endpoint and metric variances.
    depth : int
        Number of dyadic refinement levels N; realizations have 2**N + 1 points.
    """

    q_star: EmpiricalPPF
    delta_emd: object
    c: float
    depth: int = DEFAULT_DEPTH
    clamps: Clamps = field(default_factory=Clamps)

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c >= 0):
            raise ValueError(f"c must be finite and >= 0, got {self.c!r}")
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValueError(f"depth must be a positive integer, got {self.depth!r}")
        if np.shape(self.delta_emd.values) != np.shape(self.q_star.q_values):
            raise ValueError("delta_emd must be defined on the same grid as q_star")

    def with_depth(self, depth):
        return HBParams(self.q_star, self.delta_emd, self.c, depth, self.clamps)

    def _q(self, phi):
        return np.interp(phi, self.q_star.grid, self.q_star.q_values)

    def _delta(self, phi):
        return np.interp(phi, self.q_star.grid, self.delta_emd.values)

    @cached_property
    def endpoint_moments(self):
        """Means and standard deviations of the two endpoint normals."""
        q0, q1 = self.q_star.q_values[0], self.q_star.q_values[-1]
        sd = np.sqrt(self.c) * np.abs(self.delta_emd.values[[0, -1]])
        return (q0, q1), (float(sd[0]), float(sd[1]))

    def level_beta(self, level):
        """(alpha, beta) arrays for the 2**(level-1) new nodes of `level` (1-based)."""
        cache = self.__dict__.setdefault("_level_cache", {})
        if level not in cache:
            n_new = 2 ** (level - 1)
            h = 1.0 / 2 ** level
            mid = (2 * np.arange(n_new) + 1) * h
            q_lo, q_mid, q_hi = self._q(mid - h), self._q(mid), self._q(mid + h)
            with np.errstate(divide="ignore", invalid="ignore"):
                r = (q_mid - q_lo) / (q_hi - q_mid)
            v = 2.0 * self.c * self._delta(mid) ** 2
            r, v = self.clamps.apply(r, v)
            cache[level] = solve_alpha_beta_array(r, v)
        return cache[level]


@dataclass(frozen=True, eq=False)
class PPFRealization:
    """One sampled quantile function, tabulated at the dyadic points k / 2**N."""

    values: np.ndarray

    @property
    def depth(self):
        return int(np.log2(self.values.size - 1))

    @property
    def grid(self):
        return np.linspace(0.0, 1.0, self.values.size)

    def to_ppf(self):
        return EmpiricalPPF(self.values)


def realization_stream(seed, level):
    """Random stream for one (seed, level) pair; level 0 is the endpoints."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(level),)))


def _draw_endpoints(params, seed, n):
    (m0, m1), (s0, s1) = params.endpoint_moments
    rng = realization_stream(seed, 0)
    out = rng.normal((m0, m1), (s0, s1), size=(n, 2))
    bad = ~(out[:, 0] < out[:, 1])
    for _ in range(ENDPOINT_RETRIES - 1):
        if not bad.any():
            return out
        out[bad] = rng.normal((m0, m1), (s0, s1), size=(int(bad.sum()), 2))
        bad = ~(out[:, 0] < out[:, 1])
    if bad.any():
        raise DegenerateEndpointsError(params.c, ENDPOINT_RETRIES)
    return out


def sample_realizations(params, seed, n):
    """Draw `n` realizations as an ``(n, 2**N + 1)`` array.

    Level ``l`` of all `n` realizations is filled from the single stream
    ``realization_stream(seed, l)``, so a deeper process reproduces the
    coarser levels bit for bit.
    """
    N = params.depth
    q = np.empty((n, 2**N + 1))
    ends = _draw_endpoints(params, seed, n)
    q[:, 0], q[:, -1] = ends[:, 0], ends[:, 1]
    for level in range(1, N + 1):
        alpha, beta = params.level_beta(level)
        stride = 2 ** (N - level)
        mid = stride * (2 * np.arange(alpha.size) + 1)
        lo, hi = q[:, mid - stride], q[:, mid + stride]
        x1 = realization_stream(seed, level).beta(alpha, beta, size=(n, alpha.size))
        q[:, mid] = np.minimum(np.maximum(lo + x1 * (hi - lo), lo), hi)
    return q


def sample_realization(params, rng):
    """Draw one monotone PPF realization.

    Parameters
    ----------
    params : HBParams
    rng : int or numpy.random.Generator
        Realization seed. A Generator is used only to draw that seed.

    Returns
    -------
    PPFRealization
    """
    seed = int(rng.integers(2**63)) if isinstance(rng, np.random.Generator) else int(rng)
    return PPFRealization(sample_realizations(params, seed, 1)[0])
