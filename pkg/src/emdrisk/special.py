"""Digamma, trigamma and tetragamma for positive real arguments.

All three use the same scheme: shift the argument upward with the
recurrence relations until it is at least ``_ASYMPTOTIC_FROM``, then sum
the Bernoulli asymptotic series. Functions accept scalars or arrays and
return the same shape (a Python float for scalar input).
"""

import numpy as np

from .exceptions import DomainError

__all__ = ["digamma", "trigamma", "tetragamma", "inverse_trigamma", "inverse_digamma"]

# Recurrence threshold. At x >= 10 the series below, truncated after B_16,
# has a remainder below 1e-17 relative for all three functions.
_ASYMPTOTIC_FROM = 10.0

# B_2, B_4, ..., B_16
_BERNOULLI = np.array([
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
])
_K = np.arange(1, len(_BERNOULLI) + 1)
# psi(x)   ~ ln x - 1/(2x)         - sum B_2k / (2k x^2k)
# psi1(x)  ~ 1/x  + 1/(2x^2)       + sum B_2k / x^(2k+1)
# psi2(x)  ~ -1/x^2 - 1/x^3        - sum (2k+1) B_2k / x^(2k+2)
_PSI_COEF = -_BERNOULLI / (2 * _K)
_PSI1_COEF = _BERNOULLI
_PSI2_COEF = -(2 * _K + 1) * _BERNOULLI


def _prepare(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):  # also catches NaN
        bad = arr[~(arr > 0)].ravel()[0]
        raise DomainError(f"domain error: {name} requires x > 0, got {bad!r}")
    return arr


def _horner(coefs, t):
    # sum_k coefs[k] * t**(k+1), evaluated from the small end inward
    acc = np.zeros_like(t)
    for coef in coefs[::-1]:
        acc = (acc + coef) * t
    return acc


def _shift(x, term):
    """Shift x up to the asymptotic region, accumulating ``term(x)`` along the way."""
    x = x.copy()
    acc = np.zeros_like(x)
    mask = x < _ASYMPTOTIC_FROM
    while mask.any():
        acc[mask] += term(x[mask])
        x[mask] += 1.0
        mask = x < _ASYMPTOTIC_FROM
    return x, acc


def _out(result, like):
    return float(result) if np.ndim(like) == 0 else result


def digamma(x):
    """Logarithmic derivative of the gamma function, psi(x), for x > 0."""
    arr = _prepare(x, "digamma")
    z, acc = _shift(np.atleast_1d(arr), lambda t: 1.0 / t)
    inv2 = 1.0 / (z * z)
    res = np.log(z) - 0.5 / z + _horner(_PSI_COEF, inv2) - acc
    return _out(res.reshape(arr.shape), x)


def trigamma(x):
    """First derivative of digamma, psi_1(x), for x > 0."""
    arr = _prepare(x, "trigamma")
    z, acc = _shift(np.atleast_1d(arr), lambda t: 1.0 / (t * t))
    inv = 1.0 / z
    inv2 = inv * inv
    res = inv + 0.5 * inv2 + inv * _horner(_PSI1_COEF, inv2) + acc
    return _out(res.reshape(arr.shape), x)


def tetragamma(x):
    """Second derivative of digamma, psi_2(x), for x > 0."""
    arr = _prepare(x, "tetragamma")
    z, acc = _shift(np.atleast_1d(arr), lambda t: 2.0 / (t * t * t))
    inv = 1.0 / z
    inv2 = inv * inv
    res = -inv2 - inv2 * inv + inv2 * _horner(_PSI2_COEF, inv2) - acc
    return _out(res.reshape(arr.shape), x)


def _bisect_log(fn, y, increasing, lo, hi, iterations):
    arr = np.atleast_1d(np.asarray(y, dtype=float))
    a = np.full(arr.shape, np.log(lo))
    b = np.full(arr.shape, np.log(hi))
    for _ in range(iterations):
        m = 0.5 * (a + b)
        below = (fn(np.exp(m)) < arr) if increasing else (fn(np.exp(m)) > arr)
        a = np.where(below, m, a)
        b = np.where(below, b, m)
        if np.all(b - a < 1e-15 * np.maximum(1.0, np.abs(a))):
            break
    res = np.exp(0.5 * (a + b))
    return _out(res.reshape(np.shape(y)), y)


def inverse_trigamma(y, *, lo=1e-30, hi=1e30, iterations=200):
    """Solve ``trigamma(x) = y`` for x > 0 by bisection in log x.

    Only used to seed the beta-parameter solver, so robustness matters
    more than speed here.
    """
    if not np.all(np.asarray(y) > 0):
        raise DomainError("domain error: inverse_trigamma requires y > 0")
    return _bisect_log(trigamma, y, False, lo, hi, iterations)


def inverse_digamma(y, *, lo=1e-30, hi=1e30, iterations=200):
    """Solve ``digamma(x) = y`` for x in [lo, hi] by bisection in log x."""
    return _bisect_log(digamma, y, True, lo, hi, iterations)
