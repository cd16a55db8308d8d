"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np

from .exceptions import InsufficientSamplesError, InvalidLossError

__all__ = ["check_losses", "check_positive", "check_probability", "check_random_state"]


def check_losses(values, *, min_count=2, name="losses"):
    """Return ``values`` as a 1-d float array after checking the loss-sample invariants.

    Raises
    ------
    InvalidLossError
        If any value is NaN or infinite, or the input is not one-dimensional.
    InsufficientSamplesError
        If fewer than `min_count` values are given.
    """
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidLossError(f"invalid loss sample in {name}: {exc}") from None
    if arr.ndim != 1:
        raise InvalidLossError(f"invalid loss sample in {name}: expected a 1-d sequence")
    bad = ~np.isfinite(arr)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise InvalidLossError(f"invalid loss sample in {name}: value {arr[i]!r} at position {i}")
    if arr.size < min_count:
        raise InsufficientSamplesError(
            f"insufficient samples in {name}: need at least {min_count}, got {arr.size}")
    return arr


def check_positive(value, name, *, strict=True, integer=False):
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(value, bool) or not isinstance(value, kind):
        raise TypeError(f"{name} must be {'an integer' if integer else 'a real number'}, got {value!r}")
    if not np.isfinite(value) or (value <= 0 if strict else value < 0):
        raise ValueError(f"{name} must be {'positive' if strict else 'nonnegative'}, got {value!r}")
    return value


def check_probability(value, name):
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def check_random_state(seed):
    """Turn ``seed`` into a ``numpy.random.Generator``.

    Unlike the sklearn helper of the same name, ``None`` is rejected: every
    random draw in this package must be traceable to an explicit seed.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed or Generator is required")
    return np.random.default_rng(seed)
