"""Discrepancy functions, R-distributions and the B^EMD tail probability."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import IncompatiblePPFError
from .hb import DEFAULT_DEPTH, HBParams, sample_realizations
from .ppf import EmpiricalPPF, build_empirical_ppf, risk
from .validation import check_losses

__all__ = [
    "DiscrepancyFn",
    "RDistribution",
    "delta_emd",
    "sample_r_distribution",
    "r_distribution_from_losses",
    "bemd",
    "bootstrap_risk",
    "DEFAULT_REL_SE_TARGET",
    "BATCH_SIZE",
]

DEFAULT_REL_SE_TARGET = 2.0**-5
BATCH_SIZE = 64
MIN_SAMPLES = 16
MAX_SAMPLES = 4096


@dataclass(frozen=True, eq=False)
class DiscrepancyFn:
    """Non-negative function on the PPF grid: ``|q_synth - q_mixed|``."""

    values: np.ndarray

    def __post_init__(self):
        d = np.array(self.values, dtype=float)
        if d.ndim != 1 or not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("discrepancy values must be finite and non-negative")
        d.flags.writeable = False
        object.__setattr__(self, "values", d)

    @property
    def grid(self):
        return np.linspace(0.0, 1.0, self.values.size)

    def __call__(self, phi):
        out = np.interp(phi, self.grid, self.values)
        return float(out) if np.ndim(out) == 0 else out


def delta_emd(q_mixed, q_synth):
    """Pointwise absolute difference of two PPFs tabulated on the same grid."""
    if not q_mixed.same_grid(q_synth):
        raise IncompatiblePPFError(
            f"incompatible PPFs: grid sizes {q_mixed.q_values.size} and {q_synth.q_values.size}")
    return DiscrepancyFn(np.abs(q_synth.q_values - q_mixed.q_values))


@dataclass(frozen=True, eq=False)
class RDistribution:
    """A finite sample of risk values for one model.

    `converged` is False when sampling stopped at the sample cap before the
    relative standard error reached `rel_se_target`.
    """

    risks: np.ndarray
    c: float | None
    seed: int
    model_id: str | None = None
    converged: bool = True
    rel_se_target: float | None = None

    def __post_init__(self):
        r = np.array(self.risks, dtype=float)
        if r.ndim != 1 or r.size < 2 or not np.all(np.isfinite(r)):
            raise ValueError("an RDistribution needs at least two finite risk values")
        r.flags.writeable = False
        object.__setattr__(self, "risks", r)

    @property
    def M(self):
        return self.risks.size

    @property
    def mean(self):
        return float(self.risks.mean())

    @property
    def standard_error(self):
        return float(self.risks.std(ddof=1) / np.sqrt(self.M))

    def with_model_id(self, model_id):
        return RDistribution(self.risks, self.c, self.seed, model_id, self.converged,
                             self.rel_se_target)

    def to_dict(self):
        return {
            "model_id": self.model_id,
            "c": self.c,
            "seed": int(self.seed),
            "risks": [float(x) for x in self.risks],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["risks"], dtype=float), d["c"], int(d["seed"]), d.get("model_id"))


def _batch_seed(seed, index):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def _realization_risks(q):
    h = 1.0 / (q.shape[1] - 1)
    return h * (q.sum(axis=1) - 0.5 * (q[:, 0] + q[:, -1]))


def _relative_se(risks):
    m = risks.size
    se = risks.std(ddof=1) / np.sqrt(m)
    mu = abs(risks.mean())
    return se / mu if mu >= 1e-300 else se


def sample_r_distribution(params, rng, rel_se_target=DEFAULT_REL_SE_TARGET,
                          min_samples=MIN_SAMPLES, max_samples=MAX_SAMPLES,
                          batch_size=BATCH_SIZE):
    """Sample risks of HB-process realizations until their mean is resolved.

    Realizations are drawn in batches of `batch_size`. Sampling stops once
    at least `min_samples` risks are available and the relative standard
    error of their mean is below `rel_se_target`, or when `max_samples` is
    reached (the result is then flagged ``converged=False``).

    Parameters
    ----------
    params : HBParams
    rng : int or numpy.random.Generator
        Seed of the distribution. Batch ``b`` draws from a seed derived from
        ``(seed, b)``, so the result does not depend on how work is scheduled.
    """
    if not (0 < rel_se_target < 1):
        raise ValueError(f"rel_se_target must lie in (0, 1), got {rel_se_target!r}")
    if not (2 <= min_samples <= max_samples):
        raise ValueError("need 2 <= min_samples <= max_samples")
    seed = int(rng.integers(2**63)) if isinstance(rng, np.random.Generator) else int(rng)

    chunks = []
    count, batch = 0, 0
    converged = False
    while count < max_samples:
        n = min(batch_size, max_samples - count)
        chunks.append(_realization_risks(sample_realizations(params, _batch_seed(seed, batch), n)))
        count += n
        batch += 1
        risks = np.concatenate(chunks)
        if count >= min_samples and _relative_se(risks) < rel_se_target:
            converged = True
            break
    return RDistribution(risks, float(params.c), seed, converged=converged,
                         rel_se_target=rel_se_target)


def r_distribution_from_losses(mixed_losses, synth_losses, c, seed, *,
                               resolution=1024, depth=DEFAULT_DEPTH, model_id=None, **kwargs):
    """Convenience pipeline: losses -> PPFs -> discrepancy -> R-distribution."""
    q_mixed = build_empirical_ppf(mixed_losses, resolution)
    q_synth = build_empirical_ppf(synth_losses, resolution)
    params = HBParams(q_mixed, delta_emd(q_mixed, q_synth), c, depth)
    return sample_r_distribution(params, seed, **kwargs).with_model_id(model_id)


def _half_wins(a, b):
    """2 * #{(i, j): a_i < b_j} + #{(i, j): a_i == b_j}, by sort-merge."""
    b = np.sort(b)
    left = np.searchsorted(b, a, side="left")
    right = np.searchsorted(b, a, side="right")
    greater = b.size - right
    ties = right - left
    return 2 * int(greater.sum()) + int(ties.sum())


def _ratio(n, total):
    # Divide so that _ratio(n, t) + _ratio(t - n, t) == 1.0 exactly in
    # floating point: only the smaller share is divided, the larger one is
    # its complement.
    if 2 * n <= total:
        return n / total
    return 1.0 - (total - n) / total


def bemd(a, b):
    """Probability that a risk drawn from `a` is below one drawn from `b` (ties count 1/2).

    Accepts RDistributions or plain arrays of risks.
    """
    ra = np.asarray(getattr(a, "risks", a), dtype=float)
    rb = np.asarray(getattr(b, "risks", b), dtype=float)
    if ra.size == 0 or rb.size == 0:
        raise ValueError("bemd needs non-empty risk samples")
    return _ratio(_half_wins(ra, rb), 2 * ra.size * rb.size)


def bootstrap_risk(losses, n_resamples=1200, rng=0):
    """Means of `n_resamples` case-resampled copies of `losses`."""
    values = check_losses(losses)
    if n_resamples < 2:
        raise ValueError("n_resamples must be at least 2")
    seed = int(rng.integers(2**63)) if isinstance(rng, np.random.Generator) else int(rng)
    gen = np.random.default_rng(seed)
    means = np.empty(n_resamples)
    for k in range(n_resamples):
        means[k] = values[gen.integers(0, values.size, values.size)].mean()
    return RDistribution(means, None, seed)
