"""The B^EMD rejection rule, its transitivity shortcut, and classical criteria."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .emd import bemd as _bemd
from .exceptions import SingularLikelihoodError, ThresholdError

__all__ = [
    "GOLDEN_RATIO",
    "ComparisonMatrix",
    "RejectionOutcome",
    "comparison_matrix",
    "reject",
    "transitive_shortcut",
    "logit",
    "logistic",
    "classical_criteria",
]

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2
LN10 = math.log(10.0)


@dataclass(frozen=True, eq=False)
class ComparisonMatrix:
    """Pairwise B^EMD values; ``bemd[i, j]`` is P(R_i < R_j)."""

    model_ids: tuple
    bemd: np.ndarray
    empirical_risks: np.ndarray

    def __post_init__(self):
        ids = tuple(self.model_ids)
        m = np.array(self.bemd, dtype=float)
        r = np.array(self.empirical_risks, dtype=float)
        n = len(ids)
        if len(set(ids)) != n:
            raise ValueError("model ids must be unique")
        if m.shape != (n, n) or r.shape != (n,):
            raise ValueError("matrix and risks must match the number of models")
        if np.any((m < 0) | (m > 1)) or np.any(np.diag(m) != 0.5):
            raise ValueError("bemd entries must lie in [0, 1] with 0.5 on the diagonal")
        if not np.allclose(m + m.T, 1.0, rtol=0, atol=1e-12):
            raise ValueError("bemd matrix must satisfy bemd[i, j] + bemd[j, i] = 1")
        m.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "model_ids", ids)
        object.__setattr__(self, "bemd", m)
        object.__setattr__(self, "empirical_risks", r)

    def index(self, model_id):
        return self.model_ids.index(model_id)

    def __getitem__(self, pair):
        a, b = pair
        return float(self.bemd[self.index(a), self.index(b)])


def comparison_matrix(rdists, empirical_risks):
    """Build a :class:`ComparisonMatrix` from ``{model_id: RDistribution}``."""
    ids = tuple(rdists)
    n = len(ids)
    m = np.full((n, n), 0.5)
    for i, j in itertools.combinations(range(n), 2):
        m[i, j] = _bemd(rdists[ids[i]], rdists[ids[j]])
        m[j, i] = _bemd(rdists[ids[j]], rdists[ids[i]])
    return ComparisonMatrix(ids, m, [empirical_risks[k] for k in ids])


@dataclass(frozen=True)
class RejectionOutcome:
    rejected: frozenset
    epsilon: float
    skipped_pairs: tuple = ()
    n_comparisons: int = 0
    rejected_by: dict = field(default_factory=dict)

    def to_dict(self, model_ids=None):
        order = list(model_ids) if model_ids is not None else sorted(self.rejected)
        return {
            "epsilon": self.epsilon,
            "rejected": [m for m in order if m in self.rejected],
            "rejected_by": {m: list(self.rejected_by[m]) for m in order if m in self.rejected_by},
            "skipped_pairs": [list(p) for p in self.skipped_pairs],
            "n_comparisons": self.n_comparisons,
        }


def _check_epsilon(epsilon):
    if not (0.5 < epsilon <= 1):
        raise ThresholdError(f"threshold must exceed 0.5 (and be at most 1), got {epsilon!r}")


def transitive_shortcut(bemd_ab, bemd_bc, epsilon):
    """Lower bound on B_AC implied by B_AB and B_BC, or None.

    Returns ``bemd_ab * bemd_bc`` when both exceed sqrt(epsilon), which then
    guarantees B_AC > epsilon without computing it.
    """
    if not epsilon > GOLDEN_RATIO**-2:
        raise ThresholdError(
            f"threshold below transitivity domain: epsilon={epsilon!r} <= phi^-2")
    root = math.sqrt(epsilon)
    if bemd_ab > root and bemd_bc > root:
        return bemd_ab * bemd_bc
    return None


def reject(matrix, epsilon):
    """Apply the rejection rule.

    Model j is rejected iff some model i has ``bemd[i, j] > epsilon`` and a
    strictly lower empirical risk. Equal risks never reject.

    Pairs (i, k) whose outcome is already implied through some j by
    :func:`transitive_shortcut` are listed in ``skipped_pairs``.
    """
    _check_epsilon(epsilon)
    ids = matrix.model_ids
    m, risks = matrix.bemd, matrix.empirical_risks
    n = len(ids)
    rejected_by = {}
    for j in range(n):
        beaters = [ids[i] for i in range(n)
                   if i != j and m[i, j] > epsilon and risks[i] < risks[j]]
        if beaters:
            rejected_by[ids[j]] = tuple(beaters)

    skipped = []
    if epsilon > GOLDEN_RATIO**-2:
        for i, k in itertools.permutations(range(n), 2):
            for j in range(n):
                if j in (i, k):
                    continue
                bound = transitive_shortcut(m[i, j], m[j, k], epsilon)
                if bound is not None:
                    skipped.append((ids[i], ids[k]))
                    break
    return RejectionOutcome(
        rejected=frozenset(rejected_by),
        epsilon=float(epsilon),
        skipped_pairs=tuple(skipped),
        n_comparisons=n * (n - 1) // 2,
        rejected_by=rejected_by,
    )


def logit(p):
    """ln(p / (1 - p)); maps 0 and 1 to -inf and +inf."""
    if p <= 0:
        return -math.inf
    if p >= 1:
        return math.inf
    return math.log(p) - math.log1p(-p)


def logistic(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def classical_criteria(losses_a, losses_b, bemd_ab=None, n_params_a=None, n_params_b=None):
    """Likelihood-based criteria for two models scored on the same test data.

    `losses_a`, `losses_b` are per-sample negative log likelihoods of the
    two fitted models, so ``log L = -sum(losses)``.

    Returns
    -------
    dict
        ``log10_Bl`` (log10 likelihood ratio), ``delta_aic`` (AIC_B - AIC_A,
        positive favours A), ``log10_BR_bar`` (risk difference in decades),
        ``log10_Bemd_bar`` (log10-odds of `bemd_ab`, None if not given).
    """
    la = np.asarray(losses_a, dtype=float)
    lb = np.asarray(losses_b, dtype=float)
    if la.shape != lb.shape or la.ndim != 1 or la.size == 0:
        raise ValueError("loss arrays must be 1-d and paired")
    if not (np.all(np.isfinite(la)) and np.all(np.isfinite(lb))):
        raise SingularLikelihoodError("singular likelihood: non-finite loss values")
    loglik_a, loglik_b = -la.sum(), -lb.sum()
    log10_bl = (loglik_a - loglik_b) / LN10
    ka = 0 if n_params_a is None else n_params_a
    kb = 0 if n_params_b is None else n_params_b
    # AIC = 2k - 2 ln L
    delta_aic = (2 * kb - 2 * loglik_b) - (2 * ka - 2 * loglik_a)
    log10_br = (-la.mean() + lb.mean()) / LN10
    out = {
        "log10_Bl": float(log10_bl),
        "delta_aic": float(delta_aic),
        "log10_BR_bar": float(log10_br),
        "log10_Bemd_bar": None,
    }
    if bemd_ab is not None:
        out["log10_Bemd_bar"] = logit(bemd_ab) / LN10
    return out
