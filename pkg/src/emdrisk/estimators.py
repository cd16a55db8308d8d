"""Estimator-style front end (fit / predict / get_params) over the functional API."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .emd import (DEFAULT_REL_SE_TARGET, MAX_SAMPLES, MIN_SAMPLES, bemd, delta_emd,
                  sample_r_distribution)
from .hb import DEFAULT_DEPTH, HBParams, sample_realizations
from .ppf import DEFAULT_RESOLUTION, build_empirical_ppf, risk
from .selection import comparison_matrix, reject
from .validation import check_losses

__all__ = ["RDistributionEstimator", "EMDSelector"]


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(
            f"This {type(est).__name__} instance is not fitted yet; call 'fit' first.")


class RDistributionEstimator(BaseEstimator):
    """Risk distribution of a single model.

    Parameters
    ----------
    c : float, default=0.5
        Sensitivity constant.
    resolution : int, default=1024
        PPF grid resolution K.
    depth : int, default=8
        Refinement levels of the hierarchical beta process.
    rel_se_target : float, default=2**-5
    min_samples, max_samples : int
    random_state : int, default=0

    Attributes
    ----------
    q_mixed_, q_synth_ : EmpiricalPPF
    delta_ : DiscrepancyFn
    params_ : HBParams
    rdist_ : RDistribution
    empirical_risk_ : float
    """

    def __init__(self, c=0.5, resolution=DEFAULT_RESOLUTION, depth=DEFAULT_DEPTH,
                 rel_se_target=DEFAULT_REL_SE_TARGET, min_samples=MIN_SAMPLES,
                 max_samples=MAX_SAMPLES, random_state=0):
        self.c = c
        self.resolution = resolution
        self.depth = depth
        self.rel_se_target = rel_se_target
        self.min_samples = min_samples
        self.max_samples = max_samples
        self.random_state = random_state

    def fit(self, mixed_losses, synth_losses):
        mixed = check_losses(mixed_losses, name="mixed losses")
        synth = check_losses(synth_losses, name="synthetic losses")
        self.q_mixed_ = build_empirical_ppf(mixed, self.resolution)
        self.q_synth_ = build_empirical_ppf(synth, self.resolution)
        self.delta_ = delta_emd(self.q_mixed_, self.q_synth_)
        self.params_ = HBParams(self.q_mixed_, self.delta_, self.c, self.depth)
        self.rdist_ = sample_r_distribution(
            self.params_, self.random_state, self.rel_se_target,
            self.min_samples, self.max_samples)
        self.empirical_risk_ = float(mixed.mean())
        return self

    def sample_paths(self, n, seed=None):
        """`n` PPF realizations, shape ``(n, 2**depth + 1)``."""
        _check_fitted(self, "params_")
        return sample_realizations(self.params_, self.random_state if seed is None else seed, n)

    def predict_proba(self, other):
        """P(R_self < R_other) against another fitted estimator or RDistribution."""
        _check_fitted(self, "rdist_")
        return bemd(self.rdist_, getattr(other, "rdist_", other))


class EMDSelector(BaseEstimator):
    """Compare several models and apply the rejection rule.

    ``fit`` takes two mappings ``{model_id: losses}``: losses of each model
    on the observed data (mixed) and on data the model generated itself
    (synthetic).

    Attributes
    ----------
    model_ids_ : tuple of str
    rdists_ : dict of RDistribution
    matrix_ : ComparisonMatrix
    outcome_ : RejectionOutcome
    """

    def __init__(self, c=0.5, epsilon=0.95, resolution=DEFAULT_RESOLUTION,
                 depth=DEFAULT_DEPTH, rel_se_target=DEFAULT_REL_SE_TARGET,
                 min_samples=MIN_SAMPLES, max_samples=MAX_SAMPLES, random_state=0):
        self.c = c
        self.epsilon = epsilon
        self.resolution = resolution
        self.depth = depth
        self.rel_se_target = rel_se_target
        self.min_samples = min_samples
        self.max_samples = max_samples
        self.random_state = random_state

    def _estimator(self):
        # every model gets the same seed (common random numbers): identical
        # inputs give identical R-distributions, whatever the model order
        params = self.get_params()
        params.pop("epsilon")
        return RDistributionEstimator(**params)

    def fit(self, mixed_losses, synth_losses):
        if set(mixed_losses) != set(synth_losses):
            raise ValueError("mixed and synthetic losses must cover the same models")
        if len(mixed_losses) < 2:
            raise ValueError("need at least two models to compare")
        self.model_ids_ = tuple(mixed_losses)
        self.estimators_ = {m: self._estimator().fit(mixed_losses[m], synth_losses[m])
                            for m in self.model_ids_}
        self.rdists_ = {m: e.rdist_.with_model_id(m) for m, e in self.estimators_.items()}
        risks = {m: e.empirical_risk_ for m, e in self.estimators_.items()}
        self.matrix_ = comparison_matrix(self.rdists_, risks)
        self.outcome_ = reject(self.matrix_, self.epsilon)
        return self

    def predict(self):
        """Boolean array, True where the model (in ``model_ids_`` order) is rejected."""
        _check_fitted(self, "outcome_")
        return np.array([m in self.outcome_.rejected for m in self.model_ids_])

    def get_support(self):
        """Model ids that survive the rejection rule."""
        _check_fitted(self, "outcome_")
        return [m for m in self.model_ids_ if m not in self.outcome_.rejected]
