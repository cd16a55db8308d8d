import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from emdrisk.emd import r_distribution_from_losses
from emdrisk.estimators import EMDSelector, RDistributionEstimator

FAST = dict(resolution=256, depth=6, max_samples=256)


@pytest.fixture
def losses():
    rng = np.random.default_rng(0)
    base = rng.gamma(2.0, size=1000)
    mixed = {"good": base, "bad": base + 2.0, "close": base + 0.05}
    synth = {"good": base + 0.01, "bad": base + 1.0, "close": base + 0.1}
    return mixed, synth


class TestRDistributionEstimator:
    def test_params(self):
        est = RDistributionEstimator(c=0.25, random_state=3)
        assert est.get_params()["c"] == 0.25
        assert clone(est).get_params() == est.get_params()

    def test_fit_matches_functional(self, losses):
        mixed, synth = losses
        est = RDistributionEstimator(c=0.5, random_state=4, **FAST).fit(mixed["bad"], synth["bad"])
        rd = r_distribution_from_losses(mixed["bad"], synth["bad"], 0.5, 4, **FAST)
        np.testing.assert_array_equal(est.rdist_.risks, rd.risks)
        assert est.empirical_risk_ == pytest.approx(mixed["bad"].mean())
        assert est.delta_.values.shape == (257,)

    def test_sample_paths(self, losses):
        mixed, synth = losses
        est = RDistributionEstimator(**FAST).fit(mixed["good"], synth["good"])
        paths = est.sample_paths(5)
        assert paths.shape == (5, 65)
        assert np.all(np.diff(paths, axis=1) >= 0)

    def test_predict_proba(self, losses):
        mixed, synth = losses
        a = RDistributionEstimator(**FAST).fit(mixed["good"], synth["good"])
        b = RDistributionEstimator(**FAST).fit(mixed["bad"], synth["bad"])
        assert a.predict_proba(b) > 0.99
        assert a.predict_proba(b) + b.predict_proba(a) == 1.0

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            RDistributionEstimator().sample_paths(2)


class TestSelector:
    def test_fit_predict(self, losses):
        sel = EMDSelector(c=0.5, epsilon=0.95, **FAST).fit(*losses)
        assert sel.model_ids_ == ("good", "bad", "close")
        np.testing.assert_array_equal(sel.predict(), [False, True, False])
        assert sel.get_support() == ["good", "close"]
        assert sel.matrix_["good", "bad"] > 0.95

    def test_order_independent(self, losses):
        mixed, synth = losses
        a = EMDSelector(**FAST).fit(mixed, synth)
        rev = {k: mixed[k] for k in reversed(list(mixed))}
        b = EMDSelector(**FAST).fit(rev, synth)
        assert a.matrix_["good", "close"] == b.matrix_["good", "close"]

    def test_common_seed(self, losses):
        sel = EMDSelector(random_state=3, **FAST).fit(*losses)
        seeds = {e.rdist_.seed for e in sel.estimators_.values()}
        assert seeds == {3}

    def test_mismatched_models(self, losses):
        mixed, synth = losses
        with pytest.raises(ValueError):
            EMDSelector().fit(mixed, {"good": synth["good"]})

    def test_single_model(self, losses):
        mixed, synth = losses
        with pytest.raises(ValueError):
            EMDSelector().fit({"good": mixed["good"]}, {"good": synth["good"]})

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            EMDSelector().predict()
