import numpy as np
import pytest

from emdrisk.calibration import (BlackbodyOmega, CalibrationBin, CalibrationCurve, CalibrationRecord, bin_records, bq_criterion,
                                 experiment_seed, overconfidence_report, run_calibration)
from emdrisk.exceptions import CalibrationError, InsufficientExperimentsError, InvalidLossError

FAST = {"max_samples": 128, "depth": 6, "resolution": 256}


def rec(i, b, k):
    return CalibrationRecord(0.5, i, i, b, k, 1.0, 2.0)


class TestRun:
    def test_small_run(self):
        out = run_calibration(BlackbodyOmega(), [0.5, 2.0], 6, dataset_size=256, master_seed=1,
                              rdist_options=FAST)
        assert len(out) == 12
        assert out.failures == []
        assert [r.c for r in out] == [0.5] * 6 + [2.0] * 6
        assert [r.experiment_index for r in out[:6]] == list(range(6))
        for r in out:
            assert 0.0 <= r.bemd_value <= 1.0
            assert r.indicator == int(r.oracle_risk_a < r.oracle_risk_b)
            assert r.experiment_seed == experiment_seed(1, r.experiment_index)

    def test_reproducible_and_seed_dependent(self):
        a = run_calibration(BlackbodyOmega(), 0.5, 3, 128, master_seed=5, rdist_options=FAST)
        b = run_calibration(BlackbodyOmega(), 0.5, 3, 128, master_seed=5, rdist_options=FAST)
        c = run_calibration(BlackbodyOmega(), 0.5, 3, 128, master_seed=6, rdist_options=FAST)
        assert a == b
        assert a != c

    def test_parallel_matches_serial(self):
        a = run_calibration(BlackbodyOmega(), 0.5, 4, 128, master_seed=2, rdist_options=FAST)
        b = run_calibration(BlackbodyOmega(), 0.5, 4, 128, master_seed=2, rdist_options=FAST,
                            n_jobs=2)
        assert a == b

    def test_progress(self):
        seen = []
        run_calibration(BlackbodyOmega(), 0.5, 2, 128, rdist_options=FAST,
                        progress=lambda d, t: seen.append((d, t)))
        assert seen == [(1, 2), (2, 2)]

    def test_invalid(self):
        with pytest.raises(ValueError):
            run_calibration(BlackbodyOmega(), -1.0, 2)
        with pytest.raises(ValueError):
            run_calibration(BlackbodyOmega(), 0.5, 0)


class _FlakyOmega:
    """Replicates fail for odd seeds."""

    candidates = ("a", "b")

    def __init__(self, fail_all=False):
        self.fail_all = fail_all

    def replicate(self, seed, dataset_size):
        return _FlakyReplicate(seed, self.fail_all)


class _FlakyReplicate:
    def __init__(self, seed, fail_all):
        self.seed = seed
        self.fail = fail_all or seed % 2 == 1

    def losses(self, model):
        if self.fail:
            raise InvalidLossError("invalid loss sample: synthetic failure")
        rng = np.random.default_rng(self.seed)
        x = rng.normal(size=200) + (0.0 if model == "a" else 0.5)
        return x, x + 0.1

    def oracle_risk(self, model):
        return 0.0 if model == "a" else 0.5


def test_failures_are_recorded_then_raise():
    with pytest.raises(CalibrationError) as info:
        run_calibration(_FlakyOmega(), 0.5, 6, rdist_options=FAST)
    assert info.value.failures
    assert all("experiment_seed" in f for f in info.value.failures)


def test_all_good_custom_omega():
    class Good(_FlakyOmega):
        def replicate(self, seed, dataset_size):
            r = _FlakyReplicate(seed, False)
            r.fail = False
            return r

    out = run_calibration(Good(), 0.5, 4, rdist_options=FAST)
    assert all(r.indicator == 1 for r in out)


class TestBinning:
    def test_equal_count(self):
        recs = [rec(i, i / 10, i % 2) for i in range(10)]
        curve = bin_records(recs, 5)
        np.testing.assert_array_equal(curve.counts, [2] * 5)
        np.testing.assert_allclose(curve.mean_bemd, [0.05, 0.25, 0.45, 0.65, 0.85])
        np.testing.assert_allclose(curve.mean_bconf, [0.5] * 5)

    def test_uneven(self):
        curve = bin_records([rec(i, 0.5, 1) for i in range(7)], 3)
        assert sorted(curve.counts.tolist()) == [2, 2, 3]

    def test_insufficient(self):
        with pytest.raises(InsufficientExperimentsError, match="insufficient experiments"):
            bin_records([rec(0, 0.5, 1)], 2)


class TestOverconfidence:
    def test_flags(self):
        recs = [rec(0, 0.95, 1), rec(1, 0.95, 0), rec(2, 0.9, 1), rec(3, 0.9, 1),
                rec(4, 0.1, 1), rec(5, 0.1, 0)]
        curve = bin_records(recs, 3)
        rep = overconfidence_report(curve, 0.05)
        flagged = {v["bin"]: v for v in rep["violations"]}
        # bin 1 (bemd 0.9, bconf 1) is underconfident, not flagged
        assert set(flagged) == {0, 2}
        assert flagged[0]["side"] == "below" and not flagged[0]["opposite_side"]
        assert flagged[2]["side"] == "above" and not flagged[2]["opposite_side"]
        assert rep["fraction_flagged"] == pytest.approx(2 / 3)

    def test_opposite_side(self):
        curve = CalibrationCurve((CalibrationBin(0.1, 0.6, 4),))
        (v,) = overconfidence_report(curve)["violations"]
        assert v["side"] == "below" and v["opposite_side"]

    def test_tolerance(self):
        curve = bin_records([rec(0, 0.6, 1), rec(1, 0.6, 0)], 1)
        assert overconfidence_report(curve, 0.05)["n_flagged"] == 1
        assert overconfidence_report(curve, 0.2)["n_flagged"] == 0


class TestBQ:
    def test_no_noise(self):
        a = np.array([1.0, 2.0, 3.0, 4.0])
        assert bq_criterion(a, a + 1, 0.0, 0) == 1.0
        assert bq_criterion(a + 1, a, 0.0, 0) == 0.0

    def test_large_noise_is_half(self):
        a = np.random.default_rng(0).normal(size=500)
        assert bq_criterion(a, a + 0.01, 1e6, 0, n_pairs=20000) == pytest.approx(0.5, abs=0.02)

    def test_unpaired(self):
        with pytest.raises(ValueError):
            bq_criterion([1.0, 2.0], [1.0, 2.0, 3.0], 0.1, 0)
