import math

import numpy as np
import pytest

from emdrisk.emd import RDistribution
from emdrisk.exceptions import SingularLikelihoodError, ThresholdError
from emdrisk.selection import (GOLDEN_RATIO, ComparisonMatrix, classical_criteria,
                               comparison_matrix, logistic, logit, reject, transitive_shortcut)

# four-candidate comparison table (rows a, columns b: P(R_a < R_b)), c = 2**-2
TABLE = np.array([
    [0.500, 0.483, 0.846, 0.821],
    [0.517, 0.500, 0.972, 0.940],
    [0.154, 0.028, 0.500, 0.463],
    [0.179, 0.060, 0.537, 0.500],
])
IDS = ("A", "B", "C", "D")
# empirical risks ordered consistently with the table: B < A < D < C
RISKS = np.array([1.0, 0.9, 1.3, 1.2])


@pytest.fixture
def table():
    return ComparisonMatrix(IDS, TABLE, RISKS)


class TestMatrix:
    def test_lookup(self, table):
        assert table["B", "C"] == 0.972
        assert table.index("D") == 3

    def test_symmetric_entries_sum_to_one(self, table):
        np.testing.assert_allclose(table.bemd + table.bemd.T, 1.0, atol=1e-12)

    @pytest.mark.parametrize("bad", [
        np.array([[0.5, 0.7], [0.7, 0.5]]),
        np.array([[0.4, 0.6], [0.4, 0.6]]),
        np.array([[0.5, 1.2], [-0.2, 0.5]]),
    ])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            ComparisonMatrix(("x", "y"), bad, [1.0, 2.0])

    def test_duplicate_ids(self):
        with pytest.raises(ValueError):
            ComparisonMatrix(("x", "x"), np.full((2, 2), 0.5), [1.0, 2.0])

    def test_from_rdists(self):
        r = {"p": RDistribution([1.0, 2.0], 0.5, 0), "q": RDistribution([3.0, 4.0], 0.5, 0),
             "s": RDistribution([1.5, 3.5], 0.5, 0)}
        m = comparison_matrix(r, {"p": 1.0, "q": 3.0, "s": 2.0})
        assert m["p", "q"] == 1.0
        assert m["q", "p"] == 0.0
        assert m["p", "s"] == 0.75
        assert m["s", "p"] == 0.25


class TestReject:
    def test_table_at_095(self, table):
        out = reject(table, 0.95)
        assert out.rejected == {"C"}
        assert out.rejected_by["C"] == ("B",)
        assert out.n_comparisons == 6

    def test_table_at_090(self, table):
        assert reject(table, 0.9).rejected == {"C", "D"}

    def test_table_at_080(self, table):
        out = reject(table, 0.8)
        assert out.rejected == {"C", "D"}
        assert out.rejected_by["C"] == ("A", "B")

    def test_risk_order_required(self):
        # high bemd alone does not reject when the empirical risk disagrees
        m = ComparisonMatrix(("x", "y"), [[0.5, 0.99], [0.01, 0.5]], [2.0, 1.0])
        assert reject(m, 0.95).rejected == frozenset()

    def test_equal_risks_never_reject(self):
        m = ComparisonMatrix(("x", "y"), [[0.5, 0.99], [0.01, 0.5]], [1.0, 1.0])
        assert reject(m, 0.95).rejected == frozenset()

    def test_strict_threshold(self):
        m = ComparisonMatrix(("x", "y"), [[0.5, 0.95], [0.05, 0.5]], [1.0, 2.0])
        assert reject(m, 0.95).rejected == frozenset()

    @pytest.mark.parametrize("eps", [0.5, 0.3, 1.01, -1.0])
    def test_threshold_domain(self, table, eps):
        with pytest.raises(ThresholdError, match="threshold must exceed 0.5"):
            reject(table, eps)

    def test_to_dict(self, table):
        d = reject(table, 0.95).to_dict(IDS)
        assert d["rejected"] == ["C"]
        assert d["rejected_by"] == {"C": ["B"]}
        assert d["epsilon"] == 0.95

    def test_skipped_pairs(self):
        m = ComparisonMatrix(("x", "y", "z"),
                             [[0.5, 0.99, 0.999], [0.01, 0.5, 0.99], [0.001, 0.01, 0.5]],
                             [1.0, 2.0, 3.0])
        out = reject(m, 0.95)
        assert ("x", "z") in out.skipped_pairs
        assert out.rejected == {"y", "z"}


class TestTransitivity:
    def test_bound(self):
        assert transitive_shortcut(0.99, 0.98, 0.95) == pytest.approx(0.99 * 0.98)

    def test_below_root(self):
        assert transitive_shortcut(0.97, 0.96, 0.95) is None

    def test_domain(self):
        with pytest.raises(ThresholdError, match="transitivity domain"):
            transitive_shortcut(0.9, 0.9, GOLDEN_RATIO**-2)

    def test_bound_exceeds_epsilon(self):
        rng = np.random.default_rng(0)
        for eps in rng.uniform(GOLDEN_RATIO**-2 + 1e-9, 1, 200):
            a, b = rng.uniform(math.sqrt(eps), 1, 2)
            bound = transitive_shortcut(a, b, eps)
            if bound is not None:
                assert bound > eps


class TestLogit:
    def test_values(self):
        assert logit(0.5) == 0.0
        assert logit(0.0) == -math.inf
        assert logit(1.0) == math.inf
        assert logistic(logit(0.3)) == pytest.approx(0.3, rel=1e-14)

    def test_extremes(self):
        assert logistic(-800.0) == 0.0
        assert logistic(800.0) == 1.0


class TestClassicalCriteria:
    def test_definitions(self):
        la = np.array([1.0, 2.0, 3.0])
        lb = np.array([2.0, 2.0, 4.0])
        out = classical_criteria(la, lb, bemd_ab=0.9, n_params_a=2, n_params_b=3)
        assert out["log10_Bl"] == pytest.approx(2.0 / math.log(10))
        # AIC_b - AIC_a = (6 + 16) - (4 + 12)
        assert out["delta_aic"] == pytest.approx(6.0)
        assert out["log10_BR_bar"] == pytest.approx((2 / 3) / math.log(10))
        assert out["log10_Bemd_bar"] == pytest.approx(math.log10(9.0))

    def test_certain_bemd_is_infinite(self):
        out = classical_criteria([1.0, 1.0], [2.0, 2.0], bemd_ab=1.0)
        assert out["log10_Bemd_bar"] == math.inf

    def test_no_bemd(self):
        assert classical_criteria([1.0], [1.0])["log10_Bemd_bar"] is None

    def test_nonfinite(self):
        with pytest.raises(SingularLikelihoodError, match="singular likelihood"):
            classical_criteria([1.0, np.inf], [1.0, 2.0])

    def test_unpaired(self):
        with pytest.raises(ValueError):
            classical_criteria([1.0, 2.0], [1.0])
