"""Model comparison with empirical model discrepancy (EMD) risk distributions.

Typical use::

    from emdrisk import EMDSelector
    sel = EMDSelector(c=0.5, epsilon=0.95).fit(mixed_losses, synth_losses)
    sel.matrix_.bemd, sel.get_support()
"""

from .calibration import (BlackbodyOmega, CalibrationCurve, CalibrationRecord, bin_records,
                          bq_criterion, overconfidence_report, run_calibration)
from .emd import (DiscrepancyFn, RDistribution, bemd, bootstrap_risk, delta_emd,
                  r_distribution_from_losses, sample_r_distribution)
from .estimators import EMDSelector, RDistributionEstimator
from .exceptions import EMDError
from .hb import BetaParams, HBParams, PPFRealization, sample_realization, solve_alpha_beta
from .ppf import EmpiricalPPF, build_empirical_ppf, empirical_cdf_value, risk
from .selection import (ComparisonMatrix, RejectionOutcome, classical_criteria, reject,
                        transitive_shortcut)
from .special import digamma, trigamma

__all__ = [
    "BetaParams", "BlackbodyOmega", "CalibrationCurve", "CalibrationRecord", "ComparisonMatrix",
    "DiscrepancyFn", "EMDError", "EMDSelector", "EmpiricalPPF", "HBParams", "PPFRealization",
    "RDistribution", "RDistributionEstimator", "RejectionOutcome", "bemd", "bin_records",
    "bootstrap_risk", "bq_criterion", "build_empirical_ppf", "classical_criteria", "delta_emd",
    "digamma", "empirical_cdf_value", "overconfidence_report", "r_distribution_from_losses",
    "reject", "risk", "run_calibration", "sample_r_distribution", "sample_realization",
    "solve_alpha_beta", "transitive_shortcut", "trigamma",
]
