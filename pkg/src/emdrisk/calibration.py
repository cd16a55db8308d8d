"""Calibration experiments for the sensitivity constant c.

Each experiment draws a data-generating process from an epistemic
distribution, computes B^EMD between two candidates, and records whether
the first candidate truly has the lower risk. Binning those pairs by
B^EMD gives the calibration curve.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Protocol

import numpy as np

from . import blackbody as bb
from .emd import DEFAULT_REL_SE_TARGET, bemd, r_distribution_from_losses
from .exceptions import CalibrationError, EMDError, InsufficientExperimentsError
from .validation import check_losses

__all__ = [
    "EpistemicDistribution",
    "BlackbodyOmega",
    "CalibrationRecord",
    "CalibrationBin",
    "CalibrationCurve",
    "RecordList",
    "experiment_seed",
    "run_calibration",
    "bin_records",
    "overconfidence_report",
    "bq_criterion",
    "MAX_FAILURE_FRACTION",
]

logger = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.10
ORACLE_SIZE = 2**12


class Replicate(Protocol):
    def losses(self, model: str) -> tuple: ...

    def oracle_risk(self, model: str) -> float: ...


class EpistemicDistribution(Protocol):
    """Anything that turns a seed into a replicate with fitted candidates."""

    def replicate(self, seed: int, dataset_size: int) -> Replicate: ...


def _stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


class _BlackbodyReplicate:
    def __init__(self, omega, seed, dataset_size):
        rng = _stream(seed, 0)
        family = bb.FAMILIES[int(rng.integers(2))]
        B0 = float(rng.uniform(-omega.bias_range, omega.bias_range))
        self.process = bb.TrueProcessParams(
            s=omega.s, T=omega.T, B0=B0, lambda_min=omega.lambda_min,
            lambda_max=omega.lambda_max, L=dataset_size, family=family)
        self.data = bb.generate_dataset(self.process, rng)
        # T is held at the generating value; only sigma is fitted.
        self.models = {f: bb.fit_sigma(self.data, f, omega.T) for f in bb.FAMILIES}
        self._seed = seed
        self._oracle_size = omega.oracle_size
        self._oracle = None

    def losses(self, model):
        m = self.models[model]
        return bb.candidate_losses(self.data, m, _stream(self._seed, 1, bb.FAMILIES.index(model)))

    def oracle_risk(self, model):
        if self._oracle is None:
            process = bb.TrueProcessParams(**{**asdict(self.process), "L": self._oracle_size})
            self._oracle = bb.generate_dataset(process, _stream(self._seed, 2))
        return float(np.mean(bb.gaussian_loss(self._oracle, self.models[model])))


@dataclass(frozen=True)
class BlackbodyOmega:
    """Epistemic distribution of black-body experiments.

    The physical model is Planck or Rayleigh-Jeans with equal probability
    and the detector bias is uniform in ``[-bias_range, bias_range]``.
    """

    s: float = 1e5
    T: float = 4000.0
    bias_range: float = 1e-4
    lambda_min: float = 15.0
    lambda_max: float = 30.0
    oracle_size: int = ORACLE_SIZE
    candidates: tuple = (bb.PLANCK, bb.RAYLEIGH_JEANS)

    def replicate(self, seed, dataset_size):
        return _BlackbodyReplicate(self, seed, dataset_size)


@dataclass(frozen=True)
class CalibrationRecord:
    c: float
    experiment_index: int
    experiment_seed: int
    bemd_value: float
    indicator: int
    oracle_risk_a: float
    oracle_risk_b: float

    FIELDS = ("c", "experiment_index", "experiment_seed", "bemd_value", "indicator",
              "oracle_risk_a", "oracle_risk_b")


class RecordList(list):
    """List of records that also carries the failures of the run."""

    def __init__(self, records=(), failures=()):
        super().__init__(records)
        self.failures = list(failures)


def experiment_seed(master_seed, index):
    """64-bit seed of experiment `index`, derived from the master seed."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def _run_experiment(task):
    omega, candidates, cs, index, seed, dataset_size, rdist_options = task
    records, failures = [], []
    try:
        rep = omega.replicate(seed, dataset_size)
        losses = [rep.losses(m) for m in candidates]
        oracle = [rep.oracle_risk(m) for m in candidates]
    except EMDError as exc:
        return [], [{"experiment_index": index, "experiment_seed": seed, "c": c,
                     "error": str(exc)} for c in cs]
    indicator = int(oracle[0] < oracle[1])
    for c in cs:
        try:
            rd = [r_distribution_from_losses(mixed, synth, c, experiment_seed(seed, 0),
                                             **rdist_options)
                  for mixed, synth in losses]
        except EMDError as exc:
            failures.append({"experiment_index": index, "experiment_seed": seed, "c": c,
                             "error": str(exc)})
            continue
        records.append(CalibrationRecord(float(c), index, seed, bemd(rd[0], rd[1]),
                                         indicator, oracle[0], oracle[1]))
    return records, failures


def run_calibration(omega, c, n_experiments, dataset_size=4096, master_seed=0,
                    candidates=None, n_jobs=1, rdist_options=None, progress=None):
    """Run `n_experiments` calibration experiments for one or more values of c.

    Parameters
    ----------
    omega : EpistemicDistribution
    c : float or sequence of float
    n_experiments : int
    dataset_size : int
        Number of observations per replicate dataset.
    master_seed : int
    candidates : pair of str, optional
        Defaults to ``omega.candidates``.
    n_jobs : int
        Worker processes. Results do not depend on this value.
    rdist_options : dict, optional
        Extra keyword arguments for :func:`emdrisk.emd.r_distribution_from_losses`.
    progress : callable, optional
        Called as ``progress(done, total)`` after each experiment.

    Returns
    -------
    RecordList
        Records sorted by (c, experiment index); ``.failures`` lists skipped
        (experiment, c) units with their seeds.

    Raises
    ------
    CalibrationError
        If more than 10% of the (experiment, c) units failed.
    """
    cs = [float(c)] if np.ndim(c) == 0 else [float(x) for x in c]
    if n_experiments < 1:
        raise ValueError("n_experiments must be at least 1")
    if any(not (x >= 0 and math.isfinite(x)) for x in cs):
        raise ValueError("c must be finite and non-negative")
    candidates = tuple(candidates or omega.candidates)
    if len(candidates) != 2:
        raise ValueError("calibration compares exactly two candidates")
    opts = dict(rdist_options or {})
    tasks = [(omega, candidates, cs, i, experiment_seed(master_seed, i), dataset_size, opts)
             for i in range(n_experiments)]

    results = []
    if n_jobs == 1:
        for k, t in enumerate(tasks):
            results.append(_run_experiment(t))
            if progress:
                progress(k + 1, n_experiments)
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            for k, res in enumerate(pool.map(_run_experiment, tasks, chunksize=4)):
                results.append(res)
                if progress:
                    progress(k + 1, n_experiments)

    records = [r for recs, _ in results for r in recs]
    failures = [f for _, fails in results for f in fails]
    for f in failures:
        logger.warning("experiment %d (seed %d, c=%g) failed: %s",
                       f["experiment_index"], f["experiment_seed"], f["c"], f["error"])
    if len(failures) > MAX_FAILURE_FRACTION * n_experiments * len(cs):
        raise CalibrationError(
            f"{len(failures)} of {n_experiments * len(cs)} calibration experiments failed",
            failures)
    records.sort(key=lambda r: (cs.index(r.c), r.experiment_index))
    return RecordList(records, failures)


@dataclass(frozen=True)
class CalibrationBin:
    mean_bemd: float
    mean_bconf: float
    count: int


@dataclass(frozen=True)
class CalibrationCurve:
    bins: tuple

    @property
    def mean_bemd(self):
        return np.array([b.mean_bemd for b in self.bins])

    @property
    def mean_bconf(self):
        return np.array([b.mean_bconf for b in self.bins])

    @property
    def counts(self):
        return np.array([b.count for b in self.bins])


def bin_records(records, n_bins):
    """Sort records by B^EMD and average them in `n_bins` equal-count bins."""
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    if len(records) < n_bins:
        raise InsufficientExperimentsError(
            f"insufficient experiments: {len(records)} records for {n_bins} bins")
    order = sorted(records, key=lambda r: (r.bemd_value, r.experiment_index))
    b = np.array([r.bemd_value for r in order])
    k = np.array([r.indicator for r in order], dtype=float)
    bins = [CalibrationBin(float(bb_.mean()), float(kk.mean()), int(bb_.size))
            for bb_, kk in zip(np.array_split(b, n_bins), np.array_split(k, n_bins))]
    return CalibrationCurve(tuple(bins))


def overconfidence_report(curve, tolerance=0.05):
    """Bins where B^EMD is further from 1/2 than the observed B^conf.

    A bin is flagged when ``|mean_bemd - 0.5| > |mean_bconf - 0.5| + tolerance``.
    Each violation records on which side of 1/2 the B^EMD lies and whether
    B^conf lies on the opposite side.
    """
    violations = []
    for i, b in enumerate(curve.bins):
        db, dk = b.mean_bemd - 0.5, b.mean_bconf - 0.5
        if abs(db) > abs(dk) + tolerance:
            violations.append({
                "bin": i,
                "mean_bemd": b.mean_bemd,
                "mean_bconf": b.mean_bconf,
                "count": b.count,
                "side": "above" if db > 0 else "below",
                "opposite_side": bool(db * dk < 0),
            })
    n = len(curve.bins)
    return {
        "tolerance": tolerance,
        "n_bins": n,
        "n_flagged": len(violations),
        "fraction_flagged": len(violations) / n if n else 0.0,
        "violations": violations,
    }


def bq_criterion(losses_a, losses_b, c_q, rng, n_pairs=4096):
    """Monte Carlo estimate of P(Q_a < Q_b + eta) with eta ~ N(0, c_q^2).

    `losses_a` and `losses_b` must be paired (same data points); pairs are
    resampled with replacement.
    """
    la = check_losses(losses_a, name="losses_a")
    lb = check_losses(losses_b, name="losses_b")
    if la.shape != lb.shape:
        raise ValueError("paired losses must have equal length")
    if not c_q >= 0:
        raise ValueError("c_q must be non-negative")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    idx = gen.integers(0, la.size, n_pairs)
    eta = gen.normal(0.0, c_q, n_pairs) if c_q > 0 else np.zeros(n_pairs)
    return float(np.mean(la[idx] < lb[idx] + eta))
