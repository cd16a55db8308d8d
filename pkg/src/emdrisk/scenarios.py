"""End-to-end black-body comparisons: data -> fitted candidates -> R-distributions -> criteria."""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import blackbody as bb
from .emd import bemd, r_distribution_from_losses
from .selection import classical_criteria, comparison_matrix

__all__ = ["BlackbodyScenario", "DEMO_SCENARIOS", "compare_blackbody", "run_scenario"]


@dataclass(frozen=True)
class BlackbodyScenario:
    name: str
    process: bb.TrueProcessParams = field(default_factory=bb.TrueProcessParams)


# Two corners of the noise/wavelength/bias grid: a regime where the data
# cannot tell the models apart and one where Planck is plainly better.
DEMO_SCENARIOS = {
    "long-wavelength-biased": BlackbodyScenario(
        "long-wavelength-biased",
        bb.TrueProcessParams(s=2.0**12, T=4000.0, B0=1.5e-3, lambda_min=20.0,
                             lambda_max=1000.0, L=4096)),
    "visible-low-noise": BlackbodyScenario(
        "visible-low-noise",
        bb.TrueProcessParams(s=2.0**20, T=4000.0, B0=0.0, lambda_min=0.38,
                             lambda_max=0.75, L=4096)),
}


def _stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def compare_blackbody(train, test, c, seed, *, fit_temperature=True, T=None, rdist_options=None):
    """Fit both families on `train`, then compare them on `test`.

    Returns a dict with the fitted models, per-model loss samples and
    R-distributions, the comparison matrix and the classical criteria
    (Planck relative to Rayleigh-Jeans).
    """
    opts = dict(rdist_options or {})
    models, losses, rdists = {}, {}, {}
    for k, family in enumerate(bb.FAMILIES):
        if fit_temperature:
            models[family] = bb.fit_mle(train, family)
        else:
            models[family] = bb.fit_sigma(train, family, T)
        mixed, synth = bb.candidate_losses(test, models[family], _stream(seed, 1, k))
        losses[family] = (mixed, synth)
        # both families share the R-distribution seed (common random numbers)
        rdists[family] = r_distribution_from_losses(
            mixed, synth, c, int(_stream(seed, 2).integers(2**63)), model_id=family, **opts)
    risks = {f: float(np.mean(losses[f][0])) for f in bb.FAMILIES}
    matrix = comparison_matrix(rdists, risks)
    b = bemd(rdists[bb.PLANCK], rdists[bb.RAYLEIGH_JEANS])
    criteria = classical_criteria(losses[bb.PLANCK][0], losses[bb.RAYLEIGH_JEANS][0], b,
                                  n_params_a=2, n_params_b=2)
    return {
        "models": models,
        "losses": losses,
        "rdists": rdists,
        "matrix": matrix,
        "bemd_P_RJ": b,
        "criteria": criteria,
    }


def run_scenario(process, c, seed, rdist_options=None):
    """Generate independent train and test sets from `process` and compare the models on them."""
    train = bb.generate_dataset(process, _stream(seed, 0, 0))
    test = bb.generate_dataset(process, _stream(seed, 0, 1))
    out = compare_blackbody(train, test, c, seed, rdist_options=rdist_options)
    out["process"] = asdict(process)
    out["train"], out["test"] = train, test
    return out
