"""Black-body radiation toy problem: Planck vs Rayleigh-Jeans under Poisson noise.

Units: wavelengths in micrometres, radiance in kW / m^2 / nm / sr.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from sklearn.base import BaseEstimator

from .exceptions import GainTooLargeError, SingularLikelihoodError

__all__ = [
    "CONSTANTS",
    "PLANCK",
    "RAYLEIGH_JEANS",
    "FAMILIES",
    "TrueProcessParams",
    "SpectrumData",
    "CandidateModel",
    "BlackbodyRegressor",
    "planck_radiance",
    "rj_radiance",
    "radiance",
    "generate_dataset",
    "gaussian_loss",
    "fit_mle",
    "fit_sigma",
    "candidate_losses",
]

# CODATA 2018 (exact in the 2019 SI)
CONSTANTS = {
    "h": 6.62607015e-34,  # J s
    "c": 299792458.0,  # m / s
    "k_B": 1.380649e-23,  # J / K
}
_H, _C, _K = CONSTANTS["h"], CONSTANTS["c"], CONSTANTS["k_B"]
# W / m^2 / m / sr  ->  kW / m^2 / nm / sr
_SI_TO_RADIANCE = 1e-12
_UM = 1e-6

PLANCK = "Planck"
RAYLEIGH_JEANS = "RayleighJeans"
FAMILIES = (PLANCK, RAYLEIGH_JEANS)

T_BOUNDS = (1000.0, 5000.0)


def planck_radiance(lam, T):
    """Planck spectral radiance at wavelength `lam` (µm) and temperature `T` (K)."""
    lam_m = np.asarray(lam, dtype=float) * _UM
    T = np.asarray(T, dtype=float)
    if np.any(lam_m <= 0) or np.any(T <= 0):
        raise ValueError("wavelength and temperature must be positive")
    x = _H * _C / (lam_m * _K * T)
    # log-space: ln(2hc^2) - 5 ln(lam) - ln(expm1(x)); for large x,
    # ln(expm1(x)) = x + ln(1 - e^-x).
    with np.errstate(over="ignore"):
        log_em1 = np.where(x < 30, np.log(np.expm1(np.minimum(x, 30))), x + np.log1p(-np.exp(-x)))
    log_b = np.log(2 * _H * _C**2 * _SI_TO_RADIANCE) - 5 * np.log(lam_m) - log_em1
    with np.errstate(under="ignore"):
        out = np.exp(log_b)  # underflows to 0 for tiny lam*T
    return float(out) if out.ndim == 0 else out


def rj_radiance(lam, T):
    """Rayleigh-Jeans spectral radiance at `lam` (µm), `T` (K)."""
    lam_m = np.asarray(lam, dtype=float) * _UM
    T = np.asarray(T, dtype=float)
    if np.any(lam_m <= 0) or np.any(T <= 0):
        raise ValueError("wavelength and temperature must be positive")
    out = 2 * _C * _K * T / lam_m**4 * _SI_TO_RADIANCE
    return float(out) if np.ndim(out) == 0 else out


def radiance(family, lam, T):
    if family == PLANCK:
        return planck_radiance(lam, T)
    if family == RAYLEIGH_JEANS:
        return rj_radiance(lam, T)
    raise ValueError(f"unknown model family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class TrueProcessParams:
    """Data-generating process: B = Poisson(s * B_phys(lam, T)) / s + B0."""

    s: float = 1e5
    T: float = 4000.0
    B0: float = 0.0
    lambda_min: float = 15.0
    lambda_max: float = 30.0
    L: int = 4096
    family: str = PLANCK

    def __post_init__(self):
        if not self.s > 0 or not self.T > 0:
            raise ValueError("s and T must be positive")
        if not 0 < self.lambda_min < self.lambda_max:
            raise ValueError("need 0 < lambda_min < lambda_max")
        if self.L < 2:
            raise ValueError("L must be at least 2")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")

    def wavelengths(self):
        return np.linspace(self.lambda_min, self.lambda_max, self.L)


@dataclass(frozen=True, eq=False)
class SpectrumData:
    """Observed spectrum: wavelengths (µm) and radiances."""

    wavelength: np.ndarray
    radiance: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.wavelength, dtype=float)
        B = np.asarray(self.radiance, dtype=float)
        if lam.shape != B.shape or lam.ndim != 1:
            raise ValueError("wavelength and radiance must be 1-d arrays of equal length")
        object.__setattr__(self, "wavelength", lam)
        object.__setattr__(self, "radiance", B)

    def __len__(self):
        return self.wavelength.size


# numpy's Poisson sampler refuses means above roughly this value
_POISSON_MAX = np.iinfo(np.int64).max - 10 * np.sqrt(np.iinfo(np.int64).max)


def generate_dataset(params, rng):
    """Draw a spectrum from the true process on a uniform wavelength grid."""
    lam = params.wavelengths()
    mean_counts = params.s * radiance(params.family, lam, params.T)
    if not np.all(mean_counts < _POISSON_MAX):
        raise GainTooLargeError(
            f"gain too large: s*B reaches {np.max(mean_counts):.3g} counts (s={params.s!r})")
    counts = rng.poisson(mean_counts)
    return SpectrumData(lam, counts / params.s + params.B0)


@dataclass(frozen=True)
class CandidateModel:
    """A candidate: physical radiance plus additive Gaussian noise of std `sigma`."""

    family: str
    T: float
    sigma: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValueError("sigma must be positive")

    def mean(self, lam):
        return radiance(self.family, lam, self.T)

    def sample(self, lam, rng):
        lam = np.asarray(lam, dtype=float)
        return SpectrumData(lam, self.mean(lam) + rng.normal(0.0, self.sigma, lam.shape))


def gaussian_loss(data, model):
    """Per-point negative log likelihood of `data` under `model`."""
    if isinstance(data, SpectrumData):
        lam, B = data.wavelength, data.radiance
    else:
        lam, B = (np.asarray(v, dtype=float) for v in data)
    z = (B - model.mean(lam)) / model.sigma
    out = np.log(np.sqrt(2 * np.pi) * model.sigma) + 0.5 * z * z
    return float(out) if out.ndim == 0 else out


def fit_sigma(data, family, T):
    """Closed-form MLE of the noise std for fixed temperature."""
    resid = data.radiance - radiance(family, data.wavelength, T)
    sigma = float(np.sqrt(np.mean(resid**2)))
    if not sigma > 0:
        raise SingularLikelihoodError(
            f"singular likelihood: zero residual for {family} at T={T!r}")
    return CandidateModel(family, float(T), sigma)


def _profile_nll(data, family, log_T):
    resid = data.radiance - radiance(family, data.wavelength, np.exp(log_T))
    # L/2 * ln(mean squared residual), up to constants
    return 0.5 * np.log(np.mean(resid**2))


def fit_mle(data, family, T_bounds=T_BOUNDS, n_probes=64):
    """Maximum-likelihood (T, sigma) for one model family.

    T is found by a bounded scalar minimization of the profile likelihood in
    log T, started from the best of `n_probes` log-spaced probe temperatures
    so that the returned optimum is never worse than any probe.

    Raises
    ------
    SingularLikelihoodError
        If all radiances are identical, or the best fit has zero residual.
    """
    if len(data) < 3:
        raise ValueError("fit_mle needs at least 3 data points")
    if np.ptp(data.radiance) == 0:
        raise SingularLikelihoodError("singular likelihood: all radiance values are identical")
    lo, hi = np.log(T_bounds[0]), np.log(T_bounds[1])
    probes = np.linspace(lo, hi, n_probes)
    values = np.array([_profile_nll(data, family, u) for u in probes])
    k = int(np.argmin(values))
    a, b = probes[max(k - 1, 0)], probes[min(k + 1, n_probes - 1)]
    res = minimize_scalar(lambda u: _profile_nll(data, family, u), bounds=(a, b),
                          method="bounded", options={"xatol": 1e-7})
    u = float(res.x) if res.fun <= values[k] else float(probes[k])
    return fit_sigma(data, family, float(np.exp(u)))


class BlackbodyRegressor(BaseEstimator):
    """Estimator wrapper around :func:`fit_mle`.

    Parameters
    ----------
    family : {"Planck", "RayleighJeans"}
    T : float or None
        Fixed temperature; if None, T is fitted within `T_bounds`.
    T_bounds : tuple of float
    """

    def __init__(self, family=PLANCK, T=None, T_bounds=T_BOUNDS):
        self.family = family
        self.T = T
        self.T_bounds = T_bounds

    def fit(self, X, y):
        data = SpectrumData(np.ravel(X), np.ravel(y))
        if self.T is None:
            self.model_ = fit_mle(data, self.family, self.T_bounds)
        else:
            self.model_ = fit_sigma(data, self.family, self.T)
        self.T_ = self.model_.T
        self.sigma_ = self.model_.sigma
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("call fit before using this BlackbodyRegressor")

    def predict(self, X):
        self._check_fitted()
        return self.model_.mean(np.ravel(X))

    def loss(self, X, y):
        """Per-sample negative log likelihood."""
        self._check_fitted()
        return gaussian_loss(SpectrumData(np.ravel(X), np.ravel(y)), self.model_)

    def score(self, X, y):
        """Mean log likelihood (higher is better)."""
        return -float(np.mean(self.loss(X, y)))

    def sample(self, X, random_state):
        self._check_fitted()
        rng = np.random.default_rng(random_state)
        return self.model_.sample(np.ravel(X), rng).radiance


def candidate_losses(data, model, rng):
    """Mixed and synthetic loss samples of one fitted candidate.

    Mixed losses score the observed data; synthetic losses score data the
    candidate generates itself on the same wavelengths.
    """
    mixed = gaussian_loss(data, model)
    synth = gaussian_loss(model.sample(data.wavelength, rng), model)
    return mixed, synth
