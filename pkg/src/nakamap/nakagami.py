"""Nakagami distribution: density, sampling, and parameter estimation.

The envelope amplitude x follows a Nakagami law with shape mu > 0 and
scale omega > 0,

    p(x) = 2 (mu/omega)^mu x^(2 mu - 1) exp(-mu x^2 / omega) / Gamma(mu),

equivalently x^2 ~ Gamma(shape=mu, scale=omega/mu).  mu < 1 is
pre-Rayleigh, mu = 1 Rayleigh, mu > 1 post-Rayleigh.  Estimation routines
delegate to the kernel backend so scalar fits and the mapping loops share
one arithmetic path.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.special as sps

from ._backend import kernels
from .errors import (
    ContainsZeroOnly,
    DegenerateSample,
    ExcessiveZeros,
    NegativeArgument,
    NonPositiveArgument,
    TooFewSamples,
)

# Shape estimates are clamped to this range; outside it the sample carries
# essentially no usable shape information.
MU_MIN = 0.02
MU_MAX = 100.0

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NakagamiParams:
    """A (mu, omega) parameter pair, both finite and > 0."""

    mu: float
    omega: float

    def __post_init__(self):
        mu = float(self.mu)
        omega = float(self.omega)
        if not (math.isfinite(mu) and mu > 0.0):
            raise ValueError(f"mu must be finite and > 0, got {self.mu!r}")
        if not (math.isfinite(omega) and omega > 0.0):
            raise ValueError(f"omega must be finite and > 0, got {self.omega!r}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "omega", omega)


@dataclass(frozen=True)
class SampleSet:
    """1-D envelope sample vector: finite, nonnegative, at least one value."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if arr.size < 1:
            raise ValueError("SampleSet needs at least one value")
        if not np.isfinite(arr).all():
            raise ValueError("non-finite sample value")
        if (arr < 0.0).any():
            raise NegativeArgument("negative sample value")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self):
        return int(self.values.size)


@dataclass(frozen=True)
class FitQuality:
    """Goodness of fit: RMS CDF distance over n sorted samples."""

    rmse: float
    n: int


def pdf(params, x):
    """Density at envelope amplitude x >= 0."""
    x = float(x)
    if x < 0.0:
        raise NegativeArgument(f"x = {x} < 0")
    mu, omega = params.mu, params.omega
    if x == 0.0:
        if mu > 0.5:
            return 0.0
        if mu == 0.5:
            return math.sqrt(2.0 / (math.pi * omega))
        return math.inf
    t = mu * (x * x) / omega
    lx = math.log(x)
    # Log-space when the direct product would overflow/underflow.
    if mu > 50.0 or t > 700.0 or abs((2.0 * mu - 1.0) * lx) > 600.0:
        logp = (
            math.log(2.0)
            + mu * (math.log(mu) - math.log(omega))
            + (2.0 * mu - 1.0) * lx
            - t
            - float(sps.gammaln(mu))
        )
        return math.exp(logp)
    return 2.0 * (mu / omega) ** mu * x ** (2.0 * mu - 1.0) * math.exp(-t) / math.gamma(mu)


def cdf(params, x):
    """P(X <= x): regularized lower incomplete gamma at mu * x^2 / omega."""
    x = float(x)
    if x < 0.0:
        raise NegativeArgument(f"x = {x} < 0")
    return float(sps.gammainc(params.mu, params.mu * (x * x) / params.omega))


def log_likelihood(params, samples):
    """Sum of log pdf over a SampleSet (log-space, no underflow)."""
    x = samples.values
    mu, omega = params.mu, params.omega
    nzero = int(np.count_nonzero(x == 0.0))
    if nzero:
        if mu > 0.5:
            return -math.inf
        if mu < 0.5:
            return math.inf
    pos = x[x > 0.0]
    n = x.size
    const = math.log(2.0) + mu * (math.log(mu) - math.log(omega)) - float(sps.gammaln(mu))
    body = (2.0 * mu - 1.0) * float(np.sum(np.log(pos))) - (mu / omega) * float(
        np.sum(x * x)
    )
    zero_term = nzero * 0.5 * math.log(2.0 / (math.pi * omega)) - nzero * const
    return n * const + body + zero_term


def sample(params, n, seed):
    """Draw n envelope values: sqrt of Gamma(mu, omega/mu) variates.

    Uses a counter-based Philox stream keyed by ``seed``; identical
    (params, n, seed) always reproduces the same SampleSet.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(int(seed) & _MASK64))
    )
    y = rng.gamma(shape=params.mu, scale=params.omega / params.mu, size=int(n))
    return SampleSet(np.sqrt(y))


_STATUS_ERRORS = {
    kernels.TOO_FEW: (TooFewSamples, "need at least 2 samples"),
    kernels.ZERO_ONLY: (ContainsZeroOnly, "no strictly positive sample"),
    kernels.EXCESS_ZEROS: (ExcessiveZeros, "more than 10% zeros"),
    kernels.DEGENERATE: (DegenerateSample, "sample carries no shape information"),
}


def _raise_for_status(status):
    exc, msg = _STATUS_ERRORS[status]
    raise exc(msg)


def estimate_moments(samples):
    """Gamma method of moments: mu = mean(x^2)^2 / popvar(x^2).

    Returns NakagamiParams with mu clamped to [MU_MIN, MU_MAX] and
    omega = mean(x^2).
    """
    status, mu, omega = kernels.moments_fit(samples.values)
    if status != kernels.OK:
        _raise_for_status(status)
    return NakagamiParams(mu=mu, omega=omega)


def estimate_mle(samples):
    """Gamma-shape maximum likelihood fit.

    omega = mean(x^2) exactly; mu solves log(mu) - psi(mu) = s* by Newton
    iteration (see the kernel backend docstring for the full numeric
    contract).  Returns ``(NakagamiParams, iterations)``.
    """
    status, mu, omega, iters = kernels.mle_fit(samples.values)
    if status != kernels.OK:
        _raise_for_status(status)
    return NakagamiParams(mu=mu, omega=omega), int(iters)


def fit_quality(params, samples):
    """RMS distance between model CDF and empirical plotting positions.

    Over the ascending-sorted sample,
    ``rmse = sqrt(sum_{i=2..n} (cdf(x_(i)) - (i-0.5)/n)^2 / n)``.
    """
    if samples.n < 2:
        raise TooFewSamples("fit quality needs at least 2 samples")
    rmse = kernels.fit_rmse(samples.values, params.mu, params.omega)
    return FitQuality(rmse=float(rmse), n=samples.n)


def digamma(z):
    """psi(z) for z > 0."""
    z = float(z)
    if z <= 0.0:
        raise NonPositiveArgument(f"z = {z} <= 0")
    return float(sps.psi(z))


def lgamma(z):
    """log Gamma(z) for z > 0."""
    z = float(z)
    if z <= 0.0:
        raise NonPositiveArgument(f"z = {z} <= 0")
    return float(sps.gammaln(z))
