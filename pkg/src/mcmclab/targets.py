"""Target densities and the analytic geometry of high-dimensional mass.

A target is anything with a ``dim`` attribute and a ``log_density`` method
returning the log of an unnormalized density (``-inf`` where the density is
zero, never an exception).  All evaluation happens in log space; consumers
exponentiate only differences or stabilized sums.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "TargetDensity",
    "IsotropicGaussianTarget",
    "DiagonalGaussianTarget",
    "NoisyMeanModel",
    "ShellStats",
    "log_unnorm_density",
    "shell_stats",
    "radial_log_mass",
    "half_volume_length_fraction",
]

_LOG_2PI = np.log(2.0 * np.pi)


class TargetDensity:
    """Base class for unnormalized target densities.

    Subclasses set ``dim`` and implement ``log_density``.  Instances are
    immutable after construction and safe to evaluate concurrently.
    """

    dim: int

    def log_density(self, theta) -> float:
        """Log unnormalized density at a single length-``dim`` point."""
        raise NotImplementedError

    def log_density_many(self, points) -> np.ndarray:
        """Log density at each row of an ``(n, dim)`` array.

        The default loops over rows; subclasses override with vectorized
        evaluation where it pays off.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.array([self.log_density(p) for p in pts])


def log_unnorm_density(target, theta) -> float:
    """Evaluate ``target`` at ``theta`` with dimension checking.

    Returns a finite float or ``-inf``.  A length mismatch between ``theta``
    and ``target.dim`` is a contract violation and raises ``ValueError``.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != target.dim:
        raise ValueError(
            f"point has length {theta.size}, target has dim {target.dim}"
        )
    return float(target.log_density(theta))


@dataclass(frozen=True)
class IsotropicGaussianTarget(TargetDensity):
    """Zero-mean Gaussian kernel with one scale for every coordinate.

    ``log_density(theta) = -|theta|^2 / (2 sigma^2)`` exactly, so the
    normalization constant is ``(2 pi sigma^2)^(dim/2)``.
    """

    dim: int
    sigma: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def log_density(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        return float(-0.5 * theta @ theta / (self.sigma ** 2))

    def log_density_many(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return -0.5 * (pts ** 2).sum(axis=1) / (self.sigma ** 2)

    @property
    def norm_constant(self) -> float:
        """Integral of the kernel over all of R^dim."""
        return float((2.0 * np.pi * self.sigma ** 2) ** (self.dim / 2.0))


@dataclass(frozen=True)
class DiagonalGaussianTarget(TargetDensity):
    """Gaussian kernel with per-coordinate means and standard deviations.

    The log density is the sum of independent 1-D Gaussian log kernels,
    without normalization constants.
    """

    mean: tuple
    sigmas: tuple

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        sig = np.asarray(self.sigmas, dtype=float)
        if mean.shape != sig.shape or mean.ndim != 1:
            raise ValueError("mean and sigmas must be 1-D and the same length")
        if not np.all(sig > 0):
            raise ValueError("all sigmas must be positive")
        object.__setattr__(self, "mean", tuple(mean))
        object.__setattr__(self, "sigmas", tuple(sig))
        object.__setattr__(self, "_mu", mean)
        object.__setattr__(self, "_sig", sig)

    @property
    def dim(self) -> int:
        return len(self.mean)

    def log_density(self, theta) -> float:
        z = (np.asarray(theta, dtype=float) - self._mu) / self._sig
        return float(-0.5 * z @ z)

    def log_density_many(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        z = (pts - self._mu) / self._sig
        return -0.5 * (z ** 2).sum(axis=1)

    @property
    def norm_constant(self) -> float:
        return float(np.prod(np.sqrt(2.0 * np.pi) * self._sig))


def _normal_logpdf(x, mu, sigma):
    z = (x - mu) / sigma
    return -0.5 * z * z - np.log(sigma) - 0.5 * _LOG_2PI


@dataclass(frozen=True)
class NoisyMeanModel(TargetDensity):
    """One unknown mean observed through independent Gaussian noise.

    ``observations`` is a sequence of ``(value, sigma)`` pairs; the prior on
    the mean is ``Normal(prior_mean, prior_sd)``.  Both the likelihood and
    the prior are fully normalized densities, so the integral of the
    unnormalized posterior is the model's marginal likelihood.  With zero
    observations the posterior reduces to the prior.
    """

    observations: tuple
    prior_mean: float
    prior_sd: float

    dim = 1

    def __post_init__(self):
        obs = tuple((float(v), float(s)) for v, s in self.observations)
        if any(s <= 0 for _, s in obs):
            raise ValueError("observation sigmas must be positive")
        if not self.prior_sd > 0:
            raise ValueError("prior_sd must be positive")
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "_values", np.array([v for v, _ in obs]))
        object.__setattr__(self, "_sigmas", np.array([s for _, s in obs]))

    def log_likelihood(self, t: float) -> float:
        """Log probability of all observations given mean ``t``."""
        if self._values.size == 0:
            return 0.0
        return float(_normal_logpdf(self._values, t, self._sigmas).sum())

    def log_prior(self, t: float) -> float:
        return float(_normal_logpdf(t, self.prior_mean, self.prior_sd))

    def log_density(self, theta) -> float:
        t = float(np.asarray(theta, dtype=float).ravel()[0])
        return self.log_likelihood(t) + self.log_prior(t)

    def log_density_many(self, points) -> np.ndarray:
        t = np.asarray(points, dtype=float).reshape(-1, 1)
        out = _normal_logpdf(t[:, 0], self.prior_mean, self.prior_sd)
        if self._values.size:
            out = out + _normal_logpdf(
                self._values[None, :], t, self._sigmas[None, :]
            ).sum(axis=1)
        return out


@dataclass(frozen=True)
class ShellStats:
    """Where the radial mass of an isotropic Gaussian lives, in sigma units.

    ``r_peak``   radius maximizing the radial mass ``r^(d-1) exp(-r^2/2s^2)``
    ``r_mean``   mean radius under that mass
    ``dr_mean``  standard deviation of the radius (shell thickness)
    ``dr_sep``   root-mean-square distance between two independent draws
    """

    r_peak: float
    r_mean: float
    dr_mean: float
    dr_sep: float


def shell_stats(d: int, sigma: float = 1.0) -> ShellStats:
    """Radial statistics of a d-dimensional isotropic Gaussian.

    The Gamma-function ratio is evaluated through log-gamma so the result
    stays finite for large ``d``.
    """
    if d < 1:
        raise ValueError("d must be a positive integer")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    log_ratio = gammaln((d + 1) / 2.0) - gammaln(d / 2.0)
    mean_r = np.sqrt(2.0) * np.exp(log_ratio)
    # d - 2*ratio^2 -> 1/2 as d grows; the cancellation is benign in float64
    var_r = d - 2.0 * np.exp(2.0 * log_ratio)
    return ShellStats(
        r_peak=float(np.sqrt(d - 1.0) * sigma),
        r_mean=float(mean_r * sigma),
        dr_mean=float(np.sqrt(max(var_r, 0.0)) * sigma),
        dr_sep=float(np.sqrt(2.0 * d) * sigma),
    )


def radial_log_mass(d: int, sigma: float, r):
    """Log of the unnormalized radial mass ``r^(d-1) exp(-r^2 / 2 sigma^2)``.

    Accepts a scalar radius or an array of radii.  For ``d > 1`` the value at
    ``r = 0`` is ``-inf``; for ``d = 1`` there is no volume boost and the
    result is simply ``-r^2 / (2 sigma^2)``.
    """
    if d < 1:
        raise ValueError("d must be a positive integer")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    quad = -0.5 * r ** 2 / sigma ** 2
    if d == 1:
        out = quad
    else:
        with np.errstate(divide="ignore"):
            out = (d - 1) * np.log(r) + quad
    return out if out.ndim else float(out)


def half_volume_length_fraction(d: int) -> float:
    """Side fraction of a d-cube enclosing half its volume: ``2**(-1/d)``."""
    if d < 1:
        raise ValueError("d must be a positive integer")
    return float(2.0 ** (-1.0 / d))
