"""Chain and weight diagnostics.

Autocovariance uses the biased 1/n normalization, which keeps the estimated
sequence positive semidefinite and bounds every autocorrelation by one.
The integrated autocorrelation time is summed up to a self-consistent
window ``W = min{t : t >= c * tau_hat(t)}`` with ``c = 5`` by default.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import NumericalError, ZeroVarianceError
from .mh import Chain

__all__ = [
    "AutocorrCurve",
    "TauEstimate",
    "HistogramDensity",
    "autocovariance",
    "autocorrelation",
    "integrated_autocorr_time",
    "per_coordinate_tau",
    "ess_from_tau",
    "chain_ess",
    "kish_ess",
    "histogram_density",
    "evidence_from_chain",
    "binomial_sample_bound",
    "MIN_TAU_SAMPLES",
]

# Below this many samples the windowed tau estimate is meaningless.
MIN_TAU_SAMPLES = 100


def _as_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("series is empty")
    return x


def autocovariance(series, t: int) -> float:
    """Lag-``t`` autocovariance with 1/n normalization.

    The full-series mean is subtracted and the sum runs over the ``n - t``
    overlapping pairs; dividing by ``n`` (not ``n - t``) keeps the
    covariance sequence positive semidefinite.
    """
    x = _as_series(series)
    n = x.size
    if not 0 <= t < n:
        raise ValueError(f"lag {t} out of range for series of length {n}")
    a = x - x.mean()
    return float(a[: n - t] @ a[t:] / n)


@dataclass(frozen=True)
class AutocorrCurve:
    """Autocorrelation values A(t) for lags 0..t_max, with A(0) = 1."""

    lags: np.ndarray
    values: np.ndarray

    def __getitem__(self, t: int) -> float:
        return float(self.values[t])


def _acf_values(x: np.ndarray, t_max: int) -> np.ndarray:
    """A(1..t_max) for a centered series; raises on zero variance."""
    n = x.size
    a = x - x.mean()
    c0 = a @ a / n
    if c0 <= 0.0:
        raise ZeroVarianceError("series has zero variance")
    out = np.empty(t_max)
    for t in range(1, t_max + 1):
        out[t - 1] = a[: n - t] @ a[t:] / n / c0
    return out


def autocorrelation(series, t_max: int | None = None) -> AutocorrCurve:
    """Autocorrelation curve A(t) = C(t)/C(0) for lags 0..t_max.

    ``t_max`` defaults to ``min(n - 1, 1000)``.  The 1/n estimator bounds
    every value in [-1, 1] by construction.
    """
    x = _as_series(series)
    n = x.size
    if t_max is None:
        t_max = min(n - 1, 1000)
    if not 0 <= t_max < n:
        raise ValueError(f"t_max {t_max} out of range for series of length {n}")
    values = np.concatenate([[1.0], _acf_values(x, t_max)]) if t_max else np.array([1.0])
    return AutocorrCurve(lags=np.arange(t_max + 1), values=values)


@dataclass(frozen=True)
class TauEstimate:
    """Windowed integrated autocorrelation time.

    ``window`` is the last lag included in the sum.  ``truncated`` means the
    self-consistency condition was never met before ``t_max``;
    ``insufficient_data`` means the series was too short to try (``tau`` is
    NaN in that case).
    """

    tau: float
    window: int
    truncated: bool = False
    insufficient_data: bool = False


def integrated_autocorr_time(
    series, c: float = 5.0, t_max: int | None = None
) -> TauEstimate:
    """Estimate ``tau = 2 * sum_{t>=1} A(t)`` with a self-consistent window.

    Lags accumulate until ``t >= c * tau_hat(t)``; the running estimate is
    clamped at zero from below.  Series shorter than ``MIN_TAU_SAMPLES``
    return an insufficient-data status instead of a number.
    """
    x = _as_series(series)
    n = x.size
    if n < MIN_TAU_SAMPLES:
        return TauEstimate(tau=float("nan"), window=0, insufficient_data=True)
    if t_max is None:
        t_max = min(n - 1, 10_000)
    a = x - x.mean()
    c0 = a @ a / n
    if c0 <= 0.0:
        raise ZeroVarianceError("series has zero variance")
    running = 0.0
    for t in range(1, t_max + 1):
        running += a[: n - t] @ a[t:] / n / c0
        tau = 2.0 * running
        if t >= c * tau:
            return TauEstimate(tau=max(tau, 0.0), window=t)
    warnings.warn(
        f"autocorrelation window hit t_max={t_max} before self-consistency",
        RuntimeWarning,
        stacklevel=2,
    )
    return TauEstimate(tau=max(2.0 * running, 0.0), window=t_max, truncated=True)


def _states_of(x) -> np.ndarray:
    if isinstance(x, Chain):
        return x.states
    arr = np.asarray(x, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


def per_coordinate_tau(x, c: float = 5.0) -> list[TauEstimate]:
    """Tau estimate of each coordinate projection of a chain or array."""
    states = _states_of(x)
    return [integrated_autocorr_time(states[:, k], c=c) for k in range(states.shape[1])]


def ess_from_tau(n: int, tau: float) -> float:
    """Effective sample size of ``n`` correlated samples: ``n / (1 + tau)``."""
    return n / (1.0 + tau)


def chain_ess(x, c: float = 5.0) -> float:
    """Effective sample size of a chain: ``n / (1 + tau_hat)``.

    Multivariate inputs report the minimum over coordinate projections
    (equivalently, the maximum tau), which is the conservative summary.
    Returns NaN when any coordinate has too little data for a tau estimate.
    """
    states = _states_of(x)
    n = states.shape[0]
    taus = per_coordinate_tau(states, c=c)
    if any(t.insufficient_data for t in taus):
        return float("nan")
    return min(ess_from_tau(n, t.tau) for t in taus)


def kish_ess(weights=None, *, log_weights=None) -> float:
    """Equal-information sample count of a weighted set: (sum w)^2 / sum w^2.

    Accepts linear weights or log weights; the computation shifts by the
    maximum log weight, so any common rescaling cancels.  The result always
    lies in [1, n].
    """
    if (weights is None) == (log_weights is None):
        raise ValueError("pass exactly one of weights or log_weights")
    if log_weights is None:
        w = np.asarray(weights, dtype=float)
        if w.size == 0:
            raise ValueError("weights are empty")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        with np.errstate(divide="ignore"):
            lw = np.log(w)
    else:
        lw = np.asarray(log_weights, dtype=float)
        if lw.size == 0:
            raise ValueError("log_weights are empty")
        if np.any(np.isnan(lw)) or np.any(np.isposinf(lw)):
            raise ValueError("log weights must be finite or -inf")
    top = lw.max()
    if np.isneginf(top):
        raise ValueError("all weights are zero")
    s = np.exp(lw - top)
    return float(s.sum() ** 2 / (s ** 2).sum())


@dataclass(frozen=True)
class HistogramDensity:
    """Histogram estimate of a sample density.

    ``counts`` holds per-bin occupation numbers on the full d-dimensional
    bin lattice; ``edges`` the per-dimension bin edges.  Mass outside the
    binned box is reported separately, so in-box counts plus the overflow
    count equal the sample size exactly.
    """

    edges: tuple          # one edge array per dimension
    counts: np.ndarray    # integer counts, shape = bins per dimension
    n_samples: int

    @property
    def dim(self) -> int:
        return len(self.edges)

    @property
    def masses(self) -> np.ndarray:
        return self.counts / self.n_samples

    @property
    def overflow_count(self) -> int:
        return int(self.n_samples - self.counts.sum())

    @property
    def overflow_mass(self) -> float:
        return self.overflow_count / self.n_samples

    @property
    def volumes(self) -> np.ndarray:
        vol = np.diff(self.edges[0])
        for e in self.edges[1:]:
            vol = np.multiply.outer(vol, np.diff(e))
        return vol

    def bin_indices(self, points) -> np.ndarray:
        """Per-dimension bin index of each point; -1 marks out-of-box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        idx = np.empty(pts.shape, dtype=int)
        for k, e in enumerate(self.edges):
            i = np.searchsorted(e, pts[:, k], side="right") - 1
            # the right edge of the last bin is inclusive
            i[pts[:, k] == e[-1]] = len(e) - 2
            i[(pts[:, k] < e[0]) | (pts[:, k] > e[-1])] = -1
            idx[:, k] = i
        return idx

    def density_at(self, points) -> np.ndarray:
        """Estimated density (mass / bin volume) at each point; 0 outside."""
        idx = self.bin_indices(points)
        inside = np.all(idx >= 0, axis=1)
        out = np.zeros(idx.shape[0])
        if np.any(inside):
            sel = tuple(idx[inside].T)
            out[inside] = self.masses[sel] / self.volumes[sel]
        return out


def histogram_density(samples, bins, bounds=None) -> HistogramDensity:
    """Bin samples into a d-dimensional histogram density.

    ``bins`` is an int or a per-dimension sequence; ``bounds`` optional
    (lo, hi) pairs per dimension, defaulting to the sample range.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    n, d = pts.shape
    if np.isscalar(bins):
        bins = [int(bins)] * d
    if any(b < 1 for b in bins):
        raise ValueError("need at least one bin per dimension")
    counts, edges = np.histogramdd(pts, bins=bins, range=bounds)
    return HistogramDensity(
        edges=tuple(edges), counts=counts.astype(int), n_samples=n
    )


def evidence_from_chain(target, chain_or_samples, density: HistogramDensity) -> float:
    """Evidence estimate from posterior samples and their own density map.

    Averages ``target_density / sample_density`` over the samples.  Every
    sample must land in a bin with positive estimated density, which is
    guaranteed when the histogram was built from the same samples.
    """
    samples = _states_of(chain_or_samples)
    lp = target.log_density_many(samples)
    rho = density.density_at(samples)
    if np.any(rho <= 0.0):
        raise NumericalError(
            "some samples fall in bins with zero estimated density"
        )
    log_ratios = lp - np.log(rho)
    return float(np.exp(logsumexp(log_ratios) - np.log(samples.shape[0])))


def binomial_sample_bound(p_hat: float, eps: float, tau_hat: float = 0.0) -> int:
    """Samples needed to pin a region's probability to accuracy ``eps``.

    Evaluates ``ceil(p(1-p)/eps^2 * (1+tau))``; degenerate probabilities
    (0 or 1) need no samples at all.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie strictly between 0 and 1")
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must lie in [0, 1]")
    if tau_hat < 0.0:
        raise ValueError("tau_hat must be nonnegative")
    return int(np.ceil(p_hat * (1.0 - p_hat) / eps ** 2 * (1.0 + tau_hat)))
