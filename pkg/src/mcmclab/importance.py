"""Importance sampling: iid proposals, weights, and weighted estimators.

A proposal is a normalized distribution that can both draw samples and
report its log density.  Weight arithmetic stays in log space; normalized
weights materialize only inside the estimators.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import CoverageError, NumericalError
from .targets import NoisyMeanModel

__all__ = [
    "Proposal",
    "UniformBoxProposal",
    "DiagonalGaussianProposal",
    "prior_proposal",
    "WeightedSamples",
    "draw_iid",
    "importance_weights",
    "is_evidence",
    "is_expectation",
]

_LOG_2PI = np.log(2.0 * np.pi)


class Proposal:
    """Contract: ``dim``, ``sample(rng, n) -> (n, dim)`` and
    ``log_pdf(points) -> (n,)`` for a normalized density."""

    dim: int

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def log_pdf(self, points) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformBoxProposal(Proposal):
    """Uniform distribution on an axis-aligned box."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1-D and the same length")
        if not np.all(hi > lo):
            raise ValueError("upper must exceed lower in every dimension")
        object.__setattr__(self, "lower", tuple(lo))
        object.__setattr__(self, "upper", tuple(hi))
        object.__setattr__(self, "_lo", lo)
        object.__setattr__(self, "_hi", hi)
        object.__setattr__(self, "_log_volume", float(np.log(hi - lo).sum()))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.exp(self._log_volume))

    def sample(self, rng, n):
        return self._lo + rng.random((n, self.dim)) * (self._hi - self._lo)

    def log_pdf(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.all((pts >= self._lo) & (pts <= self._hi), axis=1)
        return np.where(inside, -self._log_volume, -np.inf)


@dataclass(frozen=True)
class DiagonalGaussianProposal(Proposal):
    """Independent Gaussian in each dimension, fully normalized."""

    mean: tuple
    sigmas: tuple

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=float)
        sig = np.asarray(self.sigmas, dtype=float)
        if mu.shape != sig.shape or mu.ndim != 1:
            raise ValueError("mean and sigmas must be 1-D and the same length")
        if not np.all(sig > 0):
            raise ValueError("all sigmas must be positive")
        object.__setattr__(self, "mean", tuple(mu))
        object.__setattr__(self, "sigmas", tuple(sig))
        object.__setattr__(self, "_mu", mu)
        object.__setattr__(self, "_sig", sig)
        object.__setattr__(
            self, "_log_norm", float(np.log(sig).sum() + 0.5 * len(mu) * _LOG_2PI)
        )

    @property
    def dim(self) -> int:
        return len(self.mean)

    def sample(self, rng, n):
        return self._mu + rng.standard_normal((n, self.dim)) * self._sig

    def log_pdf(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        z = (pts - self._mu) / self._sig
        return -0.5 * (z ** 2).sum(axis=1) - self._log_norm


def prior_proposal(model: NoisyMeanModel) -> DiagonalGaussianProposal:
    """Proposal equal to a noisy-mean model's prior distribution."""
    return DiagonalGaussianProposal(
        mean=(model.prior_mean,), sigmas=(model.prior_sd,)
    )


@dataclass(frozen=True)
class WeightedSamples:
    """Draws plus log importance weights.

    Weights are finite or ``-inf``; a ``+inf`` or NaN log weight would mean
    the proposal failed to cover the target and is rejected at construction.
    """

    points: np.ndarray      # (n, d)
    log_weights: np.ndarray  # (n,)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        lw = np.asarray(self.log_weights, dtype=float)
        if lw.shape != (pts.shape[0],):
            raise ValueError("log_weights must have one entry per point")
        if np.any(np.isnan(lw)) or np.any(np.isposinf(lw)):
            raise ValueError("log weights must be finite or -inf")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "log_weights", lw)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def draw_iid(proposal: Proposal, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` independent points; identical seeds give identical draws."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return proposal.sample(rng, n)


def importance_weights(target, proposal: Proposal, points) -> WeightedSamples:
    """Attach ``log target - log proposal`` weights to ``points``.

    A point where the proposal density is zero but the target is not makes
    the estimator inconsistent (no coverage), so that raises
    ``CoverageError`` instead of yielding an infinite weight.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != target.dim or proposal.dim != target.dim:
        raise ValueError("target, proposal, and points must share one dim")
    lp = target.log_density_many(pts)
    lq = proposal.log_pdf(pts)
    bad = np.isneginf(lq) & ~np.isneginf(lp)
    if np.any(bad):
        raise CoverageError(
            f"proposal has zero density at {int(bad.sum())} point(s) "
            "where the target is positive"
        )
    with np.errstate(invalid="ignore"):
        lw = np.where(np.isneginf(lp), -np.inf, lp - lq)
    return WeightedSamples(points=pts, log_weights=lw)


def is_evidence(ws: WeightedSamples) -> float:
    """Mean importance weight: a direct estimate of the evidence.

    Computed as ``exp(logsumexp(log_w) - log n)``.  All-zero weights yield
    0.0 with a warning.
    """
    if ws.n < 1:
        raise ValueError("need at least one sample")
    if np.all(np.isneginf(ws.log_weights)):
        warnings.warn(
            "all importance weights are zero; evidence estimate is 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    return float(np.exp(logsumexp(ws.log_weights) - np.log(ws.n)))


def is_expectation(ws: WeightedSamples, f):
    """Self-normalized weighted mean of ``f`` over the samples.

    ``f`` receives the ``(n, d)`` point array and returns ``(n,)`` or
    ``(n, m)``.  Any common scaling of the weights cancels.
    """
    lw = ws.log_weights
    if np.all(np.isneginf(lw)):
        raise NumericalError("total importance weight is zero")
    w = np.exp(lw - lw.max())
    fx = np.asarray(f(ws.points), dtype=float)
    if fx.shape[0] != ws.n:
        raise ValueError("f must return one row per sample")
    if fx.ndim == 1:
        return float((w * fx).sum() / w.sum())
    return (w[:, None] * fx).sum(axis=0) / w.sum()
