"""Ensemble Metropolis-Hastings: many chains that shape each other's moves.

Three proposal families are provided:

* ``gaussian`` - a Gaussian step whose covariance is the empirical
  covariance of the other chains' current positions, scaled by ``gamma**2``;
* ``de``       - a shift along the difference vector of two other chains
  plus Gaussian jitter, scaled by ``gamma``;
* ``stretch``  - a move along the line through one other chain, with the
  stretch factor drawn from a power-law window and a ``gamma**(d-1)``
  volume factor in the acceptance ratio.

A sweep updates chains in fixed ascending order, each update seeing the
others' latest positions, so runs are reproducible for a fixed seed.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .mh import Chain

__all__ = [
    "EnsembleState",
    "StretchLaw",
    "ensemble_covariance",
    "ensemble_gaussian_step",
    "de_step",
    "de_trajectory_count",
    "sample_stretch_factor",
    "stretch_step",
    "run_ensemble",
    "ENSEMBLE_METHODS",
]

ENSEMBLE_METHODS = ("gaussian", "de", "stretch")

_MIN_CHAINS = {"gaussian": 3, "de": 3, "stretch": 2}


@dataclass(frozen=True)
class EnsembleState:
    """Positions and per-sweep histories of an ensemble of chains."""

    positions: np.ndarray   # (m, d) current positions
    history: np.ndarray     # (iterations, m, d)
    accepted: np.ndarray    # (iterations, m) bool
    starts: np.ndarray      # (m, d) initial positions
    seed: int | None = None

    @property
    def n_chains(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def iteration(self) -> int:
        return self.history.shape[0]

    def chain(self, j: int) -> Chain:
        """Chain ``j``'s history as a standalone chain object."""
        return Chain(
            states=self.history[:, j, :],
            accepted=self.accepted[:, j],
            start=self.starts[j],
            seed=self.seed,
        )

    def acceptance_fraction(self) -> float:
        if self.accepted.size == 0:
            raise ValueError("ensemble has no recorded sweeps")
        return float(self.accepted.mean())


@dataclass(frozen=True)
class StretchLaw:
    """Stretch-factor distribution ``g(gamma) ~ gamma**(-1/2)`` on [1/a, a]."""

    a: float = 2.0

    def __post_init__(self):
        if not self.a > 1.0:
            raise ValueError("stretch range parameter a must exceed 1")

    def density(self, gamma) -> np.ndarray:
        """Normalized density of the stretch factor."""
        g = np.asarray(gamma, dtype=float)
        norm = 2.0 * (np.sqrt(self.a) - 1.0 / np.sqrt(self.a))
        inside = (g >= 1.0 / self.a) & (g <= self.a)
        with np.errstate(divide="ignore"):
            vals = np.where(inside, g ** -0.5 / norm, 0.0)
        return vals if vals.ndim else float(vals)


def _positions_of(state) -> np.ndarray:
    if isinstance(state, EnsembleState):
        return state.positions
    return np.atleast_2d(np.asarray(state, dtype=float))


def _cholesky_with_ridge(cov: np.ndarray):
    """Factor ``cov``; nudge degenerate matrices with a tiny ridge.

    The ridge scales with the trace and has an absolute floor so a fully
    collapsed ensemble still yields a (vanishingly small) proposal instead
    of crashing mid-run.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = cov.shape[0]
    try:
        return np.linalg.cholesky(cov), cov
    except np.linalg.LinAlgError:
        pass
    ridge = 1e-10 * np.trace(cov) / d + 1e-300
    for _ in range(60):
        try:
            fixed = cov + ridge * np.eye(d)
            return np.linalg.cholesky(fixed), fixed
        except np.linalg.LinAlgError:
            ridge *= 10.0
    raise NumericalError("covariance matrix cannot be repaired by ridging")


def ensemble_covariance(state, exclude: int) -> np.ndarray:
    """Sample covariance of all chains except ``exclude``.

    The result is symmetric positive semidefinite; if it is numerically
    singular a trace-scaled ridge is added so that a Cholesky factorization
    exists.  Chain ``exclude``'s own position never enters, which keeps
    proposals built from this matrix symmetric.
    """
    positions = _positions_of(state)
    m = positions.shape[0]
    if m < 3:
        raise ValueError("ensemble covariance needs at least 3 chains")
    others = np.delete(positions, exclude, axis=0)
    cov = np.atleast_2d(np.cov(others, rowvar=False, ddof=1))
    _, cov = _cholesky_with_ridge(cov)
    return cov


def _metropolis_accept(target, current, lp_current, candidate, log_volume, rng):
    """Shared accept/reject tail; draws u unconditionally."""
    lp_candidate = float(target.log_density(candidate))
    u = rng.random()
    if np.isneginf(lp_candidate):
        return current, lp_current, False
    log_t = log_volume + (lp_candidate - lp_current)
    if np.log(u) <= min(0.0, log_t):
        return candidate, lp_candidate, True
    return current, lp_current, False


def ensemble_gaussian_step(target, state, j: int, gamma: float, rng):
    """Update chain ``j`` with a Gaussian proposal shaped by the ensemble.

    Candidate ~ Normal(position_j, gamma^2 * C) where C is the covariance of
    the other chains.  The proposal is symmetric, so acceptance is the plain
    Metropolis ratio.  Returns ``(new_position, accepted)``.
    """
    positions = _positions_of(state)
    cov = ensemble_covariance(positions, j)
    chol, _ = _cholesky_with_ridge(cov)
    current = positions[j]
    lp_current = float(target.log_density(current))
    candidate = current + gamma * (chol @ rng.standard_normal(current.size))
    new, _, accepted = _metropolis_accept(
        target, current, lp_current, candidate, 0.0, rng
    )
    return new, accepted


def de_trajectory_count(m: int) -> int:
    """Distinct difference-vector pairs, ignoring order: (m-1)(m-2)/2."""
    if m < 3:
        raise ValueError("difference moves need at least 3 chains")
    return (m - 1) * (m - 2) // 2


def de_step(target, state, j: int, gamma: float, rng, jitter_cov=None):
    """Differential-evolution move for chain ``j``.

    Picks two other chains ``k != l`` (distinct indices; their positions may
    coincide after rejections) and proposes
    ``position_j + gamma * (position_k - position_l + eps)`` with
    ``eps ~ Normal(0, jitter_cov)``.  ``jitter_cov=None`` uses one fifth of
    the ensemble covariance; pass ``0`` for no jitter.  The proposal is
    symmetric.  Returns ``(new_position, accepted)``.
    """
    positions = _positions_of(state)
    m, d = positions.shape
    if m < 3:
        raise ValueError("de_step needs at least 3 chains")
    others = np.delete(np.arange(m), j)
    k, l = others[rng.choice(m - 1, size=2, replace=False)]
    if jitter_cov is None:
        jitter_cov = ensemble_covariance(positions, j) / 5.0
    else:
        jitter_cov = np.asarray(jitter_cov, dtype=float)
        if jitter_cov.ndim == 0:
            jitter_cov = float(jitter_cov) * np.eye(d)
    z = rng.standard_normal(d)
    if np.trace(jitter_cov) == 0.0:
        eps = np.zeros(d)
    else:
        chol, _ = _cholesky_with_ridge(jitter_cov)
        eps = chol @ z
    current = positions[j]
    lp_current = float(target.log_density(current))
    candidate = current + gamma * (positions[k] - positions[l] + eps)
    new, _, accepted = _metropolis_accept(
        target, current, lp_current, candidate, 0.0, rng
    )
    return new, accepted


def sample_stretch_factor(law: StretchLaw, rng, size=None):
    """Draw stretch factors by inverse CDF: ``((a-1)u + 1)^2 / a``."""
    u = rng.random() if size is None else rng.random(size)
    return ((law.a - 1.0) * u + 1.0) ** 2 / law.a


def stretch_step(target, state, j: int, law: StretchLaw, rng):
    """Affine-invariant stretch move for chain ``j``.

    One partner chain ``k != j`` is chosen uniformly and the candidate is
    placed on the line through both: ``position_k + gamma * (position_j -
    position_k)``.  The acceptance ratio carries a ``gamma**(d-1)`` factor
    (in log space) to account for the volume change along the line.
    Returns ``(new_position, accepted)``.
    """
    positions = _positions_of(state)
    m, d = positions.shape
    if m < 2:
        raise ValueError("stretch_step needs at least 2 chains")
    k = int(rng.integers(m - 1))
    if k >= j:
        k += 1
    gamma = float(sample_stretch_factor(law, rng))
    current = positions[j]
    lp_current = float(target.log_density(current))
    candidate = positions[k] + gamma * (current - positions[k])
    log_volume = (d - 1) * np.log(gamma)
    new, _, accepted = _metropolis_accept(
        target, current, lp_current, candidate, log_volume, rng
    )
    return new, accepted


def run_ensemble(
    method: str,
    target,
    m: int,
    n_sweeps: int,
    rng,
    theta0=None,
    gamma: float | None = None,
    law: StretchLaw | None = None,
    jitter_cov=None,
    seed: int | None = None,
) -> EnsembleState:
    """Run ``n_sweeps`` sequential sweeps of an ensemble sampler.

    Within a sweep, chains update in ascending order and each sees the
    others' latest positions.  Chains start at ``theta0`` (default origin)
    plus unit Gaussian jitter, since identical starts would make the
    ensemble covariance singular.  ``gamma`` defaults to ``2.5/sqrt(d)`` for
    the Gaussian method and ``1.7/sqrt(d)`` for the difference move.
    """
    if method not in ENSEMBLE_METHODS:
        raise ValueError(f"unknown ensemble method {method!r}")
    if m < _MIN_CHAINS[method]:
        raise ValueError(
            f"method {method!r} needs at least {_MIN_CHAINS[method]} chains, got {m}"
        )
    if n_sweeps < 0:
        raise ValueError("n_sweeps must be >= 0")
    d = target.dim
    if gamma is None:
        gamma = {"gaussian": 2.5, "de": 1.7, "stretch": None}[method]
        if gamma is not None:
            gamma = gamma / np.sqrt(d)
    if law is None:
        law = StretchLaw()
    if method != "stretch" and gamma == 0.0:
        warnings.warn(
            "gamma=0 proposes the current point forever; the ensemble will stall",
            RuntimeWarning,
            stacklevel=2,
        )
    if method == "gaussian" and m < d + 2:
        warnings.warn(
            f"covariance proposals want m >= d + 2 chains (m={m}, d={d}); "
            "the ensemble covariance will be singular up to ridging",
            RuntimeWarning,
            stacklevel=2,
        )
    theta0 = np.zeros(d) if theta0 is None else np.asarray(theta0, dtype=float)
    positions = theta0 + rng.standard_normal((m, d))
    starts = positions.copy()
    history = np.empty((n_sweeps, m, d))
    accepted = np.empty((n_sweeps, m), dtype=bool)
    for sweep in range(n_sweeps):
        for j in range(m):
            if method == "gaussian":
                new, acc = ensemble_gaussian_step(target, positions, j, gamma, rng)
            elif method == "de":
                new, acc = de_step(
                    target, positions, j, gamma, rng, jitter_cov=jitter_cov
                )
            else:
                new, acc = stretch_step(target, positions, j, law, rng)
            positions[j] = new
            accepted[sweep, j] = acc
        history[sweep] = positions
    return EnsembleState(
        positions=positions,
        history=history,
        accepted=accepted,
        starts=starts,
        seed=seed,
    )
