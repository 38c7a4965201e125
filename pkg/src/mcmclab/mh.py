"""Single-chain Metropolis-Hastings.

The accept/reject decision is made in log space (accept iff
``log u <= min(0, dlogp + dlogq)``), and the uniform variate is drawn on
every step, even when acceptance is certain, so that random streams stay
aligned across proposal variants.
"""

from dataclasses import dataclass

import numpy as np

from .targets import log_unnorm_density

__all__ = [
    "MarkovProposal",
    "GaussianRandomWalk",
    "Chain",
    "transition_probability",
    "mh_step",
    "run_chain",
    "acceptance_fraction",
    "drop_burn_in",
]


class MarkovProposal:
    """Contract for a conditional proposal ``Q(to | from)``.

    ``propose(current, rng)`` draws a candidate; ``log_q(from_, to)``
    evaluates the conditional log density.  When ``symmetric`` is true the
    Hastings correction is identically zero and ``log_q`` is never needed
    by the sampler.
    """

    symmetric: bool = False

    def propose(self, current: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def log_q(self, from_, to) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianRandomWalk(MarkovProposal):
    """Isotropic Gaussian step: candidate = current + scale * z, z ~ N(0, I)."""

    scale: float
    symmetric = True

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def propose(self, current, rng):
        return current + self.scale * rng.standard_normal(current.shape)

    def log_q(self, from_, to):
        z = (np.asarray(to, float) - np.asarray(from_, float)) / self.scale
        d = z.size
        return float(
            -0.5 * z @ z - d * np.log(self.scale) - 0.5 * d * np.log(2 * np.pi)
        )


@dataclass(frozen=True)
class Chain:
    """An ordered Metropolis-Hastings sample path.

    ``states[i]`` is the position after step ``i``; ``accepted[i]`` records
    whether that step's proposal was taken.  A rejected step repeats the
    previous state bit for bit.  ``start`` is the state the first step was
    proposed from and ``seed`` an optional record of the stream used.
    """

    states: np.ndarray    # (n, d)
    accepted: np.ndarray  # (n,) bool
    start: np.ndarray     # (d,)
    seed: int | None = None

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        accepted = np.asarray(self.accepted, dtype=bool)
        if accepted.shape != (states.shape[0],):
            raise ValueError("accepted must have one flag per state")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "accepted", accepted)
        object.__setattr__(
            self, "start", np.asarray(self.start, dtype=float).ravel()
        )

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]


def _hastings_log_ratio(proposal, current, candidate) -> float:
    if getattr(proposal, "symmetric", False):
        return 0.0
    return proposal.log_q(candidate, current) - proposal.log_q(current, candidate)


def transition_probability(target, proposal, current, candidate) -> float:
    """Metropolis-Hastings acceptance probability for one proposed move.

    The chain must currently sit inside the support; a candidate at zero
    density is accepted with probability 0.
    """
    current = np.asarray(current, dtype=float)
    candidate = np.asarray(candidate, dtype=float)
    lp_current = log_unnorm_density(target, current)
    if np.isneginf(lp_current):
        raise ValueError("current state has zero density; chains must stay in support")
    lp_candidate = log_unnorm_density(target, candidate)
    if np.isneginf(lp_candidate):
        return 0.0
    log_t = (lp_candidate - lp_current) + _hastings_log_ratio(
        proposal, current, candidate
    )
    return float(np.exp(min(0.0, log_t)))


def _step(target, proposal, current, lp_current, rng):
    """One MH transition with the current log density threaded through."""
    candidate = proposal.propose(current, rng)
    lp_candidate = float(target.log_density(candidate))
    u = rng.random()
    if np.isneginf(lp_candidate):
        return current, lp_current, False
    log_t = (lp_candidate - lp_current) + _hastings_log_ratio(
        proposal, current, candidate
    )
    if np.log(u) <= min(0.0, log_t):
        return candidate, lp_candidate, True
    return current, lp_current, False


def mh_step(target, proposal, current, rng):
    """Propose once and accept or reject; returns ``(next_point, accepted)``.

    On rejection the returned point is the current one, unchanged.
    """
    current = np.asarray(current, dtype=float)
    lp_current = log_unnorm_density(target, current)
    if np.isneginf(lp_current):
        raise ValueError("current state has zero density; chains must stay in support")
    nxt, _, accepted = _step(target, proposal, current, lp_current, rng)
    return nxt, accepted


def run_chain(target, proposal, theta0, n: int, rng, seed: int | None = None) -> Chain:
    """Generate an ``n``-step chain from ``theta0``.

    Deterministic for a fixed generator state; acceptance is recorded per
    step.  ``theta0`` must have positive density.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    theta0 = np.asarray(theta0, dtype=float).ravel()
    lp = log_unnorm_density(target, theta0)
    if np.isneginf(lp):
        raise ValueError("theta0 has zero density; start chains inside the support")
    states = np.empty((n, theta0.size))
    accepted = np.empty(n, dtype=bool)
    current = theta0
    for i in range(n):
        current, lp, acc = _step(target, proposal, current, lp, rng)
        states[i] = current
        accepted[i] = acc
    return Chain(states=states, accepted=accepted, start=theta0, seed=seed)


def acceptance_fraction(chain: Chain) -> float:
    """Fraction of steps whose proposal was accepted."""
    if len(chain) == 0:
        raise ValueError("chain is empty")
    return float(chain.accepted.mean())


def drop_burn_in(chain: Chain, fraction: float) -> Chain:
    """Remove the leading ``floor(fraction * n)`` states.

    The remaining states keep their order and flags; the new ``start`` is
    the last discarded state so the step-to-step invariants still hold.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("burn-in fraction must be in [0, 1)")
    n = len(chain)
    k = int(np.floor(fraction * n))
    if k == 0:
        return chain
    return Chain(
        states=chain.states[k:].copy(),
        accepted=chain.accepted[k:].copy(),
        start=chain.states[k - 1].copy(),
        seed=chain.seed,
    )
