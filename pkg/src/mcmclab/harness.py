"""Experiment runners behind the command-line interface.

Four self-contained exercises (a 1-D noisy-mean inference, grid /
importance / Metropolis-Hastings studies of a fixed 2-D Gaussian) and a
dimensional-scaling battery for five samplers on an isotropic Gaussian.
Results are emitted as CSV rows; every run derives its random stream from
``(master seed, experiment, dim, replicate)`` so output is byte-for-byte
reproducible no matter how work is scheduled.
"""

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import diagnostics, summaries
from .ensemble import StretchLaw, run_ensemble
from .errors import ConfigError, ResourceLimitError
from .grid import GridSpec, build_grid, grid_evidence, grid_log_weights
from .importance import (
    DiagonalGaussianProposal,
    draw_iid,
    importance_weights,
    is_evidence,
    is_expectation,
)
from .mh import GaussianRandomWalk, acceptance_fraction, drop_burn_in, run_chain
from .seeding import derive_rng, stream_id
from .summaries import DiscretizedPosterior, LossSpec
from .targets import DiagonalGaussianTarget, IsotropicGaussianTarget, NoisyMeanModel

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "EXERCISES",
    "SCALING_SAMPLERS",
    "noisy_mean_model",
    "noisy_mean_alt_model",
    "exercise_2d_target",
    "run_exercise",
    "run_scaling",
    "run_mh_2d_replicates",
    "write_exercise_csv",
    "write_scaling_csv",
    "read_scaling_rows",
    "report_table",
]

DEFAULT_SEED = 1905
DEFAULT_BUDGET = 500_000_000  # total chain updates allowed per scaling run

EXERCISES = ("noisy-mean", "grid-2d", "importance-2d", "mh-2d")
SCALING_SAMPLERS = ("mh-fixed", "mh-adaptive", "ens-gaussian", "ens-de", "ens-stretch")

# Default iteration counts and proposal scales for the scaling battery.
_SCALING_N = {"mh-fixed": 20_000, "mh-adaptive": 20_000,
              "ens-gaussian": 1500, "ens-de": 1500, "ens-stretch": 1500}
_SCALING_DELTA = {"mh-adaptive": 2.5, "ens-gaussian": 2.5, "ens-de": 1.7}
# Samplers tuned for a ~25% acceptance target (used by the report flags).
_BAND_SAMPLERS = ("mh-adaptive", "ens-gaussian", "ens-de")
ACCEPTANCE_BAND = (0.15, 0.35)

# Evidence-from-chain histograms get 10 bins per axis; beyond a few
# dimensions the bin lattice itself becomes the curse of dimensionality,
# so the column is left empty there.
_EVIDENCE_MAX_DIM = 5

# Measurement series of the 1-D noisy-mean model: (value, sigma) pairs,
# with a Normal(25, 1.5) prior and a Normal(30, 3) alternative prior.
NOISY_MEAN_OBSERVATIONS = (
    (26.3, 1.7),
    (30.2, 1.8),
    (29.4, 1.2),
    (30.1, 0.5),
    (29.8, 1.3),
)
NOISY_MEAN_PRIOR = (25.0, 1.5)
NOISY_MEAN_ALT_PRIOR = (30.0, 3.0)

# The fixed 2-D Gaussian studied by the grid / importance / MH exercises:
# means (-0.3, 0.8), variances (2, 0.5), hence evidence 2*pi*sx*sy = 2*pi.
EXERCISE_2D_MEAN = (-0.3, 0.8)
EXERCISE_2D_SIGMAS = (np.sqrt(2.0), np.sqrt(0.5))

EXERCISE_CSV_HEADER = ("experiment", "case", "quantity", "index", "value")
SCALING_CSV_HEADER = (
    "experiment", "dim", "replicate", "seed", "sampler", "n", "m",
    "acceptance_fraction", "tau_hat", "ess", "evidence_hat",
    "mean_0", "mean_1", "ci68_lo_0", "ci68_hi_0", "ci68_lo_1", "ci68_hi_1",
    "wall_time_s",
)
SCHEMA_LINE = "# schema=1"


def noisy_mean_model() -> NoisyMeanModel:
    return NoisyMeanModel(NOISY_MEAN_OBSERVATIONS, *NOISY_MEAN_PRIOR)


def noisy_mean_alt_model() -> NoisyMeanModel:
    return NoisyMeanModel(NOISY_MEAN_OBSERVATIONS, *NOISY_MEAN_ALT_PRIOR)


def exercise_2d_target() -> DiagonalGaussianTarget:
    return DiagonalGaussianTarget(EXERCISE_2D_MEAN, EXERCISE_2D_SIGMAS)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; CLI flags override file values override defaults."""

    experiment: str
    sampler: str | None = None
    dims: tuple = (2, 5, 10, 20)
    n: int | None = None
    m: int = 100
    replicates: int = 1
    burn_in: float = 0.2
    gamma: float | None = None   # fixed proposal scale
    delta: float | None = None   # scale as delta / sqrt(d)
    stretch_a: float = 2.0
    seed: int = DEFAULT_SEED
    out: str | None = None
    jobs: int = 1
    budget: int = DEFAULT_BUDGET
    # exercise-specific knobs
    grid_lo: float = 10.0
    grid_hi: float = 50.0
    grid_cells: int = 10_000
    proposal_sigma: float = 1.0
    start: tuple = (0.0, 0.0)
    bins: int = 10
    bins_lo: float = -5.0
    bins_hi: float = 5.0

    def __post_init__(self):
        if self.experiment not in EXERCISES + ("scaling",):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.experiment == "scaling":
            if self.sampler not in SCALING_SAMPLERS:
                raise ConfigError(f"unknown sampler {self.sampler!r}")
            if not self.dims or any(d < 1 for d in self.dims):
                raise ConfigError("dims must be positive integers")
        for name in ("m", "replicates", "jobs", "budget", "grid_cells", "bins"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.n is not None and self.n < 1:
            raise ConfigError("n must be >= 1")
        if not 0.0 <= self.burn_in < 1.0:
            raise ConfigError("burn_in must lie in [0, 1)")
        if self.gamma is not None and self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.delta is not None and self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.stretch_a <= 1.0:
            raise ConfigError("a must exceed 1")
        if self.proposal_sigma <= 0:
            raise ConfigError("proposal_sigma must be positive")
        if self.grid_hi <= self.grid_lo or self.bins_hi <= self.bins_lo:
            raise ConfigError("upper bounds must exceed lower bounds")

    def iterations(self) -> int:
        if self.n is not None:
            return self.n
        if self.experiment == "scaling":
            return _SCALING_N[self.sampler]
        return {"importance-2d": 10_000, "mh-2d": 1000}.get(self.experiment, 1000)

    def proposal_scale(self, dim: int) -> float | None:
        """Resolved gamma for one dimension (None for the stretch move)."""
        if self.sampler == "ens-stretch":
            return None
        if self.gamma is not None:
            return self.gamma
        if self.delta is not None:
            return self.delta / np.sqrt(dim)
        if self.sampler == "mh-fixed":
            return float(np.sqrt(2.0))
        return _SCALING_DELTA[self.sampler] / np.sqrt(dim)


# Keys accepted from a config file, per experiment section.
_COMMON_KEYS = {"seed", "out"}
_SECTION_KEYS = {
    "noisy-mean": _COMMON_KEYS | {"grid_lo", "grid_hi", "grid_cells"},
    "grid-2d": set(_COMMON_KEYS),
    "importance-2d": _COMMON_KEYS | {"n", "replicates"},
    "mh-2d": _COMMON_KEYS | {
        "n", "replicates", "burn_in", "proposal_sigma",
        "bins", "bins_lo", "bins_hi",
    },
    "scaling": _COMMON_KEYS | {
        "dims", "n", "m", "replicates", "burn_in",
        "gamma", "delta", "a", "jobs", "budget",
    },
}
_INT_KEYS = {"seed", "n", "m", "replicates", "jobs", "budget", "grid_cells", "bins"}
_FLOAT_KEYS = {
    "burn_in", "gamma", "delta", "a", "grid_lo", "grid_hi",
    "proposal_sigma", "bins_lo", "bins_hi",
}


def parse_config_file(path: str, section: str) -> dict:
    """Read ``key=value`` lines from the named section of a config file.

    Sections are introduced by ``[name]`` headers; keys outside the
    experiment's allowed set are rejected.  Blank lines and ``#`` comments
    are ignored.
    """
    allowed = _SECTION_KEYS["scaling" if section in SCALING_SAMPLERS else section]
    values: dict = {}
    current = None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if line.startswith("[") and line.endswith("]"):
                    current = line[1:-1].strip()
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                if current != section:
                    continue
                key, _, val = line.partition("=")
                key, val = key.strip(), val.strip()
                if key not in allowed:
                    raise ConfigError(
                        f"{path}:{lineno}: unknown key {key!r} for [{section}]"
                    )
                values[key] = _parse_value(key, val, f"{path}:{lineno}")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _parse_value(key: str, val: str, where: str):
    try:
        if key == "dims":
            return tuple(int(tok) for tok in val.split(",") if tok.strip())
        if key in _INT_KEYS:
            return int(val)
        if key in _FLOAT_KEYS:
            return float(val)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {val!r}") from exc
    return val


def config_from_sources(experiment, sampler=None, config_path=None, overrides=None):
    """Merge defaults, config-file values, and CLI overrides into a config."""
    values: dict = {}
    if config_path is not None:
        section = sampler if experiment == "scaling" else experiment
        file_values = parse_config_file(config_path, section)
        if "a" in file_values:
            file_values["stretch_a"] = file_values.pop("a")
        values.update(file_values)
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    if "seed" not in values:
        env = os.environ.get("MCMCLAB_SEED")
        if env is not None:
            try:
                values["seed"] = int(env)
            except ValueError as exc:
                raise ConfigError(f"MCMCLAB_SEED must be an integer: {env!r}") from exc
    try:
        return ExperimentConfig(experiment=experiment, sampler=sampler, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ResultRow:
    """One (experiment, dim, replicate) outcome in the scaling CSV schema."""

    experiment: str
    dim: int
    replicate: int
    seed: int
    sampler: str
    n: int
    m: int | None
    acceptance_fraction: float
    tau_hat: float | None
    ess: float | None
    evidence_hat: float | None
    mean_0: float | None
    mean_1: float | None
    ci68_lo_0: float | None
    ci68_hi_0: float | None
    ci68_lo_1: float | None
    ci68_hi_1: float | None
    wall_time_s: float


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _axis_posterior(samples: np.ndarray, axis: int) -> DiscretizedPosterior:
    return DiscretizedPosterior.from_samples(samples[:, axis])


def _coordinate_summaries(samples: np.ndarray) -> dict:
    """First-two-coordinate means and 68% intervals of a sample cloud."""
    out = {"mean_0": float(samples[:, 0].mean())}
    lo0, hi0 = summaries.percentile_interval(_axis_posterior(samples, 0), 0.68)
    out["ci68_lo_0"], out["ci68_hi_0"] = lo0, hi0
    if samples.shape[1] >= 2:
        out["mean_1"] = float(samples[:, 1].mean())
        lo1, hi1 = summaries.percentile_interval(_axis_posterior(samples, 1), 0.68)
        out["ci68_lo_1"], out["ci68_hi_1"] = lo1, hi1
    else:
        out["mean_1"] = out["ci68_lo_1"] = out["ci68_hi_1"] = None
    return out


def default_evidence_histogram(samples: np.ndarray, bins: int = 10,
                               lo: float = -5.0, hi: float = 5.0):
    """Histogram for evidence estimation: fixed box, extended to cover all
    samples when they spill outside it."""
    bounds = []
    for k in range(samples.shape[1]):
        col = samples[:, k]
        bounds.append((min(lo, float(col.min())), max(hi, float(col.max()))))
    return diagnostics.histogram_density(samples, bins=bins, bounds=bounds)


def _mean_tau(samples_2d: np.ndarray) -> float:
    """Average windowed tau over coordinate projections (NaN if too short)."""
    taus = diagnostics.per_coordinate_tau(samples_2d)
    if any(t.insufficient_data for t in taus):
        return float("nan")
    return float(np.mean([t.tau for t in taus]))


def _scaling_row(cfg: ExperimentConfig, dim: int, replicate: int) -> ResultRow:
    """Run one (sampler, dim, replicate) cell of the scaling battery."""
    labels = ("scaling", cfg.sampler, dim, replicate)
    rng = derive_rng(cfg.seed, *labels)
    seed_id = stream_id(cfg.seed, *labels)
    target = IsotropicGaussianTarget(dim, 1.0)
    n = cfg.iterations()
    t0 = time.perf_counter()

    if cfg.sampler in ("mh-fixed", "mh-adaptive"):
        gamma = cfg.proposal_scale(dim)
        # start from a draw of the target itself: at the exact mode a
        # wide fixed proposal in high dimension essentially never accepts
        # its first move, so the run would measure the start, not the law
        theta0 = rng.standard_normal(dim)
        chain = run_chain(
            target, GaussianRandomWalk(gamma), theta0, n, rng, seed=seed_id
        )
        accept = acceptance_fraction(chain)
        kept = drop_burn_in(chain, cfg.burn_in)
        samples = kept.states
        tau = _mean_tau(samples)
        ess = diagnostics.ess_from_tau(len(kept), tau)
        m_col = None
    else:
        method = cfg.sampler.removeprefix("ens-")
        state = run_ensemble(
            method, target, m=cfg.m, n_sweeps=n, rng=rng,
            gamma=cfg.proposal_scale(dim), law=StretchLaw(cfg.stretch_a),
            seed=seed_id,
        )
        accept = state.acceptance_fraction()
        first = int(np.floor(cfg.burn_in * n))
        hist = state.history[first:]
        kept_len = hist.shape[0]
        chain_taus = [_mean_tau(hist[:, j, :]) for j in range(cfg.m)]
        tau = float(np.mean(chain_taus))
        ess = float(np.mean([diagnostics.ess_from_tau(kept_len, t) for t in chain_taus]))
        samples = hist.reshape(-1, dim)
        m_col = cfg.m

    evidence = None
    if dim <= _EVIDENCE_MAX_DIM:
        hd = default_evidence_histogram(samples)
        evidence = diagnostics.evidence_from_chain(target, samples, hd)
    coords = _coordinate_summaries(samples)
    wall = time.perf_counter() - t0
    return ResultRow(
        experiment="scaling", dim=dim, replicate=replicate, seed=seed_id,
        sampler=cfg.sampler, n=n, m=m_col, acceptance_fraction=accept,
        tau_hat=tau, ess=ess, evidence_hat=evidence, wall_time_s=wall,
        **coords,
    )


def _scaling_cell(args):
    cfg, dim, replicate = args
    return _scaling_row(cfg, dim, replicate)


def run_scaling(cfg: ExperimentConfig) -> list:
    """All (dim, replicate) rows for one sampler, in deterministic order.

    Cells fan out over a process pool when ``jobs > 1``; rows are ordered by
    (dim, replicate) regardless of completion order.
    """
    if cfg.experiment != "scaling":
        raise ConfigError("run_scaling needs a scaling config")
    n = cfg.iterations()
    per_iter = cfg.m if cfg.sampler.startswith("ens-") else 1
    total_updates = n * per_iter * len(cfg.dims) * cfg.replicates
    if total_updates > cfg.budget:
        raise ResourceLimitError(
            f"requested {total_updates} chain updates exceeds budget {cfg.budget}"
        )
    cells = [(cfg, d, r) for d in cfg.dims for r in range(cfg.replicates)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_scaling_cell, cells))
    else:
        rows = [_scaling_cell(cell) for cell in cells]
    return rows


# ---------------------------------------------------------------------------
# Exercises
# ---------------------------------------------------------------------------


def _row(experiment, case, quantity, value, index=None):
    return (experiment, case, quantity, index, value)


def _grid_posterior_1d(model, lo, hi, k):
    cells = build_grid(GridSpec.regular([(lo, hi)], k))
    post = DiscretizedPosterior.from_grid(model, cells)
    return cells, post


def run_noisy_mean_exercise(cfg: ExperimentConfig):
    """Point estimates, intervals, predictive widths, and model comparison
    for the five-measurement noisy-mean dataset, all from a dense 1-D grid."""
    model = noisy_mean_model()
    cells, post = _grid_posterior_1d(model, cfg.grid_lo, cfg.grid_hi, cfg.grid_cells)
    mean = summaries.point_estimate(post, LossSpec.squared())
    sd = float(np.sqrt((post.points - mean) ** 2 @ post.masses))
    median = summaries.point_estimate(post, LossSpec.absolute())
    mode = summaries.point_estimate(post, LossSpec.catastrophic())
    asym = summaries.point_estimate(
        post, LossSpec.piecewise_power(model.prior_mean)
    )
    rows = [
        _row("noisy-mean", "default", "posterior_mean", mean),
        _row("noisy-mean", "default", "posterior_sd", sd),
        _row("noisy-mean", "default", "posterior_median", median),
        _row("noisy-mean", "default", "posterior_mode", mode),
        _row("noisy-mean", "default", "asymmetric_estimate", asym),
    ]
    for cov in (0.50, 0.80, 0.95):
        tag = f"{int(round(cov * 100)):02d}"
        lo, hi = summaries.percentile_interval(post, cov)
        rows += [
            _row("noisy-mean", "default", f"ci{tag}_lo", lo),
            _row("noisy-mean", "default", f"ci{tag}_hi", hi),
        ]
        _, member = summaries.threshold_credible_region(post, cov)
        rows += [
            _row("noisy-mean", "default", f"hpd{tag}_lo", float(post.points[member].min())),
            _row("noisy-mean", "default", f"hpd{tag}_hi", float(post.points[member].max())),
        ]
    t_grid = np.linspace(cfg.grid_lo, cfg.grid_hi, 2001)
    for sigma_new in (0.0, 0.5, 2.0):
        dens = summaries.posterior_predictive_noisy_mean(model, sigma_new, t_grid)
        mass = dens / dens.sum()
        pmean = float(t_grid @ mass)
        psd = float(np.sqrt((t_grid - pmean) ** 2 @ mass))
        tag = f"{sigma_new:g}"
        rows += [
            _row("noisy-mean", "predictive", f"mean_sigma_{tag}", pmean),
            _row("noisy-mean", "predictive", f"sd_sigma_{tag}", psd),
        ]
    z_default = grid_evidence(model, cells)
    z_alt = grid_evidence(noisy_mean_alt_model(), cells)
    ratio = summaries.bayes_factor(z_default, z_alt)
    rows += [
        _row("noisy-mean", "model-comparison", "evidence_default_prior", z_default),
        _row("noisy-mean", "model-comparison", "evidence_alt_prior", z_alt),
        _row("noisy-mean", "model-comparison", "bayes_factor", ratio),
    ]
    text = (
        f"noisy-mean: mean={mean:.4f} sd={sd:.4f} median={median:.4f} "
        f"mode={mode:.4f} asym={asym:.4f}\n"
        f"evidence: default={z_default:.4e} alt={z_alt:.4e} ratio={ratio:.3f}"
    )
    return rows, text


def _grid_2d_case(target, bound, k):
    cells = build_grid(GridSpec.regular([(-bound, bound)] * 2, k))
    z = grid_evidence(target, cells)
    lw = grid_log_weights(target, cells)
    kish = diagnostics.kish_ess(log_weights=lw)
    post = DiscretizedPosterior.from_log_masses(cells.midpoints, lw)
    mass_xy = post.masses.reshape(k, k)
    xs = cells.midpoints[:, 0].reshape(k, k)[:, 0]
    ys = cells.midpoints[:, 1].reshape(k, k)[0, :]
    margin_x = DiscretizedPosterior(points=xs, masses=mass_xy.sum(axis=1))
    margin_y = DiscretizedPosterior(points=ys, masses=mass_xy.sum(axis=0))
    mean_x = summaries.point_estimate(margin_x, LossSpec.squared())
    mean_y = summaries.point_estimate(margin_y, LossSpec.squared())
    ci_x = summaries.percentile_interval(margin_x, 0.68)
    ci_y = summaries.percentile_interval(margin_y, 0.68)
    return z, mean_x, mean_y, ci_x, ci_y, kish


def run_grid_2d_exercise(cfg: ExperimentConfig):
    """Evidence, means, intervals, and weight ESS of the 2-D Gaussian on
    grids of growing resolution and extent."""
    target = exercise_2d_target()
    rows = []
    lines = []
    for bound in (2.0, 5.0):
        for k in (5, 20, 100):
            case = f"{k}x{k}[-{bound:g},{bound:g}]"
            z, mx, my, ci_x, ci_y, kish = _grid_2d_case(target, bound, k)
            rows += [
                _row("grid-2d", case, "evidence", z),
                _row("grid-2d", case, "mean_x", mx),
                _row("grid-2d", case, "mean_y", my),
                _row("grid-2d", case, "ci68_x_lo", ci_x[0]),
                _row("grid-2d", case, "ci68_x_hi", ci_x[1]),
                _row("grid-2d", case, "ci68_y_lo", ci_y[0]),
                _row("grid-2d", case, "ci68_y_hi", ci_y[1]),
                _row("grid-2d", case, "kish_ess", kish),
                _row("grid-2d", case, "n_cells", float(k * k)),
            ]
            lines.append(
                f"grid-2d {case}: Z={z:.5f} mean=({mx:+.3f},{my:+.3f}) ess={kish:.1f}"
            )
    return rows, "\n".join(lines)


def _weighted_axis_interval(ws, axis, coverage):
    post = DiscretizedPosterior.from_log_masses(ws.points[:, axis], ws.log_weights)
    return summaries.percentile_interval(post, coverage)


def run_importance_2d_exercise(cfg: ExperimentConfig):
    """Importance sampling of the 2-D Gaussian from centered proposals of
    width 1 and 2, plus a replicate study of the evidence estimator."""
    target = exercise_2d_target()
    n = cfg.iterations()
    rows = []
    lines = []
    for sigma_q in (1.0, 2.0):
        case = f"sigma{sigma_q:g}"
        proposal = DiagonalGaussianProposal((0.0, 0.0), (sigma_q, sigma_q))
        rng = derive_rng(cfg.seed, "importance-2d", case)
        ws = importance_weights(target, proposal, draw_iid(proposal, n, rng))
        z = is_evidence(ws)
        mean_xy = np.asarray(is_expectation(ws, lambda p: p))
        kish = diagnostics.kish_ess(log_weights=ws.log_weights)
        ci_x = _weighted_axis_interval(ws, 0, 0.68)
        ci_y = _weighted_axis_interval(ws, 1, 0.68)
        rows += [
            _row("importance-2d", case, "evidence", z),
            _row("importance-2d", case, "mean_x", float(mean_xy[0])),
            _row("importance-2d", case, "mean_y", float(mean_xy[1])),
            _row("importance-2d", case, "ci68_x_lo", ci_x[0]),
            _row("importance-2d", case, "ci68_x_hi", ci_x[1]),
            _row("importance-2d", case, "ci68_y_lo", ci_y[0]),
            _row("importance-2d", case, "ci68_y_hi", ci_y[1]),
            _row("importance-2d", case, "kish_ess", kish),
        ]
        lines.append(f"importance-2d {case}: Z={z:.4f} ess={kish:.1f}")
    # replicate spread of the evidence estimate at sigma_q = 1
    proposal = DiagonalGaussianProposal((0.0, 0.0), (1.0, 1.0))
    estimates = []
    for r in range(cfg.replicates if cfg.replicates > 1 else 100):
        rng = derive_rng(cfg.seed, "importance-2d", "replicates", r)
        ws = importance_weights(target, proposal, draw_iid(proposal, n, rng))
        estimates.append(is_evidence(ws))
    estimates = np.asarray(estimates)
    rows += [
        _row("importance-2d", "replicates", "evidence_mean", float(estimates.mean())),
        _row("importance-2d", "replicates", "evidence_se",
             float(estimates.std(ddof=1) / np.sqrt(estimates.size))),
        _row("importance-2d", "replicates", "count", float(estimates.size)),
    ]
    lines.append(
        f"importance-2d replicates: Z={estimates.mean():.4f} "
        f"+- {estimates.std(ddof=1) / np.sqrt(estimates.size):.4f}"
    )
    return rows, "\n".join(lines)


def _mh_2d_run(cfg: ExperimentConfig, start, rng, seed_id=None):
    target = exercise_2d_target()
    chain = run_chain(
        target, GaussianRandomWalk(cfg.proposal_sigma), np.asarray(start, float),
        cfg.iterations(), rng, seed=seed_id,
    )
    return target, chain


def run_mh_2d_exercise(cfg: ExperimentConfig):
    """Random-walk Metropolis on the 2-D Gaussian: estimates, diagnostics,
    histogram evidence, and a second run from a far-away start whose trace
    is emitted for burn-in inspection."""
    rows = []
    rng = derive_rng(cfg.seed, "mh-2d", "origin")
    target, chain = _mh_2d_run(cfg, cfg.start, rng)
    accept = acceptance_fraction(chain)
    kept = drop_burn_in(chain, cfg.burn_in)
    samples = kept.states
    coords = _coordinate_summaries(samples)
    taus = diagnostics.per_coordinate_tau(samples)
    tau = max(t.tau for t in taus) if not any(t.insufficient_data for t in taus) else float("nan")
    ess = diagnostics.chain_ess(samples)
    hd = default_evidence_histogram(samples, bins=cfg.bins, lo=cfg.bins_lo, hi=cfg.bins_hi)
    z = diagnostics.evidence_from_chain(target, samples, hd)
    case = "start-origin"
    rows += [
        _row("mh-2d", case, "acceptance_fraction", accept),
        _row("mh-2d", case, "mean_x", coords["mean_0"]),
        _row("mh-2d", case, "mean_y", coords["mean_1"]),
        _row("mh-2d", case, "ci68_x_lo", coords["ci68_lo_0"]),
        _row("mh-2d", case, "ci68_x_hi", coords["ci68_hi_0"]),
        _row("mh-2d", case, "ci68_y_lo", coords["ci68_lo_1"]),
        _row("mh-2d", case, "ci68_y_hi", coords["ci68_hi_1"]),
        _row("mh-2d", case, "tau_hat", tau),
        _row("mh-2d", case, "ess", ess),
        _row("mh-2d", case, "evidence_hat", z),
    ]
    far_rng = derive_rng(cfg.seed, "mh-2d", "far-start")
    _, far_chain = _mh_2d_run(replace(cfg, start=(10.0, 10.0)), (10.0, 10.0), far_rng)
    for i, (x, y) in enumerate(far_chain.states):
        rows.append(_row("mh-2d", "start-10-10", "trace_x", x, index=i))
        rows.append(_row("mh-2d", "start-10-10", "trace_y", y, index=i))
    text = (
        f"mh-2d: accept={accept:.3f} mean=({coords['mean_0']:+.3f},"
        f"{coords['mean_1']:+.3f}) tau={tau:.2f} ess={ess:.1f} Z={z:.4f}\n"
        f"mh-2d far start (10,10): trace of {len(far_chain)} steps emitted"
    )
    return rows, text


def run_mh_2d_replicates(cfg: ExperimentConfig) -> list:
    """Replicated origin-start runs of the 2-D MH exercise as scaling-style
    rows (one per replicate), for aggregation and spread checks."""
    rows = []
    for r in range(cfg.replicates):
        labels = ("mh-2d", 2, r)
        rng = derive_rng(cfg.seed, *labels)
        seed_id = stream_id(cfg.seed, *labels)
        t0 = time.perf_counter()
        target, chain = _mh_2d_run(cfg, cfg.start, rng, seed_id=seed_id)
        accept = acceptance_fraction(chain)
        kept = drop_burn_in(chain, cfg.burn_in)
        samples = kept.states
        tau = _mean_tau(samples)
        ess = diagnostics.ess_from_tau(len(kept), tau)
        hd = default_evidence_histogram(samples, bins=cfg.bins,
                                        lo=cfg.bins_lo, hi=cfg.bins_hi)
        z = diagnostics.evidence_from_chain(target, samples, hd)
        coords = _coordinate_summaries(samples)
        rows.append(ResultRow(
            experiment="mh-2d", dim=2, replicate=r, seed=seed_id,
            sampler="mh-rw", n=cfg.iterations(), m=None,
            acceptance_fraction=accept, tau_hat=tau, ess=ess, evidence_hat=z,
            wall_time_s=time.perf_counter() - t0, **coords,
        ))
    return rows


_EXERCISE_RUNNERS = {
    "noisy-mean": run_noisy_mean_exercise,
    "grid-2d": run_grid_2d_exercise,
    "importance-2d": run_importance_2d_exercise,
    "mh-2d": run_mh_2d_exercise,
}


def run_exercise(cfg: ExperimentConfig):
    """Dispatch one named exercise; returns (csv rows, summary text)."""
    if cfg.experiment not in _EXERCISE_RUNNERS:
        raise ConfigError(f"unknown exercise {cfg.experiment!r}")
    return _EXERCISE_RUNNERS[cfg.experiment](cfg)


# ---------------------------------------------------------------------------
# CSV input/output and reporting
# ---------------------------------------------------------------------------


def write_exercise_csv(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.writer(fh)
        writer.writerow(EXERCISE_CSV_HEADER)
        for experiment, case, quantity, index, value in rows:
            writer.writerow([
                experiment, case, quantity,
                "" if index is None else index, _fmt(float(value)),
            ])


def scaling_csv_text(rows) -> str:
    """Render scaling rows as CSV text (deterministic apart from wall time)."""
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    writer = csv.writer(buf)
    writer.writerow(SCALING_CSV_HEADER)
    for row in rows:
        writer.writerow([
            row.experiment, row.dim, row.replicate, row.seed, row.sampler,
            row.n, _fmt(row.m), _fmt(row.acceptance_fraction), _fmt(row.tau_hat),
            _fmt(row.ess), _fmt(row.evidence_hat), _fmt(row.mean_0),
            _fmt(row.mean_1), _fmt(row.ci68_lo_0), _fmt(row.ci68_hi_0),
            _fmt(row.ci68_lo_1), _fmt(row.ci68_hi_1),
            f"{row.wall_time_s:.3f}",
        ])
    return buf.getvalue()


def write_scaling_csv(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(scaling_csv_text(rows))


def read_scaling_rows(paths) -> list:
    """Parse ResultRow CSVs; a wrong header is a schema mismatch."""
    rows = []
    for path in paths:
        try:
            with open(path, "r", encoding="utf-8", newline="") as fh:
                lines = [ln for ln in fh if not ln.startswith("#")]
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        reader = csv.reader(io.StringIO("".join(lines)))
        header = tuple(next(reader, ()))
        if header != SCALING_CSV_HEADER:
            raise ConfigError(f"{path}: CSV header does not match the row schema")
        for rec in reader:
            if not rec:
                continue
            vals = dict(zip(SCALING_CSV_HEADER, rec))
            rows.append(ResultRow(
                experiment=vals["experiment"],
                dim=int(vals["dim"]),
                replicate=int(vals["replicate"]),
                seed=int(vals["seed"]),
                sampler=vals["sampler"],
                n=int(vals["n"]),
                m=int(vals["m"]) if vals["m"] else None,
                acceptance_fraction=float(vals["acceptance_fraction"]),
                tau_hat=float(vals["tau_hat"]) if vals["tau_hat"] else None,
                ess=float(vals["ess"]) if vals["ess"] else None,
                evidence_hat=float(vals["evidence_hat"]) if vals["evidence_hat"] else None,
                mean_0=float(vals["mean_0"]) if vals["mean_0"] else None,
                mean_1=float(vals["mean_1"]) if vals["mean_1"] else None,
                ci68_lo_0=float(vals["ci68_lo_0"]) if vals["ci68_lo_0"] else None,
                ci68_hi_0=float(vals["ci68_hi_0"]) if vals["ci68_hi_0"] else None,
                ci68_lo_1=float(vals["ci68_lo_1"]) if vals["ci68_lo_1"] else None,
                ci68_hi_1=float(vals["ci68_hi_1"]) if vals["ci68_hi_1"] else None,
                wall_time_s=float(vals["wall_time_s"]),
            ))
    return rows


def _mean_spread(values) -> str:
    vals = [v for v in values if v is not None and np.isfinite(v)]
    if not vals:
        return "-"
    if len(vals) == 1:
        return f"{vals[0]:.4g}"
    return f"{np.mean(vals):.4g} +- {np.std(vals, ddof=1):.4g}"


def report_table(rows) -> str:
    """Aggregate rows per (experiment, sampler, dim): mean and spread over
    replicates, with a flag when a 25%-target sampler leaves the acceptance
    band."""
    header = (
        f"{'experiment':<14}{'sampler':<14}{'dim':>4}{'reps':>6}  "
        f"{'acceptance':<22}{'tau_hat':<22}{'ess':<22}{'evidence':<22}flags"
    )
    if not rows:
        return header + "\n(no rows)"
    keys = sorted({(r.experiment, r.sampler, r.dim) for r in rows})
    lines = [header]
    for experiment, sampler, dim in keys:
        group = [r for r in rows
                 if (r.experiment, r.sampler, r.dim) == (experiment, sampler, dim)]
        accs = [r.acceptance_fraction for r in group]
        flags = []
        if sampler in _BAND_SAMPLERS and not (
            ACCEPTANCE_BAND[0] <= float(np.mean(accs)) <= ACCEPTANCE_BAND[1]
        ):
            flags.append("ACCEPTANCE-BAND")
        lines.append(
            f"{experiment:<14}{sampler:<14}{dim:>4}{len(group):>6}  "
            f"{_mean_spread(accs):<22}"
            f"{_mean_spread([r.tau_hat for r in group]):<22}"
            f"{_mean_spread([r.ess for r in group]):<22}"
            f"{_mean_spread([r.evidence_hat for r in group]):<22}"
            f"{' '.join(flags)}"
        )
    return "\n".join(lines)
