"""Adaptive Metropolis-within-Gibbs sampler.

Each iteration sweeps every latent position with single-site random walks
(proposal SD exp(s), s adapted toward a 0.234 acceptance rate with gain
1/k^0.8), then alpha and delta by random walks, then tau2 and the three
attractor strengths by direct conjugate draws.  The transition variance is
pinned at 1 for identifiability; the overall latent scale is absorbed by
tau2 and the edge parameters.  Stored trajectories are centered and
Procrustes-aligned to the centered initial configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .alignment import center, procrustes_align
from .gmds import gmds_initialize
from .model import (
    AdjacencySeries,
    GroupLabels,
    ModelParams,
    attractor_between,
    attractor_within,
)

_PARAM_NAMES = ("alpha", "delta", "gamma1w", "gamma2w", "gammab", "tau2")


@dataclass
class PriorSpec:
    """Independent priors: Normals for edge and attractor parameters, an
    inverse gamma for tau2.  tau2_scale=None resolves at fit time to
    1.05 * (mean squared first-frame coordinate of the initialisation)."""

    alpha_mean: float = 0.0
    alpha_var: float = 100.0
    delta_mean: float = 0.0
    delta_var: float = 100.0
    gammaw_mean: float = 0.5
    gammaw_var: float = 100.0
    gammab_mean: float = -0.5
    gammab_var: float = 100.0
    tau2_shape: float = 2.05
    tau2_scale: float | None = None

    def __post_init__(self):
        for name in ("alpha_var", "delta_var", "gammaw_var", "gammab_var", "tau2_shape"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tau2_scale is not None and not self.tau2_scale > 0:
            raise ValueError("tau2_scale must be positive when given")


@dataclass
class McmcConfig:
    n_iterations: int = 50_000
    burn_in: int = 15_000
    thin: int = 1
    seed: int = 0
    latent_dim: int = 2
    tuning_init_edge: float = 2.0
    tuning_init_latent: float = 4.0
    adapt_target: float = 0.234
    adapt_decay: float = 0.8

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be at least 1")
        if not 0 <= self.burn_in < self.n_iterations:
            raise ValueError("need 0 <= burn_in < n_iterations")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be at least 1")
        if not 0 < self.adapt_target < 1:
            raise ValueError("adapt_target must be in (0, 1)")


@dataclass
class Checkpoint:
    """Full chain state: enough to continue a run deterministically."""

    iteration: int
    z: np.ndarray
    theta: np.ndarray
    s_site: np.ndarray
    s_edge: np.ndarray
    reference: np.ndarray
    priors_resolved: np.ndarray
    seed: int


@dataclass
class PosteriorSamples:
    """Retained draws (post burn-in, thinned), aligned latents, diagnostics."""

    alpha: np.ndarray
    delta: np.ndarray
    gamma1w: np.ndarray
    gamma2w: np.ndarray
    gammab: np.ndarray
    tau2: np.ndarray
    deviance: np.ndarray
    latent_draws: np.ndarray
    latent_mean: np.ndarray
    reference: np.ndarray
    acceptance: dict
    tuning: dict
    tau2_sampled: bool
    initial_lag: np.ndarray | None
    checkpoint: Checkpoint
    config: McmcConfig
    priors: PriorSpec

    @property
    def n_retained(self) -> int:
        return self.alpha.size

    def params_at(self, r: int) -> ModelParams:
        return ModelParams(alpha=float(self.alpha[r]), delta=float(self.delta[r]),
                           gamma1w=float(self.gamma1w[r]), gamma2w=float(self.gamma2w[r]),
                           gammab=float(self.gammab[r]), tau2=float(self.tau2[r]))

    def posterior_mean_params(self) -> ModelParams:
        return ModelParams(alpha=float(self.alpha.mean()), delta=float(self.delta.mean()),
                           gamma1w=float(self.gamma1w.mean()),
                           gamma2w=float(self.gamma2w.mean()),
                           gammab=float(self.gammab.mean()), tau2=float(self.tau2.mean()))


def adapt_tuning(s: float, k: int, ratio: float, target: float = 0.234,
                 decay: float = 0.8) -> float:
    """Tuning update after iteration k-1's proposal: the log proposal SD moves
    by (min(1, ratio) - target) with gain 1/(k-1)^decay."""
    if k < 2:
        raise ValueError("tuning updates start at k = 2")
    return s + (min(1.0, ratio) - target) / (k - 1) ** decay


# ---------------------------------------------------------------------------
# closed-form conditionals (shared with the compiled sweep)
# ---------------------------------------------------------------------------

def _series_matrices(y) -> np.ndarray:
    if isinstance(y, AdjacencySeries):
        return y.matrices
    return np.asarray(y, dtype=np.int8)


def _build_caches(z, y, labels, theta, lag0=None):
    Z = np.ascontiguousarray(z, dtype=np.float64)
    Y = np.ascontiguousarray(_series_matrices(y))
    T, N, p = Z.shape
    labels0 = labels.zero_based()
    has_lag0 = lag0 is not None
    lag = np.ascontiguousarray(lag0 if lag0 is not None else np.zeros((N, N)),
                               dtype=np.int8)
    dist = np.zeros((T, N, N))
    sum_w = np.zeros((T, N, p))
    sum_b = np.zeros((T, N, p))
    cnt_w = np.zeros((T, N), dtype=np.int64)
    cnt_b = np.zeros((T, N), dtype=np.int64)
    edge_total = np.zeros(1)
    _kernels.refresh_caches(Z, Y, labels0, theta, lag, has_lag0,
                            dist, sum_w, cnt_w, sum_b, cnt_b, edge_total)
    return Z, Y, labels0, lag, dist, sum_w, cnt_w, sum_b, cnt_b, edge_total


def _boundary_attractors(zprev, lag0, labels):
    n, p = zprev.shape
    aw0 = np.zeros((n, p))
    ab0 = np.zeros((n, p))
    for i in range(n):
        aw0[i] = attractor_within(i, zprev, lag0, labels)
        ab0[i] = attractor_between(i, zprev, lag0, labels)
    return aw0, ab0


def _condition_arrays(condition, labels, n, p):
    if condition is None or condition[0] is None:
        zeros = np.zeros((n, p))
        return True, zeros, np.zeros((n, n), dtype=np.int8), zeros.copy(), zeros.copy()
    zprev, lag0 = condition
    zprev = np.ascontiguousarray(zprev, dtype=np.float64)
    lag0 = np.ascontiguousarray(lag0, dtype=np.int8)
    if zprev.shape != (n, p):
        raise ValueError(f"conditioning positions must have shape ({n}, {p})")
    if lag0.shape != (n, n):
        raise ValueError(f"conditioning adjacency must have shape ({n}, {n})")
    aw0, ab0 = _boundary_attractors(zprev, lag0, labels)
    return False, zprev, lag0, aw0, ab0


def gamma_within_moments(z, y, labels, group, gammab, prior_mean=0.5,
                         prior_var=100.0, condition=None):
    """Posterior (mean, sd) of one group's within-attractor strength given
    everything else; sums run over every transition in the window."""
    Z = np.ascontiguousarray(z, dtype=np.float64)
    theta = np.array([0.0, 0.0, 0.0, 0.0, float(gammab), 1.0])
    Z, Y, labels0, lag, dist, sum_w, cnt_w, sum_b, cnt_b, _ = _build_caches(
        Z, y, labels, theta)
    has_init_prior, zprev, lag0, aw0, ab0 = _condition_arrays(
        condition, labels, Z.shape[1], Z.shape[2])
    num, den = _kernels.gamma_within_stats(Z, sum_w, cnt_w, sum_b, cnt_b,
                                           labels0, theta, has_init_prior,
                                           zprev, aw0, ab0, group - 1)
    prec = den + 1.0 / prior_var
    return (num + prior_mean / prior_var) / prec, 1.0 / np.sqrt(prec)


def gamma_between_moments(z, y, labels, gamma1w, gamma2w, prior_mean=-0.5,
                          prior_var=100.0, condition=None):
    """Posterior (mean, sd) of the between-attractor strength given the rest."""
    Z = np.ascontiguousarray(z, dtype=np.float64)
    theta = np.array([0.0, 0.0, float(gamma1w), float(gamma2w), 0.0, 1.0])
    Z, Y, labels0, lag, dist, sum_w, cnt_w, sum_b, cnt_b, _ = _build_caches(
        Z, y, labels, theta)
    has_init_prior, zprev, lag0, aw0, ab0 = _condition_arrays(
        condition, labels, Z.shape[1], Z.shape[2])
    num, den = _kernels.gamma_between_stats(Z, sum_w, cnt_w, sum_b, cnt_b,
                                            labels0, theta, has_init_prior,
                                            zprev, aw0, ab0)
    prec = den + 1.0 / prior_var
    return (num + prior_mean / prior_var) / prec, 1.0 / np.sqrt(prec)


def draw_gamma_within(rng, z, y, labels, group, gammab, prior_mean=0.5,
                      prior_var=100.0, condition=None):
    mean, sd = gamma_within_moments(z, y, labels, group, gammab, prior_mean,
                                    prior_var, condition)
    return mean + sd * rng.standard_normal()


def draw_gamma_between(rng, z, y, labels, gamma1w, gamma2w, prior_mean=-0.5,
                       prior_var=100.0, condition=None):
    mean, sd = gamma_between_moments(z, y, labels, gamma1w, gamma2w, prior_mean,
                                     prior_var, condition)
    return mean + sd * rng.standard_normal()


def tau2_posterior(z1, prior_shape=2.05, prior_scale=1.0):
    """Inverse-gamma (shape, scale) of the initial-spread variance given the
    first-frame positions."""
    z1 = np.asarray(z1, dtype=np.float64)
    return prior_shape + 0.5 * z1.size, prior_scale + 0.5 * float(np.sum(z1 * z1))


def draw_tau2(rng, z1, prior_shape=2.05, prior_scale=1.0):
    shape, scale = tau2_posterior(z1, prior_shape, prior_scale)
    return scale / rng.gamma(shape)


# ---------------------------------------------------------------------------
# chain driver
# ---------------------------------------------------------------------------

def _resolve_priors(priors: PriorSpec, z_first: np.ndarray) -> np.ndarray:
    scale = priors.tau2_scale
    if scale is None:
        scale = 1.05 * float(np.sum(z_first ** 2)) / z_first.size
        if scale <= 0:
            scale = 1.0
    return np.array([priors.alpha_mean, priors.alpha_var,
                     priors.delta_mean, priors.delta_var,
                     priors.gammaw_mean, priors.gammaw_var,
                     priors.gammab_mean, priors.gammab_var,
                     priors.tau2_shape, scale])


def _kernel_seed(seed: int, start_iteration: int) -> int:
    return int(np.random.SeedSequence([seed, start_iteration]).generate_state(1)[0])


def _check_finite(k: int, theta: np.ndarray, Z: np.ndarray, edge_total: float):
    """Raise with the offending quantity the moment the chain goes non-finite."""
    if np.isfinite(theta).all() and np.isfinite(edge_total):
        return
    for name, value in zip(_PARAM_NAMES, theta):
        if not np.isfinite(value):
            raise RuntimeError(f"chain state non-finite: {name} at iteration {k}")
    bad = np.argwhere(~np.isfinite(Z))
    if bad.size:
        t, i, d = bad[0]
        raise RuntimeError(
            f"chain state non-finite: latent position (t={t + 1}, node={i}, "
            f"coord={d}) at iteration {k}")
    raise RuntimeError(f"chain state non-finite: edge log-likelihood at iteration {k}")


def run_mcmc(y: AdjacencySeries, labels: GroupLabels, priors: PriorSpec | None = None,
             config: McmcConfig | None = None, *, condition=None,
             resume: Checkpoint | None = None) -> PosteriorSamples:
    """Fit the model to an adjacency series.

    condition=(z_prev, y_prev) continues an earlier window: the first frame
    then transitions from the fixed positions z_prev, its edges carry the
    persistence term on y_prev, and tau2 is held fixed rather than sampled.
    """
    if not isinstance(y, AdjacencySeries):
        y = AdjacencySeries(np.asarray(y))
    priors = priors if priors is not None else PriorSpec()
    config = config if config is not None else McmcConfig()
    T, N, p = y.horizon, y.n_nodes, config.latent_dim
    if labels.n_nodes != N:
        raise ValueError("label count does not match adjacency size")
    if labels.indices(1).size == 0 or labels.indices(2).size == 0:
        raise ValueError("both groups must be non-empty")

    conditioned = condition is not None
    if conditioned:
        zprev_in, lag_in = condition
        has_init_prior, zprev, lag0, aw0, ab0 = _condition_arrays(
            (np.asarray(zprev_in), np.asarray(lag_in)), labels, N, p)
    else:
        has_init_prior, zprev, lag0, aw0, ab0 = _condition_arrays(None, labels, N, p)
    has_lag0 = conditioned

    if resume is not None:
        if resume.iteration >= config.n_iterations:
            raise ValueError("checkpoint is already at or past n_iterations")
        Z = resume.z.copy()
        theta = resume.theta.copy()
        s_site = resume.s_site.copy()
        s_edge = resume.s_edge.copy()
        reference = resume.reference
        priors_arr = resume.priors_resolved
        start_k = resume.iteration
    else:
        z_init = gmds_initialize(y, p, start=zprev if conditioned else None)
        Z = np.ascontiguousarray(z_init, dtype=np.float64)
        priors_arr = _resolve_priors(priors, Z[0]) if has_init_prior else \
            _resolve_priors(priors, np.ones((N, p)))
        tau2_init = float(np.sum(Z[0] ** 2)) / (N * p) if has_init_prior else 1.0
        if tau2_init <= 0:
            tau2_init = 1.0
        theta = np.array([0.0, 0.0, 0.5, 0.5, -0.5, tau2_init])
        s_site = np.full((T, N), config.tuning_init_latent)
        s_edge = np.full(2, config.tuning_init_edge)
        reference = center(Z)
        start_k = 0

    labels0 = labels.zero_based()
    Y = np.ascontiguousarray(y.matrices)
    dist = np.zeros((T, N, N))
    sum_w = np.zeros((T, N, p))
    sum_b = np.zeros((T, N, p))
    cnt_w = np.zeros((T, N), dtype=np.int64)
    cnt_b = np.zeros((T, N), dtype=np.int64)
    edge_total = np.zeros(1)
    _kernels.refresh_caches(Z, Y, labels0, theta, lag0, has_lag0,
                            dist, sum_w, cnt_w, sum_b, cnt_b, edge_total)

    acc_site = np.zeros((T, N), dtype=np.int64)
    acc_edge = np.zeros(2, dtype=np.int64)
    znew = np.zeros(p)
    newrow = np.zeros(N)

    retained = [k for k in range(start_k + 1, config.n_iterations + 1)
                if k > config.burn_in and (k - config.burn_in - 1) % config.thin == 0]
    r_total = len(retained)
    draws = np.empty((r_total, 6))
    deviance = np.empty(r_total)
    latent_draws = np.empty((r_total, T, N, p))
    latent_sum = np.zeros((T, N, p))
    retained_set = set(retained)

    _kernels.set_seed(_kernel_seed(config.seed, start_k))

    acc_site_snap = acc_site.copy()
    acc_edge_snap = acc_edge.copy()
    post_start = max(config.burn_in, start_k)
    r = 0
    for k in range(start_k + 1, config.n_iterations + 1):
        adapt = k <= config.burn_in
        _kernels.sweep(Z, Y, dist, sum_w, cnt_w, sum_b, cnt_b, labels0, theta,
                       priors_arr, lag0, has_lag0, has_init_prior, zprev, aw0,
                       ab0, s_site, s_edge, acc_site, acc_edge, k, adapt,
                       config.adapt_target, config.adapt_decay, edge_total,
                       znew, newrow)
        _check_finite(k, theta, Z, edge_total[0])
        if k == post_start:
            acc_site_snap = acc_site.copy()
            acc_edge_snap = acc_edge.copy()
        if k % 500 == 0:
            _kernels.refresh_caches(Z, Y, labels0, theta, lag0, has_lag0,
                                    dist, sum_w, cnt_w, sum_b, cnt_b, edge_total)
        if k in retained_set:
            draws[r] = theta
            deviance[r] = -2.0 * edge_total[0]
            aligned = procrustes_align(center(Z), reference)
            latent_draws[r] = aligned
            latent_sum += aligned
            r += 1

    denom = max(config.n_iterations - post_start, 1)
    acceptance = {
        "alpha": float(acc_edge[0] - acc_edge_snap[0]) / denom,
        "delta": float(acc_edge[1] - acc_edge_snap[1]) / denom,
        "latent_sites": (acc_site - acc_site_snap) / denom,
        "latent": float((acc_site - acc_site_snap).mean()) / denom,
    }
    tuning = {"alpha": float(s_edge[0]), "delta": float(s_edge[1]),
              "latent_sites": s_site.copy()}
    checkpoint = Checkpoint(iteration=config.n_iterations, z=Z.copy(),
                            theta=theta.copy(), s_site=s_site.copy(),
                            s_edge=s_edge.copy(), reference=reference,
                            priors_resolved=priors_arr, seed=config.seed)
    return PosteriorSamples(
        alpha=draws[:, 0].copy(), delta=draws[:, 1].copy(),
        gamma1w=draws[:, 2].copy(), gamma2w=draws[:, 3].copy(),
        gammab=draws[:, 4].copy(), tau2=draws[:, 5].copy(),
        deviance=deviance, latent_draws=latent_draws,
        latent_mean=latent_sum / max(r_total, 1), reference=reference,
        acceptance=acceptance, tuning=tuning, tau2_sampled=has_init_prior,
        initial_lag=(lag0.copy() if has_lag0 else None), checkpoint=checkpoint,
        config=config, priors=priors)


def save_checkpoint(checkpoint: Checkpoint, path):
    np.savez(path, iteration=checkpoint.iteration, z=checkpoint.z,
             theta=checkpoint.theta, s_site=checkpoint.s_site,
             s_edge=checkpoint.s_edge, reference=checkpoint.reference,
             priors_resolved=checkpoint.priors_resolved, seed=checkpoint.seed)


def load_checkpoint(path) -> Checkpoint:
    with np.load(path) as data:
        return Checkpoint(iteration=int(data["iteration"]), z=data["z"],
                          theta=data["theta"], s_site=data["s_site"],
                          s_edge=data["s_edge"], reference=data["reference"],
                          priors_resolved=data["priors_resolved"],
                          seed=int(data["seed"]))
