"""Forward simulation of two-group network series.

Latent positions start from an isotropic Gaussian, evolve by attractor pulls
plus Gaussian noise, and each snapshot's edges are one Bernoulli draw per
unordered pair, consumed in (t, i < j) lexicographic order from a
counter-based generator, so runs are bit-reproducible from the seed alone.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist
from scipy.special import expit

from .model import AdjacencySeries, GroupLabels, LatentState, ModelParams, transition_mean


@dataclass
class SimConfig:
    n_nodes: int
    horizon: int
    params: ModelParams
    labels: GroupLabels
    seed: int
    p: int = 2
    schedule: list[tuple[int, ModelParams]] | None = None
    divergence_bound: float = 1e6

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("need at least two nodes")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.p < 1:
            raise ValueError("latent dimension must be at least 1")
        if self.labels.n_nodes != self.n_nodes:
            raise ValueError("label count does not match node count")
        if self.divergence_bound <= 0:
            raise ValueError("divergence bound must be positive")
        if self.schedule is not None:
            times = [t for t, _ in self.schedule]
            if not self.schedule:
                raise ValueError("schedule must contain at least one entry")
            if times[0] != 1:
                raise ValueError("schedule must start at time 1")
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError("schedule start times must be strictly increasing")
            if times[-1] > self.horizon:
                raise ValueError("schedule start time beyond horizon")


def sample_edges(rng: np.random.Generator, params: ModelParams, z: np.ndarray,
                 y_prev: np.ndarray | None) -> np.ndarray:
    """One Bernoulli draw per unordered pair, returned in (i < j) order."""
    eta = params.alpha - pdist(z)
    if y_prev is not None:
        iu = np.triu_indices(z.shape[0], 1)
        eta = eta + params.delta * y_prev[iu]
    return (rng.random(eta.size) < expit(eta)).astype(np.int8)


def _generate(config: SimConfig, params_at) -> tuple[AdjacencySeries, list[LatentState]]:
    n, horizon, p = config.n_nodes, config.horizon, config.p
    rng = np.random.Generator(np.random.Philox(config.seed))
    iu = np.triu_indices(n, 1)
    Z = np.empty((horizon, n, p))
    Y = np.zeros((horizon, n, n), dtype=np.int8)
    warned = False
    for t in range(1, horizon + 1):
        params = params_at(t)
        if t == 1:
            z = rng.standard_normal((n, p)) * np.sqrt(params.tau2)
        else:
            mu = transition_mean(params, config.labels, Z[t - 2], Y[t - 2])
            z = mu + rng.standard_normal((n, p)) * np.sqrt(params.sigma2)
        Z[t - 1] = z
        if not warned and np.abs(z).max() > config.divergence_bound:
            warnings.warn(
                f"latent coordinate magnitude exceeded {config.divergence_bound:g} "
                f"at time {t}; dynamics may be diverging",
                RuntimeWarning,
            )
            warned = True
        edges = sample_edges(rng, params, z, Y[t - 2] if t > 1 else None)
        Y[t - 1][iu] = edges
        Y[t - 1] += Y[t - 1].T
    series = AdjacencySeries(Y)
    latents = [LatentState(Z[t], time_index=t + 1) for t in range(horizon)]
    return series, latents


def simulate(config: SimConfig) -> tuple[AdjacencySeries, list[LatentState]]:
    """Simulate a series under constant parameters (config.schedule is ignored
    unless it is a single entry, in which case that entry is used)."""
    if config.schedule is not None and len(config.schedule) > 1:
        raise ValueError("use simulate_changepoint for multi-period schedules")
    params = config.schedule[0][1] if config.schedule else config.params
    return _generate(config, lambda t: params)


def simulate_changepoint(config: SimConfig):
    """Simulate with parameters switching at the scheduled start times.

    Returns (series, latents, change_times) where change_times lists the
    starts of every period after the first.
    """
    if config.schedule is None:
        raise ValueError("simulate_changepoint requires a schedule")
    starts = [t for t, _ in config.schedule]
    plist = [p for _, p in config.schedule]

    def params_at(t: int) -> ModelParams:
        k = int(np.searchsorted(starts, t, side="right")) - 1
        return plist[k]

    series, latents = _generate(config, params_at)
    return series, latents, starts[1:]
