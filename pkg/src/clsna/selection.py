"""Change-point model fitting and DIC-based selection.

A change-point model fits one constant-parameter model per period, left to
right.  Each period after the first transitions from the previous period's
posterior-mean terminal latent positions, and its first snapshot keeps the
persistence term on the last pre-change snapshot.  Periods after the first do
not re-estimate the initial-spread variance (their first frame is conditioned,
not drawn from the stationary start).

DIC is conditional on the latent positions: deviance
D(theta, Z) = -2 * observation log-likelihood, DIC = 2*mean(D) - D(posterior
means).  Absolute values therefore depend on this deviance choice; comparisons
across candidate change-points of the same series are the supported use.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .evaluation import in_sample_auc
from .mcmc import McmcConfig, PosteriorSamples, PriorSpec, run_mcmc
from .model import AdjacencySeries, GroupLabels, observation_loglik


@dataclass
class ChangePointFit:
    """Per-period fits plus combined (summed) DIC and per-period overall AUC."""

    change_times: tuple
    periods: list
    dic: float
    period_dics: list
    period_aucs: list


@dataclass
class SelectionResult:
    best: ChangePointFit
    table: list  # (change_times, dic) rows, candidate order preserved
    fits: list


def _validate_change_times(change_times, horizon: int) -> tuple:
    times = tuple(int(r) for r in change_times)
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("change times must be strictly increasing")
    for r in times:
        if not 1 < r <= horizon:
            raise ValueError(f"change time {r} is not inside (1, {horizon}]")
    boundaries = (1,) + times + (horizon + 1,)
    for start, stop in zip(boundaries, boundaries[1:]):
        if stop - start < 2:
            raise ValueError(
                f"period starting at {start} must span at least 2 time steps; "
                "a transition is needed to inform the attractor strengths")
    return times


def _period_seed(seed: int, period_index: int) -> int:
    if period_index == 0:
        return seed
    return int(np.random.SeedSequence([seed, period_index]).generate_state(1)[0])


def compute_dic(samples, y, labels: GroupLabels | None = None) -> float:
    """Deviance information criterion of one fitted window, recomputed from
    the retained draws (not the stored deviance trace)."""
    if not isinstance(y, AdjacencySeries):
        y = AdjacencySeries(np.asarray(y))
    if labels is not None and labels.n_nodes != y.n_nodes:
        raise ValueError("label count does not match adjacency size")
    n_draws = samples.latent_draws.shape[0]
    if n_draws < 2:
        raise ValueError("DIC needs at least 2 retained draws")
    lag = samples.initial_lag
    total = 0.0
    for r in range(n_draws):
        total += observation_loglik(samples.params_at(r), y,
                                    samples.latent_draws[r], initial_lag=lag)
    dbar = -2.0 * total / n_draws
    plugin = -2.0 * observation_loglik(samples.posterior_mean_params(), y,
                                       samples.latent_mean, initial_lag=lag)
    return 2.0 * dbar - plugin


def fit_changepoint(y, labels: GroupLabels, priors: PriorSpec | None,
                    config: McmcConfig, change_times) -> ChangePointFit:
    """Fit one constant-parameter model per period, conditioning each period
    after the first on its predecessor's terminal posterior-mean latents."""
    if not isinstance(y, AdjacencySeries):
        y = AdjacencySeries(np.asarray(y))
    config = config if config is not None else McmcConfig()
    times = _validate_change_times(change_times, y.horizon)
    if not times:
        samples = run_mcmc(y, labels, priors, config)
        dic = compute_dic(samples, y, labels)
        auc = in_sample_auc(samples, y)
        return ChangePointFit(change_times=(), periods=[samples], dic=dic,
                              period_dics=[dic], period_aucs=[auc.overall])

    boundaries = (1,) + times + (y.horizon + 1,)
    periods: list[PosteriorSamples] = []
    period_dics: list[float] = []
    period_aucs: list[float] = []
    condition = None
    for j, (start, stop) in enumerate(zip(boundaries, boundaries[1:])):
        window = AdjacencySeries(y.matrices[start - 1:stop - 1])
        period_config = replace(config, seed=_period_seed(config.seed, j))
        samples = run_mcmc(window, labels, priors, period_config,
                           condition=condition)
        periods.append(samples)
        period_dics.append(compute_dic(samples, window, labels))
        period_aucs.append(in_sample_auc(samples, window).overall)
        condition = (samples.latent_mean[-1], y.matrices[stop - 2])
    return ChangePointFit(change_times=times, periods=periods,
                          dic=float(sum(period_dics)), period_dics=period_dics,
                          period_aucs=period_aucs)


def candidate_sort_key(dic: float, change_times) -> tuple:
    """Ordering for candidate selection: lowest DIC, then fewer change
    points, then earlier change times."""
    return (dic, len(change_times), tuple(change_times))


def select_changepoint(y, labels: GroupLabels, priors: PriorSpec | None,
                       config: McmcConfig, candidates) -> SelectionResult:
    """Fit every candidate change-time set and pick the lowest-DIC fit."""
    candidates = [tuple(int(r) for r in c) for c in candidates]
    if not candidates:
        raise ValueError("need at least one candidate change-time set")
    fits = [fit_changepoint(y, labels, priors, config, c) for c in candidates]
    table = [(fit.change_times, fit.dic) for fit in fits]
    best = min(fits, key=lambda f: candidate_sort_key(f.dic, f.change_times))
    return SelectionResult(best=best, table=table, fits=fits)


def write_dic_table(rows, path):
    """Delimited DIC table; rows are (change_times, dic) or
    (change_times, dic, sd-over-replicates)."""
    with open(path, "w") as fh:
        fh.write("# DIC by candidate change-time set; lower is better; "
                 "sd column filled when replicated\n")
        fh.write("change_times,dic,sd\n")
        for row in rows:
            times, dic = row[0], row[1]
            sd = row[2] if len(row) > 2 else None
            label = ";".join(str(t) for t in times) if times else "none"
            sd_cell = "" if sd is None else repr(float(sd))
            fh.write(f"{label},{repr(float(dic))},{sd_cell}\n")
