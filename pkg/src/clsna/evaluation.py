"""Fit diagnostics: in-sample link-prediction AUC, group edge densities,
mean latent distances, and posterior summary tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .model import AdjacencySeries, GroupLabels, ModelParams, edge_logit_matrix


@dataclass
class AucReport:
    """Per-time AUC (NaN where a frame has no edge/non-edge contrast) and the
    AUC pooled over every pair at every time."""

    per_time: np.ndarray
    overall: float


@dataclass
class DensityReport:
    """Realized edge fractions per time, by pair class.  Entries are NaN when
    the class has no pairs (group smaller than 2)."""

    within_1: np.ndarray
    within_2: np.ndarray
    between: np.ndarray
    overall: np.ndarray


@dataclass
class DistanceReport:
    """Mean pairwise latent Euclidean distances per time, by pair class."""

    within_1: np.ndarray
    within_2: np.ndarray
    between: np.ndarray


@dataclass
class ParamSummary:
    mean: float
    sd: float
    q_low: float
    q_high: float


@dataclass
class ContrastSummary:
    mean: float
    se: float
    prob_positive: float
    prob_negative: float


@dataclass
class PosteriorSummary:
    params: dict = field(default_factory=dict)
    contrasts: dict = field(default_factory=dict)
    quantile_levels: tuple = (0.025, 0.975)
    draws: dict = field(default_factory=dict, repr=False)

    def prob_negative(self, name: str) -> float:
        return float(np.mean(self.draws[name] < 0))

    def prob_positive(self, name: str) -> float:
        return float(np.mean(self.draws[name] > 0))


def rank_auc(scores, outcomes) -> float:
    """Area under the ROC curve via the rank statistic, ties by midrank.
    NaN when either class is empty."""
    scores = np.asarray(scores, dtype=float)
    outcomes = np.asarray(outcomes)
    n_pos = int(np.sum(outcomes == 1))
    n_neg = outcomes.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = rankdata(scores)
    rank_sum = float(ranks[outcomes == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _resolve_estimates(estimates):
    """Accept a fitted-samples object (posterior means are used) or an
    explicit (params, latent positions[, initial persistence lag]) tuple."""
    if hasattr(estimates, "posterior_mean_params"):
        return (estimates.posterior_mean_params(), estimates.latent_mean,
                estimates.initial_lag)
    params, z, *rest = estimates
    lag = rest[0] if rest else None
    return params, np.asarray(z, dtype=float), lag


def in_sample_auc(estimates, y: AdjacencySeries) -> AucReport:
    """Score every pair at every time with its fitted edge probability and
    rank against the observed edges."""
    params, z, initial_lag = _resolve_estimates(estimates)
    if not isinstance(y, AdjacencySeries):
        y = AdjacencySeries(np.asarray(y))
    if z.shape[0] != y.horizon or z.shape[1] != y.n_nodes:
        raise ValueError("latent trajectory does not match the adjacency series")
    iu = np.triu_indices(y.n_nodes, 1)
    per_time = np.empty(y.horizon)
    pooled_scores, pooled_outcomes = [], []
    for t in range(y.horizon):
        if t > 0:
            lag = y[t - 1]
        elif initial_lag is not None:
            lag = np.asarray(initial_lag)
        else:
            lag = None
        eta = edge_logit_matrix(params, z[t], lag)
        probs = 1.0 / (1.0 + np.exp(-eta))
        outcomes = y[t][iu]
        per_time[t] = rank_auc(probs, outcomes)
        pooled_scores.append(probs)
        pooled_outcomes.append(outcomes)
    overall = rank_auc(np.concatenate(pooled_scores), np.concatenate(pooled_outcomes))
    return AucReport(per_time=per_time, overall=overall)


def _pair_classes(labels: GroupLabels):
    idx1 = labels.indices(1)
    idx2 = labels.indices(2)
    n1, n2 = idx1.size, idx2.size
    return idx1, idx2, n1 * (n1 - 1) / 2.0, n2 * (n2 - 1) / 2.0, float(n1 * n2)


def density_report(y: AdjacencySeries, labels: GroupLabels) -> DensityReport:
    """Edge fraction per time within each group, between groups, and overall."""
    if not isinstance(y, AdjacencySeries):
        y = AdjacencySeries(np.asarray(y))
    idx1, idx2, p1, p2, pb = _pair_classes(labels)
    T = y.horizon
    w1 = np.empty(T)
    w2 = np.empty(T)
    bt = np.empty(T)
    overall = np.empty(T)
    total_pairs = p1 + p2 + pb
    for t in range(T):
        m = y[t]
        e1 = m[np.ix_(idx1, idx1)].sum() / 2.0
        e2 = m[np.ix_(idx2, idx2)].sum() / 2.0
        eb = float(m[np.ix_(idx1, idx2)].sum())
        w1[t] = e1 / p1 if p1 > 0 else np.nan
        w2[t] = e2 / p2 if p2 > 0 else np.nan
        bt[t] = eb / pb if pb > 0 else np.nan
        overall[t] = (e1 + e2 + eb) / total_pairs
    return DensityReport(within_1=w1, within_2=w2, between=bt, overall=overall)


def _mean_pair_distance(points) -> float:
    n = points.shape[0]
    if n < 2:
        return float("nan")
    diffs = points[:, None, :] - points[None, :, :]
    d = np.sqrt((diffs ** 2).sum(axis=-1))
    iu = np.triu_indices(n, 1)
    return float(d[iu].mean())


def latent_distance_report(z, labels: GroupLabels) -> DistanceReport:
    """Mean pairwise Euclidean distance per time, by pair class; the whole
    within series is NaN for a group smaller than 2."""
    z = np.asarray(z, dtype=float)
    idx1 = labels.indices(1)
    idx2 = labels.indices(2)
    T = z.shape[0]
    w1 = np.empty(T)
    w2 = np.empty(T)
    bt = np.empty(T)
    for t in range(T):
        w1[t] = _mean_pair_distance(z[t, idx1])
        w2[t] = _mean_pair_distance(z[t, idx2])
        if idx1.size and idx2.size:
            diffs = z[t, idx1][:, None, :] - z[t, idx2][None, :, :]
            bt[t] = float(np.sqrt((diffs ** 2).sum(axis=-1)).mean())
        else:
            bt[t] = np.nan
    return DistanceReport(within_1=w1, within_2=w2, between=bt)


_CONTRAST_DEFS = {
    "gamma1w_minus_gamma2w": lambda d: d["gamma1w"] - d["gamma2w"],
    "abs_gammab_minus_abs_gamma1w": lambda d: np.abs(d["gammab"]) - np.abs(d["gamma1w"]),
    "abs_gammab_minus_abs_gamma2w": lambda d: np.abs(d["gammab"]) - np.abs(d["gamma2w"]),
}


def posterior_summary(samples, quantiles=(0.025, 0.975)) -> PosteriorSummary:
    """Mean, SD, and quantiles per parameter over retained draws, plus
    draw-wise contrasts between the attraction strengths.  tau is summarized
    on the standard-deviation scale alongside tau2.  Quantiles use linear
    order-statistic interpolation."""
    names = ("alpha", "delta", "gamma1w", "gamma2w", "gammab", "tau2")
    draws = {name: np.asarray(getattr(samples, name), dtype=float)
             for name in names}
    draws["tau"] = np.sqrt(draws["tau2"])
    summary = PosteriorSummary(quantile_levels=tuple(quantiles), draws=draws)
    for name, values in draws.items():
        q_low, q_high = np.quantile(values, quantiles)
        summary.params[name] = ParamSummary(
            mean=float(values.mean()),
            sd=float(values.std(ddof=1)) if values.size > 1 else 0.0,
            q_low=float(q_low), q_high=float(q_high))
    for name, fn in _CONTRAST_DEFS.items():
        values = fn(draws)
        summary.contrasts[name] = ContrastSummary(
            mean=float(values.mean()),
            se=float(values.std(ddof=1)) if values.size > 1 else 0.0,
            prob_positive=float(np.mean(values > 0)),
            prob_negative=float(np.mean(values < 0)))
    return summary


# ---------------------------------------------------------------------------
# delimited-text report writers
# ---------------------------------------------------------------------------

def _format(x) -> str:
    if isinstance(x, float) and np.isnan(x):
        return ""
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def write_auc_report(report: AucReport, path):
    with open(path, "w") as fh:
        fh.write("# units: AUC in [0,1]; empty cell = undefined "
                 "(no edge/non-edge contrast)\n")
        fh.write("time,auc\n")
        for t, value in enumerate(report.per_time, start=1):
            fh.write(f"{t},{_format(float(value))}\n")
        fh.write(f"overall,{_format(float(report.overall))}\n")


def write_density_report(report: DensityReport, path):
    with open(path, "w") as fh:
        fh.write("# units: realized edge fraction in [0,1]\n")
        fh.write("time,within_group_1,within_group_2,between,overall\n")
        for t in range(report.overall.size):
            cells = [str(t + 1)] + [_format(float(series[t])) for series in
                                    (report.within_1, report.within_2,
                                     report.between, report.overall)]
            fh.write(",".join(cells) + "\n")


def write_distance_report(report: DistanceReport, path):
    with open(path, "w") as fh:
        fh.write("# units: latent-space Euclidean distance (model scale)\n")
        fh.write("time,within_group_1,within_group_2,between\n")
        for t in range(report.within_1.size):
            cells = [str(t + 1)] + [_format(float(series[t])) for series in
                                    (report.within_1, report.within_2,
                                     report.between)]
            fh.write(",".join(cells) + "\n")


def write_posterior_summary(summary: PosteriorSummary, path):
    lo, hi = summary.quantile_levels
    with open(path, "w") as fh:
        fh.write("# quantile estimator: empirical order statistics, linear "
                 "interpolation\n")
        fh.write("# units: model scale (transition variance pinned at 1)\n")
        fh.write(f"name,kind,mean,sd_or_se,q{100 * lo:g},q{100 * hi:g},"
                 "prob_positive,prob_negative\n")
        for name, row in summary.params.items():
            fh.write(f"{name},parameter,{_format(row.mean)},{_format(row.sd)},"
                     f"{_format(row.q_low)},{_format(row.q_high)},,\n")
        for name, row in summary.contrasts.items():
            fh.write(f"{name},contrast,{_format(row.mean)},{_format(row.se)},,,"
                     f"{_format(row.prob_positive)},{_format(row.prob_negative)}\n")
