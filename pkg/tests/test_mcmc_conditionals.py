"""Single-move conditionals of the sampler against independent oracles.

The sampler targets the joint in which each unordered pair's Bernoulli term
enters twice (the node conditionals carry both s_ij and s_ji), transitions
enter once per node, and the first frame carries either the isotropic
Gaussian prior (fresh fits) or a transition from fixed predecessor positions
(continuation fits).  The oracle below rebuilds that joint from the public
model functions only.
"""

import numpy as np
import pytest

from clsna import _kernels
from clsna.model import (
    AdjacencySeries,
    GroupLabels,
    ModelParams,
    attractor_between,
    attractor_within,
    observation_loglik,
    transition_logdensity,
)
from clsna.mcmc import (
    adapt_tuning,
    draw_gamma_between,
    draw_gamma_within,
    draw_tau2,
    gamma_between_moments,
    gamma_within_moments,
    tau2_posterior,
)


def random_series(rng, n, t, density=0.5):
    mats = []
    for _ in range(t):
        y = (rng.random((n, n)) < density).astype(np.int8)
        y = np.triu(y, 1)
        mats.append(y + y.T)
    return np.stack(mats)


def theta_of(params):
    return np.array([params.alpha, params.delta, params.gamma1w, params.gamma2w,
                     params.gammab, params.tau2])


def params_of(theta):
    return ModelParams(alpha=theta[0], delta=theta[1], gamma1w=theta[2],
                       gamma2w=theta[3], gammab=theta[4], tau2=theta[5])


class State:
    """Kernel cache bundle for hand-built test problems."""

    def __init__(self, Z, Y, labels, theta, lag0=None, zprev=None):
        T, N, p = Z.shape
        self.Z = Z.astype(np.float64)
        self.Y = Y.astype(np.int8)
        self.labels = labels
        self.labels0 = labels.zero_based()
        self.theta = theta.astype(np.float64)
        self.has_lag0 = lag0 is not None
        self.lag0 = (lag0 if lag0 is not None else np.zeros((N, N))).astype(np.int8)
        self.has_init_prior = zprev is None
        self.zprev = (zprev if zprev is not None else np.zeros((N, p))).astype(np.float64)
        self.aw0 = np.zeros((N, p))
        self.ab0 = np.zeros((N, p))
        if zprev is not None:
            for i in range(N):
                self.aw0[i] = attractor_within(i, self.zprev, self.lag0, labels)
                self.ab0[i] = attractor_between(i, self.zprev, self.lag0, labels)
        self.dist = np.zeros((T, N, N))
        self.sum_w = np.zeros((T, N, p))
        self.sum_b = np.zeros((T, N, p))
        self.cnt_w = np.zeros((T, N), dtype=np.int64)
        self.cnt_b = np.zeros((T, N), dtype=np.int64)
        self.edge_total = np.zeros(1)
        _kernels.refresh_caches(self.Z, self.Y, self.labels0, self.theta,
                                self.lag0, self.has_lag0, self.dist,
                                self.sum_w, self.cnt_w, self.sum_b, self.cnt_b,
                                self.edge_total)

    def site_logratio(self, t, i, znew):
        newrow = np.zeros(self.Z.shape[1])
        logr, d_edge = _kernels.site_logratio(
            self.Z, self.Y, self.dist, self.sum_w, self.cnt_w, self.sum_b,
            self.cnt_b, self.labels0, self.theta, self.lag0, self.has_lag0,
            self.has_init_prior, self.zprev, self.aw0, self.ab0,
            t, i, np.asarray(znew, dtype=np.float64), newrow)
        return logr, d_edge


def log_joint_oracle(state, Z):
    """Sampler target rebuilt from public model functions (up to a constant)."""
    params = params_of(state.theta)
    series = AdjacencySeries(state.Y)
    lag = state.lag0 if state.has_lag0 else None
    total = 2.0 * observation_loglik(params, series, Z, initial_lag=lag)
    for t in range(1, Z.shape[0]):
        total += transition_logdensity(params, state.labels, Z[t], Z[t - 1],
                                       state.Y[t - 1])
    if state.has_init_prior:
        total += float(-0.5 * np.sum(Z[0] ** 2) / params.tau2
                       - 0.5 * Z[0].size * np.log(2 * np.pi * params.tau2))
    else:
        total += transition_logdensity(params, state.labels, Z[0], state.zprev,
                                       state.lag0)
    return total


def random_state(rng, n=None, t=None, p=None, conditioned=False):
    n = n or int(rng.integers(3, 7))
    t = t or int(rng.integers(1, 5))
    p = p or int(rng.integers(1, 4))
    Z = rng.normal(size=(t, n, p))
    Y = random_series(rng, n, t)
    labels = GroupLabels(rng.integers(1, 3, size=n))
    theta = np.array([rng.normal(), rng.normal(), 0.4 + rng.normal() * 0.3,
                      0.2 + rng.normal() * 0.3, -0.4 + rng.normal() * 0.3,
                      float(rng.uniform(0.5, 2.0))])
    if conditioned:
        lag0 = random_series(rng, n, 1)[0]
        zprev = rng.normal(size=(n, p))
        return State(Z, Y, labels, theta, lag0=lag0, zprev=zprev)
    return State(Z, Y, labels, theta)


# ---------------------------------------------------------------------------
# latent-site conditionals
# ---------------------------------------------------------------------------

def test_site_logratio_matches_joint_difference_fresh():
    rng = np.random.default_rng(17)
    for _ in range(8):
        state = random_state(rng)
        T, N, p = state.Z.shape
        for t in range(T):
            for i in range(N):
                znew = state.Z[t, i] + rng.normal(size=p)
                logr, _ = state.site_logratio(t, i, znew)
                Zmod = state.Z.copy()
                Zmod[t, i] = znew
                want = log_joint_oracle(state, Zmod) - log_joint_oracle(state, state.Z)
                assert logr == pytest.approx(want, abs=1e-9), (t, i)


def test_site_logratio_matches_joint_difference_conditioned():
    rng = np.random.default_rng(23)
    for _ in range(8):
        state = random_state(rng, conditioned=True)
        T, N, p = state.Z.shape
        for t in range(T):
            for i in range(N):
                znew = state.Z[t, i] + rng.normal(size=p)
                logr, _ = state.site_logratio(t, i, znew)
                Zmod = state.Z.copy()
                Zmod[t, i] = znew
                want = log_joint_oracle(state, Zmod) - log_joint_oracle(state, state.Z)
                assert logr == pytest.approx(want, abs=1e-9), (t, i)


def test_site_logratio_is_exactly_zero_for_identity_proposal():
    rng = np.random.default_rng(2)
    state = random_state(rng, n=5, t=3)
    for t in range(3):
        for i in range(5):
            logr, d_edge = state.site_logratio(t, i, state.Z[t, i].copy())
            assert logr == 0.0 and d_edge == 0.0


def test_last_frame_conditional_ignores_attractor_strengths():
    # at t = T-1 there is no outgoing transition; with the incoming frame's
    # neighbourhoods empty of attractors the gammas must not matter
    rng = np.random.default_rng(31)
    n, t, p = 5, 3, 2
    Z = rng.normal(size=(t, n, p))
    Y = random_series(rng, n, t)
    labels = GroupLabels(rng.integers(1, 3, size=n))
    base = np.array([0.3, 0.5, 0.4, 0.2, -0.4, 1.0])
    # zero out frame T-2 adjacency so incoming attractors vanish
    Y2 = Y.copy()
    Y2[t - 2] = 0
    znew = Z[t - 1, 0] + rng.normal(size=p)
    ref = None
    for gammas in ([0.4, 0.2, -0.4], [5.0, -3.0, 2.0]):
        theta = base.copy()
        theta[2:5] = gammas
        state = State(Z, Y2, labels, theta)
        logr, _ = state.site_logratio(t - 1, 0, znew)
        ref = logr if ref is None else ref
        assert logr == pytest.approx(ref, abs=1e-12)


def test_single_site_samples_match_grid_quadrature():
    # N=2, T=1, p=1: hold one node and all parameters fixed; the other node's
    # samples must follow expit(eta)^2 * Normal(0, tau2)
    from scipy.special import expit

    alpha, tau2, c = 0.8, 1.5, 0.7
    Z = np.array([[[0.0], [c]]])
    Y = np.array([[[0, 1], [1, 0]]], dtype=np.int8)
    labels = GroupLabels(np.array([1, 2]))
    theta = np.array([alpha, 0.0, 0.3, 0.3, -0.3, tau2])
    state = State(Z, Y, labels, theta)

    _kernels.set_seed(99)
    s = np.log(1.0)
    znew = np.zeros(1)
    newrow = np.zeros(2)
    warm, keep = 2000, 20000

    def step(k, s, adapt):
        accepted, logr = _kernels.update_latent_site(
            state.Z, state.Y, state.dist, state.sum_w, state.cnt_w,
            state.sum_b, state.cnt_b, state.labels0, state.theta, state.lag0,
            state.has_lag0, state.has_init_prior, state.zprev, state.aw0,
            state.ab0, 0, 0, s, state.edge_total, znew, newrow)
        if adapt:
            ratio = 1.0 if logr >= 0 else np.exp(logr)
            s += (ratio - 0.234) / k ** 0.8
        return s

    for k in range(1, warm + 1):
        s = step(k, s, True)
    draws = np.empty(keep)
    for k in range(keep):
        s = step(k, s, False)
        draws[k] = state.Z[0, 0, 0]

    grid = np.linspace(-9.0, 9.0, 6001)
    eta = alpha - np.abs(grid - c)
    logdens = 2 * np.log(expit(eta)) - 0.5 * grid ** 2 / tau2
    dens = np.exp(logdens - logdens.max())
    cdf = np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(grid))
    cdf = np.concatenate([[0.0], cdf])
    cdf /= cdf[-1]

    xs = np.sort(draws)
    F = np.interp(xs, grid, cdf)
    n = xs.size
    ks = np.max(np.maximum(F - np.arange(n) / n, np.arange(1, n + 1) / n - F))
    assert ks < 0.05, ks


# ---------------------------------------------------------------------------
# alpha / delta conditionals
# ---------------------------------------------------------------------------

def test_edge_param_logratio_matches_observation_loglik():
    rng = np.random.default_rng(41)
    for conditioned in (False, True):
        for _ in range(6):
            state = random_state(rng, conditioned=conditioned)
            series = AdjacencySeries(state.Y)
            lag = state.lag0 if state.has_lag0 else None
            cur = params_of(state.theta)
            base_ll = observation_loglik(cur, series, state.Z, initial_lag=lag)
            for which in (0, 1):
                prop = float(state.theta[which] + rng.normal())
                dll = _kernels.edge_param_logratio(
                    state.Z, state.Y, state.dist, state.theta, state.lag0,
                    state.has_lag0, which, prop)
                t2 = state.theta.copy()
                t2[which] = prop
                want = observation_loglik(params_of(t2), series, state.Z,
                                          initial_lag=lag) - base_ll
                assert dll == pytest.approx(want, abs=1e-9), which


# ---------------------------------------------------------------------------
# closed-form draws
# ---------------------------------------------------------------------------

def gamma_within_oracle(z, y, labels, group, gammab, prior_mean, prior_var,
                        zprev=None, lag0=None):
    """Plain-loop recomputation of the within-strength conditional moments."""
    num = den = 0.0
    frames = []
    if zprev is not None:
        frames.append((zprev, lag0, z[0]))
    for t in range(1, z.shape[0]):
        frames.append((z[t - 1], y[t - 1], z[t]))
    for z_from, y_from, z_to in frames:
        for i in range(z.shape[1]):
            if labels.labels[i] != group:
                continue
            b = attractor_within(i, z_from, y_from, labels)
            ab = attractor_between(i, z_from, y_from, labels)
            a = z_to[i] - z_from[i] - gammab * ab
            num += float(a @ b)
            den += float(b @ b)
    prec = den + 1.0 / prior_var
    return (num + prior_mean / prior_var) / prec, 1.0 / np.sqrt(prec)


def gamma_between_oracle(z, y, labels, g1, g2, prior_mean, prior_var,
                         zprev=None, lag0=None):
    num = den = 0.0
    frames = []
    if zprev is not None:
        frames.append((zprev, lag0, z[0]))
    for t in range(1, z.shape[0]):
        frames.append((z[t - 1], y[t - 1], z[t]))
    for z_from, y_from, z_to in frames:
        for i in range(z.shape[1]):
            gw = g1 if labels.labels[i] == 1 else g2
            d = attractor_between(i, z_from, y_from, labels)
            aw = attractor_within(i, z_from, y_from, labels)
            c = z_to[i] - z_from[i] - gw * aw
            num += float(c @ d)
            den += float(d @ d)
    prec = den + 1.0 / prior_var
    return (num + prior_mean / prior_var) / prec, 1.0 / np.sqrt(prec)


def test_gamma_conditional_moments_match_oracle():
    rng = np.random.default_rng(53)
    for conditioned in (False, True):
        for _ in range(6):
            n, t, p = int(rng.integers(3, 7)), int(rng.integers(2, 5)), 2
            z = rng.normal(size=(t, n, p))
            y = random_series(rng, n, t)
            lab = rng.integers(1, 3, size=n)
            lab[0], lab[1] = 1, 2
            labels = GroupLabels(lab)
            g1, g2, gb = 0.5, 0.1, -0.4
            zprev = rng.normal(size=(n, p)) if conditioned else None
            lag0 = random_series(rng, n, 1)[0] if conditioned else None
            for group in (1, 2):
                got = gamma_within_moments(z, y, labels, group, gammab=gb,
                                           prior_mean=0.5, prior_var=100.0,
                                           condition=(zprev, lag0) if conditioned else None)
                want = gamma_within_oracle(z, y, labels, group, gb, 0.5, 100.0,
                                           zprev, lag0)
                assert got[0] == pytest.approx(want[0], abs=1e-10)
                assert got[1] == pytest.approx(want[1], abs=1e-10)
            got = gamma_between_moments(z, y, labels, gamma1w=g1, gamma2w=g2,
                                        prior_mean=-0.5, prior_var=100.0,
                                        condition=(zprev, lag0) if conditioned else None)
            want = gamma_between_oracle(z, y, labels, g1, g2, -0.5, 100.0,
                                        zprev, lag0)
            assert got[0] == pytest.approx(want[0], abs=1e-10)
            assert got[1] == pytest.approx(want[1], abs=1e-10)


def test_tau2_posterior_matches_closed_form():
    rng = np.random.default_rng(61)
    z1 = rng.normal(size=(4, 2))
    shape, scale = tau2_posterior(z1, prior_shape=2.05, prior_scale=1.2)
    assert shape == pytest.approx(2.05 + 4.0)  # + N p / 2
    assert scale == pytest.approx(1.2 + 0.5 * np.sum(z1 ** 2))


def test_gamma_draws_match_moments_empirically():
    rng = np.random.default_rng(71)
    n, t = 5, 3
    z = rng.normal(size=(t, n, 2))
    y = random_series(rng, n, t)
    labels = GroupLabels(np.array([1, 1, 1, 2, 2]))
    mean, sd = gamma_within_moments(z, y, labels, 1, gammab=-0.3,
                                    prior_mean=0.5, prior_var=100.0)
    reps = 100_000
    draw_rng = np.random.default_rng(5)
    draws = np.array([
        draw_gamma_within(draw_rng, z, y, labels, 1, gammab=-0.3,
                          prior_mean=0.5, prior_var=100.0)
        for _ in range(reps)
    ])
    assert abs(draws.mean() - mean) < 3 * sd / np.sqrt(reps)
    assert abs(draws.std() - sd) < 3 * sd / np.sqrt(2 * reps)
    mean_b, sd_b = gamma_between_moments(z, y, labels, gamma1w=0.4, gamma2w=0.1,
                                         prior_mean=-0.5, prior_var=100.0)
    draws_b = np.array([
        draw_gamma_between(draw_rng, z, y, labels, gamma1w=0.4, gamma2w=0.1,
                           prior_mean=-0.5, prior_var=100.0)
        for _ in range(reps)
    ])
    assert abs(draws_b.mean() - mean_b) < 3 * sd_b / np.sqrt(reps)
    assert abs(draws_b.std() - sd_b) < 3 * sd_b / np.sqrt(2 * reps)


def test_tau2_draws_match_closed_form_empirically():
    rng = np.random.default_rng(81)
    z1 = rng.normal(size=(10, 2)) * 1.3
    shape, scale = tau2_posterior(z1, prior_shape=2.05, prior_scale=1.0)
    assert shape > 4  # moments below need finite variance and kurtosis
    reps = 100_000
    draw_rng = np.random.default_rng(6)
    draws = np.array([draw_tau2(draw_rng, z1, 2.05, 1.0) for _ in range(reps)])
    mean = scale / (shape - 1)
    sd = mean / np.sqrt(shape - 2)
    assert abs(draws.mean() - mean) < 3 * sd / np.sqrt(reps)
    kurt = np.mean((draws - draws.mean()) ** 4) / draws.var() ** 2
    se_sd = sd * np.sqrt((kurt - 1) / (4 * reps))
    assert abs(draws.std() - sd) < 3 * se_sd


# ---------------------------------------------------------------------------
# proposal-scale adaptation
# ---------------------------------------------------------------------------

def test_adapt_tuning_fixed_point_and_k2_step():
    assert adapt_tuning(1.3, k=5, ratio=0.234) == pytest.approx(1.3)
    assert adapt_tuning(0.0, k=2, ratio=1.7) == pytest.approx(1.0 - 0.234)
    assert adapt_tuning(0.0, k=2, ratio=37.0) == pytest.approx(0.766)


def test_adapt_tuning_monotone_in_ratio():
    vals = [adapt_tuning(0.5, k=3, ratio=r) for r in np.linspace(0, 1.5, 40)]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


def test_adapt_tuning_requires_k_at_least_two():
    with pytest.raises(ValueError):
        adapt_tuning(0.0, k=1, ratio=0.5)
