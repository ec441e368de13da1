"""Compiled inner loops of the sampler.

State layout shared by all kernels (0-indexed frames):
  Z (T,N,p), Y (T,N,N) int8, theta = [alpha, delta, g1w, g2w, gb, tau2],
  labels0 (N,) 0/1 group indices, dist (T,N,N) pairwise-distance cache,
  sum_w/sum_b (T,N,p) + cnt_w/cnt_b (T,N) neighbour position sums per frame,
  edge_total (1,) the Bernoulli log-likelihood summed over unordered pairs.

Fresh fits: has_init_prior=True, frame 0 carries the N(0, tau2 I) prior and
no persistence term.  Continuation fits: has_lag0/has_init_prior flipped,
frame 0 conditions on fixed predecessor positions zprev with constant
attractors aw0/ab0 and persistence matrix lag0.

Node conditionals carry each pair's Bernoulli term twice (both s_ij and
s_ji), hence the factor 2 on edge log-likelihood differences; transition
noise is pinned at variance 1.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def set_seed(seed):
    np.random.seed(seed)


@njit(cache=True)
def _softplus(x):
    # log(1 + exp(x)) without overflow
    if x > 35.0:
        return x
    if x < -35.0:
        return np.exp(x)
    return np.log1p(np.exp(x))


@njit(cache=True)
def refresh_caches(Z, Y, labels0, theta, lag0, has_lag0,
                   dist, sum_w, cnt_w, sum_b, cnt_b, edge_total):
    """Recompute distance cache, neighbour sums and the edge log-lik total."""
    T, N, p = Z.shape
    alpha = theta[0]
    delta = theta[1]
    total = 0.0
    for t in range(T):
        for i in range(N):
            dist[t, i, i] = 0.0
            for j in range(i + 1, N):
                s = 0.0
                for d in range(p):
                    diff = Z[t, i, d] - Z[t, j, d]
                    s += diff * diff
                r = np.sqrt(s)
                dist[t, i, j] = r
                dist[t, j, i] = r
                if t > 0:
                    lag = delta * Y[t - 1, i, j]
                elif has_lag0:
                    lag = delta * lag0[i, j]
                else:
                    lag = 0.0
                eta = alpha + lag - r
                total += Y[t, i, j] * eta - _softplus(eta)
        for i in range(N):
            cw = 0
            cb = 0
            for d in range(p):
                sum_w[t, i, d] = 0.0
                sum_b[t, i, d] = 0.0
            for j in range(N):
                if j != i and Y[t, i, j] == 1:
                    if labels0[j] == labels0[i]:
                        cw += 1
                        for d in range(p):
                            sum_w[t, i, d] += Z[t, j, d]
                    else:
                        cb += 1
                        for d in range(p):
                            sum_b[t, i, d] += Z[t, j, d]
            cnt_w[t, i] = cw
            cnt_b[t, i] = cb
    edge_total[0] = total


@njit(cache=True)
def _own_mean_coord(zi_d, sw, cw, sb, cb, g, gb):
    # transition mean coordinate for a node at position zi_d with neighbour
    # sums (sw, cw) within-group and (sb, cb) between-group
    m = zi_d
    if cw > 0:
        m += g * (sw / cw - zi_d)
    if cb > 0:
        m += gb * (sb / cb - zi_d)
    return m


@njit(cache=True)
def site_logratio(Z, Y, dist, sum_w, cnt_w, sum_b, cnt_b, labels0, theta,
                  lag0, has_lag0, has_init_prior, zprev, aw0, ab0,
                  t, i, znew, newrow):
    """Log target ratio for moving node i at frame t to znew.

    Fills newrow with the proposed distances from i; returns (logr, d_edge)
    where d_edge is the unordered edge log-likelihood change.
    """
    T, N, p = Z.shape
    alpha = theta[0]
    delta = theta[1]
    gb = theta[4]
    tau2 = theta[5]
    g_i = theta[2] if labels0[i] == 0 else theta[3]

    d_edge = 0.0
    for j in range(N):
        if j == i:
            newrow[j] = 0.0
            continue
        s = 0.0
        for d in range(p):
            diff = znew[d] - Z[t, j, d]
            s += diff * diff
        r = np.sqrt(s)
        newrow[j] = r
        if t > 0:
            lag = delta * Y[t - 1, i, j]
        elif has_lag0:
            lag = delta * lag0[i, j]
        else:
            lag = 0.0
        eta_new = alpha + lag - r
        eta_old = alpha + lag - dist[t, i, j]
        y = Y[t, i, j]
        d_edge += (y * eta_new - _softplus(eta_new)) - (y * eta_old - _softplus(eta_old))

    logr = 2.0 * d_edge

    # incoming term
    if t == 0:
        if has_init_prior:
            sq_new = 0.0
            sq_old = 0.0
            for d in range(p):
                sq_new += znew[d] * znew[d]
                sq_old += Z[t, i, d] * Z[t, i, d]
            logr += -0.5 * (sq_new - sq_old) / tau2
        else:
            for d in range(p):
                mu = zprev[i, d] + g_i * aw0[i, d] + gb * ab0[i, d]
                rn = znew[d] - mu
                ro = Z[t, i, d] - mu
                logr += -0.5 * (rn * rn - ro * ro)
    else:
        for d in range(p):
            mu = _own_mean_coord(Z[t - 1, i, d], sum_w[t - 1, i, d], cnt_w[t - 1, i],
                                 sum_b[t - 1, i, d], cnt_b[t - 1, i], g_i, gb)
            rn = znew[d] - mu
            ro = Z[t, i, d] - mu
            logr += -0.5 * (rn * rn - ro * ro)

    # outgoing terms: own transition and the transitions of frame-t neighbours
    if t < T - 1:
        for d in range(p):
            mu_old = _own_mean_coord(Z[t, i, d], sum_w[t, i, d], cnt_w[t, i],
                                     sum_b[t, i, d], cnt_b[t, i], g_i, gb)
            mu_new = _own_mean_coord(znew[d], sum_w[t, i, d], cnt_w[t, i],
                                     sum_b[t, i, d], cnt_b[t, i], g_i, gb)
            r = Z[t + 1, i, d]
            logr += -0.5 * ((r - mu_new) * (r - mu_new) - (r - mu_old) * (r - mu_old))
        for j in range(N):
            if j == i or Y[t, i, j] != 1:
                continue
            g_j = theta[2] if labels0[j] == 0 else theta[3]
            if labels0[j] == labels0[i]:
                coeff = g_j / cnt_w[t, j]
            else:
                coeff = gb / cnt_b[t, j]
            for d in range(p):
                mu_old = _own_mean_coord(Z[t, j, d], sum_w[t, j, d], cnt_w[t, j],
                                         sum_b[t, j, d], cnt_b[t, j], g_j, gb)
                mu_new = mu_old + coeff * (znew[d] - Z[t, i, d])
                r = Z[t + 1, j, d]
                logr += -0.5 * ((r - mu_new) * (r - mu_new) - (r - mu_old) * (r - mu_old))
    return logr, d_edge


@njit(cache=True)
def update_latent_site(Z, Y, dist, sum_w, cnt_w, sum_b, cnt_b, labels0, theta,
                       lag0, has_lag0, has_init_prior, zprev, aw0, ab0,
                       t, i, s_ti, edge_total, znew, newrow):
    """One random-walk move of node i at frame t; proposal SD is exp(s_ti)."""
    T, N, p = Z.shape
    sd = np.exp(s_ti)
    for d in range(p):
        znew[d] = Z[t, i, d] + sd * np.random.normal()
    logr, d_edge = site_logratio(Z, Y, dist, sum_w, cnt_w, sum_b, cnt_b,
                                 labels0, theta, lag0, has_lag0,
                                 has_init_prior, zprev, aw0, ab0,
                                 t, i, znew, newrow)
    u = np.random.random()
    accepted = 0
    if np.log(u) < min(0.0, logr):
        accepted = 1
        if t < T - 1:
            for j in range(N):
                if j != i and Y[t, i, j] == 1:
                    if labels0[j] == labels0[i]:
                        for d in range(p):
                            sum_w[t, j, d] += znew[d] - Z[t, i, d]
                    else:
                        for d in range(p):
                            sum_b[t, j, d] += znew[d] - Z[t, i, d]
        for d in range(p):
            Z[t, i, d] = znew[d]
        for j in range(N):
            dist[t, i, j] = newrow[j]
            dist[t, j, i] = newrow[j]
        edge_total[0] += d_edge
    return accepted, logr


@njit(cache=True)
def edge_param_logratio(Z, Y, dist, theta, lag0, has_lag0, which, prop):
    """Edge log-likelihood change from setting alpha (which=0) or delta
    (which=1) to prop, summed over unordered pairs."""
    T, N, _ = Z.shape
    alpha = theta[0]
    delta = theta[1]
    dll = 0.0
    for t in range(T):
        if which == 1 and t == 0 and not has_lag0:
            continue  # no persistence term in the first frame of a fresh fit
        for i in range(N):
            for j in range(i + 1, N):
                if t > 0:
                    yp = Y[t - 1, i, j]
                elif has_lag0:
                    yp = lag0[i, j]
                else:
                    yp = 0
                if which == 1 and yp == 0:
                    continue  # logit unchanged
                r = dist[t, i, j]
                if which == 0:
                    eta_old = alpha + delta * yp - r
                    eta_new = prop + delta * yp - r
                else:
                    eta_old = alpha + delta * yp - r
                    eta_new = alpha + prop * yp - r
                y = Y[t, i, j]
                dll += (y * eta_new - _softplus(eta_new)) - (y * eta_old - _softplus(eta_old))
    return dll


@njit(cache=True)
def update_edge_param(Z, Y, dist, theta, lag0, has_lag0, which, s_val,
                      prior_mean, prior_var, edge_total):
    """One random-walk move of alpha (which=0) or delta (which=1)."""
    cur = theta[which]
    prop = cur + np.exp(s_val) * np.random.normal()
    dll = edge_param_logratio(Z, Y, dist, theta, lag0, has_lag0, which, prop)
    logr = 2.0 * dll
    logr += -0.5 * ((prop - prior_mean) * (prop - prior_mean)
                    - (cur - prior_mean) * (cur - prior_mean)) / prior_var
    u = np.random.random()
    accepted = 0
    if np.log(u) < min(0.0, logr):
        accepted = 1
        theta[which] = prop
        edge_total[0] += dll
    return accepted, logr


@njit(cache=True)
def gamma_within_stats(Z, sum_w, cnt_w, sum_b, cnt_b, labels0, theta,
                       has_init_prior, zprev, aw0, ab0, group):
    """(sum a.b, sum b.b) over this group's transitions, where b is the
    within-group attractor and a the step residual net of the between pull."""
    T, N, p = Z.shape
    gb = theta[4]
    num = 0.0
    den = 0.0
    if not has_init_prior:
        for i in range(N):
            if labels0[i] != group:
                continue
            for d in range(p):
                b = aw0[i, d]
                a = Z[0, i, d] - zprev[i, d] - gb * ab0[i, d]
                num += a * b
                den += b * b
    for t in range(1, T):
        for i in range(N):
            if labels0[i] != group:
                continue
            cw = cnt_w[t - 1, i]
            cb = cnt_b[t - 1, i]
            for d in range(p):
                zi = Z[t - 1, i, d]
                b = sum_w[t - 1, i, d] / cw - zi if cw > 0 else 0.0
                ab = sum_b[t - 1, i, d] / cb - zi if cb > 0 else 0.0
                a = Z[t, i, d] - zi - gb * ab
                num += a * b
                den += b * b
    return num, den


@njit(cache=True)
def gamma_between_stats(Z, sum_w, cnt_w, sum_b, cnt_b, labels0, theta,
                        has_init_prior, zprev, aw0, ab0):
    """(sum c.d, sum d.d) over all transitions, where d is the between-group
    attractor and c the step residual net of the within pull."""
    T, N, p = Z.shape
    num = 0.0
    den = 0.0
    if not has_init_prior:
        for i in range(N):
            g_i = theta[2] if labels0[i] == 0 else theta[3]
            for d in range(p):
                dd = ab0[i, d]
                c = Z[0, i, d] - zprev[i, d] - g_i * aw0[i, d]
                num += c * dd
                den += dd * dd
    for t in range(1, T):
        for i in range(N):
            g_i = theta[2] if labels0[i] == 0 else theta[3]
            cw = cnt_w[t - 1, i]
            cb = cnt_b[t - 1, i]
            for d in range(p):
                zi = Z[t - 1, i, d]
                aw = sum_w[t - 1, i, d] / cw - zi if cw > 0 else 0.0
                dd = sum_b[t - 1, i, d] / cb - zi if cb > 0 else 0.0
                c = Z[t, i, d] - zi - g_i * aw
                num += c * dd
                den += dd * dd
    return num, den


@njit(cache=True)
def draw_scale_params(Z, sum_w, cnt_w, sum_b, cnt_b, labels0, theta, priors,
                      has_init_prior, zprev, aw0, ab0):
    """Direct draws, in order: tau2 (fresh fits only), g1w, g2w, gb."""
    T, N, p = Z.shape
    if has_init_prior:
        ssq = 0.0
        for i in range(N):
            for d in range(p):
                ssq += Z[0, i, d] * Z[0, i, d]
        shape = priors[8] + 0.5 * N * p
        scale = priors[9] + 0.5 * ssq
        theta[5] = scale / np.random.gamma(shape, 1.0)
    for group in range(2):
        num, den = gamma_within_stats(Z, sum_w, cnt_w, sum_b, cnt_b, labels0,
                                      theta, has_init_prior, zprev, aw0, ab0,
                                      group)
        prec = den + 1.0 / priors[5]
        mean = (num + priors[4] / priors[5]) / prec
        theta[2 + group] = mean + np.random.normal() / np.sqrt(prec)
    num, den = gamma_between_stats(Z, sum_w, cnt_w, sum_b, cnt_b, labels0,
                                   theta, has_init_prior, zprev, aw0, ab0)
    prec = den + 1.0 / priors[7]
    mean = (num + priors[6] / priors[7]) / prec
    theta[4] = mean + np.random.normal() / np.sqrt(prec)


@njit(cache=True)
def sweep(Z, Y, dist, sum_w, cnt_w, sum_b, cnt_b, labels0, theta, priors,
          lag0, has_lag0, has_init_prior, zprev, aw0, ab0,
          s_site, s_edge, acc_site, acc_edge, k, adapt,
          adapt_target, adapt_decay, edge_total, znew, newrow):
    """One full iteration: every latent site, then alpha, delta, tau2, gammas."""
    T, N, p = Z.shape
    gain = 1.0 / k ** adapt_decay
    for t in range(T):
        for i in range(N):
            accepted, logr = update_latent_site(
                Z, Y, dist, sum_w, cnt_w, sum_b, cnt_b, labels0, theta,
                lag0, has_lag0, has_init_prior, zprev, aw0, ab0,
                t, i, s_site[t, i], edge_total, znew, newrow)
            acc_site[t, i] += accepted
            if adapt:
                ratio = 1.0 if logr >= 0.0 else np.exp(logr)
                s_site[t, i] += gain * (ratio - adapt_target)
    for which in range(2):
        accepted, logr = update_edge_param(
            Z, Y, dist, theta, lag0, has_lag0, which, s_edge[which],
            priors[2 * which], priors[2 * which + 1], edge_total)
        acc_edge[which] += accepted
        if adapt:
            ratio = 1.0 if logr >= 0.0 else np.exp(logr)
            s_edge[which] += gain * (ratio - adapt_target)
    draw_scale_params(Z, sum_w, cnt_w, sum_b, cnt_b, labels0, theta, priors,
                      has_init_prior, zprev, aw0, ab0)
