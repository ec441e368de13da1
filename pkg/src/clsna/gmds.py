"""Graph-distance initialisation of latent trajectories.

The first frame is a classical MDS embedding of the all-pairs shortest-path
matrix.  Each later frame starts from the previous frame's positions and is
refined by monotone gradient descent on the raw stress against its own
snapshot's graph distances, so the trajectory tracks the data while staying
close to where it was.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path as _sp

from .model import AdjacencySeries


def shortest_path_distances(y: np.ndarray) -> np.ndarray:
    """All-pairs hop distances; unreachable pairs get max finite distance + 1."""
    d = _sp(csr_matrix(np.asarray(y)), method="D", directed=False, unweighted=True)
    infinite = ~np.isfinite(d)
    if infinite.any():
        finite = d[~infinite]
        surrogate = finite.max() + 1.0 if finite.size else 1.0
        d[infinite] = surrogate
    return d


def classical_mds(d: np.ndarray, p: int) -> np.ndarray:
    """Torgerson embedding: double-centre the squared distances, take top-p axes."""
    n = d.shape[0]
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (d.astype(np.float64) ** 2) @ j
    w, v = np.linalg.eigh(b)
    order = np.argsort(w)[::-1][:p]
    lam = np.clip(w[order], 0.0, None)
    if lam[0] > 0:
        lam[lam < lam[0] * 1e-12] = 0.0  # drop numerically-zero axes
    return v[:, order] * np.sqrt(lam)


def stress(z: np.ndarray, d: np.ndarray) -> float:
    """Raw stress: sum over unordered pairs of (embedded - target distance)^2."""
    diff = z[:, None, :] - z[None, :, :]
    r = np.sqrt((diff ** 2).sum(axis=-1))
    iu = np.triu_indices(z.shape[0], 1)
    return float(((r - d)[iu] ** 2).sum())


def _stress_gradient(z: np.ndarray, d: np.ndarray) -> np.ndarray:
    diff = z[:, None, :] - z[None, :, :]
    r = np.sqrt((diff ** 2).sum(axis=-1))
    safe = np.where(r > 1e-12, r, 1.0)
    coef = 2.0 * (r - d) / safe
    coef[r <= 1e-12] = 0.0
    np.fill_diagonal(coef, 0.0)
    return (coef[:, :, None] * diff).sum(axis=1)


def refine(z0: np.ndarray, d: np.ndarray, max_steps: int = 50) -> np.ndarray:
    """Gradient descent with backtracking; stress never increases."""
    z = np.asarray(z0, dtype=np.float64).copy()
    current = stress(z, d)
    step = 1.0 / (4.0 * z.shape[0])
    for _ in range(max_steps):
        grad = _stress_gradient(z, d)
        improved = False
        for _ in range(25):
            candidate = z - step * grad
            value = stress(candidate, d)
            if value < current:
                z, current = candidate, value
                step *= 1.5
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        if current < 1e-12:
            break
    return z


def gmds_initialize(y: AdjacencySeries, p: int, start: np.ndarray | None = None) -> np.ndarray:
    """Initial latent trajectory of shape (T, N, p) for an adjacency series.

    With `start` given, the first frame is refined from those positions
    instead of a fresh MDS embedding (used to continue an earlier fit).
    """
    if p < 1:
        raise ValueError("latent dimension must be at least 1")
    n, horizon = y.n_nodes, y.horizon
    Z = np.empty((horizon, n, p))
    for t in range(horizon):
        d = shortest_path_distances(y.matrices[t])
        if t == 0 and start is None:
            Z[0] = classical_mds(d, p)
        elif t == 0:
            if np.asarray(start).shape != (n, p):
                raise ValueError("start positions must have shape (N, p)")
            Z[0] = refine(start, d)
        else:
            Z[t] = refine(Z[t - 1], d)
    return Z
