"""Model primitives for two-group coevolving latent space networks.

Nodes carry latent positions z_{t,i} in R^p and a fixed group label in {1, 2}.
Edges are Bernoulli with logit alpha + delta * y_{t-1,ij} - ||z_{t,i} - z_{t,j}||
(the persistence term is absent at t = 1), and latent positions evolve around
attractors built from the current neighbourhood structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GROUPS = (1, 2)


@dataclass(frozen=True)
class ModelParams:
    """Static parameters.

    gamma1w / gamma2w are the within-group attractor strengths of groups 1
    and 2, gammab the shared between-group strength.  tau2 is the variance of
    the initial latent positions, sigma2 the transition variance; fitting
    pins sigma2 at 1 for identifiability, simulation may use other values.
    """

    alpha: float
    delta: float
    gamma1w: float
    gamma2w: float
    gammab: float
    tau2: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        if not self.tau2 > 0:
            raise ValueError(f"tau2 must be positive, got {self.tau2}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")

    def gamma_w(self, group: int) -> float:
        """Within-group attractor strength for group 1 or 2."""
        if group not in GROUPS:
            raise ValueError(f"group must be 1 or 2, got {group}")
        return self.gamma1w if group == 1 else self.gamma2w


@dataclass(frozen=True)
class GroupLabels:
    """Fixed two-group membership, one label in {1, 2} per node."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 1 or lab.size == 0:
            raise ValueError("labels must be a non-empty 1-d array")
        if not np.isin(lab, GROUPS).all():
            raise ValueError("labels must take values in {1, 2}")
        object.__setattr__(self, "labels", lab)

    @property
    def n_nodes(self) -> int:
        return self.labels.size

    def indices(self, group: int) -> np.ndarray:
        return np.flatnonzero(self.labels == group)

    def zero_based(self) -> np.ndarray:
        """Labels as 0/1 indices (group 1 -> 0, group 2 -> 1)."""
        return (self.labels - 1).astype(np.int64)


@dataclass
class AdjacencySeries:
    """Time series of T symmetric binary adjacency matrices with zero diagonal."""

    matrices: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.matrices)
        if y.ndim != 3 or y.shape[1] != y.shape[2]:
            raise ValueError(f"expected (T, N, N) array, got shape {y.shape}")
        if y.shape[0] < 1 or y.shape[1] < 2:
            raise ValueError("need at least one snapshot of at least two nodes")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if np.any(y != np.transpose(y, (0, 2, 1))):
            raise ValueError("adjacency matrices must be symmetric")
        if np.any(y[:, np.arange(y.shape[1]), np.arange(y.shape[1])] != 0):
            raise ValueError("adjacency diagonals must be zero")
        self.matrices = y.astype(np.int8)

    @property
    def n_nodes(self) -> int:
        return self.matrices.shape[1]

    @property
    def horizon(self) -> int:
        return self.matrices.shape[0]

    def __getitem__(self, t: int) -> np.ndarray:
        return self.matrices[t]


@dataclass
class LatentState:
    """Latent positions of all nodes at one time step."""

    positions: np.ndarray
    time_index: int

    def __post_init__(self):
        z = np.asarray(self.positions, dtype=np.float64)
        if z.ndim != 2:
            raise ValueError("positions must be an (N, p) array")
        self.positions = z

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]


def latent_array(z) -> np.ndarray:
    """Coerce a latent trajectory (list of LatentState or (T, N, p) array)."""
    if isinstance(z, np.ndarray):
        if z.ndim != 3:
            raise ValueError("latent trajectory array must have shape (T, N, p)")
        return z
    return np.stack([state.positions for state in z])


def similarity(z_i, z_j) -> float:
    """Negated Euclidean distance between two positions."""
    return -float(np.linalg.norm(np.asarray(z_i) - np.asarray(z_j)))


def attractor_within(i: int, z: np.ndarray, y: np.ndarray, labels: GroupLabels) -> np.ndarray:
    """Mean position of i's same-group neighbours minus its own position.

    Returns the zero vector when the neighbour set is empty.
    """
    lab = labels.labels
    mask = (y[i] == 1) & (lab == lab[i])
    mask[i] = False
    if not mask.any():
        return np.zeros(z.shape[1])
    return z[mask].mean(axis=0) - z[i]


def attractor_between(i: int, z: np.ndarray, y: np.ndarray, labels: GroupLabels) -> np.ndarray:
    """Mean position of i's opposite-group neighbours minus its own position."""
    lab = labels.labels
    mask = (y[i] == 1) & (lab != lab[i])
    mask[i] = False
    if not mask.any():
        return np.zeros(z.shape[1])
    return z[mask].mean(axis=0) - z[i]


def edge_logit(params: ModelParams, t: int, y_prev_ij, z_i, z_j) -> float:
    """Logit of the edge probability for one pair at (1-based) time t.

    y_prev_ij must be None at t = 1 and the previous-step indicator at t > 1.
    """
    if t < 1:
        raise ValueError(f"time index must be >= 1, got {t}")
    if t == 1:
        if y_prev_ij is not None:
            raise ValueError("no persistence term at t = 1; pass y_prev_ij=None")
        return params.alpha + similarity(z_i, z_j)
    if y_prev_ij is None:
        raise ValueError("y_prev_ij is required for t > 1")
    return params.alpha + params.delta * y_prev_ij + similarity(z_i, z_j)


def _pairwise_distances(z: np.ndarray) -> np.ndarray:
    """Condensed upper-triangle distances in (i < j) lexicographic order."""
    from scipy.spatial.distance import pdist

    return pdist(z)


def edge_logit_matrix(params: ModelParams, z_t: np.ndarray, y_prev: np.ndarray | None) -> np.ndarray:
    """Condensed (i < j) vector of logits for one snapshot."""
    eta = params.alpha - _pairwise_distances(z_t)
    if y_prev is not None:
        iu = np.triu_indices(z_t.shape[0], 1)
        eta = eta + params.delta * y_prev[iu]
    return eta


def observation_loglik(params: ModelParams, y: AdjacencySeries, z, initial_lag=None) -> float:
    """Bernoulli log-likelihood summed over unordered pairs and all times.

    initial_lag optionally supplies a persistence matrix for the first
    snapshot (used when the series continues an earlier one); by default the
    first snapshot has no persistence term.
    """
    Z = latent_array(z)
    if Z.shape[0] != y.horizon or Z.shape[1] != y.n_nodes:
        raise ValueError("latent trajectory and adjacency series shapes disagree")
    iu = np.triu_indices(y.n_nodes, 1)
    total = 0.0
    for t in range(y.horizon):
        lag = y.matrices[t - 1] if t > 0 else initial_lag
        eta = edge_logit_matrix(params, Z[t], lag)
        obs = y.matrices[t][iu]
        total += float(np.sum(obs * eta - np.logaddexp(0.0, eta)))
    return total


def transition_mean(params: ModelParams, labels: GroupLabels, z_prev: np.ndarray,
                    y_prev: np.ndarray) -> np.ndarray:
    """Mean of z_t given z_{t-1} and y_{t-1}: previous position plus attractor pulls."""
    n = z_prev.shape[0]
    mu = z_prev.astype(np.float64).copy()
    for i in range(n):
        gw = params.gamma_w(int(labels.labels[i]))
        mu[i] += gw * attractor_within(i, z_prev, y_prev, labels)
        mu[i] += params.gammab * attractor_between(i, z_prev, y_prev, labels)
    return mu


def transition_logdensity(params: ModelParams, labels: GroupLabels, z_t: np.ndarray,
                          z_prev: np.ndarray, y_prev: np.ndarray) -> float:
    """Log density of one latent transition under isotropic Gaussian noise."""
    mu = transition_mean(params, labels, z_prev, y_prev)
    resid = np.asarray(z_t, dtype=np.float64) - mu
    return float(
        -0.5 * np.sum(resid * resid) / params.sigma2
        - 0.5 * resid.size * np.log(2.0 * np.pi * params.sigma2)
    )
