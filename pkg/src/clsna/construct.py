"""Longitudinal network construction from raw interaction counts.

Two thresholding policies turn count matrices into binary networks: a static
cutoff, and a per-time cutoff at the mean count over all unordered pairs
(zero-count pairs included).  Both use a strict "more than" comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import AdjacencySeries, GroupLabels

_POLICY_KINDS = ("static", "dynamic-mean")


@dataclass
class InteractionCounts:
    """Per-time symmetric nonnegative integer count matrices with a node
    registry (external ids) and group labels."""

    counts: np.ndarray
    node_ids: list
    labels: GroupLabels

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 3 or counts.shape[1] != counts.shape[2]:
            raise ValueError("counts must be a (T, N, N) array")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if not np.array_equal(counts, counts.transpose(0, 2, 1)):
            raise ValueError("counts must be symmetric")
        if np.any(counts.diagonal(axis1=1, axis2=2) != 0):
            raise ValueError("counts must have zero diagonals")
        n = counts.shape[1]
        self.node_ids = [str(s) for s in self.node_ids]
        if len(self.node_ids) != n:
            raise ValueError("node registry size does not match counts")
        if len(set(self.node_ids)) != n:
            raise ValueError("node ids must be unique")
        if self.labels.n_nodes != n:
            raise ValueError("label count does not match counts")
        self.counts = counts

    @property
    def n_nodes(self) -> int:
        return self.counts.shape[1]

    @property
    def horizon(self) -> int:
        return self.counts.shape[0]


@dataclass
class ThresholdPolicy:
    """kind="static": edge iff count > theta at every time.
    kind="dynamic-mean": edge iff count > (that time's all-pairs mean)."""

    kind: str
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in _POLICY_KINDS:
            raise ValueError(f"kind must be one of {_POLICY_KINDS}")
        if not self.theta >= 0:
            raise ValueError("theta must be nonnegative")


@dataclass
class BinarizeResult:
    series: AdjacencySeries
    thresholds: list


def binarize(counts: InteractionCounts, policy: ThresholdPolicy) -> BinarizeResult:
    """Apply the threshold policy per time; the realized per-time thresholds
    ride along for output metadata."""
    t_max, n = counts.horizon, counts.n_nodes
    iu = np.triu_indices(n, 1)
    matrices = np.zeros((t_max, n, n), dtype=np.int8)
    thresholds = []
    for t in range(t_max):
        frame = counts.counts[t]
        if policy.kind == "static":
            theta = float(policy.theta)
        else:
            theta = float(frame[iu].mean())
        matrices[t] = frame > theta
        thresholds.append(theta)
    return BinarizeResult(series=AdjacencySeries(matrices), thresholds=thresholds)


def _activity_table(activity, t_max: int, n: int) -> np.ndarray:
    if callable(activity):
        table = np.zeros((t_max, n), dtype=bool)
        for t in range(t_max):
            for i in range(n):
                table[t, i] = bool(activity(t + 1, i))
        return table
    table = np.asarray(activity, dtype=bool)
    if table.shape != (t_max, n):
        raise ValueError(f"activity table must have shape ({t_max}, {n})")
    return table


def restrict_to_persistent_nodes(counts: InteractionCounts,
                                 activity) -> InteractionCounts:
    """Keep only nodes active at every time; activity is a (T, N) boolean
    table or a predicate called as activity(t, node_index) with t in 1..T."""
    table = _activity_table(activity, counts.horizon, counts.n_nodes)
    keep = np.flatnonzero(table.all(axis=0))
    labels = counts.labels.labels[keep]
    for group in (1, 2):
        if int(np.sum(labels == group)) < 2:
            raise ValueError(f"group {group} has fewer than 2 surviving nodes")
    sub = counts.counts[np.ix_(range(counts.horizon), keep, keep)]
    return InteractionCounts(counts=sub,
                             node_ids=[counts.node_ids[i] for i in keep],
                             labels=GroupLabels(labels))
