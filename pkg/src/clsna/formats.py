"""Line-oriented text formats for adjacency series, interaction counts, and
latent trajectories.

Every file is plain text: one header line naming the format and shape,
`#` comment lines and blanks anywhere after the header, and one record per
line.  Node ids are whitespace-free tokens.  Latent coordinates are written
with repr(), so a write/read cycle preserves every bit.
"""

from __future__ import annotations

import numpy as np

from .model import AdjacencySeries, GroupLabels


class ParseError(ValueError):
    """Malformed input file; the message carries the 1-based line number."""


def _fail(path, lineno, message):
    raise ParseError(f"{path}: line {lineno}: {message}")


def _records(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split()


def _parse_header(path, expected_kind, fields):
    """Return (field values, record iterator positioned after the header)."""
    records = _records(path)
    try:
        lineno, tokens = next(records)
    except StopIteration:
        raise ParseError(f"{path}: line 1: empty file, expected "
                         f"'{expected_kind} v1' header") from None
    want = 2 + len(fields)
    if len(tokens) != want or tokens[0] != expected_kind or tokens[1] != "v1":
        _fail(path, lineno, f"expected header '{expected_kind} v1 "
                            + " ".join(f"{f}=<int>" for f in fields) + "'")
    values = []
    for token, name in zip(tokens[2:], fields):
        prefix = name + "="
        if not token.startswith(prefix):
            _fail(path, lineno, f"expected '{prefix}<int>', got '{token}'")
        try:
            value = int(token[len(prefix):])
        except ValueError:
            _fail(path, lineno, f"bad integer in '{token}'")
        if value < 1:
            _fail(path, lineno, f"{name} must be at least 1")
        values.append(value)
    return values, records


def _check_ids(node_ids, n):
    node_ids = [str(s) for s in node_ids]
    if len(node_ids) != n:
        raise ValueError(f"need exactly {n} node ids")
    if len(set(node_ids)) != n:
        raise ValueError("node ids must be unique")
    for s in node_ids:
        if not s or any(c.isspace() for c in s):
            raise ValueError(f"node id {s!r} must be a non-empty "
                             "whitespace-free token")
    return node_ids


def _parse_node_line(path, lineno, tokens, n, seen_ids, group_out):
    if len(tokens) != 4:
        _fail(path, lineno, "expected 'node <index> <id> <group>'")
    try:
        idx = int(tokens[1])
        group = int(tokens[3])
    except ValueError:
        _fail(path, lineno, "node index and group must be integers")
    if not 0 <= idx < n:
        _fail(path, lineno, f"node index {idx} outside 0..{n - 1}")
    if group_out[idx] != 0:
        _fail(path, lineno, f"duplicate node line for index {idx}")
    if group not in (1, 2):
        _fail(path, lineno, f"group must be 1 or 2, got {group}")
    if tokens[2] in seen_ids:
        _fail(path, lineno, f"duplicate node id {tokens[2]!r}")
    seen_ids[tokens[2]] = idx
    group_out[idx] = group


def _parse_pair(path, lineno, tokens, t_max, n, kind):
    try:
        t, i, j = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError:
        _fail(path, lineno, f"{kind} fields must be integers")
    if not 1 <= t <= t_max:
        _fail(path, lineno, f"time {t} outside 1..{t_max}")
    if not (0 <= i < n and 0 <= j < n):
        _fail(path, lineno, f"node index outside 0..{n - 1}")
    if i == j:
        _fail(path, lineno, "self-pairs are not allowed")
    return t, i, j


def write_adjacency(path, y: AdjacencySeries, labels: GroupLabels,
                    node_ids=None):
    n, t_max = y.n_nodes, y.horizon
    if labels.n_nodes != n:
        raise ValueError("label count does not match adjacency size")
    node_ids = _check_ids(node_ids if node_ids is not None
                          else [f"n{i}" for i in range(n)], n)
    with open(path, "w") as fh:
        fh.write(f"clsna-adj v1 N={n} T={t_max}\n")
        for i in range(n):
            fh.write(f"node {i} {node_ids[i]} {int(labels.labels[i])}\n")
        for t in range(t_max):
            m = y[t]
            for i in range(n):
                for j in range(i + 1, n):
                    if m[i, j]:
                        fh.write(f"edge {t + 1} {i} {j}\n")


def read_adjacency(path):
    (n, t_max), records = _parse_header(path, "clsna-adj", ("N", "T"))
    groups = np.zeros(n, dtype=np.int64)
    seen_ids: dict = {}
    matrices = np.zeros((t_max, n, n), dtype=np.int8)
    for lineno, tokens in records:
        if tokens[0] == "node":
            _parse_node_line(path, lineno, tokens, n, seen_ids, groups)
        elif tokens[0] == "edge":
            if len(tokens) != 4:
                _fail(path, lineno, "expected 'edge <t> <i> <j>'")
            t, i, j = _parse_pair(path, lineno, tokens, t_max, n, "edge")
            matrices[t - 1, i, j] = matrices[t - 1, j, i] = 1
        else:
            _fail(path, lineno, f"unknown record type {tokens[0]!r}")
    if np.any(groups == 0):
        missing = int(np.flatnonzero(groups == 0)[0])
        raise ParseError(f"{path}: missing node line for index {missing}")
    ids = [None] * n
    for s, idx in seen_ids.items():
        ids[idx] = s
    return AdjacencySeries(matrices), GroupLabels(groups), ids


def write_counts(path, counts):
    n, t_max = counts.n_nodes, counts.horizon
    node_ids = _check_ids(counts.node_ids, n)
    with open(path, "w") as fh:
        fh.write(f"clsna-counts v1 N={n} T={t_max}\n")
        for i in range(n):
            fh.write(f"node {i} {node_ids[i]} {int(counts.labels.labels[i])}\n")
        for t in range(t_max):
            m = counts.counts[t]
            for i in range(n):
                for j in range(i + 1, n):
                    if m[i, j]:
                        fh.write(f"count {t + 1} {i} {j} {int(m[i, j])}\n")


def read_counts(path):
    from .construct import InteractionCounts

    (n, t_max), records = _parse_header(path, "clsna-counts", ("N", "T"))
    groups = np.zeros(n, dtype=np.int64)
    seen_ids: dict = {}
    counts = np.zeros((t_max, n, n), dtype=np.int64)
    for lineno, tokens in records:
        if tokens[0] == "node":
            _parse_node_line(path, lineno, tokens, n, seen_ids, groups)
        elif tokens[0] == "count":
            if len(tokens) != 5:
                _fail(path, lineno, "expected 'count <t> <i> <j> <value>'")
            t, i, j = _parse_pair(path, lineno, tokens, t_max, n, "count")
            try:
                value = int(tokens[4])
            except ValueError:
                _fail(path, lineno, f"count value must be an integer, "
                                    f"got {tokens[4]!r}")
            if value < 0:
                _fail(path, lineno, "count value must be nonnegative")
            counts[t - 1, i, j] = counts[t - 1, j, i] = value
        else:
            _fail(path, lineno, f"unknown record type {tokens[0]!r}")
    if np.any(groups == 0):
        missing = int(np.flatnonzero(groups == 0)[0])
        raise ParseError(f"{path}: missing node line for index {missing}")
    ids = [None] * n
    for s, idx in seen_ids.items():
        ids[idx] = s
    return InteractionCounts(counts=counts, node_ids=ids,
                             labels=GroupLabels(groups))


def write_latents(path, z):
    z = np.asarray(z, dtype=float)
    if z.ndim != 3:
        raise ValueError("latent trajectories must be a (T, N, p) array")
    t_max, n, p = z.shape
    with open(path, "w") as fh:
        fh.write(f"clsna-latent v1 N={n} T={t_max} p={p}\n")
        for t in range(t_max):
            for i in range(n):
                coords = " ".join(repr(float(x)) for x in z[t, i])
                fh.write(f"pos {t + 1} {i} {coords}\n")


def read_latents(path):
    (n, t_max, p), records = _parse_header(path, "clsna-latent", ("N", "T", "p"))
    z = np.full((t_max, n, p), np.nan)
    for lineno, tokens in records:
        if tokens[0] != "pos":
            _fail(path, lineno, f"unknown record type {tokens[0]!r}")
        if len(tokens) != 3 + p:
            _fail(path, lineno, f"expected 'pos <t> <i>' plus {p} coordinates")
        try:
            t, i = int(tokens[1]), int(tokens[2])
        except ValueError:
            _fail(path, lineno, "pos indices must be integers")
        if not 1 <= t <= t_max:
            _fail(path, lineno, f"time {t} outside 1..{t_max}")
        if not 0 <= i < n:
            _fail(path, lineno, f"node index outside 0..{n - 1}")
        if not np.all(np.isnan(z[t - 1, i])):
            _fail(path, lineno, f"duplicate position for (t={t}, node={i})")
        try:
            z[t - 1, i] = [float(x) for x in tokens[3:]]
        except ValueError:
            _fail(path, lineno, "coordinates must be floats")
    if np.any(np.isnan(z)):
        t, i = np.argwhere(np.isnan(z))[0][:2]
        raise ParseError(f"{path}: missing position for (t={t + 1}, node={i})")
    return z
