"""Post-hoc alignment of latent trajectories.

Distances are all the likelihood sees, so sampled configurations drift over
translations, rotations and reflections.  Draws are made comparable by
centering the stacked trajectory and rotating it onto a fixed reference (the
centered initial configuration of the chain).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import orthogonal_procrustes


def center(z: np.ndarray) -> np.ndarray:
    """Subtract the global column mean of the stacked (T*N, p) configuration."""
    arr = np.asarray(z, dtype=np.float64)
    mean = arr.reshape(-1, arr.shape[-1]).mean(axis=0)
    return arr - mean


def procrustes_align(sample: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rotate a centered sample onto a centered reference configuration.

    The orthogonal map (reflections allowed) minimises the Frobenius residual
    between the stacked configurations; pairwise distances are untouched.
    """
    s = np.asarray(sample, dtype=np.float64)
    r = np.asarray(reference, dtype=np.float64)
    if s.shape != r.shape:
        raise ValueError(f"shape mismatch: sample {s.shape} vs reference {r.shape}")
    p = s.shape[-1]
    rot, _ = orthogonal_procrustes(s.reshape(-1, p), r.reshape(-1, p))
    return s @ rot
