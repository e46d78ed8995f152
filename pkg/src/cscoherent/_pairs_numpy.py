"""Pure-numpy pair-term kernels (fallback backend).

Each function consumes a batch of configurations xs with shape (B, D) and
returns per-row reductions over the i<j pairs. Column layouts must stay in
lockstep with the numba backend; tests assert agreement.
"""

import numpy as np


def sutherland_terms(xs: np.ndarray) -> np.ndarray:
    """Columns: sum ln|d|, min d^2, sum 1/d^2, count(d<0); d = x_i - x_j, i<j."""
    xs = np.asarray(xs, dtype=float)
    b, n = xs.shape
    out = np.zeros((b, 4))
    if n < 2:
        out[:, 1] = np.inf
        return out
    iu, ju = np.triu_indices(n, 1)
    d = xs[:, iu] - xs[:, ju]
    sq = d * d
    with np.errstate(divide="ignore"):
        out[:, 0] = 0.5 * np.sum(np.log(sq), axis=1)
        out[:, 2] = np.sum(1.0 / sq, axis=1)
    out[:, 1] = np.min(sq, axis=1)
    out[:, 3] = np.sum(d < 0, axis=1)
    return out


def threebody_terms(xs: np.ndarray) -> np.ndarray:
    """Pair columns as sutherland_terms, then the same four for y = x_i + x_j - 2 x_k."""
    xs = np.asarray(xs, dtype=float)
    b, n = xs.shape
    if n != 3:
        raise ValueError("three-body terms need exactly 3 coordinates")
    out = np.empty((b, 8))
    out[:, :4] = sutherland_terms(xs)
    x0, x1, x2 = xs[:, 0], xs[:, 1], xs[:, 2]
    y = np.stack([x0 + x1 - 2 * x2, x0 + x2 - 2 * x1, x1 + x2 - 2 * x0], axis=1)
    sq = y * y
    with np.errstate(divide="ignore"):
        out[:, 4] = 0.5 * np.sum(np.log(sq), axis=1)
        out[:, 6] = np.sum(1.0 / sq, axis=1)
    out[:, 5] = np.min(sq, axis=1)
    out[:, 7] = np.sum(y < 0, axis=1)
    return out


def trig_terms(xs: np.ndarray, wavenumber: float) -> np.ndarray:
    """Columns: sum ln|s|, min s^2, sum 1/s^2, count(s<0); s = sin(k (x_i - x_j)), i<j."""
    xs = np.asarray(xs, dtype=float)
    b, n = xs.shape
    out = np.zeros((b, 4))
    if n < 2:
        out[:, 1] = np.inf
        return out
    iu, ju = np.triu_indices(n, 1)
    s = np.sin(wavenumber * (xs[:, iu] - xs[:, ju]))
    sq = s * s
    with np.errstate(divide="ignore"):
        out[:, 0] = 0.5 * np.sum(np.log(sq), axis=1)
        out[:, 2] = np.sum(1.0 / sq, axis=1)
    out[:, 1] = np.min(sq, axis=1)
    out[:, 3] = np.sum(s < 0, axis=1)
    return out
