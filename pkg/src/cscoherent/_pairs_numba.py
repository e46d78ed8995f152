"""numba-accelerated pair-term kernels. Same contracts as _pairs_numpy."""

import numpy as np
from numba import njit


@njit(cache=True, error_model="numpy")
def _sutherland_fill(xs, out):
    rows, n = xs.shape
    for r in range(rows):
        log_sum = 0.0
        min_sq = np.inf
        inv_sum = 0.0
        neg = 0.0
        for i in range(n):
            xi = xs[r, i]
            for j in range(i + 1, n):
                d = xi - xs[r, j]
                sq = d * d
                log_sum += 0.5 * np.log(sq)
                inv_sum += 1.0 / sq
                if sq < min_sq:
                    min_sq = sq
                if d < 0.0:
                    neg += 1.0
        out[r, 0] = log_sum
        out[r, 1] = min_sq
        out[r, 2] = inv_sum
        out[r, 3] = neg


@njit(cache=True, error_model="numpy")
def _threebody_fill(xs, out):
    rows = xs.shape[0]
    for r in range(rows):
        log_sum = 0.0
        min_sq = np.inf
        inv_sum = 0.0
        neg = 0.0
        ylog = 0.0
        ymin = np.inf
        yinv = 0.0
        yneg = 0.0
        for i in range(3):
            xi = xs[r, i]
            for j in range(i + 1, 3):
                d = xi - xs[r, j]
                sq = d * d
                log_sum += 0.5 * np.log(sq)
                inv_sum += 1.0 / sq
                if sq < min_sq:
                    min_sq = sq
                if d < 0.0:
                    neg += 1.0
                y = xi + xs[r, j] - 2.0 * xs[r, 3 - i - j]
                ysq = y * y
                ylog += 0.5 * np.log(ysq)
                yinv += 1.0 / ysq
                if ysq < ymin:
                    ymin = ysq
                if y < 0.0:
                    yneg += 1.0
        out[r, 0] = log_sum
        out[r, 1] = min_sq
        out[r, 2] = inv_sum
        out[r, 3] = neg
        out[r, 4] = ylog
        out[r, 5] = ymin
        out[r, 6] = yinv
        out[r, 7] = yneg


@njit(cache=True, error_model="numpy")
def _trig_fill(xs, k, out):
    rows, n = xs.shape
    for r in range(rows):
        log_sum = 0.0
        min_sq = np.inf
        inv_sum = 0.0
        neg = 0.0
        for i in range(n):
            xi = xs[r, i]
            for j in range(i + 1, n):
                s = np.sin(k * (xi - xs[r, j]))
                sq = s * s
                log_sum += 0.5 * np.log(sq)
                inv_sum += 1.0 / sq
                if sq < min_sq:
                    min_sq = sq
                if s < 0.0:
                    neg += 1.0
        out[r, 0] = log_sum
        out[r, 1] = min_sq
        out[r, 2] = inv_sum
        out[r, 3] = neg


def sutherland_terms(xs):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.empty((xs.shape[0], 4))
    if xs.shape[1] < 2:
        out[:] = 0.0
        out[:, 1] = np.inf
        return out
    _sutherland_fill(xs, out)
    return out


def threebody_terms(xs):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if xs.shape[1] != 3:
        raise ValueError("three-body terms need exactly 3 coordinates")
    out = np.empty((xs.shape[0], 8))
    _threebody_fill(xs, out)
    return out


def trig_terms(xs, wavenumber):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.empty((xs.shape[0], 4))
    if xs.shape[1] < 2:
        out[:] = 0.0
        out[:, 1] = np.inf
        return out
    _trig_fill(xs, float(wavenumber), out)
    return out
