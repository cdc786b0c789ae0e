"""Pure NumPy simulation kernels, vectorised across trials.

Bit-for-bit equivalent to the compiled kernels: the same SplitMix64 stream and
the same floating-point operations in the same order.
"""

from __future__ import annotations

import numpy as np

from ._rng import GOLDEN, TIE_TOL, mix64_array

IID_BERNOULLI, POINT_MASS, TWO_POINT, MEAN_REVERTING, POLYA_LIKE, ADVERSARIAL_FLIP = range(6)

_GOLDEN = np.uint64(GOLDEN)
_SHIFT = np.uint64(11)
_TO_UNIT = 2.0**-53


def cond_mean(kind: int, p1: float, p2: float, S, D, k: int):
    """Conditional mean of the next sample given ``k`` past steps with sum ``S``
    and accumulated gap ``D``."""
    if kind in (IID_BERNOULLI, POINT_MASS, TWO_POINT):
        return np.full(np.shape(S), p1)
    if kind == MEAN_REVERTING:
        if k == 0:
            return np.full(np.shape(S), p1)
        mu = p1 + p2 * (p1 - S / k)
        return np.minimum(np.maximum(mu, 0.0), 1.0)
    if kind == POLYA_LIKE:
        return (p1 + S) / (p1 + p2 + k)
    if kind == ADVERSARIAL_FLIP:
        return np.where(D > 0, p2, p1)
    raise ValueError(f"unknown kernel {kind}")


def draw(kind: int, p2: float, mu, u):
    if kind == POINT_MASS:
        return mu
    if kind == TWO_POINT:
        return np.where(u < 0.5, mu + p2, mu - p2)
    return np.where(u < mu, 1.0, 0.0)


def _uniforms(state):
    state += _GOLDEN
    return (mix64_array(state) >> _SHIFT).astype(np.float64) * _TO_UNIT


def simulate_paths(kind: int, p1: float, p2: float, n: int, seeds: np.ndarray):
    state = np.array(seeds, dtype=np.uint64, copy=True)
    t = state.size
    xs = np.empty((t, n))
    mus = np.empty((t, n))
    S = np.zeros(t)
    D = np.zeros(t)
    for k in range(n):
        u = _uniforms(state)
        mu = cond_mean(kind, p1, p2, S, D, k)
        x = draw(kind, p2, mu, u)
        D += mu - x
        S += x
        xs[:, k] = x
        mus[:, k] = mu
    return xs, mus


def violated(S, D, n: int, base: float, slope: float, scale: float, sign: float):
    thr = (base + slope * (1.0 - 2.0 * S / n)) * scale
    return sign * D >= thr - TIE_TOL * np.maximum(1.0, np.abs(thr))


def count_violations(kind, p1, p2, n, seeds, base, slope, scale, sign) -> int:
    state = np.array(seeds, dtype=np.uint64, copy=True)
    S = np.zeros(state.size)
    D = np.zeros(state.size)
    for k in range(n):
        u = _uniforms(state)
        mu = cond_mean(kind, p1, p2, S, D, k)
        x = draw(kind, p2, mu, u)
        D += mu - x
        S += x
    return int(np.count_nonzero(violated(S, D, n, base, slope, scale, sign)))
