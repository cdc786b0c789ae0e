# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels; same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libc.math cimport fabs
from libc.string cimport memcpy

cnp.import_array()

cdef enum:
    IID_BERNOULLI = 0
    POINT_MASS = 1
    TWO_POINT = 2
    MEAN_REVERTING = 3
    POLYA_LIKE = 4
    ADVERSARIAL_FLIP = 5

cdef enum:
    BLOCK = 16  # trials advanced together in count_violations

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TO_UNIT = 1.0 / 9007199254740992.0

from ._rng import TIE_TOL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double next_uniform(uint64_t* state) noexcept nogil:
    state[0] += GOLDEN
    # the shifted value is below 2**53, so the signed conversion is exact and cheaper
    return <double><int64_t>(mix64(state[0]) >> 11) * TO_UNIT


cdef inline double neg_flag(double d) noexcept nogil:
    # 1.0 if d < 0 else 0.0, read from the sign bit so the compiler cannot turn
    # it into a data-dependent jump. For d = a - b the rounded difference has the
    # sign of the exact one and is +0 only when a == b, so this equals (a < b).
    cdef uint64_t bits
    memcpy(&bits, &d, 8)
    return <double><int64_t>(bits >> 63)


cdef inline double cond_mean(int kind, double p1, double p2, double S, double D, int k) noexcept nogil:
    cdef double mu, c
    if kind == MEAN_REVERTING:
        if k == 0:
            return p1
        mu = p1 + p2 * (p1 - S / <double>k)
        if mu < 0.0:
            mu = 0.0
        if mu > 1.0:
            mu = 1.0
        return mu
    if kind == POLYA_LIKE:
        return (p1 + S) / (p1 + p2 + <double>k)
    if kind == ADVERSARIAL_FLIP:
        c = neg_flag(0.0 - D)
        return c * p2 + (1.0 - c) * p1
    return p1


# Selects are written as c*a + (1-c)*b with c in {0, 1}, which is exact and
# avoids unpredictable branches on coin flips.
cdef inline double draw(int kind, double p2, double mu, double u) noexcept nogil:
    cdef double c
    if kind == POINT_MASS:
        return mu
    if kind == TWO_POINT:
        c = neg_flag(u - 0.5)
        return c * (mu + p2) + (1.0 - c) * (mu - p2)
    return neg_flag(u - mu)


def simulate_paths(int kind, double p1, double p2, int n, seeds):
    cdef const uint64_t[::1] sv = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdef Py_ssize_t t = sv.shape[0]
    xs_arr = np.empty((t, n))
    mus_arr = np.empty((t, n))
    cdef double[:, ::1] xs = xs_arr
    cdef double[:, ::1] mus = mus_arr
    cdef Py_ssize_t i
    cdef int k
    cdef uint64_t state
    cdef double S, D, u, mu, x
    with nogil:
        for i in range(t):
            state = sv[i]
            S = 0.0
            D = 0.0
            for k in range(n):
                u = next_uniform(&state)
                mu = cond_mean(kind, p1, p2, S, D, k)
                x = draw(kind, p2, mu, u)
                D += mu - x
                S += x
                xs[i, k] = x
                mus[i, k] = mu
    return xs_arr, mus_arr


def count_violations(int kind, double p1, double p2, int n, seeds,
                     double base, double slope, double scale, double sign):
    # Trials are advanced in blocks of BLOCK so the dependency chains of
    # independent trials overlap; per-trial arithmetic is unchanged.
    cdef const uint64_t[::1] sv = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdef Py_ssize_t t = sv.shape[0]
    cdef Py_ssize_t i0, j, m
    cdef Py_ssize_t count = 0
    cdef int k
    cdef uint64_t state[BLOCK]
    cdef double S[BLOCK]
    cdef double D[BLOCK]
    cdef double u, mu, x, thr, tol
    cdef double tie = TIE_TOL
    with nogil:
        i0 = 0
        while i0 < t:
            m = t - i0
            if m > BLOCK:
                m = BLOCK
            for j in range(m):
                state[j] = sv[i0 + j]
                S[j] = 0.0
                D[j] = 0.0
            for k in range(n):
                for j in range(m):
                    u = next_uniform(&state[j])
                    mu = cond_mean(kind, p1, p2, S[j], D[j], k)
                    x = draw(kind, p2, mu, u)
                    D[j] += mu - x
                    S[j] += x
            for j in range(m):
                thr = (base + slope * (1.0 - 2.0 * S[j] / <double>n)) * scale
                tol = fabs(thr)
                if tol < 1.0:
                    tol = 1.0
                if sign * D[j] >= thr - tie * tol:
                    count += 1
            i0 += m
    return int(count)
