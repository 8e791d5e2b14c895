# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled counting loop for Monte Carlo estimation.

Mirrors the pure-Python samplers in ``simulate`` step for step (same float
operations, same draws from the same Philox streams) so both backends give
identical counts for identical seeds.
"""
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport pow, fabs, nextafter, INFINITY, isfinite

import numpy as np
from numpy.random import Philox

from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_exponential, random_standard_uniform

cdef int MAX_NEWTON = 200
cdef double INVERSION_TOL = 1e-10


cdef struct Hazard:
    double lam
    double alpha1
    double alpha2
    double beta1
    double beta2
    double a1
    double a2
    bint dfr
    bint ifr


cdef struct State:
    double now
    double age
    bint crossed
    Py_ssize_t failures


cdef inline double h_eval(const Hazard *h, double t) noexcept nogil:
    if t <= h.a1:
        if h.dfr:
            return h.lam + h.alpha1 * pow(h.a1 - t, h.beta1)
        return h.lam
    if t <= h.a2 or not h.ifr:
        return h.lam
    return h.lam + h.alpha2 * pow(t - h.a2, h.beta2)


cdef inline double h_cum_a1(const Hazard *h) noexcept nogil:
    cdef double p
    if not h.dfr:
        return h.lam * h.a1
    p = h.beta1 + 1.0
    return h.lam * h.a1 + h.alpha1 * pow(h.a1, p) / p


cdef inline double h_cum_a2(const Hazard *h) noexcept nogil:
    return h_cum_a1(h) + h.lam * (h.a2 - h.a1)


cdef double h_cum(const Hazard *h, double t) noexcept nogil:
    cdef double p, q
    if t <= h.a1:
        if not h.dfr:
            return h.lam * t
        p = h.beta1 + 1.0
        return h.lam * t + h.alpha1 * (pow(h.a1, p) - pow(h.a1 - t, p)) / p
    if t <= h.a2 or not h.ifr:
        return h_cum_a1(h) + h.lam * (t - h.a1)
    q = h.beta2 + 1.0
    return h_cum_a2(h) + h.lam * (t - h.a2) + h.alpha2 * pow(t - h.a2, q) / q


cdef inline double ulp_of(double x) noexcept nogil:
    return nextafter(x, INFINITY) - x


cdef double newton(const Hazard *h, double y, double lo, double hi, double x) noexcept nogil:
    cdef double tol = INVERSION_TOL * 1e-2 * (y if y > 1.0 else 1.0)
    cdef double f, nx
    cdef int i
    for i in range(MAX_NEWTON):
        f = h_cum(h, x) - y
        if fabs(f) <= tol:
            return x
        if f > 0.0:
            hi = x
        else:
            lo = x
        nx = x - f / h_eval(h, x)
        if not (lo < nx and nx < hi):
            nx = 0.5 * (lo + hi)
        if nx == x or hi - lo <= 4.0 * ulp_of(hi if hi > 1.0 else 1.0):
            return nx
        x = nx
    return x


cdef double h_inv(const Hazard *h, double y) noexcept nogil:
    cdef double c1, c2, hi, q, x, r
    if y == 0.0:
        return 0.0
    c1 = h_cum_a1(h)
    if y <= c1:
        if not h.dfr:
            return y / h.lam
        return newton(h, y, 0.0, h.a1, y / h_eval(h, 0.0))
    c2 = h_cum_a2(h)
    if y <= c2 or not h.ifr:
        return h.a1 + (y - c1) / h.lam
    hi = h.a2 + (y - c2) / h.lam
    q = h.beta2 + 1.0
    r = pow(q * (y - c2) / h.alpha2, 1.0 / q)
    x = h.a2 + ((hi - h.a2) if (hi - h.a2) < r else r)
    return newton(h, y, h.a2, hi, x)


cdef inline void advance(State *s, double to, double a1) noexcept nogil:
    if not s.crossed and to >= a1:
        s.age = a1 + (to - a1)
        s.crossed = True
    else:
        s.age = s.age + (to - s.now)
    s.now = to


cdef int next_inversion(const Hazard *h, State *s, bitgen_t *rng, double horizon) noexcept nogil:
    cdef double e = random_standard_exponential(rng)
    cdef double base, cap, age_fail, t_fail
    while True:
        base = h_cum(h, s.age)
        if not s.crossed:
            cap = h_cum(h, s.age + (h.a1 - s.now)) - base
            if e > cap:
                if h.a1 >= horizon:
                    return 0
                e -= cap
                advance(s, h.a1, h.a1)
                continue
        age_fail = h_inv(h, base + e)
        t_fail = s.now + (age_fail - s.age)
        if t_fail >= horizon:
            return 0
        advance(s, t_fail, h.a1)
        return 1


cdef int next_thinning(const Hazard *h, State *s, bitgen_t *rng, double horizon) noexcept nogil:
    cdef double seg_end, b0, b1, bound, t, u
    while True:
        if s.crossed:
            seg_end = horizon
        else:
            seg_end = h.a1 if h.a1 < horizon else horizon
        b0 = h_eval(h, s.age)
        b1 = h_eval(h, s.age + (seg_end - s.now))
        bound = b1 if b1 > b0 else b0
        if not isfinite(bound) or bound <= 0.0:
            return -1
        t = s.now
        while True:
            t += random_standard_exponential(rng) / bound
            if t >= seg_end:
                break
            u = random_standard_uniform(rng)
            if u * bound < h_eval(h, s.age + (t - s.now)):
                advance(s, t, h.a1)
                return 1
        if seg_end >= horizon:
            return 0
        advance(s, seg_end, h.a1)


cdef Py_ssize_t run_one(const Hazard *h, const double[::1] seq, double tail, double window,
                        double horizon, bitgen_t *rng, bint thinning) noexcept nogil:
    cdef State s
    cdef int status
    cdef double delta
    s.now = 0.0
    s.age = 0.0
    s.crossed = False
    s.failures = 0
    while True:
        if thinning:
            status = next_thinning(h, &s, rng, horizon)
        else:
            status = next_inversion(h, &s, rng, horizon)
        if status == 0:
            return s.failures
        if status < 0:
            return -1
        if s.failures < seq.shape[0] and s.now <= window:
            delta = seq[s.failures]
        else:
            delta = tail
        if delta == 1.0:
            s.age = h.a1
        else:
            s.age = s.age - delta * (s.age - h.a1)
        s.failures += 1


cdef Hazard unpack(params):
    cdef Hazard h
    h.lam, h.alpha1, h.alpha2, h.beta1, h.beta2, h.a1, h.a2, h.dfr, h.ifr = params
    return h


def count_failures(params, seq, double tail, double window, double horizon,
                   seed, Py_ssize_t start, Py_ssize_t n, bint thinning):
    """Failure counts on [0, horizon) for replications ``start .. start + n - 1``."""
    cdef Hazard h = unpack(params)
    cdef double[::1] seqv = np.ascontiguousarray(seq, dtype=np.float64)
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] outv = out
    cdef Py_ssize_t i, c
    cdef bitgen_t *rng
    cdef object seed_int = int(seed)
    cdef object rep
    for i in range(n):
        rep = start + i
        bg = Philox(key=seed_int | (rep << 64))
        rng = <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")
        with nogil:
            c = run_one(&h, seqv, tail, window, horizon, rng, thinning)
        if c < 0:
            raise ValueError("thinning majorant is not a positive finite rate")
        outv[i] = c
    return out


def cumulative(params, double t):
    cdef Hazard h = unpack(params)
    return h_cum(&h, t)


def inverse_cumulative(params, double y):
    cdef Hazard h = unpack(params)
    return h_inv(&h, y)
