# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch interference kernel.

Mirrors ``mccsim._fallback`` operation for operation (same stream slots,
same evaluation order) so both backends agree to the last few ulps.
Slot constants must match ``mccsim._layout``.
"""

from cython.parallel import prange
from libc.math cimport sqrt, log, cos, sin, pow, fabs, M_PI
from libc.stdint cimport uint64_t, int64_t

cdef enum:
    HEADER = 8
    H_COUNT = 0
    H_RHOMBUS = 1
    H_A = 2
    H_B = 3
    H_SERVING = 4
    H_DIRECTION = 5
    P_RADIUS = 0
    P_ANGLE = 1
    P_SERVING = 2
    P_SIDE = 3
    P_MAIN = 4
    P_EXP0 = 5

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef uint64_t TRIAL_MULT = 0xD1B54A32D192ED03ULL
cdef uint64_t SEED_OFFSET = 0x243F6A8885A308D3ULL
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline double unif(uint64_t key, uint64_t idx) noexcept nogil:
    cdef uint64_t z = mix64(key + (idx + 1) * GOLDEN)
    return (<double>(z >> 11) + 0.5) * INV53


cdef inline Py_ssize_t count_le(const double[::1] cdf, double u) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = cdf.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline bint outside_hex(double x, double y, double apothem,
                             double c1, double s1, double c2, double s2) noexcept nogil:
    cdef double m = fabs(x)
    cdef double a = fabs(x * c1 + y * s1)
    cdef double b = fabs(x * c2 + y * s2)
    if b > a:
        a = b
    if a > m:
        m = a
    return m > apothem


cdef inline double ipow(double x, int k) noexcept nogil:
    cdef double r = 1.0
    while k > 0:
        if k & 1:
            r *= x
        x *= x
        k >>= 1
    return r


cdef double one_trial(uint64_t key, int scenario, double density, double disk_radius,
                      double apothem, double alpha, double omega, int rich,
                      double delta, double delta_prime, double gamma,
                      const int64_t[::1] n_values, const double[::1] n_cdf, int nmax,
                      const double[::1] count_cdf,
                      double c1, double s1, double c2, double s2) noexcept nogil:
    cdef Py_ssize_t n_pts = count_le(count_cdf, unif(key, H_COUNT))
    cdef Py_ssize_t i, j, sel
    cdef uint64_t stride = P_EXP0 + nmax
    cdef uint64_t b
    cdef double mx = 0.0, my = 0.0, L2 = 0.0
    cdef double r, phi, x, y, dx, dy, d2, ly2, g, w, term, acc = 0.0
    cdef double half_alpha = alpha / 2
    # integer alpha/2 (the usual alpha = 4) avoids two pow() calls per point
    cdef int int_half = <int>half_alpha if half_alpha == <int>half_alpha and half_alpha <= 16 else 0
    cdef double ua, ub, a0, a1, rt, bx, by, L, psi
    cdef int k
    cdef int64_t n_div

    if scenario != 0:
        k = <int>(3.0 * unif(key, H_RHOMBUS))
        if k > 2:
            k = 2
        ua = unif(key, H_A)
        ub = unif(key, H_B)
        rt = 2.0 * apothem / sqrt(3.0)
        a0 = M_PI / 6 + (2 * k) * M_PI / 3
        a1 = a0 + 2 * M_PI / 3
        bx = rt * (ua * cos(a0) + ub * cos(a1))
        by = rt * (ua * sin(a0) + ub * sin(a1))
        L = sqrt(-log(unif(key, H_SERVING)) / (M_PI * density))
        psi = 2.0 * M_PI * unif(key, H_DIRECTION)
        mx = bx + L * cos(psi)
        my = by + L * sin(psi)
        L2 = L * L

    for i in range(n_pts):
        b = HEADER + (i + 1) * stride
        r = disk_radius * sqrt(unif(key, b + P_RADIUS))
        phi = 2.0 * M_PI * unif(key, b + P_ANGLE)
        x = r * cos(phi)
        y = r * sin(phi)
        if scenario == 0:
            if not outside_hex(x, y, apothem, c1, s1, c2, s2):
                continue
        else:
            dx = x - mx
            dy = y - my
            if not (dx * dx + dy * dy > L2):
                continue
            if scenario == 1 and not outside_hex(x, y, apothem, c1, s1, c2, s2):
                continue
        dx = x - mx
        dy = y - my
        d2 = dx * dx + dy * dy
        ly2 = -log(unif(key, b + P_SERVING)) / (M_PI * density)
        if rich:
            g = -log(unif(key, b + P_SIDE))
            sel = count_le(n_cdf, unif(key, b + P_MAIN))
            if sel > n_values.shape[0] - 1:
                sel = n_values.shape[0] - 1
            n_div = n_values[sel]
            w = 0.0
            for j in range(nmax):
                if j < n_div:
                    w = w + (-log(unif(key, b + P_EXP0 + j)))
        else:
            g = gamma * unif(key, b + P_SIDE)
            w = delta + (delta_prime - delta) * unif(key, b + P_MAIN)
        if int_half:
            term = omega * ipow(ly2, int_half) / w * g / ipow(d2, int_half)
        else:
            term = omega * pow(ly2, half_alpha) / w * g * pow(d2, -half_alpha)
        acc += term
    return acc


def interference_batch(double[::1] out, long long start, int threads, *, seed, int scenario,
                       double density, double disk_radius, double apothem, double alpha,
                       double omega, int rich, double delta, double delta_prime, double gamma,
                       const int64_t[::1] n_values, const double[::1] n_cdf, int nmax,
                       const double[::1] count_cdf):
    """Fill ``out[t]`` with the interference of trial ``start + t``."""
    cdef uint64_t base = mix64(<uint64_t>seed + SEED_OFFSET)
    cdef Py_ssize_t t, n = out.shape[0]
    cdef uint64_t key
    cdef double c1 = cos(M_PI / 3), s1 = sin(M_PI / 3)
    cdef double c2 = cos(2 * M_PI / 3), s2 = sin(2 * M_PI / 3)
    cdef int nthreads = threads
    if nthreads <= 0:
        nthreads = openmp_max_threads()
    with nogil:
        for t in prange(n, num_threads=nthreads, schedule="static"):
            key = mix64(base ^ ((<uint64_t>(start + t) + 1) * TRIAL_MULT))
            out[t] = one_trial(key, scenario, density, disk_radius, apothem, alpha, omega, rich,
                               delta, delta_prime, gamma, n_values, n_cdf, nmax, count_cdf,
                               c1, s1, c2, s2)


cdef extern from *:
    """
    #ifdef _OPENMP
    #include <omp.h>
    static int mccsim_max_threads(void) { return omp_get_max_threads(); }
    #else
    static int mccsim_max_threads(void) { return 1; }
    #endif
    """
    int mccsim_max_threads() nogil


def openmp_max_threads():
    return mccsim_max_threads()
