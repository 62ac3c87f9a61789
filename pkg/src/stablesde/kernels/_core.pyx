# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend (Cython).

Same contract as stablesde.kernels._ref; see that module and the package
docstring for the stream-addressing scheme.  Hot loops are written so the C
compiler can vectorize the transcendental-heavy transform stage; the state
recursion stays scalar per path and paths run in parallel (OpenMP), each
writing only its own output slot, so results do not depend on thread count.
"""

import numpy as np

cimport openmp
from cython.parallel cimport prange
from libc.math cimport cos, exp, fabs, log, log1p, pow, sin, sqrt
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t stablesde_mulhi64(uint64_t a, uint64_t b) {
        return (uint64_t)(((unsigned __int128)a * (unsigned __int128)b) >> 64);
    }
    /* finite check that survives -ffast-math (bit test, no FP compare) */
    static inline int stablesde_finite64(double x) {
        union { double d; uint64_t u; } v;
        v.d = x;
        return ((v.u >> 52) & 0x7ffULL) != 0x7ffULL;
    }
    """
    uint64_t stablesde_mulhi64(uint64_t a, uint64_t b) nogil
    int stablesde_finite64(double x) nogil

DEF PHILOX_ROUNDS = 10

cdef uint64_t M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t M1 = 0xCA5A826395121157ULL
cdef uint64_t W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t W1 = 0xBB67AE8584CAA73BULL
cdef double U53_INV = 1.1102230246251565e-16  # 2^-53


cdef struct Block:
    uint64_t v0
    uint64_t v1
    uint64_t v2
    uint64_t v3


cdef inline Block philox10(uint64_t c0, uint64_t c1, uint64_t c2, uint64_t c3,
                           uint64_t k0, uint64_t k1) noexcept nogil:
    cdef Block b
    cdef uint64_t hi0, lo0, hi1, lo1, n0, n2
    cdef int i
    for i in range(PHILOX_ROUNDS):
        hi0 = stablesde_mulhi64(M0, c0)
        lo0 = M0 * c0
        hi1 = stablesde_mulhi64(M1, c2)
        lo1 = M1 * c2
        n0 = hi1 ^ c1 ^ k0
        n2 = hi0 ^ c3 ^ k1
        c0 = n0
        c1 = lo1
        c2 = n2
        c3 = lo0
        k0 = k0 + W0
        k1 = k1 + W1
    b.v0 = c0
    b.v1 = c1
    b.v2 = c2
    b.v3 = c3
    return b


cdef inline double to01(uint64_t raw) noexcept nogil:
    return (<double>(raw >> 11) + 0.5) * U53_INV


cdef inline double cms_sym_scalar(double alpha, double u, double e) noexcept nogil:
    return sin(alpha * u) * pow(cos(u), -1.0 / alpha) \
        * pow(cos((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha)


cdef inline double cms_pos_scalar(double alpha, double u, double e) noexcept nogil:
    cdef double shift = 1.5707963267948966
    return sin(alpha * (u + shift)) * pow(cos(u), -1.0 / alpha) \
        * pow(cos((1.0 - alpha) * u - alpha * shift) / e, (1.0 - alpha) / alpha)


cdef inline double drift_scalar(int drift_id, int fast, double d0, double d1,
                                double x) noexcept nogil:
    cdef double ax, m, t
    if drift_id == 0:
        return 0.0
    if drift_id == 1:
        return d0
    if drift_id == 2:
        ax = fabs(x)
        if ax >= 1.0:
            m = 1.0
        elif fast == 1:
            m = sqrt(sqrt(ax))
        elif fast == 2:
            m = sqrt(ax)
        elif fast == 3:
            t = sqrt(ax)
            m = t * sqrt(t)
        else:
            m = pow(ax, d0)
        if x > 0.0:
            return m
        elif x < 0.0:
            return -m
        return 0.0
    if drift_id == 3:
        ax = fabs(x)
        if ax == 0.0:
            return 0.0
        if ax == 1.0:
            return d1
        m = pow(ax, 1.0 - d0) / fabs(log(ax))
        if m > 1.0 or not stablesde_finite64(m):
            m = 1.0
        return d1 * m
    return 0.0


cdef inline double bump_scalar(double x, double c, double r, double s) noexcept nogil:
    cdef double rr = fabs(x - c) / r
    if rr >= 1.0:
        return 0.0
    return s * (1.0 - rr * rr * rr * (10.0 - 15.0 * rr + 6.0 * rr * rr))


cdef inline int tanaka_fast_mode(int drift_id, double d0) noexcept nogil:
    if drift_id != 2:
        return 0
    if d0 == 0.25:
        return 1
    if d0 == 0.5:
        return 2
    if d0 == 0.75:
        return 3
    return 0


DEF STEP_BLOCK = 512


cdef inline void fill_noise(int noise_mode, double noise_a, double noise_b,
                            uint64_t seed, uint64_t stream,
                            long k0, int nb,
                            double *u0, double *u1, double *u2, double *u3,
                            double *z) noexcept nogil:
    """Noise increments for step planes k0..k0+nb-1 of one path stream."""
    cdef int j
    cdef Block blk
    cdef double u, e, inv_alpha, a3, a1
    for j in range(nb):
        blk = philox10(0, <uint64_t>(k0 + j), 0, 0, seed, stream)
        u0[j] = to01(blk.v0)
        u1[j] = to01(blk.v1)
        if noise_mode == 2:
            u2[j] = to01(blk.v2)
            u3[j] = to01(blk.v3)
    if noise_mode == 1:
        a1 = noise_b
        inv_alpha = -1.0 / noise_b
        a3 = (1.0 - noise_b) / noise_b
        for j in range(nb):
            u = 3.141592653589793 * (u0[j] - 0.5)
            e = -log1p(-u1[j])
            z[j] = noise_a * (sin(a1 * u) * pow(cos(u), inv_alpha)
                              * pow(cos((1.0 - a1) * u) / e, a3))
    else:
        a1 = 0.5 * noise_b
        for j in range(nb):
            u = 3.141592653589793 * (u0[j] - 0.5)
            e = -log1p(-u1[j])
            z[j] = noise_a * sqrt(cms_pos_scalar(a1, u, e)) \
                * sqrt(-2.0 * log(u2[j])) * cos(6.283185307179586 * u3[j])


cdef inline void one_path_stats(uint64_t seed, uint64_t stream, double x0,
                                long K, double h,
                                int drift_id, int fast, double d0, double d1,
                                int noise_mode, double noise_a, double noise_b,
                                const double *w, int do_f,
                                double f_center, double f_radius, double f_sup,
                                double *acc_out, double *maxd_out,
                                double *xf_out, unsigned char *inv_out,
                                double *scratch) noexcept nogil:
    cdef double *u0 = scratch
    cdef double *u1 = scratch + STEP_BLOCK
    cdef double *u2 = scratch + 2 * STEP_BLOCK
    cdef double *u3 = scratch + 3 * STEP_BLOCK
    cdef double *z = scratch + 4 * STEP_BLOCK
    cdef double x = x0, acc = 0.0, maxd = 0.0, xn, d
    cdef long k0
    cdef int nb, j, bad = 0
    for k0 in range(0, K, STEP_BLOCK):
        nb = STEP_BLOCK
        if k0 + nb > K:
            nb = <int>(K - k0)
        if noise_mode != 0:
            fill_noise(noise_mode, noise_a, noise_b, seed, stream,
                       k0, nb, u0, u1, u2, u3, z)
        else:
            for j in range(nb):
                z[j] = 0.0
        for j in range(nb):
            if do_f:
                acc += w[k0 + j] * bump_scalar(x, f_center, f_radius, f_sup)
            xn = x + h * drift_scalar(drift_id, fast, d0, d1, x) + z[j]
            if not stablesde_finite64(xn):
                bad = 1
                break
            x = xn
            d = fabs(x - x0)
            if d > maxd:
                maxd = d
        if bad:
            break
    inv_out[0] = <unsigned char>bad
    maxd_out[0] = maxd
    if bad:
        acc_out[0] = 0.0
        xf_out[0] = 0.0
    else:
        acc_out[0] = acc
        xf_out[0] = x


def sim_stats_1d(seed, stream0, x0, K, h, drift_id, d0, d1,
                 noise_mode, noise_a, noise_b,
                 lam, f_center, f_radius, f_sup, nthreads=0):
    """Streaming per-path statistics of the Euler scheme, d = 1.

    Mirrors stablesde.kernels._ref.sim_stats_1d.
    """
    cdef uint64_t seed_c = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t stream_c = <uint64_t>(int(stream0) & 0xFFFFFFFFFFFFFFFF)
    x0_np = np.ascontiguousarray(x0, dtype=np.float64)
    cdef double[::1] x0v = x0_np
    cdef long n = x0v.shape[0], Kc = int(K)
    cdef double hc = h, lamc = lam
    cdef int did = drift_id, nmode = noise_mode
    cdef double dd0 = d0, dd1 = d1, na = noise_a, nb_ = noise_b
    cdef double fc = f_center, fr = f_radius, fs = f_sup
    cdef int do_f = 1 if f_sup != 0.0 else 0
    cdef int fast = tanaka_fast_mode(did, dd0)
    acc_np = np.zeros(n)
    maxd_np = np.zeros(n)
    xf_np = np.zeros(n)
    inv_np = np.zeros(n, dtype=np.uint8)
    w_np = np.exp(-lam * h * np.arange(Kc, dtype=np.float64)) * h
    cdef double[::1] acc = acc_np
    cdef double[::1] maxd = maxd_np
    cdef double[::1] xf = xf_np
    cdef unsigned char[::1] inv = inv_np
    cdef double[::1] w = w_np
    cdef int nt = int(nthreads)
    if nt <= 0:
        nt = openmp.omp_get_max_threads()
    cdef long p
    cdef double *scratch
    with nogil:
        for p in prange(n, schedule='static', num_threads=nt):
            scratch = <double *>malloc(5 * STEP_BLOCK * sizeof(double))
            if scratch != NULL:
                one_path_stats(seed_c, stream_c + <uint64_t>p, x0v[p], Kc, hc,
                               did, fast, dd0, dd1, nmode, na, nb_,
                               &w[0] if Kc > 0 else NULL, do_f, fc, fr, fs,
                               &acc[p], &maxd[p], &xf[p], &inv[p], scratch)
                free(scratch)
            else:
                inv[p] = 2
    if np.any(inv_np == 2):
        raise MemoryError("kernel scratch allocation failed")
    bad = inv_np == 1
    if bad.any():
        acc_np[bad] = np.nan
        xf_np[bad] = np.nan
    return acc_np, maxd_np, xf_np, inv_np


cdef inline void one_path_states(uint64_t seed, uint64_t stream, double x0,
                                 long K, double h,
                                 int drift_id, int fast, double d0, double d1,
                                 int noise_mode, double noise_a, double noise_b,
                                 double *states, unsigned char *inv_out,
                                 double *scratch) noexcept nogil:
    cdef double *u0 = scratch
    cdef double *u1 = scratch + STEP_BLOCK
    cdef double *u2 = scratch + 2 * STEP_BLOCK
    cdef double *u3 = scratch + 3 * STEP_BLOCK
    cdef double *z = scratch + 4 * STEP_BLOCK
    cdef double x = x0, xn
    cdef long k0
    cdef int nb, j, bad = 0
    states[0] = x
    for k0 in range(0, K, STEP_BLOCK):
        nb = STEP_BLOCK
        if k0 + nb > K:
            nb = <int>(K - k0)
        if noise_mode != 0:
            fill_noise(noise_mode, noise_a, noise_b, seed, stream,
                       k0, nb, u0, u1, u2, u3, z)
        else:
            for j in range(nb):
                z[j] = 0.0
        for j in range(nb):
            if not bad:
                xn = x + h * drift_scalar(drift_id, fast, d0, d1, x) + z[j]
                if stablesde_finite64(xn):
                    x = xn
                else:
                    bad = 1
            states[k0 + j + 1] = x
    inv_out[0] = <unsigned char>bad


def sim_paths_1d(seed, stream0, x0, K, h, drift_id, d0, d1,
                 noise_mode, noise_a, noise_b, nthreads=0):
    """Euler paths on [0, K h], d = 1; mirrors the NumPy backend."""
    cdef uint64_t seed_c = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t stream_c = <uint64_t>(int(stream0) & 0xFFFFFFFFFFFFFFFF)
    x0_np = np.ascontiguousarray(x0, dtype=np.float64)
    cdef double[::1] x0v = x0_np
    cdef long n = x0v.shape[0], Kc = int(K)
    cdef double hc = h
    cdef int did = drift_id, nmode = noise_mode
    cdef double dd0 = d0, dd1 = d1, na = noise_a, nb_ = noise_b
    cdef int fast = tanaka_fast_mode(did, dd0)
    states_np = np.empty((n, Kc + 1), dtype=np.float64)
    inv_np = np.zeros(n, dtype=np.uint8)
    cdef double[:, ::1] states = states_np
    cdef unsigned char[::1] inv = inv_np
    cdef int nt = int(nthreads)
    if nt <= 0:
        nt = openmp.omp_get_max_threads()
    cdef long p
    cdef double *scratch
    with nogil:
        for p in prange(n, schedule='static', num_threads=nt):
            scratch = <double *>malloc(5 * STEP_BLOCK * sizeof(double))
            if scratch != NULL:
                one_path_states(seed_c, stream_c + <uint64_t>p, x0v[p], Kc, hc,
                                did, fast, dd0, dd1, nmode, na, nb_,
                                &states[p, 0], &inv[p], scratch)
                free(scratch)
            else:
                inv[p] = 2
    if np.any(inv_np == 2):
        raise MemoryError("kernel scratch allocation failed")
    return states_np, inv_np


def philox_block(seed, stream, c0, c1):
    """One Philox4x64-10 block as a (4,) uint64 array."""
    cdef Block b = philox10(<uint64_t>(int(c0) & 0xFFFFFFFFFFFFFFFF),
                            <uint64_t>(int(c1) & 0xFFFFFFFFFFFFFFFF),
                            0, 0,
                            <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF),
                            <uint64_t>(int(stream) & 0xFFFFFFFFFFFFFFFF))
    out = np.empty(4, dtype=np.uint64)
    cdef uint64_t[::1] ov = out
    ov[0] = b.v0
    ov[1] = b.v1
    ov[2] = b.v2
    ov[3] = b.v3
    return out


def uniforms(seed, streams, planes, draws):
    """Uniform draws in (0,1); see the NumPy backend for the addressing."""
    cdef uint64_t seed_c = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    s_np, p_np, d_np = np.broadcast_arrays(
        np.asarray(streams, dtype=np.uint64),
        np.asarray(planes, dtype=np.uint64),
        np.asarray(draws, dtype=np.uint64),
    )
    shape = s_np.shape
    # broadcast views carry numpy's warn-on-write flag; copy before taking
    # memoryviews
    s_flat = np.array(s_np.ravel(), dtype=np.uint64)
    p_flat = np.array(p_np.ravel(), dtype=np.uint64)
    d_flat = np.array(d_np.ravel(), dtype=np.uint64)
    cdef uint64_t[::1] sv = s_flat
    cdef uint64_t[::1] pv = p_flat
    cdef uint64_t[::1] dv = d_flat
    cdef long n = sv.shape[0], i
    out_np = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out_np
    cdef Block b
    cdef uint64_t lane
    with nogil:
        for i in range(n):
            b = philox10(dv[i] >> 2, pv[i], 0, 0, seed_c, sv[i])
            lane = dv[i] & 3
            if lane == 0:
                ov[i] = to01(b.v0)
            elif lane == 1:
                ov[i] = to01(b.v1)
            elif lane == 2:
                ov[i] = to01(b.v2)
            else:
                ov[i] = to01(b.v3)
    return out_np.reshape(shape)


def cms_symmetric(alpha, u, e):
    """CMS transform, symmetric stable; characteristic fn exp(-|xi|^alpha)."""
    cdef double a = alpha
    u_np = np.ascontiguousarray(np.atleast_1d(np.asarray(u, dtype=np.float64)))
    e_np = np.ascontiguousarray(np.atleast_1d(np.asarray(e, dtype=np.float64)))
    u_b, e_b = np.broadcast_arrays(u_np, e_np)
    u_b = np.array(u_b, dtype=np.float64)
    e_b = np.array(e_b, dtype=np.float64)
    shape = u_b.shape
    cdef double[::1] uv = u_b.ravel()
    cdef double[::1] ev = e_b.ravel()
    cdef long n = uv.shape[0], i
    out_np = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out_np
    cdef double inv_alpha = -1.0 / a
    cdef double a3 = (1.0 - a) / a
    with nogil:
        for i in range(n):
            ov[i] = sin(a * uv[i]) * pow(cos(uv[i]), inv_alpha) \
                * pow(cos((1.0 - a) * uv[i]) / ev[i], a3)
    res = out_np.reshape(shape)
    if np.isscalar(u) and np.isscalar(e):
        return res.reshape(())[()]
    return res


def cms_one_sided(alpha, u, e):
    """One-sided stable variate; Laplace transform exp(-s^alpha), alpha<1."""
    cdef double a = alpha
    u_np = np.ascontiguousarray(np.atleast_1d(np.asarray(u, dtype=np.float64)))
    e_np = np.ascontiguousarray(np.atleast_1d(np.asarray(e, dtype=np.float64)))
    u_b, e_b = np.broadcast_arrays(u_np, e_np)
    u_b = np.array(u_b, dtype=np.float64)
    e_b = np.array(e_b, dtype=np.float64)
    shape = u_b.shape
    cdef double[::1] uv = u_b.ravel()
    cdef double[::1] ev = e_b.ravel()
    cdef long n = uv.shape[0], i
    out_np = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out_np
    with nogil:
        for i in range(n):
            ov[i] = cms_pos_scalar(a, uv[i], ev[i])
    res = out_np.reshape(shape)
    if np.isscalar(u) and np.isscalar(e):
        return res.reshape(())[()]
    return res
