"""Pure NumPy kernel backend.

Semantically identical to the compiled core; used as fallback when the
extension is unavailable and as the reference side of parity tests.
"""

import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_U53_INV = 2.0 ** -53


def _mulhilo(a, b):
    # 64x64 -> 128 bit product emulated through 32-bit limbs.
    lo = a * b
    ah = a >> np.uint64(32)
    al = a & _LO32
    bh = b >> np.uint64(32)
    bl = b & _LO32
    mid1 = ah * bl
    mid2 = al * bh
    carry = (((al * bl) >> np.uint64(32)) + (mid1 & _LO32) + (mid2 & _LO32)) >> np.uint64(32)
    hi = ah * bh + (mid1 >> np.uint64(32)) + (mid2 >> np.uint64(32)) + carry
    return hi, lo


def _philox(c0, c1, c2, c3, k0, k1):
    """Philox4x64-10 on broadcast uint64 arrays; returns the four outputs."""
    for _ in range(10):
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = k0 + _W0
        k1 = k1 + _W1
    return c0, c1, c2, c3


def _as_u64(x):
    return np.asarray(x, dtype=np.uint64)


def philox_block(seed, stream, c0, c1):
    """One Philox4x64-10 block as a (4,) uint64 array.

    Key is (seed, stream), counter is (c0, c1, 0, 0).
    """
    with np.errstate(over="ignore"):
        out = _philox(
            _as_u64(c0), _as_u64(c1), np.uint64(0), np.uint64(0),
            _as_u64(seed), _as_u64(stream),
        )
    return np.array(out, dtype=np.uint64)


def _to_open01(raw):
    # (0,1) strictly: the half-offset keeps CMS inputs away from the
    # endpoint singularities.
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _U53_INV


def uniforms(seed, streams, planes, draws):
    """Uniform draws in the open interval (0,1).

    ``streams``, ``planes`` and ``draws`` broadcast together; draw ``t`` of
    plane ``p`` of stream ``s`` is lane ``t % 4`` of the Philox block with
    key ``(seed, s)`` and counter ``(t // 4, p, 0, 0)``.
    """
    streams, planes, draws = np.broadcast_arrays(
        _as_u64(streams), _as_u64(planes), _as_u64(draws)
    )
    shape = streams.shape
    streams = streams.ravel()
    planes = planes.ravel()
    draws = draws.ravel()
    with np.errstate(over="ignore"):
        out = _philox(
            draws >> np.uint64(2), planes, np.uint64(0), np.uint64(0),
            _as_u64(seed), streams,
        )
    lanes = (draws & np.uint64(3)).astype(np.int64)
    raw = np.choose(lanes, out)
    return _to_open01(raw).reshape(shape)


def cms_symmetric(alpha, u, e):
    """Chambers-Mallows-Stuck transform for the symmetric stable law.

    With u ~ U(-pi/2, pi/2) and e ~ Exp(1) the output has characteristic
    function exp(-|xi|^alpha).
    """
    scalar = np.isscalar(u) and np.isscalar(e)
    u = np.asarray(u, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    out = (
        np.sin(alpha * u)
        * np.cos(u) ** (-1.0 / alpha)
        * (np.cos((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
    )
    return out[()] if scalar else out


def cms_one_sided(alpha, u, e):
    """One-sided stable variate with Laplace transform exp(-s^alpha), alpha<1.

    Totally-skewed CMS transform rescaled by cos(pi*alpha/2)^(1/alpha).
    """
    scalar = np.isscalar(u) and np.isscalar(e)
    u = np.asarray(u, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    shift = 0.5 * np.pi
    out = (
        np.sin(alpha * (u + shift))
        * np.cos(u) ** (-1.0 / alpha)
        * (np.cos((1.0 - alpha) * u - alpha * shift) / e) ** ((1.0 - alpha) / alpha)
    )
    return out[()] if scalar else out


def _drift_eval(drift_id, d0, d1, x):
    if drift_id == 0:
        return 0.0
    if drift_id == 1:
        return np.broadcast_to(np.float64(d0), x.shape)
    if drift_id == 2:
        # odd clamped power: sign(x) * min(1, |x|^beta)
        ax = np.abs(x)
        return np.sign(x) * np.minimum(1.0, ax**d0)
    if drift_id == 3:
        # min(1, r^(1-a)/|log r|) * scale along the positive axis
        ax = np.abs(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            mag = ax ** (1.0 - d0) / np.abs(np.log(ax))
        mag = np.where((ax == 0.0) | ~np.isfinite(mag), np.where(ax == 0.0, 0.0, 1.0), mag)
        return d1 * np.minimum(1.0, mag)
    raise ValueError(f"unknown drift id {drift_id}")


def _bump(x, center, radius, sup):
    r = np.abs(x - center) / radius
    inside = r < 1.0
    rr = np.where(inside, r, 0.0)
    q = 1.0 - rr * rr * rr * (10.0 - 15.0 * rr + 6.0 * rr * rr)
    return np.where(inside, sup * q, 0.0)


def _noise_block(noise_mode, noise_a, noise_b, seed, streams, planes):
    """Per-(path, step) noise increments for a block of step planes."""
    n, b = np.broadcast_shapes(streams.shape, planes.shape)
    with np.errstate(over="ignore"):
        out = _philox(
            np.uint64(0),
            np.broadcast_to(planes, (n, b)).ravel(),
            np.uint64(0),
            np.uint64(0),
            np.uint64(seed),
            np.broadcast_to(streams, (n, b)).ravel(),
        )
    u0 = _to_open01(out[0]).reshape(n, b)
    u1 = _to_open01(out[1]).reshape(n, b)
    if noise_mode == 1:
        u = np.pi * (u0 - 0.5)
        e = -np.log1p(-u1)
        return noise_a * cms_symmetric(noise_b, u, e)
    if noise_mode == 2:
        u = np.pi * (u0 - 0.5)
        e = -np.log1p(-u1)
        s = cms_one_sided(0.5 * noise_b, u, e)
        u2 = _to_open01(out[2]).reshape(n, b)
        u3 = _to_open01(out[3]).reshape(n, b)
        g = np.sqrt(-2.0 * np.log(u2)) * np.cos(2.0 * np.pi * u3)
        return noise_a * np.sqrt(s) * g
    raise ValueError(f"unknown noise mode {noise_mode}")


_STEP_BLOCK = 512


def sim_paths_1d(seed, stream0, x0, K, h, drift_id, d0, d1,
                 noise_mode, noise_a, noise_b, nthreads=0):
    """Euler paths X_{k+1} = X_k + b(X_k) h + dZ_k on [0, K h], d = 1.

    Returns (states, invalid): states has shape (N, K+1); a path that hits a
    non-finite state is frozen at its last finite value and flagged.
    """
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    n = x0.shape[0]
    states = np.empty((n, K + 1), dtype=np.float64)
    states[:, 0] = x0
    invalid = np.zeros(n, dtype=np.uint8)
    streams = np.uint64(stream0) + np.arange(n, dtype=np.uint64)
    x = x0.copy()
    alive = np.ones(n, dtype=bool)
    for k0 in range(0, K, _STEP_BLOCK):
        b = min(_STEP_BLOCK, K - k0)
        planes = np.uint64(k0) + np.arange(b, dtype=np.uint64)
        if noise_mode == 0:
            z = np.zeros((n, b))
        else:
            z = _noise_block(noise_mode, noise_a, noise_b, seed,
                             streams[:, None], planes[None, :])
        for j in range(b):
            xn = x + h * _drift_eval(drift_id, d0, d1, x) + z[:, j]
            bad = alive & ~np.isfinite(xn)
            if bad.any():
                invalid[bad] = 1
                alive &= ~bad
                xn = np.where(bad, x, xn)
            x = np.where(alive, xn, x)
            states[:, k0 + j + 1] = x
    return states, invalid


def sim_stats_1d(seed, stream0, x0, K, h, drift_id, d0, d1,
                 noise_mode, noise_a, noise_b,
                 lam, f_center, f_radius, f_sup, nthreads=0):
    """Streaming per-path statistics of the Euler scheme, d = 1.

    Returns (acc, maxdisp, xfinal, invalid) where acc is the left-endpoint
    quadrature sum_k exp(-lam t_k) f(X_k) h over k = 0..K-1 with f the
    radial quintic bump, maxdisp = max_k |X_k - X_0| over k = 1..K.
    """
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    n = x0.shape[0]
    acc = np.zeros(n)
    maxd = np.zeros(n)
    invalid = np.zeros(n, dtype=np.uint8)
    streams = np.uint64(stream0) + np.arange(n, dtype=np.uint64)
    x = x0.copy()
    alive = np.ones(n, dtype=bool)
    do_f = f_sup != 0.0
    for k0 in range(0, K, _STEP_BLOCK):
        b = min(_STEP_BLOCK, K - k0)
        planes = np.uint64(k0) + np.arange(b, dtype=np.uint64)
        if noise_mode == 0:
            z = np.zeros((n, b))
        else:
            z = _noise_block(noise_mode, noise_a, noise_b, seed,
                             streams[:, None], planes[None, :])
        w = np.exp(-lam * h * (k0 + np.arange(b))) * h
        for j in range(b):
            if do_f:
                acc += np.where(alive, w[j] * _bump(x, f_center, f_radius, f_sup), 0.0)
            xn = x + h * _drift_eval(drift_id, d0, d1, x) + z[:, j]
            bad = alive & ~np.isfinite(xn)
            if bad.any():
                invalid[bad] = 1
                alive &= ~bad
                xn = np.where(bad, x, xn)
            x = np.where(alive, xn, x)
            maxd = np.where(alive, np.maximum(maxd, np.abs(x - x0)), maxd)
    acc = np.where(invalid == 1, np.nan, acc)
    xfinal = np.where(invalid == 1, np.nan, x)
    return acc, maxd, xfinal, invalid
