"""Increment samplers for symmetric alpha-stable processes.

Three constructions, all validated against the Levy symbol psi (the
empirical characteristic function of increments must match exp(-h psi)):

* ray_sum (discrete measures): one CMS variate per +/- ray pair, scaled so
  the pair contributes w C(alpha) |<xi, theta>|^alpha to the symbol, summed
  over pairs with time scaling h^(1/alpha);
* subordination (isotropic measures): Z = kappa sqrt(2 S_h) G with S_h a
  one-sided (alpha/2)-stable subordinator increment and G standard normal;
* compound_poisson (either kind): jumps larger than the cutoff rho arrive
  at rate h mu(|z|>rho) and are drawn from the normalized restriction of
  mu; the small-jump remainder is dropped, legitimate in the finite-
  variation regime alpha < 1, with first-moment bias
  int_{|z|<=rho} |z| mu(dz) = O(rho^(1-alpha)).

Draw addressing: increment i of stream s consumes draws from plane i of
stream s at fixed per-method offsets, so any sub-range of increments, or a
whole family of per-path streams, can be regenerated independently of
batching.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .kernels import NOISE_RAY, NOISE_SUBORDINATED, cms_one_sided, cms_symmetric, uniforms
from .measures import SpectralMeasure, isotropic_symbol_constant, levy_symbol, ray_constant

__all__ = [
    "SamplerSpec",
    "cms_standard_stable",
    "sample_increment",
    "sample_increments",
    "increments_field",
    "kernel_noise_params",
    "small_jump_bias",
    "empirical_cf_table",
    "write_increments",
    "read_increments",
]

_METHODS = ("ray_sum", "subordination", "compound_poisson")
_POISSON_RATE_LIMIT = 500.0


@dataclass
class SamplerSpec:
    """Configuration of an increment sampler for one noise process."""

    measure: SpectralMeasure
    method: str
    cutoff: float | None = None
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ConfigurationError(f"unknown sampler method {self.method!r}")
        if self.method == "ray_sum" and self.measure.kind != "discrete":
            raise ConfigurationError("ray_sum requires a discrete spectral measure")
        if self.method == "subordination" and self.measure.kind != "isotropic":
            raise ConfigurationError("subordination requires an isotropic measure")
        if self.method == "compound_poisson":
            if self.cutoff is None:
                raise ConfigurationError("compound_poisson requires a cutoff")
            if not 0.0 < self.cutoff <= 1.0:
                raise ConfigurationError("cutoff must lie in (0, 1]")
        elif self.cutoff is not None:
            raise ConfigurationError(f"cutoff is not used by method {self.method!r}")

    def to_json(self) -> dict:
        doc = {
            "measure": self.measure.to_json(),
            "method": self.method,
            "seed": self.seed,
            "stream_id": self.stream_id,
        }
        if self.cutoff is not None:
            doc["cutoff"] = self.cutoff
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "SamplerSpec":
        return cls(
            measure=SpectralMeasure.from_json(doc["measure"]),
            method=doc["method"],
            cutoff=doc.get("cutoff"),
            seed=int(doc.get("seed", 0)),
            stream_id=int(doc.get("stream_id", 0)),
        )


def cms_standard_stable(alpha: float, u, e):
    """Standard symmetric stable variate from explicit (u, e) inputs.

    sin(alpha u)/(cos u)^(1/alpha) * (cos((1-alpha)u)/e)^((1-alpha)/alpha);
    for u ~ U(-pi/2, pi/2), e ~ Exp(1) the characteristic function is
    exp(-|xi|^alpha).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    return cms_symmetric(alpha, u, e)


def _angle_exp(seed, streams, planes, first_draw):
    u01 = uniforms(seed, streams, planes, first_draw)
    e01 = uniforms(seed, streams, planes, first_draw + np.uint64(1))
    return np.pi * (u01 - 0.5), -np.log1p(-e01)


def _ray_sum_field(measure, seed, streams, planes, h):
    n = np.broadcast_shapes(np.shape(streams), np.shape(planes))
    n = int(np.prod(n)) if n else 1
    out = np.zeros((n, measure.d))
    c_alpha = ray_constant(measure.alpha)
    for j, (direction, w) in enumerate(measure.pairs()):
        u, e = _angle_exp(seed, streams, planes, np.uint64(2 * j))
        xi = (w * c_alpha * h) ** (1.0 / measure.alpha) * cms_symmetric(measure.alpha, u, e)
        out += xi.reshape(n, 1) * direction[None, :]
    return out


def _gaussian_field(seed, streams, planes, first_draw, count):
    """count standard normals per (stream, plane) cell via Box-Muller pairs."""
    n_pairs = (count + 1) // 2
    cols = []
    for p in range(n_pairs):
        u1 = uniforms(seed, streams, planes, first_draw + np.uint64(2 * p))
        u2 = uniforms(seed, streams, planes, first_draw + np.uint64(2 * p + 1))
        r = np.sqrt(-2.0 * np.log(u1))
        cols.append((r * np.cos(2.0 * np.pi * u2)).ravel())
        cols.append((r * np.sin(2.0 * np.pi * u2)).ravel())
    return np.column_stack(cols[:count])


def _subordination_field(measure, seed, streams, planes, h):
    u, e = _angle_exp(seed, streams, planes, np.uint64(0))
    s = cms_one_sided(0.5 * measure.alpha, u, e)
    g = _gaussian_field(seed, streams, planes, np.uint64(2), measure.d)
    kappa = (
        measure.isotropic_constant * isotropic_symbol_constant(measure.d, measure.alpha)
    ) ** (1.0 / measure.alpha)
    coef = kappa * np.sqrt(2.0) * h ** (1.0 / measure.alpha)
    return coef * np.sqrt(s).reshape(-1, 1) * g


def _poisson_counts(u: np.ndarray, rate: float) -> np.ndarray:
    """Poisson inversion from a single uniform per sample (fixed draw cost)."""
    if rate > _POISSON_RATE_LIMIT:
        raise ConfigurationError(
            f"compound-Poisson rate {rate:.3g} exceeds the inversion limit "
            f"{_POISSON_RATE_LIMIT}; increase the cutoff or decrease h"
        )
    counts = np.zeros(u.shape, dtype=np.int64)
    p = np.full_like(u, np.exp(-rate))
    cdf = p.copy()
    active = u > cdf
    k = 0
    while active.any():
        k += 1
        p = p * (rate / k)
        cdf = cdf + p
        counts[active] = k
        active = u > cdf
        if k > 10 * _POISSON_RATE_LIMIT:  # cdf numerically exhausted
            break
    return counts


def _compound_poisson_field(measure, cutoff, seed, streams, planes, h):
    rate = h * measure.tail_mass(cutoff)
    u0 = uniforms(seed, streams, planes, np.uint64(0))
    counts = _poisson_counts(u0, rate).ravel()
    n = counts.size
    out = np.zeros((n, measure.d))
    if counts.max() == 0:
        return out
    if measure.kind == "discrete":
        cum = np.cumsum(measure.weights) / np.sum(measure.weights)
        stride = 2
    else:
        stride = 2 if measure.d <= 2 else 2 * ((measure.d + 1) // 2) + 1
    for jump in range(int(counts.max())):
        mask = counts > jump
        base = np.uint64(1 + stride * jump)
        if measure.kind == "discrete":
            ua = uniforms(seed, streams, planes, base).ravel()
            idx = np.searchsorted(cum, ua, side="right")
            idx = np.minimum(idx, measure.weights.size - 1)
            dirs = measure.directions[idx]
            ur = uniforms(seed, streams, planes, base + np.uint64(1)).ravel()
        elif measure.d == 1:
            us = uniforms(seed, streams, planes, base).ravel()
            dirs = np.where(us < 0.5, -1.0, 1.0)[:, None]
            ur = uniforms(seed, streams, planes, base + np.uint64(1)).ravel()
        elif measure.d == 2:
            ua = uniforms(seed, streams, planes, base).ravel()
            ang = 2.0 * np.pi * ua
            dirs = np.column_stack([np.cos(ang), np.sin(ang)])
            ur = uniforms(seed, streams, planes, base + np.uint64(1)).ravel()
        else:
            g = _gaussian_field(seed, streams, planes, base, measure.d)
            dirs = g / np.linalg.norm(g, axis=1)[:, None]
            ur = uniforms(
                seed, streams, planes,
                base + np.uint64(2 * ((measure.d + 1) // 2)),
            ).ravel()
        radii = cutoff * ur ** (-1.0 / measure.alpha)
        out += np.where(mask[:, None], radii[:, None] * dirs, 0.0)
    return out


def increments_field(spec: SamplerSpec, h: float, streams, planes) -> np.ndarray:
    """Increments for broadcastable (streams, planes) cells, flattened to
    (n_cells, d) in C order.

    The per-path Euler integrator calls this with streams varying along
    paths and a fixed step plane; `sample_increments` calls it with a fixed
    stream and varying planes.
    """
    if h <= 0.0:
        raise DomainError(f"time step must be positive, got {h}")
    streams = np.asarray(streams, dtype=np.uint64)
    planes = np.asarray(planes, dtype=np.uint64)
    if spec.method == "ray_sum":
        return _ray_sum_field(spec.measure, spec.seed, streams, planes, h)
    if spec.method == "subordination":
        return _subordination_field(spec.measure, spec.seed, streams, planes, h)
    return _compound_poisson_field(spec.measure, spec.cutoff, spec.seed, streams, planes, h)


def sample_increments(spec: SamplerSpec, h: float, n: int, start_index: int = 0) -> np.ndarray:
    """n increments of Z over time step h, shape (n, d).

    Increment i is a deterministic function of (spec.seed, spec.stream_id,
    start_index + i).
    """
    if n < 1:
        raise DomainError("need at least one increment")
    planes = np.uint64(start_index) + np.arange(n, dtype=np.uint64)
    return increments_field(spec, h, np.uint64(spec.stream_id), planes)


def sample_increment(spec: SamplerSpec, h: float, index: int = 0) -> np.ndarray:
    """One increment of Z over time step h, shape (d,)."""
    return sample_increments(spec, h, 1, start_index=index)[0]


def small_jump_bias(spec: SamplerSpec, h: float) -> float:
    """First-moment bound on the dropped small-jump mass of compound_poisson:
    h int_{|z| <= rho} |z| mu(dz) = h Sigma_tot rho^(1-alpha) / (1-alpha)."""
    if spec.method != "compound_poisson":
        return 0.0
    m = spec.measure
    return h * m.total_mass() * spec.cutoff ** (1.0 - m.alpha) / (1.0 - m.alpha)


def kernel_noise_params(spec: SamplerSpec, h: float):
    """(noise_mode, noise_a, noise_b) for the fused d=1 kernels, or None if
    the spec needs the generic per-step sampler."""
    m = spec.measure
    if m.d != 1:
        return None
    if spec.method == "ray_sum":
        pairs = m.pairs()
        if len(pairs) != 1:
            return None
        _, w = pairs[0]
        sigma = (w * ray_constant(m.alpha) * h) ** (1.0 / m.alpha)
        return (NOISE_RAY, sigma, m.alpha)
    if spec.method == "subordination":
        kappa = (m.isotropic_constant * isotropic_symbol_constant(1, m.alpha)) ** (1.0 / m.alpha)
        coef = kappa * np.sqrt(2.0) * h ** (1.0 / m.alpha)
        return (NOISE_SUBORDINATED, coef, m.alpha)
    return None


def empirical_cf_table(spec: SamplerSpec, h: float, xis, n: int):
    """Empirical characteristic function versus exp(-h psi) at each xi.

    Returns (max_abs_deviation, rows) with rows (xi, empirical, exact, dev);
    this is the primary correctness oracle for every sampler method.
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=np.float64))
    z = sample_increments(spec, h, n)
    rows = []
    max_dev = 0.0
    for xi in xis:
        emp = float(np.mean(np.cos(z @ xi)))
        exact = float(np.exp(-h * levy_symbol(spec.measure, xi)))
        dev = abs(emp - exact)
        max_dev = max(max_dev, dev)
        rows.append((xi.copy(), emp, exact, dev))
    return max_dev, rows


_INCREMENT_MAGIC = b"STBLINC1"


def write_increments(path, increments: np.ndarray) -> None:
    """Binary dump: magic 'STBLINC1', uint64 n, uint64 d, row-major float64,
    all little-endian."""
    arr = np.atleast_2d(np.asarray(increments, dtype="<f8"))
    with open(path, "wb") as fh:
        fh.write(_INCREMENT_MAGIC)
        fh.write(struct.pack("<QQ", arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes(order="C"))


def read_increments(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _INCREMENT_MAGIC:
            raise ConfigurationError(f"bad increment file magic {magic!r}")
        n, d = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(8 * n * d), dtype="<f8")
    return data.reshape(n, d).copy()
