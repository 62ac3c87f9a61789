"""Euler simulation of dX = b(X) dt + dZ and Monte Carlo resolvent estimates.

The explicit scheme X_{k+1} = X_k + b(X_k) h + dZ_k drives three estimators:

* full path ensembles (trajectories retained);
* the resolvent functional int_0^inf exp(-lam t) f(X_t) dt, truncated at a
  horizon T with quantified tail bias exp(-lam T) ||f||_inf / lam and
  estimated by left-endpoint quadrature over streaming paths;
* the start-point sensitivity experiment around the uniqueness threshold:
  gap(eps) = P(X_T > c | X_0 = +eps) - P(X_T > c | X_0 = -eps).

Truncation parameters (T, m, R) follow the explicit exit-probability bounds
for a C^2 cutoff g: T controls the time tail, m splits the jump measure,
and R is the escape radius that keeps paths inside the window up to T with
probability deficit below 3 lam eps / (4 ||f||_inf).
"""

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bump import CUT_GRAD_NORM, CUT_HESS_NORM, CUT_SUP_NORM, Bump
from .drifts import Drift
from .errors import ConfigurationError, DomainError
from .measures import SpectralMeasure
from .sampling import SamplerSpec, increments_field, kernel_noise_params

__all__ = [
    "PathEnsemble",
    "TruncationParams",
    "ResolventEstimate",
    "euler_paths",
    "mc_resolvent",
    "select_truncation",
    "exit_probability",
    "path_statistics",
    "bifurcation_gap",
    "write_ensemble",
    "read_ensemble",
]

_INVALID_FRACTION_LIMIT = 1e-3
_ENSEMBLE_BYTE_LIMIT = 2 * 10**9
_BATCHES_FOR_STDERR = 100


@dataclass
class PathEnsemble:
    """N Euler trajectories on the uniform grid t_k = k h, 0 <= k <= K."""

    times: np.ndarray
    states: np.ndarray  # (N, K+1, d)
    seed: int
    stream_ids: np.ndarray
    drift_name: str
    sampler: SamplerSpec
    invalid: np.ndarray  # (N,) uint8; flagged paths are frozen, not removed

    def __post_init__(self):
        k = self.times.size - 1
        h = self.times[1] - self.times[0] if k >= 1 else 0.0
        if k >= 1 and abs(k * h - self.times[-1]) > 1e-12 * max(1.0, self.times[-1]):
            raise DomainError("time grid is not uniform")

    @property
    def n_paths(self) -> int:
        return self.states.shape[0]

    @property
    def h(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def d(self) -> int:
        return self.states.shape[2]

    def valid_states(self) -> np.ndarray:
        return self.states[self.invalid == 0]


@dataclass
class TruncationParams:
    """Horizon, jump split and escape radius for the truncated functional.

    epsilon is the target bias: T satisfies exp-tail control (E-T), m makes
    the big-jump intensity small (E-m), and R dominates the small-jump
    quadratic variation plus drift displacement (E-R).  g_profile holds
    (sup, grad, hess) norms of the radial cutoff used in those bounds.
    """

    epsilon: float
    T: float
    m: float
    R: float
    g_profile: tuple[float, float, float] = (CUT_SUP_NORM, CUT_GRAD_NORM, CUT_HESS_NORM)

    def validate(self, lam: float, f_sup: float, b_sup: float,
                 measure: SpectralMeasure) -> None:
        """Assert the three defining inequalities."""
        g_sup, g_grad, g_hess = self.g_profile
        if self.T <= abs(math.log(lam * self.epsilon / (4.0 * f_sup)) / lam):
            raise DomainError("T violates the horizon bound")
        if self.T * measure.tail_mass(self.m) > self.epsilon / (4.0 * g_sup) * (1 + 1e-12):
            raise DomainError("m violates the jump-split bound")
        rhs = math.sqrt(
            4.0 * self.T * f_sup * g_hess * measure.truncated_second_moment(self.m)
            / (self.epsilon * lam)
        ) + 4.0 * b_sup * g_grad / self.epsilon
        if self.R <= rhs:
            raise DomainError("R violates the escape-radius bound")

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "T": self.T,
            "m": self.m,
            "R": self.R,
            "g_profile": list(self.g_profile),
        }


@dataclass
class ResolventEstimate:
    """Monte Carlo value of the truncated resolvent functional at one point."""

    x: float
    lam: float
    value: float
    std_error: float
    tail_bias_bound: float
    N: int
    h: float
    seed: int = 0
    n_invalid: int = 0
    backend: str = field(default_factory=kernels.backend_name)

    def csv_row(self) -> str:
        return ",".join(
            f"{v:.17g}" if isinstance(v, float) else str(v)
            for v in (self.x, self.lam, self.value, self.std_error,
                      self.tail_bias_bound, self.N, self.h, self.seed)
        )

    CSV_HEADER = "x,lambda,value,std_error,tail_bias,N,h,seed"


def select_truncation(
    epsilon: float,
    lam: float,
    f_sup: float,
    b_sup: float,
    measure: SpectralMeasure,
    t_floor: float = 1e-6,
) -> TruncationParams:
    """Smallest admissible (T, m, R) for a target bias epsilon.

    T is the first point of the 1.1-geometric grid strictly above the
    horizon bound (floored at t_floor, which matters only in the
    large-epsilon regime where the bound crosses zero); m solves the
    jump-split bound with equality via mu(|z|>m) = Sigma m^-alpha / alpha;
    R strictly exceeds its bound by a relative hair.
    """
    if epsilon <= 0.0 or lam <= 0.0 or f_sup <= 0.0:
        raise DomainError("epsilon, lambda and f_sup must be positive")
    t_bound = abs(math.log(lam * epsilon / (4.0 * f_sup)) / lam)
    if t_bound <= t_floor:
        T = t_floor
    else:
        k = math.floor(math.log(t_bound) / math.log(1.1))
        T = 1.1**k
        while T <= t_bound:
            T *= 1.1
    alpha = measure.alpha
    sigma_tot = measure.total_mass()
    g_sup, g_grad, g_hess = CUT_SUP_NORM, CUT_GRAD_NORM, CUT_HESS_NORM
    # T * Sigma m^-alpha / alpha = eps / (4 g_sup)
    m = (4.0 * g_sup * T * sigma_tot / (alpha * epsilon)) ** (1.0 / alpha)
    second = measure.truncated_second_moment(m)
    rhs = math.sqrt(4.0 * T * f_sup * g_hess * second / (epsilon * lam)) \
        + 4.0 * b_sup * g_grad / epsilon
    R = rhs * (1.0 + 1e-9)
    return TruncationParams(epsilon=epsilon, T=T, m=m, R=R,
                            g_profile=(g_sup, g_grad, g_hess))


def _as_start_points(x0, d: int, n: int) -> np.ndarray:
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim == 0:
        if d != 1:
            raise DomainError("scalar start point requires d=1")
        return np.full((n, 1), float(x0))
    if x0.ndim == 1:
        if x0.size == d:
            return np.tile(x0, (n, 1))
        if d == 1 and x0.size == n:
            return x0[:, None].copy()
        raise DomainError("start point shape does not match dimension")
    if x0.shape == (n, d):
        return x0.copy()
    raise DomainError("start points must be one point or one point per path")


def _check_invalid(invalid: np.ndarray) -> None:
    frac = float(np.mean(invalid != 0))
    if frac > _INVALID_FRACTION_LIMIT:
        raise RuntimeError(
            f"{100 * frac:.2f}% of paths hit non-finite states "
            f"(limit {100 * _INVALID_FRACTION_LIMIT}%)"
        )


def _generic_paths(x0_pts, drift, sampler, K, h):
    """NumPy fallback integrator for any dimension / method combination."""
    n, d = x0_pts.shape
    states = np.empty((n, K + 1, d))
    states[:, 0, :] = x0_pts
    x = x0_pts.copy()
    invalid = np.zeros(n, dtype=np.uint8)
    alive = np.ones(n, dtype=bool)
    if sampler is not None:
        streams = np.uint64(sampler.stream_id) + np.arange(n, dtype=np.uint64)
    for k in range(K):
        if sampler is None:
            z = 0.0
        else:
            z = increments_field(sampler, h, streams, np.uint64(k))
        xn = x + h * drift(x) + z
        bad = alive & ~np.all(np.isfinite(xn), axis=1)
        if bad.any():
            invalid[bad] = 1
            alive &= ~bad
        x = np.where(alive[:, None], xn, x)
        states[:, k + 1, :] = x
    return states, invalid


def _steps_for(T: float, h: float) -> int:
    if h <= 0.0 or T < h:
        raise DomainError("need h > 0 and T >= h")
    K = round(T / h)
    if abs(K * h - T) > 1e-12 * max(1.0, abs(T)):
        raise DomainError(f"horizon {T} is not an integer multiple of h={h}")
    return K


def euler_paths(x0, drift: Drift, sampler: SamplerSpec | None, T: float, h: float,
                N: int) -> PathEnsemble:
    """Simulate N Euler paths on [0, T] with step h.

    Path p draws its noise from stream sampler.stream_id + p, so ensembles
    are reproducible for any chunking or thread count.  sampler=None turns
    the noise off (deterministic ODE limit of the scheme).  Paths reaching
    a non-finite state are frozen and flagged; more than 0.1% such paths
    aborts the run.
    """
    if N < 1:
        raise DomainError("need at least one path")
    K = _steps_for(T, h)
    d = sampler.measure.d if sampler is not None else drift.dim
    if drift.dim != d:
        raise ConfigurationError("drift dimension does not match the measure")
    if N * (K + 1) * d * 8 > _ENSEMBLE_BYTE_LIMIT:
        raise ConfigurationError(
            "ensemble too large to materialize; use path_statistics instead"
        )
    x0_pts = _as_start_points(x0, d, N)
    seed = sampler.seed if sampler is not None else 0
    stream0 = sampler.stream_id if sampler is not None else 0
    if sampler is None:
        params = (kernels.NOISE_NONE, 0.0, 0.0)
    else:
        params = kernel_noise_params(sampler, h)
    if d == 1 and params is not None and drift.kernel_id is not None:
        states, invalid = kernels.sim_paths_1d(
            seed, stream0, x0_pts[:, 0], K, h,
            drift.kernel_id, drift.kernel_params[0], drift.kernel_params[1],
            *params,
        )
        states = states[:, :, None]
    else:
        states, invalid = _generic_paths(x0_pts, drift, sampler, K, h)
    _check_invalid(invalid)
    return PathEnsemble(
        times=h * np.arange(K + 1),
        states=states,
        seed=seed,
        stream_ids=np.uint64(stream0) + np.arange(N, dtype=np.uint64),
        drift_name=drift.name,
        sampler=sampler,
        invalid=invalid,
    )


def path_statistics(x0, drift: Drift, sampler: SamplerSpec | None, T: float, h: float,
                    N: int, lam: float = 0.0, f: Bump | None = None,
                    nthreads: int = 0):
    """Streaming per-path statistics without storing trajectories.

    Returns (acc, max_disp, x_final, invalid): acc is the left-endpoint
    quadrature of exp(-lam t) f(X_t) over [0, T) (zero when f is None),
    max_disp = sup_k |X_k - X_0|, x_final = X_T.  d=1 only; heavy runs use
    the compiled kernel when available.
    """
    K = _steps_for(T, h)
    d = sampler.measure.d if sampler is not None else drift.dim
    if d != 1 or drift.dim != 1:
        raise DomainError("path_statistics is one-dimensional")
    x0_pts = _as_start_points(x0, 1, N)[:, 0]
    params = (kernels.NOISE_NONE, 0.0, 0.0) if sampler is None else kernel_noise_params(sampler, h)
    if f is None:
        f_center, f_radius, f_sup = 0.0, 1.0, 0.0
    else:
        if f.d != 1:
            raise DomainError("test function must be one-dimensional")
        f_center, f_radius, f_sup = float(f.center[0]), f.radius, f.height
    if params is not None and drift.kernel_id is not None:
        seed = sampler.seed if sampler is not None else 0
        stream0 = sampler.stream_id if sampler is not None else 0
        return kernels.sim_stats_1d(
            seed, stream0, x0_pts, K, h,
            drift.kernel_id, drift.kernel_params[0], drift.kernel_params[1],
            *params, lam, f_center, f_radius, f_sup, nthreads,
        )
    # generic streaming loop (stepwise, memory-light)
    n = x0_pts.size
    stream0 = sampler.stream_id if sampler is not None else 0
    streams = np.uint64(stream0) + np.arange(n, dtype=np.uint64)
    x = x0_pts.copy()
    acc = np.zeros(n)
    maxd = np.zeros(n)
    invalid = np.zeros(n, dtype=np.uint8)
    alive = np.ones(n, dtype=bool)
    bump = Bump(center=[f_center], radius=f_radius, height=f_sup) if f_sup else None
    for k in range(K):
        if bump is not None:
            acc += np.where(alive, math.exp(-lam * k * h) * h * bump(x), 0.0)
        if sampler is None:
            z = 0.0
        else:
            z = increments_field(sampler, h, streams, np.uint64(k))[:, 0]
        xn = x + h * drift(x) + z
        bad = alive & ~np.isfinite(xn)
        if bad.any():
            invalid[bad] = 1
            alive &= ~bad
        x = np.where(alive, xn, x)
        maxd = np.where(alive, np.maximum(maxd, np.abs(x - x0_pts)), maxd)
    acc = np.where(invalid == 1, np.nan, acc)
    xf = np.where(invalid == 1, np.nan, x)
    return acc, maxd, xf, invalid


def mc_resolvent(x, lam: float, f: Bump, drift: Drift, sampler: SamplerSpec,
                 trunc: TruncationParams, h: float, N: int,
                 nthreads: int = 0) -> ResolventEstimate:
    """Monte Carlo estimate of E int_0^inf exp(-lam t) f(X_t) dt from X_0 = x.

    Left-endpoint quadrature on [0, T] with T = ceil(trunc.T / h) h; the
    reported tail_bias_bound exp(-lam T) ||f||_inf / lam covers the
    discarded time tail.  std_error comes from 100 consecutive-path batch
    means; the value itself is the pairwise-summed path average, fixed by
    (seed, stream) alone.
    """
    if lam <= 0.0:
        raise DomainError("lambda must be positive")
    K = math.ceil(trunc.T / h - 1e-12)
    T_eff = K * h
    acc, _, _, invalid = path_statistics(
        x, drift, sampler, T_eff, h, N, lam=lam, f=f, nthreads=nthreads
    )
    _check_invalid(invalid)
    vals = acc[invalid == 0]
    n_valid = vals.size
    value = float(np.sum(vals) / n_valid)
    nb = min(_BATCHES_FOR_STDERR, n_valid)
    bs = n_valid // nb
    batch_means = np.mean(vals[: nb * bs].reshape(nb, bs), axis=1)
    std_error = float(np.std(batch_means, ddof=1) / math.sqrt(nb)) if nb > 1 else math.inf
    tail = math.exp(-lam * T_eff) * f.sup_norm / lam
    return ResolventEstimate(
        x=float(np.atleast_1d(np.asarray(x, dtype=np.float64))[0]),
        lam=lam,
        value=value,
        std_error=std_error,
        tail_bias_bound=tail,
        N=N,
        h=h,
        seed=sampler.seed,
        n_invalid=int(np.sum(invalid != 0)),
    )


def exit_probability(ensemble: PathEnsemble, radius: float, horizon: float) -> float:
    """Fraction of paths with sup_{t_k <= horizon} |X_k - X_0| >= radius.

    Grid-time proxy for the exit time: excursions between grid points are
    missed, so this underestimates the continuous-time exit probability.
    """
    if radius < 0.0:
        raise DomainError("radius must be nonnegative")
    if horizon > ensemble.horizon + 1e-12:
        raise DomainError("horizon exceeds the simulated range")
    keep = ensemble.invalid == 0
    states = ensemble.states[keep]
    sel = ensemble.times <= horizon + 1e-12
    disp = np.linalg.norm(states[:, sel, :] - states[:, :1, :], axis=2)
    return float(np.mean(np.max(disp, axis=1) >= radius))


def bifurcation_gap(beta: float, alpha: float, epsilons, T: float, h: float,
                    N: int, threshold: float = 0.5, seed: int = 0,
                    nthreads: int = 0):
    """gap(eps) = P(X_T > c | X_0 = +eps) - P(X_T > c | X_0 = -eps) for the
    odd clamped-power drift |x|^beta and standard symmetric stable noise.

    The two start points use disjoint stream blocks (no common random
    numbers).  Below the uniqueness threshold (beta < 1 - alpha) the gap
    stays bounded away from zero as eps decreases; above it the gap decays.
    """
    from .drifts import tanaka_drift
    from .measures import standard_symmetric_1d

    epsilons = [float(e) for e in epsilons]
    if any(e < 0 for e in epsilons):
        raise DomainError("epsilons must be nonnegative")
    if any(b > a for a, b in zip(epsilons, epsilons[1:])):
        raise DomainError("epsilons must be nonincreasing")
    if not 0.0 < threshold < 1.0:
        raise DomainError("threshold must lie in (0,1)")
    drift = tanaka_drift(beta)
    measure = standard_symmetric_1d(alpha)
    out = []
    stream = 0
    for eps in epsilons:
        probs = []
        for sign in (+1.0, -1.0):
            sampler = SamplerSpec(measure=measure, method="ray_sum",
                                  seed=seed, stream_id=stream)
            stream += N
            _, _, xf, invalid = path_statistics(
                sign * eps, drift, sampler, T, h, N, nthreads=nthreads
            )
            _check_invalid(invalid)
            good = invalid == 0
            probs.append(float(np.mean(xf[good] > threshold)))
        out.append((eps, probs[0] - probs[1]))
    return out


_ENSEMBLE_MAGIC = b"PATHENS1"


def write_ensemble(path, ensemble: PathEnsemble) -> None:
    """Binary dump: magic 'PATHENS1', uint64 (N, K+1, d), float64 h, then
    row-major float64 states, all little-endian."""
    st = np.ascontiguousarray(ensemble.states, dtype="<f8")
    n, k1, d = st.shape
    with open(path, "wb") as fh:
        fh.write(_ENSEMBLE_MAGIC)
        fh.write(struct.pack("<QQQd", n, k1, d, ensemble.h))
        fh.write(st.tobytes(order="C"))


def read_ensemble(path):
    """Read back (states, h) from a PATHENS1 file."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _ENSEMBLE_MAGIC:
            raise ConfigurationError(f"bad ensemble file magic {magic!r}")
        n, k1, d, h = struct.unpack("<QQQd", fh.read(32))
        data = np.frombuffer(fh.read(8 * n * k1 * d), dtype="<f8")
    return data.reshape(n, k1, d).copy(), h
