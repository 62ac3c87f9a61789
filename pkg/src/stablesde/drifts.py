"""Drift functions and Holder-seminorm diagnostics.

The weak-uniqueness theory constrains the small-scale (1-alpha)-Holder
seminorm of the drift; this module provides the reference drifts (the
log-corrected radial drift that satisfies the smallness condition with
limit 0, and the odd clamped-power drift of the classical non-uniqueness
counterexample) together with a sampled seminorm estimator.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedDimensionError
from .kernels import (
    DRIFT_CONSTANT,
    DRIFT_EXAMPLE1,
    DRIFT_NONE,
    DRIFT_TANAKA,
    uniforms,
)

__all__ = [
    "Drift",
    "example1_drift",
    "tanaka_drift",
    "constant_drift",
    "zero_drift",
    "holder_seminorm_estimate",
    "drift_from_config",
]


@dataclass
class Drift:
    """A named bounded drift b: R^d -> R^d.

    ``evaluator`` is vectorized over leading axes: input shape (..., d),
    output the same.  ``kernel_id``/``kernel_params`` select the compiled
    fast path for d=1 simulation; drifts without a kernel id fall back to
    the generic NumPy integrator.
    """

    name: str
    dim: int
    evaluator: object
    sup_bound: float
    declared_seminorm: float | None = None
    params: dict = field(default_factory=dict)
    kernel_id: int | None = None
    kernel_params: tuple[float, float] = (0.0, 0.0)

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=np.float64))

    def scalar(self, x: float) -> float:
        if self.dim != 1:
            raise UnsupportedDimensionError("scalar() requires a 1D drift")
        return float(self.evaluator(np.array([x]))[0])

    def to_json(self) -> dict:
        return {"drift": self.name, **self.params, "d": self.dim}


def _example1_magnitude(r, alpha):
    # min(1, r^(1-alpha) / |log r|), continuous value 0 at r=0; the removable
    # point r=1 takes the clamp value 1
    r = np.asarray(r, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = r ** (1.0 - alpha) / np.abs(np.log(r))
    mag = np.where(r == 0.0, 0.0, np.where(np.isfinite(mag), mag, 1.0))
    return np.minimum(1.0, mag)


def example1_drift(alpha: float, scale: float = 1.0, d: int = 1) -> Drift:
    """Radial drift of magnitude scale * min(1, r^(1-alpha)/|log r|) applied
    along the first coordinate axis.

    Its local (1-alpha)-Holder seminorm vanishes in the small-separation
    limit, yet the drift lies in no better Holder class globally.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    if scale <= 0.0:
        raise DomainError(f"scale must be positive, got {scale}")
    if d < 1:
        raise UnsupportedDimensionError(str(d))

    def evaluator(x):
        x = np.asarray(x, dtype=np.float64)
        flat = np.atleast_2d(x)
        r = np.linalg.norm(flat, axis=-1)
        out = np.zeros_like(flat)
        out[..., 0] = scale * _example1_magnitude(r, alpha)
        return out.reshape(x.shape)

    return Drift(
        name="example1",
        dim=d,
        evaluator=evaluator,
        sup_bound=scale,
        declared_seminorm=None,
        params={"alpha": alpha, "scale": scale, "at_unit_radius": "clamp"},
        kernel_id=DRIFT_EXAMPLE1 if d == 1 else None,
        kernel_params=(alpha, scale),
    )


def tanaka_drift(beta: float, d: int = 1) -> Drift:
    """Odd clamped-power drift sign(x) * min(1, |x|^beta) on the line.

    For beta below 1-alpha this drift makes the weak solution started at 0
    non-unique; above the threshold well-posedness holds.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0,1), got {beta}")
    if d != 1:
        raise UnsupportedDimensionError("the odd clamped-power drift is one-dimensional")

    def evaluator(x):
        x = np.asarray(x, dtype=np.float64)
        return np.sign(x) * np.minimum(1.0, np.abs(x) ** beta)

    return Drift(
        name="tanaka",
        dim=1,
        evaluator=evaluator,
        sup_bound=1.0,
        declared_seminorm=None,
        params={"beta": beta},
        kernel_id=DRIFT_TANAKA,
        kernel_params=(beta, 0.0),
    )


def constant_drift(c, d: int | None = None) -> Drift:
    c_arr = np.atleast_1d(np.asarray(c, dtype=np.float64))
    if d is None:
        d = c_arr.size
    if c_arr.size != d:
        raise DomainError("constant vector length must match dimension")

    def evaluator(x):
        x = np.asarray(x, dtype=np.float64)
        return np.broadcast_to(c_arr, x.shape).copy()

    return Drift(
        name="constant",
        dim=d,
        evaluator=evaluator,
        sup_bound=float(np.linalg.norm(c_arr)),
        declared_seminorm=0.0,
        params={"c": c_arr.tolist()},
        kernel_id=DRIFT_CONSTANT if d == 1 else None,
        kernel_params=(float(c_arr[0]), 0.0),
    )


def zero_drift(d: int = 1) -> Drift:
    def evaluator(x):
        x = np.asarray(x, dtype=np.float64)
        return np.zeros_like(x)

    return Drift(
        name="zero",
        dim=d,
        evaluator=evaluator,
        sup_bound=0.0,
        declared_seminorm=0.0,
        params={},
        kernel_id=DRIFT_NONE,
        kernel_params=(0.0, 0.0),
    )


_SEMINORM_SEED = 0x5EED_0DD5


def _structured_pairs(drift: Drift, window: float):
    """Pairs anchored at the singular radii 0 and 1 plus straddling pairs."""
    d = drift.dim
    e1 = np.zeros(d)
    e1[0] = 1.0
    xs, ys = [], []
    t = window
    while t > 1e-13:
        for anchor in (np.zeros(d), e1, -e1):
            xs.append(anchor)
            ys.append(anchor + t * e1)
            xs.append(anchor)
            ys.append(anchor - t * e1)
        xs.append(-0.5 * t * e1)
        ys.append(0.5 * t * e1)
        t *= 0.5
    return np.array(xs), np.array(ys)


def holder_seminorm_estimate(
    drift: Drift,
    exponent: float,
    window: float = 1.0,
    pair_budget: int = 10**5,
    n_profile: int = 48,
):
    """Sampled lower bound of sup |b(x)-b(y)| / |x-y|^exponent.

    Returns (global_estimate, profile) where profile lists
    (delta, sup ratio over sampled pairs with separation < delta) for a
    geometric delta grid; the small-delta limit of that windowed sup is the
    quantity the uniqueness theorem bounds.  Pairs are generated from
    counter-based streams, so enlarging the budget only adds pairs and the
    estimate is monotone in pair_budget.  This is a certified lower bound
    only; no upper-bound claim is made.
    """
    if not 0.0 < exponent <= 1.0:
        raise DomainError(f"exponent must lie in (0,1], got {exponent}")
    if pair_budget < 10**4:
        raise DomainError("pair budget must be at least 1e4")
    d = drift.dim

    xs_s, ys_s = _structured_pairs(drift, window)

    n = pair_budget
    planes = np.repeat(np.arange(n, dtype=np.uint64), 2 + d)
    draws = np.tile(np.arange(2 + d, dtype=np.uint64), n)
    u = uniforms(_SEMINORM_SEED, 0, planes, draws).reshape(n, 2 + d)
    centers = 4.0 * u[:, 2:] - 2.0
    # log-uniform separations spanning the profile range
    sep = window * np.exp(np.log(1e-12) * u[:, 0])
    ang = u[:, 1]
    if d == 1:
        direction = np.where(ang < 0.5, -1.0, 1.0)[:, None]
    else:
        # deterministic direction from one uniform: works well for d=2, and
        # is only a sampling heuristic in higher d
        phi = 2.0 * math.pi * ang
        direction = np.zeros((n, d))
        direction[:, 0] = np.cos(phi)
        direction[:, 1] = np.sin(phi)
    xs_r = centers
    ys_r = centers + sep[:, None] * direction

    xs = np.vstack([xs_s, xs_r])
    ys = np.vstack([ys_s, ys_r])
    if d == 1:
        bx = drift(xs[:, 0]).reshape(-1, 1)
        by = drift(ys[:, 0]).reshape(-1, 1)
    else:
        bx = drift(xs)
        by = drift(ys)
    seps = np.linalg.norm(xs - ys, axis=1)
    diffs = np.linalg.norm(bx - by, axis=1)
    keep = seps > 0
    seps, diffs = seps[keep], diffs[keep]
    ratios = diffs / seps**exponent

    global_estimate = float(np.max(ratios))

    order = np.argsort(seps)
    seps_sorted = seps[order]
    prefix_max = np.maximum.accumulate(ratios[order])
    deltas = window * 2.0 ** (-np.arange(n_profile, dtype=np.float64))
    profile = []
    for delta in deltas:
        idx = np.searchsorted(seps_sorted, delta, side="left") - 1
        sup = float(prefix_max[idx]) if idx >= 0 else 0.0
        profile.append((float(delta), sup))
    return global_estimate, profile


def drift_from_config(doc: dict) -> Drift:
    """Construct a drift from a config mapping like {"drift": "tanaka", "beta": 0.25}."""
    kind = doc.get("drift")
    if kind == "tanaka":
        return tanaka_drift(float(doc["beta"]), d=int(doc.get("d", 1)))
    if kind == "example1":
        return example1_drift(
            float(doc["alpha"]), float(doc.get("scale", 1.0)), d=int(doc.get("d", 1))
        )
    if kind == "constant":
        return constant_drift(doc["c"])
    if kind == "zero":
        return zero_drift(int(doc.get("d", 1)))
    raise DomainError(f"unknown drift kind {kind!r}")
