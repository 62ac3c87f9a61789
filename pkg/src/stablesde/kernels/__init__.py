"""Hot-loop kernels with a compiled core and a NumPy fallback.

The compiled extension (``stablesde.kernels._core``, Cython) and the pure
NumPy backend (``stablesde.kernels._ref``) implement the same API:

* counter-based Philox4x64-10 random streams, addressed as
  ``(seed, stream, plane, draw)`` so that any draw is reproducible
  independently of chunking, threading or evaluation order;
* Chambers-Mallows-Stuck transforms for symmetric and one-sided stable
  variates;
* fused 1D Euler path loops (full trajectories, or streaming per-path
  statistics for Monte Carlo functionals).

The integer random streams are bit-identical across backends.  Transformed
variates agree only to floating-point rounding (different libm code paths),
so simulation output is guaranteed bit-reproducible per backend, not across
backends; run manifests record which backend produced a result.

Selection: the compiled core is preferred when importable.  Set
``STABLESDE_BACKEND=python`` or ``=compiled`` to force one.
"""

import os

_requested = os.environ.get("STABLESDE_BACKEND", "").strip().lower()

if _requested in ("python", "ref", "numpy"):
    from . import _ref as _backend

    BACKEND = "python"
elif _requested in ("compiled", "core", "cython"):
    from . import _core as _backend  # type: ignore[attr-defined]

    BACKEND = "compiled"
else:
    try:
        from . import _core as _backend  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _ref as _backend

        BACKEND = "python"

philox_block = _backend.philox_block
uniforms = _backend.uniforms
cms_symmetric = _backend.cms_symmetric
cms_one_sided = _backend.cms_one_sided
sim_paths_1d = _backend.sim_paths_1d
sim_stats_1d = _backend.sim_stats_1d

DRIFT_NONE = 0
DRIFT_CONSTANT = 1
DRIFT_TANAKA = 2
DRIFT_EXAMPLE1 = 3

NOISE_NONE = 0
NOISE_RAY = 1
NOISE_SUBORDINATED = 2


def backend_name() -> str:
    """Name of the active kernel backend ('compiled' or 'python')."""
    return BACKEND


def get_backend(name: str):
    """Return a specific backend module ('compiled' or 'python').

    Used by parity tests and the backend benchmark; raises ImportError if
    the compiled core was not built.
    """
    if name == "python":
        from . import _ref

        return _ref
    if name == "compiled":
        from . import _core  # type: ignore[attr-defined]

        return _core
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _core  # noqa: F401

        out.insert(0, "compiled")
    except ImportError:
        pass
    return out
