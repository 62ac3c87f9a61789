"""Numerical laboratory for SDEs driven by supercritical symmetric stable noise.

dX_t = b(X_t) dt + dZ_t, where Z is a symmetric alpha-stable process with
alpha in (0,1) and spectral (angular) measure Sigma.  The package certifies
the cone condition on Levy measures, computes the drift-smallness threshold
for weak uniqueness, simulates paths, estimates resolvent functionals by
Monte Carlo, solves the nonlocal resolvent equation on a 1D grid with a
monotone scheme, and exposes the uniqueness/non-uniqueness threshold
experiment via the `stablesde` command-line tool.
"""

from .kernels import backend_name

__version__ = "0.1.0"

__all__ = ["__version__", "backend_name"]
