"""Optimization methods with verified convergence behavior.

Subgradient methods (Polyak step, constant step, switching schemes),
smooth gradient descent under exact/inexact gradients, momentum and
accelerated methods, conditional gradient, projected SGD with averaging,
and kernel-smoothed zeroth-order search -- over a catalog of problems
with analytically known constants, plus a benchmark CLI that fits
empirical convergence rates.
"""

from . import bench, core, frankwolfe, momentum, smooth, stochastic, subgrad, zeroorder

__all__ = [
    "bench",
    "core",
    "frankwolfe",
    "momentum",
    "smooth",
    "stochastic",
    "subgrad",
    "zeroorder",
]

__version__ = "0.1.0"
