"""Desk-scale numerical laboratory for the homogeneous Landau equation with soft potentials."""

__version__ = "0.1.0"

from .grid import VelocityGrid, build_grid, gradient, gradient_adjoint, integrate
from .dist import (
    GridDistribution,
    Maxwellian,
    anisotropic_gaussian,
    from_values,
    gaussian_mixture,
    load_snapshot,
    maxwellian,
    normalize,
    random_corpus,
    save_snapshot,
)

__all__ = [
    "VelocityGrid", "build_grid", "gradient", "gradient_adjoint", "integrate",
    "GridDistribution", "Maxwellian", "anisotropic_gaussian", "from_values",
    "gaussian_mixture", "load_snapshot", "maxwellian", "normalize",
    "random_corpus", "save_snapshot", "__version__",
]
