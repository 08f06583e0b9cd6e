"""Four-dimensional curvature algebra, weighted Weitzenbock checks, orbifold stability and central densities.

Subpackages and modules:

- :mod:`kahlerstab.exterior`: pointwise forms, wedge, interior product, Hodge star.
- :mod:`kahlerstab.curvature`: ``Lambda^2 (x) Lambda^2`` algebra and the Ricci decomposition.
- :mod:`kahlerstab.chart`: finite-difference geometry on model charts and identity checks.
- :mod:`kahlerstab.kahler`: J-splittings and Kahler-specific formulas.
- :mod:`kahlerstab.stability`: weighted self-dual curvature spectra and verdicts.
- :mod:`kahlerstab.density`: weighted polytope volumes and central densities.
"""

from .curvature import (
    AlgCurvature,
    BiForm,
    SymTensor2,
    compose,
    inverse_trace,
    kulkarni_nomizu,
    ricci_decompose,
    sharp,
    trace_map,
)
from .density import Polyhedron2, bccd_density, closed_form_density, minimize_density, weighted_volume
from .exterior import DualityBasis, KForm, hodge_star, interior, scaled_inner, wedge
from .stability import WeightedCurvatureInput, kahler_orbifold_spectrum, orbifold_verdict, weighted_selfdual

__version__ = "0.1.0"

__all__ = [
    "AlgCurvature", "BiForm", "DualityBasis", "KForm", "Polyhedron2", "SymTensor2",
    "WeightedCurvatureInput", "bccd_density", "closed_form_density", "compose", "hodge_star",
    "interior", "inverse_trace", "kahler_orbifold_spectrum", "kulkarni_nomizu", "minimize_density",
    "orbifold_verdict", "ricci_decompose", "scaled_inner", "sharp", "trace_map", "wedge",
    "weighted_selfdual", "weighted_volume",
]
