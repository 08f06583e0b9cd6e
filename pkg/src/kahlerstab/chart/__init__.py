"""Model geometries on coordinate charts and finite-difference identity checks."""

from .fd import DEFAULT_SCHEME, FDScheme, derivative
from .fields import TensorFieldSpec, constant_field, random_field, stream
from .geometry import (
    PointJet,
    christoffel,
    div_f,
    laplacians,
    left_d,
    left_delta,
    lichnerowicz_f,
    point_jet,
    riemann,
    right_d,
    right_delta,
    soliton_residual,
    weighted_d,
    weighted_delta,
)
from .identities import REGISTRY, IdentityReport, UnknownIdentityError, fd_convergence, sweep_model, verify_identity
from .models import (
    CATALOG,
    MODEL_NAMES,
    ChartModel,
    StencilError,
    UnknownModelError,
    get_model,
    kahler_jet_model,
    normal_jet_model,
)

__all__ = [
    "CATALOG", "DEFAULT_SCHEME", "MODEL_NAMES", "REGISTRY", "ChartModel", "FDScheme", "IdentityReport",
    "PointJet", "StencilError", "TensorFieldSpec", "UnknownIdentityError", "UnknownModelError",
    "christoffel", "constant_field", "derivative", "div_f", "fd_convergence", "get_model",
    "kahler_jet_model", "laplacians", "left_d", "left_delta", "lichnerowicz_f", "normal_jet_model",
    "point_jet", "random_field", "riemann", "right_d", "right_delta", "soliton_residual", "stream",
    "sweep_model", "verify_identity", "weighted_d", "weighted_delta",
]
