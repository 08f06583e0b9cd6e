"""Explicit model geometries on coordinate boxes.

All metric and potential callables are vectorized over leading axes of the
point array.  The catalog entries are exact gradient solitons
``Ric + Hess f = (lambda/2) g`` with the additive constant of ``f`` fixed by
``f = scal + |grad f|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..curvature import AlgCurvature, BianchiError, bianchi_defect
from .fd import DEFAULT_SCHEME, FDScheme, derivative

DIM = 4


class StencilError(ValueError):
    """Raised when a finite-difference stencil would leave the chart domain."""


class UnknownModelError(KeyError):
    pass


def standard_complex_structure(x) -> np.ndarray:
    """``J d0 = d1, J d2 = d3`` as a batched ``(..., 4, 4)`` array acting on vectors."""
    x = np.asarray(x, dtype=float)
    j = np.zeros((4, 4))
    j[1, 0], j[0, 1], j[3, 2], j[2, 3] = 1.0, -1.0, 1.0, -1.0
    return np.broadcast_to(j, x.shape[:-1] + (4, 4))


@dataclass(frozen=True, eq=False)
class ChartModel:
    name: str
    metric: Callable
    potential_f: Callable
    lam: float
    lower: np.ndarray
    upper: np.ndarray
    complex_structure: Callable | None = None
    einstein: bool = False
    soliton_everywhere: bool = True
    description: str = ""
    scal_hint: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def is_kahler(self) -> bool:
        return self.complex_structure is not None

    def require_interior(self, x, scheme: FDScheme = DEFAULT_SCHEME, steps: int = 10) -> None:
        x = np.asarray(x, dtype=float)
        margin = steps * scheme.step
        if np.any(x - margin < self.lower) or np.any(x + margin > self.upper):
            raise StencilError(
                f"point {np.round(x, 6).tolist()} is within {steps} FD steps of the {self.name} chart boundary"
            )

    def sample_points(self, rng: np.random.Generator, count: int, shrink: float = 0.8) -> np.ndarray:
        centre = 0.5 * (self.lower + self.upper)
        half = 0.5 * (self.upper - self.lower) * shrink
        return centre + half * rng.uniform(-1.0, 1.0, size=(count, DIM))


# -- building blocks ------------------------------------------------------------


def _conformal(*blocks):
    """Block-diagonal metric: ``factor(y) delta`` on each ``(dims, factor)`` block, flat elsewhere."""

    def metric(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (4, 4))
        for i in range(4):
            out[..., i, i] = 1.0
        for dims, factor_fn in blocks:
            factor = factor_fn(x[..., list(dims)])
            for i in dims:
                out[..., i, i] = factor
        return out

    return metric


def _sphere_factor(radius_sq: float):
    """Stereographic round metric of radius ``sqrt(radius_sq)``: ``(1 + |y|^2/(4 r^2))^-2``."""
    return lambda y: (1.0 + np.sum(y**2, axis=-1) / (4.0 * radius_sq)) ** -2


def _hyperbolic_factor(radius_sq: float):
    return lambda y: (1.0 - np.sum(y**2, axis=-1) / (4.0 * radius_sq)) ** -2


def _flat(x):
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(np.eye(4), x.shape[:-1] + (4, 4)).copy()


def _const(value):
    return lambda x: np.full(np.asarray(x).shape[:-1], float(value))


def kahler_metric_from_hessian(hess_fn):
    """Kahler metric of a potential: the J-invariant part of its real Hessian, halved.

    ``g = (H + J^T H J) / 4`` for the standard ``J``; a potential ``|x|^2``
    gives the Euclidean metric.
    """

    def metric(x):
        h = hess_fn(x)
        j = standard_complex_structure(x)
        return 0.25 * (h + np.swapaxes(j, -1, -2) @ h @ j)

    return metric


#: Fubini-Study potential scale giving Ric = g/2 (fixed by the curvature test)
FS_SCALE = 12.0


def _fs_hessian(x):
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x**2, axis=-1)[..., None, None]
    outer = x[..., :, None] * x[..., None, :]
    return FS_SCALE * (2.0 * np.eye(4) / (1.0 + r2) - 4.0 * outer / (1.0 + r2) ** 2)


# -- catalog -----------------------------------------------------------------------


def _box(half: float) -> tuple[np.ndarray, np.ndarray]:
    return -half * np.ones(4), half * np.ones(4)


def _catalog() -> dict[str, ChartModel]:
    models = {}
    lo, hi = _box(3.0)
    models["gaussian"] = ChartModel(
        "gaussian", _flat, lambda x: 0.25 * np.sum(np.asarray(x) ** 2, axis=-1), 1.0, lo, hi,
        complex_structure=standard_complex_structure, description="flat C^2, f = |x|^2/4",
        scal_hint=0.0,
    )
    lo, hi = _box(2.5)
    models["sphere4"] = ChartModel(
        "sphere4", _conformal(((0, 1, 2, 3), _sphere_factor(6.0))), _const(2.0), 1.0,
        lo, hi, einstein=True, description="round S^4 of radius sqrt(6), stereographic chart", scal_hint=2.0,
    )
    models["cyl-s3xr"] = ChartModel(
        "cyl-s3xr", _conformal(((0, 1, 2), _sphere_factor(4.0))),
        lambda x: 0.25 * np.asarray(x)[..., 3] ** 2 + 1.5, 1.0, lo, hi,
        description="S^3 of radius 2 times a line (t = x3)", scal_hint=1.5,
    )
    models["cyl-s2xr2"] = ChartModel(
        "cyl-s2xr2", _conformal(((0, 1), _sphere_factor(2.0))),
        lambda x: 0.25 * np.sum(np.asarray(x)[..., 2:] ** 2, axis=-1) + 1.0, 1.0, lo, hi,
        complex_structure=standard_complex_structure,
        description="S^2 of radius sqrt(2) times C", scal_hint=1.0,
    )
    lo, hi = _box(1.5)
    models["fubini-study"] = ChartModel(
        "fubini-study", kahler_metric_from_hessian(_fs_hessian), _const(2.0), 1.0, lo, hi,
        complex_structure=standard_complex_structure, einstein=True,
        description="CP^2 in an affine chart, scaled to Ric = g/2", scal_hint=2.0,
    )
    lo, hi = _box(2.5)
    models["s2xs2"] = ChartModel(
        "s2xs2",
        _conformal(((0, 1), _sphere_factor(2.0)), ((2, 3), _sphere_factor(2.0))),
        _const(2.0), 1.0, lo, hi, complex_structure=standard_complex_structure, einstein=True,
        description="S^2 x S^2, both radii sqrt(2)", scal_hint=2.0,
    )
    lo, hi = _box(1.5)
    models["hyperbolic4"] = ChartModel(
        "hyperbolic4", _conformal(((0, 1, 2, 3), _hyperbolic_factor(6.0))),
        _const(0.0), -1.0, lo, hi, einstein=True,
        description="hyperbolic 4-space, ball model with Ric = -g/2", scal_hint=-2.0,
    )
    lo, hi = _box(3.0)
    models["flat-c2"] = ChartModel(
        "flat-c2", _flat, _const(0.0), 0.0, lo, hi, complex_structure=standard_complex_structure,
        description="flat C^2 as a steady soliton with f = 0", scal_hint=0.0,
    )
    return models


CATALOG = _catalog()
MODEL_NAMES = tuple(CATALOG)


def get_model(name: str) -> ChartModel:
    try:
        return CATALOG[name]
    except KeyError:
        raise UnknownModelError(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}") from None


# -- jets with prescribed data ---------------------------------------------------


def _quadratic(coeff_b, coeff_a, constant=0.0):
    def f(x):
        x = np.asarray(x, dtype=float)
        return constant + x @ coeff_b + 0.5 * np.einsum("...i,ij,...j->...", x, coeff_a, x)

    return f


def normal_jet_model(
    curvature: AlgCurvature,
    rng: np.random.Generator | None = None,
    half_width: float = 0.4,
    name: str = "normal-jet",
) -> ChartModel:
    """Metric ``delta_ij - R_ikjl x^k x^l / 3``, realizing ``R`` at the origin.

    A random quadratic potential is attached when ``rng`` is given (the
    general identities hold for any ``f``); the model is not a soliton.
    """
    tensor = curvature.tensor
    if bianchi_defect(curvature) > 1e-9 * max(1.0, float(np.abs(curvature.entries).max())):
        raise BianchiError("normal-jet models need an algebraic curvature tensor")

    def metric(x):
        x = np.asarray(x, dtype=float)
        return np.eye(4) - np.einsum("ikjl,...k,...l->...ij", tensor, x, x) / 3.0

    if rng is None:
        pot = _const(0.0)
    else:
        a = rng.normal(size=(4, 4))
        pot = _quadratic(rng.normal(size=4), 0.5 * (a + a.T), rng.normal())
    lo, hi = _box(half_width)
    return ChartModel(
        name, metric, pot, 0.0, lo, hi, soliton_everywhere=False,
        description="normal-coordinate jet of a prescribed algebraic curvature",
        meta={"curvature": curvature},
    )


def kahler_jet_model(
    rng: np.random.Generator,
    lam: float | None = None,
    eps: float = 0.3,
    half_width: float = 0.3,
    scheme: FDScheme = DEFAULT_SCHEME,
    name: str = "kahler-jet",
) -> ChartModel:
    """Random Kahler metric from a perturbed potential, a soliton at the origin only.

    The potential is ``|x|^2 + eps (cubic + quartic)`` with random symmetric
    coefficients, and ``f`` is the quadratic polynomial for which
    ``Ric + Hess f = (lam/2) g`` holds at the origin.
    """
    from .geometry import christoffel, coordinate_ricci

    cubic = _random_symmetric_tensor(rng, 3)
    quartic = _random_symmetric_tensor(rng, 4)

    def hess(x):
        x = np.asarray(x, dtype=float)
        return (
            2.0 * np.eye(4)
            + eps * 6.0 * np.einsum("ijk,...k->...ij", cubic, x)
            + eps * 12.0 * np.einsum("ijkl,...k,...l->...ij", quartic, x, x)
        )

    metric = kahler_metric_from_hessian(hess)
    lo, hi = _box(half_width)
    if lam is None:
        lam = float(rng.uniform(-1.0, 1.0))
    provisional = ChartModel(name, metric, _const(0.0), lam, lo, hi, complex_structure=standard_complex_structure)
    origin = np.zeros(4)
    b = rng.normal(size=4)
    gamma = christoffel(provisional, origin, scheme)
    ric = coordinate_ricci(provisional, origin, scheme)
    a = 0.5 * lam * metric(origin) - ric + np.einsum("rij,r->ij", gamma, b)
    a = 0.5 * (a + a.T)
    return ChartModel(
        name, metric, _quadratic(b, a), lam, lo, hi, complex_structure=standard_complex_structure,
        soliton_everywhere=False, description="random Kahler potential jet, soliton at the origin",
        meta={"soliton_point": origin},
    )


def _random_symmetric_tensor(rng: np.random.Generator, order: int) -> np.ndarray:
    from ..exterior import _permutations

    t = rng.normal(size=(4,) * order)
    out = np.zeros_like(t)
    perms = _permutations(order)
    for perm, _sign in perms:
        out += np.transpose(t, perm)
    return out / len(perms)


def potential_gradient(model: ChartModel, x, scheme: FDScheme = DEFAULT_SCHEME) -> np.ndarray:
    return derivative(model.potential_f, x, scheme)
