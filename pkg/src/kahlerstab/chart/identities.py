"""Registry of pointwise Weitzenbock-type identities checked by finite differences.

Each identity evaluates a left side and a right side at one chart point in
the Gram-Schmidt frame.  Differential terms on both sides come from the
finite-difference operators of :mod:`.geometry`; the curvature terms come
from :mod:`kahlerstab.curvature` acting on the :class:`PointJet`.

Relative error is ``|lhs - rhs| / max(|lhs|, |rhs|, |term_1|, ...)``: the
individual right-side terms are included so that a cancellation between
large terms is measured against their size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..curvature import (
    act_form_arr,
    compose_arr,
    identity_arr,
    identity_half_arr,
    kn_arr,
    outer_arr,
    project_arr,
    sharp_arr,
    trace_arr,
)
from .fd import DEFAULT_SCHEME, FDScheme
from .fields import TensorFieldSpec
from .geometry import (
    PointJet,
    covd,
    directional,
    drift_laplacian,
    hodge_laplacian,
    kahler_form_field,
    lichnerowicz_f,
    point_jet,
    rough_laplacian,
    trace_field,
)
from .models import ChartModel

DEFAULT_TOL = 1e-5
#: absolute error below which a check passes even if both sides vanish
ABS_FLOOR = 1e-9


class UnknownIdentityError(KeyError):
    pass


@dataclass(frozen=True)
class IdentityReport:
    identity_id: str
    lhs: np.ndarray
    rhs: np.ndarray
    abs_err: float
    rel_err: float
    scale: float
    passed: bool
    a: float | None = None

    @property
    def lhs_norm(self) -> float:
        return float(np.linalg.norm(self.lhs))

    @property
    def rhs_norm(self) -> float:
        return float(np.linalg.norm(self.rhs))


@dataclass(frozen=True)
class IdentitySpec:
    identity_id: str
    evaluate: Callable
    fields: tuple[tuple[str, str, str | None], ...]
    kahler: bool = False
    uses_a: bool = False
    description: str = ""


REGISTRY: dict[str, IdentitySpec] = {}


def register(identity_id, fields, kahler=False, uses_a=False, description=""):
    def wrap(fn):
        REGISTRY[identity_id] = IdentitySpec(identity_id, fn, tuple(fields), kahler, uses_a, description)
        return fn

    return wrap


@dataclass
class _Ctx:
    """Shared point data for one evaluation."""

    model: ChartModel
    x: np.ndarray
    jet: PointJet
    scheme: FDScheme
    cache: dict = field(default_factory=dict)

    def fr(self, values, rank):
        return self.jet.frame_components(values, rank)

    def at(self, fn, rank):
        return self.fr(fn(self.x), rank)

    @property
    def curvature(self):
        if "curv" not in self.cache:
            jet = self.jet
            ric = jet.ricci.entries
            ric0 = ric - jet.scal / 4.0 * np.eye(4)
            ident = identity_arr()
            weyl = jet.riemann_tensor - 0.5 * kn_arr(ric0, np.eye(4)) - jet.scal / 6.0 * ident
            self.cache["curv"] = {
                "R": jet.riemann_tensor,
                "Id": ident,
                "W": weyl,
                "Wp": project_arr(weyl, 1, 1),
                "Wm": project_arr(weyl, -1, -1),
                "HG": kn_arr(jet.hess_f.entries, np.eye(4)),
            }
        return self.cache["curv"]


def _m(model, x):
    return model.metric(x)


# -- general identities ---------------------------------------------------------------


@register("form_rough_hodge", [("phi", "form-2", None)], description="rough vs Hodge Laplacian on 2-forms")
def _form_rough_hodge(c: _Ctx, phi, a=None):
    c_ = c.curvature
    lhs = c.at(rough_laplacian(c.model, phi, 2, c.scheme), 2)
    hodge = c.at(hodge_laplacian(c.model, phi, 2, 0, "L", None, c.scheme), 2)
    curv = act_form_arr(c_["W"] - c.jet.scal / 3.0 * c_["Id"], c.at(phi, 2))
    return lhs, [hodge, -curv]


def _biform_weitzenbock(c: _Ctx, s, side):
    c_ = c.curvature
    lhs = c.at(rough_laplacian(c.model, s, 4, c.scheme), 4)
    hodge = c.at(hodge_laplacian(c.model, s, 2, 2, side, None, c.scheme), 4)
    sf = c.at(s, 4)
    zero_order = c_["W"] - c.jet.scal / 3.0 * c_["Id"]
    if side == "L":
        return lhs, [hodge, -compose_arr(zero_order, sf), -sharp_arr(c_["R"], sf)]
    return lhs, [hodge, -compose_arr(sf, zero_order), -sharp_arr(sf, c_["R"])]


@register("biform_weitzenbock_left", [("S", "biform", None)], description="bi-form Weitzenbock, left-acting")
def _biform_weitzenbock_left(c, S, a=None):
    return _biform_weitzenbock(c, S, "L")


@register("biform_weitzenbock_right", [("S", "biform", None)], description="bi-form Weitzenbock, right-acting")
def _biform_weitzenbock_right(c, S, a=None):
    return _biform_weitzenbock(c, S, "R")


def _weighted_hodge(c: _Ctx, t, left, right, side, a):
    c_ = c.curvature
    rank = left + right
    jet = c.jet
    hodge = c.at(hodge_laplacian(c.model, t, left, right, side, None, c.scheme), rank)
    drift = c.at(directional(c.model, t, rank, c.scheme), rank)
    weighted = c.at(hodge_laplacian(c.model, t, left, right, side, a, c.scheme), rank)
    tf = c.at(t, rank)
    if rank == 2:
        hess_term = act_form_arr(c_["HG"], tf)
    elif side == "L":
        hess_term = compose_arr(c_["HG"], tf)
    else:
        hess_term = compose_arr(tf, c_["HG"])
    scalar = a * (jet.laplacian_f - (1.0 - a) * jet.grad_f_sq)
    lhs = hodge - drift
    return lhs, [weighted, -(a - 0.5) * hess_term, scalar * tf]


@register("weighted_hodge_form", [("phi", "form-2", None)], uses_a=True, description="weighted Hodge Laplacian on 2-forms")
def _weighted_hodge_form(c, phi, a):
    return _weighted_hodge(c, phi, 2, 0, "L", a)


@register("weighted_hodge_left", [("S", "biform", None)], uses_a=True, description="weighted left Hodge Laplacian")
def _weighted_hodge_left(c, S, a):
    return _weighted_hodge(c, S, 2, 2, "L", a)


@register("weighted_hodge_right", [("S", "biform", None)], uses_a=True, description="weighted right Hodge Laplacian")
def _weighted_hodge_right(c, S, a):
    return _weighted_hodge(c, S, 2, 2, "R", a)


def _weighted_lichnerowicz(c: _Ctx, u, s, a, side):
    c_ = c.curvature
    jet = c.jet
    model = c.model
    tr_s = trace_field(model, s)
    h_field = lambda x: u(x)[..., None, None] * _m(model, x) + tr_s(x)  # noqa: E731
    lhs = lichnerowicz_f(model, h_field, c.x, c.scheme, jet).entries

    uval = float(u(c.x))
    sf = c.at(s, 4)
    h0 = trace_arr(sf)
    drift_u = float(drift_laplacian(model, u, 0, c.scheme)(c.x))
    conformal = drift_u * np.eye(4) + 2.0 * uval * jet.ricci.entries
    weighted = c.at(hodge_laplacian(model, s, 2, 2, side, a, c.scheme), 4)
    coeff = (jet.scal + 3.0 * jet.laplacian_f) / 6.0
    # the a-weighted Hessian term only sees the traceless Hessian: the pure
    # trace part a (Delta f) tr(S) cancels against the scalar shift of the weighted Laplacian
    hess0 = jet.hess_f.entries - jet.laplacian_f / 4.0 * np.eye(4)
    hg0 = kn_arr(hess0, np.eye(4))
    if side == "L":
        zero = c_["Wp"] + coeff * identity_half_arr(1)
        main = trace_arr(weighted + compose_arr(sf, zero))
        hess_term = trace_arr(compose_arr(hg0, sf))
    else:
        zero = c_["Wm"] + coeff * identity_half_arr(-1)
        main = trace_arr(weighted + compose_arr(zero, sf))
        hess_term = trace_arr(compose_arr(sf, hg0))
    ric_f = jet.ricci.entries + jet.hess_f.entries
    ric_f0 = ric_f - np.trace(ric_f) / 4.0 * np.eye(4)
    ric_term = 0.5 * float(np.sum(ric_f0 * h0)) * np.eye(4)
    grad_term = -a * (1.0 - a) * jet.grad_f_sq * h0
    return lhs, [conformal, main, ric_term, -a * hess_term, grad_term]


_LICHNEROWICZ_FIELDS = [("u", "scalar", None), ("S", "biform", "minus-plus")]


@register("weighted_lichnerowicz_left", _LICHNEROWICZ_FIELDS, uses_a=True, description="weighted Lichnerowicz formula, left-acting")
def _weighted_lichnerowicz_left(c, u, S, a):
    return _weighted_lichnerowicz(c, u, S, a, "L")


@register("weighted_lichnerowicz_right", _LICHNEROWICZ_FIELDS, uses_a=True, description="weighted Lichnerowicz formula, right-acting")
def _weighted_lichnerowicz_right(c, u, S, a):
    return _weighted_lichnerowicz(c, u, S, a, "R")


@register("product_identity", [("gamma", "form-2", None), ("phi", "form-2", None)],
          description="weighted left Hodge Laplacian of a product of 2-forms")
def _product_identity(c: _Ctx, gamma, phi, a=None):
    model = c.model
    prod = lambda x: outer_arr(gamma(x), phi(x))  # noqa: E731
    lhs = c.at(hodge_laplacian(model, prod, 2, 2, "L", 0.0, c.scheme), 4)
    gf, pf = c.at(gamma, 2), c.at(phi, 2)
    lap_gamma = c.at(hodge_laplacian(model, gamma, 2, 0, "L", 0.0, c.scheme), 2)
    ngamma = c.at(covd(model, gamma, 2, c.scheme), 3)
    nphi = c.at(covd(model, phi, 2, c.scheme), 3)
    drift_phi = c.at(drift_laplacian(model, phi, 2, c.scheme), 2)
    return lhs, [
        outer_arr(lap_gamma, pf),
        2.0 * np.einsum("kij,kpq->ijpq", ngamma, nphi),
        outer_arr(gf, drift_phi),
        sharp_arr(c.curvature["R"], outer_arr(gf, pf)),
    ]


# -- Kahler soliton identities -------------------------------------------------------


@register("kahler_conformal", [("u", "scalar", None)], kahler=True,
          description="conformal deformations of a Kahler soliton")
def _kahler_conformal(c: _Ctx, u, a=None):
    model = c.model
    omega = kahler_form_field(model)
    lhs = 0.25 * lichnerowicz_f(model, lambda x: u(x)[..., None, None] * _m(model, x), c.x, c.scheme, c.jet).entries
    u_omega = lambda x: u(x)[..., None, None] * omega(x)  # noqa: E731
    of = c.at(omega, 2)
    lap = c.at(hodge_laplacian(model, u_omega, 2, 0, "L", 0.0, c.scheme), 2)
    return lhs, [trace_arr(outer_arr(lap, of)), model.lam * float(u(c.x)) * trace_arr(outer_arr(of, of))]


@register("weitz_j_inv", [("gamma", "form-2", "11")], kahler=True,
          description="J-invariant deformations h_I = gamma o omega")
def _weitz_j_inv(c: _Ctx, gamma, a=None):
    model = c.model
    omega = kahler_form_field(model)
    h_field = trace_field(model, lambda x: outer_arr(gamma(x), omega(x)))
    lhs = lichnerowicz_f(model, h_field, c.x, c.scheme, c.jet).entries
    of, gf = c.at(omega, 2), c.at(gamma, 2)
    lap = c.at(hodge_laplacian(model, gamma, 2, 0, "L", 0.0, c.scheme), 2)
    return lhs, [trace_arr(outer_arr(lap, of)), model.lam * trace_arr(outer_arr(gf, of))]


@register("weitz_j_anti", [("S", "biform", "anti")], kahler=True,
          description="J-anti-invariant deformations h_A = tr(S_A)")
def _weitz_j_anti(c: _Ctx, S, a=None):
    model = c.model
    h_field = trace_field(model, S)
    lhs = lichnerowicz_f(model, h_field, c.x, c.scheme, c.jet).entries
    lap = c.at(hodge_laplacian(model, S, 2, 2, "L", 0.0, c.scheme), 4)
    h_a = trace_arr(c.at(S, 4))
    return lhs, [trace_arr(lap), (model.lam - 0.5 * c.jet.scal) * h_a]


# -- driver ---------------------------------------------------------------------------


def verify_identity(
    model: ChartModel,
    identity_id: str,
    test_fields: dict[str, TensorFieldSpec],
    x,
    a: float | None = None,
    tol: float = DEFAULT_TOL,
    scheme: FDScheme = DEFAULT_SCHEME,
    jet: PointJet | None = None,
) -> IdentityReport:
    try:
        spec = REGISTRY[identity_id]
    except KeyError:
        raise UnknownIdentityError(f"unknown identity {identity_id!r}; known: {', '.join(REGISTRY)}") from None
    if spec.kahler and not model.is_kahler:
        raise ValueError(f"identity {identity_id} needs a Kahler model; {model.name} has no complex structure")
    if spec.uses_a:
        if a is None:
            raise ValueError(f"identity {identity_id} needs the weight parameter a")
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"a = {a} outside [0, 1]")
    missing = [name for name, _, _ in spec.fields if name not in test_fields]
    if missing:
        raise ValueError(f"identity {identity_id} is missing fields {missing}")
    x = np.asarray(x, dtype=float)
    model.require_interior(x, scheme)
    if jet is None:
        jet = point_jet(model, x, scheme)
    ctx = _Ctx(model, x, jet, scheme)
    kwargs = {name: test_fields[name] for name, _, _ in spec.fields}
    lhs, terms = spec.evaluate(ctx, a=a, **kwargs)
    rhs = np.sum(terms, axis=0)
    return make_report(identity_id, lhs, rhs, terms, tol, a)


def make_report(identity_id, lhs, rhs, terms, tol=DEFAULT_TOL, a=None) -> IdentityReport:
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    abs_err = float(np.linalg.norm(lhs - rhs))
    scale = max([float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs))] + [float(np.linalg.norm(t)) for t in terms])
    rel_err = abs_err / scale if scale > 0 else 0.0
    passed = rel_err <= tol or abs_err <= ABS_FLOOR
    return IdentityReport(identity_id, lhs, rhs, abs_err, rel_err, scale, passed, a)


# -- sweeps ---------------------------------------------------------------------------

A_VALUES = (0.0, 0.5, 1.0)


def identities_for(model: ChartModel) -> list[str]:
    """Registered identities applicable to ``model``."""
    return [iid for iid, spec in REGISTRY.items() if model.is_kahler or not spec.kahler]


def random_fields_for(model: ChartModel, identity_id: str, rng: np.random.Generator) -> dict[str, TensorFieldSpec]:
    from .fields import random_field

    return {name: random_field(model, rng, kind, sub) for name, kind, sub in REGISTRY[identity_id].fields}


def sweep_model(
    model: ChartModel,
    points,
    seed: int = 0,
    identity_ids=None,
    tol: float = DEFAULT_TOL,
    a_values=A_VALUES,
    scheme: FDScheme = DEFAULT_SCHEME,
) -> list[IdentityReport]:
    """Check identities at each point with fresh random fields per (identity, point)."""
    from .fields import stream

    ids = identities_for(model) if identity_ids is None else list(identity_ids)
    reports = []
    for k, x in enumerate(np.atleast_2d(points)):
        jet = point_jet(model, x, scheme)
        for iid in ids:
            fields = random_fields_for(model, iid, stream(seed, model.name, iid, k))
            for a in (a_values if REGISTRY[iid].uses_a else (None,)):
                reports.append(verify_identity(model, iid, fields, x, a, tol, scheme, jet))
    return reports


def fd_convergence(model: ChartModel, identity_id: str, fields, x, a=None, step: float = 4e-3) -> tuple[float, float]:
    """Residuals ``|lhs - rhs|`` of the plain second-order scheme at ``step`` and ``step / 2``."""
    coarse = verify_identity(model, identity_id, fields, x, a, scheme=FDScheme(step, richardson=False))
    fine = verify_identity(model, identity_id, fields, x, a, scheme=FDScheme(step / 2, richardson=False))
    return coarse.abs_err, fine.abs_err
