"""Finite-difference Riemannian geometry on a :class:`ChartModel`.

Differential operators work on *coordinate* components with all indices
down.  A tensor field is a batched callable ``x -> batch + (4,)*rank``; every
operator below maps such callables to new ones, so compositions (``d delta``,
``nabla nabla``) are nested finite differences.  Results are moved to the
Gram-Schmidt frame only at the evaluation point, where the pointwise
algebra of :mod:`kahlerstab.curvature` takes over.

Index conventions: ``Gamma[r, m, n]`` is ``Gamma^r_{mn}``;
``R_{ijkl} = <Rm(e_i, e_j) e_l, e_k>`` so the round sphere has
``R_{ijij} > 0`` and ``Ric_{ik} = R_{ipkp}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..curvature import AlgCurvature, SymTensor2, tensor_to_matrix, trace_arr
from ..exterior import antisymmetrize
from .fd import DEFAULT_SCHEME, FDScheme, derivative
from .models import ChartModel

_LETTERS = "abcdefgh"


def _nb(x) -> int:
    return np.asarray(x).ndim - 1


# -- metric data -----------------------------------------------------------------


def inverse_metric(model: ChartModel, x) -> np.ndarray:
    return np.linalg.inv(model.metric(x))


def christoffel(model: ChartModel, x, scheme: FDScheme = DEFAULT_SCHEME) -> np.ndarray:
    """``Gamma^r_{mn}`` from the Levi-Civita formula with FD metric derivatives."""
    x = np.asarray(x, dtype=float)
    dg = derivative(model.metric, x, scheme)  # [a, b, c] = d_a g_bc
    lowered = 0.5 * (
        np.einsum("...msn->...smn", dg) + np.einsum("...nsm->...smn", dg) - dg
    )
    return np.einsum("...rs,...smn->...rmn", inverse_metric(model, x), lowered)


def coordinate_riemann(model: ChartModel, x, scheme: FDScheme = DEFAULT_SCHEME) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    gam = christoffel(model, x, scheme)
    dgam = derivative(lambda y: christoffel(model, y, scheme), x, scheme)  # [a, r, m, n]
    rup = (
        np.einsum("...mrns->...rsmn", dgam)
        - np.einsum("...nrms->...rsmn", dgam)
        + np.einsum("...rml,...lns->...rsmn", gam, gam)
        - np.einsum("...rnl,...lms->...rsmn", gam, gam)
    )
    return np.einsum("...kr,...rlij->...ijkl", model.metric(x), rup)


def coordinate_ricci(model: ChartModel, x, scheme: FDScheme = DEFAULT_SCHEME) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.einsum("...pq,...ipkq->...ik", inverse_metric(model, x), coordinate_riemann(model, x, scheme))


def frame(model: ChartModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Gram-Schmidt frame of the coordinate basis.

    Returns ``(F, L)`` with ``g = L L^T`` (Cholesky) and ``F = L^{-T}``; the
    columns of ``F`` are the frame vectors and ``theta^a = L_{mu a} dx^mu``.
    """
    low = np.linalg.cholesky(model.metric(x))
    return np.swapaxes(np.linalg.inv(low), -1, -2), low


def _contract_each(tensor: np.ndarray, mat: np.ndarray, rank: int) -> np.ndarray:
    """Apply ``T_{..m..} mat_{m a}`` on each of the last ``rank`` axes."""
    idx = _LETTERS[:rank]
    for j in range(rank):
        out = idx[:j] + "z" + idx[j + 1 :]
        tensor = np.einsum(f"...{idx},...{idx[j]}z->...{out}", tensor, mat)
    return tensor


def to_frame(tensor: np.ndarray, frame_vectors: np.ndarray, rank: int) -> np.ndarray:
    return _contract_each(np.asarray(tensor, dtype=float), frame_vectors, rank)


def from_frame(tensor: np.ndarray, cholesky: np.ndarray, rank: int) -> np.ndarray:
    """Coordinate components of a field given by frame components."""
    return _contract_each(np.asarray(tensor, dtype=float), np.swapaxes(cholesky, -1, -2), rank)


# -- covariant derivative and the operators built from it --------------------------


def covd(model: ChartModel, field, rank: int, scheme: FDScheme = DEFAULT_SCHEME):
    """``nabla T`` as a field of rank ``rank + 1`` (derivative index first)."""

    def nabla(x):
        x = np.asarray(x, dtype=float)
        out = derivative(field, x, scheme)
        if rank == 0:
            return out
        values = field(x)
        gam = christoffel(model, x, scheme)
        idx = _LETTERS[:rank]
        for j in range(rank):
            src = idx[:j] + "r" + idx[j + 1 :]
            out = out - np.einsum(f"...rm{idx[j]},...{src}->...m{idx}", gam, values)
        return out

    return nabla


def grad_f_field(model: ChartModel, scheme: FDScheme = DEFAULT_SCHEME):
    """Coordinate components of ``df``."""
    return lambda x: derivative(model.potential_f, x, scheme)


def _zero_field(rank: int):
    return lambda x: np.zeros(np.asarray(x).shape[:-1] + (4,) * rank)


def ext_d(model: ChartModel, field, left: int, right: int = 0, side: str = "L", a: float | None = None,
          scheme: FDScheme = DEFAULT_SCHEME):
    """Weighted exterior derivative ``d_{f,a} = d - a df^`` acting on the ``side`` factor.

    ``a=None`` gives the unweighted operator.

    Left: alternate the derivative index with the first ``left`` slots.
    Right: the derivative index is moved to the front of the right block.
    """
    rank = left + right
    degree = left if side == "L" else right
    if degree + 1 > 4:
        return _zero_field(rank + 1)
    nabla = covd(model, field, rank, scheme)
    df = grad_f_field(model, scheme)

    def apply(x):
        x = np.asarray(x, dtype=float)
        nb = _nb(x)
        full = nabla(x)
        if a is not None and a != 0.0:
            wedge_df = np.einsum(f"...m,...{_LETTERS[:rank]}->...m{_LETTERS[:rank]}", df(x), field(x))
            full = full - a * wedge_df
        if side == "L":
            return antisymmetrize(full, nb, left + 1)
        moved = np.moveaxis(full, nb, nb + left)
        return antisymmetrize(moved, nb + left, right + 1)

    return apply


def codiff(model: ChartModel, field, left: int, right: int = 0, side: str = "L", a: float | None = None,
           scheme: FDScheme = DEFAULT_SCHEME):
    """Weighted codifferential ``delta_{f,a} = delta + (1 - a) iota_{grad f}`` on the ``side`` factor.

    ``a=None`` gives the unweighted operator.
    """
    rank = left + right
    degree = left if side == "L" else right
    if degree == 0:
        return _zero_field(rank - 1) if rank else (lambda x: np.zeros(np.asarray(x).shape[:-1]))
    slot = 0 if side == "L" else left
    nabla = covd(model, field, rank, scheme)
    df = grad_f_field(model, scheme)
    idx = _LETTERS[:rank]
    rest = idx[:slot] + idx[slot + 1 :]
    contract = f"...mn,...m{idx[:slot]}n{idx[slot + 1:]}->...{rest}"
    weight_contract = f"...mn,...m,...{idx[:slot]}n{idx[slot + 1:]}->...{rest}"

    def apply(x):
        x = np.asarray(x, dtype=float)
        ginv = inverse_metric(model, x)
        out = -degree * np.einsum(contract, ginv, nabla(x))
        if a is not None and a != 1.0:
            out = out + (1.0 - a) * degree * np.einsum(weight_contract, ginv, df(x), field(x))
        return out

    return apply


def hodge_laplacian(model: ChartModel, field, left: int, right: int = 0, side: str = "L",
                    a: float | None = None, scheme: FDScheme = DEFAULT_SCHEME):
    """``Delta_{H,f,a} = -(d_{f,a} delta_{f,a} + delta_{f,a} d_{f,a})`` on the ``side`` factor."""
    up_l, up_r = (left + 1, right) if side == "L" else (left, right + 1)
    dn_l, dn_r = (left - 1, right) if side == "L" else (left, right - 1)
    d_field = ext_d(model, field, left, right, side, a, scheme)
    delta_d = codiff(model, d_field, up_l, up_r, side, a, scheme)
    degree = left if side == "L" else right
    if degree == 0:
        return lambda x: -delta_d(x)
    delta_field = codiff(model, field, left, right, side, a, scheme)
    d_delta = ext_d(model, delta_field, dn_l, dn_r, side, a, scheme)
    return lambda x: -(d_delta(x) + delta_d(x))


def rough_laplacian(model: ChartModel, field, rank: int, scheme: FDScheme = DEFAULT_SCHEME):
    """``Delta T = g^{mn} nabla_m nabla_n T``."""
    second = covd(model, covd(model, field, rank, scheme), rank + 1, scheme)
    return lambda x: _trace_first_two(model, second, x)


def _trace_first_two(model, second, x):
    x = np.asarray(x, dtype=float)
    ginv = inverse_metric(model, x)
    vals = second(x)
    nb = _nb(x)
    rank = vals.ndim - nb - 2
    idx = _LETTERS[:rank]
    return np.einsum(f"...mn,...mn{idx}->...{idx}", ginv, vals)


def directional(model: ChartModel, field, rank: int, scheme: FDScheme = DEFAULT_SCHEME):
    """``nabla_{grad f} T``."""
    nabla = covd(model, field, rank, scheme)
    df = grad_f_field(model, scheme)
    idx = _LETTERS[:rank]
    return lambda x: np.einsum(f"...mn,...n,...m{idx}->...{idx}", inverse_metric(model, x), df(x), nabla(x))


def drift_laplacian(model: ChartModel, field, rank: int, scheme: FDScheme = DEFAULT_SCHEME):
    """``Delta_f = Delta - nabla_{grad f}``."""
    rough = rough_laplacian(model, field, rank, scheme)
    drift = directional(model, field, rank, scheme)
    return lambda x: rough(x) - drift(x)


def div_f(model: ChartModel, field, scheme: FDScheme = DEFAULT_SCHEME):
    """``div_f h = e^f div(e^{-f} h)`` for a symmetric 2-tensor field (covector result)."""
    nabla = covd(model, field, 2, scheme)
    df = grad_f_field(model, scheme)

    def apply(x):
        ginv = inverse_metric(model, x)
        return np.einsum("...jk,...jki->...i", ginv, nabla(x)) - np.einsum("...jk,...j,...ki->...i", ginv, df(x), field(x))

    return apply


def trace_field(model: ChartModel, field):
    """Coordinate version of ``tr(S)_{ik} = (S_{ipkp} + S_{kpip}) / 2`` for a bi-form field."""

    def apply(x):
        ginv = inverse_metric(model, x)
        s = field(x)
        t = np.einsum("...pq,...ipkq->...ik", ginv, s)
        return 0.5 * (t + np.swapaxes(t, -1, -2))

    return apply


def kahler_form_field(model: ChartModel):
    """``omega = g(J., .) / 2``, normalized so that ``omega o omega = g / 4``."""
    if not model.is_kahler:
        raise ValueError(f"model {model.name} has no complex structure")
    return lambda x: 0.5 * np.swapaxes(model.complex_structure(x), -1, -2) @ model.metric(x)


# -- point data -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointJet:
    """Curvature and potential data at one point, in the Gram-Schmidt frame."""

    point: np.ndarray
    frame: np.ndarray
    cholesky: np.ndarray
    christoffel: np.ndarray
    riemann: AlgCurvature
    riemann_tensor: np.ndarray
    ricci: SymTensor2
    scal: float
    grad_f: np.ndarray
    hess_f: SymTensor2
    laplacian_f: float
    grad_f_sq: float

    @property
    def laplacian_f_of_f(self) -> float:
        return self.laplacian_f

    def frame_components(self, tensor, rank: int) -> np.ndarray:
        return to_frame(tensor, self.frame, rank)


def riemann_frame_tensor(model: ChartModel, x, scheme: FDScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Frame components of the curvature, symmetrized over the pair and skew symmetries."""
    fr, _ = frame(model, x)
    r = to_frame(coordinate_riemann(model, x, scheme), fr, 4)
    r = 0.5 * (r - np.swapaxes(r, -4, -3))
    r = 0.5 * (r - np.swapaxes(r, -2, -1))
    return 0.5 * (r + np.einsum("...ijkl->...klij", r))


def riemann(model: ChartModel, x, scheme: FDScheme = DEFAULT_SCHEME) -> AlgCurvature:
    """Frame curvature as an algebraic curvature (first Bianchi left to the tests)."""
    model.require_interior(x, scheme)
    return AlgCurvature(tensor_to_matrix(riemann_frame_tensor(model, x, scheme)), first_bianchi=False)


def point_jet(model: ChartModel, x, scheme: FDScheme = DEFAULT_SCHEME) -> PointJet:
    x = np.asarray(x, dtype=float)
    model.require_interior(x, scheme)
    fr, low = frame(model, x)
    rt = riemann_frame_tensor(model, x, scheme)
    ric = trace_arr(rt)
    grad = derivative(model.potential_f, x, scheme)
    hess = covd(model, grad_f_field(model, scheme), 1, scheme)(x)
    grad_frame = fr.T @ grad
    hess_frame = to_frame(hess, fr, 2)
    hess_frame = 0.5 * (hess_frame + hess_frame.T)
    return PointJet(
        point=x,
        frame=fr,
        cholesky=low,
        christoffel=christoffel(model, x, scheme),
        riemann=AlgCurvature(tensor_to_matrix(rt), first_bianchi=False),
        riemann_tensor=rt,
        ricci=SymTensor2(ric),
        scal=float(np.trace(ric)),
        grad_f=grad_frame,
        hess_f=SymTensor2(hess_frame),
        laplacian_f=float(np.trace(hess_frame)),
        grad_f_sq=float(grad_frame @ grad_frame),
    )


def soliton_residual(model: ChartModel, x, scheme: FDScheme = DEFAULT_SCHEME) -> SymTensor2:
    """``Ric + Hess f - (lambda/2) g`` in the frame."""
    jet = point_jet(model, x, scheme)
    return SymTensor2(jet.ricci.entries + jet.hess_f.entries - 0.5 * model.lam * np.eye(4))


def lichnerowicz_f(model: ChartModel, field, x, scheme: FDScheme = DEFAULT_SCHEME,
                   jet: PointJet | None = None) -> SymTensor2:
    """``L_f h = Delta_f h + 2 R(h)`` with ``R(h)_{ik} = R_{ijkl} h_{jl}``."""
    x = np.asarray(x, dtype=float)
    if jet is None:
        jet = point_jet(model, x, scheme)
    drift = jet.frame_components(drift_laplacian(model, field, 2, scheme)(x), 2)
    h = jet.frame_components(field(x), 2)
    out = drift + 2.0 * np.einsum("ijkl,jl->ik", jet.riemann_tensor, h)
    return SymTensor2(0.5 * (out + out.T))


def scaled_norm(values: np.ndarray, left: int, right: int = 0) -> float:
    """``ghat = k! l! g`` norm of frame components."""
    return float(np.sqrt(math.factorial(left) * math.factorial(right) * np.sum(np.asarray(values) ** 2)))


# -- pointwise conveniences ------------------------------------------------------------


def weighted_d(model: ChartModel, field, degree: int, x, a: float | None = 0.0, scheme: FDScheme = DEFAULT_SCHEME):
    """``d_{f,a}`` of a ``degree``-form field at ``x`` (coordinate components)."""
    return ext_d(model, field, degree, 0, "L", a, scheme)(np.asarray(x, dtype=float))


def weighted_delta(model: ChartModel, field, degree: int, x, a: float | None = 0.0, scheme: FDScheme = DEFAULT_SCHEME):
    """``delta_{f,a}`` of a ``degree``-form field at ``x``."""
    return codiff(model, field, degree, 0, "L", a, scheme)(np.asarray(x, dtype=float))


def left_d(model, field, x, a=None, scheme=DEFAULT_SCHEME):
    return ext_d(model, field, 2, 2, "L", a, scheme)(np.asarray(x, dtype=float))


def right_d(model, field, x, a=None, scheme=DEFAULT_SCHEME):
    return ext_d(model, field, 2, 2, "R", a, scheme)(np.asarray(x, dtype=float))


def left_delta(model, field, x, a=None, scheme=DEFAULT_SCHEME):
    return codiff(model, field, 2, 2, "L", a, scheme)(np.asarray(x, dtype=float))


def right_delta(model, field, x, a=None, scheme=DEFAULT_SCHEME):
    return codiff(model, field, 2, 2, "R", a, scheme)(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Laplacians:
    rough: np.ndarray
    drift: np.ndarray
    hodge: np.ndarray
    hodge_weighted: np.ndarray
    hodge_right: np.ndarray | None = None
    hodge_right_weighted: np.ndarray | None = None


def laplacians(model: ChartModel, field, left: int, right: int, x, a: float = 0.0,
               scheme: FDScheme = DEFAULT_SCHEME) -> Laplacians:
    """All Laplacians of a form or bi-form field at ``x``, in coordinates.

    Right-acting versions are filled in only for bi-forms (``right > 0``).
    """
    x = np.asarray(x, dtype=float)
    rank = left + right
    out = dict(
        rough=rough_laplacian(model, field, rank, scheme)(x),
        drift=drift_laplacian(model, field, rank, scheme)(x),
        hodge=hodge_laplacian(model, field, left, right, "L", None, scheme)(x),
        hodge_weighted=hodge_laplacian(model, field, left, right, "L", a, scheme)(x),
    )
    if right:
        out["hodge_right"] = hodge_laplacian(model, field, left, right, "R", None, scheme)(x)
        out["hodge_right_weighted"] = hodge_laplacian(model, field, left, right, "R", a, scheme)(x)
    return Laplacians(**out)
