"""Kahler structure at a point and on chart models.

Normalizations: ``omega(X, Y) = g(JX, Y) / 2`` so that ``omega o omega = g/4``
and ``|omega| = 1`` (``o`` is the trace of the tensor product of two 2-forms).
The Ricci form ``rho`` is fixed by ``rho o omega = Ric``, i.e.
``rho(X, Y) = 2 Ric(JX, Y)``; then ``rho = scal * omega`` on Einstein
metrics and ``rho0 = rho - scal * omega`` is its primitive part.

The Gram-Schmidt frame of a chart with the standard complex structure is
unitary (``J e0 = e1``, ``J e2 = e3``), so in the frame ``omega`` is the
first self-dual basis form and ``omega_2^+, omega_3^+`` span the real part
of ``Lambda^{2,0}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart.fd import DEFAULT_SCHEME, FDScheme
from .chart.fields import TensorFieldSpec
from .chart.geometry import (
    PointJet,
    codiff,
    coordinate_ricci,
    div_f,
    ext_d,
    kahler_form_field,
    point_jet,
    soliton_residual,
    to_frame,
    trace_field,
)
from .chart.identities import IdentityReport, verify_identity
from .chart.models import ChartModel
from .curvature import (
    SymTensor2,
    identity_arr,
    kn_arr,
    outer_arr,
    project_arr,
    trace_arr,
)
from .exterior import KForm, omega as duality_form

#: the standard complex structure on an oriented orthonormal frame
J_STANDARD = np.array([[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]])
J_STANDARD.setflags(write=False)


def j_act(h: np.ndarray, j: np.ndarray = J_STANDARD) -> np.ndarray:
    """``(J.h)(X, Y) = h(JX, JY)`` on component arrays (frame, ``j`` acting on vectors)."""
    return np.swapaxes(j, -1, -2) @ h @ j


def omega_from_j(j: np.ndarray, metric: np.ndarray | None = None) -> np.ndarray:
    g = np.eye(4) if metric is None else metric
    return 0.5 * np.swapaxes(j, -1, -2) @ g


def self_dual_basis() -> np.ndarray:
    """``(omega, Re dz1^dz2, Im dz1^dz2)`` frame components: the duality basis of Lambda^+."""
    return np.array([duality_form(1, a).components for a in (1, 2, 3)])


def operator_matrix(t: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Matrix of ``phi -> T(phi)`` on the span of ``basis`` (mutually orthogonal forms)."""
    images = np.einsum("ijkl,bkl->bij", t, basis)
    norms = np.einsum("aij,aij->a", basis, basis)
    return np.einsum("aij,bij->ab", basis, images) / norms[:, None]


@dataclass(frozen=True, eq=False)
class KahlerPoint:
    """Kahler data at a point, in the unitary frame."""

    J: np.ndarray
    omega: KForm
    rho: KForm
    scal: float
    lam: float

    @property
    def rho0(self) -> KForm:
        return self.rho - self.omega * self.scal


def kahler_point(model: ChartModel, x, scheme: FDScheme = DEFAULT_SCHEME, jet: PointJet | None = None) -> KahlerPoint:
    if not model.is_kahler:
        raise ValueError(f"model {model.name} has no complex structure")
    x = np.asarray(x, dtype=float)
    if jet is None:
        jet = point_jet(model, x, scheme)
    fr = jet.frame
    j = np.linalg.solve(fr, model.complex_structure(x) @ fr)
    om = omega_from_j(j)
    rho = 2.0 * np.swapaxes(j, -1, -2) @ jet.ricci.entries
    return KahlerPoint(j, KForm(2, 0.5 * (om - om.T)), KForm(2, 0.5 * (rho - rho.T)), jet.scal, model.lam)


# -- algebraic splittings -------------------------------------------------------


def project_11(alpha: KForm, J: np.ndarray = J_STANDARD) -> KForm:
    """``(alpha + alpha(J., J.)) / 2``."""
    return KForm(2, 0.5 * (alpha.components + j_act(alpha.components, J)))


@dataclass(frozen=True)
class SymSplit:
    u: float
    hI0: SymTensor2
    hA: SymTensor2

    def recompose(self) -> SymTensor2:
        return SymTensor2(self.u * np.eye(4) + self.hI0.entries + self.hA.entries)


def split_symtensor(h: SymTensor2, J: np.ndarray = J_STANDARD) -> SymSplit:
    """``h = u g + h_{0,I} + h_A`` with ``h_{0,I}`` J-invariant traceless and ``h_A`` J-anti-invariant."""
    u = h.trace / 4.0
    h0 = h.entries - u * np.eye(4)
    jh0 = j_act(h0, J)
    return SymSplit(u, SymTensor2(0.5 * (h0 + jh0)), SymTensor2(0.5 * (h0 - jh0)))


def splitting_ranks(J: np.ndarray = J_STANDARD) -> tuple[int, int, int]:
    """Dimensions of the images of ``h -> u g``, ``h -> h_{0,I}``, ``h -> h_A`` on Sym^2."""
    basis = []
    for i in range(4):
        for k in range(i, 4):
            e = np.zeros((4, 4))
            e[i, k] = e[k, i] = 1.0
            basis.append(e)
    parts = [split_symtensor(SymTensor2(b), J) for b in basis]
    conf = np.array([p.u * np.eye(4) for p in parts]).reshape(10, -1)
    inv = np.array([p.hI0.entries for p in parts]).reshape(10, -1)
    anti = np.array([p.hA.entries for p in parts]).reshape(10, -1)
    return tuple(int(np.linalg.matrix_rank(m, tol=1e-10)) for m in (conf, inv, anti))


# -- curvature on Lambda^+ ------------------------------------------------------


def curvature_action_plus(lam: float, scal: float) -> np.ndarray:
    """``W^+ + (lam - scal/3) Id`` at a Kahler soliton point, in the basis ``(omega, Re Lambda^{2,0})``."""
    return np.diag([lam, lam - 0.5 * scal, lam - 0.5 * scal])


def weyl_tensor(jet: PointJet) -> np.ndarray:
    ric0 = jet.ricci.entries - jet.scal / 4.0 * np.eye(4)
    return jet.riemann_tensor - 0.5 * kn_arr(ric0, np.eye(4)) - jet.scal / 6.0 * identity_arr()


def curvature_action_plus_from_jet(jet: PointJet, lam: float) -> np.ndarray:
    """The same operator assembled from the finite-difference curvature at a point."""
    wplus = project_arr(weyl_tensor(jet), 1, 1)
    t = wplus + (lam - jet.scal / 3.0) * identity_arr()
    return operator_matrix(t, self_dual_basis())


def j_invariance_defect(curvature: np.ndarray) -> float:
    """Largest image or preimage component of the curvature along ``Re Lambda^{2,0}``.

    A Kahler curvature operator takes values in, and vanishes off, the
    (1,1)-forms, so this is zero up to discretization error.
    """
    anti = self_dual_basis()[1:]
    images = np.einsum("ijkl,bkl->bij", curvature, anti)
    pre = np.einsum("bij,ijkl->bkl", anti, curvature)
    return float(max(np.abs(images).max(), np.abs(pre).max()))


def ricci_omega_identity(jet: PointJet, kp: KahlerPoint) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of ``Ric0 (kn) g / 2 = (rho0 (x) omega + omega (x) rho0) / 2`` in the frame.

    Both sides live in the mixed blocks: ``omega`` is self-dual and ``rho0``
    anti-self-dual.
    """
    ric0 = jet.ricci.entries - jet.scal / 4.0 * np.eye(4)
    lhs = 0.5 * kn_arr(ric0, np.eye(4))
    r0, om = kp.rho0.components, kp.omega.components
    rhs = 0.5 * (outer_arr(r0, om) + outer_arr(om, r0))
    return lhs, rhs


# -- fields on Kahler models -----------------------------------------------------


#: the Ricci form is itself a second derivative of the metric; differentiating it
#: again with a coarser inner step keeps the nested roundoff small
RICCI_FORM_SCHEME = FDScheme(step=5e-3)


def ricci_form_field(model: ChartModel, scheme: FDScheme = RICCI_FORM_SCHEME) -> TensorFieldSpec:
    """Coordinate Ricci form ``rho_{mn} = 2 J^s_m Ric_{sn}``."""
    if not model.is_kahler:
        raise ValueError(f"model {model.name} has no complex structure")

    def evaluator(x):
        ric = coordinate_ricci(model, x, scheme)
        rho = 2.0 * np.swapaxes(model.complex_structure(x), -1, -2) @ ric
        return 0.5 * (rho - np.swapaxes(rho, -1, -2))

    return TensorFieldSpec("form-2", evaluator, "Ricci form")


def omega_field(model: ChartModel) -> TensorFieldSpec:
    return TensorFieldSpec("form-2", kahler_form_field(model), "Kahler form")


@dataclass(frozen=True)
class HarmonicCheck:
    d_gamma: float
    delta_f0_gamma: float
    type_11_defect: float
    scale: float
    tol: float

    @property
    def closed(self) -> bool:
        return self.d_gamma <= self.tol * self.scale

    @property
    def coclosed(self) -> bool:
        return self.delta_f0_gamma <= self.tol * self.scale

    @property
    def is_11(self) -> bool:
        return self.type_11_defect <= self.tol * self.scale

    @property
    def harmonic(self) -> bool:
        return self.closed and self.coclosed and self.is_11


def weighted_harmonic_check(model: ChartModel, gamma, x, tol: float = 1e-5,
                            scheme: FDScheme = DEFAULT_SCHEME) -> HarmonicCheck:
    """Pointwise membership conditions ``d gamma = 0``, ``delta_{f,0} gamma = 0``, ``gamma`` of type (1,1).

    Norms are of frame components; ``scale`` is ``max(1, |gamma|, |nabla gamma|)``.
    """
    x = np.asarray(x, dtype=float)
    jet = point_jet(model, x, scheme)
    kp = kahler_point(model, x, scheme, jet)
    fr = jet.frame
    g_val = to_frame(gamma(x), fr, 2)
    dg = to_frame(ext_d(model, gamma, 2, 0, "L", None, scheme)(x), fr, 3)
    delta = to_frame(codiff(model, gamma, 2, 0, "L", 0.0, scheme)(x), fr, 1)
    defect = g_val - project_11(KForm(2, g_val), kp.J).components
    from .chart.geometry import covd

    nabla = to_frame(covd(model, gamma, 2, scheme)(x), fr, 3)
    scale = max(1.0, float(np.linalg.norm(g_val)), float(np.linalg.norm(nabla)))
    return HarmonicCheck(float(np.linalg.norm(dg)), float(np.linalg.norm(delta)),
                         float(np.linalg.norm(defect)), scale, tol)


@dataclass(frozen=True)
class DivEquivalence:
    div_f_norm: float
    delta_norm: float
    residual: float
    scale: float

    def vanish_together(self, tol: float = 1e-5) -> bool:
        small = tol * self.scale
        return (self.div_f_norm <= small) == (self.delta_norm <= small)


def div_equivalence(model: ChartModel, gamma, x, scheme: FDScheme = DEFAULT_SCHEME) -> DivEquivalence:
    """Compare ``div_f(h_I)`` for ``h_I = gamma o omega`` with ``delta_{f,0} gamma``.

    For a (1,1)-form ``gamma`` one has ``div_f h_I = -(1/4) J (delta_{f,0} gamma)``
    pointwise (the covector ``delta`` composed with ``J``), so the two
    vanish together; ``residual`` is the defect of that relation.
    """
    x = np.asarray(x, dtype=float)
    om = kahler_form_field(model)
    h_field = trace_field(model, lambda y: outer_arr(gamma(y), om(y)))
    jet = point_jet(model, x, scheme)
    fr = jet.frame
    kp = kahler_point(model, x, scheme, jet)
    div = fr.T @ div_f(model, h_field, scheme)(x)
    delta = fr.T @ codiff(model, gamma, 2, 0, "L", 0.0, scheme)(x)
    predicted = DIV_DELTA_FACTOR * (delta @ kp.J)
    scale = max(float(np.linalg.norm(div)), float(np.linalg.norm(delta)), 1e-300)
    return DivEquivalence(float(np.linalg.norm(div)), float(np.linalg.norm(delta)),
                          float(np.linalg.norm(div - predicted)), scale)


#: fixed by the frame computation: div_f(gamma o omega)_i = c delta_{f,0}(gamma)_k J^k_i
DIV_DELTA_FACTOR = -0.25


# -- identity wrappers -----------------------------------------------------------

_SPECIALIZED = {"J-inv": ("weitz_j_inv", "gamma"), "J-anti": ("weitz_j_anti", "S"), "conformal": ("kahler_conformal", "u")}


def _require_soliton(model: ChartModel, x, scheme, tol=1e-6):
    res = soliton_residual(model, x, scheme).entries
    ref = max(1.0, abs(model.lam))
    if np.linalg.norm(res) > tol * ref:
        raise ValueError(f"{model.name} is not a soliton at {np.round(x, 6).tolist()} (residual {np.linalg.norm(res):.2e})")


def product_identity(model: ChartModel, gamma, phi, x, tol: float = 1e-5,
                     scheme: FDScheme = DEFAULT_SCHEME) -> IdentityReport:
    return verify_identity(model, "product_identity", {"gamma": gamma, "phi": phi}, x, tol=tol, scheme=scheme)


def specialized_weitzenbock(model: ChartModel, which: str, field, x, tol: float = 1e-5,
                            scheme: FDScheme = DEFAULT_SCHEME) -> IdentityReport:
    """Check one of the Kahler-soliton Weitzenbock formulas (``J-inv``, ``J-anti``, ``conformal``)."""
    if which not in _SPECIALIZED:
        raise ValueError(f"unknown formula {which!r}; choose from {sorted(_SPECIALIZED)}")
    if not model.is_kahler:
        raise ValueError(f"model {model.name} has no complex structure")
    x = np.asarray(x, dtype=float)
    _require_soliton(model, x, scheme)
    identity_id, name = _SPECIALIZED[which]
    return verify_identity(model, identity_id, {name: field}, x, tol=tol, scheme=scheme)


def lf_splitting_defect(model: ChartModel, field, x, part: str, scheme: FDScheme = DEFAULT_SCHEME) -> tuple[float, float]:
    """Component of ``L_f h`` of the wrong J-type, and ``|L_f h|``, for ``h`` purely of type ``part``."""
    from .chart.geometry import lichnerowicz_f

    x = np.asarray(x, dtype=float)
    jet = point_jet(model, x, scheme)
    kp = kahler_point(model, x, scheme, jet)
    out = lichnerowicz_f(model, field, x, scheme, jet)
    split = split_symtensor(out, kp.J)
    wrong = split.hA if part == "invariant" else SymTensor2(split.u * np.eye(4) + split.hI0.entries)
    return float(np.linalg.norm(wrong.entries)), float(np.linalg.norm(out.entries))


def gamma_omega(gamma_frame: np.ndarray, omega_frame: np.ndarray) -> np.ndarray:
    """``gamma o omega = tr(gamma (x) omega)`` on frame components."""
    return trace_arr(outer_arr(gamma_frame, omega_frame))
