"""Weighted self-dual curvature at an orbifold point and the resulting stability verdict."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart.fd import DEFAULT_SCHEME, FDScheme
from .chart.geometry import point_jet
from .chart.models import ChartModel
from .curvature import SymTensor2, identity_arr, kn_arr, project_arr
from .kahler import operator_matrix, self_dual_basis, weyl_tensor

SOLITON_TRACE_TOL = 1e-10


@dataclass(frozen=True)
class WeightedCurvatureInput:
    """Point data for ``Rbar^+_a``; ``Wplus`` is a 3x3 matrix in the duality basis of Lambda^+."""

    Wplus: np.ndarray
    scal: float
    lam: float
    laplacian_f: float
    grad_f_sq: float
    hess_f: SymTensor2
    a: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.Wplus, dtype=float)
        if w.shape != (3, 3):
            raise ValueError("Wplus must be 3x3")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"a = {self.a} outside [0, 1]")
        w = 0.5 * (w + w.T)
        # W^+ is traceless; drop the discretization residue of its trace
        object.__setattr__(self, "Wplus", w - np.trace(w) / 3.0 * np.eye(3))

    @property
    def soliton_trace_defect(self) -> float:
        """``scal + Delta f - 2 lam``: zero on soliton input."""
        return self.scal + self.laplacian_f - 2.0 * self.lam

    @classmethod
    def soliton(cls, Wplus, scal: float, lam: float, a: float = 0.0, grad_f_sq: float = 0.0,
                hess_f: SymTensor2 | None = None) -> WeightedCurvatureInput:
        """Input with ``Delta f = 2 lam - scal`` and, by default, ``Hess f = (Delta f / 4) g``."""
        lap = 2.0 * lam - scal
        hess = SymTensor2(lap / 4.0 * np.eye(4)) if hess_f is None else hess_f
        return cls(np.asarray(Wplus, dtype=float), scal, lam, lap, grad_f_sq, hess, a)

    @classmethod
    def from_model(cls, model: ChartModel, x, a: float = 0.0, scheme: FDScheme = DEFAULT_SCHEME) -> WeightedCurvatureInput:
        jet = point_jet(model, np.asarray(x, dtype=float), scheme)
        wplus = operator_matrix(project_arr(weyl_tensor(jet), 1, 1), self_dual_basis())
        return cls(wplus, jet.scal, model.lam, jet.laplacian_f, jet.grad_f_sq, jet.hess_f, a)

    @classmethod
    def soliton_at(cls, model: ChartModel, x, a: float = 0.0, scheme: FDScheme = DEFAULT_SCHEME) -> WeightedCurvatureInput:
        """Like :meth:`from_model` but with ``Delta f`` fixed by the soliton trace ``scal + Delta f = 2 lam``."""
        raw = cls.from_model(model, x, a, scheme)
        return cls(raw.Wplus, raw.scal, raw.lam, 2.0 * raw.lam - raw.scal, raw.grad_f_sq, raw.hess_f, a)


def hessian_plus_block(hess: SymTensor2, traceless: bool = False) -> np.ndarray:
    """Matrix on Lambda^+ of the ``Lambda^+ (x) Lambda^+`` block of ``Hess f (kn) g``."""
    h = hess.entries - (hess.trace / 4.0 * np.eye(4) if traceless else 0.0)
    return operator_matrix(project_arr(kn_arr(h, np.eye(4)), 1, 1), self_dual_basis())


def weighted_selfdual(inp: WeightedCurvatureInput, traceless_hessian: bool = False) -> np.ndarray:
    """``Rbar^+_a = W^+ + scal/6 + (Delta f/2 - a(1-a)|grad f|^2) - a pi_{++}(Hess f (kn) g)`` on Lambda^+.

    ``traceless_hessian=True`` uses the traceless Hessian in the last term;
    that is the zeroth-order term that the weighted Lichnerowicz formula
    actually produces for ``a > 0`` (the two versions agree at ``a = 0``).
    """
    a = inp.a
    shift = inp.scal / 6.0 + 0.5 * inp.laplacian_f - a * (1.0 - a) * inp.grad_f_sq
    out = inp.Wplus + shift * np.eye(3)
    if a > 0.0:
        out = out - a * hessian_plus_block(inp.hess_f, traceless_hessian)
    return 0.5 * (out + out.T)


def kahler_orbifold_spectrum(lam: float, scal: float) -> tuple[float, float, float]:
    """``(lam, lam - scal/2, lam - scal/2)``, the Kahler-form eigenvalue first."""
    return (float(lam), float(lam - 0.5 * scal), float(lam - 0.5 * scal))


def default_eps(lam: float, scal: float) -> float:
    return 1e-9 * (1.0 + abs(lam) + abs(scal))


def ordered_spectrum(matrix: np.ndarray, kahler: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and unit eigenvectors (columns).

    Descending order; with ``kahler`` the eigenvector best aligned with the
    first basis vector (``omega``) is moved to the front.
    """
    vals, vecs = np.linalg.eigh(np.asarray(matrix, dtype=float))
    order = list(np.argsort(-vals, kind="stable"))
    if kahler:
        top = max(order, key=lambda i: (abs(vecs[0, i]), vals[i]))
        order.remove(top)
        order.insert(0, top)
    return vals[order], vecs[:, order]


@dataclass(frozen=True)
class OrbifoldVerdict:
    kind: str
    neutral_count: int
    spectrum: tuple[float, ...]
    eps: float


def orbifold_verdict(spectrum, eps: float | None = None) -> OrbifoldVerdict:
    spec = tuple(float(s) for s in spectrum)
    if eps is None:
        eps = 1e-9 * (1.0 + max(abs(s) for s in spec))
    if eps <= 0:
        raise ValueError("eps must be positive")
    top = max(spec)
    neutral = sum(abs(s) <= eps for s in spec)
    if top > eps:
        kind = "unstable"
    elif top < -eps:
        kind = "stable"
    else:
        kind = "semistable"
    return OrbifoldVerdict(kind, int(neutral) if kind == "semistable" else 0, spec, eps)


def classify_kahler(lam: float, scal: float, eps: float | None = None) -> OrbifoldVerdict:
    eps = default_eps(lam, scal) if eps is None else eps
    return orbifold_verdict(kahler_orbifold_spectrum(lam, scal), eps)


@dataclass(frozen=True)
class TraceReport:
    trace: float
    expected: float
    error: float
    shrinker_sign: int | None

    @property
    def passed(self) -> bool:
        return self.error <= SOLITON_TRACE_TOL * max(1.0, abs(self.expected))


def trace_identity_check(inp: WeightedCurvatureInput) -> TraceReport:
    """``tr Rbar^+ = 3 lam - scal`` at ``a = 0`` (uses the soliton trace ``Delta f = 2 lam - scal``)."""
    base = WeightedCurvatureInput(inp.Wplus, inp.scal, inp.lam, inp.laplacian_f, inp.grad_f_sq, inp.hess_f, 0.0)
    tr = float(np.trace(weighted_selfdual(base)))
    expected = 3.0 * inp.lam - inp.scal
    sign = int(np.sign(expected)) if inp.lam > 0 else None
    return TraceReport(tr, expected, abs(tr - expected), sign)


@dataclass(frozen=True)
class ScalarBoundReport:
    applies: bool
    min_gap: float | None
    equality: bool
    passed: bool


def scalar_bound_check(model: ChartModel, points, tol: float = 1e-8,
                       scheme: FDScheme = DEFAULT_SCHEME) -> ScalarBoundReport:
    """``scal - 2 lam >= 0`` at the sample points, for steady and expanding models only."""
    if model.lam > 0:
        return ScalarBoundReport(False, None, False, True)
    gaps = [point_jet(model, x, scheme).scal - 2.0 * model.lam for x in np.atleast_2d(points)]
    min_gap = float(min(gaps))
    equality = all(abs(g) <= tol * (1.0 + abs(model.lam)) for g in gaps)
    return ScalarBoundReport(True, min_gap, equality, min_gap >= -tol)


def identity_selfdual() -> np.ndarray:
    return operator_matrix(project_arr(identity_arr(), 1, 1), self_dual_basis())
