"""Algebra of sections of Lambda^2 (x) Lambda^2 in dimension four.

A :class:`BiForm` ``S_{ijkl}`` (antisymmetric in ``ij`` and in ``kl``) is stored
as the 6x6 matrix of the operator ``phi -> S(phi)_{ij} = S_{ijkl} phi_{kl}`` in
the ghat-orthonormal 2-form basis of :mod:`kahlerstab.exterior`.  Concretely
``entries[A, B] = 2 S_{ijkl}`` with ``A = (i, j)``, ``B = (k, l)`` taken from
``PAIRS``.  In this normalization ``Id = g (kn) g / 4`` is the identity matrix
and ``S o T`` is the plain matrix product.

The index formulas are the source of truth: every operation here is written
against the 4-index tensor ``S.tensor`` and the matrix shortcuts are only used
where tests pin them to the index versions.

The array-level helpers (``*_arr``) accept leading batch axes; the geometry
code calls them on whole finite-difference stencils at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exterior import DIM, DUALITY_CHANGE, PAIRS, KForm, hodge_star_array, vec_to_form

#: absolute tolerance for pure algebra
ALGEBRA_TOL = 1e-12


class BianchiError(ValueError):
    """Raised when a tensor expected to satisfy the first Bianchi identity does not."""


class TracelessError(ValueError):
    """Raised when a symmetric tensor expected to be traceless is not."""


@lru_cache(maxsize=None)
def _pair_basis() -> np.ndarray:
    basis = vec_to_form(np.eye(6))
    basis.setflags(write=False)
    return basis


# -- array-level index formulas ------------------------------------------------


def tensor_to_matrix(tensor: np.ndarray) -> np.ndarray:
    rows = [[2.0 * tensor[..., i, j, k, l] for (k, l) in PAIRS] for (i, j) in PAIRS]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def matrix_to_tensor(mat: np.ndarray) -> np.ndarray:
    e = _pair_basis()
    return 2.0 * np.einsum("...AB,Aij,Bkl->...ijkl", mat, e, e)


def kn_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kulkarni-Nomizu product of two (not necessarily symmetric) 2-tensors."""
    return (
        np.einsum("...ik,...jl->...ijkl", a, b)
        - np.einsum("...il,...jk->...ijkl", a, b)
        - np.einsum("...jk,...il->...ijkl", a, b)
        + np.einsum("...jl,...ik->...ijkl", a, b)
    )


def compose_arr(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.einsum("...ijpq,...pqkl->...ijkl", s, t)


def sharp_arr(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    return (
        np.einsum("...ipkq,...jplq->...ijkl", s, t)
        - np.einsum("...iplq,...jpkq->...ijkl", s, t)
        - np.einsum("...jpkq,...iplq->...ijkl", s, t)
        + np.einsum("...jplq,...ipkq->...ijkl", s, t)
    )


def trace_arr(s: np.ndarray) -> np.ndarray:
    """``tr(S)_{ik} = (S_{ipkp} + S_{kpip}) / 2``."""
    return 0.5 * (np.einsum("...ipkp->...ik", s) + np.einsum("...kpip->...ik", s))


def act_form_arr(t: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return np.einsum("...ijkl,...kl->...ij", t, phi)


def act_sym_arr(t: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``T(h)_{ik} = T_{ijkl} h_{jl}``."""
    return np.einsum("...ijkl,...jl->...ik", t, h)


def lie_bracket_arr(phi: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """``[phi, psi]_{ij} = phi_{ik} psi_{jk} - psi_{ik} phi_{jk}``."""
    return np.einsum("...ik,...jk->...ij", phi, psi) - np.einsum("...ik,...jk->...ij", psi, phi)


def outer_arr(phi: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...kl->...ijkl", phi, psi)


def star_left_arr(s: np.ndarray) -> np.ndarray:
    return np.moveaxis(hodge_star_array(np.moveaxis(s, (-4, -3), (-2, -1)), 2), (-2, -1), (-4, -3))


def star_right_arr(s: np.ndarray) -> np.ndarray:
    return hodge_star_array(s, 2)


def project_arr(s: np.ndarray, left: int, right: int) -> np.ndarray:
    """``pi_{left,right} = (1 + left *^L)(1 + right *^R) / 4``."""
    half = 0.5 * (s + right * star_right_arr(s))
    return 0.5 * (half + left * star_left_arr(half))


def identity_arr() -> np.ndarray:
    g = np.eye(DIM)
    return 0.25 * kn_arr(g, g)


def identity_half_arr(sign: int) -> np.ndarray:
    """``Id_{Lambda^pm} = (Id pm *) / 2``."""
    ident = identity_arr()
    return 0.5 * (ident + sign * star_right_arr(ident))


def bianchi_residual_arr(s: np.ndarray) -> np.ndarray:
    """``S_{ijkl} + S_{jkil} + S_{kijl}``."""
    return (
        s
        + np.einsum("...jkil->...ijkl", s)
        + np.einsum("...kijl->...ijkl", s)
    )


# -- value types ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymTensor2:
    """Symmetric 2-tensor in an orthonormal frame."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.shape != (DIM, DIM):
            raise ValueError(f"expected a 4x4 array, got {arr.shape}")
        scale = max(1.0, float(np.abs(arr).max()))
        if np.abs(arr - arr.T).max() > ALGEBRA_TOL * scale:
            raise ValueError("entries are not symmetric")
        arr = 0.5 * (arr + arr.T)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    def traceless(self) -> SymTensor2:
        return SymTensor2(self.entries - self.trace / DIM * np.eye(DIM))

    def __add__(self, other: SymTensor2) -> SymTensor2:
        return SymTensor2(self.entries + other.entries)

    def __sub__(self, other: SymTensor2) -> SymTensor2:
        return SymTensor2(self.entries - other.entries)

    def __mul__(self, scalar: float) -> SymTensor2:
        return SymTensor2(scalar * self.entries)

    __rmul__ = __mul__

    def inner(self, other: SymTensor2) -> float:
        return float(np.sum(self.entries * other.entries))

    @classmethod
    def metric(cls) -> SymTensor2:
        return cls(np.eye(DIM))


@dataclass(frozen=True, eq=False)
class BiForm:
    """Section value of Lambda^2 (x) Lambda^2 (see module docstring for storage)."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.shape != (6, 6):
            raise ValueError(f"expected a 6x6 array, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def tensor(self) -> np.ndarray:
        return matrix_to_tensor(self.entries)

    @classmethod
    def from_tensor(cls, tensor: np.ndarray) -> BiForm:
        return cls(tensor_to_matrix(np.asarray(tensor, dtype=float)))

    @classmethod
    def outer(cls, phi: KForm, psi: KForm) -> BiForm:
        """``phi (x) psi``."""
        return cls.from_tensor(outer_arr(phi.components, psi.components))

    @classmethod
    def identity(cls) -> BiForm:
        return cls(np.eye(6))

    @classmethod
    def zero(cls) -> BiForm:
        return cls(np.zeros((6, 6)))

    def __add__(self, other: BiForm) -> BiForm:
        return BiForm(self.entries + other.entries)

    def __sub__(self, other: BiForm) -> BiForm:
        return BiForm(self.entries - other.entries)

    def __mul__(self, scalar: float) -> BiForm:
        return BiForm(scalar * self.entries)

    __rmul__ = __mul__

    def __neg__(self) -> BiForm:
        return BiForm(-self.entries)

    def inner(self, other: BiForm) -> float:
        """``g(S, T) = S_{ijkl} T_{ijkl}`` (full index sum)."""
        return float(np.sum(self.tensor * other.tensor))

    def transpose(self) -> BiForm:
        return BiForm(self.entries.T)

    def is_pair_symmetric(self, atol: float = ALGEBRA_TOL) -> bool:
        return bool(np.abs(self.entries - self.entries.T).max() <= atol * max(1.0, np.abs(self.entries).max()))


@dataclass(frozen=True, eq=False)
class AlgCurvature(BiForm):
    """Pair-symmetric bi-form, optionally certified to satisfy first Bianchi."""

    first_bianchi: bool = True

    def __post_init__(self):
        super().__post_init__()
        scale = max(1.0, float(np.abs(self.entries).max()))
        if np.abs(self.entries - self.entries.T).max() > 1e-9 * scale:
            raise ValueError("algebraic curvature must be pair-symmetric")
        sym = 0.5 * (self.entries + self.entries.T)
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)
        if self.first_bianchi and bianchi_defect(self) > 1e-9 * scale:
            raise BianchiError(f"first Bianchi violated by {bianchi_defect(self):.3e}")


@dataclass(frozen=True)
class BlockSplit:
    """The four 3x3 duality blocks of a bi-form; rows index the left factor.

    Bases are the orthonormal ``omega_a^pm / |omega_a^pm|``.
    """

    plus_plus: np.ndarray
    plus_minus: np.ndarray
    minus_plus: np.ndarray
    minus_minus: np.ndarray

    def recompose(self) -> BiForm:
        q = np.block([[self.plus_plus, self.plus_minus], [self.minus_plus, self.minus_minus]])
        return BiForm(DUALITY_CHANGE.T @ q @ DUALITY_CHANGE)


@dataclass(frozen=True)
class DualityBlocks:
    """Ricci decomposition ``R = Ric0 (kn) g / 2 + W + scal/6 Id`` in duality blocks."""

    Wplus: np.ndarray
    Wminus: np.ndarray
    mixed_minus_plus: np.ndarray
    mixed_plus_minus: np.ndarray
    scal: float
    ricci: SymTensor2
    weyl: BiForm

    @property
    def ricci_traceless(self) -> SymTensor2:
        return self.ricci.traceless()

    def recompose(self) -> BiForm:
        return BiForm(
            0.5 * tensor_to_matrix(kn_arr(self.ricci_traceless.entries, np.eye(DIM)))
            + self.weyl.entries
            + self.scal / 6.0 * np.eye(6)
        )


# -- public operations --------------------------------------------------------


def kulkarni_nomizu(a: SymTensor2, b: SymTensor2) -> BiForm:
    return BiForm.from_tensor(kn_arr(a.entries, b.entries))


def compose(s: BiForm, t: BiForm) -> BiForm:
    return BiForm.from_tensor(compose_arr(s.tensor, t.tensor))


def sharp(s: BiForm, t: BiForm) -> BiForm:
    return BiForm.from_tensor(sharp_arr(s.tensor, t.tensor))


def lie_bracket(phi: KForm, psi: KForm) -> KForm:
    return KForm(2, lie_bracket_arr(phi.components, psi.components))


def trace_map(s: BiForm) -> SymTensor2:
    return SymTensor2(trace_arr(s.tensor))


def form_product(alpha: KForm, beta: KForm) -> SymTensor2:
    """``alpha o beta := tr(alpha (x) beta)`` for 2-forms."""
    return trace_map(BiForm.outer(alpha, beta))


def project(s: BiForm, left: int, right: int) -> BiForm:
    return BiForm.from_tensor(project_arr(s.tensor, left, right))


def inverse_trace(h0: SymTensor2) -> BiForm:
    """Element of Lambda^- (x) Lambda^+ whose trace is ``h0``.

    The inverse is ``pi_{-,+}(h0 (kn) g)``; the traced identity
    ``tr(h0 (kn) g) = 2 h0`` splits evenly between the two mixed blocks.
    """
    scale = max(1.0, float(np.abs(h0.entries).max()))
    if abs(h0.trace) > ALGEBRA_TOL * scale:
        raise TracelessError(f"input has trace {h0.trace:.3e}")
    return BiForm.from_tensor(project_arr(kn_arr(h0.entries, np.eye(DIM)), -1, 1))


def act_on_form(t: BiForm, phi: KForm) -> KForm:
    if phi.degree != 2:
        raise ValueError("bi-forms act on 2-forms")
    return KForm(2, act_form_arr(t.tensor, phi.components))


def act_on_symtensor(t: BiForm, h: SymTensor2) -> SymTensor2:
    out = act_sym_arr(t.tensor, h.entries)
    if not t.is_pair_symmetric():
        out = 0.5 * (out + out.T)
    return SymTensor2(out)


def bianchi_defect(s: BiForm) -> float:
    return float(np.abs(bianchi_residual_arr(s.tensor)).max())


def duality_blocks(s: BiForm) -> BlockSplit:
    q = DUALITY_CHANGE @ s.entries @ DUALITY_CHANGE.T
    return BlockSplit(q[:3, :3], q[:3, 3:], q[3:, :3], q[3:, 3:])


def ricci_decompose(r: BiForm, tol: float = 1e-9) -> DualityBlocks:
    scale = max(1.0, float(np.abs(r.entries).max()))
    if bianchi_defect(r) > tol * scale:
        raise BianchiError(f"first Bianchi violated by {bianchi_defect(r):.3e}")
    ric = trace_arr(r.tensor)
    scal = float(np.trace(ric))
    ric0 = ric - scal / DIM * np.eye(DIM)
    weyl = r.entries - 0.5 * tensor_to_matrix(kn_arr(ric0, np.eye(DIM))) - scal / 6.0 * np.eye(6)
    blocks = duality_blocks(BiForm(weyl))
    mixed = duality_blocks(BiForm(0.5 * tensor_to_matrix(kn_arr(ric0, np.eye(DIM)))))
    return DualityBlocks(
        Wplus=blocks.plus_plus,
        Wminus=blocks.minus_minus,
        mixed_minus_plus=mixed.minus_plus,
        mixed_plus_minus=mixed.plus_minus,
        scal=scal,
        ricci=SymTensor2(0.5 * (ric + ric.T)),
        weyl=BiForm(weyl),
    )


# -- random generators --------------------------------------------------------

_STAR_MATRIX = np.block([[np.zeros((3, 3)), np.eye(3)], [np.eye(3), np.zeros((3, 3))]])


def random_algebraic_curvature(rng: np.random.Generator, scale: float = 1.0) -> AlgCurvature:
    """Random pair-symmetric bi-form projected onto the first-Bianchi subspace.

    In dimension four the Bianchi-violating part of a symmetric 6x6 matrix is
    its component along the Hodge star, i.e. the volume-form direction.
    """
    m = rng.normal(scale=scale, size=(6, 6))
    m = 0.5 * (m + m.T)
    m -= np.sum(m * _STAR_MATRIX) / np.sum(_STAR_MATRIX**2) * _STAR_MATRIX
    return AlgCurvature(m)


def random_mixed(rng: np.random.Generator, scale: float = 1.0) -> BiForm:
    """Random element of Lambda^- (x) Lambda^+."""
    zero = np.zeros((3, 3))
    return BlockSplit(zero, zero, rng.normal(scale=scale, size=(3, 3)), zero).recompose()


def random_symmetric(rng: np.random.Generator, traceless: bool = False) -> SymTensor2:
    a = rng.normal(size=(DIM, DIM))
    a = 0.5 * (a + a.T)
    if traceless:
        a -= np.trace(a) / DIM * np.eye(DIM)
    return SymTensor2(a)


def random_two_form(rng: np.random.Generator) -> KForm:
    return KForm.from_vector(rng.normal(size=6))
