"""Pointwise exterior algebra on an oriented Euclidean 4-space.

Forms are stored as fully antisymmetric component arrays in an orthonormal
frame ``e_0..e_3``.  The wedge product is the normalized one,

    e^i ^ e^j = 1/2 (e^i (x) e^j - e^j (x) e^i),

so that ``|e^I|^2 = 1/k!`` in the tensor norm and the scaled inner product
``ghat = k! g`` makes the ``e^I`` (increasing ``I``) orthonormal.  With this
convention ``iota_X a = k a(X, ...)``.

Degree-2 forms also have a 6-vector representation: the coefficients in the
ordered basis ``(e01, e02, e03, e23, e31, e12)``.  That basis is
ghat-orthonormal and the Hodge star swaps its two halves.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DIM = 4

#: ordered 2-form basis used by the 6-vector representation
PAIRS: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))


class DegreeError(ValueError):
    """Raised when form degrees are out of range or incompatible."""


@lru_cache(maxsize=None)
def _permutations(n: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    out = []
    for perm in itertools.permutations(range(n)):
        sign = round(np.linalg.det(np.eye(n)[list(perm)]))
        out.append((perm, sign))
    return tuple(out)


@lru_cache(maxsize=None)
def levi_civita() -> np.ndarray:
    eps = np.zeros((DIM,) * DIM)
    for perm, sign in _permutations(DIM):
        eps[perm] = sign
    eps.setflags(write=False)
    return eps


def antisymmetrize(arr: np.ndarray, start: int, count: int) -> np.ndarray:
    """Average ``arr`` over signed permutations of axes ``start .. start+count-1``."""
    if count <= 1:
        return arr
    axes = list(range(arr.ndim))
    total = np.zeros_like(arr)
    for perm, sign in _permutations(count):
        order = axes.copy()
        for pos, p in enumerate(perm):
            order[start + pos] = start + p
        total = total + sign * np.transpose(arr, order)
    return total / math.factorial(count)


@dataclass(frozen=True, eq=False)
class KForm:
    """A degree-``k`` form at a point, stored as a ``(4,)*k`` antisymmetric array."""

    degree: int
    components: np.ndarray

    def __post_init__(self):
        if not 0 <= self.degree <= DIM:
            raise DegreeError(f"degree {self.degree} outside 0..{DIM}")
        comps = np.array(self.components, dtype=float)
        if comps.shape != (DIM,) * self.degree:
            raise ValueError(
                f"components of a {self.degree}-form need shape {(DIM,) * self.degree}, got {comps.shape}"
            )
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)

    def __add__(self, other: KForm) -> KForm:
        _same_degree(self, other)
        return KForm(self.degree, self.components + other.components)

    def __sub__(self, other: KForm) -> KForm:
        _same_degree(self, other)
        return KForm(self.degree, self.components - other.components)

    def __mul__(self, scalar: float) -> KForm:
        return KForm(self.degree, scalar * self.components)

    __rmul__ = __mul__

    def __neg__(self) -> KForm:
        return KForm(self.degree, -self.components)

    def allclose(self, other: KForm, atol: float = 1e-12) -> bool:
        return self.degree == other.degree and np.allclose(
            self.components, other.components, rtol=0.0, atol=atol
        )

    def as_vector(self) -> np.ndarray:
        """6-vector of a 2-form in the ``PAIRS`` basis."""
        if self.degree != 2:
            raise DegreeError("only 2-forms have a 6-vector representation")
        return form_to_vec(self.components)

    @classmethod
    def from_vector(cls, vec) -> KForm:
        return cls(2, vec_to_form(np.asarray(vec, dtype=float)))

    @classmethod
    def basis(cls, *indices: int) -> KForm:
        """The elementary form ``e^{i1} ^ ... ^ e^{ik}``."""
        out = KForm(0, np.array(1.0))
        for i in indices:
            covector = np.zeros(DIM)
            covector[i] = 1.0
            out = wedge(out, KForm(1, covector))
        return out

    @classmethod
    def zero(cls, degree: int) -> KForm:
        return cls(degree, np.zeros((DIM,) * degree))


def _same_degree(a: KForm, b: KForm) -> None:
    if a.degree != b.degree:
        raise DegreeError(f"degree mismatch: {a.degree} vs {b.degree}")


def form_to_vec(comps: np.ndarray) -> np.ndarray:
    """Antisymmetric ``(..., 4, 4)`` components to ``(..., 6)`` basis coefficients."""
    return np.stack([2.0 * comps[..., i, j] for i, j in PAIRS], axis=-1)


def vec_to_form(vec: np.ndarray) -> np.ndarray:
    """Inverse of :func:`form_to_vec`."""
    vec = np.asarray(vec, dtype=float)
    out = np.zeros(vec.shape[:-1] + (DIM, DIM))
    for a, (i, j) in enumerate(PAIRS):
        out[..., i, j] += 0.5 * vec[..., a]
        out[..., j, i] -= 0.5 * vec[..., a]
    return out


def wedge(a: KForm, b: KForm) -> KForm:
    if a.degree + b.degree > DIM:
        raise DegreeError(f"wedge of degrees {a.degree}+{b.degree} exceeds {DIM}")
    prod = np.multiply.outer(a.components, b.components)
    return KForm(a.degree + b.degree, antisymmetrize(prod, 0, a.degree + b.degree))


def interior(x, a: KForm) -> KForm:
    """``iota_X a = k a(X, ...)``."""
    if a.degree == 0:
        raise DegreeError("cannot contract a 0-form")
    x = np.asarray(x, dtype=float)
    return KForm(a.degree - 1, a.degree * np.tensordot(x, a.components, axes=(0, 0)))


def hodge_star_array(comps: np.ndarray, degree: int) -> np.ndarray:
    """Hodge star on the trailing ``degree`` axes of a (possibly batched) array."""
    eps = levi_civita()
    k = degree
    scale = 1.0 / math.factorial(DIM - k)
    lhs = "abcd"[:k]
    rhs = "efgh"[: DIM - k]
    return scale * np.einsum(f"...{lhs},{lhs}{rhs}->...{rhs}", comps, eps)


def hodge_star(a: KForm) -> KForm:
    return KForm(DIM - a.degree, hodge_star_array(a.components, a.degree))


def scaled_inner(a: KForm, b: KForm) -> float:
    """``ghat(a, b) = k! g(a, b)``."""
    _same_degree(a, b)
    return math.factorial(a.degree) * float(np.sum(a.components * b.components))


def norm(a: KForm) -> float:
    """Tensor norm ``|a|`` (unscaled metric g)."""
    return float(np.sqrt(np.sum(a.components**2)))


def duality_project(phi: KForm, sign: int) -> KForm:
    """``(phi + sign * *phi) / 2`` for ``sign`` in ``{+1, -1}``."""
    if phi.degree != 2:
        raise DegreeError("duality projection is defined on 2-forms")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return KForm(2, 0.5 * (phi.components + sign * hodge_star_array(phi.components, 2)))


# Rows map PAIRS-coordinates to coordinates in the orthonormal duality basis
# (omega_1^+, omega_2^+, omega_3^+, omega_1^-, omega_2^-, omega_3^-) / sqrt(2).
DUALITY_CHANGE = np.block([[np.eye(3), np.eye(3)], [np.eye(3), -np.eye(3)]]) / np.sqrt(2.0)
DUALITY_CHANGE.setflags(write=False)


@dataclass(frozen=True)
class DualityBasis:
    """``omega_a^pm = e^0 ^ e^a pm e^b ^ e^c`` for cyclic ``(a, b, c)``."""

    omega_plus: tuple[KForm, KForm, KForm]
    omega_minus: tuple[KForm, KForm, KForm]

    @classmethod
    def standard(cls) -> DualityBasis:
        plus = tuple(KForm.from_vector(np.sqrt(2.0) * DUALITY_CHANGE[a]) for a in range(3))
        minus = tuple(KForm.from_vector(np.sqrt(2.0) * DUALITY_CHANGE[3 + a]) for a in range(3))
        return cls(plus, minus)

    def all(self) -> tuple[KForm, ...]:
        return self.omega_plus + self.omega_minus


def omega(sign: int, a: int) -> KForm:
    """Duality basis element ``omega_a^sign`` with ``a`` in ``{1, 2, 3}``."""
    basis = DualityBasis.standard()
    return (basis.omega_plus if sign > 0 else basis.omega_minus)[a - 1]
