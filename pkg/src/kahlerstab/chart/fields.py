"""Smooth test fields for the identity checks.

Fields are specified by frame components that are random polynomials of
degree at most 2 in the chart coordinates, multiplied against a fixed set of
frame tensors (for instance ``omega_a^- (x) omega_b^+`` for sections of
Lambda^- (x) Lambda^+).  Because the Gram-Schmidt frame is oriented, and is
unitary for the standard complex structure, these constraints hold at every
point, not only at the evaluation point.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..curvature import outer_arr
from ..exterior import PAIRS, DualityBasis, KForm
from .geometry import frame, from_frame
from .models import ChartModel

#: rank of the frame tensors by field kind
KIND_DEGREES = {
    "scalar": (0, 0),
    "form-1": (1, 0),
    "form-2": (2, 0),
    "form-3": (3, 0),
    "biform": (2, 2),
    "symtensor": (2, 0),
}


@dataclass(frozen=True, eq=False)
class TensorFieldSpec:
    """A test field: ``evaluator`` maps batched chart points to coordinate components."""

    kind: str
    evaluator: Callable
    description: str = ""

    @property
    def left(self) -> int:
        return KIND_DEGREES[self.kind][0]

    @property
    def right(self) -> int:
        return KIND_DEGREES[self.kind][1]

    @property
    def rank(self) -> int:
        return self.left + self.right

    def __call__(self, x):
        return self.evaluator(x)


def stream(seed: int, *labels) -> np.random.Generator:
    """Independent generator for a labelled sub-stream of ``seed``.

    String labels are hashed with CRC-32, so adding new labels never shifts
    existing streams.
    """
    key = tuple(zlib.crc32(lab.encode()) if isinstance(lab, str) else int(lab) for lab in labels)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass(frozen=True, eq=False)
class Polynomials:
    """``count`` quadratic polynomials ``c0 + c1.x + x.C2.x`` evaluated together."""

    c0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    @classmethod
    def random(cls, rng: np.random.Generator, count: int, scale: float = 1.0, degree: int = 2) -> Polynomials:
        c0 = rng.normal(scale=scale, size=count)
        c1 = rng.normal(scale=scale, size=(count, 4)) if degree >= 1 else np.zeros((count, 4))
        c2 = rng.normal(scale=0.5 * scale, size=(count, 4, 4)) if degree >= 2 else np.zeros((count, 4, 4))
        return cls(c0, c1, 0.5 * (c2 + np.swapaxes(c2, -1, -2)))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.c0 + np.einsum("...i,ni->...n", x, self.c1) + np.einsum("...i,nij,...j->...n", x, self.c2, x)


def frame_field(model: ChartModel, kind: str, basis: np.ndarray, polys: Polynomials, description: str = "") -> TensorFieldSpec:
    """Field with frame components ``sum_n p_n(x) basis[n]``."""
    rank = sum(KIND_DEGREES[kind])

    def evaluator(x):
        coeffs = polys(x)
        frame_vals = np.tensordot(coeffs, basis, axes=(-1, 0))
        if rank == 0:
            return frame_vals
        _, low = frame(model, x)
        return from_frame(frame_vals, low, rank)

    return TensorFieldSpec(kind, evaluator, description)


# -- frame tensor bases -----------------------------------------------------------


def _pair_forms() -> list[np.ndarray]:
    return [KForm.basis(i, j).components for i, j in PAIRS]


def _duality() -> tuple[list[np.ndarray], list[np.ndarray]]:
    b = DualityBasis.standard()
    return [w.components for w in b.omega_plus], [w.components for w in b.omega_minus]


def basis_for(kind: str, subspace: str | None = None) -> np.ndarray:
    """Frame tensors spanning the requested bundle.

    Subspaces: ``"minus-plus"`` (Lambda^- (x) Lambda^+), ``"11"`` (real
    (1,1)-forms, i.e. ``<omega_1^+> + Lambda^-``), ``"anti"``
    (Lambda^- (x) span(omega_2^+, omega_3^+)), ``"minus"``/``"plus"`` for forms.
    """
    plus, minus = _duality()
    if kind == "scalar":
        return np.ones((1,))
    if kind == "form-1":
        return np.eye(4)
    if kind == "form-3":
        from ..exterior import hodge_star_array

        return np.array([hodge_star_array(np.eye(4)[i], 1) for i in range(4)])
    if kind == "form-2":
        if subspace is None:
            return np.array(_pair_forms())
        if subspace == "11":
            return np.array([plus[0]] + minus)
        if subspace == "minus":
            return np.array(minus)
        if subspace == "plus":
            return np.array(plus)
    if kind == "symtensor":
        out = []
        for i in range(4):
            for j in range(i, 4):
                e = np.zeros((4, 4))
                e[i, j] = e[j, i] = 1.0
                out.append(e)
        return np.array(out)
    if kind == "biform":
        if subspace is None:
            forms = _pair_forms()
            return np.array([outer_arr(p, q) for p in forms for q in forms])
        if subspace == "minus-plus":
            return np.array([outer_arr(m, p) for m in minus for p in plus])
        if subspace == "anti":
            return np.array([outer_arr(m, p) for m in minus for p in plus[1:]])
    raise ValueError(f"no basis for kind={kind!r}, subspace={subspace!r}")


def random_field(model: ChartModel, rng: np.random.Generator, kind: str, subspace: str | None = None,
                 scale: float = 1.0, degree: int = 2) -> TensorFieldSpec:
    basis = basis_for(kind, subspace)
    polys = Polynomials.random(rng, len(basis), scale, degree)
    label = kind if subspace is None else f"{kind}[{subspace}]"
    return frame_field(model, kind, basis, polys, f"random degree-{degree} polynomial {label}")


def constant_field(model: ChartModel, kind: str, frame_value: np.ndarray, description: str = "") -> TensorFieldSpec:
    polys = Polynomials(np.ones(1), np.zeros((1, 4)), np.zeros((1, 4, 4)))
    return frame_field(model, kind, np.asarray(frame_value, dtype=float)[None], polys, description or "constant frame field")
