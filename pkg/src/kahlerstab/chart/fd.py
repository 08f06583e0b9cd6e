"""Batched central finite differences.

Every function differentiated here must accept points of shape ``(..., 4)``
and return ``batch + value_shape``.  The derivative of such a function is
again such a function (with one more value axis placed directly after the
batch axes), so second derivatives are obtained by nesting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DIM = 4


@dataclass(frozen=True)
class FDScheme:
    """Central differences with optional one-level Richardson extrapolation.

    With ``richardson`` the first derivative is ``(4 D_h - D_2h) / 3`` where
    ``D_h`` is the plain central quotient, i.e. the fourth-order five-point
    stencil.  Without it the scheme is the second-order two-point quotient.
    """

    step: float = 1e-3
    richardson: bool = True

    @property
    def offsets(self) -> np.ndarray:
        if self.richardson:
            return np.array([-2.0, -1.0, 1.0, 2.0])
        return np.array([-1.0, 1.0])

    @property
    def weights(self) -> np.ndarray:
        if self.richardson:
            return np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
        return np.array([-0.5, 0.5])

    @property
    def reach(self) -> float:
        """Largest coordinate displacement of one stencil application."""
        return float(np.abs(self.offsets).max() * self.step)


DEFAULT_SCHEME = FDScheme()


def derivative(func, x, scheme: FDScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Coordinate gradient of ``func`` at ``x``: result is ``batch + (4,) + value_shape``."""
    x = np.asarray(x, dtype=float)
    nb = x.ndim - 1
    offs = scheme.offsets
    shifts = scheme.step * offs[:, None, None] * np.eye(DIM)[None, :, :]
    pts = x[..., None, None, :] + shifts
    vals = np.asarray(func(pts))
    vals = np.moveaxis(vals, nb, 0)
    return np.tensordot(scheme.weights, vals, axes=(0, 0)) / scheme.step


def differentiate(func, scheme: FDScheme = DEFAULT_SCHEME):
    """Return the gradient of ``func`` as a new batched function."""
    return lambda x: derivative(func, x, scheme)
