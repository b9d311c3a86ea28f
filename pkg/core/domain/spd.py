"""Symmetric positive-definite matrices, the feature object of every classifier."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from core.utils.constants import CONDITION_FLOOR, SYMMETRY_RTOL
from core.utils.errors import IllConditionedError, NotSpdError

FloatArray = NDArray[np.float64]


def symmetrize(values: FloatArray) -> FloatArray:
    return (values + values.T) / 2.0


def check_symmetric(values: FloatArray, what: str = "matrix") -> FloatArray:
    """Return ``values`` symmetrized, or raise if it is not square, finite and symmetric."""
    if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] == 0:
        raise NotSpdError(f"{what} must be a non-empty square matrix, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise NotSpdError(f"{what} has non-finite entries")
    scale = float(np.max(np.abs(values)))
    asymmetry = float(np.max(np.abs(values - values.T)))
    if asymmetry > SYMMETRY_RTOL * scale:
        raise NotSpdError(f"{what} is not symmetric (max |A - A^T| = {asymmetry:.3e})")
    return symmetrize(values)


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of a symmetric matrix."""

    eigenvalues: FloatArray
    eigenvectors: FloatArray

    @classmethod
    def of(cls, values: FloatArray) -> EigenDecomposition:
        w, v = linalg.eigh(values)
        w.setflags(write=False)
        v.setflags(write=False)
        return cls(eigenvalues=w, eigenvectors=v)

    def apply(self, fn: Callable[[FloatArray], FloatArray]) -> FloatArray:
        """Matrix function V diag(fn(w)) V^T, re-symmetrized."""
        v = self.eigenvectors
        return symmetrize((v * fn(self.eigenvalues)) @ v.T)

    def reconstruct(self) -> FloatArray:
        return self.apply(lambda w: w)


class SpdMatrix:
    """An immutable C x C symmetric positive-definite matrix.

    Construction checks symmetry (relative tolerance 1e-10), strict positivity
    and a condition-number floor of 1e-12; the eigendecomposition computed for
    the check is kept and reused by every matrix function.
    """

    __slots__ = ("_values", "_eig")

    def __init__(self, values: ArrayLike):
        arr = check_symmetric(np.array(values, dtype=np.float64), "SPD candidate")
        eig = EigenDecomposition.of(arr)
        smallest, largest = float(eig.eigenvalues[0]), float(eig.eigenvalues[-1])
        if smallest <= 0.0:
            raise NotSpdError(f"matrix is not positive definite (smallest eigenvalue {smallest:.3e})")
        if smallest <= CONDITION_FLOOR * largest:
            raise IllConditionedError(
                f"matrix is ill-conditioned (eigenvalue ratio {smallest / largest:.3e}); "
                "regularize upstream"
            )
        arr.setflags(write=False)
        self._values = arr
        self._eig = eig

    @classmethod
    def identity(cls, dim: int) -> SpdMatrix:
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return int(self._values.shape[0])

    @property
    def values(self) -> FloatArray:
        """Read-only dense values."""
        return self._values

    @property
    def eig(self) -> EigenDecomposition:
        return self._eig

    def __getstate__(self) -> FloatArray:
        return self._values

    def __setstate__(self, state: FloatArray) -> None:
        arr = np.array(state, dtype=np.float64)
        arr.setflags(write=False)
        self._values = arr
        self._eig = EigenDecomposition.of(arr)

    def __repr__(self) -> str:
        return f"SpdMatrix(dim={self.dim}, values={self._values.tolist()!r})"
