"""
Affine-invariant geometry of SPD matrices.

Every matrix function goes through the symmetric eigendecomposition cached on
``SpdMatrix``; composite products are re-symmetrized before use. All functions
are pure.
"""

from __future__ import annotations

from collections.abc import Sequence
import logging
import math

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from core.domain.classes import check_simplex
from core.domain.spd import EigenDecomposition, FloatArray, SpdMatrix, check_symmetric, symmetrize
from core.utils.constants import FRECHET_CONTRACTION, FRECHET_MAX_HALVINGS, FRECHET_MAX_ITER, FRECHET_TOL
from core.utils.errors import ConvergenceError, DimensionMismatchError, NotSpdError, ValidationError

logger = logging.getLogger(__name__)


def _same_dim(a: SpdMatrix, b: SpdMatrix) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"matrix dimensions differ: {a.dim} vs {b.dim}")


def spd_power(a: SpdMatrix, p: float) -> SpdMatrix:
    """A^p = V diag(w^p) V^T for any finite real exponent."""
    if not math.isfinite(p):
        raise ValidationError(f"exponent must be finite, got {p}")
    if p == 1.0:
        return a
    return SpdMatrix(a.eig.apply(lambda w: w**p))


def spd_log(a: SpdMatrix) -> FloatArray:
    """Principal matrix logarithm; the result is symmetric, not SPD."""
    return a.eig.apply(np.log)


def spd_exp(s: ArrayLike) -> SpdMatrix:
    """Matrix exponential of a symmetric matrix."""
    sym = check_symmetric(np.array(s, dtype=np.float64), "exponent")
    return SpdMatrix(EigenDecomposition.of(sym).apply(np.exp))


def _sqrt_and_invsqrt(a: SpdMatrix) -> tuple[FloatArray, FloatArray]:
    return a.eig.apply(np.sqrt), a.eig.apply(lambda w: 1.0 / np.sqrt(w))


def _logm_sym(x: FloatArray) -> FloatArray:
    return EigenDecomposition.of(symmetrize(x)).apply(np.log)


def geodesic(a: SpdMatrix, b: SpdMatrix, lam: float) -> SpdMatrix:
    """Point at fraction ``lam`` of the geodesic from ``a`` (lam=0) to ``b`` (lam=1)."""
    _same_dim(a, b)
    if not (math.isfinite(lam) and 0.0 <= lam <= 1.0):
        raise ValidationError(f"geodesic position must lie in [0, 1], got {lam}")
    if lam == 0.0:
        return a
    if lam == 1.0:
        return b
    sqrt_a, isqrt_a = _sqrt_and_invsqrt(a)
    inner = EigenDecomposition.of(symmetrize(isqrt_a @ b.values @ isqrt_a))
    return SpdMatrix(symmetrize(sqrt_a @ inner.apply(lambda w: w**lam) @ sqrt_a))


def riemann_distance(a: SpdMatrix, b: SpdMatrix) -> float:
    """sqrt(sum_k log^2 lambda_k(A^-1 B)) via the generalized symmetric eigenproblem."""
    _same_dim(a, b)
    w = linalg.eigvalsh(b.values, a.values)
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


def frechet_gradient(mean: SpdMatrix, mats: Sequence[SpdMatrix], weights: FloatArray) -> FloatArray:
    """Tangent-space gradient sum_i w_i log(M^-1/2 A_i M^-1/2) at ``mean``."""
    _, isqrt = _sqrt_and_invsqrt(mean)
    grad = np.zeros((mean.dim, mean.dim))
    for m, w in zip(mats, weights, strict=True):
        if w == 0.0:
            continue
        grad += w * _logm_sym(isqrt @ m.values @ isqrt)
    return symmetrize(grad)


def _descend(
    mean: SpdMatrix, grad: FloatArray, norm: float, mats: Sequence[SpdMatrix], weights: FloatArray
) -> tuple[SpdMatrix, FloatArray, float] | None:
    """Geodesic step M^1/2 exp(t grad) M^1/2 from t = 1, halving t while that lowers ||grad||_F.

    Returns None when no step size in the halving sequence reduces the gradient norm.
    """
    sqrt_m, _ = _sqrt_and_invsqrt(mean)
    direction = EigenDecomposition.of(grad)
    v = direction.eigenvectors
    best: tuple[SpdMatrix, FloatArray, float] | None = None
    step = 1.0
    for _ in range(FRECHET_MAX_HALVINGS):
        scaled = EigenDecomposition(eigenvalues=step * direction.eigenvalues, eigenvectors=v)
        try:
            candidate = SpdMatrix(symmetrize(sqrt_m @ scaled.apply(np.exp) @ sqrt_m))
        except NotSpdError:
            step *= 0.5
            continue
        cand_grad = frechet_gradient(candidate, mats, weights)
        cand_norm = float(np.linalg.norm(cand_grad))
        if best is not None and cand_norm >= best[2] and best[2] < norm:
            break
        if best is None or cand_norm < best[2]:
            best = (candidate, cand_grad, cand_norm)
        if best[2] <= FRECHET_CONTRACTION * norm:
            break
        step *= 0.5
    if best is None or best[2] >= norm:
        return None
    return best


def frechet_mean(
    mats: Sequence[SpdMatrix],
    weights: ArrayLike | None = None,
    *,
    tol: float = FRECHET_TOL,
    max_iter: int = FRECHET_MAX_ITER,
) -> SpdMatrix:
    """Weighted affine-invariant (Karcher) mean by fixed-point iteration.

    Starts from the weighted arithmetic mean and iterates
    M <- M^1/2 exp(t grad) M^1/2 until ||grad||_F <= tol. Each iteration tries
    the unit step first and halves it while the gradient norm keeps falling, so
    widely dispersed sets converge where the plain unit step overshoots.
    ``weights`` defaults to uniform.
    """
    if not mats:
        raise ValidationError("cannot average an empty list of matrices")
    dim = mats[0].dim
    for m in mats:
        if m.dim != dim:
            raise DimensionMismatchError(f"matrices to average have mixed dimensions {dim} and {m.dim}")
    if weights is None:
        w = np.full(len(mats), 1.0 / len(mats))
    else:
        w = check_simplex(np.asarray(weights, dtype=np.float64), "weights")
        if w.size != len(mats):
            raise ValidationError(f"{w.size} weights for {len(mats)} matrices")

    init = np.zeros((dim, dim))
    for m, wi in zip(mats, w, strict=True):
        if wi != 0.0:
            init += wi * m.values
    mean = SpdMatrix(init)
    grad = frechet_gradient(mean, mats, w)
    norm = float(np.linalg.norm(grad))
    for iteration in range(max_iter):
        logger.debug(f"frechet iteration {iteration}: gradient norm {norm:.3e}")
        if norm <= tol:
            return mean
        update = _descend(mean, grad, norm, mats, w)
        if update is None:
            break
        mean, grad, norm = update
    if norm <= tol:
        return mean
    raise ConvergenceError("Frechet mean did not converge", gradient_norm=norm, iterations=max_iter)
