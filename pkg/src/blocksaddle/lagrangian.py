"""Regularized Lagrangian, its block gradients, and the two projections.

The saddle function is

    L(z, lam) = c'z + (alpha/2)||z||^2 + lam'(Az - b + rho) - (delta/2)||lam||^2,

strongly convex in z and strongly concave in lam. Primal blocks project
onto their hull boxes; dual blocks project onto the nonnegative orthant
intersected with an l1 ball of radius equal to the multiplier bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import BlockSet, RelaxedInstance


@dataclass(frozen=True)
class DualBall:
    """The set ``{v >= 0 : ||v||_1 <= bound}`` for one dual block.

    Every dual block shares the same bound, taken from the multiplier
    bound of the full dual vector.
    """

    bound: float
    dimension: int

    def __post_init__(self):
        if not self.bound > 0:
            raise ValidationError("dual ball bound must be positive")
        if self.dimension < 1:
            raise ValidationError("dual ball dimension must be at least 1")

    def contains(self, v: np.ndarray, atol: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= -atol) and np.sum(np.abs(v)) <= self.bound + atol)


def eval_lagrangian(z: np.ndarray, lam: np.ndarray, relaxed: RelaxedInstance) -> float:
    """Scalar value of the regularized Lagrangian at (z, lam)."""
    base = relaxed.base
    z = np.asarray(z, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if z.shape != (base.dimension,):
        raise ValidationError("z has the wrong dimension")
    if lam.shape != (base.num_rows,):
        raise ValidationError("lam has the wrong dimension")
    alpha, delta = relaxed.kappa.alpha, relaxed.kappa.delta
    return float(
        base.c @ z
        + 0.5 * alpha * (z @ z)
        + lam @ (base.A @ z - base.b + relaxed.rho)
        - 0.5 * delta * (lam @ lam)
    )


def full_primal_grad(z: np.ndarray, lam: np.ndarray, relaxed: RelaxedInstance) -> np.ndarray:
    """Gradient in z: ``c + alpha z + A' lam`` on the full vector."""
    base = relaxed.base
    return base.c + relaxed.kappa.alpha * z + base.A.T @ lam


def full_dual_grad(z: np.ndarray, lam: np.ndarray, relaxed: RelaxedInstance) -> np.ndarray:
    """Gradient in lam: ``A z - b + rho - delta lam`` on the full vector."""
    base = relaxed.base
    return base.A @ z - base.b + relaxed.rho - relaxed.kappa.delta * lam


def primal_block_grad(
    block: slice, z: np.ndarray, lam: np.ndarray, relaxed: RelaxedInstance
) -> np.ndarray:
    """Block slice of the primal gradient.

    Computed by slicing the full-vector expression so the per-agent and
    batched code paths share the exact same floating-point arithmetic.
    """
    z = np.asarray(z, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if z.shape != (relaxed.base.dimension,):
        raise ValidationError("z has the wrong dimension")
    if lam.shape != (relaxed.base.num_rows,):
        raise ValidationError("lam has the wrong dimension")
    return full_primal_grad(z, lam, relaxed)[block]


def dual_block_grad(
    rows: slice, z: np.ndarray, lam: np.ndarray, relaxed: RelaxedInstance
) -> np.ndarray:
    """Block slice of the dual gradient ``(Az - b + rho)_[q] - delta lam_[q]``."""
    z = np.asarray(z, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if z.shape != (relaxed.base.dimension,):
        raise ValidationError("z has the wrong dimension")
    if lam.shape != (relaxed.base.num_rows,):
        raise ValidationError("lam has the wrong dimension")
    return full_dual_grad(z, lam, relaxed)[rows]


def project_box(v: np.ndarray, block: BlockSet) -> np.ndarray:
    """Coordinate-wise clamp onto the block's hull box.

    The integrality mask is ignored: iterates live in conv(X), not X.
    """
    hl, hu = block.hull_bounds()
    return np.clip(np.asarray(v, dtype=float), hl, hu)


def project_dual_ball(v: np.ndarray, ball: DualBall) -> np.ndarray:
    """Exact Euclidean projection onto ``{v >= 0, ||v||_1 <= bound}``.

    Clip negatives to zero; if the l1 norm still exceeds the bound, apply
    the sort-and-shift simplex projection onto the ``||.||_1 = bound``
    face: with the clipped vector sorted in decreasing order, the KKT
    multiplier is the largest shift ``theta`` keeping the surviving
    coordinates positive, and the projection is ``max(v - theta, 0)``.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (ball.dimension,):
        raise ValidationError("vector and ball dimensions differ")
    w = np.maximum(v, 0.0)
    total = w.sum()
    if total <= ball.bound:
        return w
    u = np.sort(w)[::-1]
    cssv = np.cumsum(u) - ball.bound
    idx = np.arange(1, u.size + 1)
    support = np.nonzero(u * idx > cssv)[0]
    k = support[-1]
    theta = cssv[k] / (k + 1.0)
    return np.maximum(w - theta, 0.0)
