"""Desk-scale ground truth: exact enumeration, exact saddle, best responses.

Everything here is brute force or closed form, kept independent of the
asynchronous solver so it can serve as a reference for it. Enumeration
guards reject instances too large to enumerate rather than degrade.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .agents import StepSizes
from .errors import (
    ConvergenceError,
    EnumerationError,
    InfeasibleInstanceError,
)
from .lagrangian import (
    DualBall,
    full_dual_grad,
    full_primal_grad,
    project_dual_ball,
)
from .model import FEAS_ATOL, MilpInstance, RelaxedInstance

ENUMERATION_GUARD = 10**7
_CHUNK = 200_000


def _integer_grids(instance: MilpInstance):
    hl, hu = instance.hull_bounds()
    mask = instance.integral_mask()
    if not mask.all():
        raise EnumerationError(
            "exact enumeration supports pure-integer instances only"
        )
    widths = (hu - hl).astype(np.int64) + 1
    total = int(np.prod(widths, dtype=object))
    if total > ENUMERATION_GUARD:
        raise EnumerationError(
            f"enumeration of {total} points exceeds the {ENUMERATION_GUARD} guard"
        )
    return hl.astype(np.int64), widths, total


def _decode_chunk(start: int, stop: int, lows: np.ndarray, widths: np.ndarray):
    """Mixed-radix decode of point indices [start, stop) into grid points."""
    idx = np.arange(start, stop, dtype=np.int64)
    n = widths.size
    pts = np.empty((idx.size, n), dtype=np.int64)
    rem = idx
    for j in range(n - 1, -1, -1):
        rem, digit = np.divmod(rem, widths[j])
        pts[:, j] = lows[j] + digit
    return pts


def exact_milp(instance: MilpInstance) -> Tuple[np.ndarray, float]:
    """Exact optimum of the original program by exhaustive enumeration.

    Pure-integer instances only, and at most 10^7 grid points. Feasible
    points are filtered by the coupling rows; ties break toward the
    lexicographically smallest point for determinism.
    """
    lows, widths, total = _integer_grids(instance)
    best_cost = np.inf
    best_x = None
    for start in range(0, total, _CHUNK):
        pts = _decode_chunk(start, min(start + _CHUNK, total), lows, widths)
        xs = pts.astype(float)
        feas = np.all(xs @ instance.A.T <= instance.b + FEAS_ATOL, axis=1)
        if not feas.any():
            continue
        costs = xs[feas] @ instance.c
        k = int(np.argmin(costs))
        if costs[k] < best_cost - 1e-12:
            best_cost = float(costs[k])
            best_x = xs[feas][k]
    if best_x is None:
        raise InfeasibleInstanceError("no integer point satisfies the coupling rows")
    return best_x, best_cost


def best_response(relaxed: RelaxedInstance, lam: np.ndarray) -> np.ndarray:
    """Exact minimizer of L(., lam) over Z.

    The primal part is a separable quadratic with identity-scaled
    curvature, so the minimizer is ``clip(-(c + A'lam)/alpha)`` per box.
    """
    base = relaxed.base
    lam = np.asarray(lam, dtype=float)
    hl, hu = base.hull_bounds()
    return np.clip(-(base.c + base.A.T @ lam) / relaxed.kappa.alpha, hl, hu)


def kkt_residual(
    relaxed: RelaxedInstance,
    z: np.ndarray,
    lam: np.ndarray,
    ball: DualBall,
) -> float:
    """Fixed-point residual ``||z - P_Z[z - g_z]|| + ||lam - P_M[lam + g_lam]||``."""
    hl, hu = relaxed.base.hull_bounds()
    gz = full_primal_grad(z, lam, relaxed)
    gl = full_dual_grad(z, lam, relaxed)
    rz = np.linalg.norm(z - np.clip(z - gz, hl, hu))
    rl = np.linalg.norm(lam - project_dual_ball(lam + gl, ball))
    return float(rz + rl)


def exact_saddle(
    relaxed: RelaxedInstance,
    tol: float = 1e-10,
    steps: Optional[StepSizes] = None,
    z0: Optional[np.ndarray] = None,
    lam0: Optional[np.ndarray] = None,
    max_iters: int = 500_000,
) -> Tuple[np.ndarray, np.ndarray]:
    """Saddle point of the regularized Lagrangian to a KKT residual below tol.

    Runs the synchronous full-vector projected gradient descent-ascent:
    the dual ascends using the current primal, then the primal descends
    using the fresh dual. Strong convexity-concavity makes the saddle
    point unique, so the start point only affects the iteration count.
    """
    from .analysis import default_step_sizes  # local import to avoid a cycle

    base = relaxed.base
    hl, hu = base.hull_bounds()
    if steps is None:
        steps = default_step_sizes(relaxed)
    ball = DualBall(bound=relaxed.dual_bound, dimension=base.num_rows)
    z = np.clip(np.zeros(base.dimension), hl, hu) if z0 is None else np.array(z0, dtype=float)
    lam = np.zeros(base.num_rows) if lam0 is None else np.array(lam0, dtype=float)
    check_every = 10
    for it in range(1, max_iters + 1):
        lam = project_dual_ball(lam + steps.beta * full_dual_grad(z, lam, relaxed), ball)
        z = np.clip(z - steps.gamma * full_primal_grad(z, lam, relaxed), hl, hu)
        if it % check_every == 0 or it == max_iters:
            if kkt_residual(relaxed, z, lam, ball) < tol:
                return z, lam
    raise ConvergenceError(
        f"saddle iteration did not reach residual {tol:g} in {max_iters} iterations"
    )


@dataclass(frozen=True)
class VertexCensus:
    """Vertices of the tightened relaxed feasible set and their integrality."""

    vertices: np.ndarray            # (num_vertices, n)
    fractional_blocks: np.ndarray   # per-vertex count of blocks outside X_l
    y: int

    @property
    def max_fractional_blocks(self) -> int:
        return int(self.fractional_blocks.max()) if self.fractional_blocks.size else 0


def vertex_integrality_census(relaxed: RelaxedInstance, atol: float = 1e-8) -> VertexCensus:
    """Enumerate vertices of ``{z in Z : Az <= b - rho}`` and count, per
    vertex, how many blocks take a value outside their mixed-integer set.

    Tiny instances only: vertices come from solving all n-subsets of the
    active-constraint candidates (box faces plus coupling rows), which is
    combinatorial in the dimension.
    """
    base = relaxed.base
    n, y = base.dimension, base.num_rows
    hl, hu = base.hull_bounds()
    rows = np.vstack([np.eye(n), -np.eye(n), base.A])
    rhs = np.concatenate([hu, -hl, relaxed.tightened_rhs])
    m_rows = rows.shape[0]
    from math import comb

    if comb(m_rows, n) > 200_000:
        raise EnumerationError("vertex enumeration guard: too many active sets")
    seen = {}
    for combo in itertools.combinations(range(m_rows), n):
        M = rows[list(combo)]
        v = rhs[list(combo)]
        try:
            x = np.linalg.solve(M, v)
        except np.linalg.LinAlgError:
            continue
        if not np.isfinite(x).all():
            continue
        if np.any(rows @ x > rhs + 1e-7):
            continue
        key = tuple(np.round(x, 7))
        seen[key] = x
    if not seen:
        raise InfeasibleInstanceError("tightened relaxed feasible set is empty")
    verts = np.array([seen[k] for k in sorted(seen)])
    counts = np.zeros(verts.shape[0], dtype=int)
    mask = base.integral_mask()
    for sl_idx, sl in enumerate(base.block_slices()):
        blk_mask = mask[sl]
        if not blk_mask.any():
            continue
        vals = verts[:, sl][:, blk_mask]
        frac = np.any(np.abs(vals - np.round(vals)) > atol, axis=1)
        counts += frac.astype(int)
    return VertexCensus(vertices=verts, fractional_blocks=counts, y=y)
