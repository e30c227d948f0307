"""Rate constants, step-size validation, and the convergence envelopes.

The dual contraction factor is ``q_d = (1 - beta*delta)^2 + beta^2``,
admissible when ``beta < 2*delta/(1 + delta^2)``; the dual step must also
stay below ``2*alpha/(||A||_2 + 2*alpha*delta)``. The primal factor is
``q_p = 1 - theta*gamma`` with theta not available in closed form, so it
is estimated from a synchronous primal-only run and discounted by 2x
before envelopes are built (a larger q_p only loosens the bounds).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .agents import StepSizes
from .errors import ConvergenceError, StepSizeError
from .model import MilpInstance, RelaxedInstance


def spectral_norm(A: np.ndarray, tol: float = 1e-10, max_iters: int = 200) -> float:
    """Largest singular value by power iteration on the smaller Gram matrix.

    Deterministic start vector; raises if the value has not settled to the
    relative tolerance within the iteration cap.
    """
    A = np.asarray(A, dtype=float)
    if not np.any(A):
        return 0.0
    G = A @ A.T if A.shape[0] <= A.shape[1] else A.T @ A
    rng = np.random.default_rng(np.random.SeedSequence(entropy=0, spawn_key=(3, 0)))
    v = rng.standard_normal(G.shape[0])
    v /= np.linalg.norm(v)
    sigma_prev = 0.0
    for _ in range(max_iters):
        w = G @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # start vector fell in the null space; reseed deterministically
            v = rng.standard_normal(G.shape[0])
            v /= np.linalg.norm(v)
            continue
        v = w / norm_w
        sigma = float(np.sqrt(v @ (G @ v)))
        if abs(sigma - sigma_prev) <= tol * max(sigma, 1e-300):
            return sigma
        sigma_prev = sigma
    raise ConvergenceError("power iteration did not converge in 200 iterations")


@dataclass(frozen=True)
class RateConstants:
    """Everything the envelopes need, in one place."""

    q_d: float
    A_norm: float
    r: float
    lam_bound: float
    alpha: float
    delta: float
    beta: float
    gamma: float
    theta: Optional[float] = None

    @property
    def q_p(self) -> Optional[float]:
        if self.theta is None:
            return None
        return 1.0 - self.theta * self.gamma

    def with_theta(self, theta: float) -> "RateConstants":
        return RateConstants(
            q_d=self.q_d,
            A_norm=self.A_norm,
            r=self.r,
            lam_bound=self.lam_bound,
            alpha=self.alpha,
            delta=self.delta,
            beta=self.beta,
            gamma=self.gamma,
            theta=theta,
        )


def beta_ceilings(relaxed: RelaxedInstance, A_norm: Optional[float] = None):
    alpha, delta = relaxed.kappa.alpha, relaxed.kappa.delta
    if A_norm is None:
        A_norm = spectral_norm(relaxed.base.A)
    return (
        2.0 * alpha / (A_norm + 2.0 * alpha * delta),
        2.0 * delta / (1.0 + delta * delta),
        A_norm,
    )


def validate_step_sizes(
    relaxed: RelaxedInstance,
    steps: StepSizes,
    theta: Optional[float] = None,
) -> RateConstants:
    """Check both dual-step ceilings and assemble the rate constants.

    Rejects beta outside the open interval below the binding ceiling and
    nonpositive gamma. ``q_d < 1`` holds exactly when beta clears the
    second ceiling; both are computed so callers can see the margin.
    """
    ceil_a, ceil_d, A_norm = beta_ceilings(relaxed)
    if steps.gamma <= 0:
        raise StepSizeError(f"gamma must be positive, got {steps.gamma:g}")
    if not (0 < steps.beta < min(ceil_a, ceil_d)):
        binding = "2*alpha/(||A|| + 2*alpha*delta)" if ceil_a <= ceil_d else "2*delta/(1 + delta^2)"
        raise StepSizeError(
            f"beta {steps.beta:g} outside (0, {min(ceil_a, ceil_d):g}); "
            f"binding ceiling is {binding}"
        )
    delta = relaxed.kappa.delta
    q_d = (1.0 - steps.beta * delta) ** 2 + steps.beta**2
    if not q_d < 1.0:
        raise StepSizeError(f"dual contraction factor {q_d:.17g} is not below 1")
    return RateConstants(
        q_d=q_d,
        A_norm=A_norm,
        r=relaxed.radius,
        lam_bound=relaxed.dual_bound,
        alpha=relaxed.kappa.alpha,
        delta=delta,
        beta=steps.beta,
        gamma=steps.gamma,
        theta=theta,
    )


def default_step_sizes(relaxed: RelaxedInstance, safety: float = 0.9) -> StepSizes:
    """Paper-style primal step, dual step at a fraction of its ceiling."""
    ceil_a, ceil_d, _ = beta_ceilings(relaxed)
    gamma = min(0.1, 1.0 / relaxed.kappa.alpha)
    return StepSizes(gamma=gamma, beta=safety * min(ceil_a, ceil_d))


def estimate_theta(
    relaxed: RelaxedInstance,
    gamma: float,
    lam: Optional[np.ndarray] = None,
    iters: int = 50,
    safety: float = 2.0,
) -> float:
    """Empirical primal rate constant with a safety discount.

    Runs the synchronous primal-only iteration at a fixed dual vector
    (default zero), measures the slowest observed per-tick contraction
    toward the exact best response, and converts it to theta. The fit is
    capped at the regularization strength alpha, which the projected
    iteration can never beat, then divided by ``safety`` so envelopes err
    on the loose side. Reported envelope checks therefore hold "under the
    estimated theta" rather than as a closed-form guarantee.
    """
    from .oracle import best_response  # local import to avoid a cycle

    base = relaxed.base
    hl, hu = base.hull_bounds()
    lam = np.zeros(base.num_rows) if lam is None else np.asarray(lam, dtype=float)
    target = best_response(relaxed, lam)
    z = hu.copy()
    if np.linalg.norm(z - target) < 1e-12:
        z = hl.copy()
    alpha = relaxed.kappa.alpha
    grad_fixed = base.c + base.A.T @ lam
    worst = 0.0
    d_prev = np.linalg.norm(z - target)
    for _ in range(iters):
        z = np.clip(z - gamma * (grad_fixed + alpha * z), hl, hu)
        d = np.linalg.norm(z - target)
        if d_prev > 1e-12:
            worst = max(worst, d / d_prev)
        d_prev = d
        if d < 1e-14:
            break
    rate = min(worst, 1.0 - 1e-12)
    theta_fit = (1.0 - rate) / gamma
    return min(theta_fit, alpha) / safety


def _geometric_partial_sum(q: float, n: int) -> float:
    # sum_{i=0}^{n} q^i in closed form
    if q == 1.0:
        return float(n + 1)
    return (1.0 - q ** (n + 1)) / (1.0 - q)


def dual_envelope(constants: RateConstants, lam0_dist: float, n: int) -> float:
    """Bound on the squared dual error after the n-th dual update.

    ``q_d^n d0^2 + (4 r^2 q_d q_p^2 + 8 r^2 beta^2 q_p) ||A||^2 sum_{i=0}^n q_d^i``.
    """
    if constants.q_p is None:
        raise ValueError("envelope needs theta; estimate or supply it")
    q_d, q_p = constants.q_d, constants.q_p
    r, A2 = constants.r, constants.A_norm**2
    offset = (4.0 * r**2 * q_d * q_p**2 + 8.0 * r**2 * constants.beta**2 * q_p) * A2
    return q_d**n * lam0_dist**2 + offset * _geometric_partial_sum(q_d, n)


def primal_envelope(
    constants: RateConstants, lam0_dist: float, n: int, epoch_gap: int = 1
) -> float:
    """Bound on the primal error at the n-th dual epoch (n >= 1).

    ``2 q_p^(t_n - t_{n-1}) r + (||A||/alpha) sqrt(dual_envelope(n-1))``.
    """
    if n < 1:
        raise ValueError("primal envelope starts at the first dual epoch")
    if constants.q_p is None:
        raise ValueError("envelope needs theta; estimate or supply it")
    head = 2.0 * constants.q_p**epoch_gap * constants.r
    tail = (constants.A_norm / constants.alpha) * np.sqrt(
        dual_envelope(constants, lam0_dist, n - 1)
    )
    return float(head + tail)


def regularization_gap(relaxed: RelaxedInstance) -> float:
    """Cost gap bound between the regularized and unregularized solutions.

    ``||c|| * Lambda * sqrt(delta / (2 alpha)) + (alpha / 2) * r``.
    """
    alpha, delta = relaxed.kappa.alpha, relaxed.kappa.delta
    c_norm = float(np.linalg.norm(relaxed.base.c))
    return c_norm * relaxed.dual_bound * np.sqrt(delta / (2.0 * alpha)) + 0.5 * alpha * relaxed.radius


def suboptimality_certificate(instance: MilpInstance, relaxed: RelaxedInstance) -> float:
    """Upper bound on ``c'z_hat - c'x_star``.

    ``y * max_l eta_l`` plus the regularization gap, where ``eta_l`` is
    the cost range of block l over its mixed-integer set. The range of a
    linear functional over the hull box is the weighted sum of widths.
    """
    y = instance.num_rows
    eta_max = 0.0
    for blk, sl in zip(instance.blocks, instance.block_slices()):
        hl, hu = blk.hull_bounds()
        eta = float(np.abs(instance.c[sl]) @ (hu - hl))
        eta_max = max(eta_max, eta)
    return y * eta_max + regularization_gap(relaxed)


def check_lemma4(relaxed: RelaxedInstance, lam1: np.ndarray, lam2: np.ndarray) -> dict:
    """Best-response monotonicity margins for a pair of dual vectors.

    With ``z_i`` the exact best response to ``lam_i`` and ``g(z) = Az - b + rho``:

        (lam2 - lam1)'(-g(z2) + g(z1)) >= (alpha/||A||^2) ||g(z2) - g(z1)||^2
        ||lam2 - lam1|| >= (alpha/||A||) ||z2 - z1||
    """
    from .oracle import best_response

    lam1 = np.asarray(lam1, dtype=float)
    lam2 = np.asarray(lam2, dtype=float)
    z1 = best_response(relaxed, lam1)
    z2 = best_response(relaxed, lam2)
    A = relaxed.base.A
    A_norm = spectral_norm(A)
    g1, g2 = A @ z1, A @ z2  # b and rho cancel in every difference
    alpha = relaxed.kappa.alpha
    lhs1 = float((lam2 - lam1) @ (g1 - g2))
    rhs1 = 0.0 if A_norm == 0 else alpha / A_norm**2 * float(np.sum((g2 - g1) ** 2))
    lhs2 = float(np.linalg.norm(lam2 - lam1))
    rhs2 = 0.0 if A_norm == 0 else alpha / A_norm * float(np.linalg.norm(z2 - z1))
    return {
        "gradient_monotonicity": (lhs1, rhs1, lhs1 - rhs1),
        "response_lipschitz": (lhs2, rhs2, lhs2 - rhs2),
        "z1": z1,
        "z2": z2,
        "holds": bool(lhs1 >= rhs1 - 1e-9 and lhs2 >= rhs2 - 1e-9),
    }
