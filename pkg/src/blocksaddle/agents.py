"""Agent state machines for the block-based saddle-point iteration.

A primal agent owns one block of z and performs projected gradient
descent on it; a dual agent owns one block of lam and performs projected
gradient ascent every barrier tick. Each agent holds full-length local
copies of both vectors, but its own update reads only its own block and
the dual vector, so stale foreign primal blocks never change the result
(verified by test rather than by construction).

Agents are oblivious to the schedule: callers decide when steps happen.
A single agent's steps are strictly sequential; distinct agents share no
mutable state and exchange values only through delivered messages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError
from .lagrangian import DualBall, dual_block_grad, primal_block_grad, project_box, project_dual_ball
from .model import RelaxedInstance


@dataclass(frozen=True)
class StepSizes:
    """Primal step ``gamma`` and dual step ``beta``.

    Admissibility (the dual ceiling from the rate analysis, positivity of
    gamma) is checked by ``analysis.validate_step_sizes``; this type only
    carries the values.
    """

    gamma: float
    beta: float


@dataclass
class PrimalAgentState:
    """Primal agent i: local copies, own block range, step size, stamps."""

    agent_id: int
    block: slice
    local_z: np.ndarray
    local_lam: np.ndarray
    gamma: float
    last_update_tick: int = -1
    # stamps[j] = tick label of the currently held copy of block j
    stamps: Optional[np.ndarray] = None

    def __post_init__(self):
        self.local_z = np.array(self.local_z, dtype=float)
        self.local_lam = np.array(self.local_lam, dtype=float)

    def primal_step(self, relaxed: RelaxedInstance, tick: int) -> "PrimalAgentState":
        """Projected gradient descent on the agent's own block only."""
        blk = relaxed.base.blocks[self.agent_id]
        g = primal_block_grad(self.block, self.local_z, self.local_lam, relaxed)
        self.local_z[self.block] = project_box(
            self.local_z[self.block] - self.gamma * g, blk
        )
        self.last_update_tick = tick
        return self

    def receive_primal_block(
        self, j: int, block: slice, value: np.ndarray, stamp: int
    ) -> "PrimalAgentState":
        """Overwrite the copy of block j with a delivered value.

        Deliveries of the agent's own block are rejected; stale
        overwrites from other agents are permitted (asynchrony).
        """
        if j == self.agent_id:
            raise ValidationError("an agent never receives its own block")
        value = np.asarray(value, dtype=float)
        if value.shape != (block.stop - block.start,):
            raise ValidationError("delivered block has the wrong dimension")
        self.local_z[block] = value
        if self.stamps is not None:
            self.stamps[j] = stamp
        return self

    def receive_dual(self, lam: np.ndarray) -> "PrimalAgentState":
        lam = np.asarray(lam, dtype=float)
        if lam.shape != self.local_lam.shape:
            raise ValidationError("delivered dual vector has the wrong dimension")
        self.local_lam[:] = lam
        return self


@dataclass
class DualAgentState:
    """Dual agent q: local copies, own row range, step size."""

    agent_id: int
    rows: slice
    local_z: np.ndarray
    local_lam: np.ndarray
    beta: float

    def __post_init__(self):
        self.local_z = np.array(self.local_z, dtype=float)
        self.local_lam = np.array(self.local_lam, dtype=float)

    def dual_step(self, relaxed: RelaxedInstance, ball: DualBall, tick: int) -> "DualAgentState":
        """Projected gradient ascent on the agent's own dual block only."""
        g = dual_block_grad(self.rows, self.local_z, self.local_lam, relaxed)
        self.local_lam[self.rows] = project_dual_ball(
            self.local_lam[self.rows] + self.beta * g, ball
        )
        return self

    def refresh_primal(self, z: np.ndarray) -> "DualAgentState":
        z = np.asarray(z, dtype=float)
        if z.shape != self.local_z.shape:
            raise ValidationError("delivered primal vector has the wrong dimension")
        self.local_z[:] = z
        return self
