"""Deterministic seeded simulator of the partially asynchronous iteration.

Time advances in integer ticks. Each tick runs three phases:

1. Delivery: primal-to-primal messages whose scheduled tick has arrived
   overwrite the receiver's copy of the sender's block. Per channel,
   messages deliver in send order, and a freshness rule force-delivers a
   pending message whenever a receiver's copy is about to exceed the
   staleness bound, so the bounded-delay conditions hold by construction
   and are still audited after the fact.
2. Barrier (only at dual-epoch ticks ``t*B``): every dual agent
   atomically reads the true primal iterate, steps its own dual block,
   and the new dual vector reaches every primal agent before any of this
   tick's primal updates run. Dual blocks never read each other.
3. Primal updates: each primal agent whose update set contains this tick
   steps its own block and sends the new value to every primal agent it
   shares a coupling row with; a forced-update rule caps inter-update
   gaps at the delay bound.

Update draws use one RNG stream per agent and delivery draws one stream
per channel, so changing one probability never perturbs the other draws.
Identical seed and configuration give bitwise-identical traces.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .agents import StepSizes
from .analysis import RateConstants, validate_step_sizes
from .errors import NonFiniteIterateError, ValidationError
from .lagrangian import DualBall, project_dual_ball
from .model import BlockPartition, RelaxedInstance

_UPDATE_BUF = 4096
_DELAY_BUF = 64


@dataclass(frozen=True)
class AsyncSchedule:
    """Randomized schedule parameters under a hard delay bound.

    ``delay_bound`` is the partial-asynchrony constant B: no primal agent
    goes B consecutive ticks without an update, and no copy used in an
    update was computed more than B ticks earlier. ``dual_epochs`` is
    None for a dual update every B ticks, or an explicit increasing list
    of epoch indices t (updates at ticks t*B) to model skipped epochs.
    ``delay_law`` is "bernoulli" (per-tick delivery with probability
    ``p_deliver``, capped at the bound) or "uniform" (delay uniform on
    {0, ..., B-1}; ``p_deliver`` unused).
    """

    delay_bound: int
    p_update: float = 1.0
    p_deliver: float = 1.0
    dual_epochs: Optional[Tuple[int, ...]] = None
    seed: int = 0
    delay_law: str = "bernoulli"

    def __post_init__(self):
        if not (isinstance(self.delay_bound, (int, np.integer)) and 1 <= self.delay_bound <= 10000):
            raise ValidationError("delay bound must be an integer in [1, 10000]")
        for name in ("p_update", "p_deliver"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1]")
        if self.delay_law not in ("bernoulli", "uniform"):
            raise ValidationError("delay law must be 'bernoulli' or 'uniform'")
        if self.dual_epochs is not None:
            ep = tuple(int(t) for t in self.dual_epochs)
            if not ep or ep[0] < 1 or any(b <= a for a, b in zip(ep, ep[1:])):
                raise ValidationError("dual epochs must be strictly increasing positive integers")
            object.__setattr__(self, "dual_epochs", ep)

    def epoch_indices(self, max_epochs: int) -> List[int]:
        if self.dual_epochs is None:
            return list(range(1, max_epochs + 1))
        return list(self.dual_epochs[:max_epochs])


@dataclass(frozen=True)
class InFlightMessage:
    """A primal block value in transit between two primal agents."""

    from_block: int
    to_agent: int
    payload: Optional[np.ndarray]
    sent_tick: int
    deliver_tick: int

    def __post_init__(self):
        if self.deliver_tick < self.sent_tick:
            raise ValidationError("delivery cannot precede sending")

    def age(self) -> int:
        return self.deliver_tick - self.sent_tick

    def check_bound(self, delay_bound: int):
        if self.age() >= delay_bound:
            raise ValidationError(
                f"message age {self.age()} reaches the delay bound {delay_bound}"
            )


@dataclass
class AuditReport:
    """Log of delay, staleness and gap extremes observed during a run."""

    delay_bound: int
    max_delivery_age: int = 0
    max_use_staleness: int = 0
    max_update_gap: int = 0
    num_messages: int = 0
    num_deliveries: int = 0
    num_forced_deliveries: int = 0
    num_forced_updates: int = 0
    min_stamp_lead: int = 0  # min over uses of (tick - stamp); negative would mean a future stamp
    primal_read_hashes: List[str] = field(default_factory=list)
    dual_vector_hashes: List[str] = field(default_factory=list)
    dual_consistency_ok: bool = True


@dataclass
class RunTrace:
    """Per-dual-epoch record of a simulated run."""

    ticks: List[int]
    epoch_indices: List[int]
    gaps: List[int]
    z_hist: Optional[List[np.ndarray]]
    lam_hist: Optional[List[np.ndarray]]
    z_dist: Optional[List[float]]
    lam_dist: Optional[List[float]]
    lam0_dist: Optional[float]
    wall_ticks: int
    converged_epoch: Optional[int]
    audit: AuditReport
    constants: RateConstants
    z0: np.ndarray
    lam0: np.ndarray
    final_z: np.ndarray
    final_lam: np.ndarray
    dual_env: Optional[List[float]] = None
    primal_env: Optional[List[float]] = None

    @property
    def num_epochs(self) -> int:
        return len(self.ticks)

    def joint_dist(self, n: int) -> float:
        return float(np.hypot(self.z_dist[n], self.lam_dist[n]))


def _hash_vec(v: np.ndarray) -> str:
    return hashlib.blake2b(np.ascontiguousarray(v).tobytes(), digest_size=8).hexdigest()


def _block_adjacency(relaxed: RelaxedInstance) -> np.ndarray:
    """adj[i, j] true when blocks i and j appear in a common coupling row."""
    A = relaxed.base.A
    touch = np.array(
        [np.any(A[:, sl] != 0.0, axis=1) for sl in relaxed.base.block_slices()]
    )  # (m, y)
    adj = (touch @ touch.T) > 0
    np.fill_diagonal(adj, False)
    return adj


class _Kernel:
    """Precomputed arrays shared by the simulator and the reference loop."""

    def __init__(self, relaxed: RelaxedInstance, partition: BlockPartition, steps: StepSizes):
        base = relaxed.base
        self.relaxed = relaxed
        self.partition = partition
        self.steps = steps
        self.A = base.A
        self.c = base.c
        self.alpha = relaxed.kappa.alpha
        self.delta = relaxed.kappa.delta
        self.hl, self.hu = base.hull_bounds()
        self.shift = relaxed.rho - base.b  # Az - b + rho = Az + shift
        self.balls = [
            DualBall(bound=relaxed.dual_bound, dimension=sl.stop - sl.start)
            for sl in partition.dual_agents
        ]

    def primal_sweep(self, z, lam, coord_mask=None):
        """One projected descent step on every block, masked to the updaters."""
        g = self.c + self.alpha * z + self.A.T @ lam
        z_new = np.clip(z - self.steps.gamma * g, self.hl, self.hu)
        if coord_mask is None:
            return z_new
        return np.where(coord_mask, z_new, z)

    def dual_sweep(self, z, lam):
        """One projected ascent step on every dual block, from a common z."""
        resid = self.A @ z + self.shift
        new = lam.copy()
        for sl, ball in zip(self.partition.dual_agents, self.balls):
            g = resid[sl] - self.delta * lam[sl]
            new[sl] = project_dual_ball(lam[sl] + self.steps.beta * g, ball)
        return new


def _spawn(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


class _DelayStreams:
    """Per-channel pre-drawn delays, replenished from per-channel generators."""

    def __init__(self, m: int, schedule: AsyncSchedule):
        self.m = m
        self.schedule = schedule
        self.buf = np.zeros((m, m, _DELAY_BUF), dtype=np.int16)
        self.ptr = np.full((m, m), _DELAY_BUF, dtype=np.int64)  # force initial fill
        self._gens: Dict[Tuple[int, int], np.random.Generator] = {}

    def _fill(self, recv: int, send: int):
        gen = self._gens.get((recv, send))
        if gen is None:
            gen = _spawn(self.schedule.seed, 2, send, recv)
            self._gens[(recv, send)] = gen
        B = self.schedule.delay_bound
        if self.schedule.delay_law == "uniform":
            d = gen.integers(0, B, size=_DELAY_BUF)
        else:
            p = self.schedule.p_deliver
            if p >= 1.0:
                d = np.zeros(_DELAY_BUF, dtype=np.int64)
            elif p <= 0.0:
                d = np.full(_DELAY_BUF, B - 1, dtype=np.int64)
            else:
                d = np.minimum(gen.geometric(p, size=_DELAY_BUF) - 1, B - 1)
        self.buf[recv, send, :] = d.astype(np.int16)
        self.ptr[recv, send] = 0

    def take(self, recv_idx: np.ndarray, send_idx: np.ndarray) -> np.ndarray:
        """One delay per (receiver, sender) pair; pairs are unique per tick."""
        need = self.ptr[recv_idx, send_idx] >= _DELAY_BUF
        if need.any():
            for r, s in zip(recv_idx[need], send_idx[need]):
                self._fill(int(r), int(s))
        p = self.ptr[recv_idx, send_idx]
        out = self.buf[recv_idx, send_idx, p].astype(np.int64)
        self.ptr[recv_idx, send_idx] = p + 1
        return out


class _Simulator:
    def __init__(
        self,
        kernel: _Kernel,
        schedule: AsyncSchedule,
        z0: np.ndarray,
        lam0: np.ndarray,
        track_copies: bool,
    ):
        self.k今 = 0
        self.kernel = kernel
        self.schedule = schedule
        m = kernel.partition.num_primal
        n = kernel.relaxed.base.dimension
        self.m = m
        self.slices = kernel.partition.primal_agents
        self.block_of_coord = np.empty(n, dtype=np.int64)
        for i, sl in enumerate(self.slices):
            self.block_of_coord[sl] = i
        self.adj = _block_adjacency(kernel.relaxed)  # symmetric block adjacency
        self.z = np.array(z0, dtype=float)
        self.lam = np.array(lam0, dtype=float)
        B = schedule.delay_bound
        self.B = B
        # channel state, indexed [receiver, sender]
        self.onboard = np.zeros((m, m), dtype=np.int64)
        self.sched = np.full((m, m, B), -1, dtype=np.int64)
        self.stamps = np.zeros((m, m, B), dtype=np.int64)
        self.last_sched = np.zeros((m, m), dtype=np.int64)
        self.last_update = np.full(m, -1, dtype=np.int64)
        self.delays = _DelayStreams(m, schedule)
        self.update_gens = [_spawn(schedule.seed, 1, i) for i in range(m)]
        self.update_buf = np.vstack([g.random(_UPDATE_BUF) for g in self.update_gens])
        self.update_ptr = 0
        self.audit = AuditReport(delay_bound=B)
        self.track_copies = track_copies
        self.copies_z = np.tile(self.z, (m, 1)) if track_copies else None
        self.copies_lam = np.tile(self.lam, (m, 1)) if track_copies else None
        self.history: Dict[int, Dict[int, np.ndarray]] = {i: {} for i in range(m)} if track_copies else {}

    # -- phase 1: deliveries ------------------------------------------------

    def deliver(self, k: int):
        due = self.sched == k
        if due.any():
            ages = k - self.stamps[due]
            self.audit.num_deliveries += int(due.sum())
            self.audit.max_delivery_age = max(self.audit.max_delivery_age, int(ages.max()))
            stamped = np.where(due, self.stamps, -1).max(axis=2)
            hit = stamped >= 0
            self.onboard[hit] = np.maximum(self.onboard[hit], stamped[hit])
            if self.track_copies:
                for recv, send, slot in np.argwhere(due):
                    self._apply_copy(int(recv), int(send), int(self.stamps[recv, send, slot]))
            self.sched[due] = -1
        # freshness forcing: a copy about to exceed the bound pulls the
        # oldest pending message forward
        stale = self.adj & (self.onboard <= k - self.B)
        if stale.any():
            for recv, send in np.argwhere(stale):
                occupied = self.sched[recv, send] >= 0
                assert occupied.any(), "freshness forcing found an empty channel"
                slot = int(np.argmin(np.where(occupied, self.stamps[recv, send], np.iinfo(np.int64).max)))
                stamp = int(self.stamps[recv, send, slot])
                self.audit.num_deliveries += 1
                self.audit.num_forced_deliveries += 1
                self.audit.max_delivery_age = max(self.audit.max_delivery_age, k - stamp)
                self.onboard[recv, send] = max(int(self.onboard[recv, send]), stamp)
                self.sched[recv, send, slot] = -1
                if self.track_copies:
                    self._apply_copy(int(recv), int(send), stamp)

    def _apply_copy(self, recv: int, send: int, stamp: int):
        payload = self.history[send].get(stamp)
        if payload is not None and stamp >= int(self.onboard[recv, send]):
            self.copies_z[recv, self.slices[send]] = payload

    # -- phase 2: barrier ---------------------------------------------------

    def barrier(self, k: int):
        z_read = self.z.copy()
        self.audit.primal_read_hashes.append(_hash_vec(z_read))
        self.lam = self.kernel.dual_sweep(z_read, self.lam)
        if self.track_copies:
            self.copies_lam[:] = self.lam
            hashes = {_hash_vec(row) for row in self.copies_lam}
            if len(hashes) != 1:
                self.audit.dual_consistency_ok = False
        self.audit.dual_vector_hashes.append(_hash_vec(self.lam))
        return z_read

    # -- phase 3: primal updates and message emission -----------------------

    def _draw_updates(self) -> np.ndarray:
        if self.update_ptr >= _UPDATE_BUF:
            self.update_buf = np.vstack([g.random(_UPDATE_BUF) for g in self.update_gens])
            self.update_ptr = 0
        u = self.update_buf[:, self.update_ptr]
        self.update_ptr += 1
        return u

    def primal_phase(self, k: int):
        u = self._draw_updates()
        forced = (k - self.last_update) >= self.B
        fire = (u < self.schedule.p_update) | forced
        if not fire.any():
            return
        self.audit.num_forced_updates += int((forced & ~(u < self.schedule.p_update)).sum())
        updaters = np.nonzero(fire)[0]
        # staleness of copies consumed by this tick's updates
        used = self.adj[updaters]
        if used.any():
            lead = k - self.onboard[updaters]
            self.audit.max_use_staleness = max(self.audit.max_use_staleness, int(lead[used].max()))
            self.audit.min_stamp_lead = min(self.audit.min_stamp_lead, int(lead[used].min()))
        gaps = k - self.last_update[updaters]
        self.audit.max_update_gap = max(self.audit.max_update_gap, int(gaps.max()))
        coord_mask = fire[self.block_of_coord]
        self.z = self.kernel.primal_sweep(self.z, self.lam, coord_mask)
        if not np.isfinite(self.z).all():
            raise NonFiniteIterateError(k)
        self.last_update[updaters] = k
        self._emit(k, updaters)

    def _emit(self, k: int, updaters: np.ndarray):
        stamp = k + 1
        recvs, sends = [], []
        for j in updaters:
            r = np.nonzero(self.adj[:, j])[0]
            recvs.append(r)
            sends.append(np.full(r.size, j, dtype=np.int64))
            self.onboard[j, j] = stamp
            if self.track_copies:
                self.history[int(j)][stamp] = self.z[self.slices[j]].copy()
                self.copies_z[j, self.slices[j]] = self.z[self.slices[j]]
        if not recvs:
            return
        recv_idx = np.concatenate(recvs)
        send_idx = np.concatenate(sends)
        if recv_idx.size == 0:
            return
        d = self.delays.take(recv_idx, send_idx)
        sched = np.maximum(stamp + d, self.last_sched[recv_idx, send_idx])
        sched = np.minimum(sched, stamp + self.B - 1)  # hard cap keeps ages below B
        self.last_sched[recv_idx, send_idx] = sched
        slot = stamp % self.B
        assert np.all(self.sched[recv_idx, send_idx, slot] < 0), "ring slot still occupied"
        self.sched[recv_idx, send_idx, slot] = sched
        self.stamps[recv_idx, send_idx, slot] = stamp
        self.audit.num_messages += int(recv_idx.size)
        if self.track_copies:
            for r, s, dd in zip(recv_idx, send_idx, d):
                msg = InFlightMessage(
                    from_block=int(s),
                    to_agent=int(r),
                    payload=None,
                    sent_tick=stamp,
                    deliver_tick=int(min(stamp + dd, stamp + self.B - 1)),
                )
                msg.check_bound(self.B)

    def prune_history(self, k: int):
        if not self.track_copies:
            return
        cutoff = k - self.B - 1
        for j in range(self.m):
            hist = self.history[j]
            for s in [s for s in hist if s < cutoff]:
                del hist[s]


def run(
    relaxed: RelaxedInstance,
    partition: BlockPartition,
    schedule: AsyncSchedule,
    steps: StepSizes,
    max_epochs: int,
    stop_tol: float = 0.0,
    reference: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    z0: Optional[np.ndarray] = None,
    lam0: Optional[np.ndarray] = None,
    store_iterates: bool = True,
    track_copies: bool = False,
) -> RunTrace:
    """Simulate the asynchronous iteration for up to ``max_epochs`` dual epochs.

    Terminates early when a reference saddle point is supplied and the
    joint distance to it falls below ``stop_tol``. Raises on invalid step
    sizes and on non-finite iterates (reporting the offending tick).
    """
    constants = validate_step_sizes(relaxed, steps)
    if partition.primal_dimension != relaxed.base.dimension:
        raise ValidationError("partition does not cover the primal dimension")
    if partition.dual_dimension != relaxed.base.num_rows:
        raise ValidationError("partition does not cover the dual dimension")
    kernel = _Kernel(relaxed, partition, steps)
    hl, hu = kernel.hl, kernel.hu
    z_start = np.clip(np.zeros(relaxed.base.dimension), hl, hu) if z0 is None else np.asarray(z0, dtype=float)
    lam_start = np.zeros(relaxed.base.num_rows) if lam0 is None else np.asarray(lam0, dtype=float)
    sim = _Simulator(kernel, schedule, z_start, lam_start, track_copies)

    epoch_idx = schedule.epoch_indices(max_epochs)
    epoch_ticks = [t * schedule.delay_bound for t in epoch_idx]
    gaps = [b - a for a, b in zip([0] + epoch_idx, epoch_idx)]

    z_ref = lam_ref = None
    lam0_dist = None
    if reference is not None:
        z_ref, lam_ref = reference
        lam0_dist = float(np.linalg.norm(lam_start - lam_ref))

    ticks_out, epochs_out, gaps_out = [], [], []
    z_hist = [] if store_iterates else None
    lam_hist = [] if store_iterates else None
    z_dist = [] if reference is not None else None
    lam_dist = [] if reference is not None else None
    converged = None

    next_barrier = 0
    k = 0
    while next_barrier < len(epoch_ticks):
        sim.deliver(k)
        if k == epoch_ticks[next_barrier]:
            z_read = sim.barrier(k)
            if not np.isfinite(z_read).all() or not np.isfinite(sim.lam).all():
                raise NonFiniteIterateError(k)
            ticks_out.append(k)
            epochs_out.append(epoch_idx[next_barrier])
            gaps_out.append(gaps[next_barrier])
            if store_iterates:
                z_hist.append(z_read)
                lam_hist.append(sim.lam.copy())
            if reference is not None:
                dz = float(np.linalg.norm(z_read - z_ref))
                dl = float(np.linalg.norm(sim.lam - lam_ref))
                z_dist.append(dz)
                lam_dist.append(dl)
                if np.hypot(dz, dl) < stop_tol:
                    converged = epoch_idx[next_barrier]
                    next_barrier += 1
                    k += 1
                    break
            next_barrier += 1
        sim.primal_phase(k)
        sim.prune_history(k)
        k += 1

    return RunTrace(
        ticks=ticks_out,
        epoch_indices=epochs_out,
        gaps=gaps_out,
        z_hist=z_hist,
        lam_hist=lam_hist,
        z_dist=z_dist,
        lam_dist=lam_dist,
        lam0_dist=lam0_dist,
        wall_ticks=k,
        converged_epoch=converged,
        audit=sim.audit,
        constants=constants,
        z0=z_start,
        lam0=lam_start,
        final_z=sim.z.copy(),
        final_lam=sim.lam.copy(),
    )


def reference_trajectory(
    relaxed: RelaxedInstance,
    partition: BlockPartition,
    steps: StepSizes,
    n_epochs: int,
    z0: Optional[np.ndarray] = None,
    lam0: Optional[np.ndarray] = None,
):
    """Centralized synchronous descent-ascent with the same arithmetic as
    a run at B = 1 and unit probabilities: every tick all primal blocks
    step; from tick 1 on, each tick opens with a dual sweep on the
    current primal iterate.

    Returns (z_records, lam_records) with one entry per epoch tick.
    """
    kernel = _Kernel(relaxed, partition, steps)
    z = np.clip(np.zeros(relaxed.base.dimension), kernel.hl, kernel.hu) if z0 is None else np.array(z0, dtype=float)
    lam = np.zeros(relaxed.base.num_rows) if lam0 is None else np.array(lam0, dtype=float)
    z_records, lam_records = [], []
    z = kernel.primal_sweep(z, lam)  # tick 0
    for _ in range(1, n_epochs + 1):
        lam = kernel.dual_sweep(z, lam)
        z_records.append(z.copy())
        lam_records.append(lam.copy())
        z = kernel.primal_sweep(z, lam)
    return z_records, lam_records


def audit_assumption3(trace: RunTrace) -> dict:
    """Verify the bounded-delay conditions on a completed run's log.

    Checks that no delivered message aged past ``B - 1``, that no copy
    consumed by an update was older than ``B - 1`` ticks, and that no
    agent's inter-update gap exceeded ``B``. Returns the extremes.
    """
    a = trace.audit
    B = a.delay_bound
    report = {
        "delay_bound": B,
        "max_delivery_age": a.max_delivery_age,
        "max_use_staleness": a.max_use_staleness,
        "max_update_gap": a.max_update_gap,
        "num_messages": a.num_messages,
        "num_deliveries": a.num_deliveries,
        "num_forced_deliveries": a.num_forced_deliveries,
        "num_forced_updates": a.num_forced_updates,
        "delivery_within_bound": a.max_delivery_age <= B - 1,
        "stamps_within_bound": a.max_use_staleness <= B - 1 and a.min_stamp_lead >= 0,
        "update_gap_within_bound": a.max_update_gap <= B,
        "dual_consistency_ok": a.dual_consistency_ok
        and all(h == a.dual_vector_hashes[i] for i, h in enumerate(a.dual_vector_hashes)),
    }
    report["ok"] = bool(
        report["delivery_within_bound"]
        and report["stamps_within_bound"]
        and report["update_gap_within_bound"]
        and report["dual_consistency_ok"]
    )
    return report


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def write_trace_csv(trace: RunTrace, path):
    """One row per dual epoch: epoch, tick, primal/dual distance, envelopes."""
    lines = ["epoch,tick,z_dist,lam_dist,primal_env,dual_env"]
    for i in range(trace.num_epochs):
        zd = trace.z_dist[i] if trace.z_dist is not None else None
        ld = trace.lam_dist[i] if trace.lam_dist is not None else None
        pe = trace.primal_env[i] if trace.primal_env is not None else None
        de = trace.dual_env[i] if trace.dual_env is not None else None
        lines.append(
            f"{trace.epoch_indices[i]},{trace.ticks[i]},{_fmt(zd)},{_fmt(ld)},{_fmt(pe)},{_fmt(de)}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_trace_json(trace: RunTrace, path, include_vectors: bool = False):
    doc = {
        "epochs": trace.epoch_indices,
        "ticks": trace.ticks,
        "gaps": trace.gaps,
        "wall_ticks": trace.wall_ticks,
        "converged_epoch": trace.converged_epoch,
        "lam0_dist": trace.lam0_dist,
        "z_dist": trace.z_dist,
        "lam_dist": trace.lam_dist,
        "primal_env": trace.primal_env,
        "dual_env": trace.dual_env,
        "audit": audit_assumption3(trace),
    }
    if include_vectors and trace.z_hist is not None:
        doc["z_hist"] = [v.tolist() for v in trace.z_hist]
        doc["lam_hist"] = [v.tolist() for v in trace.lam_hist]
        doc["final_z"] = trace.final_z.tolist()
        doc["final_lam"] = trace.final_lam.tolist()
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
