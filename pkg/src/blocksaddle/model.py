"""Problem data for the original and relaxed programs.

The original program minimizes ``sum_l c_l' x_l`` subject to the coupling
rows ``sum_l A_l x_l <= b`` and per-block box sets with integrality masks.
The relaxed program replaces every block set by its convex hull (the same
box with integral bounds snapped inward to integers) and tightens the
right-hand side to ``b - rho``, where ``rho`` absorbs the worst-case
per-block contribution so that a recovered integral point can stay
feasible for the original rows.

All functions here are pure and operate on immutable arrays; they are safe
to call concurrently.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import (
    InfeasibleTighteningError,
    NotInBoxError,
    SlaterError,
    ValidationError,
)

# Shared absolute tolerance for feasibility and integrality checks.
FEAS_ATOL = 1e-9


@dataclass(frozen=True)
class BlockSet:
    """One agent's local box with an integrality mask.

    ``lower``/``upper`` are per-coordinate finite bounds and ``integral``
    marks coordinates constrained to integers. For every integral
    coordinate the interval must contain at least one integer; the convex
    hull of the set is the box with integral bounds snapped to
    ``[ceil(lower), floor(upper)]``.
    """

    lower: np.ndarray
    upper: np.ndarray
    integral: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "integral", np.asarray(self.integral, dtype=bool))
        if self.lower.shape != self.upper.shape or self.lower.shape != self.integral.shape:
            raise ValidationError("block bound and mask shapes differ")
        if self.lower.ndim != 1 or self.lower.size == 0:
            raise ValidationError("block bounds must be nonempty 1-d arrays")
        if not (np.isfinite(self.lower).all() and np.isfinite(self.upper).all()):
            raise ValidationError("block bounds must be finite (compact local sets)")
        if np.any(self.lower > self.upper):
            raise ValidationError("block lower bound exceeds upper bound")
        hl, hu = self.hull_bounds()
        if np.any(hl > hu):
            raise ValidationError(
                "an integral coordinate's interval contains no integer"
            )

    @property
    def dimension(self) -> int:
        return self.lower.size

    def hull_bounds(self):
        """Bounds of the convex hull: integral coordinates snap inward."""
        hl = np.where(self.integral, np.ceil(self.lower), self.lower)
        hu = np.where(self.integral, np.floor(self.upper), self.upper)
        return hl, hu


@dataclass(frozen=True)
class MilpInstance:
    """Data of the original problem: blocks, costs, coupling rows, rhs."""

    blocks: List[BlockSet]
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if not self.blocks:
            raise ValidationError("instance needs at least one block")
        n = sum(blk.dimension for blk in self.blocks)
        if self.A.ndim != 2:
            raise ValidationError("A must be a 2-d array")
        y = self.A.shape[0]
        if self.A.shape[1] != n:
            raise ValidationError(
                f"A has {self.A.shape[1]} columns, blocks total {n}"
            )
        if self.b.shape != (y,):
            raise ValidationError("b length must equal the number of rows of A")
        if self.c.shape != (n,):
            raise ValidationError("c length must equal the total block dimension")

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def dimension(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.b.size

    def block_slices(self) -> List[slice]:
        out, start = [], 0
        for blk in self.blocks:
            out.append(slice(start, start + blk.dimension))
            start += blk.dimension
        return out

    def hull_bounds(self):
        """Concatenated convex-hull bounds of the full box product Z."""
        los, his = [], []
        for blk in self.blocks:
            hl, hu = blk.hull_bounds()
            los.append(hl)
            his.append(hu)
        return np.concatenate(los), np.concatenate(his)

    def integral_mask(self) -> np.ndarray:
        return np.concatenate([blk.integral for blk in self.blocks])

    def to_json_dict(self) -> dict:
        return {
            "blocks": [
                {
                    "lower": blk.lower.tolist(),
                    "upper": blk.upper.tolist(),
                    "integral": blk.integral.tolist(),
                }
                for blk in self.blocks
            ],
            "c": self.c.tolist(),
            "A": self.A.tolist(),
            "b": self.b.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @staticmethod
    def from_json_dict(doc: dict) -> "MilpInstance":
        for key in ("blocks", "c", "A", "b"):
            if key not in doc:
                raise ValidationError(f"instance document missing field '{key}'")
        blocks = []
        for i, blk in enumerate(doc["blocks"]):
            for key in ("lower", "upper", "integral"):
                if key not in blk:
                    raise ValidationError(f"blocks[{i}] missing field '{key}'")
            blocks.append(
                BlockSet(
                    lower=np.array(blk["lower"], dtype=float),
                    upper=np.array(blk["upper"], dtype=float),
                    integral=np.array(blk["integral"], dtype=bool),
                )
            )
        return MilpInstance(
            blocks=blocks,
            c=np.array(doc["c"], dtype=float),
            A=np.array(doc["A"], dtype=float),
            b=np.array(doc["b"], dtype=float),
        )

    @staticmethod
    def from_json(text: str) -> "MilpInstance":
        return MilpInstance.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class KappaParams:
    """Tikhonov weights: ``alpha`` on the primal, ``delta`` on the dual."""

    alpha: float
    delta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.delta > 0):
            raise ValidationError("regularization weights must be strictly positive")


@dataclass
class RelaxedInstance:
    """Relaxed-program data: tightened rhs, Slater point, radius, dual bound."""

    base: MilpInstance
    rho: np.ndarray
    slater_point: np.ndarray
    radius: float
    kappa: KappaParams
    dual_bound: float

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.slater_point = np.asarray(self.slater_point, dtype=float)
        if self.rho.shape != (self.base.num_rows,):
            raise ValidationError("rho length must match the number of coupling rows")
        if np.any(self.rho < 0):
            raise ValidationError("rho must be nonnegative")
        if self.slater_point.shape != (self.base.dimension,):
            raise ValidationError("Slater point has the wrong dimension")
        margin = validate_slater(self.base, self.rho, self.slater_point)
        if margin <= 0:
            raise SlaterError(
                f"supplied point is not strictly Slater (margin {margin:g})"
            )
        hl, hu = self.base.hull_bounds()
        corner = np.maximum(np.abs(hl), np.abs(hu))
        if self.radius < float(np.linalg.norm(corner)) - 1e-9:
            raise ValidationError("radius smaller than the farthest box corner")
        if not self.dual_bound > 0:
            raise ValidationError("dual bound must be positive")

    @property
    def tightened_rhs(self) -> np.ndarray:
        return self.base.b - self.rho


@dataclass(frozen=True)
class BlockPartition:
    """Agent ownership: primal block ranges over z, dual block ranges over lambda."""

    primal_agents: List[slice]
    dual_agents: List[slice]

    def __post_init__(self):
        _check_cover(self.primal_agents, "primal")
        _check_cover(self.dual_agents, "dual")

    @property
    def num_primal(self) -> int:
        return len(self.primal_agents)

    @property
    def num_dual(self) -> int:
        return len(self.dual_agents)

    @property
    def primal_dimension(self) -> int:
        return self.primal_agents[-1].stop

    @property
    def dual_dimension(self) -> int:
        return self.dual_agents[-1].stop


def _check_cover(slices: Sequence[slice], label: str):
    if not slices:
        raise ValidationError(f"{label} partition is empty")
    pos = 0
    for sl in slices:
        if sl.start != pos or sl.stop <= sl.start or sl.step not in (None, 1):
            raise ValidationError(
                f"{label} partition ranges must be contiguous, disjoint and cover"
            )
        pos = sl.stop


def default_partition(instance: MilpInstance, num_dual_agents: int) -> BlockPartition:
    """One primal agent per block; dual rows split as evenly as possible."""
    y = instance.num_rows
    if not (1 <= num_dual_agents <= y):
        raise ValidationError("need between 1 and y dual agents")
    base, extra = divmod(y, num_dual_agents)
    dual, pos = [], 0
    for q in range(num_dual_agents):
        size = base + (1 if q < extra else 0)
        dual.append(slice(pos, pos + size))
        pos += size
    return BlockPartition(primal_agents=instance.block_slices(), dual_agents=dual)


def _block_row_extremes(A_block: np.ndarray, hl: np.ndarray, hu: np.ndarray):
    """Row-wise max and min of A_block @ x over the hull box [hl, hu]."""
    pos = np.clip(A_block, 0.0, None)
    neg = np.clip(A_block, None, 0.0)
    row_max = pos @ hu + neg @ hl
    row_min = pos @ hl + neg @ hu
    return row_max, row_min


def compute_rho(instance: MilpInstance) -> np.ndarray:
    """Tightening vector: per row, y times the largest block-wise range.

    For each coupling row the range of a block's contribution is evaluated
    at hull-box corners (the sign of each matrix entry selects the corner;
    integral coordinates only take their snapped integer bounds, where the
    extremes over the mixed-integer set and over its hull coincide).

    Raises
    ------
    InfeasibleTighteningError
        If some row cannot be strictly satisfied by any point of Z once
        tightened, so no Slater point can exist.
    """
    y = instance.num_rows
    ranges = np.zeros((y, instance.num_blocks))
    row_mins = np.zeros(y)
    for ell, (blk, sl) in enumerate(zip(instance.blocks, instance.block_slices())):
        hl, hu = blk.hull_bounds()
        row_max, row_min = _block_row_extremes(instance.A[:, sl], hl, hu)
        ranges[:, ell] = row_max - row_min
        row_mins += row_min
    rho = y * ranges.max(axis=1)
    tight = instance.b - rho
    bad = np.nonzero(row_mins >= tight)[0]
    if bad.size:
        j = int(bad[0])
        raise InfeasibleTighteningError(
            f"row {j}: tightened rhs {tight[j]:g} unreachable "
            f"(row minimum over Z is {row_mins[j]:g})"
        )
    return rho


def compute_radius(instance: MilpInstance) -> float:
    """Radius of the smallest origin-centered ball containing Z.

    The maximizing corner takes, per coordinate, whichever hull bound has
    the larger magnitude.
    """
    hl, hu = instance.hull_bounds()
    return float(np.linalg.norm(np.maximum(np.abs(hl), np.abs(hu))))


def validate_slater(instance: MilpInstance, rho: np.ndarray, zbar: np.ndarray) -> float:
    """Margin ``min_j (b_j - rho_j - A_j zbar)``; positive iff zbar is Slater.

    Raises NotInBoxError when zbar violates the box product Z.
    """
    zbar = np.asarray(zbar, dtype=float)
    hl, hu = instance.hull_bounds()
    if np.any(zbar < hl - FEAS_ATOL) or np.any(zbar > hu + FEAS_ATOL):
        raise NotInBoxError("Slater candidate lies outside the box product Z")
    return float(np.min(instance.b - np.asarray(rho, dtype=float) - instance.A @ zbar))


def dual_bound(
    instance: MilpInstance,
    rho: np.ndarray,
    zbar: np.ndarray,
    radius: float,
    alpha: float,
) -> float:
    """Multiplier bound from the Slater point.

    ``(c'zbar + (alpha/2)||zbar||^2 + ||c|| r) / min_j (b_j - rho_j - A_j zbar)``.
    The numerator carries ``+||c|| r`` because the cost over Z is bounded
    below by ``-||c|| r``, and the denominator is the Slater margin over
    all y rows.
    """
    margin = validate_slater(instance, rho, zbar)
    if margin <= 0:
        raise SlaterError(
            f"dual bound needs a strictly Slater point (margin {margin:g})"
        )
    zbar = np.asarray(zbar, dtype=float)
    numer = (
        float(instance.c @ zbar)
        + 0.5 * alpha * float(zbar @ zbar)
        + float(np.linalg.norm(instance.c)) * radius
    )
    return numer / margin


def relax(
    instance: MilpInstance,
    kappa: KappaParams,
    zbar: Optional[np.ndarray] = None,
    rho: Optional[np.ndarray] = None,
) -> RelaxedInstance:
    """Build the relaxed-program data from original data.

    ``zbar`` defaults to the origin, which must then lie in Z and be
    strictly Slater; instances generated at larger scales supply an
    explicit point instead.
    """
    rho = compute_rho(instance) if rho is None else np.asarray(rho, dtype=float)
    if zbar is None:
        zbar = np.zeros(instance.dimension)
    r = compute_radius(instance)
    lam_bound = dual_bound(instance, rho, zbar, r, kappa.alpha)
    if lam_bound <= 0:
        # Cost at the Slater point below -||c|| r cannot happen for zbar in Z.
        raise ValidationError("dual bound came out nonpositive")
    return RelaxedInstance(
        base=instance,
        rho=rho,
        slater_point=np.asarray(zbar, dtype=float),
        radius=r,
        kappa=kappa,
        dual_bound=lam_bound,
    )


def enumerate_hull_corners(instance: MilpInstance):
    """Yield all corners of the hull box product. Exponential; guard sizes."""
    hl, hu = instance.hull_bounds()
    n = instance.dimension
    if n > 24:
        raise ValidationError("corner enumeration guard: dimension too large")
    for picks in itertools.product((0, 1), repeat=n):
        yield np.where(np.array(picks, dtype=bool), hu, hl)
