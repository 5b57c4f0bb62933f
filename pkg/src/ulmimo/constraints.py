"""Partition matroid and knapsack (packing) constraints over the ground set.

Control-channel rows are binary with an integer capacity per row, i.e. the
row ``A_C[l] / C_l`` of the all-ones normal form; a plain row has capacity 1.
Interference rows are fractional in ``[0, 1]`` with right-hand side 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .ground_set import GroundSet, as_indices

FRACTIONAL_TOL = 1e-12


def is_matroid_row(row) -> bool:
    """True if every strictly positive coefficient of ``row`` is the same."""
    row = np.asarray(row)
    pos = row[row > 0]
    if pos.size == 0:
        return True
    if np.issubdtype(row.dtype, np.integer):
        return bool(np.all(pos == pos[0]))
    return bool(np.all(np.abs(pos - pos[0]) <= FRACTIONAL_TOL))


@dataclass(frozen=True, eq=False)
class PartitionMatroid:
    """At most one element per user block."""

    element_users: np.ndarray

    def is_independent(self, subset) -> bool:
        users = [int(self.element_users[e]) for e in as_indices(subset)]
        return len(users) == len(set(users))

    @property
    def blocks(self) -> dict[int, np.ndarray]:
        return {int(u): np.flatnonzero(self.element_users == u) for u in np.unique(self.element_users)}


@dataclass(frozen=True, eq=False)
class KnapsackSystem:
    control: np.ndarray
    interference: np.ndarray
    control_capacity: np.ndarray = field(default=None)
    max_sparsity: int | None = None

    def __post_init__(self):
        ctrl = np.asarray(self.control)
        intf = np.asarray(self.interference, dtype=float)
        if ctrl.ndim != 2 or intf.ndim != 2 or ctrl.shape[1] != intf.shape[1]:
            raise InvalidArgument(f"knapsack matrices have incompatible shapes {ctrl.shape}, {intf.shape}")
        if ctrl.size and not np.isin(ctrl, (0, 1)).all():
            raise InvalidArgument("control matrix entries must be 0 or 1")
        ctrl = ctrl.astype(np.int64)
        if intf.size and (not np.all(np.isfinite(intf)) or intf.min() < 0 or intf.max() > 1):
            raise InvalidArgument("interference matrix entries must lie in [0, 1]")
        cap = np.ones(ctrl.shape[0], dtype=np.int64) if self.control_capacity is None \
            else np.asarray(self.control_capacity)
        if cap.shape != (ctrl.shape[0],) or (cap.size and (np.any(cap != np.round(cap)) or cap.min() < 1)):
            raise InvalidArgument("control capacities must be positive integers, one per row")
        cap = cap.astype(np.int64)
        sparsity = int(ctrl.sum(axis=0).max()) if ctrl.size else 0
        if self.max_sparsity is not None and sparsity > self.max_sparsity:
            raise InvalidArgument(f"control column sparsity {sparsity} exceeds {self.max_sparsity}")
        for name, arr in (("control", ctrl), ("interference", intf), ("control_capacity", cap)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "sparsity", sparsity)

    @classmethod
    def empty(cls, n_elements: int) -> "KnapsackSystem":
        return cls(np.zeros((0, n_elements), dtype=np.int64), np.zeros((0, n_elements)))

    @property
    def n_elements(self) -> int:
        return self.control.shape[1]

    @property
    def n_control(self) -> int:
        return self.control.shape[0]

    @property
    def n_interference(self) -> int:
        return self.interference.shape[0]


def knapsack_feasible(subset, system: KnapsackSystem) -> bool:
    idx = list(as_indices(subset))
    if idx and idx[-1] >= system.n_elements:
        raise InvalidArgument(f"element {idx[-1]} outside knapsack matrices of width {system.n_elements}")
    if system.n_control and np.any(system.control[:, idx].sum(axis=1) > system.control_capacity):
        return False
    if system.n_interference and np.any(system.interference[:, idx].sum(axis=1) > 1.0 + FRACTIONAL_TOL):
        return False
    return True


def _control_users_per_region(system: KnapsackSystem, ground: GroundSet):
    return [set(ground.user[system.control[r] > 0].tolist()) for r in range(system.n_control)]


def assumptions_hold(system: KnapsackSystem, ground: GroundSet) -> tuple[bool, str]:
    """Check the structured form under which greedy is a 1/(2+M) approximation.

    Control rows must be cardinality constraints on disjoint regions that cover
    the ground set, each user entirely inside one region (no control rows at
    all is accepted), and every interference row must have identical positive
    coefficients. Returns ``(ok, diagnostic)``.
    """
    if system.n_elements != len(ground):
        return False, "knapsack width does not match ground set"
    if system.n_control:
        cover = system.control.sum(axis=0)
        if cover.max() > 1:
            return False, "control regions overlap"
        if cover.min() < 1:
            return False, "control regions do not cover the ground set"
        region = system.control.argmax(axis=0)
        for u in range(ground.n_users):
            if np.unique(region[ground.user_elements(u)]).size > 1:
                return False, f"user {u} is split across control regions"
    for r in range(system.n_interference):
        if not is_matroid_row(system.interference[r]):
            return False, f"interference row {r} has unequal positive coefficients"
    return True, "ok"


class ConstraintSystem:
    """Partition matroid over users together with the knapsack rows."""

    def __init__(self, ground: GroundSet, knapsacks: KnapsackSystem | None = None):
        if knapsacks is None:
            knapsacks = KnapsackSystem.empty(len(ground))
        if knapsacks.n_elements != len(ground):
            raise InvalidArgument(f"knapsack width {knapsacks.n_elements} != ground set size {len(ground)}")
        self.ground = ground
        self.matroid = PartitionMatroid(ground.user)
        self.knapsacks = knapsacks

    def is_independent(self, subset) -> bool:
        return self.matroid.is_independent(subset)

    def is_feasible(self, subset) -> bool:
        return self.is_independent(subset) and knapsack_feasible(subset, self.knapsacks)

    def tracker(self, subset=()) -> "FeasibilityTracker":
        t = FeasibilityTracker(self)
        for e in as_indices(subset):
            t.add(e)
        return t

    def assumptions_hold(self) -> tuple[bool, str]:
        return assumptions_hold(self.knapsacks, self.ground)

    def max_cardinality(self) -> int:
        """An upper bound on the size of every feasible set."""
        ks, g = self.knapsacks, self.ground
        singles = self.tracker().feasible_mask()
        bound = int(np.unique(g.user[singles]).size)
        for r in range(ks.n_control):
            if ks.control[r][singles].all():
                bound = min(bound, int(ks.control_capacity[r]))
        if ks.n_control and (ks.control.sum(axis=0) == 1).all():
            per_region = _control_users_per_region(ks, g)
            bound = min(bound, sum(min(int(c), len(us)) for c, us in zip(ks.control_capacity, per_region)))
        for r in range(ks.n_interference):
            row = ks.interference[r]
            if is_matroid_row(row) and row.max() > 0 and (row[singles] > 0).all():
                bound = min(bound, int(math.floor(1.0 / row.max() + FRACTIONAL_TOL)))
        return bound


class FeasibilityTracker:
    """Row loads of a growing selection; owned by one scheduler run."""

    def __init__(self, system: ConstraintSystem):
        self.system = system
        ks = system.knapsacks
        self.selected: list[int] = []
        self.users: set[int] = set()
        self.control_load = np.zeros(ks.n_control, dtype=np.int64)
        self.interference_load = np.zeros(ks.n_interference)

    def can_add(self, e: int) -> bool:
        ks = self.system.knapsacks
        if int(self.system.ground.user[e]) in self.users:
            return False
        if ks.n_control and np.any(self.control_load + ks.control[:, e] > ks.control_capacity):
            return False
        if ks.n_interference and np.any(self.interference_load + ks.interference[:, e] > 1.0 + FRACTIONAL_TOL):
            return False
        return True

    def feasible_mask(self) -> np.ndarray:
        """Boolean mask over all elements ``e`` with ``selected + e`` feasible."""
        ks, g = self.system.knapsacks, self.system.ground
        mask = ~np.isin(g.user, list(self.users))
        if ks.n_control:
            mask &= np.all(self.control_load[:, None] + ks.control <= ks.control_capacity[:, None], axis=0)
        if ks.n_interference:
            mask &= np.all(self.interference_load[:, None] + ks.interference <= 1.0 + FRACTIONAL_TOL, axis=0)
        return mask

    def add(self, e: int) -> None:
        if not self.can_add(e):
            raise InvalidArgument(f"adding element {e} violates a constraint")
        ks = self.system.knapsacks
        self.selected.append(int(e))
        self.users.add(int(self.system.ground.user[e]))
        if ks.n_control:
            self.control_load += ks.control[:, e]
        if ks.n_interference:
            self.interference_load += ks.interference[:, e]

    def copy(self) -> "FeasibilityTracker":
        t = FeasibilityTracker.__new__(FeasibilityTracker)
        t.system = self.system
        t.selected = list(self.selected)
        t.users = set(self.users)
        t.control_load = self.control_load.copy()
        t.interference_load = self.interference_load.copy()
        return t
