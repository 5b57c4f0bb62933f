"""Exhaustive solvers and verifiers for small instances.

These are deliberately naive: they enumerate subsets or permutations and
evaluate the defining inequalities directly, so they share no shortcuts with
the closed forms they certify.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constraints import ConstraintSystem
from .errors import CapacityError
from .ground_set import GroundSet, as_indices
from .scheduler import ScheduleOutcome, _check_inputs
from .utility import corner_point_rates, weighted_sum_rate_h

TOL = 1e-9
MAX_SUBMODULAR_UNIVERSE = 12


@dataclass(frozen=True)
class OracleBudget:
    max_ground: int = 20
    max_region: int = 8

    def __post_init__(self):
        if self.max_ground < 1 or self.max_region < 1:
            raise ValueError("oracle budgets must be positive")


@dataclass(frozen=True)
class Verdict:
    ok: bool
    message: str = ""
    witness: tuple | None = None

    def __bool__(self):
        return self.ok


def exact_schedule(ground: GroundSet, weights, capped_rank, constraints: ConstraintSystem,
                   budget: OracleBudget = OracleBudget()) -> ScheduleOutcome:
    """Best feasible set by enumeration; ties go to the lexicographically smallest."""
    _check_inputs(ground, capped_rank, constraints)
    if len(ground) > budget.max_ground:
        raise CapacityError(f"exact search over {len(ground)} elements exceeds budget {budget.max_ground}")
    weights = np.asarray(weights, dtype=float)
    best_val, best_set = 0.0, ()
    evaluations = 0

    def visit(user, tracker):
        nonlocal best_val, best_set, evaluations
        if user == ground.n_users:
            chosen = as_indices(tracker.selected)
            if not chosen:
                return
            val = weighted_sum_rate_h(chosen, weights, capped_rank)
            evaluations += 1
            if val > best_val or (val == best_val and chosen < best_set):
                best_val, best_set = val, chosen
            return
        visit(user + 1, tracker)
        for e in ground.user_elements(user):
            if tracker.can_add(e):
                nxt = tracker.copy()
                nxt.add(e)
                visit(user + 1, nxt)

    visit(0, constraints.tracker())
    return ScheduleOutcome(
        selected=best_set,
        rates=corner_point_rates(best_set, weights, capped_rank),
        objective=weighted_sum_rate_h(best_set, weights, capped_rank),
        evaluations=evaluations,
        trace=tuple(best_set[:k] for k in range(len(best_set) + 1)),
    )


def capped_rank_by_truncation(base, subset, queues) -> float:
    """``min_R base(U \\ R) + sum_R Q``: the box-truncated rank, enumerated."""
    key = as_indices(subset)
    q = np.asarray(queues, dtype=float)
    best = np.inf
    for r in range(len(key) + 1):
        for capped in itertools.combinations(key, r):
            rest = tuple(e for e in key if e not in capped)
            best = min(best, base(rest) + sum(q[e] for e in capped))
    return float(best)


def best_corner_point(subset, weights, capped_rank) -> tuple[float, dict[int, float]]:
    """Maximize the weighted sum rate over every vertex of the capped polymatroid.

    Each permutation of ``U`` gives a vertex by successive rank increments;
    with nonnegative weights the maximum over them is the maximum over the
    whole region.
    """
    key = as_indices(subset)
    best_val, best_rates = 0.0, {e: 0.0 for e in key}
    for perm in itertools.permutations(key):
        rates, prev = {}, 0.0
        for k, e in enumerate(perm):
            cur = capped_rank(tuple(sorted(perm[: k + 1])))
            rates[e] = cur - prev
            prev = cur
        val = sum(weights[e] * rates[e] for e in key)
        if val > best_val:
            best_val, best_rates = val, rates
    return best_val, best_rates


def verify_rate_region_membership(subset, rates: dict, capped_rank,
                                  budget: OracleBudget = OracleBudget(), tol: float = TOL) -> Verdict:
    key = as_indices(subset)
    if len(key) > budget.max_region:
        raise CapacityError(f"region check over {len(key)} elements exceeds budget {budget.max_region}")
    stray = set(rates) - set(key)
    if stray:
        return Verdict(False, "rates given for elements outside the subset", tuple(sorted(stray)))
    r = {e: float(rates.get(e, 0.0)) for e in key}
    q = capped_rank.queues
    for e in key:
        if r[e] < -tol:
            return Verdict(False, "negative rate", (e,))
        if r[e] > q[e] + tol:
            return Verdict(False, "rate exceeds queue", (e,))
    for size in range(1, len(key) + 1):
        for a in itertools.combinations(key, size):
            if sum(r[e] for e in a) > capped_rank(a) + tol:
                return Verdict(False, "subset rate exceeds rank", a)
    return Verdict(True)


def verify_submodular(fn: Callable[[tuple[int, ...]], float], n: int, tol: float = TOL) -> Verdict:
    """Exhaustively check normalization, monotonicity and submodularity.

    ``fn`` receives sorted tuples drawn from ``range(n)``. The submodular
    inequality is checked for every ``A <= B`` and ``e`` outside ``B``: for
    each ``e`` the marginals are tabulated and a subset-minimum transform
    finds, for every ``B``, the smallest marginal over all subsets of ``B``.
    Witnesses are ``(A, B, e)`` tuples.
    """
    if n > MAX_SUBMODULAR_UNIVERSE:
        raise CapacityError(f"universe of {n} exceeds {MAX_SUBMODULAR_UNIVERSE}")
    full = 1 << n
    members = [tuple(i for i in range(n) if m >> i & 1) for m in range(full)]
    vals = np.array([fn(s) for s in members], dtype=float)
    if abs(vals[0]) > tol:
        return Verdict(False, "not normalized", ((),))
    masks = np.arange(full)
    for e in range(n):
        bit = 1 << e
        without = masks[(masks & bit) == 0]
        gain = np.full(full, np.inf)
        gain[without] = vals[without | bit] - vals[without]
        drop = np.flatnonzero(gain[without] < -tol)
        if drop.size:
            a = int(without[drop[0]])
            return Verdict(False, "not monotone", (members[a], members[a | bit], e))
        low = gain.copy()
        arg = masks.copy()
        for j in range(n):
            hi = masks[(masks >> j) & 1 == 1]
            sub = hi ^ (1 << j)
            better = low[sub] < low[hi]
            low[hi[better]] = low[sub[better]]
            arg[hi[better]] = arg[sub[better]]
        bad = np.flatnonzero(gain[without] > low[without] + tol)
        if bad.size:
            b = int(without[bad[0]])
            return Verdict(False, "not submodular", (members[int(arg[b])], members[b], e))
    return Verdict(True)
