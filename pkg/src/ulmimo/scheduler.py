"""Greedy scheduling (eager, lazy and subadditivity-pruned) and an upper bound.

Every variant grows a selection ``S`` one element at a time, picking the
feasible element with the largest marginal ``h(S + e) - h(S)`` (ties to the
smallest element index) and stopping once that marginal is ``<= 0`` or
nothing feasible remains.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .constraints import ConstraintSystem
from .errors import InvalidArgument
from .ground_set import GroundSet, as_indices
from .utility import MarginalEvaluator, corner_point_rates, weighted_sum_rate_h


@dataclass(frozen=True)
class ScheduleOutcome:
    selected: tuple[int, ...]
    rates: dict[int, float]
    objective: float
    evaluations: int
    upper_bound: float | None = None
    # selection prefixes S_0 = (), S_1, ..., in the order elements were added
    trace: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    @property
    def sum_rate(self) -> float:
        return float(sum(self.rates.values()))


def _check_inputs(ground: GroundSet, capped_rank, constraints: ConstraintSystem):
    if capped_rank.ground is not ground or constraints.ground is not ground:
        raise InvalidArgument("rank function and constraints must be built on the given ground set")


def _outcome(order, weights, capped_rank, evaluations) -> ScheduleOutcome:
    selected = as_indices(order)
    return ScheduleOutcome(
        selected=selected,
        rates=corner_point_rates(selected, weights, capped_rank),
        objective=weighted_sum_rate_h(selected, weights, capped_rank),
        evaluations=evaluations,
        trace=tuple(tuple(order[:k]) for k in range(len(order) + 1)),
    )


def greedy_schedule(ground: GroundSet, weights, capped_rank, constraints: ConstraintSystem) -> ScheduleOutcome:
    _check_inputs(ground, capped_rank, constraints)
    ev = MarginalEvaluator(weights, capped_rank)
    tracker = constraints.tracker()
    order: list[int] = []
    evaluations = 0
    for _ in range(ground.n_users):
        cand = np.flatnonzero(tracker.feasible_mask())
        if cand.size == 0:
            break
        gains = ev.gains(order, cand)
        evaluations += cand.size
        best = int(np.argmax(gains))
        if not gains[best] > 0:
            break
        tracker.add(int(cand[best]))
        order.append(int(cand[best]))
    return _outcome(order, ev.weights, capped_rank, evaluations)


def lazy_greedy_schedule(ground: GroundSet, weights, capped_rank, constraints: ConstraintSystem) -> ScheduleOutcome:
    """Greedy with stale marginals as upper bounds (same output as eager greedy).

    Heap entries are ``(-gain, index, step)``; an entry whose ``step`` is the
    current one is fresh, and a fresh entry on top of the heap beats every
    stale bound below it.
    """
    _check_inputs(ground, capped_rank, constraints)
    ev = MarginalEvaluator(weights, capped_rank)
    tracker = constraints.tracker()
    order: list[int] = []
    cand = np.flatnonzero(tracker.feasible_mask())
    gains = ev.gains(order, cand)
    evaluations = cand.size
    heap = [(-float(g), int(e), 0) for g, e in zip(gains, cand)]
    heapq.heapify(heap)
    step = 0
    while heap and len(order) < ground.n_users:
        neg_gain, e, computed = heapq.heappop(heap)
        if not tracker.can_add(e):
            continue
        if computed == step:
            if not -neg_gain > 0:
                break
            tracker.add(e)
            order.append(e)
            step += 1
            continue
        fresh = float(ev.gains(order, [e])[0])
        evaluations += 1
        heapq.heappush(heap, (-fresh, e, step))
    return _outcome(order, ev.weights, capped_rank, evaluations)


def _constituent_arrays(ground: GroundSet):
    first = np.full(len(ground), -1, dtype=np.intp)
    second = np.full(len(ground), -1, dtype=np.intp)
    for e in range(len(ground)):
        parts = ground.constituents(e)
        if parts is not None:
            first[e], second[e] = parts
    return first, second


def pruned_greedy_schedule(ground: GroundSet, weights, capped_rank, constraints: ConstraintSystem) -> ScheduleOutcome:
    """Greedy that skips two-chunk elements bounded by their two chunks.

    For ``e' = (u, W, c1 + c2)`` with one-chunk parts ``e1, e2`` the marginal
    of ``e'`` is at most the sum of the parts' marginals, hence at most twice
    the best one-chunk marginal of the step. When both parts are feasible
    ``e'`` is not evaluated, so each pick is within half of the step optimum.
    """
    _check_inputs(ground, capped_rank, constraints)
    ev = MarginalEvaluator(weights, capped_rank)
    first, second = _constituent_arrays(ground)
    two_chunk = first >= 0
    tracker = constraints.tracker()
    order: list[int] = []
    evaluations = 0
    for _ in range(ground.n_users):
        feasible = tracker.feasible_mask()
        cand = np.flatnonzero(feasible)
        if cand.size == 0:
            break
        one = cand[~two_chunk[cand]]
        gain = np.full(len(ground), -np.inf)
        gain[one] = ev.gains(order, one)
        evaluations += one.size
        best = gain[one].max() if one.size else -np.inf
        two = cand[two_chunk[cand]]
        bounded = feasible[first[two]] & feasible[second[two]]
        bounded &= gain[first[two]] + gain[second[two]] <= 2.0 * best
        rest = two[~bounded]
        gain[rest] = ev.gains(order, rest)
        evaluations += rest.size
        evaluated = np.sort(np.concatenate([one, rest]))
        pick = int(evaluated[np.argmax(gain[evaluated])])
        if not gain[pick] > 0:
            break
        tracker.add(pick)
        order.append(pick)
    return _outcome(order, ev.weights, capped_rank, evaluations)


def data_dependent_upper_bound(ground: GroundSet, weights, capped_rank, constraints: ConstraintSystem,
                               trace) -> float:
    """Upper bound on the optimum from the sets visited by a greedy run.

    For any visited set ``S`` and any feasible ``O``, monotonicity and
    submodularity give ``h(O) <= h(S) + sum_{e in O} (h(S + e) - h(S))``.
    ``O`` holds at most one element per user and at most
    ``constraints.max_cardinality()`` elements, so the sum is bounded by the
    largest per-user positive marginals (over every singly-feasible element).
    The bound is the minimum over visited sets.
    """
    _check_inputs(ground, capped_rank, constraints)
    if isinstance(trace, ScheduleOutcome):
        trace = trace.trace
    trace = list(trace) or [()]
    ev = MarginalEvaluator(weights, capped_rank)
    cand = np.flatnonzero(constraints.tracker().feasible_mask())
    users = ground.user[cand]
    budget = constraints.max_cardinality()
    bound = np.inf
    for prefix in trace:
        gains = np.maximum(ev.gains(prefix, cand), 0.0)
        per_user = np.zeros(ground.n_users)
        np.maximum.at(per_user, users, gains)
        top = np.sort(per_user)[::-1][:budget].sum() if budget > 0 else 0.0
        bound = min(bound, ev.value(prefix) + top)
    return float(bound)
