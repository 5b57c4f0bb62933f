import itertools
import math

import numpy as np
import pytest

from helpers import TOL, scalar_instance, small_instance, universe_instance
from ulmimo.errors import CapacityError
from ulmimo.ground_set import ChannelSet, Codebook, UserProfile, build_ground_set
from ulmimo.instance import make_instance
from ulmimo.constraints import KnapsackSystem
from ulmimo.oracle import (OracleBudget, Verdict, best_corner_point, exact_schedule, verify_rate_region_membership,
                           verify_submodular)
from ulmimo.scheduler import greedy_schedule
from ulmimo.utility import corner_point_rates, weighted_sum_rate_h


def brute_force_optimum(inst):
    """Every subset of the ground set, no pruning."""
    best_val, best_set = 0.0, ()
    for r in range(1, inst.ground.n_users + 1):
        for s in itertools.combinations(range(len(inst.ground)), r):
            if inst.constraints.is_feasible(s):
                v = weighted_sum_rate_h(s, inst.weights, inst.rank)
                if v > best_val:
                    best_val, best_set = v, s
    return best_val, best_set


def test_single_element():
    out = exact_schedule(*scalar_instance([[0.3]]).args)
    assert out.selected == (0,)


def test_two_antenna_example():
    ground = build_ground_set(2, Codebook((np.ones((1, 1)),)), 1, [UserProfile(), UserProfile()])
    h = np.array([[1.0, 0.0], [0.0, 2.0]]).reshape(2, 1, 2, 1)
    inst = make_instance(ground, ChannelSet(h), KnapsackSystem(np.ones((1, 2), dtype=np.int64), np.zeros((0, 2))))
    out = exact_schedule(*inst.args)
    assert out.selected == (1,)
    assert out.objective == pytest.approx(math.log2(5), abs=TOL)


def test_zero_channels():
    out = exact_schedule(*scalar_instance(np.zeros((2, 2))).args)
    assert out.selected == () and out.objective == 0.0


def test_budget_enforced():
    inst = scalar_instance(np.ones((3, 3)))  # 21 elements
    with pytest.raises(CapacityError):
        exact_schedule(*inst.args)
    assert exact_schedule(*inst.args, budget=OracleBudget(max_ground=21)).objective > 0


@pytest.mark.parametrize("seed", range(20))
def test_exact_matches_unpruned_enumeration(seed):
    inst = small_instance(seed + 900, knapsacks=("none", "structured", "general")[seed % 3], n_interference=seed % 2,
                          max_elements=14, finite_queues=bool(seed % 2))
    out = exact_schedule(*inst.args)
    val, _ = brute_force_optimum(inst)
    assert out.objective == pytest.approx(val, abs=TOL)
    assert inst.constraints.is_feasible(out.selected)
    assert out.objective >= greedy_schedule(*inst.args).objective - TOL


def test_exact_tie_break_is_lexicographic():
    inst = scalar_instance([[1.0], [1.0], [1.0]], knapsacks=lambda g: KnapsackSystem(
        np.ones((1, 3), dtype=np.int64), np.zeros((0, 3)), control_capacity=[2]))
    assert exact_schedule(*inst.args).selected == (0, 1)


def test_region_membership_examples():
    inst = scalar_instance([[1.0], [2.0]], queues=[0.5, np.inf])
    assert verify_rate_region_membership((0, 1), {}, inst.rank)
    assert verify_rate_region_membership((0, 1), {0: 0.0, 1: 0.0}, inst.rank)
    v = verify_rate_region_membership((0, 1), {0: 1.5}, inst.rank)
    assert not v and v.message == "rate exceeds queue" and v.witness == (0,)
    v = verify_rate_region_membership((0, 1), {0: 0.5, 1: inst.rank((1,))}, inst.rank)
    assert not v and v.witness == (0, 1)
    assert not verify_rate_region_membership((0,), {1: 0.1}, inst.rank)
    with pytest.raises(CapacityError):
        verify_rate_region_membership((0, 1), {}, inst.rank, OracleBudget(max_region=1))


@pytest.mark.parametrize("seed", range(10))
def test_corner_rates_are_members(seed):
    inst = small_instance(seed + 40, finite_queues=True)
    subset = tuple(int(inst.ground.user_elements(u)[0]) for u in range(inst.ground.n_users))
    rates = corner_point_rates(subset, inst.weights, inst.rank)
    assert verify_rate_region_membership(subset, rates, inst.rank)
    best, best_rates = best_corner_point(subset, inst.weights, inst.rank)
    assert best == pytest.approx(weighted_sum_rate_h(subset, inst.weights, inst.rank), abs=TOL)
    assert verify_rate_region_membership(subset, best_rates, inst.rank)


def test_submodular_on_three_element_instance():
    inst = scalar_instance(np.random.default_rng(0).standard_normal((3, 1)) + 0.5j)
    assert verify_submodular(inst.rank.gaussian, 3) == Verdict(True)


def test_modular_function_passes():
    c = [0.3, 1.2, 0.0, 2.5]
    assert verify_submodular(lambda s: sum(c[i] for i in s), 4)


def test_supermodular_function_fails_with_witness():
    v = verify_submodular(lambda s: float(len(s) ** 2), 4)
    assert not v and v.message == "not submodular"
    a, b, e = v.witness
    assert set(a) <= set(b) and e not in b
    assert (len(a) + 1) ** 2 - len(a) ** 2 < (len(b) + 1) ** 2 - len(b) ** 2


def test_non_monotone_and_unnormalized_detected():
    assert verify_submodular(lambda s: 1.0, 2).message == "not normalized"
    v = verify_submodular(lambda s: -float(len(s)), 2)
    assert v.message == "not monotone"


def test_submodular_witness_matches_naive_search():
    rng = np.random.default_rng(5)
    vals = {s: float(rng.uniform()) * len(s) for r in range(5) for s in itertools.combinations(range(4), r)}
    fn = lambda s: vals[tuple(s)]
    v = verify_submodular(fn, 4)
    naive_ok = True
    for b_size in range(4):
        for b in itertools.combinations(range(4), b_size):
            for a_size in range(len(b) + 1):
                for a in itertools.combinations(b, a_size):
                    for e in set(range(4)) - set(b):
                        ga = fn(tuple(sorted(a + (e,)))) - fn(a)
                        gb = fn(tuple(sorted(b + (e,)))) - fn(b)
                        if ga < gb - TOL or ga < -TOL:
                            naive_ok = False
    assert bool(v) == naive_ok


def test_submodular_universe_cap():
    with pytest.raises(CapacityError):
        verify_submodular(lambda s: 0.0, 13)


@pytest.mark.parametrize("seed", range(6))
def test_h_passes_on_random_universes(seed):
    inst = universe_instance(seed + 20, finite_queues=True)
    assert verify_submodular(lambda s: weighted_sum_rate_h(s, inst.weights, inst.rank), len(inst.ground))
