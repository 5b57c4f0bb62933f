"""Instance builders shared by the test modules."""

import itertools

import numpy as np

from ulmimo.ground_set import AllocationVector, ChannelSet, Codebook, UserProfile, build_ground_set
from ulmimo.instance import make_instance, random_instance

TOL = 1e-9


def scalar_instance(gains, weights=None, queues=None, powers=None, constellations=None,
                    knapsacks=None, alphabet="gaussian"):
    """Single-antenna users with per-(user, RB) scalar channels ``gains[u][n]``."""
    g = np.atleast_2d(np.asarray(gains, dtype=complex))
    k, n = g.shape
    weights = [1.0] * k if weights is None else weights
    queues = [np.inf] * k if queues is None else queues
    powers = [1.0] * k if powers is None else powers
    constellations = [4] * k if constellations is None else constellations
    profiles = [UserProfile(w, q, p, s, 1) for w, q, p, s in zip(weights, queues, powers, constellations)]
    ground = build_ground_set(k, Codebook((np.ones((1, 1)),)), n, profiles)
    ks = knapsacks(ground) if callable(knapsacks) else knapsacks
    return make_instance(ground, ChannelSet(g.reshape(k, n, 1, 1)), ks, alphabet)


def element(ground, user, bits, precoder=0):
    alloc = AllocationVector.from_bits(bits)
    return ground.index_of(user, ground.allocations.index(alloc), precoder)


def universe_instance(seed, alphabet="gaussian", finite_queues=False):
    """Random instance with at most 6 elements, for exhaustive set-function checks."""
    rng = np.random.default_rng(seed)
    while True:
        k = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        w = int(rng.integers(1, 3))
        if k * w * {1: 1, 2: 3, 3: 7}[n] <= 6:
            break
    n_t = int(rng.integers(1, 3))
    return random_instance(rng, k, n, n_codebook=w, n_r=2, n_t=n_t, snr=float(rng.uniform(0.5, 20.0)),
                           finite_queues=finite_queues, alphabet=alphabet)


def small_instance(seed, knapsacks="none", n_interference=0, max_elements=20, alphabet="gaussian",
                   finite_queues=False):
    """Random instance with at most ``max_elements`` elements for exact search."""
    rng = np.random.default_rng(seed)
    while True:
        k = int(rng.integers(2, 6))
        n = int(rng.integers(1, 4))
        w = int(rng.integers(1, 3))
        if k * w * {1: 1, 2: 3, 3: 7}[n] <= max_elements:
            break
    return random_instance(rng, k, n, n_codebook=w, n_r=int(rng.integers(1, 3)), n_t=int(rng.integers(1, 3)),
                           snr=float(rng.uniform(0.5, 30.0)), finite_queues=finite_queues, alphabet=alphabet,
                           knapsacks=knapsacks, n_interference=n_interference)


def all_subsets(items, max_size=None):
    items = list(items)
    top = len(items) if max_size is None else min(max_size, len(items))
    for r in range(top + 1):
        yield from itertools.combinations(items, r)
