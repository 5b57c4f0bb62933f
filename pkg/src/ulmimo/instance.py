"""Bundled scheduling instances and seeded random generators for them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSystem, KnapsackSystem
from .ground_set import ChannelSet, Codebook, GroundSet, UserProfile, build_ground_set
from .rank import CappedRank, FiniteAlphabetRank, GaussianRank


@dataclass
class Instance:
    ground: GroundSet
    channels: ChannelSet
    weights: np.ndarray
    rank: CappedRank
    constraints: ConstraintSystem

    @property
    def args(self):
        return self.ground, self.weights, self.rank, self.constraints

    def with_alphabet(self, alphabet: str) -> "Instance":
        gaussian = self.rank.gaussian
        base = gaussian if alphabet == "gaussian" else FiniteAlphabetRank(gaussian)
        rank = CappedRank(base, self.rank.queues, self.rank.brute_force_cap)
        return Instance(self.ground, self.channels, self.weights, rank, self.constraints)


def make_instance(ground: GroundSet, channels: ChannelSet, knapsacks: KnapsackSystem | None = None,
                  alphabet: str = "gaussian", weights=None, queues=None) -> Instance:
    gaussian = GaussianRank(ground, channels)
    base = gaussian if alphabet == "gaussian" else FiniteAlphabetRank(gaussian)
    w = ground.weights() if weights is None else np.asarray(weights, dtype=float)
    return Instance(ground, channels, w, CappedRank(base, queues), ConstraintSystem(ground, knapsacks))


def rayleigh(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_codebook(rng: np.random.Generator, size: int, n_t: int) -> Codebook:
    if n_t == 1:
        return Codebook(tuple(np.exp(2j * np.pi * rng.uniform()) * np.ones((1, 1)) for _ in range(size)))
    mats = []
    for _ in range(size):
        v = rayleigh(rng, (n_t, 1))
        mats.append(v / np.linalg.norm(v))
    return Codebook(tuple(mats))


def structured_knapsacks(rng: np.random.Generator, ground: GroundSet, n_interference: int = 0) -> KnapsackSystem:
    """Control regions over whole users plus uniform-coefficient interference rows."""
    k = ground.n_users
    n_regions = int(rng.integers(0, min(k, 2) + 1))
    control = np.zeros((n_regions, len(ground)), dtype=np.int64)
    caps = []
    if n_regions:
        region_of = rng.permutation(np.arange(k) % n_regions)
        for r in range(n_regions):
            members = np.flatnonzero(region_of == r)
            for u in members:
                control[r, ground.user_elements(int(u))] = 1
            caps.append(int(rng.integers(1, len(members) + 1)))
    interference = np.zeros((n_interference, len(ground)))
    for r in range(n_interference):
        loud = rng.uniform(size=len(ground)) < rng.uniform(0.3, 0.9)
        interference[r, loud] = 1.0 / int(rng.integers(1, 4))
    return KnapsackSystem(control, interference, control_capacity=caps if n_regions else None)


def general_knapsacks(rng: np.random.Generator, ground: GroundSet, n_control: int = 2,
                      n_interference: int = 1, sparsity: int = 2) -> KnapsackSystem:
    """Overlapping binary control rows and arbitrary fractional interference rows."""
    n = len(ground)
    control = np.zeros((n_control, n), dtype=np.int64)
    for e in range(n):
        if n_control:
            rows = rng.choice(n_control, size=int(rng.integers(0, min(sparsity, n_control) + 1)), replace=False)
            control[rows, e] = 1
    caps = rng.integers(1, 3, size=n_control)
    interference = rng.uniform(0.0, 0.7, size=(n_interference, n)) * (rng.uniform(size=(n_interference, n)) < 0.7)
    return KnapsackSystem(control, interference, control_capacity=caps, max_sparsity=sparsity)


def random_instance(rng: np.random.Generator, n_users: int, n_rbs: int, n_codebook: int = 1, n_r: int = 2,
                    n_t: int = 1, snr: float = 4.0, finite_queues: bool = False, alphabet: str = "gaussian",
                    knapsacks: str = "none", n_interference: int = 0,
                    constellations=(4, 16, 64)) -> Instance:
    """A small seeded instance.

    ``knapsacks`` is ``"none"``, ``"structured"`` (control regions over users and
    matroid-form interference rows) or ``"general"`` (overlapping control rows,
    arbitrary interference coefficients).
    """
    profiles = []
    for _ in range(n_users):
        profiles.append(UserProfile(
            weight=float(rng.uniform(0.2, 2.0)),
            queue=float(rng.uniform(0.2, 4.0)) if finite_queues else np.inf,
            power=float(rng.uniform(0.5, 2.0)),
            constellation_size=int(rng.choice(constellations)),
            n_t=n_t,
        ))
    ground = build_ground_set(n_users, random_codebook(rng, n_codebook, n_t), n_rbs, profiles)
    channels = ChannelSet(np.sqrt(snr) * rayleigh(rng, (n_users, n_rbs, n_r, n_t)))
    if knapsacks == "structured":
        ks = structured_knapsacks(rng, ground, n_interference)
    elif knapsacks == "general":
        ks = general_knapsacks(rng, ground, n_interference=n_interference)
    elif knapsacks == "none":
        ks = None
    else:
        raise ValueError(f"unknown knapsack family {knapsacks!r}")
    return make_instance(ground, channels, ks, alphabet)
