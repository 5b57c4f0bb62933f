"""Cardinality-constrained transmit antenna selection.

Pick ``C`` columns of ``H`` maximizing ``log2 det(I + H_S H_S^H)``. This is
the scheduling problem with one RB, single-antenna "users" (the columns),
unit power, a trivial codebook and one cardinality constraint, so the greedy
scheduler carries over with its 1/2 guarantee.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSystem, KnapsackSystem
from .errors import CapacityError, InvalidArgument
from .ground_set import ChannelSet, Codebook, UserProfile, build_ground_set
from .rank import CappedRank, GaussianRank, logdet2


@dataclass(frozen=True)
class AntennaSelectionInstance:
    """Channel columns, selection size and optional SNR.

    When ``snr`` is given the columns are scaled by ``sqrt(snr / C)``.
    """

    h: np.ndarray
    max_selected: int
    snr: float | None = None

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h, dtype=complex))
        if h.ndim != 2:
            raise InvalidArgument(f"channel must be a matrix, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise InvalidArgument("channel entries must be finite")
        if not 1 <= self.max_selected <= h.shape[1]:
            raise InvalidArgument(f"C={self.max_selected} outside 1..{h.shape[1]}")
        if self.snr is not None and not self.snr > 0:
            raise InvalidArgument(f"snr must be positive, got {self.snr}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def n_antennas(self) -> int:
        return self.h.shape[1]

    @property
    def scaled(self) -> np.ndarray:
        if self.snr is None:
            return self.h
        return self.h * math.sqrt(self.snr / self.max_selected)


def selection_value(instance: AntennaSelectionInstance, cols) -> float:
    """``log2 det(I + H_S H_S^H)`` for the columns ``cols``."""
    h = instance.scaled
    cols = sorted(cols)
    b = h[:, cols]
    return logdet2(np.eye(h.shape[0]) + b @ b.conj().T)


def principal_minor_value(instance: AntennaSelectionInstance, cols) -> float:
    """Same quantity through the ``C x C`` principal minor of ``I + H^H H``."""
    h = instance.scaled
    cols = sorted(cols)
    if not cols:
        return 0.0
    gram = np.eye(h.shape[1]) + h.conj().T @ h
    return logdet2(gram[np.ix_(cols, cols)])


def antenna_greedy(instance: AntennaSelectionInstance) -> tuple[tuple[int, ...], float]:
    chosen: list[int] = []
    value = 0.0
    while len(chosen) < instance.max_selected:
        best_gain, best_col = 0.0, None
        for k in range(instance.n_antennas):
            if k in chosen:
                continue
            gain = selection_value(instance, chosen + [k]) - value
            if gain > best_gain:
                best_gain, best_col = gain, k
        if best_col is None:
            break
        chosen.append(best_col)
        value = selection_value(instance, chosen)
    return tuple(sorted(chosen)), value


def antenna_exact(instance: AntennaSelectionInstance, max_antennas: int = 20) -> tuple[tuple[int, ...], float]:
    if instance.n_antennas > max_antennas:
        raise CapacityError(f"{instance.n_antennas} antennas exceeds exhaustive budget {max_antennas}")
    best_cols, best_val = (), -np.inf
    for cols in itertools.combinations(range(instance.n_antennas), instance.max_selected):
        val = selection_value(instance, cols)
        if val > best_val:
            best_cols, best_val = cols, val
    return best_cols, float(best_val)


def as_scheduling_problem(instance: AntennaSelectionInstance):
    """Encode as ``(ground, weights, capped_rank, constraints)`` for the schedulers.

    One user per column, one RB, unit power, codebook ``{[1]}``, equal weights,
    backlogged queues and a single control row of capacity ``C``.
    """
    h = instance.scaled
    n_r, k = h.shape
    profiles = [UserProfile(weight=1.0, power=1.0, n_t=1) for _ in range(k)]
    ground = build_ground_set(k, Codebook((np.ones((1, 1)),)), 1, profiles)
    channels = ChannelSet(h.T.reshape(k, 1, n_r, 1))
    rank = CappedRank(GaussianRank(ground, channels))
    control = KnapsackSystem(np.ones((1, k), dtype=np.int64), np.zeros((0, k)),
                             control_capacity=[instance.max_selected])
    return ground, ground.weights(), rank, ConstraintSystem(ground, control)
