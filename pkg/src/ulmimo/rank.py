"""Rank functions over subsets of the ground set.

``GaussianRank`` is the sum over RBs of ``log2 det(I + sum_e p_e G_e G_e^H)``
with ``G_e = H_u W``. ``FiniteAlphabetRank`` tightens it per RB by letting any
subset of the active elements fall back to its constellation-size cap.
``CappedRank`` intersects either region with per-element queue boxes.

All values are in bits per N RBs. Subsets are iterables of element indices
(or :class:`~ulmimo.ground_set.Element`). Values are memoized per instance;
the caches only ever store deterministic results, so sharing an instance
between threads gives the same answers as using one per thread.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import CapacityError, InvalidArgument, NumericError
from .ground_set import ChannelSet, GroundSet, as_indices

DEFAULT_BRUTE_FORCE_CAP = 16
CHOLESKY_TOL = 1e-12


def logdet2(m: np.ndarray) -> float:
    """Base-2 log-determinant of a Hermitian positive-definite matrix."""
    if not np.all(np.isfinite(m)):
        raise NumericError("non-finite entries in log-det argument")
    try:
        c = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Cholesky factorization failed: {exc}") from None
    d = c.diagonal().real
    if d.min() ** 2 < CHOLESKY_TOL:
        raise NumericError(f"matrix not positive definite within {CHOLESKY_TOL}")
    return float(2.0 * np.sum(np.log2(d)))


def _subsets(items):
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


class GaussianRank:
    kind = "gaussian"

    def __init__(self, ground: GroundSet, channels: ChannelSet):
        if channels.n_users != ground.n_users or channels.n_rbs != ground.n_rbs:
            raise InvalidArgument(
                f"channels cover {channels.n_users} users x {channels.n_rbs} RBs, "
                f"ground set has {ground.n_users} x {ground.n_rbs}")
        if channels.n_t != ground.codebook.n_t:
            raise InvalidArgument(f"channel N_t={channels.n_t} but codebook N_t={ground.codebook.n_t}")
        if not channels.is_finite():
            raise NumericError("channel matrices contain non-finite entries")
        self.ground = ground
        self.channels = channels
        n_l = ground.codebook.max_streams
        w = np.zeros((len(ground.codebook), channels.n_t, n_l), dtype=complex)
        for i, m in enumerate(ground.codebook.matrices):
            w[i, :, : m.shape[1]] = m
        # effective channels G[u, w, n] = H[u, n] @ W[w], zero-padded to n_l streams
        self.effective = np.einsum("unrt,wtl->uwnrl", channels.h, w)
        self.effective.setflags(write=False)
        self._rb_cache: dict = {}
        self._cache: dict = {}
        self._total = None

    @property
    def gaussian(self) -> "GaussianRank":
        return self

    def _factor(self, e: int, rb: int) -> np.ndarray:
        g = self.ground
        return math.sqrt(g.psd[e]) * self.effective[g.user[e], g.precoder[e], rb]

    def rb_matrix(self, rb: int, active: tuple[int, ...]) -> np.ndarray:
        n_r = self.channels.n_r
        if not active:
            return np.eye(n_r, dtype=complex)
        b = np.concatenate([self._factor(e, rb) for e in active], axis=1)
        return np.eye(n_r, dtype=complex) + b @ b.conj().T

    def rb_value(self, rb: int, active: tuple[int, ...]) -> float:
        """Log-det term of one RB; ``active`` must be sorted and active on ``rb``."""
        if not active:
            return 0.0
        key = (rb, active)
        val = self._rb_cache.get(key)
        if val is None:
            val = logdet2(self.rb_matrix(rb, active))
            self._rb_cache[key] = val
        return val

    def __call__(self, subset) -> float:
        key = as_indices(subset)
        val = self._cache.get(key)
        if val is None:
            g = self.ground
            val = 0.0
            for rb in range(g.n_rbs):
                val += self.rb_value(rb, g.active_on(key, rb))
            self._cache[key] = val
        return val

    def total(self) -> float:
        """Value on the whole ground set, computed without materializing it."""
        if self._total is None:
            g = self.ground
            power = np.array([p.power for p in g.profiles])
            # load[u, n]: summed psd of all of user u's allocations that cover RB n
            load = power[:, None] * (g.alloc_mask / g.alloc_size[:, None]).sum(axis=0)[None, :]
            eff = self.effective
            total = 0.0
            for rb in range(g.n_rbs):
                cov = np.einsum("u,uwrl,uwsl->rs", load[:, rb], eff[:, :, rb], eff[:, :, rb].conj())
                total += logdet2(np.eye(self.channels.n_r) + cov)
            self._total = total
        return self._total


class FiniteAlphabetRank:
    """Per-RB minimum over which elements are charged their alphabet cap.

    Element ``e`` may be charged ``N_t log2 S_e`` instead of contributing to the
    log-det; the cheapest choice is found by exhaustive search (memoized per RB).
    """

    kind = "finite_alphabet"

    def __init__(self, gaussian: GaussianRank, brute_force_cap: int = DEFAULT_BRUTE_FORCE_CAP):
        self.gaussian = gaussian
        self.ground = gaussian.ground
        self.brute_force_cap = brute_force_cap
        per_user = [p.n_t * math.log2(p.constellation_size) for p in self.ground.profiles]
        self.alphabet_cap = self.ground.element_values(per_user)
        self._rb_cache: dict = {}
        self._cache: dict = {}

    def rb_value(self, rb: int, active: tuple[int, ...]) -> float:
        if not active:
            return 0.0
        key = (rb, active)
        val = self._rb_cache.get(key)
        if val is not None:
            return val
        f = self.gaussian.rb_value
        cost = self.alphabet_cap
        # charging e its cap never helps when the cap exceeds e's standalone log-det
        movable = [e for e in active if cost[e] < f(rb, (e,))]
        best = f(rb, active)
        for charged in _subsets(movable):
            if not charged:
                continue
            kept = tuple(e for e in active if e not in charged)
            val = f(rb, kept) + sum(cost[e] for e in charged)
            best = min(best, val)
        self._rb_cache[key] = best
        return best

    def __call__(self, subset) -> float:
        key = as_indices(subset)
        if len(key) > self.brute_force_cap:
            raise CapacityError(f"finite-alphabet rank on {len(key)} elements exceeds cap {self.brute_force_cap}")
        val = self._cache.get(key)
        if val is None:
            g = self.ground
            val = sum(self.rb_value(rb, g.active_on(key, rb)) for rb in range(g.n_rbs))
            self._cache[key] = val
        return val


def uncapped_sentinel(base) -> float:
    """Queues at or above this value can never bind."""
    return 2.0 * base.gaussian.total()


def queue_capped_rank(base, subset, queues, brute_force_cap: int = DEFAULT_BRUTE_FORCE_CAP) -> float:
    """``sum_U Q + min_{R subset of U} (base(R) - sum_R Q)`` by plain enumeration."""
    key = as_indices(subset)
    if len(key) > brute_force_cap:
        raise CapacityError(f"queue capping over {len(key)} elements exceeds cap {brute_force_cap}")
    q = np.minimum(np.asarray(queues, dtype=float), uncapped_sentinel(base))
    total_q = sum(q[e] for e in key)
    return total_q + min(base(r) - sum(q[e] for e in r) for r in _subsets(key))


class CappedRank:
    """Rank of the rate region of ``base`` intersected with ``r_e <= Q_e``.

    ``queues`` is per element. Infinite queues (and any at or above
    :func:`uncapped_sentinel`) are stored as the sentinel. The brute-force
    cap limits the elements whose queue can bind, not the subset size.
    """

    def __init__(self, base, queues=None, brute_force_cap: int = DEFAULT_BRUTE_FORCE_CAP):
        self.base = base
        self.ground = base.ground
        self.brute_force_cap = brute_force_cap
        if queues is None:
            queues = self.ground.queues()
        q = np.array(queues, dtype=float)
        if q.shape != (len(self.ground),):
            raise InvalidArgument(f"expected {len(self.ground)} per-element queues, got shape {q.shape}")
        if np.any(np.isnan(q)) or np.any(q < 0):
            raise InvalidArgument("queues must be nonnegative")
        self.sentinel = uncapped_sentinel(base)
        self.uncapped = q >= self.sentinel
        q[self.uncapped] = self.sentinel
        q.setflags(write=False)
        self.uncapped.setflags(write=False)
        self.queues = q
        self._cache: dict = {}

    @property
    def kind(self) -> str:
        return self.base.kind

    @property
    def gaussian(self) -> GaussianRank:
        return self.base.gaussian

    def all_uncapped(self) -> bool:
        return bool(self.uncapped.all())

    def __call__(self, subset) -> float:
        key = as_indices(subset)
        val = self._cache.get(key)
        if val is not None:
            return val
        base, q = self.base, self.queues
        # an element whose queue covers its standalone rank never needs capping
        cappable = [e for e in key if not self.uncapped[e] and q[e] < base((e,))]
        if len(cappable) > self.brute_force_cap:
            raise CapacityError(f"queue capping over {len(cappable)} elements exceeds cap {self.brute_force_cap}")
        best = base(key)
        for capped in _subsets(cappable):
            if not capped:
                continue
            rest = tuple(e for e in key if e not in capped)
            best = min(best, base(rest) + sum(q[e] for e in capped))
        self._cache[key] = best
        return best
