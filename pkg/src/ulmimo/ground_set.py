"""Resource-block allocations, elements and the scheduling ground set.

An element is one candidate assignment ``(user, allocation, precoder)``.
Elements are indexed user-major, then allocation, then precoder, and that
index is the element's identity everywhere else in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class AllocationVector:
    """RB occupancy pattern made of one chunk or two non-adjacent chunks.

    ``chunks`` holds half-open ``(start, stop)`` RB ranges.
    """

    n_rbs: int
    chunks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not 1 <= len(self.chunks) <= 2:
            raise InvalidArgument(f"allocation needs one or two chunks, got {self.chunks}")
        prev_stop = None
        for start, stop in self.chunks:
            if not 0 <= start < stop <= self.n_rbs:
                raise InvalidArgument(f"chunk {(start, stop)} outside 0..{self.n_rbs}")
            if prev_stop is not None and start <= prev_stop:
                raise InvalidArgument(f"chunks {self.chunks} touch or overlap")
            prev_stop = stop

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "AllocationVector":
        bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in bits):
            raise InvalidArgument("allocation bits must be 0/1")
        chunks = []
        start = None
        for i, b in enumerate(bits + [0]):
            if b and start is None:
                start = i
            elif not b and start is not None:
                chunks.append((start, i))
                start = None
        if not chunks:
            raise InvalidArgument("allocation must contain at least one RB")
        return cls(len(bits), tuple(chunks))

    @property
    def bits(self) -> tuple[int, ...]:
        out = [0] * self.n_rbs
        for start, stop in self.chunks:
            for i in range(start, stop):
                out[i] = 1
        return tuple(out)

    @property
    def size(self) -> int:
        return sum(stop - start for start, stop in self.chunks)

    @property
    def rbs(self) -> tuple[int, ...]:
        return tuple(i for start, stop in self.chunks for i in range(start, stop))

    @property
    def is_two_chunk(self) -> bool:
        return len(self.chunks) == 2

    def __str__(self):
        return "".join(map(str, self.bits))


def count_allocations(n_rbs: int) -> int:
    """Closed form for ``len(enumerate_allocations(n_rbs))``."""
    return n_rbs * (n_rbs + 1) // 2 + math.comb(n_rbs + 1, 4)


def enumerate_allocations(n_rbs: int) -> list[AllocationVector]:
    """All valid allocations over ``n_rbs`` RBs in canonical order.

    Order is by first-chunk start, first-chunk end, second-chunk start,
    second-chunk end, with the one-chunk allocation preceding the two-chunk
    allocations that extend it.
    """
    if n_rbs < 1:
        raise InvalidArgument(f"need at least one RB, got {n_rbs}")
    out = []
    for s1 in range(n_rbs):
        for e1 in range(s1 + 1, n_rbs + 1):
            out.append(AllocationVector(n_rbs, ((s1, e1),)))
            for s2 in range(e1 + 1, n_rbs):
                for e2 in range(s2 + 1, n_rbs + 1):
                    out.append(AllocationVector(n_rbs, ((s1, e1), (s2, e2))))
    return out


def element_psd(allocation: AllocationVector, total_power: float) -> float:
    return total_power / allocation.size


@dataclass(frozen=True)
class Codebook:
    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(np.atleast_2d(np.asarray(m, dtype=complex)) for m in self.matrices)
        if not mats:
            raise InvalidArgument("codebook must be nonempty")
        n_t = mats[0].shape[0]
        for m in mats:
            if m.ndim != 2 or m.shape[0] != n_t or not 1 <= m.shape[1] <= n_t:
                raise InvalidArgument(f"precoder of shape {m.shape} incompatible with N_t={n_t}")
            if not np.all(np.isfinite(m)):
                raise InvalidArgument("precoder entries must be finite")
            m.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @classmethod
    def antenna_selection(cls, n_t: int = 2) -> "Codebook":
        return cls(tuple(np.eye(n_t)[:, [i]] for i in range(n_t)))

    @property
    def n_t(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def max_streams(self) -> int:
        return max(m.shape[1] for m in self.matrices)

    def __len__(self):
        return len(self.matrices)


@dataclass(frozen=True)
class UserProfile:
    weight: float = 1.0
    queue: float = math.inf
    power: float = 1.0
    constellation_size: int = 4
    n_t: int = 1

    def __post_init__(self):
        if not self.weight >= 0:
            raise InvalidArgument(f"weight must be nonnegative, got {self.weight}")
        if not self.queue >= 0:
            raise InvalidArgument(f"queue must be nonnegative, got {self.queue}")
        if not (self.power > 0 and math.isfinite(self.power)):
            raise InvalidArgument(f"power must be positive and finite, got {self.power}")
        if int(self.constellation_size) != self.constellation_size or self.constellation_size < 2:
            raise InvalidArgument(f"constellation size must be an integer >= 2, got {self.constellation_size}")
        if self.n_t < 1:
            raise InvalidArgument(f"n_t must be positive, got {self.n_t}")


@dataclass(frozen=True)
class ChannelSet:
    """Channel matrices ``h[u, n]`` of shape ``(N_r, N_t)``."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=complex)
        if h.ndim != 4:
            raise InvalidArgument(f"channel array must be (K, N, N_r, N_t), got shape {h.shape}")
        if min(h.shape) < 1:
            raise InvalidArgument(f"empty channel dimension in shape {h.shape}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    @property
    def n_rbs(self) -> int:
        return self.h.shape[1]

    @property
    def n_r(self) -> int:
        return self.h.shape[2]

    @property
    def n_t(self) -> int:
        return self.h.shape[3]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.h)))


@dataclass(frozen=True)
class Element:
    index: int
    user: int
    allocation: AllocationVector
    alloc_index: int
    precoder: int
    psd: float


@dataclass(frozen=True, eq=False)
class GroundSet:
    """Every ``(user, allocation, precoder)`` triple, plus array views of it.

    Users and precoders are 0-based. Use :func:`build_ground_set`.
    """

    codebook: Codebook
    profiles: tuple[UserProfile, ...]
    allocations: tuple[AllocationVector, ...]
    elements: tuple[Element, ...] = field(repr=False)

    def __post_init__(self):
        n_alloc = len(self.allocations)
        n_w = len(self.codebook)
        idx = np.arange(len(self.elements))
        arrays = {
            "user": idx // (n_alloc * n_w),
            "alloc": (idx // n_w) % n_alloc,
            "precoder": idx % n_w,
        }
        sizes = np.array([a.size for a in self.allocations])
        power = np.array([p.power for p in self.profiles], dtype=float)
        arrays["psd"] = power[arrays["user"]] / sizes[arrays["alloc"]] if len(idx) else np.zeros(0)
        mask = np.array([a.bits for a in self.allocations], dtype=bool).reshape(n_alloc, -1)
        arrays["alloc_mask"] = mask
        arrays["alloc_size"] = sizes
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        # constituent one-chunk allocations of each two-chunk allocation
        lookup = {a.chunks: i for i, a in enumerate(self.allocations)}
        parts = {}
        for i, a in enumerate(self.allocations):
            if a.is_two_chunk:
                parts[i] = (lookup[a.chunks[:1]], lookup[a.chunks[1:]])
        object.__setattr__(self, "alloc_parts", parts)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i) -> Element:
        return self.elements[i]

    @property
    def n_users(self) -> int:
        return len(self.profiles)

    @property
    def n_rbs(self) -> int:
        return self.allocations[0].n_rbs

    def index_of(self, user: int, alloc_index: int, precoder: int) -> int:
        return (user * len(self.allocations) + alloc_index) * len(self.codebook) + precoder

    def user_elements(self, user: int) -> range:
        span = len(self.allocations) * len(self.codebook)
        return range(user * span, (user + 1) * span)

    def element_values(self, per_user: Sequence[float]) -> np.ndarray:
        """Broadcast a per-user quantity (weights, queues) onto elements."""
        per_user = np.asarray(per_user, dtype=float)
        if per_user.shape != (self.n_users,):
            raise InvalidArgument(f"expected {self.n_users} per-user values, got shape {per_user.shape}")
        return per_user[self.user]

    def weights(self) -> np.ndarray:
        return self.element_values([p.weight for p in self.profiles])

    def queues(self) -> np.ndarray:
        return self.element_values([p.queue for p in self.profiles])

    def constituents(self, index: int) -> tuple[int, int] | None:
        """One-chunk elements (same user and precoder) that make up a two-chunk element."""
        parts = self.alloc_parts.get(int(self.alloc[index]))
        if parts is None:
            return None
        u, w = int(self.user[index]), int(self.precoder[index])
        return self.index_of(u, parts[0], w), self.index_of(u, parts[1], w)

    def active_on(self, subset: Iterable[int], rb: int) -> tuple[int, ...]:
        return tuple(e for e in subset if self.alloc_mask[self.alloc[e], rb])


def build_ground_set(n_users: int, codebook: Codebook, n_rbs: int,
                     profiles: Sequence[UserProfile]) -> GroundSet:
    if n_users < 1:
        raise InvalidArgument(f"need at least one user, got {n_users}")
    if len(profiles) != n_users:
        raise InvalidArgument(f"got {len(profiles)} profiles for {n_users} users")
    for u, p in enumerate(profiles):
        if p.n_t != codebook.n_t:
            raise InvalidArgument(f"user {u} has n_t={p.n_t} but codebook has N_t={codebook.n_t}")
    allocations = enumerate_allocations(n_rbs)
    elements = []
    for u, prof in enumerate(profiles):
        for a, alloc in enumerate(allocations):
            psd = element_psd(alloc, prof.power)
            for w in range(len(codebook)):
                elements.append(Element(len(elements), u, alloc, a, w, psd))
    return GroundSet(codebook, tuple(profiles), tuple(allocations), tuple(elements))


def as_indices(subset) -> tuple[int, ...]:
    """Canonical sorted tuple of element indices; accepts ints or Elements."""
    out = set()
    for e in subset:
        out.add(e.index if isinstance(e, Element) else int(e))
    return tuple(sorted(out))
