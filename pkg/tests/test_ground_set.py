import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ulmimo.errors import InvalidArgument
from ulmimo.ground_set import (AllocationVector, ChannelSet, Codebook, UserProfile, as_indices,
                               build_ground_set, count_allocations, element_psd, enumerate_allocations)


def chunk_count(bits):
    return sum(1 for i, b in enumerate(bits) if b and (i == 0 or not bits[i - 1]))


def filtered_allocations(n):
    return {bits for bits in itertools.product((0, 1), repeat=n) if 1 <= chunk_count(bits) <= 2}


def test_n1_single_allocation():
    assert [a.bits for a in enumerate_allocations(1)] == [(1,)]


def test_n2_allocations():
    assert {a.bits for a in enumerate_allocations(2)} == {(1, 0), (0, 1), (1, 1)}


def test_n3_includes_split_pair():
    allocs = enumerate_allocations(3)
    assert len(allocs) == 7
    assert (1, 0, 1) in {a.bits for a in allocs}


@pytest.mark.parametrize("n, expected", [(1, 1), (2, 3), (3, 7), (4, 15), (5, 30), (6, 56), (7, 98), (8, 162),
                                         (20, 6195)])
def test_allocation_counts(n, expected):
    assert count_allocations(n) == expected
    assert len(enumerate_allocations(n)) == expected


@pytest.mark.parametrize("n", range(1, 9))
def test_enumeration_matches_exhaustive_filter(n):
    allocs = enumerate_allocations(n)
    bits = [a.bits for a in allocs]
    assert len(set(bits)) == len(bits)
    assert set(bits) == filtered_allocations(n)


@pytest.mark.parametrize("n", range(1, 7))
def test_enumeration_order(n):
    def key(a):
        (s1, e1), *rest = a.chunks
        s2, e2 = rest[0] if rest else (-1, -1)
        return s1, e1, s2, e2

    allocs = enumerate_allocations(n)
    assert allocs == sorted(allocs, key=key)


def test_zero_rbs_rejected():
    with pytest.raises(InvalidArgument):
        enumerate_allocations(0)


@pytest.mark.parametrize("bits", [(0, 0, 0), (1, 0, 1, 0, 1), (2, 0)])
def test_invalid_bits_rejected(bits):
    with pytest.raises(InvalidArgument):
        AllocationVector.from_bits(bits)


def test_adjacent_chunks_rejected():
    with pytest.raises(InvalidArgument):
        AllocationVector(4, ((0, 2), (2, 3)))


@given(st.lists(st.integers(0, 1), min_size=1, max_size=10))
def test_from_bits_roundtrip(bits):
    if 1 <= chunk_count(bits) <= 2:
        a = AllocationVector.from_bits(bits)
        assert a.bits == tuple(bits)
        assert a.size == sum(bits)
        assert a.is_two_chunk == (chunk_count(bits) == 2)
    else:
        with pytest.raises(InvalidArgument):
            AllocationVector.from_bits(bits)


@pytest.mark.parametrize("power, bits, expected", [(4.0, (1, 1), 2.0), (1.0, (1,), 1.0), (3.0, (1, 1, 1), 1.0)])
def test_element_psd(power, bits, expected):
    assert element_psd(AllocationVector.from_bits(bits), power) == expected


def profiles(k, n_t=1, **kw):
    return [UserProfile(n_t=n_t, **kw) for _ in range(k)]


@pytest.mark.parametrize("k, w, n, expected", [(1, 1, 1, 1), (2, 2, 3, 28), (10, 2, 20, 10 * 2 * 6195)])
def test_ground_set_cardinality(k, w, n, expected):
    cb = Codebook.antenna_selection(2) if w == 2 else Codebook((np.ones((1, 1)),))
    ground = build_ground_set(k, cb, n, profiles(k, n_t=cb.n_t))
    assert len(ground) == expected


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 6), st.lists(st.floats(0.1, 10.0), min_size=4, max_size=4))
def test_ground_set_layout(k, w, n, powers):
    cb = Codebook(tuple(np.eye(3)[:, [i % 3]] for i in range(w)))
    ground = build_ground_set(k, cb, n, [UserProfile(power=p, n_t=3) for p in powers[:k]])
    assert len(ground) == k * w * count_allocations(n)
    for e in ground:
        assert ground.index_of(e.user, e.alloc_index, e.precoder) == e.index
        assert e.psd == powers[e.user] / e.allocation.size
        assert e.index in ground.user_elements(e.user)
    # user-major, then allocation, then precoder
    keys = [(e.user, e.alloc_index, e.precoder) for e in ground]
    assert keys == sorted(keys)


def test_ground_set_is_reproducible():
    a = build_ground_set(3, Codebook.antenna_selection(2), 4, profiles(3, n_t=2))
    b = build_ground_set(3, Codebook.antenna_selection(2), 4, profiles(3, n_t=2))
    assert a.elements == b.elements


def test_constituents():
    ground = build_ground_set(1, Codebook.antenna_selection(2), 3, profiles(1, n_t=2))
    split = ground.index_of(0, ground.allocations.index(AllocationVector.from_bits((1, 0, 1))), 1)
    first, second = ground.constituents(split)
    assert ground[first].allocation.bits == (1, 0, 0)
    assert ground[second].allocation.bits == (0, 0, 1)
    assert ground[first].precoder == ground[second].precoder == 1
    assert ground.constituents(first) is None


def test_build_rejects_mismatches():
    cb = Codebook.antenna_selection(2)
    with pytest.raises(InvalidArgument):
        build_ground_set(2, cb, 2, profiles(2, n_t=1))
    with pytest.raises(InvalidArgument):
        build_ground_set(2, cb, 2, profiles(1, n_t=2))
    with pytest.raises(InvalidArgument):
        build_ground_set(0, cb, 2, [])


@pytest.mark.parametrize("kw", [dict(weight=-1.0), dict(queue=-0.5), dict(power=0.0), dict(constellation_size=1)])
def test_profile_validation(kw):
    with pytest.raises(InvalidArgument):
        UserProfile(**kw)


def test_codebook_validation():
    with pytest.raises(InvalidArgument):
        Codebook(())
    with pytest.raises(InvalidArgument):
        Codebook((np.ones((2, 1)), np.ones((3, 1))))
    with pytest.raises(InvalidArgument):
        Codebook((np.ones((1, 2)),))


def test_antenna_selection_codebook():
    cb = Codebook.antenna_selection(2)
    assert len(cb) == 2
    np.testing.assert_array_equal(cb.matrices[0], [[1], [0]])
    np.testing.assert_array_equal(cb.matrices[1], [[0], [1]])


def test_channel_set_shape():
    ch = ChannelSet(np.zeros((2, 3, 4, 1)))
    assert (ch.n_users, ch.n_rbs, ch.n_r, ch.n_t) == (2, 3, 4, 1)
    with pytest.raises(InvalidArgument):
        ChannelSet(np.zeros((2, 3, 4)))
    assert not ChannelSet(np.full((1, 1, 1, 1), np.nan)).is_finite()


def test_as_indices_canonical():
    ground = build_ground_set(2, Codebook((np.ones((1, 1)),)), 2, profiles(2))
    assert as_indices([3, ground[1], 3, 0]) == (0, 1, 3)
