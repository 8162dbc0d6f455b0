import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dqdent.fock import (
    DOWN,
    UP,
    all_sectors,
    apply_annihilation,
    apply_creation,
    apply_monomial,
    enumerate_sector,
    orbital,
    sector_dimension,
    split_orbital,
    twice_sz,
)


@pytest.mark.parametrize(
    "L,N,Sz,dim",
    [(4, 4, 0, 36), (1, 2, 0, 1), (2, 2, 1, 1), (3, 3, 0.5, 9), (3, 3, -1.5, 1)],
)
def test_sector_dimension(L, N, Sz, dim):
    basis = enumerate_sector(L, N, Sz)
    assert basis.dim == dim == sector_dimension(L, N, Sz)
    assert all(bin(int(m)).count("1") == N for m in basis.states)
    assert all(twice_sz(int(m)) == int(2 * Sz) for m in basis.states)


def test_invalid_combination_is_empty_not_error():
    assert enumerate_sector(2, 2, 0.5).dim == 0  # parity mismatch
    assert enumerate_sector(2, 4, 1).dim == 0  # too many up spins
    assert enumerate_sector(2, 5, 0.5).dim == 0


@pytest.mark.parametrize("L", [0, 17, -1])
def test_out_of_range_sites_raise(L):
    with pytest.raises(ValueError):
        enumerate_sector(L, 0, 0)


def test_non_half_integer_sz_rejected():
    with pytest.raises(ValueError):
        enumerate_sector(2, 2, 0.3)


def test_orbital_flattening_is_bijective():
    L = 5
    orbs = [orbital(s, sp) for s in range(L) for sp in (UP, DOWN)]
    assert sorted(orbs) == list(range(2 * L))
    assert all(orbital(*split_orbital(o)) == o for o in orbs)


def test_creation_examples():
    assert apply_creation(0, 3) == (1 << 3, 1)
    assert apply_creation(1 << 3, 3) is None
    assert apply_creation(1, 1) == (0b11, -1)


def test_annihilation_examples():
    assert apply_annihilation(0, 2) is None
    assert apply_annihilation(0b101, 2) == (0b001, -1)


@given(st.integers(0, (1 << 12) - 1), st.integers(0, 11))
def test_create_then_annihilate_is_identity(mask, orb):
    created = apply_creation(mask, orb)
    if created is None:
        return
    back = apply_annihilation(created[0], orb)
    assert back[0] == mask
    assert created[1] * back[1] == 1


def _full_ops(L):
    """Dense c_p on the full space built from apply_annihilation."""
    dim = 1 << (2 * L)
    ops = []
    for p in range(2 * L):
        m = np.zeros((dim, dim))
        for state in range(dim):
            r = apply_annihilation(state, p)
            if r is not None:
                m[r[0], state] = r[1]
        ops.append(m)
    return ops


def test_canonical_anticommutation():
    L = 2
    c = _full_ops(L)
    eye = np.eye(1 << (2 * L))
    for i, j in itertools.product(range(2 * L), repeat=2):
        assert np.array_equal(c[i] @ c[j].T + c[j].T @ c[i], eye * (i == j))
        assert np.array_equal(c[i] @ c[j] + c[j] @ c[i], 0 * eye)


def test_monomial_matches_scalar_ops():
    rng = np.random.default_rng(3)
    states = rng.integers(0, 1 << 10, size=200)
    mono = ((7, True), (2, False), (4, True), (4, False))
    new, sign, ok = apply_monomial(states, mono)
    for k, s in enumerate(states):
        cur, sgn = int(s), 1
        alive = True
        for orb, create in reversed(mono):
            r = (apply_creation if create else apply_annihilation)(cur, orb)
            if r is None:
                alive = False
                break
            cur, sgn = r[0], sgn * r[1]
        assert ok[k] == alive
        if alive:
            assert new[k] == cur and sign[k] == sgn


@pytest.mark.parametrize("L", [1, 2, 3])
def test_sectors_partition_fock_space(L):
    seen = np.concatenate([b.states for b in all_sectors(L)])
    assert len(seen) == 4**L
    assert np.array_equal(np.sort(seen), np.arange(4**L))


def test_index_of_inverts_states():
    basis = enumerate_sector(4, 4, 0)
    assert np.array_equal(basis.index_of(basis.states), np.arange(basis.dim))
    assert np.all(np.diff(basis.states) > 0)
    assert basis.index_of([0])[0] == -1
