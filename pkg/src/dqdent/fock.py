"""Occupation-number basis for spinful fermions on a short chain of sites.

Orbitals are flattened as ``2*site + spin`` with ``spin = 0`` for up and
``1`` for down.  A Fock state is an integer bitmask over the ``2L`` orbitals
and corresponds to the ordered product

    |m> = (c+_0)^{n_0} (c+_1)^{n_1} ... (c+_{2L-1})^{n_{2L-1}} |vac>

so creating or annihilating orbital ``p`` picks up ``(-1)**(#occupied < p)``.
Every sign in the package is derived from this single convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

UP = 0
DOWN = 1

MAX_SITES = 16

# (orbital, is_creation) read left to right as written, e.g. c+_i c_j.
Monomial = Tuple[Tuple[int, bool], ...]


def orbital(site: int, spin: int) -> int:
    return 2 * site + spin


def split_orbital(orb: int) -> Tuple[int, int]:
    return orb // 2, orb % 2


def particle_number(mask: int) -> int:
    return int(mask).bit_count()


def twice_sz(mask: int) -> int:
    """Return ``2*S_z`` of a single bitmask (integer, no rounding)."""
    up = down = 0
    m = int(mask)
    p = 0
    while m:
        if m & 1:
            if p % 2 == UP:
                up += 1
            else:
                down += 1
        m >>= 1
        p += 1
    return up - down


def apply_creation(state: int, orb: int) -> Optional[Tuple[int, int]]:
    """Apply ``c+_orb``; ``None`` when the orbital is already filled."""
    if (state >> orb) & 1:
        return None
    sign = -1 if (state & ((1 << orb) - 1)).bit_count() & 1 else 1
    return state | (1 << orb), sign


def apply_annihilation(state: int, orb: int) -> Optional[Tuple[int, int]]:
    """Apply ``c_orb``; ``None`` when the orbital is empty."""
    if not (state >> orb) & 1:
        return None
    sign = -1 if (state & ((1 << orb) - 1)).bit_count() & 1 else 1
    return state ^ (1 << orb), sign


def apply_monomial(states: np.ndarray, ops: Monomial) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised action of a product of ladder operators on many bitmasks.

    Operators are applied right to left.  Returns ``(new_states, signs, ok)``
    where ``ok`` is False for states annihilated by the monomial.
    """
    out = np.array(states, dtype=np.int64, copy=True)
    signs = np.ones(out.shape, dtype=np.int64)
    ok = np.ones(out.shape, dtype=bool)
    for orb, create in reversed(ops):
        bit = np.int64(1) << np.int64(orb)
        occupied = (out & bit) != 0
        ok &= ~occupied if create else occupied
        below = np.bitwise_count(out & (bit - 1)).astype(np.int64)
        signs *= 1 - 2 * (below & 1)
        out = out ^ bit
    return out, signs, ok


def _spread(bits: np.ndarray, offset: int, L: int) -> np.ndarray:
    # site bit k -> orbital bit 2k + offset
    out = np.zeros(bits.shape, dtype=np.int64)
    for k in range(L):
        out |= ((bits >> k) & 1) << (2 * k + offset)
    return out


def _fixed_popcount(L: int, n: int) -> np.ndarray:
    allv = np.arange(1 << L, dtype=np.int64)
    return allv[np.bitwise_count(allv) == n]


@dataclass(frozen=True)
class SectorBasis:
    """All Fock states of ``L`` sites with ``N`` particles and ``2*S_z = sz2``.

    ``states`` is sorted by integer value; :meth:`index_of` inverts it.
    """

    L: int
    N: int
    sz2: int
    states: np.ndarray = field(repr=False)

    @property
    def sz(self) -> float:
        return self.sz2 / 2

    @property
    def label(self) -> Tuple[int, int]:
        return (self.N, self.sz2)

    @property
    def dim(self) -> int:
        return int(self.states.shape[0])

    def __len__(self) -> int:
        return self.dim

    def index_of(self, masks) -> np.ndarray:
        """Positions of ``masks`` in the basis, ``-1`` where absent."""
        masks = np.asarray(masks, dtype=np.int64)
        if self.dim == 0:
            return np.full(masks.shape, -1, dtype=np.int64)
        pos = np.searchsorted(self.states, masks)
        pos_c = np.minimum(pos, self.dim - 1)
        return np.where(self.states[pos_c] == masks, pos_c, -1)


def _check_sites(L: int) -> None:
    if not 1 <= L <= MAX_SITES:
        raise ValueError(f"site count L={L} outside [1, {MAX_SITES}]")


def _spin_counts(L: int, N: int, sz2: int) -> Optional[Tuple[int, int]]:
    if (N + sz2) % 2:
        return None
    n_up, n_down = (N + sz2) // 2, (N - sz2) // 2
    if not (0 <= n_up <= L and 0 <= n_down <= L):
        return None
    return n_up, n_down


def _as_sz2(Sz) -> int:
    sz2 = 2 * Sz
    if abs(sz2 - round(sz2)) > 1e-12:
        raise ValueError(f"S_z={Sz} is not a half-integer")
    return int(round(sz2))


def enumerate_sector(L: int, N: int, Sz) -> SectorBasis:
    """Build the ``(N, S_z)`` sector of ``L`` sites.

    An impossible ``(N, S_z)`` pair yields an empty basis (``dim == 0``);
    a bad site count raises ``ValueError``.
    """
    _check_sites(L)
    sz2 = _as_sz2(Sz)
    counts = _spin_counts(L, N, sz2)
    if counts is None:
        return SectorBasis(L, N, sz2, np.zeros(0, dtype=np.int64))
    ups = _spread(_fixed_popcount(L, counts[0]), UP, L)
    downs = _spread(_fixed_popcount(L, counts[1]), DOWN, L)
    states = np.sort((ups[:, None] | downs[None, :]).ravel())
    return SectorBasis(L, N, sz2, states)


def sector_dimension(L: int, N: int, Sz) -> int:
    counts = _spin_counts(L, N, _as_sz2(Sz))
    return 0 if counts is None else comb(L, counts[0]) * comb(L, counts[1])


def sector_labels(L: int) -> Iterator[Tuple[int, int]]:
    """Every non-empty ``(N, 2*S_z)`` label, ordered by N then S_z."""
    _check_sites(L)
    for N in range(2 * L + 1):
        for sz2 in range(-N, N + 1, 2):
            if _spin_counts(L, N, sz2) is not None:
                yield N, sz2


def all_sectors(L: int) -> list:
    return [enumerate_sector(L, N, sz2 / 2) for N, sz2 in sector_labels(L)]


def monomial_sector_shift(ops: Monomial) -> Tuple[int, int]:
    """Change in ``(N, 2*S_z)`` produced by a monomial."""
    dn = dsz2 = 0
    for orb, create in ops:
        step = 1 if create else -1
        dn += step
        dsz2 += step if orb % 2 == UP else -step
    return dn, dsz2


def flatten_occupations(occ: Sequence[Tuple[int, int]]) -> int:
    """Bitmask from ``(site, spin)`` pairs, handy in tests."""
    mask = 0
    for site, spin in occ:
        mask |= 1 << orbital(site, spin)
    return mask
