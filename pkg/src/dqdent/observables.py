"""Dot correlators and the two-dot reduced density matrix.

Operator expressions are lists of ``(coefficient, monomial)`` pairs, where a
monomial is a tuple of ``(orbital, is_creation)`` read left to right.

The reduced density matrix uses the local basis ``0, up, down, updown``
(index ``n_up + 2*n_down``) on each dot and the product index
``4*a + b`` for dot A state ``a`` and dot B state ``b``.  A two-dot basis
ket is ``(dot-A creators)(dot-B creators)|0>`` with up before down.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from .fock import DOWN, UP, Monomial, SectorBasis, apply_monomial, monomial_sector_shift, orbital
from .solver import EnsembleComponent, ThermalEnsemble

OpExpr = List[Tuple[complex, Monomial]]

LOCAL_LABELS = ("0", "u", "d", "ud")
IMAG_TOL = 1e-12


@dataclass
class PureState:
    basis: SectorBasis
    vector: np.ndarray


def as_components(state: Union[ThermalEnsemble, PureState]) -> Tuple[int, List[EnsembleComponent]]:
    if isinstance(state, PureState):
        v = np.asarray(state.vector, dtype=float)
        v = v / np.linalg.norm(v)
        comp = EnsembleComponent(state.basis, np.zeros(1), v[:, None], np.ones(1))
        return state.basis.L, [comp]
    return state.L, state.components


# --- operator building blocks -------------------------------------------------

def cdag(orb: int) -> Monomial:
    return ((orb, True),)


def c(orb: int) -> Monomial:
    return ((orb, False),)


def number(orb: int) -> Monomial:
    return ((orb, True), (orb, False))


def spin_plus(site: int) -> Monomial:
    return ((orbital(site, UP), True), (orbital(site, DOWN), False))


def spin_minus(site: int) -> Monomial:
    return ((orbital(site, DOWN), True), (orbital(site, UP), False))


def product(*exprs: OpExpr) -> OpExpr:
    out: OpExpr = [(1.0, ())]
    for expr in exprs:
        out = [(a * b, m1 + m2) for a, m1 in out for b, m2 in expr]
    return out


def single_projector(site: int, spin: int) -> OpExpr:
    """``P^s = n_s (1 - n_-s)``: the site holds exactly one electron of spin ``s``."""
    n_s = number(orbital(site, spin))
    n_o = number(orbital(site, 1 - spin))
    return [(1.0, n_s), (-1.0, n_s + n_o)]


def sz_op(site: int) -> OpExpr:
    return [(0.5, number(orbital(site, UP))), (-0.5, number(orbital(site, DOWN)))]


def n_op(site: int) -> OpExpr:
    return [(1.0, number(orbital(site, UP))), (1.0, number(orbital(site, DOWN)))]


def spin_dot_op(a: int, b: int) -> OpExpr:
    return product(sz_op(a), sz_op(b)) + [(0.5, spin_plus(a) + spin_minus(b)), (0.5, spin_minus(a) + spin_plus(b))]


# --- expectation values -------------------------------------------------------

def _check_orbitals(expr: OpExpr, L: int) -> None:
    for _, mono in expr:
        for orb, _ in mono:
            if not 0 <= orb < 2 * L:
                raise ValueError(f"operator touches orbital {orb} outside {2 * L} orbitals")


def _component_expectation(comp: EnsembleComponent, mono: Monomial) -> float:
    if monomial_sector_shift(mono) != (0, 0):
        # sector eigenstates carry no coherence between sectors
        return 0.0
    states = comp.basis.states
    new, sign, ok = apply_monomial(states, mono)
    if not ok.any():
        return 0.0
    src = np.nonzero(ok)[0]
    dst = comp.basis.index_of(new[ok])
    V = comp.vectors
    # <v| O |v> = sum_i v[dst_i] * sign_i * v[src_i]
    per_state = np.einsum("ik,ik->k", V[dst], V[src] * sign[ok][:, None])
    return float(per_state @ comp.weights)


def expectation(state: Union[ThermalEnsemble, PureState], expr: OpExpr) -> float:
    """``sum_k w_k <v_k| op |v_k>`` over a pure state or an ensemble."""
    L, comps = as_components(state)
    _check_orbitals(expr, L)
    total = 0j
    for coef, mono in expr:
        if coef == 0:
            continue
        total += coef * sum(_component_expectation(comp, mono) for comp in comps)
    if abs(total.imag) > IMAG_TOL:
        raise ValueError(f"expectation has imaginary part {total.imag:.3e}; operator not Hermitian?")
    return float(total.real)


@dataclass(frozen=True)
class CorrelatorSet:
    s_plus_minus: complex
    s_plus_plus: complex
    # p[s, s'] = <P^s_A P^s'_B>, index 0 = up, 1 = down
    p: np.ndarray
    spin_dot: float
    dn2_A: float
    n_A: float
    n_B: float

    @property
    def P_ud(self) -> float:
        return float(self.p[UP, DOWN] + self.p[DOWN, UP])

    @property
    def P_par(self) -> float:
        return float(self.p[UP, UP] + self.p[DOWN, DOWN])


def correlators(state: Union[ThermalEnsemble, PureState], site_a: int, site_b: int) -> CorrelatorSet:
    """Every expectation value entering the closed-form concurrence, plus
    ``<S_A.S_B>``, the occupancies and the charge fluctuation on dot A."""
    ev = lambda expr: expectation(state, expr)
    p = np.zeros((2, 2))
    for s in (UP, DOWN):
        for s2 in (UP, DOWN):
            p[s, s2] = ev(product(single_projector(site_a, s), single_projector(site_b, s2)))
    s_pm = ev([(1.0, spin_plus(site_a) + spin_minus(site_b))])
    s_pp = ev([(1.0, spin_plus(site_a) + spin_plus(site_b))])
    n_a = ev(n_op(site_a))
    n_b = ev(n_op(site_b))
    n_a2 = ev(product(n_op(site_a), n_op(site_a)))
    return CorrelatorSet(
        s_plus_minus=s_pm,
        s_plus_plus=s_pp,
        p=p,
        spin_dot=ev(spin_dot_op(site_a, site_b)),
        dn2_A=n_a2 - n_a * n_a,
        n_A=n_a,
        n_B=n_b,
    )


# --- reduced density matrix ---------------------------------------------------

@dataclass(frozen=True)
class ReducedDensityMatrix:
    rho16: np.ndarray

    def check(self, tol: float = 1e-12) -> None:
        r = self.rho16
        if abs(np.trace(r) - 1) > tol:
            raise ValueError(f"trace {np.trace(r)} != 1")
        if np.abs(r - r.conj().T).max() > tol:
            raise ValueError("rho16 is not Hermitian")
        if np.linalg.eigvalsh(r).min() < -tol:
            raise ValueError("rho16 is not positive semidefinite")

    def expect(self, op16: np.ndarray) -> complex:
        return complex(np.trace(self.rho16 @ op16))


def local_index(states: np.ndarray, site: int) -> np.ndarray:
    up = (states >> orbital(site, UP)) & 1
    dn = (states >> orbital(site, DOWN)) & 1
    return up + 2 * dn


def _reorder_sign(states: np.ndarray, dot_orbs: Sequence[int]) -> np.ndarray:
    """Sign from moving the dot orbitals (ascending) in front of all others."""
    dot_mask = 0
    for o in dot_orbs:
        dot_mask |= 1 << o
    rest = states & ~np.int64(dot_mask)
    parity = np.zeros(states.shape, dtype=np.int64)
    for o in dot_orbs:
        occ = (states >> o) & 1
        parity += occ * np.bitwise_count(rest & ((np.int64(1) << o) - 1))
    return 1 - 2 * (parity & 1)


def reduced_density_matrix(state: Union[ThermalEnsemble, PureState], site_a: int, site_b: int) -> ReducedDensityMatrix:
    """Fermionic partial trace over every orbital except the two dots."""
    if site_a >= site_b:
        raise ValueError("expects site_a < site_b")
    _, comps = as_components(state)
    dot_orbs = [orbital(site_a, UP), orbital(site_a, DOWN), orbital(site_b, UP), orbital(site_b, DOWN)]
    dot_mask = sum(1 << o for o in dot_orbs)
    rho = np.zeros((16, 16))
    for comp in comps:
        states = comp.basis.states
        d = 4 * local_index(states, site_a) + local_index(states, site_b)
        rest = states & ~np.int64(dot_mask)
        amp = comp.vectors * _reorder_sign(states, dot_orbs)[:, None]
        groups = {}
        for dv in np.unique(d):
            sel = np.nonzero(d == dv)[0]
            order = np.argsort(rest[sel])
            groups[int(dv)] = (rest[sel][order], sel[order])
        for dv, (r1, i1) in groups.items():
            for ev_, (r2, i2) in groups.items():
                if ev_ < dv:
                    continue
                _, j1, j2 = np.intersect1d(r1, r2, assume_unique=True, return_indices=True)
                if j1.size == 0:
                    continue
                val = np.einsum("ik,ik,k->", amp[i1[j1]], amp[i2[j2]], comp.weights)
                rho[dv, ev_] += val
                if ev_ != dv:
                    rho[ev_, dv] += val
    return ReducedDensityMatrix(rho)


def dot_operator16(expr: OpExpr) -> np.ndarray:
    """Matrix of a dot-only operator on the 16-state two-dot basis.

    Orbitals in ``expr`` are local: 0 = A up, 1 = A down, 2 = B up,
    3 = B down, which matches the ordering used by :func:`reduced_density_matrix`.
    """
    def to_index(mask: int) -> int:
        a = (mask & 1) + 2 * ((mask >> 1) & 1)
        b = ((mask >> 2) & 1) + 2 * ((mask >> 3) & 1)
        return 4 * a + b

    out = np.zeros((16, 16), dtype=complex)
    masks = np.arange(16, dtype=np.int64)
    for coef, mono in expr:
        new, sign, ok = apply_monomial(masks, mono)
        for m, n, s in zip(masks[ok], new[ok], sign[ok]):
            out[to_index(int(n)), to_index(int(m))] += coef * s
    return out
