"""Double quantum dot plus tight-binding leads, built sector by sector.

Site layout for lead length ``l``::

    0 .. l-1     left lead (site l-1 touches the dots)
    l            dot A
    l+1          dot B
    l+2 .. 2l+1  right lead (site l+2 touches the dots)

Lead-dot bonds are ``t1 = left-A``, ``t2 = right-A``, ``t3 = left-B`` and
``t4 = right-B``.  Every hopping enters as ``-amp * (c+_i c_j + h.c.)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .fock import DOWN, UP, SectorBasis, apply_monomial, orbital


class Topology(enum.Enum):
    SERIES = "series"
    SIDE_COUPLED = "side"
    PARALLEL = "parallel"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, name: str) -> "Topology":
        key = name.strip().lower().replace("-", "_")
        aliases = {
            "series": cls.SERIES,
            "serial": cls.SERIES,
            "side": cls.SIDE_COUPLED,
            "side_coupled": cls.SIDE_COUPLED,
            "sidecoupled": cls.SIDE_COUPLED,
            "parallel": cls.PARALLEL,
            "custom": cls.CUSTOM,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown topology {name!r}") from None


@dataclass(frozen=True)
class ModelSpec:
    """Physical parameters of one DQD configuration (``k_B = 1``)."""

    topology: Topology = Topology.SERIES
    t: float = 0.1
    U: float = 0.4
    t_prime: float = 1 / math.sqrt(20)
    t0: float = 1.0
    lead_len: int = 2
    B: float = 0.0
    T: float = 0.0
    eps_d: Optional[float] = None
    # (t1, t2, t3, t4), only read for Topology.CUSTOM
    couplings: Optional[Tuple[float, float, float, float]] = None

    def __post_init__(self):
        if self.U < 0:
            raise ValueError("U must be non-negative")
        if self.T < 0:
            raise ValueError("T must be non-negative")
        if self.lead_len < 0:
            raise ValueError("lead_len must be non-negative")
        if self.lead_len > 0 and self.t0 <= 0:
            raise ValueError("t0 must be positive when leads are present")
        if self.topology is Topology.CUSTOM:
            if self.couplings is None or len(self.couplings) != 4:
                raise ValueError("custom topology needs four couplings (t1, t2, t3, t4)")

    @property
    def n_sites(self) -> int:
        return 2 + 2 * self.lead_len

    @property
    def site_a(self) -> int:
        return self.lead_len

    @property
    def site_b(self) -> int:
        return self.lead_len + 1

    @property
    def dot_level(self) -> float:
        return -self.U / 2 if self.eps_d is None else self.eps_d

    def with_(self, **changes) -> "ModelSpec":
        return replace(self, **changes)


def lead_couplings(spec: ModelSpec) -> Tuple[float, float, float, float]:
    tp = spec.t_prime
    if spec.topology is Topology.SERIES:
        return (tp, 0.0, 0.0, tp)
    if spec.topology is Topology.SIDE_COUPLED:
        return (tp, tp, 0.0, 0.0)
    if spec.topology is Topology.PARALLEL:
        return (tp, tp, tp, tp)
    return tuple(float(x) for x in spec.couplings)


def bonds(spec: ModelSpec) -> List[Tuple[int, int, float]]:
    """Hopping bonds ``(i, j, amp)`` with zero-amplitude bonds dropped."""
    l = spec.lead_len
    a, b = spec.site_a, spec.site_b
    out = [(a, b, spec.t)]
    for k in range(l - 1):
        out.append((k, k + 1, spec.t0))
        out.append((l + 2 + k, l + 3 + k, spec.t0))
    if l > 0:
        left, right = l - 1, l + 2
        t1, t2, t3, t4 = lead_couplings(spec)
        out += [(left, a, t1), (right, a, t2), (left, b, t3), (right, b, t4)]
    return [bd for bd in out if bd[2] != 0.0]


@dataclass(frozen=True)
class SectorMatrix:
    """Real symmetric Hamiltonian block in coordinate form."""

    label: Tuple[int, int]
    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def tocsr(self) -> sp.csr_matrix:
        return sp.coo_matrix((self.vals, (self.rows, self.cols)), shape=(self.dim, self.dim)).tocsr()

    def toarray(self) -> np.ndarray:
        return self.tocsr().toarray()


def _bit(states: np.ndarray, orb: int) -> np.ndarray:
    return ((states >> orb) & 1).astype(float)


def diagonal_energies(spec: ModelSpec, states: np.ndarray) -> np.ndarray:
    diag = np.zeros(states.shape, dtype=float)
    for site in (spec.site_a, spec.site_b):
        n_up = _bit(states, orbital(site, UP))
        n_dn = _bit(states, orbital(site, DOWN))
        diag += spec.dot_level * (n_up + n_dn) + spec.U * n_up * n_dn
        diag += spec.B * 0.5 * (n_up - n_dn)
    return diag


def build_hamiltonian(spec: ModelSpec, basis: SectorBasis) -> SectorMatrix:
    if basis.L != spec.n_sites:
        raise ValueError(f"basis has L={basis.L} sites but the model needs {spec.n_sites}")
    states = basis.states
    idx = np.arange(basis.dim, dtype=np.int64)
    rows = [idx]
    cols = [idx]
    vals = [diagonal_energies(spec, states)]
    for i, j, amp in bonds(spec):
        for spin in (UP, DOWN):
            oi, oj = orbital(i, spin), orbital(j, spin)
            for to, frm in ((oi, oj), (oj, oi)):
                new, sign, ok = apply_monomial(states, ((to, True), (frm, False)))
                target = basis.index_of(new[ok])
                rows.append(target)
                cols.append(idx[ok])
                vals.append(-amp * sign[ok].astype(float))
    return SectorMatrix(
        basis.label,
        basis.dim,
        np.concatenate(rows),
        np.concatenate(cols),
        np.concatenate(vals),
    )


def hybridization_widths(spec: ModelSpec) -> Tuple[float, float]:
    """Per-dot widths ``sum_n t_n**2 / t0`` over the bonds touching each dot."""
    if spec.t0 <= 0:
        raise ValueError("hybridization width needs t0 > 0")
    t1, t2, t3, t4 = lead_couplings(spec)
    return ((t1**2 + t2**2) / spec.t0, (t3**2 + t4**2) / spec.t0)


def hybridization_width(spec: ModelSpec):
    """Gamma for the named topologies, a per-dot pair for custom couplings.

    Series gives ``t'^2/t0``; side-coupled and parallel give ``2 t'^2/t0``
    (dot A touches both leads).
    """
    gamma_a, gamma_b = hybridization_widths(spec)
    if spec.topology is Topology.CUSTOM:
        return gamma_a, gamma_b
    return gamma_a


@dataclass(frozen=True)
class Exchange:
    J: Optional[float]
    delta_st: float


def singlet_triplet_splitting(t: float, U: float) -> float:
    """Exact splitting of the isolated half-filled Hubbard dimer."""
    return (math.sqrt(U * U + 16 * t * t) - U) / 2


def effective_exchange(spec: ModelSpec) -> Exchange:
    """Superexchange ``4t^2/U`` plus the exact dimer splitting.

    ``J`` is ``None`` at ``U = 0``, where only the splitting is meaningful.
    """
    J = 4 * spec.t**2 / spec.U if spec.U > 0 else None
    return Exchange(J, singlet_triplet_splitting(spec.t, spec.U))


def t_for_exchange(J: float, U: float) -> float:
    return math.sqrt(J * U / 4)
