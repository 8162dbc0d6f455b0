"""Concurrence of the two dot spins.

Three routes are provided: the closed form for axially symmetric states
(built from spin-flip correlators and single-occupancy projectors), the
pure-state amplitude formula, and the Wootters spin-flip construction used
as an independent oracle.  The qubit basis is ``uu, ud, du, dd`` with the
first letter on dot A.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .fock import DOWN, UP
from .observables import CorrelatorSet, ReducedDensityMatrix

# positions of uu, ud, du, dd inside the 16-state two-dot basis
QUBIT_BLOCK = (5, 6, 9, 10)
AXIAL_TOL = 1e-10
_SYSY = np.fliplr(np.diag([-1.0, 1.0, 1.0, -1.0]))


class UndefinedConcurrence(ValueError):
    """No single-occupancy weight on the dots, so no qubit pair exists."""


@dataclass(frozen=True)
class ConcurrenceReport:
    C: float
    C_ud: float
    C_par: float
    P_ud: float
    P_par: float
    C_oracle: Optional[float] = None
    axial: bool = True

    @property
    def single_occupancy_weight(self) -> float:
        return self.P_ud + self.P_par


def concurrence_closed_form(cs: CorrelatorSet) -> ConcurrenceReport:
    p = cs.p
    c_ud = 2 * abs(cs.s_plus_minus) - 2 * math.sqrt(max(p[UP, UP], 0.0) * max(p[DOWN, DOWN], 0.0))
    c_par = 2 * abs(cs.s_plus_plus) - 2 * math.sqrt(max(p[UP, DOWN], 0.0) * max(p[DOWN, UP], 0.0))
    weight = cs.P_ud + cs.P_par
    if weight <= 0:
        raise UndefinedConcurrence("dots carry no single-occupancy weight")
    C = max(0.0, c_ud, c_par) / weight
    return ConcurrenceReport(C, c_ud, c_par, cs.P_ud, cs.P_par)


def _check_density(rho: np.ndarray, tol: float = 1e-9) -> None:
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")


def wootters_concurrence(rho4: np.ndarray) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are the square roots of the eigenvalues of
    ``rho (sy x sy) rho* (sy x sy)``.  They equal the singular values of
    ``X^T (sy x sy) X`` with ``X = V sqrt(diag(p))`` from ``rho = V p V^+``,
    which avoids square-rooting eigenvalues that sit at round-off level.
    """
    rho = np.asarray(rho4, dtype=complex)
    _check_density(rho)
    rho = (rho + rho.conj().T) / 2
    p, V = np.linalg.eigh(rho)
    X = V * np.sqrt(np.clip(p, 0.0, None))
    tau = X.T @ _SYSY @ X
    lam = np.linalg.svd(tau, compute_uv=False)
    return max(0.0, float(lam[0] - lam[1:].sum()))


def wootters_concurrence_naive(rho4: np.ndarray) -> float:
    """Textbook eigenvalue route; only accurate to about ``sqrt(eps)``."""
    rho = np.asarray(rho4, dtype=complex)
    R = rho @ _SYSY @ rho.conj() @ _SYSY
    ev = np.sort(np.sqrt(np.abs(np.linalg.eigvals(R).real)))[::-1]
    return max(0.0, float(ev[0] - ev[1:].sum()))


def project_single_occupancy(rdm: ReducedDensityMatrix, min_weight: float = 1e-14) -> Tuple[np.ndarray, float]:
    """Qubit block of the dot density matrix, renormalised, and its weight."""
    rho16 = rdm.rho16 if isinstance(rdm, ReducedDensityMatrix) else np.asarray(rdm)
    idx = np.array(QUBIT_BLOCK)
    block = rho16[np.ix_(idx, idx)]
    weight = float(np.trace(block).real)
    if weight < min_weight:
        raise UndefinedConcurrence(f"single-occupancy weight {weight:.3e} below {min_weight:.0e}")
    return block / weight, weight


def pure_state_concurrence(amplitudes) -> float:
    """``2|a_ud a_du - a_uu a_dd|`` for amplitudes ``[[a_uu, a_ud], [a_du, a_dd]]``
    (a flat ``uu, ud, du, dd`` vector is accepted too)."""
    a = np.asarray(amplitudes, dtype=complex).reshape(2, 2)
    norm = float(np.sum(np.abs(a) ** 2))
    if abs(norm - 1) > 1e-12:
        raise ValueError(f"amplitudes are not normalised (sum |a|^2 = {norm})")
    return float(2 * abs(a[0, 1] * a[1, 0] - a[0, 0] * a[1, 1]))


def is_axially_symmetric(rho4: np.ndarray, tol: float = AXIAL_TOL) -> bool:
    """True when only the ud/du and uu/dd coherences (X shape) are present."""
    mask = np.ones((4, 4), dtype=bool)
    np.fill_diagonal(mask, False)
    for i, j in ((1, 2), (2, 1), (0, 3), (3, 0)):
        mask[i, j] = False
    return bool(np.abs(np.asarray(rho4)[mask]).max() < tol)


def correlators_from_rho4(rho4: np.ndarray) -> CorrelatorSet:
    """Correlators of a normalised qubit-pair matrix, for the closed form."""
    r = np.asarray(rho4)
    p = np.array([[r[0, 0].real, r[1, 1].real], [r[2, 2].real, r[3, 3].real]])
    # <S+_A S-_B> = rho[du, ud]; <S+_A S+_B> = rho[dd, uu]
    spin_dot = 0.25 * (p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0]) + float(r[2, 1].real)
    return CorrelatorSet(
        s_plus_minus=complex(r[2, 1]),
        s_plus_plus=complex(r[3, 0]),
        p=p,
        spin_dot=spin_dot,
        dn2_A=0.0,
        n_A=1.0,
        n_B=1.0,
    )


def random_axial_density_matrix(rng: np.random.Generator, parallel_coherence: bool = False) -> np.ndarray:
    """Random axially symmetric two-qubit state.

    Diagonal from a flat Dirichlet draw; the ud/du coherence has magnitude
    uniform in ``[0, sqrt(p_ud p_du)]`` and a uniform phase.  With
    ``parallel_coherence`` the uu/dd coherence is drawn the same way,
    giving a general X state.
    """
    diag = rng.dirichlet(np.ones(4))
    rho = np.diag(diag).astype(complex)
    bound = math.sqrt(diag[1] * diag[2])
    z = rng.uniform(0, bound) * np.exp(1j * rng.uniform(0, 2 * math.pi))
    rho[1, 2], rho[2, 1] = z, np.conj(z)
    if parallel_coherence:
        bound = math.sqrt(diag[0] * diag[3])
        z = rng.uniform(0, bound) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        rho[0, 3], rho[3, 0] = z, np.conj(z)
    return rho


def full_report(cs: CorrelatorSet, rdm: ReducedDensityMatrix) -> ConcurrenceReport:
    """Closed form from direct correlators, with the Wootters value attached.

    If the qubit block is not X shaped the closed form does not apply and
    ``C`` falls back to the oracle value (``axial=False``).
    """
    rho4, _ = project_single_occupancy(rdm)
    oracle = wootters_concurrence(rho4)
    if not is_axially_symmetric(rho4):
        closed = concurrence_closed_form(cs)
        return ConcurrenceReport(oracle, closed.C_ud, closed.C_par, closed.P_ud, closed.P_par, oracle, axial=False)
    closed = concurrence_closed_form(cs)
    return ConcurrenceReport(closed.C, closed.C_ud, closed.C_par, closed.P_ud, closed.P_par, oracle)
