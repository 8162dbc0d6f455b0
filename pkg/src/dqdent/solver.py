"""Sector diagonalisation and grand-canonical ensembles at zero chemical potential."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .fock import SectorBasis, all_sectors, sector_labels
from .model import ModelSpec, SectorMatrix, build_hamiltonian

log = logging.getLogger(__name__)

DENSE_CAP = 20000
THERMAL_MAX_SITES = 9
MAX_SITES = 12
# above this size the zero-temperature path switches to Lanczos
ITERATIVE_ABOVE = 1500
WEIGHT_FLOOR = 1e-16


class SolverError(RuntimeError):
    pass


class DenseCapExceeded(SolverError):
    pass


class ConvergenceError(SolverError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


class CoverageError(SolverError):
    pass


@dataclass(frozen=True)
class Spectrum:
    label: Tuple[int, int]
    energies: np.ndarray
    vectors: np.ndarray = field(repr=False)
    basis: Optional[SectorBasis] = field(default=None, repr=False)


def degeneracy_tol(E0: float) -> float:
    return 1e-10 * max(1.0, abs(E0))


def diagonalize_dense(M: SectorMatrix, cap: int = DENSE_CAP, basis: Optional[SectorBasis] = None) -> Spectrum:
    if M.dim > cap:
        raise DenseCapExceeded(
            f"sector {M.label} has dimension {M.dim} > dense cap {cap}; "
            "use the iterative path or raise the cap"
        )
    if M.dim == 0:
        return Spectrum(M.label, np.zeros(0), np.zeros((0, 0)), basis)
    w, v = np.linalg.eigh(M.toarray())
    return Spectrum(M.label, w, v, basis)


def _lanczos_cycle(H, v0, m, deflate, scale):
    """One Lanczos pass with full reorthogonalisation; returns (theta, ritz)."""
    n = v0.shape[0]
    m = min(m, n)
    V = np.zeros((n, m))
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[:, 0] = v0
    k = m
    for j in range(m):
        w = H @ V[:, j]
        alpha[j] = V[:, j] @ w
        w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
        if deflate is not None:
            w -= deflate @ (deflate.T @ w)
        # second pass keeps orthogonality at machine precision
        w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
        if deflate is not None:
            w -= deflate @ (deflate.T @ w)
        b = np.linalg.norm(w)
        if j + 1 == m:
            break
        if b <= 1e-13 * scale:
            k = j + 1
            break
        beta[j] = b
        V[:, j + 1] = w / b
    Tm = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
    theta, s = np.linalg.eigh(Tm)
    ritz = V[:, :k] @ s[:, 0]
    return theta[0], ritz / np.linalg.norm(ritz)


def ground_state_iterative(
    M,
    tol: float = 1e-10,
    krylov_dim: int = 200,
    max_restarts: int = 50,
    deflate: Optional[np.ndarray] = None,
    seed: int = 0,
) -> Tuple[float, np.ndarray]:
    """Lowest eigenpair by explicitly restarted Lanczos.

    ``deflate`` holds orthonormal columns to project out, which lets callers
    walk up a degenerate multiplet.  Raises :class:`ConvergenceError` with
    the best residual if ``||Hv - Ev|| <= tol`` is never reached.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    H = M.tocsr() if isinstance(M, SectorMatrix) else sp.csr_matrix(M)
    n = H.shape[0]
    if n == 0:
        raise ValueError("empty sector")
    if n == 1 and deflate is None:
        return float(H[0, 0]), np.ones(1)
    scale = max(1.0, abs(H).sum(axis=1).max())
    # keep the stored Krylov block under ~256 MB
    krylov_dim = max(20, min(krylov_dim, (1 << 28) // (8 * n)))
    v = np.random.default_rng(seed).standard_normal(n)
    if deflate is not None:
        v -= deflate @ (deflate.T @ v)
    v /= np.linalg.norm(v)
    best = math.inf
    for _ in range(max_restarts):
        E, v = _lanczos_cycle(H, v, krylov_dim, deflate, scale)
        if deflate is not None:
            v -= deflate @ (deflate.T @ v)
            v /= np.linalg.norm(v)
        E = float(v @ (H @ v))
        res = float(np.linalg.norm(H @ v - E * v))
        best = min(best, res)
        if res <= tol:
            return E, v
    raise ConvergenceError(f"Lanczos did not converge, best residual {best:.3e}", best)


def lowest_multiplet(M: SectorMatrix, tol: float = 1e-10, **kw) -> Spectrum:
    """Ground multiplet of one sector via deflated Lanczos."""
    energies: List[float] = []
    vecs: List[np.ndarray] = []
    while len(vecs) < M.dim:
        defl = np.column_stack(vecs) if vecs else None
        E, v = ground_state_iterative(M, tol=tol, deflate=defl, **kw)
        if energies and E > energies[0] + max(degeneracy_tol(energies[0]), 10 * tol):
            break
        energies.append(E)
        vecs.append(v)
    return Spectrum(M.label, np.array(energies), np.column_stack(vecs))


@dataclass
class EnsembleComponent:
    basis: SectorBasis
    energies: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray


@dataclass
class ThermalEnsemble:
    """Boltzmann mixture of sector eigenstates, ``sum(weights) == 1``."""

    T: float
    L: int
    components: List[EnsembleComponent]
    E0: float
    # ln sum exp(-(E - E0)/T); ln(degeneracy) at T = 0
    log_z_rel: float

    @property
    def log_partition(self) -> float:
        if self.T == 0:
            return math.nan
        return self.log_z_rel - self.E0 / self.T

    def entries(self) -> Iterable[Tuple[Tuple[int, int], int, float]]:
        for comp in self.components:
            for k, w in enumerate(comp.weights):
                yield comp.basis.label, k, float(w)

    def total_weight(self) -> float:
        return float(sum(c.weights.sum() for c in self.components))


def _check_coverage(L: int, spectra: Sequence[Spectrum]) -> None:
    need = set(sector_labels(L))
    have = {s.label for s in spectra}
    if need - have:
        raise CoverageError(f"missing sectors {sorted(need - have)}")


def thermal_ensemble(spectra: Sequence[Spectrum], T: float, L: Optional[int] = None) -> ThermalEnsemble:
    """Grand-canonical Gibbs state over all sectors.

    Every ``(N, S_z)`` sector must be present.  At ``T > 0`` the spectra
    must be complete; at ``T = 0`` a sector may carry only its ground
    multiplet, and the global ground multiplet is averaged uniformly.
    """
    if T < 0:
        raise ValueError("temperature must be non-negative")
    if L is None:
        L = spectra[0].basis.L
        _check_coverage(L, spectra)
    E0 = min(float(s.energies[0]) for s in spectra if s.energies.size)
    if T == 0:
        tol = degeneracy_tol(E0)
        raw = [(s, (s.energies <= E0 + tol).astype(float)) for s in spectra]
    else:
        raw = [(s, np.exp(-(s.energies - E0) / T)) for s in spectra]
    Z = sum(float(w.sum()) for _, w in raw)
    comps = []
    for s, w in raw:
        w = w / Z
        keep = w >= WEIGHT_FLOOR
        if keep.any():
            comps.append(EnsembleComponent(s.basis, s.energies[keep], s.vectors[:, keep], w[keep]))
    norm = sum(c.weights.sum() for c in comps)
    for c in comps:
        c.weights = c.weights / norm
    return ThermalEnsemble(T, L, comps, E0, math.log(Z))


def sector_spectra(spec: ModelSpec, dense_cap: int = DENSE_CAP) -> List[Spectrum]:
    out = []
    for basis in all_sectors(spec.n_sites):
        M = build_hamiltonian(spec, basis)
        out.append(diagonalize_dense(M, cap=dense_cap, basis=basis))
    return out


def ground_spectra(
    spec: ModelSpec, dense_cap: int = DENSE_CAP, iterative_above: int = ITERATIVE_ABOVE
) -> List[Spectrum]:
    """Per-sector ground multiplets (small sectors keep their full spectrum)."""
    out = []
    for basis in all_sectors(spec.n_sites):
        M = build_hamiltonian(spec, basis)
        if M.dim <= min(dense_cap, iterative_above):
            out.append(diagonalize_dense(M, cap=dense_cap, basis=basis))
        else:
            s = lowest_multiplet(M)
            out.append(Spectrum(s.label, s.energies, s.vectors, basis))
    return out


def solve_ensemble(
    spec: ModelSpec,
    dense_cap: int = DENSE_CAP,
    max_sites: int = MAX_SITES,
    thermal_max_sites: int = THERMAL_MAX_SITES,
) -> ThermalEnsemble:
    """Thermal state of ``spec`` at its own temperature."""
    L = spec.n_sites
    if L > max_sites:
        raise SolverError(f"{L} sites exceeds the site limit {max_sites}")
    if spec.T > 0:
        if L > thermal_max_sites:
            raise SolverError(f"finite temperature needs full spectra; {L} sites > {thermal_max_sites}")
        return thermal_ensemble(sector_spectra(spec, dense_cap), spec.T)
    return thermal_ensemble(ground_spectra(spec, dense_cap), 0.0)
