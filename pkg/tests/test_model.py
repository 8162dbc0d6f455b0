import math

import numpy as np
import pytest

from dqdent.fock import all_sectors, enumerate_sector, sector_labels
from dqdent.model import (
    ModelSpec,
    Topology,
    build_hamiltonian,
    effective_exchange,
    hybridization_width,
    lead_couplings,
)
from dqdent.solver import sector_spectra, solve_ensemble

from oracles import brute_force_hamiltonian, free_chain_ground_energy, full_space_labels, project_to_sector

TOPOLOGIES = [Topology.SERIES, Topology.SIDE_COUPLED, Topology.PARALLEL]


def test_topology_couplings():
    tp = 0.3
    assert lead_couplings(ModelSpec(Topology.SERIES, t_prime=tp)) == (tp, 0, 0, tp)
    assert lead_couplings(ModelSpec(Topology.SIDE_COUPLED, t_prime=tp)) == (tp, tp, 0, 0)
    assert lead_couplings(ModelSpec(Topology.PARALLEL, t_prime=tp)) == (tp,) * 4


def test_parse_topology():
    assert Topology.parse("Side-Coupled") is Topology.SIDE_COUPLED
    with pytest.raises(ValueError):
        Topology.parse("ring")


def test_isolated_dimer_single_particle_levels():
    spec = ModelSpec(t=1.0, U=0.0, lead_len=0, eps_d=-0.3)
    M = build_hamiltonian(spec, enumerate_sector(2, 1, 0.5))
    assert np.allclose(np.linalg.eigvalsh(M.toarray()), [-1.3, 0.7])


@pytest.mark.parametrize("topology", TOPOLOGIES)
@pytest.mark.parametrize("B", [0.0, 0.07])
def test_sector_blocks_match_brute_force(topology, B):
    spec = ModelSpec(topology, t=0.1, U=1.0, t_prime=0.2, t0=1.0, lead_len=1, B=B)
    H_full = brute_force_hamiltonian(spec)
    for basis in all_sectors(spec.n_sites):
        ours = build_hamiltonian(spec, basis).toarray()
        assert np.allclose(ours, project_to_sector(H_full, basis), atol=1e-14)


def test_series_ground_energy_vs_brute_force():
    spec = ModelSpec(Topology.SERIES, t=0.1, U=1.0, t_prime=0.2, t0=1.0, lead_len=1)
    basis = enumerate_sector(spec.n_sites, spec.n_sites, 0)
    ours = np.linalg.eigvalsh(build_hamiltonian(spec, basis).toarray())[0]
    ref = np.linalg.eigvalsh(project_to_sector(brute_force_hamiltonian(spec), basis))[0]
    assert ours == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("topology", TOPOLOGIES)
def test_hamiltonian_conserves_n_and_sz(topology):
    spec = ModelSpec(topology, t=0.3, U=2.0, t_prime=0.4, lead_len=1, B=0.2)
    H = brute_force_hamiltonian(spec)
    labels = full_space_labels(spec.n_sites)
    rows, cols = np.nonzero(np.abs(H) > 0)
    assert all(labels[r] == labels[c] for r, c in zip(rows, cols))


@pytest.mark.parametrize("topology", TOPOLOGIES)
def test_hermitian_and_real(topology):
    spec = ModelSpec(topology, t=0.2, U=1.0, lead_len=2, B=0.05)
    for basis in all_sectors(spec.n_sites):
        M = build_hamiltonian(spec, basis)
        A = M.toarray()
        assert A.dtype.kind == "f"
        assert np.array_equal(A, A.T)
        assert M.rows.max(initial=-1) < basis.dim and M.cols.min(initial=0) >= 0


def test_decoupled_leads_energy_adds():
    spec = ModelSpec(Topology.SERIES, t=0.2, U=1.0, t_prime=0.0, lead_len=2)
    E = solve_ensemble(spec).E0
    E_dots = solve_ensemble(spec.with_(lead_len=0)).E0
    E_leads = 2 * free_chain_ground_energy(2, spec.t0)
    assert E == pytest.approx(E_dots + E_leads, abs=1e-12)


def _sector_spectra_map(spec):
    return {s.label: s.energies for s in sector_spectra(spec)}


@pytest.mark.parametrize(
    "spec",
    [
        ModelSpec(Topology.SERIES, t=0.15, U=1.0, lead_len=1),
        ModelSpec(Topology.SIDE_COUPLED, t=0.15, U=1.0, lead_len=2),
        ModelSpec(Topology.PARALLEL, t=0.0, U=1.0, lead_len=1),
    ],
)
def test_particle_hole_symmetry(spec):
    L = spec.n_sites
    spectra = _sector_spectra_map(spec)
    for N, sz2 in sector_labels(L):
        assert np.allclose(spectra[(N, sz2)], spectra[(2 * L - N, sz2)], atol=1e-12)


def test_parallel_with_interdot_hopping_breaks_particle_hole():
    # the lead edge and the two dots form a triangle: the lattice is not bipartite
    spec = ModelSpec(Topology.PARALLEL, t=0.15, U=1.0, lead_len=1)
    L = spec.n_sites
    spectra = _sector_spectra_map(spec)
    assert not np.allclose(spectra[(1, 1)], spectra[(2 * L - 1, 1)], atol=1e-6)


@pytest.mark.parametrize("topology", TOPOLOGIES)
def test_spin_flip_symmetry(topology):
    spec = ModelSpec(topology, t=0.15, U=1.0, lead_len=1)
    spectra = _sector_spectra_map(spec)
    for (N, sz2), E in spectra.items():
        assert np.allclose(E, spectra[(N, -sz2)], atol=1e-12)


def test_hybridization_width_examples():
    tp = 1 / math.sqrt(20)
    assert hybridization_width(ModelSpec(Topology.SERIES, t_prime=tp)) == pytest.approx(0.05)
    assert hybridization_width(ModelSpec(Topology.SIDE_COUPLED, t_prime=tp)) == pytest.approx(0.1)
    assert hybridization_width(ModelSpec(Topology.PARALLEL, t_prime=tp)) == pytest.approx(0.1)
    assert hybridization_width(ModelSpec(Topology.SERIES, t_prime=0.0)) == 0.0


def test_hybridization_width_custom_is_per_dot():
    spec = ModelSpec(Topology.CUSTOM, couplings=(0.1, 0.2, 0.3, 0.0), t0=2.0)
    ga, gb = hybridization_width(spec)
    assert ga == pytest.approx((0.01 + 0.04) / 2)
    assert gb == pytest.approx(0.09 / 2)


def test_hybridization_width_needs_t0():
    with pytest.raises(ValueError):
        hybridization_width(ModelSpec(lead_len=0, t0=0.0))


def test_effective_exchange_examples():
    ex = effective_exchange(ModelSpec(t=0.1, U=1.0))
    assert ex.J == pytest.approx(0.04)
    # (sqrt(1.16) - 1)/2, cross-checked by the dimer diagonalisation test below
    assert ex.delta_st == pytest.approx(0.0385164807, abs=1e-10)
    zero = effective_exchange(ModelSpec(t=0.0, U=1.0))
    assert zero.J == 0 and zero.delta_st == 0
    assert effective_exchange(ModelSpec(t=0.1, U=0.0)).J is None


def test_splitting_matches_dimer_diagonalisation():
    spec = ModelSpec(t=0.1, U=1.0, lead_len=0)
    spectra = _sector_spectra_map(spec)
    singlet = spectra[(2, 0)][0]
    triplet = spectra[(2, 2)][0]
    assert triplet - singlet == pytest.approx(effective_exchange(spec).delta_st, abs=1e-13)


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec(U=-1)
    with pytest.raises(ValueError):
        ModelSpec(T=-0.1)
    with pytest.raises(ValueError):
        ModelSpec(Topology.CUSTOM)


def test_basis_size_mismatch():
    with pytest.raises(ValueError):
        build_hamiltonian(ModelSpec(lead_len=1), enumerate_sector(2, 2, 0))
