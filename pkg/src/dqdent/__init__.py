"""Spin-qubit entanglement of a double quantum dot coupled to leads."""
from .entanglement import (
    ConcurrenceReport,
    UndefinedConcurrence,
    concurrence_closed_form,
    project_single_occupancy,
    pure_state_concurrence,
    wootters_concurrence,
)
from .fock import SectorBasis, enumerate_sector
from .model import ModelSpec, Topology, build_hamiltonian, effective_exchange, hybridization_width
from .observables import CorrelatorSet, correlators, expectation, reduced_density_matrix
from .pipeline import PointResult, evaluate
from .scales import (
    ScaleConstants,
    critical_j_analytic,
    find_jc_numeric,
    haldane_tk,
    rkky_estimate,
    two_stage_tk2,
)
from .solver import ThermalEnsemble, diagonalize_dense, ground_state_iterative, thermal_ensemble

__version__ = "0.1.0"
