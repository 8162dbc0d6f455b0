"""One-point evaluation: spec -> ensemble -> correlators -> concurrence."""
from __future__ import annotations

from dataclasses import dataclass

from .entanglement import ConcurrenceReport, full_report
from .model import ModelSpec
from .observables import CorrelatorSet, ReducedDensityMatrix, correlators, reduced_density_matrix
from .solver import DENSE_CAP, MAX_SITES, THERMAL_MAX_SITES, ThermalEnsemble, solve_ensemble


@dataclass
class PointResult:
    spec: ModelSpec
    ensemble: ThermalEnsemble
    correlators: CorrelatorSet
    rdm: ReducedDensityMatrix
    report: ConcurrenceReport

    @property
    def C(self) -> float:
        return self.report.C


def evaluate(
    spec: ModelSpec,
    dense_cap: int = DENSE_CAP,
    max_sites: int = MAX_SITES,
    thermal_max_sites: int = THERMAL_MAX_SITES,
) -> PointResult:
    ens = solve_ensemble(spec, dense_cap=dense_cap, max_sites=max_sites, thermal_max_sites=thermal_max_sites)
    cs = correlators(ens, spec.site_a, spec.site_b)
    rdm = reduced_density_matrix(ens, spec.site_a, spec.site_b)
    return PointResult(spec, ens, cs, rdm, full_report(cs, rdm))


def concurrence(spec: ModelSpec, **kw) -> float:
    return evaluate(spec, **kw).C
