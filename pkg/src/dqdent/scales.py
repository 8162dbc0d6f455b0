"""Kondo and RKKY energy scales, and a numeric critical-coupling finder."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from .model import ModelSpec, Topology, effective_exchange, hybridization_width


@dataclass(frozen=True)
class ScaleConstants:
    """Order-unity constants of the two-stage Kondo scale and the RKKY estimate.

    ``d2`` is negative by default so the second-stage scale falls with ``J``.
    """

    d1: float = 1.0
    d2: float = -1.0
    c: float = 1.0

    def __post_init__(self):
        if self.d1 <= 0 or self.c <= 0:
            raise ValueError("d1 and c must be positive")


def haldane_tk(U: float, Gamma: float) -> float:
    if U <= 0 or Gamma <= 0:
        raise ValueError("haldane_tk needs U > 0 and Gamma > 0")
    return math.sqrt(U * Gamma / 2) * math.exp(-math.pi * U / (8 * Gamma))


def two_stage_tk2(J: float, Tk1: float, k: ScaleConstants = ScaleConstants()) -> float:
    if Tk1 <= 0:
        raise ValueError("Tk1 must be positive")
    if J < 0:
        raise ValueError("J must be non-negative")
    return k.d1 * Tk1 * math.exp(k.d2 * J / Tk1)


def rkky_estimate(Gamma: float, U: float, k: ScaleConstants = ScaleConstants()) -> float:
    """Magnitude of the (ferromagnetic) RKKY coupling, ``c (64/pi^2) Gamma^2/U``."""
    if U <= 0:
        raise ValueError("rkky_estimate needs U > 0")
    return k.c * 64 / math.pi**2 * Gamma**2 / U


SERIES_RATIO = 2.5


@dataclass(frozen=True)
class CriticalEstimate:
    topology: Topology
    J_c: Optional[float]
    basis: str
    U: float
    Gamma: float
    T: float = 0.0
    B: float = 0.0
    t_c: Optional[float] = None
    crossed: bool = True
    samples: Tuple[Tuple[float, float], ...] = field(default=(), repr=False)


def critical_j_analytic(topology: Topology, U: float, Gamma: float, k: ScaleConstants = ScaleConstants()) -> CriticalEstimate:
    """Series: ``2.5 T_K``; side-coupled: ``T_K`` of dot A; parallel: ``|J_RKKY|``.

    ``Gamma`` is the width of the given topology (already doubled for the
    side-coupled and parallel cases).
    """
    if topology is Topology.SERIES:
        jc = SERIES_RATIO * haldane_tk(U, Gamma)
    elif topology is Topology.SIDE_COUPLED:
        jc = haldane_tk(U, Gamma)
    elif topology is Topology.PARALLEL:
        jc = rkky_estimate(Gamma, U, k)
    else:
        raise ValueError("no analytic estimate for custom couplings")
    return CriticalEstimate(topology, jc, "analytic", U, Gamma)


class CrossingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Crossing:
    x: Optional[float]
    lo: float
    hi: float
    crossed: bool
    samples: Tuple[Tuple[float, float], ...]


def bisect_threshold(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    threshold: float = 1e-6,
    rtol: float = 1e-3,
    atol: float = 0.0,
    max_iter: int = 200,
    scan: int = 0,
) -> Crossing:
    """Locate where ``f(x) > threshold`` switches on or off within ``[lo, hi]``.

    With ``scan > 0`` the bracket is first sampled at ``scan`` evenly spaced
    interior points; more than one switch along that scan raises
    :class:`CrossingError`, and bisection then starts from the switching
    pair.  Stops once ``hi - lo <= max(rtol*|hi|, atol)``; the midpoint is
    reported.
    """
    samples: List[Tuple[float, float]] = []

    def probe(x):
        y = f(x)
        samples.append((x, y))
        return y > threshold

    xs = [lo] + [lo + (hi - lo) * (k + 1) / (scan + 1) for k in range(scan)] + [hi]
    flags = [probe(x) for x in xs]
    switches = [k for k in range(len(xs) - 1) if flags[k] != flags[k + 1]]
    if len(switches) > 1:
        raise CrossingError(f"non-monotone switching across samples {sorted(samples)}")
    if not switches:
        return Crossing(None, lo, hi, False, tuple(samples))
    k = switches[0]
    lo, hi, above_lo = xs[k], xs[k + 1], flags[k]
    for _ in range(max_iter):
        if hi - lo <= max(rtol * abs(hi), atol):
            break
        mid = 0.5 * (lo + hi)
        if probe(mid) == above_lo:
            lo = mid
        else:
            hi = mid
    return Crossing(0.5 * (lo + hi), lo, hi, True, tuple(sorted(samples)))


def find_crossing(
    spec: ModelSpec,
    axis: str,
    bracket: Tuple[float, float],
    threshold: float = 1e-6,
    rtol: float = 1e-3,
    atol: float = 0.0,
    observable: Callable = None,
    scan: int = 0,
    **solve_kw,
) -> Crossing:
    """Bisect any scalar ``spec`` field for the concurrence switch.

    ``observable`` maps a :class:`~dqdent.pipeline.PointResult` to the
    quantity compared against ``threshold`` (concurrence by default).
    """
    from .pipeline import evaluate

    obs = observable or (lambda r: r.C)
    return bisect_threshold(
        lambda x: obs(evaluate(spec.with_(**{axis: x}), **solve_kw)),
        bracket[0],
        bracket[1],
        threshold=threshold,
        rtol=rtol,
        atol=atol,
        scan=scan,
    )


def find_jc_numeric(
    spec: ModelSpec,
    T: float,
    B: float,
    t_bracket: Tuple[float, float],
    threshold: float = 1e-6,
    rtol: float = 1e-3,
    scan: int = 0,
    **solve_kw,
) -> CriticalEstimate:
    """Bisect the interdot hopping for the onset of concurrence.

    Reports ``t*`` and ``J* = 4 t*^2 / U`` (or the exact dimer splitting
    when ``U = 0``).  A bracket without a switch gives ``crossed=False``.
    """
    base = spec.with_(T=T, B=B)
    cr = find_crossing(base, "t", t_bracket, threshold=threshold, rtol=rtol, scan=scan, **solve_kw)
    gamma = hybridization_width(base) if base.lead_len > 0 else 0.0
    if isinstance(gamma, tuple):
        gamma = max(gamma)
    if not cr.crossed:
        return CriticalEstimate(base.topology, None, "numeric-bisection", base.U, gamma, T, B, None, False, cr.samples)
    ex = effective_exchange(base.with_(t=cr.x))
    J = ex.J if ex.J is not None else ex.delta_st
    return CriticalEstimate(base.topology, J, "numeric-bisection", base.U, gamma, T, B, cr.x, True, cr.samples)
