"""Command line: solve, sweep, phase, scales and oracle-check.

Configuration is an INI-style ``key = value`` file with ``[model]``,
``[sweep]``, ``[phase]``, ``[scales]``, ``[constants]`` and ``[oracle]``
sections.  Any key may be overridden with ``--key value`` (or
``--section.key value``); flags win over the file.
"""
from __future__ import annotations

import argparse
import configparser
import io
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .entanglement import (
    UndefinedConcurrence,
    concurrence_closed_form,
    correlators_from_rho4,
    random_axial_density_matrix,
    wootters_concurrence,
)
from .model import ModelSpec, Topology, effective_exchange, hybridization_width, t_for_exchange
from .pipeline import evaluate
from .scales import (
    CrossingError,
    ScaleConstants,
    critical_j_analytic,
    find_crossing,
    find_jc_numeric,
    haldane_tk,
    rkky_estimate,
    two_stage_tk2,
)
from .solver import DENSE_CAP, MAX_SITES, SolverError

log = logging.getLogger("dqdent")

FORMAT_LINE = "# format=1"
EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
# serialised values below this magnitude are round-off, written as zero
NOISE_FLOOR = 1e-14
# interior points sampled before bisecting, to expose brackets with several switches
PHASE_SCAN = 4

SCHEMA = {
    "model": {
        "topology": str, "t": float, "U": float, "t_prime": float, "t0": float,
        "lead_len": int, "B": float, "T": float, "eps_d": float,
        "t1": float, "t2": float, "t3": float, "t4": float,
    },
    "sweep": {"axis": str, "min": float, "max": float, "count": int, "spacing": str},
    "phase": {"u_over_gamma": str, "j_min": float, "j_max": float, "threshold": float},
    "scales": {"Gamma": float, "J": float},
    "constants": {"d1": float, "d2": float, "c": float},
    "oracle": {"count": int},
}
SWEEP_AXES = ("t", "t_prime", "U", "T", "B")

ROW_COLUMNS = (
    "t", "t_prime", "U", "T", "B", "J", "Gamma", "J_over_Gamma",
    "C", "C_oracle", "C_ud", "C_par", "P_ud", "P_par",
    "spin_dot", "dn2_A", "n_A", "n_B", "E0", "log_z_rel", "status",
)
PHASE_COLUMNS = (
    "U_over_Gamma", "U", "Gamma", "T_K", "Jc_numeric", "Jc_numeric_over_TK", "t_c",
    "Jc_analytic", "Jc_analytic_over_TK", "J_spin_quarter",
    "dn2_A_at_Jmin", "dn2_A_at_Jc", "dn2_A_at_Jmax", "status",
)


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    x = float(x)
    if abs(x) < NOISE_FLOOR:
        x = 0.0
    return f"{x:#.12g}"


def write_csv(stream, columns: Sequence[str], rows: Sequence[Dict]) -> None:
    stream.write(FORMAT_LINE + "\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt(row.get(c)) for c in columns) + "\n")


# --- configuration ------------------------------------------------------------

def _convert(section: str, key: str, raw: str):
    try:
        return SCHEMA[section][key](raw.strip())
    except ValueError:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from None


COMMAND_SECTION = {"sweep": "sweep", "phase": "phase", "scales": "scales", "oracle-check": "oracle"}


def _locate(key: str, prefer: Optional[str] = None) -> str:
    if "." in key:
        section, name = key.split(".", 1)
        if section in SCHEMA and name in SCHEMA[section]:
            return key
        raise ConfigError(f"unknown key {key!r}")
    owners = [s for s, keys in SCHEMA.items() if key in keys]
    if prefer in owners:
        return f"{prefer}.{key}"
    if not owners:
        raise ConfigError(f"unknown key {key!r}")
    return f"{owners[0]}.{key}"


def load_config(
    path: Optional[str], overrides: Sequence[str], command: Optional[str] = None
) -> Dict[str, Dict[str, object]]:
    """Merge the config file with ``--key value`` overrides.

    A bare key shared by several sections (``count``) resolves to the
    section of ``command`` first.
    """
    cfg: Dict[str, Dict[str, object]] = {s: {} for s in SCHEMA}
    if path:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                cfg[section][key] = _convert(section, key, raw)
    tokens = list(overrides)
    while tokens:
        tok = tokens.pop(0)
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        name, _, value = tok[2:].partition("=")
        if not value:
            if not tokens:
                raise ConfigError(f"missing value for --{name}")
            value = tokens.pop(0)
        section, key = _locate(name, COMMAND_SECTION.get(command)).split(".", 1)
        cfg[section][key] = _convert(section, key, value)
    return cfg


def spec_from_config(cfg) -> ModelSpec:
    m = dict(cfg["model"])
    kwargs = {}
    if "topology" in m:
        try:
            kwargs["topology"] = Topology.parse(m.pop("topology"))
        except ValueError as exc:
            raise ConfigError(f"topology: {exc}") from None
    couplings = [m.pop(k) for k in ("t1", "t2", "t3", "t4") if k in m]
    if kwargs.get("topology") is Topology.CUSTOM:
        if len(couplings) != 4:
            raise ConfigError("topology: custom needs t1, t2, t3 and t4")
        kwargs["couplings"] = tuple(couplings)
    kwargs.update(m)
    try:
        return ModelSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def constants_from_config(cfg) -> ScaleConstants:
    try:
        return ScaleConstants(**cfg["constants"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# --- single points ------------------------------------------------------------

@dataclass(frozen=True)
class SolveOptions:
    dense_cap: int = DENSE_CAP
    max_sites: int = MAX_SITES


def _gamma(spec: ModelSpec) -> float:
    g = hybridization_width(spec)
    return g[0] if isinstance(g, tuple) else g


def echo_inputs(spec: ModelSpec) -> Dict:
    J = effective_exchange(spec).J
    gamma = _gamma(spec)
    return {
        "t": spec.t, "t_prime": spec.t_prime, "U": spec.U, "T": spec.T, "B": spec.B,
        "J": J, "Gamma": gamma,
        "J_over_Gamma": J / gamma if (J is not None and gamma > 0) else None,
    }


def result_row(spec: ModelSpec, opts: SolveOptions = SolveOptions()) -> Dict:
    """One output row; failures become a row with ``status = error:<code>``."""
    row = echo_inputs(spec)
    try:
        with threadpool_limits(limits=1):
            res = evaluate(spec, dense_cap=opts.dense_cap, max_sites=opts.max_sites)
    except UndefinedConcurrence:
        row["status"] = "error:undefined"
        return row
    except (SolverError, np.linalg.LinAlgError):
        row["status"] = "error:solver"
        return row
    cs, rep, ens = res.correlators, res.report, res.ensemble
    row.update(
        C=rep.C, C_oracle=rep.C_oracle, C_ud=rep.C_ud, C_par=rep.C_par, P_ud=rep.P_ud,
        P_par=rep.P_par, spin_dot=cs.spin_dot, dn2_A=cs.dn2_A, n_A=cs.n_A, n_B=cs.n_B,
        E0=ens.E0, log_z_rel=ens.log_z_rel, status="ok",
    )
    return row


def _run_point(args):
    spec, opts = args
    return result_row(spec, opts)


def run_grid(specs: List[ModelSpec], opts: SolveOptions, workers: int) -> List[Dict]:
    """Evaluate points in grid order regardless of worker count."""
    jobs = [(s, opts) for s in specs]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point, jobs))


def grid_values(lo: float, hi: float, count: int, spacing: str) -> np.ndarray:
    if count < 2:
        raise ConfigError("sweep.count must be at least 2")
    if spacing == "linear":
        return np.linspace(lo, hi, count)
    if spacing == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError("log spacing requires positive sweep.min and sweep.max")
        return np.geomspace(lo, hi, count)
    raise ConfigError(f"sweep.spacing must be linear or log, got {spacing!r}")


# --- subcommands --------------------------------------------------------------

def cmd_solve(cfg, opts: SolveOptions, out) -> int:
    spec = spec_from_config(cfg)
    row = result_row(spec, opts)
    write_csv(out, ROW_COLUMNS, [row])
    if row["status"] != "ok":
        print(f"solve failed: {row['status']}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def sweep_specs(cfg) -> List[ModelSpec]:
    spec = spec_from_config(cfg)
    sw = cfg["sweep"]
    axis = sw.get("axis", "t")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis must be one of {', '.join(SWEEP_AXES)}, got {axis!r}")
    if "min" not in sw or "max" not in sw:
        raise ConfigError("sweep needs sweep.min and sweep.max")
    values = grid_values(sw["min"], sw["max"], sw.get("count", 11), sw.get("spacing", "linear"))
    try:
        return [spec.with_(**{axis: float(v)}) for v in values]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_sweep(cfg, opts: SolveOptions, out, workers: int) -> int:
    rows = run_grid(sweep_specs(cfg), opts, workers)
    write_csv(out, ROW_COLUMNS, rows)
    return EXIT_OK


def _parse_ratios(raw: str) -> List[float]:
    try:
        vals = [float(x) for x in raw.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"phase.u_over_gamma must be a comma list, got {raw!r}") from None
    if not vals or min(vals) <= 0:
        raise ConfigError("phase.u_over_gamma needs positive values")
    return vals


def phase_column(args) -> Dict:
    """Boundary data for one U/Gamma value."""
    spec, ratio, j_min, j_max, threshold, k, opts = args
    gamma = _gamma(spec)
    U = ratio * gamma
    base = spec.with_(U=U)
    row = {"U_over_Gamma": ratio, "U": U, "Gamma": gamma}
    kw = dict(dense_cap=opts.dense_cap, max_sites=opts.max_sites)
    flags = []
    with threadpool_limits(limits=1):
        tk = haldane_tk(U, gamma)
        row["T_K"] = tk
        if spec.topology is not Topology.CUSTOM:
            jc_a = critical_j_analytic(spec.topology, U, gamma, k).J_c
            row.update(Jc_analytic=jc_a, Jc_analytic_over_TK=jc_a / tk)
        bracket = (t_for_exchange(j_min, U), t_for_exchange(j_max, U))
        try:
            est = find_jc_numeric(base, base.T, base.B, bracket, threshold=threshold, scan=PHASE_SCAN, **kw)
        except CrossingError:
            est = None
            flags.append("non-monotone:C")
        if est is not None and est.crossed:
            row.update(Jc_numeric=est.J_c, Jc_numeric_over_TK=est.J_c / tk, t_c=est.t_c)
            row["dn2_A_at_Jc"] = evaluate(base.with_(t=est.t_c), **kw).correlators.dn2_A
        elif est is not None:
            flags.append("no-crossing:C")
        try:
            cr = find_crossing(base, "t", bracket, threshold=0.25, observable=lambda r: -r.correlators.spin_dot, scan=PHASE_SCAN, **kw)
            if cr.crossed:
                row["J_spin_quarter"] = 4 * cr.x**2 / U
            else:
                flags.append("no-crossing:spin")
        except CrossingError:
            flags.append("non-monotone:spin")
        row["dn2_A_at_Jmin"] = evaluate(base.with_(t=bracket[0]), **kw).correlators.dn2_A
        row["dn2_A_at_Jmax"] = evaluate(base.with_(t=bracket[1]), **kw).correlators.dn2_A
    row["status"] = ";".join(flags) if flags else "ok"
    return row


def cmd_phase(cfg, opts: SolveOptions, out, workers: int) -> int:
    spec = spec_from_config(cfg)
    ph = cfg["phase"]
    ratios = _parse_ratios(ph.get("u_over_gamma", "4,8,12,16"))
    j_min, j_max = ph.get("j_min", 1e-4), ph.get("j_max", 0.2)
    if not 0 < j_min < j_max:
        raise ConfigError("phase needs 0 < j_min < j_max")
    if spec.lead_len == 0 or _gamma(spec) <= 0:
        raise ConfigError("phase scan needs attached leads (lead_len > 0, t_prime > 0)")
    k = constants_from_config(cfg)
    jobs = [(spec, r, j_min, j_max, ph.get("threshold", 1e-6), k, opts) for r in ratios]
    if workers <= 1 or len(jobs) <= 1:
        rows = [phase_column(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(phase_column, jobs))
    write_csv(out, PHASE_COLUMNS, rows)
    return EXIT_OK


def cmd_scales(cfg, out) -> int:
    U = cfg["model"].get("U", 1.0)
    sc = cfg["scales"]
    gamma = sc.get("Gamma", 0.0625)
    J = sc.get("J", 0.0)
    k = constants_from_config(cfg)
    try:
        tk = haldane_tk(U, gamma)
        rows = [
            ("U", U), ("Gamma", gamma), ("J", J), ("d1", k.d1), ("d2", k.d2), ("c", k.c),
            ("T_K", tk),
            ("J_1c", critical_j_analytic(Topology.SERIES, U, gamma, k).J_c),
            ("J_2c", critical_j_analytic(Topology.SIDE_COUPLED, U, gamma, k).J_c),
            ("T_K2", two_stage_tk2(J, tk, k)),
            ("J_RKKY_abs", rkky_estimate(gamma, U, k)),
        ]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out.write(FORMAT_LINE + "\n")
    out.write("quantity,value\n")
    for name, val in rows:
        out.write(f"{name},{fmt(val)}\n")
    return EXIT_OK


def oracle_check(seed: int, count: int, inject_error: float = 0.0):
    """Closed form vs Wootters on seeded random axial states.

    Returns ``(max_deviation, worst_matrix)``.
    """
    rng = np.random.default_rng(seed)
    worst, worst_rho = -1.0, None
    for _ in range(count):
        rho = random_axial_density_matrix(rng)
        closed = concurrence_closed_form(correlators_from_rho4(rho)).C + inject_error
        dev = abs(closed - wootters_concurrence(rho))
        if dev > worst:
            worst, worst_rho = dev, rho
    return worst, worst_rho


def cmd_oracle_check(cfg, seed: int, out, inject_error: float = 0.0) -> int:
    count = cfg["oracle"].get("count", 1000)
    if count < 1:
        raise ConfigError("oracle count must be at least 1")
    worst, rho = oracle_check(seed, count, inject_error)
    ok = worst <= 1e-10
    out.write(f"oracle-check seed={seed} count={count} max_deviation={worst:.3e} {'PASS' if ok else 'FAIL'}\n")
    if not ok:
        with np.printoptions(precision=17, linewidth=200):
            print(f"worst matrix (deviation {worst:.3e}):\n{rho}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dqdent", description="Double-quantum-dot spin entanglement toolkit", allow_abbrev=False
    )
    p.add_argument("command", choices=["solve", "sweep", "phase", "scales", "oracle-check"])
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--dense-cap", type=int, default=DENSE_CAP)
    p.add_argument("--max-sites", type=int, default=MAX_SITES)
    p.add_argument("--inject-error", type=float, default=0.0, help=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    buf = io.StringIO()
    try:
        cfg = load_config(args.config, extra, args.command)
        opts = SolveOptions(dense_cap=args.dense_cap, max_sites=args.max_sites)
        if args.command == "solve":
            code = cmd_solve(cfg, opts, buf)
        elif args.command == "sweep":
            code = cmd_sweep(cfg, opts, buf, args.workers)
        elif args.command == "phase":
            code = cmd_phase(cfg, opts, buf, args.workers)
        elif args.command == "scales":
            code = cmd_scales(cfg, buf)
        else:
            code = cmd_oracle_check(cfg, args.seed, buf, args.inject_error)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
