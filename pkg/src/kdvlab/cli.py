"""Command-line front end for the laboratory experiments.

Every command reads an optional JSON config, emits CSV/JSON artifacts into
the output directory together with a run manifest that reproduces the run,
and reports failures as machine-readable JSON on stderr: exit code 1 for
validation problems, 2 for numerical ones.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .constraints import ConstraintVector, NotInMnn, classify, relaxed_minimize, solve_betas
from .densities import MAX_ENERGY_INDEX, eval_energy
from .evolution import (
    BlowUpError,
    EvolutionSettings,
    SeamCollisionError,
    conservation_drift,
    evolve_snapshots,
    orbital_stability_experiment,
)
from .grid import GridFunction, SpatialGrid
from .scattering import bound_states, trace_residuals, transmission_reciprocal, default_k_grid
from .sequences import (
    diagnostics_to_csv,
    gas_sequence,
    phase_diagram_sample,
    phase_diagram_to_csv,
    point_mass_diagnostics,
    suggested_wvn_grid,
    wigner_von_neumann,
)
from .soliton import ConditioningError, SolitonConfig, eval_multisoliton, evolve_config

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

_VALIDATION_ERRORS = (ValueError, KeyError, json.JSONDecodeError, FileNotFoundError)
_NUMERICAL_ERRORS = (
    NotInMnn,
    BlowUpError,
    SeamCollisionError,
    ConditioningError,
    np.linalg.LinAlgError,
    RuntimeError,
)


def _emit_error(kind: str, exc: Exception):
    payload = {"error": {"type": type(exc).__name__, "kind": kind, "message": str(exc)}}
    print(json.dumps(payload), file=sys.stderr)


def _load_config(args) -> dict:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            return json.load(fh)
    return {}


def _resolve(args, config, key, default):
    """CLI flag beats config file beats default."""
    cli_val = getattr(args, key.replace("-", "_"), None)
    if cli_val is not None:
        return cli_val
    if key in config:
        return config[key]
    return default


def _grid_from(args, config) -> SpatialGrid:
    return SpatialGrid(
        float(_resolve(args, config, "grid_L", 40.0)),
        int(_resolve(args, config, "grid_M", 2048)),
    )


def _outdir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(args, out: Path, command: str, params: dict):
    manifest = dict(params)
    manifest["command"] = command
    if getattr(args, "seed", None) is not None:
        manifest["seed"] = args.seed
    with open(out / f"{command}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)


def _soliton_config(args, config) -> SolitonConfig:
    betas = _resolve(args, config, "betas", None)
    shifts = _resolve(args, config, "shifts", None)
    if betas is None:
        raise ValueError("no soliton parameters given (use --betas or a config file)")
    if shifts is None:
        shifts = [0.0] * len(betas)
    return SolitonConfig(tuple(betas), tuple(shifts))


def _input_profile(args, config) -> GridFunction:
    """Profile from --input CSV, or from soliton parameters on the grid."""
    path = _resolve(args, config, "input", None)
    if path:
        return GridFunction.from_csv(path)
    cfg = _soliton_config(args, config)
    return eval_multisoliton(cfg, _grid_from(args, config))


def cmd_soliton(args) -> int:
    config = _load_config(args)
    cfg = _soliton_config(args, config)
    t = float(_resolve(args, config, "t", 0.0))
    cfg = evolve_config(cfg, t)
    grid = _grid_from(args, config)
    out = _outdir(args)
    eval_multisoliton(cfg, grid).to_csv(out / "profile.csv")
    with open(out / "soliton_config.json", "w") as fh:
        fh.write(cfg.to_json())
    _write_manifest(args, out, "soliton",
                    {"betas": list(cfg.betas), "shifts": list(cfg.shifts), "t": 0.0,
                     "grid_L": grid.half_width, "grid_M": grid.points})
    return EXIT_OK


def cmd_energy(args) -> int:
    config = _load_config(args)
    profile = _input_profile(args, config)
    n_max = int(_resolve(args, config, "n", 3))
    if not 1 <= n_max <= MAX_ENERGY_INDEX:
        raise ValueError(f"n must be in 1..{MAX_ENERGY_INDEX}")
    out = _outdir(args)
    with open(out / "energies.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "value"])
        for m in range(1, n_max + 1):
            writer.writerow([m, f"{eval_energy(m, profile):.17g}"])
    _write_manifest(args, out, "energy",
                    {"n": n_max, "input": str(_resolve(args, config, "input", "")) or None,
                     "betas": _resolve(args, config, "betas", None),
                     "shifts": _resolve(args, config, "shifts", None),
                     "grid_L": profile.grid.half_width, "grid_M": profile.grid.points})
    return EXIT_OK


def cmd_scatter(args) -> int:
    config = _load_config(args)
    profile = _input_profile(args, config)
    kmax = float(_resolve(args, config, "kmax", 20.0))
    kpoints = int(_resolve(args, config, "kpoints", 512))
    k_grid = default_k_grid(kmax, kpoints)
    out = _outdir(args)
    sample = transmission_reciprocal(profile, k_grid)
    betas = bound_states(profile)
    sample = type(sample)(sample.k_grid, sample.a_values, betas)
    sample.to_csv(out / "scattering.csv")
    with open(out / "bound_states.json", "w") as fh:
        fh.write(sample.bound_betas_json())
    resid = trace_residuals(profile, 3, k_grid)
    with open(out / "trace_residuals.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "residual"])
        for m, r in enumerate(resid, start=1):
            writer.writerow([m, f"{r:.17g}"])
    _write_manifest(args, out, "scatter",
                    {"kmax": kmax, "kpoints": kpoints,
                     "input": str(_resolve(args, config, "input", "")) or None,
                     "betas": _resolve(args, config, "betas", None),
                     "shifts": _resolve(args, config, "shifts", None),
                     "grid_L": profile.grid.half_width, "grid_M": profile.grid.points})
    return EXIT_OK


def cmd_solve(args) -> int:
    config = _load_config(args)
    e_values = _resolve(args, config, "e", None)
    if not e_values:
        raise ValueError("constraint values required (--e)")
    e = ConstraintVector(tuple(float(v) for v in e_values))
    big_n = _resolve(args, config, "N", None)
    rng = np.random.default_rng(getattr(args, "seed", None) or 0)
    if big_n is not None and int(big_n) > e.n:
        report = relaxed_minimize(e, int(big_n), rng=rng)
    else:
        report = solve_betas(e, rng=rng)
    out = _outdir(args)
    text = report.to_json()
    print(text)
    with open(out / "minimizer.json", "w") as fh:
        fh.write(text)
    _write_manifest(args, out, "solve",
                    {"e": list(e.e), "N": int(big_n) if big_n is not None else None})
    return EXIT_OK


def cmd_phase_diagram(args) -> int:
    config = _load_config(args)
    e1_range = _resolve(args, config, "e1", [0.0, 10.0])
    e2_range = _resolve(args, config, "e2", [-30.0, 5.0])
    res = int(_resolve(args, config, "res", 128))
    e1_vals, e2_vals, labels = phase_diagram_sample(e1_range, e2_range, res)
    out = _outdir(args)
    phase_diagram_to_csv(e1_vals, e2_vals, labels, out / "phase_diagram.csv")
    _write_manifest(args, out, "phase-diagram",
                    {"e1": list(e1_range), "e2": list(e2_range), "res": res})
    return EXIT_OK


def cmd_evolve(args) -> int:
    config = _load_config(args)
    profile = _input_profile(args, config)
    settings = EvolutionSettings(
        dt=float(_resolve(args, config, "dt", 5e-4)),
        T=float(_resolve(args, config, "T", 1.0)),
    )
    snapshots = int(_resolve(args, config, "snapshots", 5))
    cfg = None
    if _resolve(args, config, "betas", None) is not None:
        cfg = _soliton_config(args, config)
    out = _outdir(args)
    times, snaps = evolve_snapshots(profile, settings, snapshots, config=cfg)
    for i, (t, snap) in enumerate(zip(times, snaps)):
        snap.to_csv(out / f"snapshot_{i:03d}.csv")
    drift = conservation_drift(profile, settings, 3)
    with open(out / "drift.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "relative_drift"])
        for m, d in enumerate(drift, start=1):
            writer.writerow([m, f"{d:.17g}"])
    _write_manifest(args, out, "evolve",
                    {"dt": settings.dt, "T": settings.T, "snapshots": snapshots,
                     "input": str(_resolve(args, config, "input", "")) or None,
                     "betas": _resolve(args, config, "betas", None),
                     "shifts": _resolve(args, config, "shifts", None),
                     "grid_L": profile.grid.half_width, "grid_M": profile.grid.points})
    return EXIT_OK


def cmd_stability(args) -> int:
    config = _load_config(args)
    betas = _resolve(args, config, "betas", None)
    if not betas:
        raise ValueError("soliton parameters required (--betas)")
    delta = float(_resolve(args, config, "delta", 1e-3))
    n = int(_resolve(args, config, "n", 1))
    settings = EvolutionSettings(
        dt=float(_resolve(args, config, "dt", 5e-4)),
        T=float(_resolve(args, config, "T", 10.0)),
    )
    grid = _grid_from(args, config)
    trace = orbital_stability_experiment(tuple(betas), delta, settings, n, grid=grid)
    out = _outdir(args)
    trace.to_csv(out / "stability.csv")
    _write_manifest(args, out, "stability",
                    {"betas": list(betas), "delta": delta, "n": n,
                     "dt": settings.dt, "T": settings.T,
                     "grid_L": grid.half_width, "grid_M": grid.points})
    return EXIT_OK


def cmd_minseq(args) -> int:
    config = _load_config(args)
    mode = _resolve(args, config, "mode", "gas")
    out = _outdir(args)
    if mode == "gas":
        e_values = _resolve(args, config, "e", None)
        if not e_values:
            raise ValueError("gas mode requires constraint values (--e)")
        e = ConstraintVector(tuple(float(v) for v in e_values))
        big_n = int(_resolve(args, config, "N", e.n + 1))
        sep = float(_resolve(args, config, "sep", 20.0))
        count = int(_resolve(args, config, "count", 3))
        elements, report = gas_sequence(e, big_n, sep, count)
        diags = point_mass_diagnostics(elements)
        diagnostics_to_csv(diags, out / "diagnostics.csv")
        with open(out / "minimizer.json", "w") as fh:
            fh.write(report.to_json())
        _write_manifest(args, out, "minseq",
                        {"mode": "gas", "e": list(e.e), "N": big_n,
                         "sep": sep, "count": count})
    elif mode == "pointmass":
        c = float(_resolve(args, config, "c", 1.0))
        k = float(_resolve(args, config, "k", 1.0))
        indices = [int(v) for v in _resolve(args, config, "indices", [16, 64])]
        elements = [wigner_von_neumann(c, k, idx, suggested_wvn_grid(idx))
                    for idx in indices]
        diags = point_mass_diagnostics(elements, indices=indices)
        diagnostics_to_csv(diags, out / "diagnostics.csv")
        _write_manifest(args, out, "minseq",
                        {"mode": "pointmass", "c": c, "k": k, "indices": indices})
    else:
        raise ValueError(f"unknown minseq mode {mode!r}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import acceptance

    results = acceptance.run_all(seed=getattr(args, "seed", None) or 0)
    all_ok = True
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}: {detail}")
        all_ok = all_ok and ok
    print(f"{sum(1 for _, ok, _ in results if ok)}/{len(results)} criteria passed")
    return EXIT_OK if all_ok else EXIT_NUMERICAL


def _add_common(parser):
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--out", help="output directory (default: current)")
    parser.add_argument("--seed", type=int, help="seed for randomized probes")
    parser.add_argument("--grid-L", dest="grid_L", type=float, help="grid half-width")
    parser.add_argument("--grid-M", dest="grid_M", type=int, help="grid points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdvlab",
        description="Numerical laboratory for KdV multisolitons and "
                    "constrained minimization of the conserved quantities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("soliton", help="emit a multisoliton profile CSV")
    p.add_argument("--betas", type=float, nargs="+")
    p.add_argument("--shifts", type=float, nargs="+")
    p.add_argument("--t", type=float, help="evolve the parameters to time t")
    _add_common(p)
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("energy", help="table of E_1..E_n for a profile")
    p.add_argument("--input", help="profile CSV")
    p.add_argument("--betas", type=float, nargs="+")
    p.add_argument("--shifts", type=float, nargs="+")
    p.add_argument("--n", type=int, help="highest index")
    _add_common(p)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("scatter", help="a(k) sample, bound states, trace residuals")
    p.add_argument("--input", help="profile CSV")
    p.add_argument("--betas", type=float, nargs="+")
    p.add_argument("--shifts", type=float, nargs="+")
    p.add_argument("--kmax", type=float)
    p.add_argument("--kpoints", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("solve", help="constraint vector to MinimizerReport JSON")
    p.add_argument("--e", type=float, nargs="+", help="constraint values e_1..e_n")
    p.add_argument("--N", type=int, help="relaxed total degree (> n)")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("phase-diagram", help="region classification CSV")
    p.add_argument("--e1", type=float, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--e2", type=float, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--res", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("evolve", help="KdV evolution snapshots and drift table")
    p.add_argument("--input", help="initial profile CSV")
    p.add_argument("--betas", type=float, nargs="+")
    p.add_argument("--shifts", type=float, nargs="+")
    p.add_argument("--dt", type=float)
    p.add_argument("--T", dest="T", type=float)
    p.add_argument("--snapshots", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("stability", help="orbital-stability trace CSV")
    p.add_argument("--betas", type=float, nargs="+")
    p.add_argument("--delta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--T", dest="T", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("minseq", help="gas or point-mass minimizing-sequence diagnostics")
    p.add_argument("--mode", choices=["gas", "pointmass"])
    p.add_argument("--e", type=float, nargs="+")
    p.add_argument("--N", type=int)
    p.add_argument("--sep", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--indices", type=int, nargs="+")
    _add_common(p)
    p.set_defaults(func=cmd_minseq)

    p = sub.add_parser("verify", help="run the acceptance suite")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        _emit_error("validation", exc)
        return EXIT_VALIDATION
    except _NUMERICAL_ERRORS as exc:
        _emit_error("numerical", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
