"""Command-line front end.

Subcommands:
  run            time-step a configuration (or preset) and write outputs
  validate-mesh  check a MSH file against the admissibility requirement
  equilibria     locate spatially uniform steady states for a config

Exit codes: 0 success, 2 configuration/input error, 3 solver or
admissibility failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import (
    PRESET_NAMES,
    parse_config,
    preset,
    resolve_mesh,
    with_overrides,
)
from .errors import (
    ConfigError,
    InadmissibleMeshError,
    InvalidArgumentError,
    MeshFormatError,
    NewtonError,
    SolverError,
)
from .fv_solver import compute_dt, run as run_pde_loop
from .mesh import load_msh, validate_admissibility
from .model import default_equilibrium_seeds, find_equilibria, invariant_bounds, reaction_F
from .sh_dynamics import integrate
from .writers import (
    CsvDiagnosticsWriter,
    snapshot_filename,
    write_csv_trajectory,
    write_vtk_snapshot,
)

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advfv",
        description="Finite-volume simulator for a five-species neurodegeneration model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file or preset")
    p_run.add_argument("config", nargs="?", help="path to a JSON config file")
    p_run.add_argument("--preset", choices=PRESET_NAMES, help="use a bundled experiment setup")
    p_run.add_argument("--seed", type=int, help="override the RNG seed")
    p_run.add_argument("--out", help="override the output directory")
    p_run.add_argument("--dt", type=float, help="override the time step")
    p_run.add_argument("--T", type=float, help="override the final time")
    p_run.add_argument("--no-figures", action="store_true", help="skip rendering report figures")

    p_val = sub.add_parser("validate-mesh", help="check MSH admissibility")
    p_val.add_argument("path", help="MSH file to check")
    p_val.add_argument("--tol", type=float, default=1e-8, help="orthogonality tolerance (radians)")

    p_eq = sub.add_parser("equilibria", help="locate uniform steady states")
    p_eq.add_argument("config", help="path to a JSON config file")
    return parser


def _load_config(args):
    if args.preset and args.config:
        raise ConfigError("give either a config file or --preset, not both")
    if args.preset:
        return preset(args.preset), None
    if not args.config:
        raise ConfigError("a config file or --preset is required")
    path = Path(args.config)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text), path.parent


def _cmd_run(args) -> None:
    config, base_dir = _load_config(args)
    config = with_overrides(config, seed=args.seed, out_dir=args.out, dt=args.dt, T=args.T)
    out_dir = Path(config.outputs.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    if config.mode == "pde":
        _run_pde(config, base_dir, out_dir, figures=not args.no_figures)
    else:
        _run_pointwise(config, out_dir, figures=not args.no_figures)


def _run_pde(config, base_dir, out_dir: Path, figures: bool) -> None:
    mesh = resolve_mesh(config.mesh, base_dir)
    p = config.params

    csv_writer = None
    on_diag = None
    if "csv" in config.outputs.formats:
        csv_writer = CsvDiagnosticsWriter(out_dir / "diagnostics.csv")
        on_diag = csv_writer

    on_snapshot = None
    if "vtk" in config.outputs.formats:

        def on_snapshot(index, t, state):
            write_vtk_snapshot(mesh, state, out_dir / snapshot_filename(index))

    try:
        result = run_pde_loop(config, mesh, p, on_diagnostics=on_diag, on_snapshot=on_snapshot)
    finally:
        if csv_writer is not None:
            csv_writer.close()

    if figures:
        from .plots import render_fields_figure, render_series_figure

        render_fields_figure(mesh, result.final_state, out_dir / "report_fields.png")
        render_series_figure(result.diagnostics, out_dir / "report_series.png")

    bad = sum(1 for d in result.diagnostics if not d.rectangle_ok)
    print(f"mesh: {mesh.n_cells} cells, dt = {result.dt:g}, {result.n_steps} steps to T = {config.time.T:g}")
    if bad:
        print(f"invariant region violated in {bad} of {len(result.diagnostics)} recorded steps")
    else:
        print("invariant region held at every recorded step")
    print(f"outputs in {out_dir}")


def _run_pointwise(config, out_dir: Path, figures: bool) -> None:
    if config.initial.layout != "state":
        raise ConfigError("pointwise modes need initial data in the {'state': [...]} layout")
    u0 = np.asarray(config.initial.state, dtype=float)
    p = config.params
    scheme = "nsfd" if config.mode == "sh-nsfd" else "euler"

    if config.time.dt_list:
        dts = list(config.time.dt_list)
    elif config.time.dt is not None:
        dts = [config.time.dt]
    else:
        cfl = 0.9 if config.time.cfl is None else config.time.cfl
        dts = [compute_dt(p, cfl=cfl)]

    for dt in dts:
        traj = integrate(p, scheme, u0, dt, config.time.T)
        tag = f"dt{dt:g}"
        if "csv" in config.outputs.formats:
            write_csv_trajectory(traj, out_dir / f"trajectory_{tag}.csv")
        if figures:
            from .plots import render_trajectory_figure

            render_trajectory_figure(
                traj,
                out_dir / f"trajectory_{tag}.png",
                title=f"{scheme} trajectory, dt = {dt:g}",
            )
        if traj.first_violation is None:
            print(f"dt = {dt:g}: {traj.times.shape[0] - 1} steps, bounds held at every step")
        else:
            t_bad = traj.times[traj.first_violation]
            print(f"dt = {dt:g}: bounds first violated at step {traj.first_violation} (t = {t_bad:g})")
    print(f"outputs in {out_dir}")


def _cmd_validate(args) -> int:
    try:
        mesh = load_msh(args.path)
    except InadmissibleMeshError as exc:
        print(f"not admissible: {exc}")
        return 3
    report = validate_admissibility(mesh, tol=args.tol)
    print(f"cells: {mesh.n_cells}, interior edges: {mesh.n_interior_edges}")
    print(f"worst center-segment/edge angle deviation: {report['worst_angle_deviation']:.3e} rad")
    if report["ok"]:
        print("admissible: yes")
        return 0
    print(f"admissible: no ({len(report['offending_edges'])} offending edges, tol {args.tol:g})")
    return 3


def _cmd_equilibria(args) -> None:
    config, _ = _load_config(args)
    p = config.params
    roots = find_equilibria(p, default_equilibrium_seeds(p))
    bounds = invariant_bounds(p)
    print(f"found {len(roots)} uniform steady state(s):")
    for u in roots:
        res = float(np.max(np.abs(reaction_F(p, u))))
        inside = "inside" if bounds.contains(u, tol=1e-9) else "OUTSIDE"
        values = ", ".join(format(v, ".10g") for v in u)
        print(f"  ({values})   residual {res:.3e}   {inside} the invariant region")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            _cmd_run(args)
            return 0
        if args.command == "validate-mesh":
            return _cmd_validate(args)
        _cmd_equilibria(args)
        return 0
    except (ConfigError, MeshFormatError, InvalidArgumentError) as exc:
        print(f"advfv: config error: {exc}", file=sys.stderr)
        return 2
    except InadmissibleMeshError as exc:
        print(f"advfv: mesh error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, NewtonError) as exc:
        print(f"advfv: solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
