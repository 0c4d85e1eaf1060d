"""Command-line entry point ``fw``.

Exit codes: 0 on success, 2 on soft failures (criterion not applicable,
Newton non-convergence; a JSON explanation is printed and written), 1 on
hard errors such as a missing or malformed configuration.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, plotting
from . import waves as tw
from .characteristics import (advect, density_deviation, riccati_forcing, slope_growth_monitor,
                              verify_density_invariant)
from .diagnostics import (DiagnosticsRecord, bootstrap_thm42_bounds, check_thm42, check_thm43,
                          empirical_breaking_check, fit_energy_riccati_constant, normalize_rho_bar)
from .dynamics import SimConfig, Status, Trajectory, rhs, rhs_mollified, simulate
from .errors import FWError, NoConvergence, NotApplicable, SingularityGuard
from .initdata import evaluate_constant, init_expression
from .io import read_csv, read_field_csv, read_state_csv, write_csv, write_json, write_state_csv
from .spectral import Grid, MollifierSpec
from .state import State

log = logging.getLogger("fwsystem")

EXIT_OK, EXIT_HARD, EXIT_SOFT = 0, 1, 2


class ConfigError(FWError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def load_toml(path) -> dict:
    import tomli

    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _number(value, name: str) -> float:
    if isinstance(value, str):
        return evaluate_constant(value)
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None


def _initial_field(spec, grid: Grid, base: Path, column: str):
    spec = str(spec)
    if spec.lower().endswith(".csv"):
        p = Path(spec)
        if not p.is_absolute():
            p = base / p
        if not p.is_file():
            raise ConfigError(f"initial data file not found: {p}")
        header, _ = read_csv(p)
        return read_field_csv(p, grid, "value" if "value" in header else column)
    return init_expression(spec, grid)


def resolve_run(raw: dict, base: Path) -> tuple[State, SimConfig, dict]:
    """Build the initial state and simulation config from a parsed TOML dict."""
    grid_cfg = raw.get("grid", {})
    L = _number(grid_cfg.get("L", np.pi), "grid.L")
    N = int(grid_cfg.get("N", 256))
    grid = Grid(L, N)
    init = raw.get("init", {})
    u = _initial_field(init.get("u", "0"), grid, base, "u")
    rb = _initial_field(init.get("rho_bar", "1"), grid, base, "rho_bar")
    s0 = State.from_fields(u, rb)

    if "dt" not in raw or "t_end" not in raw:
        raise ConfigError("config must set dt and t_end")
    moll = raw.get("mollifier")
    spec = None
    if moll and "epsilon" in moll:
        spec = MollifierSpec(_number(moll["epsilon"], "mollifier.epsilon"), moll.get("kind", "gaussian"))
    out = raw.get("output", {})
    cfg = SimConfig(
        dt=_number(raw["dt"], "dt"),
        t_end=_number(raw["t_end"], "t_end"),
        mollifier=spec,
        dealias=bool(raw.get("dealias", True)),
        blowup_slope_threshold=_number(raw.get("blowup_slope_threshold", 1e4), "blowup_slope_threshold"),
        stride=int(out.get("stride", 1)),
        cfl_limit=_number(raw.get("cfl_limit", 0.5), "cfl_limit"),
    )
    resolved = {
        "grid": {"L": L, "N": N},
        "init": {"u": str(init.get("u", "0")), "rho_bar": str(init.get("rho_bar", "1"))},
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "dealias": cfg.dealias,
        "blowup_slope_threshold": cfg.blowup_slope_threshold,
        "cfl_limit": cfg.cfl_limit,
        "mollifier": None if spec is None else {"epsilon": spec.epsilon, "kind": spec.kind},
        "output": {"stride": cfg.stride},
    }
    return s0, cfg, resolved


def output_dir(cli_value, raw: dict | None, default_name: str) -> Path:
    if cli_value:
        return Path(cli_value)
    if raw and raw.get("output", {}).get("dir"):
        return Path(raw["output"]["dir"])
    root = os.environ.get("FW_OUTPUT_DIR")
    return Path(root) / default_name if root else Path("fw_output") / default_name


def write_manifest(out: Path, command: str, resolved: dict):
    write_json(out / "manifest.json", {"artifact_version": __version__, "command": command, "config": resolved})


# ---------------------------------------------------------------------------
# trajectory persistence
# ---------------------------------------------------------------------------

def save_trajectory(out: Path, traj: Trajectory, plots: bool = True):
    snap_dir = out / "snapshots"
    index = []
    for i, s in enumerate(traj.snapshots):
        name = f"snap_{i:05d}.csv"
        write_state_csv(snap_dir / name, s)
        index.append((i, s.t, name))
    write_csv(snap_dir / "index.csv", ["index", "t", "file"], index)
    write_csv(out / "diagnostics.csv", DiagnosticsRecord.CSV_COLUMNS, (r.row() for r in traj.records))
    recs = traj.records
    summary = traj.summary()
    summary.update({
        "drift_int_u": recs[-1].int_u - recs[0].int_u,
        "drift_int_rho_bar": recs[-1].int_rho_bar - recs[0].int_rho_bar,
        "energy_riccati_constant": fit_energy_riccati_constant([r.t for r in recs], [r.energy_s2 for r in recs]),
        "min_rho_bar": float(min(np.min(s.rho_bar) for s in traj.snapshots)),
    })
    write_json(out / "summary.json", summary)
    if plots:
        plotting.plot_snapshots(traj, out / "figures" / "snapshots.png")
        plotting.plot_diagnostics(traj, out / "figures" / "diagnostics.png")
    return summary


def load_trajectory(traj_dir: Path) -> Trajectory:
    man_path = traj_dir / "manifest.json"
    if not man_path.is_file():
        raise ConfigError(f"{traj_dir} has no manifest.json")
    cfg = json.loads(man_path.read_text())["config"]
    grid = Grid(cfg["grid"]["L"], cfg["grid"]["N"])
    moll = cfg.get("mollifier")
    spec = MollifierSpec(moll["epsilon"], moll["kind"]) if moll else None
    sim = SimConfig(dt=cfg["dt"], t_end=cfg["t_end"], mollifier=spec, dealias=cfg["dealias"],
                    blowup_slope_threshold=cfg["blowup_slope_threshold"], stride=cfg["output"]["stride"],
                    cfl_limit=cfg["cfl_limit"])
    with open(traj_dir / "snapshots" / "index.csv") as fh:
        rows = [line.strip().split(",") for line in fh.readlines()[1:] if line.strip()]
    traj = Trajectory(grid=grid, config=sim)
    for _, t, name in rows:
        s = read_state_csv(traj_dir / "snapshots" / name, grid, float(t))
        traj.snapshots.append(s)
        traj.rhs_values.append(rhs(s, sim.dealias) if spec is None else rhs_mollified(s, spec, sim.dealias))
    summary = json.loads((traj_dir / "summary.json").read_text())
    traj.status = Status(summary["status"])
    traj.t_star = summary.get("t_star")
    return traj


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    raw = load_toml(args.config)
    s0, cfg, resolved = resolve_run(raw, Path(args.config).parent)
    out = output_dir(args.output, raw, "simulate")
    traj = simulate(s0, cfg)
    write_manifest(out, "simulate", resolved)
    summary = save_trajectory(out, traj, plots=not args.no_plots)
    print(json.dumps({"status": summary["status"], "t_final": summary["t_final"], "output": str(out)}))
    return EXIT_OK


def cmd_characteristics(args) -> int:
    traj_dir = Path(args.traj)
    traj = load_trajectory(traj_dir)
    header, data = read_csv(args.seeds)
    col = header.index("x") if "x" in header else 0
    seeds = data[:, col]
    out = Path(args.output) if args.output else traj_dir
    bundle = advect(traj, seeds)
    write_csv(out / "paths.csv", ["t", "seed_id", "q", "qx", "gamma"], bundle.rows())
    dev = density_deviation(bundle)
    forcing = riccati_forcing(traj, bundle)
    growth = slope_growth_monitor(traj)
    report = {
        "max_deviation": verify_density_invariant(bundle, traj),
        "per_seed": [{"seed_id": j, "x0": float(seeds[j]), "max_deviation": float(np.max(np.abs(dev[:, j]))),
                      "min_qx": float(np.min(bundle.qx[:, j])), "winding": int(bundle.winding[-1, j])}
                     for j in range(seeds.size)],
        "order_preserved": bool(np.all(np.diff(bundle.q[:, np.argsort(seeds)], axis=1) > 0)),
        "forcing": {"max_abs": forcing.max_abs, "bound": forcing.bound, "within_bound": forcing.within_bound},
        "slope_growth": {"rate": growth.rate, "max_log_growth": float(np.max(growth.log_growth)),
                         "holds": growth.holds},
    }
    write_json(out / "invariant_report.json", report)
    if not args.no_plots:
        plotting.plot_paths(bundle, out / "figures" / "paths.png")
    print(json.dumps({"max_deviation": report["max_deviation"], "output": str(out)}))
    return EXIT_OK


def cmd_check_breaking(args) -> int:
    raw = load_toml(args.config)
    s0, cfg, resolved = resolve_run(raw, Path(args.config).parent)
    out = args._out = output_dir(args.output, raw, "check_breaking")
    if args.normalize_rho:
        s0 = normalize_rho_bar(s0)
        resolved["normalize_rho"] = True
    write_manifest(out, "check-breaking", resolved)
    if args.criterion == "thm43":
        pred = check_thm43(s0)
    else:
        if args.bootstrap:
            K2, C = bootstrap_thm42_bounds(simulate(s0, cfg))
        else:
            if args.eps is None or args.k2 is None or args.c is None:
                raise ConfigError("thm42 needs --eps, --k2 and --c (or --bootstrap with --eps)")
            K2, C = args.k2, args.c
        if args.eps is None:
            raise ConfigError("thm42 needs --eps")
        pred = check_thm42(s0, args.eps, K2, C)
    write_json(out / "prediction.json", pred.to_dict())
    result = {"prediction": pred.to_dict()}
    if args.simulate:
        traj = simulate(s0, cfg)
        report = empirical_breaking_check(traj, pred)
        write_json(out / "verification.json", report.to_dict())
        if not args.no_plots:
            plotting.plot_breaking(report, out / "figures" / "breaking.png")
        result["verification"] = {k: v for k, v in report.to_dict().items()
                                  if k not in ("times", "observed_min_slope", "comparison_min_slope")}
    print(json.dumps(result, default=float))
    return EXIT_OK


def cmd_waves(args) -> int:
    out = output_dir(args.output, None, "waves")
    problem = tw.WaveProblem(A=args.A, n_modes=args.modes)
    s_values = np.linspace(args.s_max / args.s_steps, args.s_max, args.s_steps)
    resolved = {"A": args.A, "s_max": args.s_max, "s_steps": args.s_steps, "modes": args.modes,
                "validate": bool(args.validate), "dt": args.dt, "n_points": args.n_points}
    write_manifest(out, "waves", resolved)
    branch = tw.continue_branch(problem, s_values)
    header = ["s", "c"] + [f"a_{k}" for k in range(args.modes + 1)] + ["residual"]
    write_csv(out / "branch.csv", header,
              ([s, c, *a, r] for s, c, a, r in zip(branch.s, branch.c, branch.coeffs, branch.residuals)))
    if branch.s and not args.no_plots:
        plotting.plot_branch(branch, out / "figures" / "branch.png")
    if args.validate and branch.s:
        sols = branch.solutions()

        def one(sol):
            v = tw.validate_wave_series(sol, dt=args.dt, n_points=args.n_points)
            return {"s": sol.s, "c": sol.c, "max_error": v.max_error, "status": v.status,
                    "psi_min": v.psi_min, "psi_max": v.psi_max,
                    "psi_equation_residual": tw.psi_equation_residual(sol)}

        with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
            rows = list(pool.map(one, sols))
        write_json(out / "validation.json", {"A": args.A, "results": rows})
    if branch.error:
        return _soft_failure(out, "NoConvergence", branch.error)
    print(json.dumps({"points": len(branch), "c_first": branch.c[0] if branch.c else None, "output": str(out)}))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run

    return EXIT_OK if run(seed=args.seed) else EXIT_HARD


def _soft_failure(out: Path | None, kind: str, reason: str) -> int:
    payload = {"error": kind, "reason": reason}
    if out is not None:
        write_json(out / "error.json", payload)
    print(json.dumps(payload))
    return EXIT_SOFT


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fw", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", "-o", help="output directory (default: config output.dir, "
                                                "then $FW_OUTPUT_DIR/<command>)")
        sp.add_argument("--no-plots", action="store_true", help="skip PNG figures")
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("simulate", help="time-step the system from a TOML config")
    sp.add_argument("--config", required=True)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("characteristics", help="integrate particle paths of a stored run")
    sp.add_argument("--traj", required=True, help="directory written by 'fw simulate'")
    sp.add_argument("--seeds", required=True, help="CSV with an 'x' column of seed points")
    common(sp)
    sp.set_defaults(func=cmd_characteristics)

    sp = sub.add_parser("check-breaking", help="evaluate a wave-breaking criterion")
    sp.add_argument("--config", required=True)
    sp.add_argument("--criterion", choices=("thm42", "thm43"), default="thm43")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--k2", type=float)
    sp.add_argument("--c", type=float)
    sp.add_argument("--bootstrap", action="store_true", help="estimate K2 and C from a trial run")
    sp.add_argument("--simulate", action="store_true")
    sp.add_argument("--normalize-rho", action="store_true",
                    help="rescale rho_bar_0 to unit L1 norm (this changes the problem)")
    common(sp)
    sp.set_defaults(func=cmd_check_breaking)

    sp = sub.add_parser("waves", help="continue the travelling-wave branch")
    sp.add_argument("--A", type=float, required=True)
    sp.add_argument("--s-max", type=float, required=True)
    sp.add_argument("--s-steps", type=int, required=True)
    sp.add_argument("--modes", type=int, default=tw.DEFAULT_MODES)
    sp.add_argument("--validate", action="store_true")
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--n-points", type=int, default=256)
    common(sp)
    sp.set_defaults(func=cmd_waves)

    sp = sub.add_parser("selftest", help="run the built-in consistency suites")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_selftest)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_HARD if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NotApplicable as exc:
        return _soft_failure(getattr(args, "_out", None), "NotApplicable", exc.reason)
    except (NoConvergence, SingularityGuard) as exc:
        return _soft_failure(None, type(exc).__name__, str(exc))
    except (FWError, OSError, ValueError) as exc:
        print(f"fw {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_HARD


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
