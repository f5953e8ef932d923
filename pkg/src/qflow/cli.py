"""Command line surface: run, verify, sweep, oracle.

Configuration is a flat key=value file (one pair per line, # comments).
Every command takes --config, --out, --seed, --jobs and --check; flags
override the corresponding config keys.  Numeric CSV output uses full
precision scientific notation so downstream tolerance checks are never
formatting-limited, and identical config plus seed reproduces CSV files
byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, checks
from .grid import (
    InitialSpec,
    QGridFunction,
    branch_mean_residual,
    build_domain,
    dirichlet_energy,
    domain_manifest,
    l2_distance_sq,
    sample_initial,
    write_snapshot_csv,
)
from .morseflow import (
    FlowTrajectory,
    SolverOptions,
    geometric_schedule,
    run_flow,
    uniform_schedule,
)
from .oracle import EigenMode, exact_eigen_solution, implicit_euler_chain

_PRESETS = ("symmetric-cos", "symmetric-poly", "branches")
_MODES = ("geometric", "uniform")
_FMT = "{:.17e}".format


class ConfigError(Exception):
    """Invalid configuration; carries the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    mode: str = "uniform"
    m: int = 1
    resolution: int = 51
    q: int = 2
    preset: str = "symmetric-cos"
    coeffs: tuple = ()
    branch_coeffs: tuple = ()
    h: float = 0.25              # geometric base step
    total_time: float = 0.25     # uniform horizon T
    steps: int = 16
    outer_tol: float = 1e-12
    max_outer: int = 100
    cg_tol: float = 1e-12
    stationarity_tol: float = 1e-10
    cg_iter_factor: int = 10
    out: str = "out"
    seed: int = 0
    checks: tuple = ("all",)
    inject: str = ""
    sweep_resolutions: tuple = (11, 21, 41)
    sweep_steps: tuple = (16, 32, 64)
    spatial_steps: int = 12800
    eigen_index: int = 1
    jobs: int = 1


_INT_KEYS = {"m", "resolution", "q", "steps", "max_outer", "cg_iter_factor",
             "seed", "spatial_steps", "eigen_index", "jobs"}
_FLOAT_KEYS = {"h", "total_time", "outer_tol", "cg_tol", "stationarity_tol"}
_STR_KEYS = {"mode", "preset", "out", "inject"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _STR_KEYS:
            return raw
        if key == "coeffs":
            return tuple(float(p) for p in raw.split(",") if p.strip())
        if key == "branch_coeffs":
            groups = [g for g in raw.split(";") if g.strip()]
            return tuple(
                tuple(float(p) for p in g.split(",") if p.strip())
                for g in groups
            )
        if key == "checks":
            return tuple(p.strip() for p in raw.split(",") if p.strip())
        if key in ("sweep_resolutions", "sweep_steps"):
            return tuple(int(p) for p in raw.split(",") if p.strip())
    except ValueError:
        raise ConfigError(key, f"cannot parse value {raw!r}") from None
    raise ConfigError(key, "unknown configuration key")


def _format_value(key: str, value) -> str:
    if key == "branch_coeffs":
        return ";".join(",".join(repr(c) for c in g) for g in value)
    if isinstance(value, tuple):
        return ",".join(
            repr(v) if isinstance(v, float) else str(v) for v in value
        )
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str) -> RunConfig:
    """key=value lines to a validated RunConfig."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
        values[key] = _parse_value(key, raw)
    config = replace(RunConfig(), **values)
    validate(config)
    return config


def serialize_config(config: RunConfig) -> str:
    lines = [
        f"{f.name}={_format_value(f.name, getattr(config, f.name))}"
        for f in fields(RunConfig)
    ]
    return "\n".join(lines) + "\n"


def validate(config: RunConfig):
    if config.mode not in _MODES:
        raise ConfigError("mode", f"must be one of {_MODES}")
    if config.m not in (1, 2):
        raise ConfigError("m", "must be 1 or 2")
    if config.resolution < 3 or config.resolution % 2 == 0:
        raise ConfigError("resolution", "must be odd and at least 3")
    if config.q < 1:
        raise ConfigError("q", "must be at least 1")
    if config.preset not in _PRESETS:
        raise ConfigError("preset", f"must be one of {_PRESETS}")
    if config.preset.startswith("symmetric") and config.q % 2 != 0:
        raise ConfigError("q", f"preset {config.preset} requires even q")
    if config.preset == "symmetric-poly" and not config.coeffs:
        raise ConfigError("coeffs", "symmetric-poly requires coefficients")
    if config.preset == "branches":
        if len(config.branch_coeffs) != config.q:
            raise ConfigError(
                "branch_coeffs",
                f"need {config.q} coefficient groups, got {len(config.branch_coeffs)}",
            )
        if any(not g for g in config.branch_coeffs):
            raise ConfigError("branch_coeffs", "empty coefficient group")
    if config.h <= 0:
        raise ConfigError("h", "must be positive")
    if config.total_time <= 0:
        raise ConfigError("total_time", "must be positive")
    if config.steps < 1:
        raise ConfigError("steps", "must be at least 1")
    for key in ("outer_tol", "cg_tol", "stationarity_tol"):
        if getattr(config, key) <= 0:
            raise ConfigError(key, "must be positive")
    if config.max_outer < 1:
        raise ConfigError("max_outer", "must be at least 1")
    if config.cg_iter_factor < 1:
        raise ConfigError("cg_iter_factor", "must be at least 1")
    if config.seed < 0:
        raise ConfigError("seed", "must be nonnegative")
    if config.checks not in (("all",), ("none",)):
        for name in config.checks:
            if name not in checks.CHECK_NAMES:
                raise ConfigError("checks", f"unknown check {name!r}")
    if config.inject not in ("", "energy_monotonicity"):
        raise ConfigError("inject", "supported injection: energy_monotonicity")
    for key in ("sweep_resolutions", "sweep_steps"):
        seq = getattr(config, key)
        if not seq:
            raise ConfigError(key, "must be nonempty")
        if list(seq) != sorted(set(seq)):
            raise ConfigError(key, "must be strictly increasing")
    for res in config.sweep_resolutions:
        if res < 3 or res % 2 == 0:
            raise ConfigError("sweep_resolutions", "entries must be odd and >= 3")
    for n in config.sweep_steps:
        if n < 1:
            raise ConfigError("sweep_steps", "entries must be at least 1")
    if config.spatial_steps < 1:
        raise ConfigError("spatial_steps", "must be at least 1")
    if config.eigen_index < 1:
        raise ConfigError("eigen_index", "must be at least 1")
    if config.jobs < 1:
        raise ConfigError("jobs", "must be at least 1")


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def make_schedule(config: RunConfig):
    if config.mode == "geometric":
        return geometric_schedule(config.h, config.steps)
    return uniform_schedule(config.total_time, config.steps)


def make_opts(config: RunConfig) -> SolverOptions:
    return SolverOptions(
        outer_tol=config.outer_tol,
        max_outer=config.max_outer,
        cg_tol=config.cg_tol,
        stationarity_tol=config.stationarity_tol,
        cg_iter_factor=config.cg_iter_factor,
    )


def make_initial(config: RunConfig, domain) -> QGridFunction:
    spec = InitialSpec(config.preset, config.coeffs, config.branch_coeffs)
    return sample_initial(spec, domain, config.q)


def _apply_injection(traj: FlowTrajectory, config: RunConfig) -> FlowTrajectory:
    """Negative control: corrupt one interior snapshot so the named check
    must fail.  Boundary rows stay intact to keep the failure isolated."""
    if config.inject != "energy_monotonicity":
        return traj
    k = max(1, traj.completed_steps // 2)
    f = traj.snapshots[k]
    vals = f.values.copy()
    vals[f.domain.interior] *= 2.0
    snaps = list(traj.snapshots)
    snaps[k] = QGridFunction(f.domain, vals)
    return FlowTrajectory(traj.schedule, tuple(snaps), traj.reports)


def _run_check_names(config: RunConfig) -> tuple:
    """Checks applicable to a single run of this config."""
    names = ["energy_monotonicity", "step_estimate", "eta_residual",
             "boundary_trace", "holder"]
    if config.preset.startswith("symmetric"):
        names += ["symmetry", "positivity"]
    if config.mode == "uniform":
        names.append("max_principle")
        if config.q == 1:
            names.append("oracle_equivalence")
    return tuple(n for n in checks.CHECK_NAMES if n in names)


def _selected(config: RunConfig, applicable: tuple) -> tuple:
    if config.checks == ("all",):
        return applicable
    if config.checks == ("none",):
        return ()
    return tuple(n for n in checks.CHECK_NAMES if n in config.checks)


def _evaluate(name: str, ctx: dict) -> checks.CheckResult:
    rng = ctx["rng"]
    if name == "metric_axioms":
        return checks.check_metric_axioms(rng)
    if name == "sorted_matching":
        return checks.check_sorted_matching(rng)
    if name == "embedding_isometry":
        return checks.check_embedding_isometry(rng)
    if name == "ascending_projection":
        return checks.check_ascending_projection(rng)
    if name == "translation_identity":
        return checks.check_translation_identity(
            rng, ctx["domain"], ctx["config"].q
        )
    if name == "energy_monotonicity":
        return checks.check_energy_monotonicity(ctx["traj"])
    if name == "step_estimate":
        return checks.check_step_estimate(ctx["traj"])
    if name == "eta_residual":
        return checks.check_eta_residual(ctx["traj"])
    if name == "symmetry":
        return checks.check_symmetry(ctx.get("traj_sym") or ctx["traj"])
    if name == "positivity":
        return checks.check_positivity(ctx.get("traj_sym") or ctx["traj"])
    if name == "max_principle":
        pool = [ctx.get("traj"), ctx.get("traj_sym"), ctx.get("traj_q1")]
        return checks.check_max_principle([t for t in pool if t is not None])
    if name == "boundary_trace":
        return checks.check_boundary_trace(ctx["traj"], rng)
    if name == "holder":
        return checks.check_holder(ctx["traj"], rng)
    if name == "brute_force":
        return checks.check_brute_force(rng, opts=ctx["opts"])
    if name == "oracle_equivalence":
        return checks.check_oracle_equivalence(ctx.get("traj_q1") or ctx["traj"])
    raise ValueError(f"unknown check {name!r}")


def _print_results(results):
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"check {res.name}: {status} margin={res.margin:.3e} ({res.detail})")


def _check_payload(results):
    return [
        {"name": r.name, "passed": r.passed, "margin": r.margin,
         "detail": r.detail}
        for r in results
    ]


def _config_payload(config: RunConfig) -> dict:
    out = {}
    for f in fields(RunConfig):
        v = getattr(config, f.name)
        out[f.name] = list(list(g) if isinstance(g, tuple) else g for g in v) \
            if isinstance(v, tuple) else v
    return out


def _write_energy_csv(path, traj: FlowTrajectory):
    """Per-step table recomputed from the snapshots themselves, so the file
    reflects what is on disk rather than the solver's internal log."""
    energies = [dirichlet_energy(f) for f in traj.snapshots]
    n_is_1 = traj.snapshots[0].n == 1
    with open(path, "w") as fh:
        fh.write("k,tau,energy_before,energy_after,penalty,estimate_margin,"
                 "eta_residual,max_norm,outer_iterations\n")
        for k, report in enumerate(traj.reports, start=1):
            prev, curr = traj.snapshots[k - 1], traj.snapshots[k]
            penalty = l2_distance_sq(prev, curr)
            margin = report.tau * (energies[k - 1] - energies[k]) - penalty
            res = branch_mean_residual(prev, curr, report.tau) \
                if n_is_1 else float("nan")
            max_norm = float(np.sqrt((curr.values**2).sum(axis=(1, 2)).max()))
            row = [str(k), _FMT(report.tau), _FMT(energies[k - 1]),
                   _FMT(energies[k]), _FMT(penalty), _FMT(margin), _FMT(res),
                   _FMT(max_norm), str(report.outer_iterations)]
            fh.write(",".join(row) + "\n")


def _write_snapshots(out_dir: Path, traj: FlowTrajectory):
    snap_dir = out_dir / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for k, f in enumerate(traj.snapshots):
        write_snapshot_csv(f, snap_dir / f"{k}.csv")


def cmd_run(config: RunConfig) -> int:
    t0 = time.perf_counter()
    domain = build_domain(config.m, config.resolution)
    f0 = make_initial(config, domain)
    traj = run_flow(f0, make_schedule(config), make_opts(config))
    traj = _apply_injection(traj, config)
    wall = time.perf_counter() - t0

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_energy_csv(out_dir / "energy.csv", traj)
    _write_snapshots(out_dir, traj)

    ctx = {
        "config": config,
        "rng": np.random.default_rng(config.seed),
        "domain": domain,
        "opts": make_opts(config),
        "traj": traj,
    }
    results = [_evaluate(n, ctx) for n in _selected(config, _run_check_names(config))]
    all_passed = all(r.passed for r in results)
    complete = traj.converged

    payload = {
        "version": __version__,
        "command": "run",
        "config": _config_payload(config),
        "domain": domain_manifest(domain),
        "schedule": {
            "mode": traj.schedule.mode,
            "h": traj.schedule.h,
            "steps": traj.schedule.steps,
            "total": traj.schedule.total,
        },
        "completed_steps": traj.completed_steps,
        "converged": complete,
        "effective_time": traj.effective_time,
        "energies": [dirichlet_energy(f) for f in traj.snapshots],
        "injected": config.inject or None,
        "wall_time_seconds": wall,
        "checks": _check_payload(results),
        "passed": bool(all_passed and complete),
    }
    with open(out_dir / "run.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _print_results(results)
    print(f"run: {traj.completed_steps}/{traj.schedule.steps} steps, "
          f"converged={complete}, artifacts in {out_dir}")
    if not complete:
        print("run: trajectory truncated by a non-converged step", file=sys.stderr)
    failing = [r.name for r in results if not r.passed]
    if failing:
        print(f"FAILED checks: {', '.join(failing)}", file=sys.stderr)
    return 0 if (all_passed and complete) else 1


def cmd_verify(config: RunConfig) -> int:
    domain = build_domain(config.m, config.resolution)
    opts = make_opts(config)
    schedule = make_schedule(config)

    traj = _apply_injection(run_flow(make_initial(config, domain), schedule, opts),
                            config)
    if config.preset.startswith("symmetric"):
        traj_sym = traj
    else:
        sym_cfg = replace(config, preset="symmetric-cos", coeffs=(),
                          branch_coeffs=(), q=2)
        traj_sym = run_flow(make_initial(sym_cfg, domain), schedule, opts)
    q1_cfg = replace(config, mode="uniform", q=1, preset="branches",
                     coeffs=(), branch_coeffs=((1.0, 0.0, -1.0),))
    traj_q1 = run_flow(make_initial(q1_cfg, domain),
                       uniform_schedule(config.total_time, config.steps), opts)

    ctx = {
        "config": config,
        "rng": np.random.default_rng(config.seed),
        "domain": domain,
        "opts": opts,
        "traj": traj,
        "traj_sym": traj_sym,
        "traj_q1": traj_q1,
    }
    results = [_evaluate(n, ctx) for n in _selected(config, checks.CHECK_NAMES)]
    all_passed = all(r.passed for r in results)

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": __version__,
        "command": "verify",
        "config": _config_payload(config),
        "injected": config.inject or None,
        "checks": _check_payload(results),
        "passed": bool(all_passed),
    }
    with open(out_dir / "verify.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _print_results(results)
    failing = [r.name for r in results if not r.passed]
    if failing:
        print(f"FAILED checks: {', '.join(failing)}", file=sys.stderr)
        return 1
    print(f"verify: {len(results)} checks passed, report in {out_dir}")
    return 0


def _heat_errors(config: RunConfig, resolution: int, steps: int):
    """Relative l2 and max errors of the uniform flow's top branch at T
    against the separated exact solution."""
    domain = build_domain(1, resolution)
    cfg = replace(config, m=1, resolution=resolution, steps=steps,
                  mode="uniform", preset="symmetric-cos", q=2,
                  coeffs=(), branch_coeffs=())
    traj = run_flow(make_initial(cfg, domain),
                    uniform_schedule(config.total_time, steps), make_opts(config))
    upper = traj.snapshots[-1].values[:, -1, 0]
    exact = exact_eigen_solution(EigenMode(config.eigen_index),
                                 config.total_time, domain)
    diff = upper - exact
    l2 = float(np.linalg.norm(diff) / np.linalg.norm(exact))
    linf = float(np.max(np.abs(diff)) / np.max(np.abs(exact)))
    return l2, linf


def _ladder_rows(config: RunConfig, errors_fn, pool_jobs: int):
    """Temporal rows (fixed grid, steps from sweep_steps) then spatial rows
    (fixed steps, resolutions from sweep_resolutions), with observed orders
    between consecutive rows of each group."""
    cells = [(config.resolution, n) for n in config.sweep_steps]
    cells += [(r, config.spatial_steps) for r in config.sweep_resolutions]

    if pool_jobs > 1:
        with ProcessPoolExecutor(max_workers=pool_jobs) as pool:
            outcomes = list(pool.map(errors_fn, cells))
    else:
        outcomes = [errors_fn(cell) for cell in cells]

    rows = []
    n_t = len(config.sweep_steps)
    for i, ((resolution, steps), (l2, linf)) in enumerate(zip(cells, outcomes)):
        tau = config.total_time / steps
        spatial = i >= n_t
        first = i == 0 or i == n_t
        if first or not math.isfinite(l2):
            order = None
        else:
            prev_res, prev_steps = cells[i - 1]
            prev_l2 = rows[-1]["l2"]
            if spatial:
                ratio = (resolution - 1) / (prev_res - 1)
            else:
                ratio = steps / prev_steps
            order = math.log(prev_l2 / l2) / math.log(ratio) \
                if prev_l2 > 0 and l2 > 0 else None
        rows.append({"resolution": resolution, "tau": tau, "steps": steps,
                     "l2": l2, "linf": linf, "order": order})
    return rows


def _write_ladder_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("resolution,tau,N,l2_error_vs_exact,linf_error_vs_exact,"
                 "observed_order\n")
        for row in rows:
            order = "" if row["order"] is None else _FMT(row["order"])
            fh.write(",".join([
                str(row["resolution"]), _FMT(row["tau"]), str(row["steps"]),
                _FMT(row["l2"]), _FMT(row["linf"]), order,
            ]) + "\n")


def _print_ladder(rows, label):
    print(f"{label}: resolution  N       l2_rel      linf_rel    order")
    for row in rows:
        order = "      -" if row["order"] is None else f"{row['order']:7.3f}"
        print(f"  {row['resolution']:10d}  {row['steps']:6d}  "
              f"{row['l2']:.4e}  {row['linf']:.4e}  {order}")


class _FlowCell:
    """Picklable sweep worker (ProcessPoolExecutor needs a top-level
    callable; a bound config comes along as state)."""

    def __init__(self, config: RunConfig):
        self.config = config

    def __call__(self, cell):
        resolution, steps = cell
        try:
            return _heat_errors(self.config, resolution, steps)
        except Exception as err:  # mark the cell, keep the table
            print(f"sweep cell resolution={resolution} N={steps} failed: {err}",
                  file=sys.stderr)
            return float("nan"), float("nan")


def cmd_sweep(config: RunConfig) -> int:
    if config.m != 1:
        raise ConfigError("m", "sweep compares against the interval exact "
                                "solution and requires m=1")
    if config.eigen_index != 1:
        raise ConfigError("eigen_index", "the flow sweep tracks the ground "
                                         "mode; use the oracle command for "
                                         "higher modes")
    rows = _ladder_rows(config, _FlowCell(config), config.jobs)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_ladder_csv(out_dir / "sweep.csv", rows)
    _print_ladder(rows, "sweep (flow vs exact)")
    print(f"sweep: table in {out_dir / 'sweep.csv'}")
    bad = any(not math.isfinite(row["l2"]) for row in rows)
    return 1 if bad else 0


def _chain_errors(config: RunConfig, cell):
    resolution, steps = cell
    domain = build_domain(1, resolution)
    mode = EigenMode(config.eigen_index)
    u0 = exact_eigen_solution(mode, 0.0, domain)
    tau = config.total_time / steps
    u = implicit_euler_chain(domain, u0, [tau] * steps)
    exact = exact_eigen_solution(mode, config.total_time, domain)
    diff = u - exact
    l2 = float(np.linalg.norm(diff) / np.linalg.norm(exact))
    linf = float(np.max(np.abs(diff)) / np.max(np.abs(exact)))
    return l2, linf


class _ChainCell:
    def __init__(self, config: RunConfig):
        self.config = config

    def __call__(self, cell):
        return _chain_errors(self.config, cell)


def cmd_oracle(config: RunConfig) -> int:
    if config.m != 1:
        raise ConfigError("m", "the reference chain is built for m=1")
    rows = _ladder_rows(config, _ChainCell(config), config.jobs)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_ladder_csv(out_dir / "oracle.csv", rows)
    _print_ladder(rows, "oracle (reference chain vs exact)")
    print(f"oracle: table in {out_dir / 'oracle.csv'}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qflow",
        description="Energy-reducing implicit flow for multiset-valued "
                    "grid functions: run, verify, sweep, oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("run", "run the flow and write energy.csv, snapshots/, run.json"),
        ("verify", "run the full check battery and write verify.json"),
        ("sweep", "error ladder of the flow against the exact solution"),
        ("oracle", "error ladder of the reference chain against the exact "
                   "solution"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="sampling seed (overrides config)")
        p.add_argument("--jobs", type=int, help="sweep worker count")
        p.add_argument("--check", action="append", default=None,
                       help="restrict to the named check (repeatable)")
    args = parser.parse_args(argv)

    try:
        try:
            config = load_config(args.config) if args.config else RunConfig()
        except OSError as err:
            raise ConfigError("config", f"cannot read {args.config!r}: {err}") \
                from None
        overrides = {}
        if args.out is not None:
            overrides["out"] = args.out
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.jobs is not None:
            overrides["jobs"] = args.jobs
        if args.check:
            names = []
            for entry in args.check:
                names += [p.strip() for p in entry.split(",") if p.strip()]
            overrides["checks"] = tuple(names)
        if overrides:
            config = replace(config, **overrides)
            validate(config)
        command = {"run": cmd_run, "verify": cmd_verify,
                   "sweep": cmd_sweep, "oracle": cmd_oracle}[args.command]
        return command(config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
