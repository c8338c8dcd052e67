"""Command-line interface: scenario runs, parameter sweeps and self-checks.

Exit codes form the scripting contract: 0 means success, 2 means the request
itself was unusable (bad config, impossible grid, invalid parameter), and 3
means the computation ran but violated a numerical guarantee (norm collapse,
tail leakage, memory bound).  ``verify`` exits 0 only if every check passes.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analytic import initial_spreads
from .errors import (
    CapExceededError,
    NumericalContractError,
    PopperLabError,
    ScenarioFailure,
    UserParameterError,
)
from .experiment import run_scenario
from .measurement import conditional_reduce
from .params import (
    MeasurementSpec,
    PhysicalParams,
    auto_grid,
    config_from_json,
)
from .states import JointStateRecipe, build_joint_state, build_pointer_state
from .verify import format_table, run_checks
from .wavefunction import save_wavefunction

# Sweep grids are chosen automatically per step; this cap keeps one joint
# state around 268 MB.  Steps whose scale ratio cannot fit retry once at
# the escalated cap (a 1 GB joint state) before giving up.
SWEEP_MAX_POINTS = 4096
SWEEP_MAX_POINTS_ESCALATED = 8192
# Joint states above this amplitude count are reported but not written out.
SAVE_MAX_AMPLITUDES = 2048 * 2048

_SWEEP_COLUMNS = ("param_value", "dy2_closed", "dp2_closed", "dp2_numeric",
                  "dp2_initial", "ratio")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _failure_code(exc: PopperLabError) -> int | None:
    cause = exc.cause if isinstance(exc, ScenarioFailure) else exc
    if isinstance(cause, UserParameterError):
        return 2
    if isinstance(cause, NumericalContractError):
        return 3
    return None


def _report_failure(exc: PopperLabError) -> int:
    code = _failure_code(exc)
    if code is None:
        raise exc
    label = "error" if code == 2 else "numerical failure"
    print(f"{label}: {exc}", file=sys.stderr)
    return code


def _load_config(config_path: str):
    try:
        text = Path(config_path).read_text()
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return None
    try:
        return config_from_json(text)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        print(f"error: bad config: {e}", file=sys.stderr)
        return None


def _write_histogram_csv(path: Path, hist: dict) -> None:
    lo, hi = hist["y_range"]
    width = (hi - lo) / hist["n_bins"]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for i, count in enumerate(hist["counts"]):
            writer.writerow([_fmt(lo + i * width), _fmt(lo + (i + 1) * width), count])


def cmd_run(config_path: str, out_dir: str, seed_override: int | None = None) -> int:
    config = _load_config(config_path)
    if config is None:
        return 2
    if seed_override is not None:
        config = dataclasses.replace(config, seed=seed_override)
    try:
        report = run_scenario(config)
    except PopperLabError as e:
        return _report_failure(e)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
    (out / "report.json").write_text(doc + "\n")
    written = ["report.json"]
    if report.sampled is not None:
        _write_histogram_csv(out / "histogram.csv", report.sampled["histogram"])
        written.append("histogram.csv")
    for name, wf in report.states.items():
        if wf.amps.size > SAVE_MAX_AMPLITUDES:
            print(f"note: {name}.wf skipped, {wf.amps.size} amplitudes exceeds "
                  f"the {SAVE_MAX_AMPLITUDES} save bound", file=sys.stderr)
            continue
        save_wavefunction(wf, out / f"{name}.wf")
        written.append(f"{name}.wf")
    print(f"wrote {', '.join(written)} to {out}")
    return 0


def _sweep_step(task: tuple) -> tuple:
    """One sweep row; module-level so worker processes can import it."""
    name, value, sigma, omega0, hbar, mass, epsilon, center = task
    fields = {"sigma": sigma, "omega0": omega0, "epsilon": epsilon, name: value}
    params = PhysicalParams(sigma=fields["sigma"], omega0=fields["omega0"],
                            hbar=hbar, mass=mass)
    ms = MeasurementSpec(epsilon=fields["epsilon"], center=center)
    try:
        grid = auto_grid(params, ms, max_points=SWEEP_MAX_POINTS)
    except CapExceededError:
        grid = auto_grid(params, ms, max_points=SWEEP_MAX_POINTS_ESCALATED)
    psi = build_joint_state(JointStateRecipe(params, grid, grid))
    phi1 = build_pointer_state(ms, grid)
    red = conditional_reduce(psi, phi1, params, ms.epsilon)
    dp2_initial = initial_spreads(params).dp2y
    return (value, red.dy2_closed, red.dp2_closed, red.dp2_numeric,
            dp2_initial, red.dp2_closed / dp2_initial)


def cmd_sweep(config_path: str, param: str, from_value: float, to_value: float,
              steps: int, log: bool, out_dir: str, jobs: int = 1) -> int:
    config = _load_config(config_path)
    if config is None:
        return 2
    if param not in ("epsilon", "sigma", "omega0"):
        print(f"error: unknown sweep parameter '{param}'", file=sys.stderr)
        return 2
    if steps < 2:
        print("error: a sweep needs at least 2 steps", file=sys.stderr)
        return 2
    if not (from_value > 0 and to_value > 0 and np.isfinite(from_value)
            and np.isfinite(to_value)):
        print("error: sweep endpoints must be positive and finite", file=sys.stderr)
        return 2
    ms = config.measurement
    if ms is None and param != "epsilon":
        print("error: sweeping sigma or omega0 needs a measurement block "
              "to fix epsilon", file=sys.stderr)
        return 2

    space = np.geomspace if log else np.linspace
    values = space(from_value, to_value, steps)
    p = config.params
    base_eps = ms.epsilon if ms is not None else 1.0
    center = ms.center if ms is not None else 0.0
    tasks = [(param, float(v), p.sigma, p.omega0, p.hbar, p.mass, base_eps, center)
             for v in values]
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_sweep_step, tasks))
        else:
            rows = [_sweep_step(t) for t in tasks]
    except PopperLabError as e:
        return _report_failure(e)
    rows.sort(key=lambda r: r[0])

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(_SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    print(f"wrote sweep.csv ({len(rows)} rows) to {out}")
    return 0


def cmd_verify(level: str = "quick") -> int:
    rows = run_checks(level)
    print(format_table(rows))
    n_pass = sum(r.passed for r in rows)
    print(f"\n{n_pass}/{len(rows)} checks passed ({level} level)")
    return 0 if n_pass == len(rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="popperlab",
        description="Entangled-pair slit laboratory: run scenarios, sweep "
                    "parameters, verify closed forms against grid numerics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one scenario from a JSON config")
    run_p.add_argument("--config", required=True, help="scenario JSON path")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")

    sweep_p = sub.add_parser("sweep", help="vary one parameter, write sweep.csv")
    sweep_p.add_argument("--config", required=True, help="base scenario JSON path")
    sweep_p.add_argument("--param", required=True,
                         choices=("epsilon", "sigma", "omega0"))
    sweep_p.add_argument("--from", dest="from_value", type=float, required=True)
    sweep_p.add_argument("--to", dest="to_value", type=float, required=True)
    sweep_p.add_argument("--steps", type=int, required=True)
    sweep_p.add_argument("--log", action="store_true",
                         help="space steps geometrically")
    sweep_p.add_argument("--out", required=True, help="output directory")
    sweep_p.add_argument("--jobs", type=int, default=1,
                         help="parallel sweep workers")

    verify_p = sub.add_parser("verify", help="run the self-check battery")
    verify_p.add_argument("--full", action="store_true",
                          help="wide parameter box on 4096-point grids")
    verify_p.add_argument("--quick", action="store_true",
                          help="fast battery (default)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out, args.seed)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.param, args.from_value, args.to_value,
                         args.steps, args.log, args.out, args.jobs)
    return cmd_verify("full" if args.full else "quick")


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
