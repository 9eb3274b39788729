"""Command-line front end.

Subcommands: ``solve`` (one method on one problem), ``compare`` (every method
on one problem over a set of initial points), ``check`` (assumption and
path-structure reports), and ``plot`` (trajectory CSV to SVG). Configuration
comes from flags or a JSON file (``--config``); flags win. Exit codes: 0
solved / reports pass, 1 usage or config error, 2 budget exhausted, 3
assumption violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .baselines import BASELINE_KINDS, BaselineMethod, run_baseline
from .dynamics import (ASSUMPTION_VIOLATION, MAX_EPOCHS, MAX_STEPS, SOLVED,
                       SolverConfig, run_stonr)
from .objectives import BUILTIN_NAMES, builtin, builtin_problem
from .plotting import plot_comparison, plot_trajectory
from .trajio import TrajectoryFormatError, read_trajectory, write_report, write_trajectory
from .verify import check_assumptions, collect_samples, parity_diagnostics
from .vi import progress_residual, vi_gap

log = logging.getLogger("ridge_solver")

METHODS = ("stonr",) + BASELINE_KINDS

_EXIT_BY_STATUS = {SOLVED: 0, MAX_EPOCHS: 2, MAX_STEPS: 2, ASSUMPTION_VIOLATION: 3}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise UsageError(message)


# ------------------------------ configuration ------------------------------

_DEFAULTS = {
    "schema": 1,
    "problem": "bilinear",
    "method": "stonr",
    "gamma": 1e-3,
    "epsilon": 1e-3,
    "alpha": 1e-3,
    "eta": 1e-2,
    "lambda": 1e-6,
    "init": None,
    "steps": 100_000,
    "ridge_correction": True,
    "seed": 0,
    "out": "out",
    "record_every": None,  # 1 for solve/check, 100 for compare
}


def _positive(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0


def validate_config(cfg: dict) -> list[str]:
    """Field-level validation; returns diagnostics, empty when valid."""
    errors = []
    for key in cfg:
        if key not in _DEFAULTS:
            errors.append(f"field '{key}': unknown field")
    if cfg.get("schema", 1) != 1:
        errors.append(f"field 'schema': expected 1, got {cfg.get('schema')!r}")
    if "problem" in cfg and cfg["problem"] not in BUILTIN_NAMES:
        errors.append(f"field 'problem': {cfg['problem']!r} not in {BUILTIN_NAMES}")
    if "method" in cfg and cfg["method"] not in METHODS:
        errors.append(f"field 'method': {cfg['method']!r} not in {METHODS}")
    for key in ("gamma", "epsilon", "alpha", "eta"):
        if key in cfg and not _positive(cfg[key]):
            errors.append(f"field '{key}': must be a positive number")
    if "lambda" in cfg and (not isinstance(cfg["lambda"], (int, float))
                            or isinstance(cfg["lambda"], bool) or cfg["lambda"] < 0):
        errors.append("field 'lambda': must be a nonnegative number")
    if "steps" in cfg and (not isinstance(cfg["steps"], int)
                           or isinstance(cfg["steps"], bool) or cfg["steps"] < 1):
        errors.append("field 'steps': must be a positive integer")
    if cfg.get("record_every") is not None and (
            not isinstance(cfg["record_every"], int) or cfg["record_every"] < 1):
        errors.append("field 'record_every': must be a positive integer")
    if "ridge_correction" in cfg and not isinstance(cfg["ridge_correction"], bool):
        errors.append("field 'ridge_correction': must be a boolean")
    if "seed" in cfg and (not isinstance(cfg["seed"], int)
                          or isinstance(cfg["seed"], bool)):
        errors.append("field 'seed': must be an integer")
    init = cfg.get("init")
    if init is not None:
        if (not isinstance(init, (list, tuple)) or
                not all(isinstance(c, (int, float)) and not isinstance(c, bool)
                        for c in init)):
            errors.append("field 'init': must be a list of numbers")
    if "out" in cfg and not isinstance(cfg["out"], str):
        errors.append("field 'out': must be a string")
    return errors


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise UsageError(f"config {path}: {err}") from err
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as err:
        raise UsageError(f"config {path}: line {err.lineno}: {err.msg}") from err
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path}: top level must be an object")
    return cfg


def _parse_point(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(c) for c in text.split(","))
    except ValueError as err:
        raise UsageError(f"--init expects comma-separated numbers, got {text!r}") from err


def _resolve(args) -> dict:
    """Merge defaults, config file, and flags (flags win); validate."""
    cfg = dict(_DEFAULTS)
    if args.config:
        file_cfg = load_config(args.config)
        errors = validate_config(file_cfg)
        if errors:
            raise UsageError(f"config {args.config}: " + "; ".join(errors))
        cfg.update(file_cfg)
    flag_map = {
        "problem": args.problem, "method": getattr(args, "method", None),
        "gamma": args.gamma, "epsilon": args.epsilon, "alpha": args.alpha,
        "eta": args.eta, "lambda": args.ftr_damping,
        "steps": args.steps, "seed": args.seed, "out": args.out,
        "record_every": args.record_every,
    }
    if getattr(args, "init", None):
        inits = [_parse_point(t) for t in args.init]
        flag_map["init"] = list(inits[0]) if len(inits) == 1 else [list(t) for t in inits]
    if args.no_ridge_correction:
        flag_map["ridge_correction"] = False
    cfg.update({k: v for k, v in flag_map.items() if v is not None})
    errors = validate_config({k: v for k, v in cfg.items() if k != "init"})
    if errors:
        raise UsageError("; ".join(errors))
    return cfg


def _solver_config(cfg: dict, dense: int = 1) -> SolverConfig:
    return SolverConfig(gamma=cfg["gamma"], epsilon=cfg["epsilon"],
                        alpha=cfg["alpha"], ridge_correction=cfg["ridge_correction"],
                        record_every=cfg["record_every"] or dense)


def _baseline(cfg: dict, kind: str) -> BaselineMethod:
    return BaselineMethod(kind=kind, eta=cfg["eta"], damping=cfg["lambda"],
                          budget=cfg["steps"], alpha=cfg["alpha"])


def _default_inits(domain) -> list[tuple[float, ...]]:
    lo, hi = domain.lower, domain.upper
    w = hi - lo
    return [tuple((lo + 0.5 * w).tolist()),
            tuple((lo + 0.05 * w).tolist()),
            tuple((lo + 0.75 * w).tolist())]


def _run_one(cfg: dict, method: str, init=None, dense: int = 1):
    p = builtin_problem(cfg["problem"])
    if method == "stonr":
        return p, run_stonr(p, _solver_config(cfg, dense))
    obj, _ = builtin(cfg["problem"])
    if init is None:
        init = _default_inits(p.domain)[0]
    return p, run_baseline(p, _baseline(cfg, method), np.asarray(init),
                           obj=obj, record_every=cfg["record_every"] or dense)


def _summary(p, traj, cfg: dict, runtime: float) -> dict:
    x = p.domain.to_unit(np.asarray(traj.final_x))
    return {
        "schema": 1,
        "problem": traj.problem,
        "method": traj.method,
        "status": traj.status,
        "final_x": list(traj.final_x),
        "final_gap": vi_gap(p, x),
        "final_residual": progress_residual(p, x),
        "steps": traj.steps,
        "epochs": len(traj.legs(positive_only=False)),
        "warnings": list(traj.warnings),
        "runtime_s": round(runtime, 3),
        "config": {k: v for k, v in cfg.items() if k != "out"},
    }


# -------------------------------- subcommands -------------------------------

def _cmd_solve(args) -> int:
    cfg = _resolve(args)
    init = cfg["init"]
    if init is not None and isinstance(init[0], (list, tuple)):
        raise UsageError("solve takes a single --init; repeat it only for compare")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    p, traj = _run_one(cfg, cfg["method"], init=init)
    runtime = time.perf_counter() - t0
    stem = f"{cfg['problem']}_{cfg['method']}"
    write_trajectory(traj, out / f"{stem}.csv")
    summary = _summary(p, traj, cfg, runtime)
    write_report(summary, out / f"{stem}_summary.json")
    print(f"{stem}: {traj.status}, final={traj.final_x}, "
          f"gap={summary['final_gap']:.3e}, steps={traj.steps}")
    return _EXIT_BY_STATUS[traj.status]


def _cmd_compare(args) -> int:
    cfg = _resolve(args)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    p = builtin_problem(cfg["problem"])
    init_cfg = cfg["init"]
    if init_cfg is None:
        inits = _default_inits(p.domain)
    elif init_cfg and isinstance(init_cfg[0], (list, tuple)):
        inits = [tuple(t) for t in init_cfg]
    else:
        inits = [tuple(init_cfg)]
    groups: dict[str, list] = {}
    summaries = []
    worst = 0
    for method in METHODS:
        runs = [("", None)] if method == "stonr" else \
            [(f"_init{k}", init) for k, init in enumerate(inits)]
        for tag, init in runs:
            t0 = time.perf_counter()
            _, traj = _run_one(cfg, method, init=init, dense=100)
            runtime = time.perf_counter() - t0
            stem = f"{cfg['problem']}_{method}{tag}"
            write_trajectory(traj, out / f"{stem}.csv")
            summaries.append({"run": stem, "init": list(init) if init else None,
                              **_summary(p, traj, cfg, runtime)})
            groups.setdefault(method, []).append(traj)
            if traj.status == ASSUMPTION_VIOLATION:
                worst = 3
            print(f"{stem}: {traj.status}, final={traj.final_x}")
    plot_comparison(groups, out / f"{cfg['problem']}_compare.svg")
    write_report({"schema": 1, "runs": summaries},
                 out / f"{cfg['problem']}_compare_summary.json")
    return worst


def _cmd_check(args) -> int:
    cfg = _resolve(args)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    p = builtin_problem(cfg["problem"])
    solver_cfg = _solver_config(cfg)
    traj = run_stonr(p, solver_cfg)
    write_trajectory(traj, out / f"{cfg['problem']}_stonr.csv")
    parity = parity_diagnostics(p, traj, solver_cfg)
    samples = collect_samples(p, traj, solver_cfg, seed=cfg["seed"])
    assumptions = check_assumptions(p, samples)
    report = {
        "schema": 1,
        "problem": cfg["problem"],
        "run_status": traj.status,
        "parity": parity.to_dict(),
        "assumptions": assumptions.to_dict(),
    }
    write_report(report, out / f"{cfg['problem']}_check.json")
    ok = parity.all_passed and assumptions.passed
    print(f"{cfg['problem']}: run={traj.status}, parity="
          f"{'pass' if parity.all_passed else 'FAIL'}, assumptions="
          f"{'pass' if assumptions.passed else 'FAIL'}")
    if traj.status in (MAX_EPOCHS, MAX_STEPS):
        return 2
    if traj.status == ASSUMPTION_VIOLATION or not ok:
        return 3
    return 0


def _cmd_plot(args) -> int:
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    for f in args.files:
        traj = read_trajectory(f)
        target = out / (Path(f).stem + ".svg")
        plot_trajectory(traj, target)
        print(f"wrote {target}")
    return 0


# ---------------------------------- driver ----------------------------------

def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", choices=BUILTIN_NAMES)
    common.add_argument("--gamma", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--eta", type=float)
    common.add_argument("--ftr-damping", type=float,
                        help="damping added to the maximizing-block Hessian (ftr)")
    common.add_argument("--init", action="append",
                        help="initial point 'x,y' in problem units (repeatable)")
    common.add_argument("--steps", type=int, help="baseline iteration budget")
    common.add_argument("--no-ridge-correction", action="store_true")
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--out", help="output directory (default 'out')")
    common.add_argument("--seed", type=int)
    common.add_argument("--record-every", type=int, dest="record_every")

    parser = _Parser(prog="ridge-solver",
                     description="Ridge-following solver for box-constrained "
                                 "variational inequalities, with baselines.")
    sub = parser.add_subparsers(dest="command", required=True)
    ps = sub.add_parser("solve", parents=[common], help="run one method on one problem")
    ps.add_argument("--method", choices=METHODS)
    ps.set_defaults(fn=_cmd_solve)
    pc = sub.add_parser("compare", parents=[common],
                        help="run every method on one problem")
    pc.set_defaults(fn=_cmd_compare)
    pk = sub.add_parser("check", parents=[common],
                        help="assumption and path-structure reports")
    pk.set_defaults(fn=_cmd_check)
    pp = sub.add_parser("plot", help="render trajectory CSVs to SVG")
    pp.add_argument("files", nargs="+", help="trajectory CSV files")
    pp.add_argument("--out", help="output directory (default 'out')")
    pp.set_defaults(fn=_cmd_plot)
    return parser


def dispatch(argv) -> int:
    level = os.environ.get("RIDGE_SOLVER_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (TrajectoryFormatError, ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
