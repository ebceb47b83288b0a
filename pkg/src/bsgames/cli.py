"""Command-line entry point.

Exit codes: 0 success, 2 parse or validation error, 3 solver did not
converge, 4 file I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .best_response import SolverConfig, best_response
from .costs import check_profile, InfeasibleProfileError
from .equilibrium import DynamicsConfig, find_equilibria
from .io import emit_sweep_csv, load_scenario, make_report, write_report
from .metrics import PobaError, poba, social_optimum, sweep
from .scenario import Scenario, ScenarioError, validate

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("bsgames")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def parse_range(text: str) -> list[float]:
    """``start:stop:steps`` -> ``steps`` evenly spaced values, both ends included."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:steps, got {text!r}") from None
    if n < 1 or (n == 1 and a != b):
        raise argparse.ArgumentTypeError(f"bad step count in {text!r}")
    return [float(v) for v in np.round(np.linspace(a, b, n), 12)]


def _edge_label(scenario: Scenario, i: int) -> str:
    e = scenario.graph.edges[i]
    return f"{e.src}->{e.dst}"


def _print_allocation(scenario: Scenario, x, indent: str = "  ", out=None):
    out = out or sys.stdout
    nz = [i for i in range(len(x)) if x[i] > 1e-9]
    if not nz:
        print(f"{indent}(no investment)", file=out)
    for i in nz:
        print(f"{indent}{_edge_label(scenario, i):<20} {x[i]:.6f}", file=out)


def load_profile(path, scenario: Scenario) -> np.ndarray:
    """Profile file: ``{"profile": [[...], ...]}`` with rows in defender order,
    ``{"profile": {"D2": [...]}}`` by id, or a ``pne`` report (first equilibrium)."""
    data = json.loads(Path(path).read_text())
    if "result" in data and "equilibria" in data.get("result", {}):
        eqs = data["result"]["equilibria"]
        if not eqs:
            raise CliError(f"{path}: report holds no equilibria", EXIT_INPUT)
        data = {"profile": eqs[0]["profile"]}
    raw = data.get("profile") if isinstance(data, dict) else data
    prof = scenario.zero_profile()
    try:
        if isinstance(raw, dict):
            for did, row in raw.items():
                prof[scenario.index(did)] = np.asarray(row, dtype=float)
        else:
            prof[:] = np.asarray(raw, dtype=float)
        return check_profile(scenario, prof)
    except (KeyError, ValueError, InfeasibleProfileError) as exc:
        raise CliError(f"{path}: bad profile: {exc}", EXIT_INPUT) from None


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(seed=args.seed)


def _dyn_cfg(args) -> DynamicsConfig:
    return DynamicsConfig(n_starts=args.restarts, seed=args.seed, order=args.order,
                          max_rounds=args.max_rounds, solver=_solver_cfg(args))


def _report_path(args, command: str) -> Path:
    if args.report:
        return Path(args.report)
    return Path(f"{Path(args.file).stem}.{command}.json")


def _emit(args, command, scenario, result, config, t0, seed=None):
    rep = make_report(command, scenario, result, seed=seed, config=config,
                      timings={"total_seconds": time.perf_counter() - t0})
    path = _report_path(args, command)
    write_report(rep, path)
    print(f"report: {path}")


# -- subcommands ----------------------------------------------------------------

def cmd_validate(args, scenario: Scenario) -> int:
    t0 = time.perf_counter()
    diags = validate(scenario.graph, scenario)
    for d in diags:
        print(str(d))
    g = scenario.graph
    print(f"ok: {len(g.nodes)} nodes, {g.n_edges} edges, {len(scenario.defenders)} defenders")
    _emit(args, "validate", scenario,
          {"valid": True, "nodes": len(g.nodes), "edges": g.n_edges,
           "defenders": len(scenario.defenders), "diagnostics": [str(d) for d in diags]},
          None, t0)
    return EXIT_OK


def cmd_best_response(args, scenario: Scenario) -> int:
    t0 = time.perf_counter()
    try:
        scenario.index(args.defender)
    except KeyError:
        raise CliError(f"unknown defender {args.defender!r}; have {scenario.ids}", EXIT_INPUT)
    fixed = load_profile(args.fixed, scenario) if args.fixed else None
    cfg = _solver_cfg(args)
    rep = best_response(scenario, args.defender, fixed, cfg)
    print(f"best response of {args.defender}:")
    _print_allocation(scenario, rep.x)
    print(f"perceived cost {rep.perceived_cost:.10g}  true cost {rep.true_cost:.10g}")
    _emit(args, "best-response", scenario, {"best_response": rep.to_dict()}, cfg, t0, args.seed)
    if not rep.converged:
        print(f"solver did not converge: {rep.message}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _find(args, scenario):
    cfg = _dyn_cfg(args)
    starts = [load_profile(p, scenario) for p in args.start or ()]
    return find_equilibria(scenario, cfg, starts=starts), cfg


def cmd_pne(args, scenario: Scenario) -> int:
    t0 = time.perf_counter()
    eqs, cfg = _find(args, scenario)
    print(f"{len(eqs)} distinct verified PNE")
    for n, e in enumerate(eqs, 1):
        print(f"PNE {n}: rounds {e.rounds}, max residual {e.max_residual:.2e}, "
              f"total true cost {e.total_true_cost:.10g}")
        for k, d in enumerate(scenario.defenders):
            print(f"  {d.id}: perceived {e.perceived_costs[d.id]:.10g}  true {e.true_costs[d.id]:.10g}")
            _print_allocation(scenario, e.profile[k], indent="    ")
    _emit(args, "pne", scenario, {"equilibria": [e.to_dict() for e in eqs]}, cfg, t0, args.seed)
    return EXIT_OK if eqs else EXIT_SOLVER


def cmd_social_opt(args, scenario: Scenario) -> int:
    t0 = time.perf_counter()
    cfg = _solver_cfg(args)
    so = social_optimum(scenario, cfg)
    print(f"social optimum (pooled budget {so.budget:g}): total true cost {so.cost:.10g}")
    _print_allocation(scenario, so.x)
    _emit(args, "social-opt", scenario, {"social_optimum": so.to_dict()}, cfg, t0, args.seed)
    return EXIT_OK if so.converged else EXIT_SOLVER


def cmd_poba(args, scenario: Scenario) -> int:
    t0 = time.perf_counter()
    eqs, cfg = _find(args, scenario)
    so = social_optimum(scenario, cfg.solver)
    if not eqs or not so.converged:
        print("no verified PNE found" if not eqs else "social optimum did not converge",
              file=sys.stderr)
        return EXIT_SOLVER
    rep = poba(scenario, eqs, so)
    print(f"PNE found: {len(eqs)}; worst total true cost {rep.worst_pne_cost:.10g}")
    print(f"social optimum cost {rep.social_cost:.10g}")
    print(f"PoBA estimate (lower bound over found PNE) {rep.poba:.10g}; exp(B) bound {rep.upper_bound:.6g}")
    _emit(args, "poba", scenario,
          {"poba": rep.to_dict(), "social_optimum": so.to_dict(),
           "equilibria": [e.to_dict() for e in eqs]}, cfg, t0, args.seed)
    return EXIT_OK


def cmd_sweep(args, scenario: Scenario) -> int:
    t0 = time.perf_counter()
    cfg = _dyn_cfg(args)

    def progress(row):
        status = row.error or f"inefficiency {row.inefficiency:.6g}"
        print(f"alpha {row.alpha:g}  budget {row.budget:g}: {status}  ({row.seconds:.1f}s)", flush=True)

    rows = sweep(scenario, args.alpha, args.budget, cfg, cache_dir=args.cache, progress=progress)
    emit_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    _emit(args, "sweep", scenario, {"rows": [r.__dict__ for r in rows]}, cfg, t0, args.seed)
    return EXIT_SOLVER if any(r.error for r in rows) else EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bsgames", description="Behavioral security games on attack graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="scenario JSON file")
    common.add_argument("--report", help="report JSON path (default: <scenario>.<command>.json)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    dyn = argparse.ArgumentParser(add_help=False)
    dyn.add_argument("--restarts", type=int, default=10, help="random starting profiles")
    dyn.add_argument("--order", choices=["round-robin", "random"], default="round-robin")
    dyn.add_argument("--max-rounds", type=int, default=200)
    dyn.add_argument("--start", action="append", metavar="PROFILE",
                     help="extra starting profile file (repeatable)")

    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check a scenario file").set_defaults(fn=cmd_validate)
    br = sub.add_parser("best-response", parents=[common], help="one defender's best response")
    br.add_argument("--defender", required=True)
    br.add_argument("--fixed", metavar="PROFILE", help="other defenders' investments")
    br.set_defaults(fn=cmd_best_response)
    sub.add_parser("pne", parents=[common, dyn], help="search for pure Nash equilibria").set_defaults(fn=cmd_pne)
    sub.add_parser("social-opt", parents=[common], help="pooled-budget planner optimum").set_defaults(fn=cmd_social_opt)
    sub.add_parser("poba", parents=[common, dyn], help="price of behavioral anarchy estimate").set_defaults(fn=cmd_poba)
    sw = sub.add_parser("sweep", parents=[common, dyn], help="inefficiency over an alpha x budget grid")
    sw.add_argument("--alpha", type=parse_range, required=True, metavar="A0:A1:STEPS")
    sw.add_argument("--budget", type=parse_range, required=True, metavar="B0:B1:STEPS")
    sw.add_argument("--out", required=True, help="CSV output path")
    sw.add_argument("--cache", help="directory for resumable per-cell results")
    sw.set_defaults(fn=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help/--version, 2 for usage errors
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scenario = load_scenario(args.file)
        return args.fn(args, scenario)
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PobaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, json.JSONDecodeError) as exc:
        code = EXIT_IO if isinstance(exc, OSError) else EXIT_INPUT
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
