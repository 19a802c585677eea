"""Command-line benchmark driver.

Examples::

    abel-hp list
    abel-hp run --problem ex3 --N 10,20,40 --M 3
    abel-hp run --problem ex1 --alpha 0.3 --N 2 --M 3,5,7 --format json
    abel-hp run --problem ex2 --N 32,64,128 --M 2 --noise h^2.5 --out table.csv
    abel-hp run --problem ex4 --N 1 --M 2 --adaptive p_first --tol 1e-13
    abel-hp run --config run.json

Exit codes: 0 on success, 2 when any sweep row failed, 1 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .adaptive import AdaptiveOptions, AdaptiveTrace, BudgetExceededError, adaptive_solve
from .bench import (
    PROBLEM_IDS,
    BenchReport,
    BenchRow,
    make_benchmark,
    mesh_for,
    reference_solution,
    report_to_csv,
    report_to_json,
    run_mesh,
    run_sweep,
)
from .mesh import Mesh
from .solver import SolverOptions


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise _UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise _UsageError(f"expected a comma-separated integer list, got {text!r}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="abel-hp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="print the benchmark registry")

    run = sub.add_parser("run", help="run a refinement sweep or an adaptive solve")
    run.add_argument("--problem", help="registry id (ex1..ex6 or full name)")
    run.add_argument("--alpha", type=float, help="singularity exponent (ex1 only)")
    run.add_argument("--N", help="comma list of element counts")
    run.add_argument("--M", help="comma list of basis counts per element (degree + 1)")
    run.add_argument("--noise", help="right-hand side noise: a float or h^<power>")
    run.add_argument("--tol", type=float, help="adaptive target error")
    run.add_argument("--adaptive", choices=("p_first", "h_first", "alternate"),
                     help="run the adaptive loop from the first (N, M) pair")
    run.add_argument("--max-L", type=int, default=200, help="adaptive unknown budget")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--out", help="output path (default: stdout)")
    run.add_argument("--config", help="JSON config file; flags override its entries")
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read config {path}: {exc}") from exc


def _sweep_pairs(Ns, Ms):
    if len(Ns) == len(Ms):
        return list(zip(Ns, Ms))
    if len(Ns) == 1:
        return [(Ns[0], m) for m in Ms]
    if len(Ms) == 1:
        return [(n, Ms[0]) for n in Ns]
    raise _UsageError("--N and --M lists must have equal length (or one be scalar)")


def _cmd_list(out) -> int:
    rows = []
    for pid in PROBLEM_IDS:
        bench = make_benchmark(pid, 0.5 if pid == "ex1_singular" else None)
        alpha = "parameter" if bench.alpha_parameterized else f"{bench.spec.alpha:g}"
        rows.append(
            (
                pid,
                alpha,
                f"{bench.spec.T:g}",
                "linear" if bench.spec.linear else "nonlinear",
                "yes" if bench.exact is not None else "baseline",
                bench.description,
            )
        )
    header = ("id", "alpha", "T", "kind", "exact", "description")
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]
    for r in [header] + rows:
        print("  ".join(str(v).ljust(w) for v, w in zip(r, widths)), file=out)
    return 0


def _adaptive_report(bench, mesh: Mesh, options, tol, strategy, max_L) -> BenchReport:
    reference = reference_solution(bench)
    adapt = AdaptiveOptions(tol=tol, strategy=strategy, max_L=max_L,
                            error_metric="E2_vs_reference")
    budget_hit = False
    try:
        solution, trace = adaptive_solve(
            bench.spec, mesh, adapt, reference=reference, solver_options=options
        )
    except BudgetExceededError as exc:
        trace, budget_hit = exc.trace, True
    report = BenchReport(bench.id)
    for step in trace.steps:
        report.rows.append(
            BenchRow(
                N=step.mesh.N,
                M=int(np.max(step.mesh.degrees)) + 1,
                L=step.L,
                E2=step.estimate if np.isfinite(step.estimate) else None,
                runtime_s=step.elapsed_s,
            )
        )
    if budget_hit and report.rows:
        report.rows[-1].failed = True
        report.rows[-1].error = "refinement budget exhausted before reaching tol"
    return report


def _cmd_run(args) -> int:
    cfg = _load_config(args.config) if args.config else {}

    problem = args.problem or cfg.get("problem")
    if not problem:
        raise _UsageError("--problem (or a config entry) is required")
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha")
    try:
        bench = make_benchmark(problem, alpha)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc

    solver_cfg = dict(cfg.get("solver", {}))
    solver_cfg.setdefault("init_constant", bench.init_constant)
    try:
        options = SolverOptions(**solver_cfg)
    except (TypeError, ValueError) as exc:
        raise _UsageError(f"bad solver options: {exc}") from exc

    mesh_cfg = cfg.get("mesh", {})
    Ns = _int_list(args.N) if args.N else None
    Ms = _int_list(args.M) if args.M else None
    explicit_mesh = None
    sweep = None
    if "breakpoints" in mesh_cfg and not (Ns or Ms or "sweep" in cfg):
        explicit_mesh = Mesh.from_config(mesh_cfg, T=bench.spec.T)
    elif "sweep" in cfg and not (Ns or Ms):
        sweep = [(int(n), int(m)) for n, m in cfg["sweep"]]
    else:
        if Ns is None:
            Ns = [int(mesh_cfg["N"])] if "N" in mesh_cfg else None
        if Ms is None:
            Ms = [int(mesh_cfg["M"])] if "M" in mesh_cfg else None
        if not Ns or not Ms:
            raise _UsageError("need --N and --M (or config mesh/sweep entries)")
        sweep = _sweep_pairs(Ns, Ms)

    noise = args.noise if args.noise is not None else cfg.get("noise")
    strategy = args.adaptive or cfg.get("adaptive", {}).get("strategy")
    tol = args.tol if args.tol is not None else cfg.get("adaptive", {}).get("tol")

    if strategy:
        if tol is None:
            raise _UsageError("adaptive runs need --tol")
        if explicit_mesh is not None:
            mesh = explicit_mesh
        else:
            N0, M0 = sweep[0]
            mesh = mesh_for(bench, N0, M0)
        max_L = cfg.get("adaptive", {}).get("max_L", args.max_L)
        report = _adaptive_report(bench, mesh, options, tol, strategy, max_L)
    elif explicit_mesh is not None:
        report = BenchReport(bench.id)
        report.rows.append(run_mesh(bench, explicit_mesh, options, noise))
    else:
        report = run_sweep(bench, sweep, options=options, noise=noise)

    fmt = args.format or cfg.get("format", "csv")
    text = report_to_json(report) if fmt == "json" else report_to_csv(report)
    out_path = args.out or cfg.get("out")
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 2 if report.any_failed else 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "list":
            return _cmd_list(sys.stdout)
        return _cmd_run(args)
    except _UsageError as exc:
        print(f"abel-hp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
