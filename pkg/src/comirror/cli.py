"""Command-line front end: single runs, the benchmark suite, theory checks.

Exit codes: 0 normal, 1 usage error, 2 numerical failure (poisedness or
oracle breakdown).  All outputs are JSON (summaries, checks) or CSV
(histories, suite table), written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import checks
from .core import problem_from_json
from .problems import PROBLEM_NAMES, load_problem
from .sampling import STRATEGY_KINDS, SamplingStrategy
from .solver import (
    TERM_ORACLE,
    TERM_POISEDNESS,
    DeltaSchedule,
    SolverConfig,
    build_geometry,
    compute_bound_report,
    config_from_dict,
    history_csv,
    run,
    summary_payload,
)

OUTPUT_DIR_ENV = "COMIRROR_OUT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are exit 1
        raise UsageError(message)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="comirror", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--out", default=None, help="output directory "
                       f"(default ${OUTPUT_DIR_ENV} or the working directory)")

    p_run = sub.add_parser("run", help="solve one problem")
    p_run.add_argument("--problem", required=True,
                       help="built-in name (tp1..tp3, sim12) or a JSON file path")
    p_run.add_argument("--config", default=None, help="JSON solver config file")
    p_run.add_argument("--geometry", choices=["euclidean", "entropy"], default=None)
    p_run.add_argument("--entropy-shift", type=float, default=None)
    p_run.add_argument("--eps", type=float, default=None)
    p_run.add_argument("--budget-f", type=int, default=None)
    p_run.add_argument("--max-iter", type=int, default=None)
    p_run.add_argument("--M", type=float, default=None)
    p_run.add_argument("--strategy", choices=list(STRATEGY_KINDS), default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--weight-rule", choices=["first_active", "uniform_active"],
                       default=None)
    p_run.add_argument("--delta-scale", type=float, default=None)
    add_common(p_run)

    p_suite = sub.add_parser("suite", help="run the tp1..tp3 benchmark matrix")
    p_suite.add_argument("--eps", type=float, default=1e-3)
    p_suite.add_argument("--budget-f", type=int, default=200)
    p_suite.add_argument("--seed", type=int, default=0)
    add_common(p_suite)

    p_check = sub.add_parser("check", help="run the theory verification suites")
    p_check.add_argument("--nmax", type=int, default=100_000,
                         help="upper n for the harmonic window sweep")
    add_common(p_check)

    return parser


def _output_dir(args) -> Path:
    out = args.out or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_problem(token: str):
    if token in PROBLEM_NAMES:
        named = load_problem(token)
        return token, named.spec
    path = Path(token)
    if not path.exists():
        raise UsageError(f"unknown problem {token!r}: not a built-in name "
                         "and no such file")
    return path.stem, problem_from_json(path)


def _build_config(args) -> SolverConfig:
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as handle:
            config = config_from_dict(json.load(handle))
    else:
        config = SolverConfig()
    updates = {}
    if args.eps is not None:
        updates["eps"] = args.eps
    if args.M is not None:
        updates["M"] = args.M
    if args.max_iter is not None:
        updates["max_iterations"] = args.max_iter
    if args.budget_f is not None:
        updates["f_eval_budget"] = args.budget_f
    if args.geometry is not None:
        updates["geometry"] = args.geometry
    if args.entropy_shift is not None:
        updates["entropy_shift"] = args.entropy_shift
    if args.weight_rule is not None:
        updates["weight_rule"] = args.weight_rule
    if args.delta_scale is not None:
        if args.delta_scale == 1.0:
            updates["delta_schedule"] = DeltaSchedule()
        else:
            updates["delta_schedule"] = DeltaSchedule("scaled", args.delta_scale)
    strategy = config.strategy
    if args.strategy is not None:
        strategy = SamplingStrategy(args.strategy, strategy.seed,
                                    strategy.max_resamples)
    if args.seed is not None:
        strategy = SamplingStrategy(strategy.kind, args.seed,
                                    strategy.max_resamples)
    if strategy is not config.strategy:
        updates["strategy"] = strategy
    if not updates:
        return config
    from dataclasses import replace

    return replace(config, **updates)


def cmd_run(args) -> int:
    label, problem = _resolve_problem(args.problem)
    try:
        config = _build_config(args)
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc
    result = run(problem, config)
    diagnostics = None
    if (
        problem.constants is not None
        and problem.known_optimum is not None
        and len(result.history) >= 4
    ):
        geom = build_geometry(config, problem.box)
        diagnostics = compute_bound_report(result, problem, config, geom,
                                           problem.box)
    out = _output_dir(args)
    summary = summary_payload(label, problem, config, result, diagnostics)
    _atomic_write(out / f"{label}.summary.json", _json_text(summary))
    _atomic_write(out / f"{label}.history.csv",
                  history_csv(result, problem.dimension))
    best = "none" if result.best is None else f"{result.best.f:.6g}"
    print(f"{label}: termination={result.termination} best_f={best} "
          f"f_evals={result.counters.f_calls} g_evals={result.counters.g_calls}")
    if result.termination in (TERM_POISEDNESS, TERM_ORACLE):
        return 2
    return 0


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def cmd_suite(args) -> int:
    rows = checks.benchmark_suite(eps=args.eps, budget=args.budget_f,
                                  seed=args.seed)
    header = ["problem", "geometry", "final_f", "f_evals", "g_evals",
              "reference_f", "gap_to_optimum"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join([
            row.problem,
            row.geometry,
            _csv_cell(row.final_f),
            str(row.f_evals),
            str(row.g_evals),
            _csv_cell(row.reference_f),
            _csv_cell(row.gap_to_optimum),
        ]))
    out = _output_dir(args)
    _atomic_write(out / "suite.csv", "\n".join(lines) + "\n")
    for row in rows:
        shown = "failed" if row.final_f is None else f"{row.final_f:.6g}"
        print(f"{row.problem}/{row.geometry}: final_f={shown} "
              f"f_evals={row.f_evals} g_evals={row.g_evals}")
    if all(row.final_f is None for row in rows):
        return 2
    return 0


def cmd_check(args) -> int:
    payload = {}

    harmonic = checks.check_harmonic_window(args.nmax)
    payload["harmonic_window"] = {"ok": harmonic.ok, "checked": harmonic.checked}

    convexity = checks.check_strong_convexity()
    payload["strong_convexity"] = {
        "ok": all(r.ok for r in convexity),
        "conditions": {r.name: {"violations": r.violations, "worst": r.worst}
                       for r in convexity},
    }

    grid = checks.check_mirror_step_grid()
    payload["mirror_step_grid"] = {
        "ok": grid.ok, "checked": grid.checked, "worst": grid.worst,
    }

    bounds = checks.check_bound_reports()
    payload["bound_reports"] = {
        "ok": all(r.ok for r in bounds),
        "runs": {r.name: {"checked": r.checked, "violations": r.violations}
                 for r in bounds},
    }

    all_ok = all(section["ok"] for section in payload.values())
    payload["all_ok"] = all_ok
    out = _output_dir(args)
    _atomic_write(out / "check.json", _json_text(payload))
    for name, section in payload.items():
        if isinstance(section, dict):
            print(f"{name}: {'ok' if section['ok'] else 'FAIL'}")
    return 0 if all_ok else 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand == "run":
            return cmd_run(args)
        if args.subcommand == "suite":
            return cmd_suite(args)
        return cmd_check(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
