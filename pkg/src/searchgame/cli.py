"""Command-line entry point: ``searchgame <subcommand> ...``.

Exit status is 0 on success, 1 for bad input and 2 for numerical failure.
Box indices in all output are 1-based; floats carry 12 significant digits.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .core import SearchGameError, as_strategy, load_instance
from .experiments import (
    future_benefit_scatter,
    records_csv,
    run_scheme_study,
    scatter_csv,
    SCHEMES,
)
from .gittins import CycleNotFound
from .matrix_game import NumericalFailure
from .solver import (
    SolverConfig,
    compute_p0,
    ruckle_h,
    run_algorithm1,
    test_hiding_optimality,
    verify_solution,
)
from .valuation import (
    BudgetExceeded,
    expected_time_bounds,
    gittins_counter,
    monte_carlo_oracle,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2
NUMERICAL_ERRORS = (NumericalFailure, BudgetExceeded, CycleNotFound)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _round(obj):
    """Recursively round floats to 12 significant digits for output."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return obj
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _round(obj.tolist())
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


def _vector(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ordering(text: str) -> list[int]:
    try:
        return [int(v) - 1 for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated box numbers, got {text!r}") from None


def _config(args) -> SolverConfig:
    try:
        return SolverConfig(
            eps=args.eps,
            max_iter=args.max_iter,
            beta=args.beta,
            interior_threshold=args.interior_threshold,
            permutation_cap=args.permutation_cap,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_solver_options(p: argparse.ArgumentParser) -> None:
    d = SolverConfig()
    p.add_argument("--eps", type=float, default=d.eps, help="relative gap tolerance")
    p.add_argument("--max-iter", type=int, default=d.max_iter)
    p.add_argument("--beta", type=float, default=d.beta, help="perturbation scaler in (0, 1)")
    p.add_argument("--interior-threshold", type=float, default=d.interior_threshold)
    p.add_argument("--permutation-cap", type=int, default=d.permutation_cap)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="searchgame", description="Search games with overlook probabilities.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--out", type=Path, help="write the result here instead of stdout")
        return p

    p = command("solve", "bound the game value and return optimal strategies")
    p.add_argument("--instance", type=Path, required=True)
    _add_solver_options(p)

    p = command("test-p0", "check whether p0 is optimal for the hider")
    p.add_argument("--instance", type=Path, required=True)
    _add_solver_options(p)

    p = command("value", "expected detection times of a Gittins counter to a hiding strategy")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--hider", type=_vector, help="comma-separated probabilities (default p0)")
    p.add_argument("--tie-break", type=_ordering, help="preference ordering, e.g. 2,1")

    p = command("ruckle", "closed-form solution of the two-box game with a sure box")
    p.add_argument("--q", type=float, required=True)

    p = command("study", "how far p0 falls short of the value on random instances")
    p.add_argument("--scheme", choices=sorted(SCHEMES), default="varied")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--cyclic", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _add_solver_options(p)

    p = command("scatter", "future benefit against the optimal-strategy log odds")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _add_solver_options(p)

    p = command("simulate", "Monte Carlo check of the analytic detection times")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--hider", type=_vector, help="strategy the sequence counters (default p0)")
    p.add_argument("--tie-break", type=_ordering)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _hider(args, instance):
    return compute_p0(instance) if args.hider is None else as_strategy(args.hider)


def cmd_solve(args) -> str:
    instance = load_instance(args.instance)
    config = _config(args)
    sol = run_algorithm1(instance, config)
    out = sol.to_dict()
    out["verification"] = verify_solution(instance, sol, tol=10 * config.eps).to_dict()
    return _dump_json(out)


def cmd_test_p0(args) -> str:
    instance = load_instance(args.instance)
    p0 = compute_p0(instance)
    verdict = test_hiding_optimality(instance, p0, _config(args))
    out = verdict.to_dict()
    out["p0"] = p0.probs
    return _dump_json(out)


def cmd_value(args) -> str:
    instance = load_instance(args.instance)
    p = _hider(args, instance)
    seq, prof = gittins_counter(instance, p, args.tie_break)
    lo, hi = expected_time_bounds(p, prof)
    return _dump_json({
        "hider": p.probs,
        "V": prof.to_dict(),
        "expected_time": 0.5 * (lo + hi),
        "expected_time_bounds": [lo, hi],
        "sequence": seq.to_dict(),
    })


def cmd_ruckle(args) -> str:
    if not 0.0 < args.q < 1.0:
        raise UsageError("--q must lie in (0, 1)")
    r = ruckle_h(args.q)
    return _dump_json({"q": r.q, "h_bar": r.h_bar, "h": r.h, "p_star": r.p_star})


def cmd_study(args) -> str:
    if args.count < 1 or args.n < 1:
        raise UsageError("--count and --n must be positive")
    records, summary = run_scheme_study(
        args.scheme, args.n, args.count, _config(args), args.seed, args.cyclic, args.jobs
    )
    if args.format == "csv":
        return records_csv(records)
    return _dump_json({
        "scheme": args.scheme,
        "n": args.n,
        "cyclic": args.cyclic,
        "seed": args.seed,
        "summary": summary.to_dict(),
        "records": [vars(r) for r in records],
    })


def cmd_scatter(args) -> str:
    if args.count < 1:
        raise UsageError("--count must be positive")
    rows, summary = future_benefit_scatter(args.count, _config(args), args.seed, args.jobs)
    if args.format == "csv":
        return scatter_csv(rows)
    return _dump_json({"summary": summary.to_dict(), "rows": [vars(r) for r in rows]})


def cmd_simulate(args) -> str:
    instance = load_instance(args.instance)
    p = _hider(args, instance)
    seq, prof = gittins_counter(instance, p, args.tie_break)
    boxes = []
    for i in range(instance.n):
        mean, se = monte_carlo_oracle(instance, i, seq, args.trials, args.seed + i)
        v = float(prof.values[i])
        boxes.append({
            "box": i + 1,
            "V_analytic": v,
            "V_mc": mean,
            "se": se,
            "z": (mean - v) / se if se > 0 else 0.0,
        })
    return _dump_json({"trials": args.trials, "seed": args.seed, "sequence": seq.to_dict(), "boxes": boxes})


COMMANDS = {
    "solve": cmd_solve,
    "test-p0": cmd_test_p0,
    "value": cmd_value,
    "ruckle": cmd_ruckle,
    "study": cmd_study,
    "scatter": cmd_scatter,
    "simulate": cmd_simulate,
}


def dispatch(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = COMMANDS[args.command](args)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, SearchGameError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch())
