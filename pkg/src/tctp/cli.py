"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 invalid/infeasible input,
4 oracle size guard exceeded, 5 unknown method/formulation/suite,
6 verification failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from tctp import bench
from tctp.core import InstanceError, InvalidScheduleError, Variant, _evaluate_unchecked, evaluate, pad_to_full
from tctp.exact import OracleTooLarge, brute_force_optimum, dp_two_slots, fptas_two_slots, iter_schedules
from tctp.fileio import FormatError, read_instance, read_rational, write_instance, write_schedule
from tctp.heuristics import GreedyTooLarge, greedy_min_ratio, initial_partitions, local_search, multi_start
from tctp.instgen import GenConfig, ReductionError, gen_greedy_gap, gen_random, reduce_search_to_testing
from tctp.mip import (
    ModelError,
    add_precedence,
    add_slot_costs,
    build_model,
    emit_lp,
    model_metadata,
    parse_lp,
    point_from_solution,
    schedule_from_point,
    verify_point,
)

EXIT_OK = 0
EXIT_INVALID = 3
EXIT_TOO_LARGE = 4
EXIT_UNKNOWN = 5
EXIT_VERIFY_FAILED = 6

METHODS = ("oracle", "dp2", "fptas", "greedy", "localsearch", "multistart")
SUITES = ("table4", "table5", "gapfamilies", "invariants")
REDUCTION_MAX_N = 6


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_instance(path: str):
    return read_instance(Path(path).read_text())


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _q_range(text: str) -> tuple[Fraction, Fraction]:
    lo, hi = (read_rational(part) for part in text.split(","))
    return lo, hi


def cmd_generate(args) -> int:
    variant = Variant(args.variant)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    if args.family == "greedy-gap":
        instance = gen_greedy_gap(args.M)
        path = out_dir / f"greedy_gap_M{args.M}.json"
        path.write_text(write_instance(instance))
        manifest.append({"path": path.name, "family": "greedy-gap", "M": args.M})
    else:
        if args.m is None or args.T is None:
            raise CliError("--m and --T are required for random instances", 2)
        for idx in range(args.count):
            config = GenConfig(
                m=args.m,
                T=args.T,
                seed=args.seed + idx,
                cost_max=args.cost_max,
                weight_max=args.weight_max,
                q_range=_q_range(args.q_range),
            )
            instance = gen_random(config, variant)
            path = out_dir / f"{variant.value}_m{args.m}_T{args.T}_s{config.seed}.json"
            path.write_text(write_instance(instance))
            manifest.append(
                {
                    "path": path.name,
                    "family": "random",
                    "variant": variant.value,
                    "seed": config.seed,
                    "m": config.m,
                    "T": config.T,
                    "cost_max": config.cost_max,
                    "weight_max": config.weight_max,
                    "q_range": [str(q) for q in config.q_range],
                }
            )
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(manifest)} instance(s) to {out_dir}")
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.method not in METHODS:
        raise CliError(f"unknown method {args.method!r}; choose from {', '.join(METHODS)}", EXIT_UNKNOWN)
    instance = _load_instance(args.instance)
    if args.method == "oracle":
        report = brute_force_optimum(instance, args.node_limit)
    elif args.method == "dp2":
        report = dp_two_slots(instance)
    elif args.method == "fptas":
        report = fptas_two_slots(instance, read_rational(args.epsilon))
    elif args.method == "greedy":
        report = greedy_min_ratio(instance)
    elif args.method == "localsearch":
        report = local_search(instance, initial_partitions(instance)["ratio"], strategy=args.strategy)
    else:
        report = multi_start(instance, strategy=args.strategy)
    payload = {
        "method": report.method,
        "status": report.status_label,
        "objective": bench.format_decimal(report.objective),
        "objective_exact": bench.format_exact(report.objective),
        "elapsed_s": round(report.elapsed, 6),
        "schedule": json.loads(write_schedule(report.schedule)),
    }
    _write(args.out, json.dumps(payload, indent=2) + "\n")
    if args.out:
        print(f"{report.method}: objective {payload['objective']} ({payload['status']})")
    return EXIT_OK


def _read_arcs(path: str) -> list[tuple[int, int]]:
    arcs = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            i, j = (int(tok) for tok in line.split())
            arcs.append((i - 1, j - 1))
    return arcs


def cmd_emit_mip(args) -> int:
    if args.formulation not in ("po", "assign"):
        raise CliError(f"unknown formulation {args.formulation!r}", EXIT_UNKNOWN)
    instance = _load_instance(args.instance)
    original_n = instance.n
    if args.formulation == "po":
        instance = pad_to_full(instance).instance
    model = build_model(args.formulation, instance)
    if args.precedence:
        model = add_precedence(model, _read_arcs(args.precedence))
    if args.beta:
        model = add_slot_costs(model, [read_rational(tok) for tok in Path(args.beta).read_text().split()])
    _write(args.out, emit_lp(model))
    if args.out:
        meta_path = Path(str(args.out) + ".meta.json")
        meta_path.write_text(json.dumps(model_metadata(model, original_n), indent=1) + "\n")
        print(f"wrote {args.out} ({len(model.variables)} variables, {len(model.constraints)} constraints)")
    return EXIT_OK


def cmd_verify_point(args) -> int:
    model = parse_lp(Path(args.model).read_text())
    point = point_from_solution(Path(args.solution).read_text(), model)
    check = verify_point(model, point, read_rational(args.tol))
    lines = [f"feasible: {check.feasible}", f"model objective: {bench.format_decimal(check.objective)}"]
    for name, slack in check.violations[:50]:
        lines.append(f"  violated {name}: slack {bench.format_decimal(slack)}")
    if len(check.violations) > 50:
        lines.append(f"  ... {len(check.violations) - 50} more")
    if args.instance and model.meta:
        instance = _load_instance(args.instance)
        schedule = schedule_from_point(model, point)
        schedule = tuple(frozenset(j for j in slot if j < instance.n) for slot in schedule)
        try:
            value = evaluate(instance, schedule)
            lines.append(f"schedule: {write_schedule(schedule).strip()}")
            lines.append(f"schedule objective: {bench.format_decimal(value)}")
        except InvalidScheduleError as exc:
            lines.append(f"schedule invalid: {exc}")
            check.feasible = False
    print("\n".join(lines))
    return EXIT_OK if check.feasible else EXIT_VERIFY_FAILED


def cmd_verify_reduction(args) -> int:
    instance = _load_instance(args.instance)
    if instance.n > REDUCTION_MAX_N:
        raise CliError(f"exhaustive check limited to n <= {REDUCTION_MAX_N}", EXIT_TOO_LARGE)
    alpha = read_rational(args.alpha)
    testing, params = reduce_search_to_testing(instance, alpha)
    total = holds = 0
    for schedule in iter_schedules(instance.n, instance.T, instance.m):
        total += 1
        search_yes = _evaluate_unchecked(instance, schedule) <= alpha
        testing_yes = _evaluate_unchecked(testing, schedule) < params.beta
        holds += search_yes == testing_yes
    print(f"W={params.W} M={params.M} gamma={params.gamma} beta={params.beta}")
    print(f"equivalence holds for {holds}/{total} schedules")
    return EXIT_OK if holds == total else EXIT_VERIFY_FAILED


def cmd_bench(args) -> int:
    if args.suite not in SUITES:
        raise CliError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", EXIT_UNKNOWN)
    if args.suite == "table4":
        rows, summary = bench.run_table4(args.count, args.seed, args.jobs)
        _write(args.out, bench.write_csv(rows))
        summary_csv = bench.write_csv(summary, list(summary[0]))
        if args.out and args.out != "-":
            out = Path(args.out)
            _write(str(out.with_name(out.stem + "_summary.csv")), summary_csv)
        sys.stderr.write(summary_csv)
    elif args.suite == "table5":
        ranges = [int(r) for r in args.ranges.split(",")]
        rows = bench.run_table5(ranges, args.reps, args.seed)
        _write(args.out, bench.write_csv(rows, list(rows[0])))
    elif args.suite == "gapfamilies":
        _write(args.out, bench.write_csv(bench.run_gap_families()))
    else:
        rows = bench.run_invariants(args.count, args.seed)
        _write(args.out, bench.write_csv(rows, list(rows[0])))
        if any(r["violations"] for r in rows):
            return EXIT_VERIFY_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tctp", description="Time-critical testing and search solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write random or adversarial instances plus a manifest")
    g.add_argument("--variant", choices=[v.value for v in Variant], default="testing")
    g.add_argument("--family", choices=["random", "greedy-gap"], default="random")
    g.add_argument("--m", type=int)
    g.add_argument("--T", type=int)
    g.add_argument("--M", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--q-range", default="0.01,0.30")
    g.add_argument("--cost-max", type=int, default=10)
    g.add_argument("--weight-max", type=int, default=1000)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("--instance", required=True)
    s.add_argument("--method", required=True)
    s.add_argument("--epsilon", default="1/10")
    s.add_argument("--node-limit", type=int, default=1_000_000)
    s.add_argument("--strategy", choices=["first", "best"], default="first", help="local search move rule")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("emit-mip", help="write an LP-format model and its metadata sidecar")
    e.add_argument("--instance", required=True)
    e.add_argument("--formulation", required=True)
    e.add_argument("--precedence")
    e.add_argument("--beta")
    e.add_argument("--out")
    e.set_defaults(func=cmd_emit_mip)

    v = sub.add_parser("verify-point", help="check an external solver solution against an emitted model")
    v.add_argument("--model", required=True)
    v.add_argument("--solution", required=True)
    v.add_argument("--instance")
    v.add_argument("--tol", default="0")
    v.set_defaults(func=cmd_verify_point)

    r = sub.add_parser("verify-reduction", help="exhaustively check the search-to-testing reduction")
    r.add_argument("--instance", required=True)
    r.add_argument("--alpha", required=True)
    r.set_defaults(func=cmd_verify_reduction)

    b = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    b.add_argument("--suite", required=True)
    b.add_argument("--out")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--count", type=int, default=100)
    b.add_argument("--ranges", default=",".join(str(r) for r in bench.TABLE5_RANGES))
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OracleTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except GreedyTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except (FormatError, InstanceError, InvalidScheduleError, ModelError, ReductionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
