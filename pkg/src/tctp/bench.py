"""Benchmark suites writing CSV reports."""

from __future__ import annotations

import csv
import io
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from decimal import Decimal, localcontext
from fractions import Fraction
from statistics import mean
from typing import Callable, Iterable, Sequence

from tctp.core import Instance, Variant, _evaluate_unchecked, evaluate, sort_by_ratio
from tctp.exact import brute_force_optimum, dp_two_slots, fptas_two_slots, iter_schedules
from tctp.fileio import write_schedule
from tctp.heuristics import greedy_min_ratio, improving_moves, local_search, multi_start
from tctp.instgen import GenConfig, Q_RANGES, gen_greedy_gap, gen_locality_gap, gen_random, reduce_search_to_testing
from tctp.radical import RadicalNumber

TABLE4_SHAPES = [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (4, 2), (5, 2)]
TABLE5_RANGES = [0, 10, 100, 1000]
Q_CYCLE = ["low", "mid", "high"]


def as_fraction(value) -> Fraction | None:
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, RadicalNumber) and not any(value.coeffs[1:]):
        return value.coeffs[0]
    return None


def format_decimal(value) -> str:
    """Exact decimal when it terminates, else 12 significant digits."""
    exact = as_fraction(value)
    if exact is None:
        return f"{float(value):.12g}"
    d = exact.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d == 1:
        with localcontext() as ctx:
            ctx.prec = 1000
            text = format(Decimal(exact.numerator) / Decimal(exact.denominator), "f")
        return text
    with localcontext() as ctx:
        ctx.prec = 12
        return str(+(Decimal(exact.numerator) / Decimal(exact.denominator)))


def format_exact(value) -> str:
    exact = as_fraction(value)
    if exact is None:
        return repr(value)
    return f"{exact.numerator}/{exact.denominator}"


def gap_percent(value, optimum) -> Fraction | None:
    value, optimum = as_fraction(value), as_fraction(optimum)
    if value is None or optimum is None:
        return None
    if optimum == 0:
        return Fraction(0) if value == 0 else None
    return (value - optimum) / optimum * 100


@dataclass
class BenchRow:
    instance_id: str
    variant: str
    m: int
    T: int
    n: int
    method: str
    objective: str
    objective_exact: str
    gap_to_oracle_pct: str
    elapsed_s: str
    status: str
    schedule: str


def make_row(instance_id: str, instance: Instance, report, optimum=None) -> BenchRow:
    gap = gap_percent(report.objective, optimum) if optimum is not None else None
    return BenchRow(
        instance_id,
        instance.variant.value,
        instance.m,
        instance.T,
        instance.n,
        report.method,
        format_decimal(report.objective),
        format_exact(report.objective),
        "" if gap is None else format_decimal(gap),
        f"{report.elapsed:.6f}",
        report.status_label,
        write_schedule(report.schedule).strip(),
    )


def write_csv(rows: Iterable, columns: Sequence[str] | None = None) -> str:
    rows = list(rows)
    buf = io.StringIO()
    if columns is None:
        columns = [f.name for f in fields(rows[0])] if rows else []
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(asdict(row) if hasattr(row, "__dataclass_fields__") else row)
    return buf.getvalue()


def _map(func: Callable, items: list, jobs: int) -> list:
    if jobs <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def table4_instances(count: int, seed: int, variant: Variant) -> list[tuple[str, Instance]]:
    out = []
    for idx in range(count):
        m, T = TABLE4_SHAPES[idx % len(TABLE4_SHAPES)]
        q = Q_RANGES[Q_CYCLE[(idx // len(TABLE4_SHAPES)) % 3]]
        config = GenConfig(m=m, T=T, seed=seed + idx, q_range=q)
        out.append((f"{variant.value[0]}{idx:04d}", gen_random(config, variant)))
    return out


def _table4_job(item: tuple[str, Instance]) -> list[BenchRow]:
    instance_id, instance = item
    oracle = brute_force_optimum(instance)
    ms = multi_start(instance)
    return [make_row(instance_id, instance, oracle, oracle.objective), make_row(instance_id, instance, ms, oracle.objective)]


def run_table4(count: int = 100, seed: int = 0, jobs: int = 1) -> tuple[list[BenchRow], list[dict]]:
    rows: list[BenchRow] = []
    summary = []
    for variant in (Variant.TESTING, Variant.SEARCH):
        items = table4_instances(count, seed, variant)
        chunk = [r for rs in _map(_table4_job, items, jobs) for r in rs]
        rows += chunk
        ms = [r for r in chunk if r.method == "multistart"]
        gaps = [Fraction(r.gap_to_oracle_pct) for r in ms]
        missed = [g for g in gaps if g > 0]
        times = [float(r.elapsed_s) for r in ms]
        summary.append(
            {
                "variant": variant.value,
                "method": "multistart",
                "instances": len(ms),
                "pct_opt": format_decimal(Fraction(100 * (len(gaps) - len(missed)), len(gaps))),
                "avg_gap_pct": format_decimal(sum(missed, Fraction(0)) / len(missed)) if missed else "0",
                "max_gap_pct": format_decimal(max(missed)) if missed else "0",
                "avg_cpu_s": f"{mean(times):.6f}",
                "max_cpu_s": f"{max(times):.6f}",
            }
        )
    return rows, summary


def run_table5(ranges: Sequence[int] = TABLE5_RANGES, reps: int = 5, seed: int = 0, m: int = 5) -> list[dict]:
    """DP runtime against cost-range magnitude; correctness checked against the oracle."""
    out = []
    for variant in (Variant.TESTING, Variant.SEARCH):
        for cost_max in ranges:
            dp_times, ms_times, agree = [], [], 0
            for rep in range(reps):
                config = GenConfig(m=m, T=2, seed=seed + rep, cost_max=cost_max, q_range=Q_RANGES[Q_CYCLE[rep % 3]])
                instance = gen_random(config, variant)
                dp = dp_two_slots(instance)
                ms = multi_start(instance)
                oracle = brute_force_optimum(instance)
                dp_times.append(dp.elapsed)
                ms_times.append(ms.elapsed)
                agree += dp.objective == oracle.objective
            out.append(
                {
                    "variant": variant.value,
                    "cost_range": f"[0,{cost_max}]",
                    "reps": reps,
                    "mean_dp_s": f"{mean(dp_times):.6f}",
                    "mean_multistart_s": f"{mean(ms_times):.6f}",
                    "dp_equals_oracle": f"{agree}/{reps}",
                }
            )
    return out


def run_gap_families(Ms: Sequence[int] = (10, 100, 1000), cks: Sequence[tuple[int, int]] = ((2, 2), (2, 3), (3, 3))) -> list[BenchRow]:
    rows = []
    for M in Ms:
        instance = gen_greedy_gap(M)
        oracle = brute_force_optimum(instance)
        for report in (greedy_min_ratio(instance), oracle):
            rows.append(make_row(f"greedy_gap_M{M}", instance, report, oracle.objective))
    for c, k in cks:
        gap = gen_locality_gap(c, k)
        oracle = brute_force_optimum(gap.instance)
        ls = local_search(gap.instance, gap.local_schedule)
        for report in (ls, oracle):
            rows.append(make_row(f"locality_gap_c{c}_k{k}_M{gap.M}", gap.instance, report, oracle.objective))
    return rows


def _random_schedule(rng: random.Random, instance: Instance):
    slots = [set() for _ in range(instance.T)]
    for j in range(instance.n):
        open_slots = [t for t in range(instance.T) if len(slots[t]) < instance.m]
        slots[rng.choice(open_slots)].add(j)
    return slots


def run_invariants(trials: int = 200, seed: int = 0) -> list[dict]:
    """Property audits at reduced trial counts; each row reports violations."""
    rng = random.Random(seed)
    results = []

    def record(check: str, count: int, bad: int, started: float):
        results.append(
            {"check": check, "trials": count, "violations": bad, "elapsed_s": f"{time.perf_counter() - started:.3f}"}
        )

    def small(variant: Variant, max_n: int = 8) -> Instance:
        while True:
            m, T = rng.randint(1, 4), rng.randint(1, 4)
            if m * T <= max_n:
                config = GenConfig(m=m, T=T, seed=rng.randrange(2**32), q_range=Q_RANGES[rng.choice(Q_CYCLE)])
                return gen_random(config, variant)

    for variant in (Variant.TESTING, Variant.SEARCH):
        t0, bad = time.perf_counter(), 0
        for _ in range(trials):
            inst = small(variant)
            sched = _random_schedule(rng, inst)
            bad += evaluate(inst, sort_by_ratio(inst, sched)) > evaluate(inst, sched)
        record(f"ratio_sort_never_worse[{variant.value}]", trials, bad, t0)

    t0, bad = time.perf_counter(), 0
    for _ in range(trials):
        inst = small(Variant.TESTING, 6)
        opt = brute_force_optimum(inst).objective
        joint = Fraction(1)
        for p in inst.probs:
            joint *= p
        sched = _random_schedule(rng, inst)
        bad += opt < evaluate(inst, sched) * joint
    record("optimum_vs_joint_probability[testing]", trials, bad, t0)

    t0, bad, count = time.perf_counter(), 0, 0
    for variant in (Variant.TESTING, Variant.SEARCH):
        for _ in range(trials // 4):
            inst = gen_random(GenConfig(m=rng.randint(1, 5), T=2, seed=rng.randrange(2**32)), variant)
            bad += dp_two_slots(inst).objective != brute_force_optimum(inst).objective
            count += 1
    record("dp_equals_oracle", count, bad, t0)

    t0, bad, count = time.perf_counter(), 0, 0
    for _ in range(trials // 8):
        inst = gen_random(GenConfig(m=rng.randint(1, 5), T=2, seed=rng.randrange(2**32)), Variant.TESTING)
        opt = brute_force_optimum(inst).objective
        for eps in (Fraction(1, 100), Fraction(1, 10), Fraction(1, 2)):
            bad += fptas_two_slots(inst, eps).objective > (1 + eps) * opt
            count += 1
    record("fptas_bound", count, bad, t0)

    t0, bad, count = time.perf_counter(), 0, 0
    for _ in range(trials // 8):
        inst = small(Variant.SEARCH, 6)
        if inst.total_cost == 0:
            continue
        values = [_evaluate_unchecked(inst, s) for s in iter_schedules(inst.n, inst.T, inst.m)]
        alpha = rng.choice(sorted(set(values)))
        testing, params = reduce_search_to_testing(inst, alpha)
        for s in iter_schedules(inst.n, inst.T, inst.m):
            count += 1
            bad += (_evaluate_unchecked(inst, s) <= alpha) != (_evaluate_unchecked(testing, s) < params.beta)
    record("reduction_equivalence", count, bad, t0)

    t0, bad, count = time.perf_counter(), 0, 0
    for variant in (Variant.TESTING, Variant.SEARCH):
        for _ in range(trials // 8):
            inst = small(variant, 8)
            report = multi_start(inst)
            count += 1
            bad += bool(improving_moves(inst, report.schedule))
    record("local_search_fixed_point", count, bad, t0)
    return results
