"""Greedy ratio baseline, interchange/insertion local search, multi-start."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Sequence

from tctp.core import (
    Instance,
    Variant,
    _evaluate_unchecked,
    _ratio_parts,
    _sort_unchecked,
    check_schedule,
    make_schedule,
    ratio_sort_key,
)
from tctp.exact import SolveReport, Status

Partition = tuple[frozenset[int], ...]

DEFAULT_SUBSET_CAP = 2**20
FLOAT_TOL = 1e-12


class GreedyTooLarge(RuntimeError):
    pass


def partition_value(instance: Instance, partition: Sequence[Iterable[int]], as_float: bool = False):
    """Objective of a partition sequenced by non-decreasing set ratio."""
    return _evaluate_unchecked(instance, _sort_unchecked(instance, make_schedule(partition)), as_float)


def greedy_min_ratio(instance: Instance, subset_cap: int = DEFAULT_SUBSET_CAP) -> SolveReport:
    """Fill slots in time order with the minimum-ratio set that keeps the deadline reachable."""
    start = time.perf_counter()
    key = ratio_sort_key(instance)
    remaining = list(range(instance.n))
    slots: list[frozenset[int]] = []
    for t in range(1, instance.T + 1):
        room_after = instance.m * (instance.T - t)
        lo = max(1 if remaining else 0, len(remaining) - room_after)
        hi = min(instance.m, len(remaining))
        size = sum(comb(len(remaining), s) for s in range(lo, hi + 1))
        if size > subset_cap:
            raise GreedyTooLarge(f"slot {t}: {size} candidate subsets exceed cap {subset_cap}; use a smaller m")
        best = best_key = None
        # Sizes ascending, then lexicographic: first strict minimum wins ties.
        for s in range(lo, hi + 1):
            for subset in combinations(remaining, s):
                k = key(subset)
                if best is None or k < best_key:
                    best, best_key = subset, k
        chosen = frozenset(best or ())
        slots.append(chosen)
        remaining = [j for j in remaining if j not in chosen]
    schedule = make_schedule(slots)
    return SolveReport(
        schedule, _evaluate_unchecked(instance, schedule), "greedy", time.perf_counter() - start, Status.HEURISTIC
    )


@dataclass(frozen=True)
class Move:
    kind: str  # "swap" | "insert"
    test: int
    other: int  # swap partner test, or destination slot for insert

    def apply(self, partition: Partition) -> Partition:
        slots = [set(s) for s in partition]
        src = next(t for t, s in enumerate(slots) if self.test in s)
        if self.kind == "swap":
            dst = next(t for t, s in enumerate(slots) if self.other in s)
            slots[src].remove(self.test)
            slots[dst].remove(self.other)
            slots[src].add(self.other)
            slots[dst].add(self.test)
        else:
            slots[src].remove(self.test)
            slots[self.other].add(self.test)
        return make_schedule(slots)


def iter_moves(partition: Partition, m: int) -> Iterator[Move]:
    """Interchanges across sets, then insertions into sets with spare capacity."""
    T = len(partition)
    ordered = [sorted(s) for s in partition]
    for a in range(T):
        for b in range(a + 1, T):
            for i in ordered[a]:
                for j in ordered[b]:
                    yield Move("swap", i, j)
    for a in range(T):
        for i in ordered[a]:
            for b in range(T):
                if b != a and len(partition[b]) < m:
                    yield Move("insert", i, b)


def _better(new, old, as_float: bool) -> bool:
    if as_float:
        return new < old - FLOAT_TOL
    return new < old


def improving_moves(instance: Instance, partition: Sequence[Iterable[int]], as_float: bool = False) -> list[Move]:
    """Exhaustive audit: every move that strictly improves the partition."""
    partition = make_schedule(partition)
    current = partition_value(instance, partition, as_float)
    return [
        mv
        for mv in iter_moves(partition, instance.m)
        if _better(partition_value(instance, mv.apply(partition), as_float), current, as_float)
    ]


def local_search(
    instance: Instance, start: Sequence[Iterable[int]], mode: str = "exact", strategy: str = "first"
) -> SolveReport:
    """Descent from ``start``; returns the ratio-sorted local optimum.

    ``strategy="first"`` applies the first strictly improving move in scan
    order and rescans; ``"best"`` applies the most improving move of each scan.
    """
    if strategy not in ("first", "best"):
        raise ValueError(f"unknown strategy {strategy!r}")
    as_float = mode == "float"
    t0 = time.perf_counter()
    partition = check_schedule(instance, start)
    current = partition_value(instance, partition, as_float)
    while True:
        step = None
        for mv in iter_moves(partition, instance.m):
            candidate = mv.apply(partition)
            value = partition_value(instance, candidate, as_float)
            if _better(value, current if step is None else step[0], as_float):
                step = (value, candidate)
                if strategy == "first":
                    break
        if step is None:
            break
        current, partition = step
    schedule = _sort_unchecked(instance, partition)
    return SolveReport(
        schedule, _evaluate_unchecked(instance, schedule), "localsearch", time.perf_counter() - t0, Status.HEURISTIC
    )


def _order_keys(instance: Instance) -> dict[str, list]:
    costs = instance.costs
    if instance.variant is Variant.TESTING:
        probs = list(instance.probs)
        certain = [p == 1 for p in probs]
    else:
        # Analogue of p_j is 1 - pi_j: likeliest locations first.
        probs = [1 - p for p in instance.pi]
        certain = [p == 1 for p in probs]
    keys: dict[str, list] = {"cost": [], "prob": [], "ratio": []}
    for j in range(instance.n):
        # Zero-information tests: first when free, last otherwise.
        group = (0 if costs[j] == 0 else 2) if certain[j] else 1
        cost_part, den = _ratio_parts(instance, [j])
        ratio = Fraction(0) if certain[j] else Fraction(cost_part) / den
        keys["cost"].append((group, costs[j], j))
        keys["prob"].append((group, probs[j], j))
        keys["ratio"].append((group, ratio, j))
    return keys


def initial_partitions(instance: Instance) -> dict[str, Partition]:
    """Three starts: tests sorted by cost, by probability and by ratio, filled m per slot."""
    out = {}
    for name, key in _order_keys(instance).items():
        order = sorted(range(instance.n), key=lambda j: key[j])
        slots = [order[t * instance.m : (t + 1) * instance.m] for t in range(instance.T)]
        out[name] = make_schedule(slots)
    return out


def multi_start(instance: Instance, mode: str = "exact", strategy: str = "first") -> SolveReport:
    t0 = time.perf_counter()
    best = None
    for start in initial_partitions(instance).values():
        report = local_search(instance, start, mode, strategy)
        if best is None or report.objective < best.objective:
            best = report
    return SolveReport(best.schedule, best.objective, "multistart", time.perf_counter() - t0, Status.HEURISTIC)
