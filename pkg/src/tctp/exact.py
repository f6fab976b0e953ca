"""Ground-truth solvers: partition-enumeration oracle, two-slot DP, FPTAS."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterator, Sequence

from tctp.core import (
    Instance,
    Schedule,
    Variant,
    _evaluate_unchecked,
    _sort_unchecked,
    make_schedule,
    pad_to_full,
)

DEFAULT_NODE_LIMIT = 1_000_000


class Status(enum.Enum):
    OPTIMAL = "optimal"
    HEURISTIC = "heuristic"
    APPROX = "approx"


class OracleTooLarge(RuntimeError):
    """The enumeration would exceed the node limit."""


@dataclass(frozen=True)
class SolveReport:
    schedule: Schedule
    objective: object
    method: str
    elapsed: float
    status: Status
    epsilon: Fraction | None = None

    @property
    def status_label(self) -> str:
        if self.status is Status.APPROX:
            return f"approx({self.epsilon})"
        return self.status.value


def count_partitions(n: int, T: int, m: int) -> int:
    """Unordered partitions of n labelled items into at most T blocks of size <= m."""

    @lru_cache(maxsize=None)
    def f(items: int, blocks: int) -> int:
        if items == 0:
            return 1
        if blocks == 0:
            return 0
        # Block containing the smallest remaining item.
        return sum(comb(items - 1, s - 1) * f(items - s, blocks - 1) for s in range(1, min(m, items) + 1))

    return f(n, T)


def iter_partitions(n: int, T: int, m: int) -> Iterator[list[list[int]]]:
    """Canonical partitions (blocks ordered by smallest element), in restricted-growth order."""
    blocks: list[list[int]] = []

    def rec(i: int) -> Iterator[list[list[int]]]:
        if i == n:
            yield [list(b) for b in blocks]
            return
        remaining = n - i
        free = sum(m - len(b) for b in blocks) + (T - len(blocks)) * m
        if remaining > free:
            return
        for b in blocks:
            if len(b) < m:
                b.append(i)
                yield from rec(i + 1)
                b.pop()
        if len(blocks) < T:
            blocks.append([i])
            yield from rec(i + 1)
            blocks.pop()

    yield from rec(0)


def iter_schedules(n: int, T: int, m: int) -> Iterator[Schedule]:
    """Every ordered schedule (empty slots allowed), in lexicographic slot-assignment order."""
    slots: list[list[int]] = [[] for _ in range(T)]

    def rec(i: int) -> Iterator[Schedule]:
        if i == n:
            yield make_schedule(slots)
            return
        for t in range(T):
            if len(slots[t]) < m:
                slots[t].append(i)
                yield from rec(i + 1)
                slots[t].pop()

    yield from rec(0)


def _as_slots(instance: Instance, blocks: Sequence[Sequence[int]]) -> Schedule:
    padded = list(blocks) + [[]] * (instance.T - len(blocks))
    return make_schedule(padded)


def brute_force_optimum(instance: Instance, node_limit: int = DEFAULT_NODE_LIMIT) -> SolveReport:
    """Minimum over all partitions, each sequenced by non-decreasing set ratio."""
    size = count_partitions(instance.n, instance.T, instance.m)
    if size > node_limit:
        raise OracleTooLarge(f"{size} partitions exceed the oracle node limit {node_limit}")
    start = time.perf_counter()
    best = best_schedule = None
    for blocks in iter_partitions(instance.n, instance.T, instance.m):
        schedule = _sort_unchecked(instance, _as_slots(instance, blocks))
        value = _evaluate_unchecked(instance, schedule)
        if best is None or value < best:
            best, best_schedule = value, schedule
    return SolveReport(best_schedule, best, "oracle", time.perf_counter() - start, Status.OPTIMAL)


def ordered_optimum(instance: Instance):
    """Minimum over all ordered schedules; cross-check for the ratio-sort argument."""
    best = None
    for schedule in iter_schedules(instance.n, instance.T, instance.m):
        value = _evaluate_unchecked(instance, schedule)
        if best is None or value < best:
            best = value
    return best


def _best_first_slot(
    costs: Sequence[int],
    factors: Sequence,
    order: Sequence[int],
    m: int,
    total: int,
    survival,
):
    """Backward DP over ``order`` choosing exactly m items for the first slot.

    ``factors[j]`` combines multiplicatively (testing probabilities) or
    additively (search weights, negated so smaller is better); ``survival``
    maps a state value to the probability the second slot is performed.
    Returns (first-slot set, objective under ``costs``) or None.
    """
    # layers[s] : dict budget -> value, for the suffix processed so far.
    layers: list[dict[int, object]] = [dict() for _ in range(m + 1)]
    layers[0][0] = survival.identity
    chosen: list[set[tuple[int, int]]] = []
    for j in reversed(order):
        c, f = costs[j], factors[j]
        picked: set[tuple[int, int]] = set()
        new = [dict(layer) for layer in layers]
        for s in range(1, m + 1):
            for b, v in layers[s - 1].items():
                cand = survival.combine(f, v)
                key = b + c
                cur = new[s].get(key)
                if cur is None or cand < cur:
                    new[s][key] = cand
                    picked.add((key, s))
        layers = new
        chosen.append(picked)
    chosen.reverse()
    best = None
    for b in sorted(layers[m]):
        value = b + survival.of(layers[m][b]) * (total - b)
        if best is None or value < best[1]:
            best = (b, value)
    if best is None:
        return None
    b, s = best[0], m
    subset = []
    for pos, j in enumerate(order):
        if (b, s) in chosen[pos] and s > 0:
            subset.append(j)
            b -= costs[j]
            s -= 1
    return frozenset(subset), best[1]


class _Product:
    identity = 1

    @staticmethod
    def combine(p, v):
        return p * v

    @staticmethod
    def of(v):
        return v


class _Weight:
    """Search: state value is -w(S); survival is 1 - w(S)/w(N)."""

    identity = 0

    def __init__(self, total_weight: int):
        self.total_weight = total_weight

    @staticmethod
    def combine(w, v):
        return v - w

    def of(self, v):
        return 1 + Fraction(v, self.total_weight)


def _survival_model(instance: Instance):
    if instance.variant is Variant.TESTING:
        return list(instance.probs), _Product()
    return list(instance.probs), _Weight(instance.total_weight)


def dp_two_slots(instance: Instance) -> SolveReport:
    """Exact pseudo-polynomial DP for T = 2."""
    if instance.T != 2:
        raise ValueError("dp_two_slots requires T = 2")
    start = time.perf_counter()
    padding = pad_to_full(instance)
    full = padding.instance
    factors, survival = _survival_model(full)
    result = _best_first_slot(full.costs, factors, range(full.n), full.m, full.total_cost, survival)
    assert result is not None  # n = 2m guarantees a feasible first slot
    first, _ = result
    schedule = padding.project((first, frozenset(range(full.n)) - first))
    objective = _evaluate_unchecked(instance, schedule)
    return SolveReport(schedule, objective, "dp2", time.perf_counter() - start, Status.OPTIMAL)


def fptas_two_slots(instance: Instance, epsilon: Fraction | int | str) -> SolveReport:
    """(1+epsilon)-approximation for T = 2 by cost rounding."""
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if instance.T != 2:
        raise ValueError("fptas_two_slots requires T = 2")
    start = time.perf_counter()
    padding = pad_to_full(instance)
    full = padding.instance
    n, m = full.n, full.m
    factors, survival = _survival_model(full)
    if full.variant is Variant.TESTING:
        keep = list(full.probs)
    else:
        keep = [1 - p for p in full.pi]
    # Non-increasing cost, larger survival factor first on ties.
    order = sorted(range(n), key=lambda j: (-full.costs[j], -keep[j], j))
    everyone = frozenset(range(n))

    candidates: list[frozenset[int]] = []
    zero_cost = [j for j in order if full.costs[j] == 0]
    if len(zero_cost) >= m:
        candidates.append(frozenset(zero_cost[-m:]))
    positive = [pos for pos, j in enumerate(order) if full.costs[j] > 0]
    for pos in positive:
        ci = full.costs[order[pos]]
        # floor(c_j / mu) with mu = epsilon * c_i / n
        rounded = [int(Fraction(n * c) / (epsilon * ci)) for c in full.costs]
        result = _best_first_slot(rounded, factors, order[pos:], m, sum(rounded), survival)
        if result is not None:
            candidates.append(result[0])

    best = None
    for first in candidates:
        schedule = (first, everyone - first)
        value = _evaluate_unchecked(full, schedule)
        key = (value, sum(full.costs[j] for j in first))
        if best is None or key < best[0]:
            best = (key, schedule)
    schedule = padding.project(best[1])
    objective = _evaluate_unchecked(instance, schedule)
    return SolveReport(schedule, objective, "fptas", time.perf_counter() - start, Status.APPROX, epsilon)
