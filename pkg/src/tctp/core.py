"""Instances, schedules and exact objective evaluation.

Tests (or locations) are indexed 0..n-1 internally; files and the CLI use
1-based indices.  A schedule is a tuple of T frozensets (slots), in time
order.  Probabilities are exact rationals; the Search variant stores
integer weights and derives ``pi_j = w_j / w(N)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence

Schedule = tuple[frozenset[int], ...]


class Variant(enum.Enum):
    TESTING = "testing"
    SEARCH = "search"


class InstanceError(ValueError):
    """Raised for instance data violating the model assumptions."""


class InvalidScheduleError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class Instance:
    variant: Variant
    m: int
    T: int
    costs: tuple[int, ...]
    # Testing: success probabilities p_j.  Search: integer weights w_j.
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(self.costs))
        object.__setattr__(self, "probs", tuple(self.probs))
        n = len(self.costs)
        if len(self.probs) != n:
            raise InstanceError(f"{n} costs but {len(self.probs)} probabilities")
        if n == 0:
            raise InstanceError("instance has no tests")
        if self.m < 1 or self.T < 1:
            raise InstanceError("m and T must be positive")
        if n > self.m * self.T:
            raise InstanceError(f"n={n} exceeds m*T={self.m * self.T}")
        if self.m > n or self.T > n:
            raise InstanceError(f"need m <= n and T <= n (m={self.m}, T={self.T}, n={n})")
        if any(not isinstance(c, int) or c < 0 for c in self.costs):
            raise InstanceError("costs must be non-negative integers")
        if self.variant is Variant.SEARCH:
            if any(not isinstance(w, int) or w < 0 for w in self.probs):
                raise InstanceError("search weights must be non-negative integers")
            if sum(self.probs) == 0:
                raise InstanceError("search weights sum to zero")
        else:
            if any(not (0 <= p <= 1) for p in self.probs):
                raise InstanceError("success probabilities must lie in [0, 1]")

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def total_cost(self) -> int:
        return sum(self.costs)

    @property
    def total_weight(self) -> int:
        if self.variant is not Variant.SEARCH:
            raise AttributeError("total_weight is defined for search instances only")
        return sum(self.probs)

    @property
    def pi(self) -> tuple[Fraction, ...]:
        """Search probabilities w_j / w(N)."""
        total = self.total_weight
        return tuple(Fraction(w, total) for w in self.probs)

    def scaled(self, factor: int) -> Instance:
        return Instance(self.variant, self.m, self.T, tuple(c * factor for c in self.costs), self.probs)


def make_schedule(slots: Iterable[Iterable[int]]) -> Schedule:
    return tuple(frozenset(s) for s in slots)


@dataclass(frozen=True)
class Violation:
    kind: str  # "duplicate" | "missing" | "capacity" | "unknown" | "length"
    slot: int | None = None
    test: int | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = []
        if self.slot is not None:
            where.append(f"slot {self.slot}")
        if self.test is not None:
            where.append(f"test {self.test}")
        return f"{self.kind}({', '.join(where)}){': ' + self.detail if self.detail else ''}"


def validate(instance: Instance, schedule: Sequence[Iterable[int]]) -> list[Violation]:
    """List every partition / capacity violation; an empty list means valid."""
    out: list[Violation] = []
    if len(schedule) != instance.T:
        out.append(Violation("length", detail=f"{len(schedule)} slots, expected {instance.T}"))
    first_seen: dict[int, int] = {}
    for t, slot in enumerate(schedule):
        slot = list(slot)
        if len(slot) > instance.m:
            out.append(Violation("capacity", slot=t, detail=f"{len(slot)} > m={instance.m}"))
        for j in slot:
            if not isinstance(j, int) or not 0 <= j < instance.n:
                out.append(Violation("unknown", slot=t, test=j))
            elif j in first_seen:
                out.append(Violation("duplicate", slot=t, test=j, detail=f"also in slot {first_seen[j]}"))
            else:
                first_seen[j] = t
    for j in range(instance.n):
        if j not in first_seen:
            out.append(Violation("missing", test=j))
    return out


def check_schedule(instance: Instance, schedule: Sequence[Iterable[int]]) -> Schedule:
    violations = validate(instance, schedule)
    if violations:
        raise InvalidScheduleError(violations)
    return make_schedule(schedule)


def _probs_for(instance: Instance, as_float: bool):
    if instance.variant is Variant.SEARCH:
        probs = instance.pi
    else:
        probs = instance.probs
    return [float(p) for p in probs] if as_float else list(probs)


def evaluate(instance: Instance, schedule: Sequence[Iterable[int]], mode: str = "exact"):
    """Expected testing cost (Testing) or expected search cost (Search).

    ``mode="exact"`` keeps the probability type (Fraction, or a radical
    number for the locality-gap family); ``mode="float"`` is for timing.
    """
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    slots = check_schedule(instance, schedule)
    return _evaluate_unchecked(instance, slots, mode == "float")


def _evaluate_unchecked(instance: Instance, slots: Schedule, as_float: bool = False):
    probs = _probs_for(instance, as_float)
    costs = instance.costs
    if instance.variant is Variant.TESTING:
        total = 0
        survive = 1
        for slot in slots:
            total = total + sum(costs[j] for j in slot) * survive
            for j in slot:
                survive = survive * probs[j]
        return total
    total = 0
    remaining = sum(probs)  # == 1
    for slot in slots:
        total = total + sum(costs[j] for j in slot) * remaining
        remaining = remaining - sum((probs[j] for j in slot), 0)
    return total


def _ratio_parts(instance: Instance, subset: Iterable[int]):
    """Numerator and non-negative denominator of the set ratio."""
    subset = list(subset)
    cost = sum(instance.costs[j] for j in subset)
    if instance.variant is Variant.TESTING:
        prod = 1
        for j in subset:
            prod = prod * instance.probs[j]
        return cost, 1 - prod
    return cost, Fraction(sum(instance.probs[j] for j in subset), instance.total_weight)


def set_ratio(instance: Instance, subset: Iterable[int]):
    """Cost-to-probability ratio of a set; ``math.inf`` when the denominator is 0.

    The empty set has ratio +inf.
    """
    cost, den = _ratio_parts(instance, subset)
    if not den:
        return math.inf
    return Fraction(cost) / den


def _compare_ratio(a, b) -> int:
    (ca, da), (cb, db) = a, b
    a_inf, b_inf = not da, not db
    if a_inf or b_inf:
        return int(a_inf) - int(b_inf)
    lhs, rhs = ca * db, cb * da
    return -1 if lhs < rhs else (1 if rhs < lhs else 0)


def ratio_sort_key(instance: Instance):
    """Key function ordering sets by ratio, exact via cross-multiplication."""
    cmp = cmp_to_key(_compare_ratio)
    return lambda subset: cmp(_ratio_parts(instance, subset))


def sort_by_ratio(instance: Instance, schedule: Sequence[Iterable[int]]) -> Schedule:
    """Reorder slots by non-decreasing ratio; stable, +inf last."""
    slots = check_schedule(instance, schedule)
    return _sort_unchecked(instance, slots)


def _sort_unchecked(instance: Instance, slots: Sequence[frozenset[int]]) -> Schedule:
    return tuple(sorted(slots, key=ratio_sort_key(instance)))


@dataclass(frozen=True)
class Bounds:
    lower: object
    upper: object


def global_bounds(instance: Instance) -> Bounds:
    upper = Fraction(instance.total_cost)
    if instance.variant is Variant.TESTING:
        prod = 1
        for p in instance.probs:
            prod = prod * p
        return Bounds(lower=upper * prod, upper=upper)
    # Unconstrained single-searcher order by c_j / pi_j.
    order = sorted(range(instance.n), key=lambda j: ratio_sort_key(instance)([j]))
    pi = instance.pi
    remaining = Fraction(1)
    lower = Fraction(0)
    for j in order:
        lower += instance.costs[j] * remaining
        remaining -= pi[j]
    return Bounds(lower=lower, upper=upper)


@dataclass(frozen=True)
class Padding:
    """Result of padding: dummies occupy indices ``original_n .. n'-1``."""

    instance: Instance
    original_n: int
    mapping: tuple[int, ...] = field(default=())

    def project(self, schedule: Sequence[Iterable[int]]) -> Schedule:
        return tuple(frozenset(j for j in slot if j < self.original_n) for slot in schedule)

    def extend(self, schedule: Sequence[Iterable[int]]) -> Schedule:
        """Fill free capacity of an original schedule with dummies, slot by slot."""
        slots = [set(s) for s in schedule]
        dummies = iter(range(self.original_n, self.instance.n))
        for slot in slots:
            while len(slot) < self.instance.m:
                d = next(dummies, None)
                if d is None:
                    break
                slot.add(d)
        return make_schedule(slots)


def pad_to_full(instance: Instance) -> Padding:
    """Append zero-cost dummies (p=1 for Testing, w=0 for Search) until n = m*T."""
    missing = instance.m * instance.T - instance.n
    dummy_prob = Fraction(1) if instance.variant is Variant.TESTING else 0
    padded = Instance(
        instance.variant,
        instance.m,
        instance.T,
        instance.costs + (0,) * missing,
        instance.probs + (dummy_prob,) * missing,
    )
    return Padding(padded, instance.n, tuple(range(instance.n)))
