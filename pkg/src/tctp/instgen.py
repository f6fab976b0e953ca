"""Random benchmark instances, adversarial families and the search-to-testing reduction.

Random streams: ``numpy.random.SeedSequence(seed).spawn(3)`` gives three
independent PCG64 generators used, in order, for costs, weights and the
joint success probability q.  A weight vector summing to zero is redrawn in
full from the weight stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, gcd, prod

import numpy as np

from tctp.core import Instance, Variant, make_schedule
from tctp.radical import RadicalNumber, RootField

Q_RANGES = {
    "low": (Fraction("0.01"), Fraction("0.30")),
    "mid": (Fraction("0.31"), Fraction("0.60")),
    "high": (Fraction("0.61"), Fraction("0.90")),
}
MAX_DENOMINATOR = 10**9


@dataclass(frozen=True)
class GenConfig:
    m: int
    T: int
    seed: int = 0
    cost_max: int = 10
    weight_max: int = 1000
    q_range: tuple[Fraction, Fraction] = Q_RANGES["low"]

    def __post_init__(self):
        if self.m < 1 or self.T < 1:
            raise ValueError("m and T must be positive")
        if self.cost_max < 0 or self.weight_max < 1:
            raise ValueError("empty cost or weight range")
        lo, hi = self.q_range
        if not 0 < lo <= hi < 1:
            raise ValueError("q range must satisfy 0 < lo <= hi < 1")

    @property
    def n(self) -> int:
        return self.m * self.T


def _streams(seed: int):
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(3)]


def gen_random(config: GenConfig, variant: Variant) -> Instance:
    cost_rng, weight_rng, q_rng = _streams(config.seed)
    n = config.n
    costs = tuple(int(c) for c in cost_rng.integers(0, config.cost_max, size=n, endpoint=True))
    while True:
        weights = [int(w) for w in weight_rng.integers(0, config.weight_max, size=n, endpoint=True)]
        if sum(weights):
            break
    if variant is Variant.SEARCH:
        return Instance(variant, config.m, config.T, costs, tuple(weights))

    lo, hi = config.q_range
    q = float(q_rng.uniform(float(lo), float(hi)))
    total = sum(weights)
    probs = [Fraction(1) if w == 0 else Fraction(q ** (w / total)).limit_denominator(MAX_DENOMINATOR) for w in weights]
    joint = prod(probs, start=Fraction(1))
    if not lo <= joint <= hi:
        # Rounding pushed the product out of range: repair the heaviest test.
        k = max(range(n), key=lambda j: (weights[j], -j))
        rest = joint / probs[k]
        probs[k] = min(max(joint, lo), hi) / rest
    return Instance(variant, config.m, config.T, costs, tuple(probs))


def gen_greedy_gap(M: int) -> Instance:
    """Three tests on two machines where the min-ratio greedy is off by a factor Theta(M)."""
    if M < 2:
        raise ValueError("M must be at least 2")
    q = 1 - Fraction(1, M)
    return Instance(Variant.TESTING, 2, 2, (1, 0, M), (Fraction(1, M), q, q))


@dataclass(frozen=True)
class LocalityGap:
    instance: Instance
    M: int
    c: int
    k: int
    p: RadicalNumber
    local_schedule: tuple[frozenset[int], ...]
    optimal_schedule: tuple[frozenset[int], ...]

    @property
    def local_value(self) -> int:
        return self.k * (self.c - 1) + 1


def locality_admissible(c: int, k: int, M: int) -> bool:
    # (c^2 + ckM)/(2c - 1 + kM) * (c + kM)^(-1/k) <= 1, with the root cleared.
    return (c * c + c * k * M) ** k <= (2 * c - 1 + k * M) ** k * (c + k * M)


def gen_locality_gap(c: int, k: int) -> LocalityGap:
    """Local search trap with m = 2k, T = 2 and p = (c + kM)^(-1/k) held exactly."""
    if c < 2 or k < 2:
        raise ValueError("c and k must both be at least 2")
    M = 2
    while not locality_admissible(c, k, M):
        M += 1
    field = RootField(Fraction(1, c + k * M), k)
    p = field.root()
    I1 = list(range(k))
    I2 = list(range(k, 2 * k))
    star = 2 * k
    costs = (c - 1,) * k + (M,) * k + (c,)
    probs = (p,) * k + (Fraction(1),) * k + (Fraction(0),)
    instance = Instance(Variant.TESTING, 2 * k, 2, costs, probs)
    return LocalityGap(
        instance,
        M,
        c,
        k,
        p,
        make_schedule([I1, [star] + I2]),
        make_schedule([[star], I1 + I2]),
    )


@dataclass(frozen=True)
class ReductionParams:
    W: int
    M: int
    gamma: int
    beta: Fraction
    alpha: Fraction


class ReductionError(ValueError):
    pass


def reduce_search_to_testing(instance: Instance, alpha) -> tuple[Instance, ReductionParams]:
    """Testing instance whose threshold question z < beta matches z_search <= alpha."""
    if instance.variant is not Variant.SEARCH:
        raise ReductionError("reduction input must be a search instance")
    alpha = Fraction(alpha)
    if alpha < 0:
        raise ReductionError("alpha must be non-negative")
    total_cost = instance.total_cost
    if total_cost == 0:
        raise ReductionError("reduction needs c(N) > 0")
    g = gcd(*instance.probs)
    W = instance.total_weight // g
    scaled = [w // g for w in instance.probs]
    M = total_cost * (instance.n * W) ** 2
    # Integer threshold: sum of integers >= x  iff  >= ceil(x).
    gamma = ceil((total_cost - alpha) * W)
    beta = total_cost - Fraction(gamma - 1, M)
    probs = tuple(1 - Fraction(w, M) for w in scaled)
    testing = Instance(Variant.TESTING, instance.m, instance.T, instance.costs, probs)
    return testing, ReductionParams(W, M, gamma, beta, alpha)
