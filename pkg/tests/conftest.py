import random
from fractions import Fraction

import pytest

from tctp import Instance, Variant


def make_testing(m, T, costs, probs):
    return Instance(Variant.TESTING, m, T, tuple(costs), tuple(Fraction(p) for p in probs))


def make_search(m, T, costs, weights):
    return Instance(Variant.SEARCH, m, T, tuple(costs), tuple(weights))


def random_instance(rng: random.Random, variant: Variant, max_n: int = 6, cost_max: int = 10, max_cells: int = 36) -> Instance:
    """Arbitrary shape with n <= m*T (not necessarily full), for property checks."""
    while True:
        m, T = rng.randint(1, max_n), rng.randint(1, max_n)
        n = rng.randint(max(m, T), min(m * T, max_n)) if max(m, T) <= min(m * T, max_n) else 0
        if n and m * T <= max_cells:
            break
    costs = [rng.randint(0, cost_max) for _ in range(n)]
    if variant is Variant.SEARCH:
        weights = [rng.randint(0, 20) for _ in range(n)]
        if not any(weights):
            weights[0] = 1
        return make_search(m, T, costs, weights)
    probs = [Fraction(rng.randint(0, 20), 20) for _ in range(n)]
    return make_testing(m, T, costs, probs)


def random_schedule(rng: random.Random, instance: Instance):
    slots = [set() for _ in range(instance.T)]
    for j in range(instance.n):
        slots[rng.choice([t for t in range(instance.T) if len(slots[t]) < instance.m])].add(j)
    return [frozenset(s) for s in slots]


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
        terminalreporter.write_line("[N/A ] criterion 9 commercial-solver tables: not reproducible without a MIP solver")
