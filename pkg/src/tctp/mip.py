"""Partial-order and assignment MIP formulations, LP-file emission, point checks.

No solver is embedded.  Models are written in LP format for external MIP
solvers; ``schedule_to_point`` and ``verify_point`` check the formulations
against schedules with exact rational arithmetic.

Variable names (1-based): d_i_j, mu_i_j (i<j), a_i_j / a_i, x_j_t, y_j,
z_j_t, zt_t, u_t.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from math import lcm
from typing import Iterable, Sequence

from tctp.core import Instance, Schedule, Variant, check_schedule

BINARY = "binary"
CONTINUOUS = "continuous"


class ModelError(ValueError):
    pass


@dataclass
class Variable:
    name: str
    kind: str
    lower: Fraction = Fraction(0)
    upper: Fraction | None = Fraction(1)


@dataclass
class Constraint:
    name: str
    coeffs: dict[str, Fraction]
    sense: str  # "<=" | "=" | ">="
    rhs: Fraction


@dataclass
class LinearModel:
    variables: dict[str, Variable] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, Fraction] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add_var(self, name: str, kind: str = CONTINUOUS, lower=0, upper=1) -> str:
        if name in self.variables:
            raise ModelError(f"duplicate variable {name}")
        self.variables[name] = Variable(name, kind, Fraction(lower), None if upper is None else Fraction(upper))
        return name

    def add_constraint(self, name: str, terms: Iterable[tuple[object, str]], sense: str, rhs=0) -> None:
        coeffs: dict[str, Fraction] = {}
        for coef, var in terms:
            if var not in self.variables:
                raise ModelError(f"constraint {name} references undeclared {var}")
            coeffs[var] = coeffs.get(var, Fraction(0)) + Fraction(coef)
        self.constraints.append(Constraint(name, {v: c for v, c in coeffs.items() if c}, sense, Fraction(rhs)))

    def constraint(self, name: str) -> Constraint:
        return next(c for c in self.constraints if c.name == name)


def _pi(instance: Instance) -> list[Fraction]:
    return list(instance.pi)


def _require(instance: Instance, variant: Variant, full: bool) -> None:
    if instance.variant is not variant:
        raise ModelError(f"builder expects a {variant.value} instance")
    if full and instance.n != instance.m * instance.T:
        raise ModelError("partial-order formulation needs n = m*T; pad the instance first")


def _po_skeleton(instance: Instance, variant: str) -> LinearModel:
    n, m = instance.n, instance.m
    model = LinearModel(meta={"formulation": "po", "variant": variant, "n": n, "m": m, "T": instance.T})
    N = range(1, n + 1)
    for i in N:
        for j in N:
            if i != j:
                model.add_var(f"d_{i}_{j}", BINARY)
    for i in N:
        for j in N:
            if i < j:
                model.add_var(f"mu_{i}_{j}", BINARY)
    for i in N:
        for j in N:
            if i < j:
                model.add_constraint(
                    f"order_{i}_{j}", [(1, f"d_{i}_{j}"), (1, f"d_{j}_{i}"), (1, _mu(i, j))], "=", 1
                )
    for i in N:
        for j in N:
            for k in N:
                if len({i, j, k}) == 3:
                    model.add_constraint(
                        f"trans_{i}_{j}_{k}",
                        [(1, _mu(i, j)), (1, f"d_{i}_{j}"), (1, f"d_{j}_{k}"), (-1, f"d_{i}_{k}")],
                        "<=",
                        1,
                    )
    for i in N:
        model.add_constraint(f"cap_{i}", [(1, _mu(i, j)) for j in N if j != i], "=", m - 1)
    return model


def _mu(i: int, j: int) -> str:
    return f"mu_{min(i, j)}_{max(i, j)}"


def build_po_testing(instance: Instance) -> LinearModel:
    _require(instance, Variant.TESTING, full=True)
    model = _po_skeleton(instance, "testing")
    n = instance.n
    N = range(1, n + 1)
    for i in N:
        for j in range(0, n + 1):
            model.add_var(f"a_{i}_{j}")
    for i in N:
        model.add_constraint(f"a0_{i}", [(1, f"a_{i}_0")], "=", 1)
        for j in N:
            terms = [(1, f"a_{i}_{j}"), (-1, f"a_{i}_{j - 1}")]
            if j != i:
                terms.append((1, f"d_{j}_{i}"))
            model.add_constraint(f"seq_{i}_{j}", terms, ">=", 0)
            model.add_constraint(
                f"prob_{i}_{j}", [(1, f"a_{i}_{j}"), (-instance.probs[j - 1], f"a_{i}_{j - 1}")], ">=", 0
            )
    model.objective = {f"a_{i}_{n}": Fraction(instance.costs[i - 1]) for i in N if instance.costs[i - 1]}
    return model


def build_po_search(instance: Instance) -> LinearModel:
    _require(instance, Variant.SEARCH, full=True)
    model = _po_skeleton(instance, "search")
    pi = _pi(instance)
    N = range(1, instance.n + 1)
    for i in N:
        model.add_var(f"a_{i}")
    for i in N:
        terms = [(1, f"a_{i}")]
        for j in N:
            if j != i:
                terms += [(-pi[j - 1], _mu(i, j)), (-pi[j - 1], f"d_{i}_{j}")]
        model.add_constraint(f"alpha_{i}", terms, "=", pi[i - 1])
    model.objective = {f"a_{i}": Fraction(instance.costs[i - 1]) for i in N if instance.costs[i - 1]}
    return model


def _assign_skeleton(instance: Instance, variant: str) -> LinearModel:
    n, T = instance.n, instance.T
    model = LinearModel(meta={"formulation": "assign", "variant": variant, "n": n, "m": instance.m, "T": T})
    N, S = range(1, n + 1), range(1, T + 1)
    for j in N:
        for t in S:
            model.add_var(f"x_{j}_{t}", BINARY)
    for j in N:
        model.add_var(f"y_{j}")
    for j in N:
        model.add_constraint(f"assign_{j}", [(1, f"x_{j}_{t}") for t in S], "=", 1)
    for t in S:
        model.add_constraint(f"mach_{t}", [(1, f"x_{j}_{t}") for j in N], "<=", instance.m)
    return model


def build_assign_testing(instance: Instance) -> LinearModel:
    _require(instance, Variant.TESTING, full=False)
    model = _assign_skeleton(instance, "testing")
    n, T = instance.n, instance.T
    N, S = range(1, n + 1), range(1, T + 1)
    for j in range(0, n + 1):
        for t in S:
            model.add_var(f"z_{j}_{t}")
    for j in N:
        for t in S:
            model.add_constraint(
                f"y_{j}_{t}", [(1, f"y_{j}"), (-1, f"z_{n}_{t}")] + [(-1, f"x_{j}_{s}") for s in range(1, t + 1)], ">=", -1
            )
    for j in range(0, n + 1):
        model.add_constraint(f"z1_{j}", [(1, f"z_{j}_1")], "=", 1)
    for t in range(2, T + 1):
        model.add_constraint(f"zlink_{t}", [(1, f"z_0_{t}"), (-1, f"z_{n}_{t - 1}")], "=", 0)
        for j in N:
            model.add_constraint(
                f"zseq_{j}_{t}", [(1, f"z_{j}_{t}"), (-1, f"z_{j - 1}_{t}"), (1, f"x_{j}_{t - 1}")], ">=", 0
            )
            model.add_constraint(
                f"zprob_{j}_{t}", [(1, f"z_{j}_{t}"), (-instance.probs[j - 1], f"z_{j - 1}_{t}")], ">=", 0
            )
    model.objective = {f"y_{j}": Fraction(instance.costs[j - 1]) for j in N if instance.costs[j - 1]}
    return model


def build_assign_search(instance: Instance) -> LinearModel:
    _require(instance, Variant.SEARCH, full=False)
    model = _assign_skeleton(instance, "search")
    n, T = instance.n, instance.T
    N, S = range(1, n + 1), range(1, T + 1)
    pi = _pi(instance)
    for t in S:
        model.add_var(f"zt_{t}")
    for j in N:
        for t in S:
            model.add_constraint(
                f"y_{j}_{t}", [(1, f"y_{j}"), (-1, f"zt_{t}")] + [(-1, f"x_{j}_{s}") for s in range(1, t + 1)], ">=", -1
            )
    # Stated for t = 1 too, which pins zt_1 = 1.
    for t in S:
        terms = [(1, f"zt_{t}")] + [(-pi[j - 1], f"x_{j}_{k}") for k in range(t, T + 1) for j in N]
        model.add_constraint(f"zt_{t}", terms, "=", 0)
    model.objective = {f"y_{j}": Fraction(instance.costs[j - 1]) for j in N if instance.costs[j - 1]}
    return model


BUILDERS = {
    ("po", Variant.TESTING): build_po_testing,
    ("po", Variant.SEARCH): build_po_search,
    ("assign", Variant.TESTING): build_assign_testing,
    ("assign", Variant.SEARCH): build_assign_search,
}


def build_model(formulation: str, instance: Instance) -> LinearModel:
    try:
        builder = BUILDERS[(formulation, instance.variant)]
    except KeyError:
        raise ModelError(f"unknown formulation {formulation!r}") from None
    return builder(instance)


def add_precedence(model: LinearModel, arcs: Iterable[tuple[int, int]]) -> LinearModel:
    """Fix d_i_j = 1 for each arc (0-based tests i before j)."""
    if model.meta.get("formulation") != "po":
        raise ModelError("precedence constraints need a partial-order model")
    arcs = [(int(i), int(j)) for i, j in arcs]
    graph: dict[int, set[int]] = {}
    for i, j in arcs:
        if i == j:
            raise ModelError(f"reflexive precedence arc ({i + 1}, {j + 1})")
        if not (0 <= i < model.meta["n"] and 0 <= j < model.meta["n"]):
            raise ModelError(f"arc ({i + 1}, {j + 1}) references an unknown test")
        graph.setdefault(j, set()).add(i)
    try:
        tuple(TopologicalSorter(graph).static_order())
    except CycleError as exc:
        raise ModelError(f"precedence arcs contain a cycle: {exc.args[1]}") from None
    out = copy.deepcopy(model)
    for i, j in arcs:
        out.add_constraint(f"prec_{i + 1}_{j + 1}", [(1, f"d_{i + 1}_{j + 1}")], "=", 1)
    out.meta["precedence"] = sorted({(i + 1, j + 1) for i, j in arcs})
    return out


def add_slot_costs(model: LinearModel, beta: Sequence) -> LinearModel:
    """Fixed cost beta_t paid with the probability that slot t is used.

    Linearized per test: u_t >= z - 1 + x_jt for every j, with z the
    probability that slot t is reached.
    """
    if model.meta.get("formulation") != "assign":
        raise ModelError("slot costs need an assignment model")
    T, n = model.meta["T"], model.meta["n"]
    beta = [Fraction(b) for b in beta]
    if len(beta) != T:
        raise ModelError(f"need {T} slot costs, got {len(beta)}")
    if any(b < 0 for b in beta):
        raise ModelError("slot costs must be non-negative")
    out = copy.deepcopy(model)
    reach = (lambda t: f"z_{n}_{t}") if model.meta["variant"] == "testing" else (lambda t: f"zt_{t}")
    for t in range(1, T + 1):
        out.add_var(f"u_{t}")
        for j in range(1, n + 1):
            out.add_constraint(f"u_{t}_{j}", [(1, f"u_{t}"), (-1, reach(t)), (-1, f"x_{j}_{t}")], ">=", -1)
        if beta[t - 1]:
            out.objective[f"u_{t}"] = out.objective.get(f"u_{t}", Fraction(0)) + beta[t - 1]
    out.meta["beta"] = [str(b) for b in beta]
    return out


# ---------------------------------------------------------------------------
# Points


def _slot_of(schedule: Schedule) -> dict[int, int]:
    return {j: t for t, slot in enumerate(schedule, start=1) for j in slot}


def schedule_to_point(model: LinearModel, instance: Instance, schedule: Sequence[Iterable[int]]) -> dict[str, object]:
    """Binaries from the schedule; continuous variables at their tight values."""
    schedule = check_schedule(instance, schedule)
    if instance.n != model.meta["n"] or instance.T != model.meta["T"]:
        raise ModelError("instance does not match model dimensions")
    slot = _slot_of(schedule)
    n, T = instance.n, instance.T
    N = range(1, n + 1)
    point: dict[str, object] = {}
    if model.meta["formulation"] == "po":
        for i in N:
            for j in N:
                if i != j:
                    point[f"d_{i}_{j}"] = int(slot[i - 1] < slot[j - 1])
                    if i < j:
                        point[f"mu_{i}_{j}"] = int(slot[i - 1] == slot[j - 1])
        if model.meta["variant"] == "testing":
            for i in N:
                a = 1
                point[f"a_{i}_0"] = a
                for j in N:
                    if slot[j - 1] < slot[i - 1]:
                        a = a * instance.probs[j - 1]
                    point[f"a_{i}_{j}"] = a
        else:
            pi = _pi(instance)
            for i in N:
                point[f"a_{i}"] = sum((pi[j - 1] for j in N if slot[j - 1] >= slot[i - 1]), Fraction(0))
        reach = None
    else:
        for j in N:
            for t in range(1, T + 1):
                point[f"x_{j}_{t}"] = int(slot[j - 1] == t)
        if model.meta["variant"] == "testing":
            reach_at = {}
            prev_end = 1
            for t in range(1, T + 1):
                z = 1 if t == 1 else prev_end
                point[f"z_0_{t}"] = z
                for j in N:
                    if t > 1 and slot[j - 1] == t - 1:
                        z = z * instance.probs[j - 1]
                    point[f"z_{j}_{t}"] = z if t > 1 else 1
                prev_end = point[f"z_{n}_{t}"]
                reach_at[t] = point[f"z_{n}_{t}"]
        else:
            pi = _pi(instance)
            reach_at = {}
            for t in range(1, T + 1):
                reach_at[t] = sum((pi[j - 1] for j in N if slot[j - 1] >= t), Fraction(0))
                point[f"zt_{t}"] = reach_at[t]
        for j in N:
            point[f"y_{j}"] = reach_at[slot[j - 1]]
        reach = reach_at
    for t in range(1, T + 1):
        if f"u_{t}" in model.variables:
            point[f"u_{t}"] = reach[t] if schedule[t - 1] else 0
    missing = set(model.variables) - set(point)
    if missing:
        raise ModelError(f"no point value for {sorted(missing)[:5]}")
    return point


@dataclass
class PointCheck:
    feasible: bool
    objective: object
    violations: list[tuple[str, object]]  # (constraint or variable name, slack)


def verify_point(model: LinearModel, point: dict[str, object], tol=0) -> PointCheck:
    """Exact constraint, bound and integrality check; slack is negative when violated."""
    missing = [v for v in model.variables if v not in point]
    if missing:
        raise ModelError(f"point lacks values for {missing[:5]}")
    tol = Fraction(tol)
    violations: list[tuple[str, object]] = []
    for var in model.variables.values():
        value = point[var.name]
        if value < var.lower - tol:
            violations.append((f"bound:{var.name}", value - var.lower))
        if var.upper is not None and value > var.upper + tol:
            violations.append((f"bound:{var.name}", var.upper - value))
        if var.kind == BINARY and min(abs(value), abs(value - 1)) > tol:
            violations.append((f"integrality:{var.name}", -min(abs(value), abs(value - 1))))
    for con in model.constraints:
        lhs = sum((c * point[v] for v, c in con.coeffs.items()), Fraction(0))
        if con.sense == "<=":
            slack = con.rhs - lhs
            bad = slack < -tol
        elif con.sense == ">=":
            slack = lhs - con.rhs
            bad = slack < -tol
        else:
            slack = -abs(lhs - con.rhs)
            bad = slack < -tol
        if bad:
            violations.append((con.name, slack))
    objective = sum((c * point[v] for v, c in model.objective.items()), Fraction(0))
    return PointCheck(not violations, objective, violations)


def schedule_from_point(model: LinearModel, point: dict[str, object]) -> Schedule:
    """Recover the slot assignment encoded by a (near-)integral point."""
    n, T, m = model.meta["n"], model.meta["T"], model.meta["m"]
    slots: list[set[int]] = [set() for _ in range(T)]
    for j in range(1, n + 1):
        if model.meta["formulation"] == "assign":
            t = max(range(1, T + 1), key=lambda t: point.get(f"x_{j}_{t}", 0))
        else:
            before = sum(round(float(point.get(f"d_{i}_{j}", 0))) for i in range(1, n + 1) if i != j)
            t = min(before // m + 1, T)
        slots[t - 1].add(j - 1)
    return tuple(frozenset(s) for s in slots)


# ---------------------------------------------------------------------------
# LP text


def _terminates(x: Fraction) -> bool:
    d = x.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def _decimal(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    sign = "-" if x < 0 else ""
    x = abs(x)
    digits = 0
    while (x * 10**digits).denominator != 1:
        digits += 1
    scaled = str((x * 10**digits).numerator).rjust(digits + 1, "0")
    return f"{sign}{scaled[:-digits]}.{scaled[-digits:]}"


def _scale_for(values: Iterable[Fraction]) -> int:
    values = list(values)
    if all(_terminates(v) for v in values):
        return 1
    return lcm(*(v.denominator for v in values))


def _render_terms(coeffs: dict[str, Fraction], scale: int) -> list[str]:
    out = []
    for k, (var, coef) in enumerate(coeffs.items()):
        coef = coef * scale
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{_decimal(mag)} {var}"
        if k == 0:
            out.append(body if sign == "+" else f"- {body}")
        else:
            out.append(f"{sign} {body}")
    return out


def _wrap(head: str, terms: list[str], tail: str = "") -> list[str]:
    lines, current = [], head
    for term in terms:
        if len(current) + len(term) + 1 > 200:
            lines.append(current)
            current = "   "
        current += " " + term
    if tail:
        current += " " + tail
    lines.append(current)
    return lines


def emit_lp(model: LinearModel) -> str:
    """Deterministic LP-format text; non-terminating decimals are cleared by per-row scaling."""
    lines = [f"\\ tctp-meta {json.dumps(model.meta, sort_keys=True)}"]
    if model.meta.get("formulation") == "po":
        lines.append("\\ transitivity rows emitted eagerly; a solver may load them as lazy constraints")
    obj_scale = _scale_for(model.objective.values())
    if obj_scale != 1:
        lines.append(f"\\ objective_scale {obj_scale}")
    lines.append("Minimize")
    if model.objective:
        lines += _wrap(" obj:", _render_terms(model.objective, obj_scale))
    else:
        lines.append(" obj: 0")
    lines.append("Subject To")
    for con in model.constraints:
        scale = _scale_for(list(con.coeffs.values()) + [con.rhs])
        terms = _render_terms(con.coeffs, scale) or ["0 " + next(iter(model.variables))]
        lines += _wrap(f" {con.name}:", terms, f"{con.sense} {_decimal(con.rhs * scale)}")
    lines.append("Bounds")
    for var in model.variables.values():
        if var.kind == CONTINUOUS:
            upper = "+inf" if var.upper is None else _decimal(var.upper)
            lines.append(f" {_decimal(var.lower)} <= {var.name} <= {upper}")
    binaries = [v.name for v in model.variables.values() if v.kind == BINARY]
    if binaries:
        lines.append("Binaries")
        lines += _wrap("", binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


_TERM = re.compile(r"([+-])?\s*(\d+(?:\.\d+)?)?\s*([A-Za-z_][A-Za-z0-9_]*)")


def _parse_terms(text: str) -> dict[str, Fraction]:
    coeffs: dict[str, Fraction] = {}
    text = text.strip()
    if text == "0":
        return coeffs
    for sign, num, var in _TERM.findall(text):
        coef = Fraction(num) if num else Fraction(1)
        if sign == "-":
            coef = -coef
        coeffs[var] = coeffs.get(var, Fraction(0)) + coef
    return coeffs


def parse_lp(text: str) -> LinearModel:
    """Read back LP text produced by :func:`emit_lp`."""
    model = LinearModel()
    section = None
    buffer: list[str] = []
    obj_scale = 1
    statements: list[tuple[str, str]] = []
    for raw in text.splitlines():
        if raw.startswith("\\"):
            if raw.startswith("\\ tctp-meta "):
                model.meta = json.loads(raw[len("\\ tctp-meta ") :])
            elif raw.startswith("\\ objective_scale "):
                obj_scale = int(raw.split()[-1])
            continue
        stripped = raw.strip()
        if stripped in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
            if buffer:
                statements.append((section, " ".join(buffer)))
                buffer = []
            section = stripped
            continue
        if raw.startswith("   ") and buffer:
            buffer.append(stripped)
        else:
            if buffer:
                statements.append((section, " ".join(buffer)))
            buffer = [stripped]
    if buffer:
        statements.append((section, " ".join(buffer)))

    pending: list[tuple[str, dict[str, Fraction], str, Fraction]] = []
    for section, stmt in statements:
        if section == "Minimize":
            body = stmt.split(":", 1)[1]
            model.objective = {v: c / obj_scale for v, c in _parse_terms(body).items()}
        elif section == "Subject To":
            name, body = stmt.split(":", 1)
            lhs, sense, rhs = re.split(r"\s(<=|>=|=)\s", body)
            pending.append((name.strip(), _parse_terms(lhs), sense, Fraction(rhs)))
        elif section == "Bounds":
            lo, var, hi = re.fullmatch(r"(\S+) <= (\S+) <= (\S+)", stmt).groups()
            model.add_var(var, CONTINUOUS, Fraction(lo), None if hi == "+inf" else Fraction(hi))
        elif section == "Binaries":
            for var in stmt.split():
                model.add_var(var, BINARY)
    for name, coeffs, sense, rhs in pending:
        model.constraints.append(Constraint(name, coeffs, sense, rhs))
    return model


def model_metadata(model: LinearModel, original_n: int | None = None) -> dict:
    """Sidecar mapping variable names to test/slot meaning."""
    variables = {}
    for name in model.variables:
        parts = name.split("_")
        role, idx = parts[0], [int(p) for p in parts[1:]]
        entry: dict[str, object] = {"role": role}
        if role == "x":
            entry.update(test=idx[0], slot=idx[1])
        elif role in ("d", "mu"):
            entry.update(tests=idx)
        elif role in ("y", "a") and idx:
            entry.update(test=idx[0])
        elif role in ("u", "zt"):
            entry.update(slot=idx[0])
        elif role == "z":
            entry.update(prefix=idx[0], slot=idx[1])
        variables[name] = entry
    return {
        **model.meta,
        "original_n": model.meta["n"] if original_n is None else original_n,
        "objective_scale": _scale_for(model.objective.values()),
        "variables": variables,
    }


def point_from_solution(text: str, model: LinearModel, missing_as_zero: bool = True) -> dict[str, Fraction]:
    """Parse ``name value`` solution files (Gurobi .sol style; CBC's indexed rows also accepted)."""
    point: dict[str, Fraction] = {}
    for line in text.splitlines():
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if len(tokens) >= 3 and tokens[0].isdigit():
            tokens = tokens[1:]
        if tokens[0] in model.variables:
            try:
                point[tokens[0]] = Fraction(tokens[1])
            except (ValueError, IndexError):
                raise ModelError(f"bad value on line: {line!r}") from None
    if missing_as_zero:
        for name in model.variables:
            point.setdefault(name, Fraction(0))
    return point
