"""Instance / schedule text formats and the generation manifest."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable

from tctp.core import Instance, InstanceError, Schedule, Variant, make_schedule


class FormatError(ValueError):
    pass


def write_instance(instance: Instance) -> str:
    if instance.variant is Variant.SEARCH:
        probs: list = list(instance.probs)
    else:
        probs = []
        for p in instance.probs:
            if not isinstance(p, (int, Fraction)):
                raise FormatError("only rational probabilities can be serialized")
            p = Fraction(p)
            probs.append({"num": p.numerator, "den": p.denominator})
    obj = {
        "variant": instance.variant.value,
        "m": instance.m,
        "T": instance.T,
        "costs": list(instance.costs),
        "probs": probs,
    }
    return json.dumps(obj) + "\n"


def _int_field(obj: dict, name: str) -> int:
    value = obj.get(name)
    if not isinstance(value, int) or isinstance(value, bool):
        raise FormatError(f"field {name!r} must be an integer")
    return value


def read_instance(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise FormatError("instance must be a JSON object")
    try:
        variant = Variant(obj.get("variant"))
    except ValueError:
        raise FormatError("field 'variant' must be 'testing' or 'search'") from None
    m, T = _int_field(obj, "m"), _int_field(obj, "T")
    costs = obj.get("costs")
    if not isinstance(costs, list) or any(not isinstance(c, int) or isinstance(c, bool) for c in costs):
        raise FormatError("field 'costs' must be an array of integers")
    raw = obj.get("probs")
    if not isinstance(raw, list):
        raise FormatError("field 'probs' must be an array")
    if variant is Variant.SEARCH:
        if any(isinstance(w, dict) for w in raw):
            raise FormatError("search instances take integer weights in 'probs', not {num, den} pairs")
        if any(not isinstance(w, int) or isinstance(w, bool) for w in raw):
            raise FormatError("search weights must be integers")
        probs: list = raw
    else:
        probs = []
        for entry in raw:
            if not isinstance(entry, dict) or set(entry) != {"num", "den"}:
                raise FormatError("testing probabilities must be {num, den} objects")
            num, den = entry["num"], entry["den"]
            if not isinstance(num, int) or not isinstance(den, int):
                raise FormatError("num and den must be integers")
            if den == 0:
                raise FormatError("probability with zero denominator")
            probs.append(Fraction(num, den))
    try:
        return Instance(variant, m, T, tuple(costs), tuple(probs))
    except InstanceError as exc:
        raise FormatError(str(exc)) from None


def write_schedule(schedule: Iterable[Iterable[int]]) -> str:
    return json.dumps([sorted(j + 1 for j in slot) for slot in schedule]) + "\n"


def read_schedule(text: str) -> Schedule:
    obj = json.loads(text)
    if isinstance(obj, dict):
        obj = obj.get("schedule")
    if not isinstance(obj, list) or any(not isinstance(s, list) for s in obj):
        raise FormatError("schedule must be an array of arrays of 1-based indices")
    return make_schedule([j - 1 for j in slot] for slot in obj)


def read_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"not a rational number: {text!r}") from None
