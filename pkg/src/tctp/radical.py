"""Exact arithmetic in Q(r) with r = (1/D)^(1/k) the positive real root.

Elements are stored as coefficient vectors over the basis 1, r, ..., r^(d-1)
where d is the degree of the minimal polynomial of r.  For a positive
radicand the minimal polynomial of D^(1/k) is x^(k/g) - D^(1/g) with g the
largest divisor of k such that D is a perfect g-th power, so the
representation is canonical and equality is coefficient equality.  Signs are
decided by certified rational bisection, never by floating point.
"""

from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from typing import Sequence, Union

Number = Union[int, Fraction, "RadicalNumber"]


def integer_root(value: int, k: int) -> int | None:
    """Exact integer k-th root of a non-negative integer, or None."""
    if value < 0:
        raise ValueError("negative radicand")
    if value in (0, 1):
        return value
    lo, hi = 0, 1 << (value.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= value:
            lo = mid
        else:
            hi = mid - 1
    return lo if lo**k == value else None


def _rational_root(value: Fraction, k: int) -> Fraction | None:
    num = integer_root(value.numerator, k)
    den = integer_root(value.denominator, k)
    if num is None or den is None:
        return None
    return Fraction(num, den)


class RootField:
    """The field Q(r) where r is the positive real k-th root of ``radicand``."""

    def __init__(self, radicand: Fraction | int, k: int):
        radicand = Fraction(radicand)
        if radicand <= 0 or k < 1:
            raise ValueError("radicand must be positive and k >= 1")
        g = max(d for d in range(1, k + 1) if k % d == 0 and _rational_root(radicand, d) is not None)
        self.k = k
        self.radicand = radicand
        self.degree = k // g
        # r^degree == self.base
        self.base: Fraction = _rational_root(radicand, g)  # type: ignore[assignment]
        self._brackets: dict[Fraction, tuple[Fraction, Fraction]] = {}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RootField) and (self.base, self.degree) == (other.base, other.degree)

    def __hash__(self) -> int:
        return hash((self.base, self.degree))

    def __repr__(self) -> str:
        return f"RootField({self.radicand}, {self.k})"

    def element(self, coeffs: Sequence[Fraction | int]) -> RadicalNumber:
        return RadicalNumber(self, coeffs)

    def root(self) -> RadicalNumber:
        if self.degree == 1:
            return RadicalNumber(self, [self.base])
        return RadicalNumber(self, [0, 1])

    def bracket(self, width: Fraction) -> tuple[Fraction, Fraction]:
        """Rational interval [lo, hi] containing r with hi - lo <= width."""
        if self.degree == 1:
            return self.base, self.base
        if width in self._brackets:
            return self._brackets[width]
        lo, hi = Fraction(0), max(Fraction(1), self.base)
        while hi - lo > width:
            mid = (lo + hi) / 2
            if mid**self.degree <= self.base:
                lo = mid
            else:
                hi = mid
        self._brackets[width] = (lo, hi)
        return lo, hi


def _poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@total_ordering
class RadicalNumber:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: RootField, coeffs: Sequence[Fraction | int]):
        d = field.degree
        reduced = [Fraction(0)] * d
        for power, c in enumerate(coeffs):
            if not c:
                continue
            q, rem = divmod(power, d)
            reduced[rem] += Fraction(c) * field.base**q
        self.field = field
        self.coeffs = tuple(reduced)

    def _lift(self, other: Number) -> RadicalNumber:
        if isinstance(other, RadicalNumber):
            if other.field != self.field:
                raise ValueError("operands live in different root fields")
            return other
        if isinstance(other, (int, Fraction)):
            return RadicalNumber(self.field, [other])
        return NotImplemented

    def __add__(self, other: Number) -> RadicalNumber:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return RadicalNumber(self.field, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> RadicalNumber:
        return RadicalNumber(self.field, [-a for a in self.coeffs])

    def __sub__(self, other: Number) -> RadicalNumber:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Number) -> RadicalNumber:
        return (-self) + other

    def __mul__(self, other: Number) -> RadicalNumber:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        prod = [Fraction(0)] * (2 * self.field.degree)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    prod[i + j] += a * b
        return RadicalNumber(self.field, prod)

    __rmul__ = __mul__

    def inverse(self) -> RadicalNumber:
        # Solve (self * b) == 1 as a linear system over Q.
        d = self.field.degree
        cols = []
        for j in range(d):
            basis = [0] * d
            basis[j] = 1
            cols.append((self * RadicalNumber(self.field, basis)).coeffs)
        rows = [[cols[j][i] for j in range(d)] + [Fraction(int(i == 0))] for i in range(d)]
        for col in range(d):
            pivot = next((r for r in range(col, d) if rows[r][col]), None)
            if pivot is None:
                raise ZeroDivisionError("RadicalNumber division by zero")
            rows[col], rows[pivot] = rows[pivot], rows[col]
            pv = rows[col][col]
            rows[col] = [v / pv for v in rows[col]]
            for r in range(d):
                if r != col and rows[r][col]:
                    f = rows[r][col]
                    rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
        return RadicalNumber(self.field, [rows[i][d] for i in range(d)])

    def __truediv__(self, other: Number) -> RadicalNumber:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: Number) -> RadicalNumber:
        return self.inverse() * other

    def __pow__(self, exponent: int) -> RadicalNumber:
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = RadicalNumber(self.field, [1])
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def sign(self) -> int:
        nz = [i for i, c in enumerate(self.coeffs) if c]
        if not nz:
            return 0
        if nz == [0]:
            return 1 if self.coeffs[0] > 0 else -1
        # Nonzero canonical element of a field => nonzero value; refine the
        # bracket until the Lipschitz error bound is below |value at lo|.
        lip_coeffs = [i * abs(c) for i, c in enumerate(self.coeffs)]
        width = Fraction(1, 2**16)
        while True:
            lo, hi = self.field.bracket(width)
            at_lo = _poly_eval(self.coeffs, lo)
            lip = _poly_eval(lip_coeffs[1:], max(hi, Fraction(1)))
            if abs(at_lo) > lip * (hi - lo):
                return 1 if at_lo > 0 else -1
            width /= 2**16

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, RadicalNumber)):
            o = self._lift(other)
            return self.coeffs == o.coeffs
        return NotImplemented

    def __hash__(self) -> int:
        if all(c == 0 for c in self.coeffs[1:]):
            return hash(self.coeffs[0])
        return hash((self.field, self.coeffs))

    def __lt__(self, other: Number) -> bool:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return (self - o).sign() < 0

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __float__(self) -> float:
        lo, hi = self.field.bracket(Fraction(1, 2**80))
        return float(_poly_eval(self.coeffs, (lo + hi) / 2))

    def __repr__(self) -> str:
        terms = [f"{c}*r^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"RadicalNumber({' + '.join(terms) or '0'}; r^{self.field.degree}={self.field.base})"
