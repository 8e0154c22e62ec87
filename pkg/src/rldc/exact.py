"""Exact arithmetic for threshold comparisons.

Degree thresholds and kernel-size bounds take the form c * n**(p/q) with
rational c, which is irrational whenever q does not divide p.  Comparing an
integer degree (or a rational weight) against such a bound with floats can
flip the outcome at boundary cases, so every comparison here is reduced to
arbitrary-precision integer arithmetic:

    v  >  (a/b) * n**(p/q)    <=>    (v*b)**q  >  a**q * n**p      (p >= 0)
                              <=>    (v*b)**q * n**(-p) > a**q     (p < 0)

which is valid because all quantities are nonnegative and x -> x**q is
monotone for q >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def parse_fraction(text: str | int | Fraction) -> Fraction:
    """Parse "a/b" or "a" (or pass through ints/Fractions) into a Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    return Fraction(text.strip())


def format_fraction(value: Fraction) -> str:
    """Canonical "a/b" form, losslessly round-trippable by parse_fraction."""
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class PowerBound:
    """The exact positive value ``coeff * base ** exponent``.

    Supports exact order comparisons against ints, Fractions, and other
    PowerBounds over the same base.  Used for daisy degree thresholds
    (c * n**(i/l)) and kernel-size bounds (l * n**(1 - i/l)).
    """

    coeff: Fraction
    base: int
    exponent: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.coeff, Fraction):
            object.__setattr__(self, "coeff", Fraction(self.coeff))
        if not isinstance(self.exponent, Fraction):
            object.__setattr__(self, "exponent", Fraction(self.exponent))
        if self.coeff <= 0:
            raise ValueError(f"coefficient must be positive, got {self.coeff}")
        if self.base < 1:
            raise ValueError(f"base must be >= 1, got {self.base}")

    def scale_exponent(self, delta: Fraction) -> "PowerBound":
        """The bound multiplied by base**delta."""
        return PowerBound(self.coeff, self.base, self.exponent + delta)

    def cmp(self, other: "int | Fraction | PowerBound") -> int:
        """Sign of (self - other): -1, 0, or +1. Exact."""
        if isinstance(other, PowerBound):
            if other.base != self.base:
                raise ValueError("PowerBounds over different bases are not comparable")
            # (a1/b1) n^(e1)  vs  (a2/b2) n^(e2): move the power to one side.
            diff = self.exponent - other.exponent
            ratio = other.coeff / self.coeff
            return _cmp_power_vs_fraction(self.base, diff, ratio)
        value = Fraction(other)
        if value <= 0:
            return 1  # the bound is strictly positive
        return _cmp_power_vs_fraction(self.base, self.exponent, value / self.coeff)

    def __lt__(self, other) -> bool:
        return self.cmp(other) < 0

    def __le__(self, other) -> bool:
        return self.cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self.cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self.cmp(other) >= 0

    def exceeded_by(self, value: int | Fraction) -> bool:
        """True iff value > self (the strict ">" used for kernel membership)."""
        return self.cmp(value) < 0

    def at_least(self, value: int | Fraction) -> bool:
        """True iff value <= self (the "at most t" of daisy degree checks)."""
        return self.cmp(value) >= 0

    def __float__(self) -> float:
        return float(self.coeff) * self.base ** float(self.exponent)

    def to_json(self) -> dict:
        return {
            "coeff": format_fraction(self.coeff),
            "base": self.base,
            "exponent": format_fraction(self.exponent),
            "approx": float(self),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PowerBound":
        return cls(parse_fraction(obj["coeff"]), int(obj["base"]), parse_fraction(obj["exponent"]))


def _cmp_power_vs_fraction(base: int, exponent: Fraction, value: Fraction) -> int:
    """Sign of (base**exponent - value) for positive value, via integer powers."""
    p, q = exponent.numerator, exponent.denominator
    u, v = value.numerator, value.denominator
    # base^(p/q) vs u/v  <=>  base^p * v^q  vs  u^q
    if p >= 0:
        lhs = pow(base, p) * pow(v, q)
        rhs = pow(u, q)
    else:
        lhs = pow(v, q)
        rhs = pow(u, q) * pow(base, -p)
    return (lhs > rhs) - (lhs < rhs)


def int_exceeds(value: int, coeff: Fraction, base: int, exponent: Fraction) -> bool:
    """Exact test  value > coeff * base**exponent  for nonnegative value."""
    if value <= 0:
        return False
    return PowerBound(coeff, base, exponent).exceeded_by(value)


def floor_power_bound(bound: PowerBound) -> int:
    """Exact floor of the bound's value, by binary search over integers.

    Lets hot loops replace "integer degree d > bound" with "d > floor(bound)"
    (equivalent for integer d whether or not the bound is itself an integer).
    """
    a, b = bound.coeff.numerator, bound.coeff.denominator
    p, q = bound.exponent.numerator, bound.exponent.denominator
    rhs = pow(a, q) * pow(bound.base, max(p, 0))
    scale = pow(b, q) * pow(bound.base, max(-p, 0))

    def fits(m: int) -> bool:  # m <= bound
        return pow(m, q) * scale <= rhs

    hi = 1
    while fits(hi):
        hi *= 2
    lo = hi // 2 if hi > 1 else 0
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo
