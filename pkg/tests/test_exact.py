import random
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest

from rldc.exact import PowerBound, floor_power_bound, format_fraction, parse_fraction


def test_fraction_round_trip():
    for f in (Fraction(1, 2), Fraction(7, 8), Fraction(3), Fraction(0, 5)):
        assert parse_fraction(format_fraction(f)) == f
    assert parse_fraction("2/4") == Fraction(1, 2)
    assert parse_fraction("5") == 5


def test_exact_boundary_equality():
    # (1/2) * 1024**(1/2) == 16 exactly
    b = PowerBound(Fraction(1, 2), 1024, Fraction(1, 2))
    assert b.cmp(16) == 0
    assert b.cmp(Fraction(16)) == 0
    assert not b.exceeded_by(16)  # strict >
    assert b.exceeded_by(17)
    assert b.at_least(16)         # "at most" allows equality
    assert not b.at_least(17)


def test_irrational_threshold_ordering():
    # 8**(1/2) = 2.828...: 2 below, 3 above
    b = PowerBound(Fraction(1), 8, Fraction(1, 2))
    assert b.cmp(2) > 0
    assert b.cmp(3) < 0
    assert not b.exceeded_by(2)
    assert b.exceeded_by(3)


def test_negative_exponent():
    # 1026**(-1/3) ~ 0.0992: bigger than 64/1026, smaller than 1/2
    b = PowerBound(Fraction(1), 1026, Fraction(-1, 3))
    assert b.cmp(Fraction(64, 1026)) > 0
    assert b.cmp(Fraction(1, 2)) < 0
    assert b.cmp(0) > 0
    assert b.cmp(-5) > 0


def test_power_vs_power_same_base():
    lo = PowerBound(Fraction(1), 64, Fraction(1, 3))
    hi = PowerBound(Fraction(1), 64, Fraction(1, 2))
    assert lo.cmp(hi) < 0 and hi.cmp(lo) > 0
    assert lo.cmp(PowerBound(Fraction(1), 64, Fraction(1, 3))) == 0
    with pytest.raises(ValueError):
        lo.cmp(PowerBound(Fraction(1), 65, Fraction(1, 3)))


def test_scale_exponent():
    c = PowerBound(Fraction(1), 1026, Fraction(-1, 3))
    t1 = c.scale_exponent(Fraction(1, 3))
    assert t1.cmp(1) == 0  # n**(-1/3) * n**(1/3) == 1


def test_validation():
    with pytest.raises(ValueError):
        PowerBound(Fraction(0), 4, Fraction(1, 2))
    with pytest.raises(ValueError):
        PowerBound(Fraction(1), 0, Fraction(1, 2))


def test_json_round_trip():
    b = PowerBound(Fraction(7, 8), 256, Fraction(2, 3))
    assert PowerBound.from_json(b.to_json()) == b


def test_cmp_against_decimal_oracle():
    # High-precision decimal arithmetic as an independent comparison path;
    # ambiguous near-ties are resolved by the constructed exact cases above.
    getcontext().prec = 60
    rng = random.Random(20240817)
    for _ in range(500):
        a = rng.randint(1, 50)
        b = rng.randint(1, 50)
        base = rng.randint(2, 2000)
        p = rng.randint(-6, 6)
        q = rng.randint(1, 6)
        v = Fraction(rng.randint(1, 5000), rng.randint(1, 50))
        bound = PowerBound(Fraction(a, b), base, Fraction(p, q))
        approx = (
            Decimal(a) / Decimal(b) * (Decimal(base) ** (Decimal(p) / Decimal(q)))
        )
        target = Decimal(v.numerator) / Decimal(v.denominator)
        if abs(approx - target) > Decimal("1e-40") * max(approx, target):
            expected = 1 if approx > target else -1
            assert bound.cmp(v) == expected, (bound, v)


def test_floor_power_bound():
    assert floor_power_bound(PowerBound(Fraction(1), 8, Fraction(1, 2))) == 2
    assert floor_power_bound(PowerBound(Fraction(1, 2), 1024, Fraction(1, 2))) == 16
    assert floor_power_bound(PowerBound(Fraction(7, 8), 8, Fraction(1, 2))) == 2
    assert floor_power_bound(PowerBound(Fraction(1), 1026, Fraction(-1, 3))) == 0
    assert floor_power_bound(PowerBound(Fraction(5), 7, Fraction(0))) == 5

    rng = random.Random(7)
    for _ in range(300):
        bound = PowerBound(
            Fraction(rng.randint(1, 40), rng.randint(1, 40)),
            rng.randint(2, 1500),
            Fraction(rng.randint(-5, 5), rng.randint(1, 5)),
        )
        m = floor_power_bound(bound)
        # Defining property, checked through the exact comparator.
        assert bound.cmp(m) >= 0
        assert bound.cmp(m + 1) < 0
