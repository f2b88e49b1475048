"""Certified arithmetic layer: enclosure soundness and sign decisions."""

import random
from fractions import Fraction

import mpmath
import pytest

from liouflow.certreal import (
    CertifiedReal,
    agree,
    certified_sign,
    cos2pi,
    cosh_cr,
    cr_max,
    cr_min,
    exp_cr,
    refine_until,
    sin2pi,
    sqrt_cr,
)
from liouflow.errors import DivisionByNearZero, Indeterminate, PrecisionExhausted


def frac_cr(p, q, prec=128):
    return CertifiedReal.from_fraction(Fraction(p, q), prec)


def test_sign_positive():
    assert certified_sign(CertifiedReal(3.0, 0.1)) == 1


def test_sign_straddle_raises():
    with pytest.raises(Indeterminate):
        certified_sign(CertifiedReal("0.05", "0.1"))


def test_sign_tiny_negative():
    assert certified_sign(CertifiedReal("-1e-40", "1e-41")) == -1


def test_sign_exact_zero():
    assert certified_sign(CertifiedReal.zero()) == 0


def test_dyadic_fraction_exact():
    x = frac_cr(1, 2)
    assert x.is_exact and x.err == 0 and x.value == 0.5


def test_division_by_near_zero():
    with pytest.raises(DivisionByNearZero):
        frac_cr(1, 1) / CertifiedReal("0.0", "0.5")


def random_fraction(rng, scale=10**6):
    n = rng.randint(-scale, scale)
    d = rng.randint(1, scale)
    return Fraction(n, d)


def test_enclosure_soundness_rational_expressions():
    # 1000 random rational expressions evaluated at several precisions:
    # exact rational evaluation must lie inside every returned enclosure.
    rng = random.Random(20240811)
    for _ in range(1000):
        a, b, c = (random_fraction(rng) for _ in range(3))
        if c == 0:
            c = Fraction(1)
        exact = (a + b) * a - b / c
        for prec in (32, 64, 128):
            x = frac_cr(a.numerator, a.denominator, prec)
            y = frac_cr(b.numerator, b.denominator, prec)
            z = frac_cr(c.numerator, c.denominator, prec)
            w = (x + y) * x - y / z
            assert w.contains(CertifiedReal.from_fraction(exact, 256))


def test_monotone_refinement():
    fr = Fraction(1, 3)
    for p in (32, 64, 128, 256):
        e1 = CertifiedReal.from_fraction(fr, p).err
        e2 = CertifiedReal.from_fraction(fr, 2 * p).err
        assert e2 <= e1


def test_trig_range():
    rng = random.Random(7)
    for _ in range(200):
        x = CertifiedReal(rng.uniform(-50, 50), abs(rng.gauss(0, 0.01)), 64)
        for f in (cos2pi, sin2pi):
            y = f(x)
            assert y.lo >= -1 and y.hi <= 1


def test_argument_reduction_huge_rational():
    # cos(2 pi x) for |x| up to 1e40 equals cos(2 pi frac(x)) with exact
    # rational reduction.
    rng = random.Random(99)
    for _ in range(50):
        big = rng.randint(0, 10**40)
        fr = random_fraction(rng, 10**4)
        x = Fraction(big) + fr
        a = cos2pi(CertifiedReal.from_fraction(x, 256), 128)
        b = cos2pi(CertifiedReal.from_fraction(fr - (fr.numerator // fr.denominator), 256), 128)
        assert agree(a, b)
        assert a.err < mpmath.ldexp(1, -100)


def test_cos_exact_quarters():
    assert cos2pi(frac_cr(1, 4)).is_exact
    assert cos2pi(frac_cr(1, 4)).value == 0
    assert cos2pi(frac_cr(1, 2)).value == -1
    assert sin2pi(frac_cr(3, 4)).value == -1
    assert sin2pi(frac_cr(0, 1)).value == 0


def test_exp_against_taylor_oracle():
    # independent oracle: rational Taylor partial sum with remainder bound
    n_terms = 30
    s = Fraction(0)
    term = Fraction(1)
    for k in range(1, n_terms + 1):
        term *= Fraction(-1, k)
        s += term
    s += Fraction(1)
    remainder = Fraction(1, 1)
    for k in range(1, n_terms + 2):
        remainder /= k
    x = exp_cr(CertifiedReal.from_int(-1, 128))
    lo, hi = s - 2 * remainder, s + 2 * remainder
    assert x.lo >= CertifiedReal.from_fraction(lo, 256).lo
    assert x.hi <= CertifiedReal.from_fraction(hi, 256).hi


def test_exp_huge_negative_argument():
    x = exp_cr(CertifiedReal.from_int(-10**30, 128))
    assert x.hi > 0
    assert x.hi < mpmath.ldexp(1, -10**9)


def test_cosh_two_pi():
    # cosh(2 pi) = (e^{2 pi} + e^{-2 pi}) / 2, e^{2 pi} = 535.4916555...
    two_pi = CertifiedReal("6.28318530717958647692528676655900576839", 0, 150)
    v = cosh_cr(two_pi, 128)
    ref = (exp_cr(two_pi) + exp_cr(-two_pi)) / CertifiedReal.from_int(2)
    assert agree(v, ref)
    assert mpmath.nstr(v.value, 30) == "267.746761483748222245931879901"


def test_sqrt():
    v = sqrt_cr(CertifiedReal.from_int(2, 128))
    assert abs(v.value - mpmath.sqrt(2)) < 1e-15 and v.err < 1e-30


def test_refine_until_decides():
    from liouflow.exactexpr import ExactExpr, eval_expr

    target = ExactExpr.exp(-1) - ExactExpr.rational(Fraction(3678, 10000))
    out = refine_until(lambda p: eval_expr(target, p), certified_sign, 16, 64)
    assert certified_sign(out) == 1


def test_refine_until_zero_immediate():
    out = refine_until(lambda p: CertifiedReal.zero(p), certified_sign, 16, 32)
    assert certified_sign(out) == 0


def test_refine_until_exhausts():
    with pytest.raises(PrecisionExhausted):
        refine_until(
            lambda p: CertifiedReal(0, mpmath.ldexp(1, -5), p),
            certified_sign,
            16,
            32,
        )


def test_min_max_hull():
    a, b = frac_cr(1, 4), frac_cr(3, 4)
    assert cr_min(a, b).value == 0.25
    assert cr_max(a, b).value == 0.75
    h = a.hull(b)
    assert h.lo == 0.25 and h.hi == 0.75


def test_widened():
    x = frac_cr(1, 2).widened(frac_cr(1, 4))
    assert x.lo == 0.25 and x.hi == 0.75
