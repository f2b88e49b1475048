"""Exact expression algebra: canonical form, grammar, certified evaluation."""

import random
from fractions import Fraction

import mpmath
import pytest

from liouflow.certreal import CertifiedReal, certified_sign
from liouflow.errors import MalformedExpr
from liouflow.exactexpr import ExactExpr, cos2pi_expr, eval_expr, sin2pi_expr


def R(*args):
    return ExactExpr.rational(Fraction(*args))


def test_eval_exact_dyadic():
    v = eval_expr(R(1, 2), 64)
    assert v.value == 0.5 and v.err == 0


def test_eval_exp_minus_one_against_taylor():
    # Taylor oracle with rational remainder bound
    s, term = Fraction(1), Fraction(1)
    for k in range(1, 31):
        term *= Fraction(-1, k)
        s += term
    rem = Fraction(1)
    for k in range(1, 33):
        rem /= k
    v = eval_expr(ExactExpr.exp(-1), 64)
    assert v.err <= mpmath.ldexp(1, -60)
    # the enclosure must contain the oracle's truth interval [s - rem, s + rem]
    truth = CertifiedReal.from_fraction(s, 256).widened(
        CertifiedReal.from_fraction(rem, 256)
    )
    assert v.contains(truth)


def test_eval_half_plus_exp33():
    v = eval_expr(R(1, 2) + ExactExpr.exp(-33), 128)
    # e^-33 = 4.658886145103397e-15 (Taylor oracle), so the sum starts
    # 0.5000000000000046588861...
    assert mpmath.nstr(v.value, 23) == "0.50000000000000465888615"


def test_eval_contract():
    rng = random.Random(3)
    for _ in range(50):
        e = R(rng.randint(-99, 99), rng.randint(1, 99)) + ExactExpr.exp(
            rng.randint(-60, 3)
        ) * R(rng.randint(-9, 9), 1)
        for prec in (32, 64, 128):
            v = eval_expr(e, prec)
            assert v.err <= mpmath.ldexp(max(1, abs(v.value)), 4 - prec)


def test_monotone_refinement():
    e = R(1, 3) + ExactExpr.exp(-7)
    for p in (32, 64, 128, 256, 512):
        assert eval_expr(e, 2 * p).err <= eval_expr(e, p).err


def test_canonical_cancellation_is_exact_zero():
    d = ExactExpr.exp(-100) - ExactExpr.exp(-100)
    assert d.is_zero()
    assert certified_sign(eval_expr(d, 32)) == 0


def test_product_expansion():
    e = (R(1, 2) + ExactExpr.exp(-3)) * (R(2) + ExactExpr.exp(-5))
    expect = R(1) + R(2) * ExactExpr.exp(-3) + R(1, 2) * ExactExpr.exp(-5) + ExactExpr.exp(-8)
    assert e == expect


def test_mod1_rational():
    red, shift = R(-7, 3).mod1()
    assert shift == -3 and red.as_fraction() == Fraction(2, 3)


def test_mod1_huge_exponential():
    t = ExactExpr.exp(81) * R(1, 3)
    red, shift = t.mod1(256)
    v = red.eval(192)
    mpmath.mp.prec = 400
    ref = mpmath.exp(81) / 3
    ref -= mpmath.floor(ref)
    assert abs(v.value - ref) < mpmath.ldexp(1, -150)
    assert v.lo >= 0 and v.hi < 1


def test_cos_of_huge_product_matches_reduced():
    # exact symbolic reduction agrees with naive high-precision computation
    phase = ExactExpr.exp(81) * R(1, 3)
    c = cos2pi_expr(phase, 128)
    mpmath.mp.prec = 500
    ref = mpmath.cos(2 * mpmath.pi * mpmath.exp(81) / 3)
    assert abs(c.value - ref) < mpmath.ldexp(1, -100)


def test_trig_rational_table():
    assert cos2pi_expr(R(1, 3)).value == -0.5
    assert cos2pi_expr(R(1, 6)).value == 0.5
    assert cos2pi_expr(R(1, 4)).value == 0
    assert sin2pi_expr(R(1, 4)).value == 1
    assert sin2pi_expr(R(1, 2)).value == 0
    assert sin2pi_expr(R(1, 12)).value == 0.5


def test_parse_spec_grammar():
    assert ExactExpr.parse("1/2") == R(1, 2)
    assert ExactExpr.parse("exp(-33)") == ExactExpr.exp(-33)
    assert ExactExpr.parse("1/2 + exp(-33)") == R(1, 2) + ExactExpr.exp(-33)
    assert ExactExpr.parse("(1/2 + exp(-33)) * 3") == (R(1, 2) + ExactExpr.exp(-33)) * R(3)
    assert ExactExpr.parse("2 * exp(-4) * exp(-5)") == R(2) * ExactExpr.exp(-9)


def test_parse_rejects_garbage():
    for bad in ["1/2 +", "exp(1/2)", "cos(1)", "1//2", "(1", "exp(-)"]:
        with pytest.raises(MalformedExpr):
            ExactExpr.parse(bad)


def test_roundtrip_deterministic():
    rng = random.Random(5)
    for _ in range(100):
        terms = {
            rng.randint(-200, 90): Fraction(rng.randint(-999, 999), rng.randint(1, 999))
            for _ in range(rng.randint(0, 4))
        }
        e = ExactExpr(terms)
        txt = e.to_text()
        assert ExactExpr.parse(txt) == e
        assert ExactExpr.parse(txt).to_text() == txt


def test_rationality_detection():
    assert R(4, 2).is_rational() and R(4, 2).as_fraction() == 2
    assert not (R(1) + ExactExpr.exp(-1)).is_rational()
    # exp(0) merges into the rational part
    assert ExactExpr.exp(0).is_rational()
