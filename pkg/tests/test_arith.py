"""Continued fractions, convergent certification, frequency-pair builders."""

import math
from fractions import Fraction

import pytest

from liouflow.arith import (
    ConvergentLadder,
    FrequencyVector,
    build_weakmixing_pair,
    build_yoccoz_pair,
    cf_expand,
    check_convergent_bounds,
    dist_to_int,
    dump_frequency_vector,
    load_frequency_vector,
    verify_frequency_vector,
)
from liouflow.certreal import CertifiedReal, exp_cr, sqrt_cr
from liouflow.errors import ResourceLimit
from liouflow.exactexpr import ExactExpr


def euclid_convergents(fr):
    # independent oracle: plain Euclidean algorithm
    a_list = []
    num, den = fr.numerator, fr.denominator
    while den:
        a, num, den = num // den, den, num % den
    # recompute directly to avoid relying on library internals
    a_list = []
    num, den = fr.numerator, fr.denominator
    while den:
        a_list.append(num // den)
        num, den = den, num % den
    ps, qs = [1, a_list[0]], [0, 1]
    for a in a_list[1:]:
        ps.append(a * ps[-1] + ps[-2])
        qs.append(a * qs[-1] + qs[-2])
    return list(zip(ps[1:], qs[1:]))


def test_cf_expand_rational_euclid_oracle():
    fr = Fraction(415, 93)
    lad = cf_expand(fr, 4)
    assert lad.entries == tuple(euclid_convergents(fr)[:4])
    assert lad.entries == ((4, 1), (9, 2), (58, 13), (415, 93))


def test_cf_expand_half():
    assert cf_expand(Fraction(1, 2), 2).entries == ((0, 1), (1, 2))


def test_cf_expand_sqrt2_best_approximation_oracle():
    lad = cf_expand(sqrt_cr(CertifiedReal.from_int(2, 192)), 4)
    assert lad.entries == ((1, 1), (3, 2), (7, 5), (17, 12))
    # exhaustive best-approximation check over q <= 12
    best = None
    root2 = math.sqrt(2)
    for q in range(1, 13):
        p = round(q * root2)
        d = abs(q * root2 - p)
        if best is None or d < best[0]:
            best = (d, p, q)
            if q in (1, 2, 5, 12):
                assert (p, q) in lad.entries


def test_cf_expand_too_short_rational():
    with pytest.raises(ValueError):
        cf_expand(Fraction(1, 2), 3)


def test_check_convergent_bounds_sqrt2():
    lad = cf_expand(sqrt_cr(CertifiedReal.from_int(2, 256)), 4)
    rep = check_convergent_bounds(lad)
    assert all(r.ok for r in rep)
    # k = 0: 1/3 <= |sqrt2 - 1| = 0.41421... <= 1/2
    k0 = rep[0]
    assert k0.lower_ok and k0.upper_ok


def test_check_convergent_bounds_terminating_rational():
    lad = cf_expand(Fraction(1, 2), 2)
    rep = check_convergent_bounds(lad)
    assert rep[0].ok
    term = [r for r in rep if r.reason == "Terminating"]
    assert len(term) == 1 and not term[0].lower_ok


def test_check_convergent_bounds_corrupted():
    lad = cf_expand(Fraction(415, 93), 4)
    bad_entries = list(lad.entries)
    p, q = bad_entries[1]
    bad_entries[1] = (p + 1, q)
    bad = ConvergentLadder(tuple(bad_entries), lad.target)
    rep = check_convergent_bounds(bad)
    assert not rep[1].ok


def test_dist_to_int_trivial():
    assert dist_to_int(3, Fraction(1, 3)).value == 0
    assert dist_to_int(2, Fraction(3, 4)).value == 0.5


def test_dist_to_int_sqrt2():
    d = dist_to_int(5, sqrt_cr(CertifiedReal.from_int(2, 192)))
    # 5 sqrt2 = 7.0710678...
    assert abs(d.value - 0.07106781186547524) < 1e-12


def test_yoccoz_q2_smallest_admissible(yoccoz_q2):
    fv = yoccoz_q2
    # q'_1 = ceil(4 e^2) = 30 since e^2 = 7.389056... ; smallest ladder-form
    # q_2 = 2a+1 >= 4 e^30 = 42745898326097.84...
    assert fv.qp(1) == 30
    assert fv.q(2) == 42745898326099
    assert fv.q(2) - 2 < 4 * math.exp(30) <= fv.q(2)
    e2 = exp_cr(CertifiedReal.from_int(2, 128))
    assert (4 * e2).hi <= 30 and (4 * e2).lo > 29


def test_yoccoz_q1_smallest_admissible():
    fv = build_yoccoz_pair(1, 1)
    assert fv.qp(1) == 11  # 4e = 10.873...
    assert fv.q(2) == 239497  # 4 e^11 = 239496.56...
    assert fv.q(2) - 1 < 4 * math.exp(11) <= fv.q(2)


def test_yoccoz_q3(yoccoz_q3):
    fv = yoccoz_q3
    assert fv.qp(1) == 81  # 4 e^3 = 80.34...
    assert fv.pp(1) == 28  # floor(81/3)=27 shares a factor with 81
    assert fv.q(2) % fv.q(1) == 1  # ladder recurrence with q_0 = 1
    # 4 e^81 has 36 digits
    assert len(str(fv.q(2))) == 36


def test_yoccoz_resource_limit():
    with pytest.raises(ResourceLimit):
        build_yoccoz_pair(3, 2)
    with pytest.raises(ResourceLimit):
        build_yoccoz_pair(2, 2)


def test_weakmix_q2_matches_construction(weakmix_q2):
    fv = weakmix_q2
    assert fv.qp(1) == 16 and fv.pp(1) == 5
    # |2 alpha - 1| = e^-33 <= e^-32  and  |16 alpha' - 5| = e^-17 <= e^-16
    assert fv.alpha_err(1).terms == ((-33, Fraction(-1)),)
    assert fv.alpha_prime_err(1).terms == ((-17, Fraction(1)),)
    assert fv.alpha.rational_part() == Fraction(1, 2)
    assert fv.alpha_prime.rational_part() == Fraction(5, 16)


def test_weakmix_q3(weakmix_q3):
    fv = weakmix_q3
    assert fv.qp(1) == 81
    assert fv.pp(1) == 28
    assert fv.alpha.rational_part() == Fraction(1, 3)
    # tail exponent 2 q' + 1 = 163 on the alpha side, q' + 1 = 82 on alpha'
    assert fv.alpha_err(1).terms == ((-163, Fraction(-1)),)
    assert fv.alpha_prime_err(1).terms == ((-82, Fraction(1)),)


def test_weakmix_rejects_corrupted_qprime(weakmix_q2):
    fv = weakmix_q2
    # q'_1 = 8 < q_1^4 = 16 must be rejected by the independent pass
    bad = FrequencyVector(
        alpha=fv.alpha,
        alpha_prime=fv.alpha_prime,
        ladder=fv.ladder,
        ladder_prime=ConvergentLadder(((0, 1), (1, 3), (3, 8)), fv.alpha_prime),
        regime="weakmix",
        stages=1,
        stage_indices=fv.stage_indices,
        stage_indices_prime=(2,),
    )
    with pytest.raises(ValueError):
        verify_frequency_vector(bad)


def test_builders_pass_independent_verification(yoccoz_q3, weakmix_q3):
    assert verify_frequency_vector(yoccoz_q3)["cond_Y"]
    assert verify_frequency_vector(weakmix_q3)["num_est"]


def test_weakmix_two_stages():
    fv = build_weakmixing_pair(2, 2)
    assert fv.qp(1) == 16
    assert fv.q(2) >= math.exp(32) - 1
    assert fv.qp(2) == fv.q(2) ** 4
    rep = check_convergent_bounds(fv.ladder)
    assert all(r.ok for r in rep if r.reason != "Terminating")


def test_serialization_roundtrip(weakmix_q3):
    txt = dump_frequency_vector(weakmix_q3)
    fv2 = load_frequency_vector(txt, verify=True)
    assert dump_frequency_vector(fv2) == txt
    assert fv2.alpha == weakmix_q3.alpha
    assert fv2.ladder.entries == weakmix_q3.ladder.entries


def test_dist_to_int_stage_bound(yoccoz_q2):
    fv = yoccoz_q2
    d = dist_to_int(fv.q(1), fv.alpha, 512)
    bound = CertifiedReal.from_fraction(Fraction(1, fv.q(2)), 512)
    assert d.hi <= bound.lo
