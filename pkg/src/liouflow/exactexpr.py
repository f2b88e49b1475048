"""Exact symbolic expressions: rational combinations of integer powers of e.

The expression grammar of the configuration files is

    EXPR := RAT | "exp(" SINT ")" | EXPR "+" EXPR | EXPR "*" EXPR | "(" EXPR ")"
    RAT  := SINT | SINT "/" INT

with arbitrary-size decimal integers (SINT optionally signed).  The algebra
generated by rationals and exp(k) under + and * is exactly the set of finite
sums sum_m c_m * e^m with rational c_m and integer m, so every expression is
kept in that canonical form.  Canonicalisation makes equality, rationality,
and modular reduction exact, and makes algebraically equal trees evaluate to
identical enclosures (in particular exp(-100) - exp(-100) is the exact zero,
not an Indeterminate sign).

The frequency constructions need only exp(-k), k >= 0; positive powers are
accepted so that verification times such as t = e^81 round-trip through the
same syntax.
"""

from __future__ import annotations

import re
from fractions import Fraction

import mpmath
from mpmath import libmp

from .certreal import DEFAULT_PREC, PREC_CAP, CertifiedReal, cos2pi, exp_cr, sin2pi
from .errors import MalformedExpr, PrecisionExhausted

__all__ = ["ExactExpr", "eval_expr", "cos2pi_expr", "sin2pi_expr"]


class ExactExpr:
    """Canonical sum  sum_m c_m * e^m  (c_m nonzero rational, m integer)."""

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        clean = {}
        for m, c in dict(terms).items():
            c = Fraction(c)
            if c:
                clean[int(m)] = c
        self._terms = tuple(sorted(clean.items()))

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def rational(cls, value):
        return cls({0: Fraction(value)})

    @classmethod
    def exp(cls, k):
        """The exact value e**k for integer k."""
        return cls({int(k): Fraction(1)})

    # ------------------------------------------------------------------
    # structure

    @property
    def terms(self):
        return self._terms

    def is_zero(self):
        return not self._terms

    def is_rational(self):
        return all(m == 0 for m, _ in self._terms)

    def as_fraction(self):
        if not self._terms:
            return Fraction(0)
        if self.is_rational():
            return self._terms[0][1]
        raise ValueError(f"{self} is not rational")

    def rational_part(self):
        for m, c in self._terms:
            if m == 0:
                return c
        return Fraction(0)

    def exp_part(self):
        return ExactExpr({m: c for m, c in self._terms if m != 0})

    def __eq__(self, other):
        if isinstance(other, ExactExpr):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.as_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self._terms)

    def __bool__(self):
        return bool(self._terms)

    # ------------------------------------------------------------------
    # algebra

    def __add__(self, other):
        o = _as_expr(other)
        terms = dict(self._terms)
        for m, c in o._terms:
            terms[m] = terms.get(m, Fraction(0)) + c
        return ExactExpr(terms)

    __radd__ = __add__

    def __neg__(self):
        return ExactExpr({m: -c for m, c in self._terms})

    def __sub__(self, other):
        return self + (-_as_expr(other))

    def __rsub__(self, other):
        return _as_expr(other) + (-self)

    def __mul__(self, other):
        o = _as_expr(other)
        terms = {}
        for m1, c1 in self._terms:
            for m2, c2 in o._terms:
                m = m1 + m2
                terms[m] = terms.get(m, Fraction(0)) + c1 * c2
        return ExactExpr(terms)

    __rmul__ = __mul__

    def div_rational(self, r):
        r = Fraction(r)
        if not r:
            raise ZeroDivisionError("exact division by zero")
        return ExactExpr({m: c / r for m, c in self._terms})

    # ------------------------------------------------------------------
    # evaluation

    def eval(self, prec=DEFAULT_PREC, prec_cap=None):
        """Certified enclosure with err <= 2^(4-prec) * max(1, |value|)."""
        return eval_expr(self, prec, prec_cap)

    def mod1(self, prec=DEFAULT_PREC, prec_cap=None):
        """Exact reduction modulo 1: returns (reduced expr, integer shift).

        The reduced expression has certified value in [0, 1).  The rational
        part is reduced exactly; when exp terms are present the integer part
        of the total is located by certified floors at escalating precision.
        """
        r = self.rational_part()
        shift = r.numerator // r.denominator
        reduced = self - shift
        if reduced.is_rational():
            return reduced, shift
        extra = _certified_floor(reduced, prec, prec_cap)
        return reduced - extra, shift + extra

    def floor(self, prec=DEFAULT_PREC, prec_cap=None):
        if self.is_rational():
            r = self.as_fraction()
            return r.numerator // r.denominator
        return _certified_floor(self, prec, prec_cap)

    def bound_abs(self, prec=64):
        """Cheap certified upper bound on |value|."""
        x = self.eval(prec)
        return abs(x).hi

    # ------------------------------------------------------------------
    # text form

    def to_text(self):
        if not self._terms:
            return "0"
        parts = []
        ordered = sorted(self._terms, key=lambda mc: (mc[0] != 0, mc[0]))
        for m, c in ordered:
            if m == 0:
                parts.append(_frac_text(c))
            elif c == 1:
                parts.append(f"exp({m})")
            else:
                parts.append(f"{_frac_text(c)}*exp({m})")
        return " + ".join(parts)

    @classmethod
    def parse(cls, text):
        return _Parser(text).parse()

    def __repr__(self):
        return f"ExactExpr({self.to_text()})"


def _frac_text(c):
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _as_expr(x):
    if isinstance(x, ExactExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactExpr.rational(x)
    raise TypeError(f"cannot interpret {x!r} as an exact expression")


# ----------------------------------------------------------------------
# evaluation


def eval_expr(e, prec=DEFAULT_PREC, prec_cap=None):
    """Evaluate an ExactExpr to a CertifiedReal.

    Postcondition: err <= 2^(4-prec) * max(1, |value|).  The working
    precision escalates internally (cancellation between terms of very
    different magnitude may require more bits than the output carries).
    """
    if not isinstance(e, ExactExpr):
        raise MalformedExpr(f"not an exact expression: {e!r}")
    if prec < 16:
        raise ValueError("prec must be at least 16")
    cap = prec_cap or max(PREC_CAP, 4 * prec)
    if e.is_rational():
        return CertifiedReal.from_fraction(e.as_fraction(), prec)
    wp = prec + 8 + max(len(e.terms), 2).bit_length()
    while True:
        total = CertifiedReal.zero(wp)
        for m, c in e.terms:
            if m == 0:
                total = total + CertifiedReal.from_fraction(c, wp)
            else:
                term = exp_cr(CertifiedReal.from_int(m, wp), wp)
                total = total + term * CertifiedReal.from_fraction(c, wp)
        bound = max(1, abs(total.value))
        if total.err <= mpmath.ldexp(bound, 4 - prec):
            return total.at_prec(max(prec, wp))
        if wp >= cap:
            raise PrecisionExhausted(
                f"evaluating {e} needs more than {cap} bits"
            )
        wp = min(2 * wp, cap)


def _exact_floor_int(raw):
    # mpf endpoints are dyadic, so the floor is exact at prec=0
    return int(libmp.to_int(libmp.mpf_floor(raw, 0, "f")))


def _certified_floor(e, prec, prec_cap=None):
    cap = prec_cap or PREC_CAP
    wp = max(prec, 32)
    while True:
        x = e.eval(wp, prec_cap=max(cap, 4 * wp))
        flo = _exact_floor_int(x._lo)
        fhi = _exact_floor_int(x._hi)
        if flo == fhi:
            return flo
        if wp >= cap:
            raise PrecisionExhausted(
                f"floor of {e} undecided at {cap} bits (value within "
                f"{x.err} of an integer)"
            )
        wp = min(2 * wp, cap)


# ----------------------------------------------------------------------
# trigonometry with exact argument reduction

_COS_RATIONAL = {
    (0, 1): Fraction(1),
    (1, 2): Fraction(-1),
    (1, 4): Fraction(0),
    (3, 4): Fraction(0),
    (1, 3): Fraction(-1, 2),
    (2, 3): Fraction(-1, 2),
    (1, 6): Fraction(1, 2),
    (5, 6): Fraction(1, 2),
}

_SIN_RATIONAL = {
    (0, 1): Fraction(0),
    (1, 2): Fraction(0),
    (1, 4): Fraction(1),
    (3, 4): Fraction(-1),
    (1, 12): Fraction(1, 2),
    (5, 12): Fraction(1, 2),
    (7, 12): Fraction(-1, 2),
    (11, 12): Fraction(-1, 2),
}


def _trig_expr(e, prec, table, kernel):
    e = _as_expr(e)
    reduced, _ = e.mod1(prec)
    if reduced.is_rational():
        fr = reduced.as_fraction()
        key = (fr.numerator, fr.denominator)
        if key in table:
            return CertifiedReal.from_fraction(table[key], prec)
    return kernel(reduced.eval(prec + 8), prec)


def cos2pi_expr(e, prec=DEFAULT_PREC):
    """Certified cos(2*pi*e) with exact symbolic reduction mod 1.

    Huge arguments (products of frequencies with times like e^81) are reduced
    in the exact algebra before any floating evaluation, so no precision is
    lost to naive argument reduction.
    """
    return _trig_expr(e, prec, _COS_RATIONAL, cos2pi)


def sin2pi_expr(e, prec=DEFAULT_PREC):
    """Certified sin(2*pi*e) with exact symbolic reduction mod 1."""
    return _trig_expr(e, prec, _SIN_RATIONAL, sin2pi)


# ----------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(exp\(|\(|\)|\+|\*|/|-?\d+)")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise MalformedExpr(f"bad token at {text[pos:pos+20]!r}")
                break
            self.tokens.append(m.group(1))
            pos = m.end()

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise MalformedExpr("unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self):
        e = self.parse_sum()
        if self.peek() is not None:
            raise MalformedExpr(f"trailing input at token {self.peek()!r}")
        return e

    def parse_sum(self):
        e = self.parse_product()
        while self.peek() == "+":
            self.next()
            e = e + self.parse_product()
        return e

    def parse_product(self):
        e = self.parse_factor()
        while self.peek() == "*":
            self.next()
            e = e * self.parse_factor()
        return e

    def parse_factor(self):
        tok = self.next()
        if tok == "(":
            e = self.parse_sum()
            if self.next() != ")":
                raise MalformedExpr("unbalanced parenthesis")
            return e
        if tok == "exp(":
            arg = self.next()
            if not re.fullmatch(r"-?\d+", arg):
                raise MalformedExpr(f"exp() takes an integer, got {arg!r}")
            if self.next() != ")":
                raise MalformedExpr("unbalanced exp(")
            return ExactExpr.exp(int(arg))
        if re.fullmatch(r"-?\d+", tok):
            num = int(tok)
            if self.peek() == "/":
                self.next()
                den = self.next()
                if not re.fullmatch(r"\d+", den):
                    raise MalformedExpr(f"bad denominator {den!r}")
                return ExactExpr.rational(Fraction(num, int(den)))
            return ExactExpr.rational(num)
        raise MalformedExpr(f"unexpected token {tok!r}")
