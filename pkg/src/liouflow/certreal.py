"""Certified arbitrary-precision real arithmetic.

A :class:`CertifiedReal` is a closed interval enclosure of an exact real
quantity, exposed in midpoint/error form.  Every operation rounds the
endpoints outward, so the invariant "the exact value lies in
[value - err, value + err]" survives arbitrary compositions.  Sign decisions
are only ever made when the enclosure excludes zero; otherwise they raise
:class:`~liouflow.errors.Indeterminate` so the caller can retry at higher
precision.

The endpoint arithmetic is delegated to mpmath's interval kernel
(``mpmath.libmp.mpi_*``), which implements directed rounding for the
elementary functions.  Those kernel routines are pure functions of raw
mantissa/exponent tuples: no global context is read or written, so values
may be shared freely between workers.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
from mpmath import libmp as _L
from mpmath.libmp import (
    fhalf,
    finf,
    fninf,
    fone,
    from_int,
    from_rational,
    fzero,
    mpf_abs,
    mpf_add,
    mpf_cmp,
    mpf_floor,
    mpf_ge,
    mpf_gt,
    mpf_le,
    mpf_lt,
    mpf_neg,
    mpf_shift,
    mpf_sub,
    mpi_abs,
    mpi_add,
    mpi_cos,
    mpi_div,
    mpi_exp,
    mpi_log,
    mpi_mid,
    mpi_mul,
    mpi_neg,
    mpi_sin,
    mpi_sqrt,
    mpi_sub,
    to_int,
)
from mpmath.libmp.libmpi import mpi_cosh_sinh, mpi_pi

from .errors import DivisionByNearZero, Indeterminate, PrecisionExhausted


def _mk(raw):
    """Wrap a raw libmp tuple as an mpf without rounding to the global context."""
    return mpmath.mp.make_mpf(raw)

__all__ = [
    "DEFAULT_PREC",
    "PREC_CAP",
    "CertifiedReal",
    "certified_sign",
    "refine_until",
    "cos2pi",
    "sin2pi",
    "exp_cr",
    "cosh_cr",
    "sqrt_cr",
    "log_cr",
    "cr_min",
    "cr_max",
    "agree",
]

# Escalation loops double the working precision from DEFAULT_PREC up to
# PREC_CAP.  Flow verification at t ~ e^81 needs a few hundred bits; the cap
# stops runaway refinement on genuinely degenerate inputs.
DEFAULT_PREC = 128
PREC_CAP = 4096


def _to_raw_pair(x, prec):
    """Lower/upper raw mpf endpoints enclosing ``x`` (int, Fraction, str, mpf)."""
    if isinstance(x, int):
        v = from_int(x)
        return v, v
    if isinstance(x, Fraction):
        lo = from_rational(x.numerator, x.denominator, prec, "f")
        hi = from_rational(x.numerator, x.denominator, prec, "c")
        return lo, hi
    if isinstance(x, mpmath.mpf):
        return x._mpf_, x._mpf_
    if isinstance(x, str):
        # decimal literals denote exact rationals; enclose with directed rounding
        return _L.from_str(x, prec, "f"), _L.from_str(x, prec, "c")
    if isinstance(x, float):
        v = mpmath.mpf(x)._mpf_
        return v, v
    raise TypeError(f"cannot interpret {x!r} as a real number")


class CertifiedReal:
    """Enclosure [lo, hi] of an exact real, with working precision in bits."""

    __slots__ = ("_lo", "_hi", "prec")

    def __init__(self, value, err=0, prec=DEFAULT_PREC):
        vlo, vhi = _to_raw_pair(value, prec)
        if err:
            elo, ehi = _to_raw_pair(err, prec)
            if mpf_lt(elo, fzero):
                raise ValueError("err must be nonnegative")
            self._lo = mpf_sub(vlo, ehi, prec, "f")
            self._hi = mpf_add(vhi, ehi, prec, "c")
        else:
            self._lo = vlo
            self._hi = vhi
        self.prec = prec

    # ------------------------------------------------------------------
    # construction helpers

    @classmethod
    def _raw(cls, lo, hi, prec):
        self = object.__new__(cls)
        self._lo = lo
        self._hi = hi
        self.prec = prec
        if mpf_gt(lo, hi):
            raise ValueError("interval endpoints out of order")
        return self

    @classmethod
    def from_int(cls, n, prec=DEFAULT_PREC):
        v = from_int(n)
        return cls._raw(v, v, prec)

    @classmethod
    def from_fraction(cls, fr, prec=DEFAULT_PREC):
        fr = Fraction(fr)
        lo = from_rational(fr.numerator, fr.denominator, prec, "f")
        hi = from_rational(fr.numerator, fr.denominator, prec, "c")
        return cls._raw(lo, hi, prec)

    @classmethod
    def zero(cls, prec=DEFAULT_PREC):
        return cls._raw(fzero, fzero, prec)

    # ------------------------------------------------------------------
    # views

    @property
    def _mpi_(self):
        return (self._lo, self._hi)

    @property
    def lo(self):
        return _mk(self._lo)

    @property
    def hi(self):
        return _mk(self._hi)

    @property
    def value(self):
        """Midpoint of the enclosure (rounded to nearest at self.prec)."""
        return _mk(mpi_mid(self._mpi_, self.prec))

    @property
    def err(self):
        """Radius: max distance from :attr:`value` to either endpoint, rounded up."""
        mid = mpi_mid(self._mpi_, self.prec)
        lo_gap = mpf_sub(mid, self._lo, self.prec, "c")
        hi_gap = mpf_sub(self._hi, mid, self.prec, "c")
        return _mk(hi_gap if mpf_ge(hi_gap, lo_gap) else lo_gap)

    @property
    def is_exact(self):
        return self._lo == self._hi

    def contains_zero(self):
        return mpf_le(self._lo, fzero) and mpf_ge(self._hi, fzero)

    def contains(self, other):
        """True when the enclosure of ``other`` lies inside this one."""
        o = _coerce(other, self.prec)
        return mpf_le(self._lo, o._lo) and mpf_ge(self._hi, o._hi)

    def width(self):
        return _mk(mpf_sub(self._hi, self._lo, self.prec, "c"))

    def at_prec(self, prec):
        return CertifiedReal._raw(self._lo, self._hi, prec)

    # ------------------------------------------------------------------
    # arithmetic

    def __add__(self, other):
        o = _coerce(other, self.prec)
        p = max(self.prec, o.prec)
        lo, hi = mpi_add(self._mpi_, o._mpi_, p)
        return CertifiedReal._raw(lo, hi, p)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other, self.prec)
        p = max(self.prec, o.prec)
        lo, hi = mpi_sub(self._mpi_, o._mpi_, p)
        return CertifiedReal._raw(lo, hi, p)

    def __rsub__(self, other):
        return _coerce(other, self.prec) - self

    def __mul__(self, other):
        o = _coerce(other, self.prec)
        p = max(self.prec, o.prec)
        lo, hi = mpi_mul(self._mpi_, o._mpi_, p)
        return CertifiedReal._raw(lo, hi, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other, self.prec)
        if o.contains_zero():
            raise DivisionByNearZero(f"divisor enclosure {o} meets zero")
        p = max(self.prec, o.prec)
        lo, hi = mpi_div(self._mpi_, o._mpi_, p)
        return CertifiedReal._raw(lo, hi, p)

    def __rtruediv__(self, other):
        return _coerce(other, self.prec) / self

    def __neg__(self):
        lo, hi = mpi_neg(self._mpi_, self.prec)
        return CertifiedReal._raw(lo, hi, self.prec)

    def __abs__(self):
        lo, hi = mpi_abs(self._mpi_, self.prec)
        return CertifiedReal._raw(lo, hi, self.prec)

    def widened(self, pad):
        """Enclosure widened on both sides by the upper bound of ``pad``."""
        p = _coerce(pad, self.prec)
        if mpf_lt(p._hi, fzero):
            raise ValueError("pad must admit a nonnegative upper bound")
        lo = mpf_sub(self._lo, p._hi, self.prec, "f")
        hi = mpf_add(self._hi, p._hi, self.prec, "c")
        return CertifiedReal._raw(lo, hi, self.prec)

    def hull(self, other):
        o = _coerce(other, self.prec)
        lo = self._lo if mpf_le(self._lo, o._lo) else o._lo
        hi = self._hi if mpf_ge(self._hi, o._hi) else o._hi
        return CertifiedReal._raw(lo, hi, max(self.prec, o.prec))

    # ------------------------------------------------------------------
    # decisions

    def sign(self):
        return certified_sign(self)

    def __repr__(self):
        return f"CertifiedReal(value={mpmath.nstr(self.value, 17)}, err={mpmath.nstr(self.err, 5)}, prec={self.prec})"

    def str_decimal(self, digits=30):
        return mpmath.nstr(self.value, digits), mpmath.nstr(self.err, 5)


def _coerce(x, prec):
    if isinstance(x, CertifiedReal):
        return x
    return CertifiedReal(x, 0, prec)


def certified_sign(x):
    """Certified sign of the quantity enclosed by ``x``.

    Returns +1 when the whole enclosure is positive, -1 when negative, and 0
    only for the exact zero enclosure.  Raises Indeterminate when the
    enclosure straddles zero, signalling re-evaluation at higher precision.
    """
    if mpf_gt(x._lo, fzero):
        return 1
    if mpf_lt(x._hi, fzero):
        return -1
    if x._lo == fzero and x._hi == fzero:
        return 0
    raise Indeterminate(f"sign of {x} is undecided")


def certified_le(x, y, prec=DEFAULT_PREC):
    """Certified test (exact x) <= (exact y).  Raises Indeterminate if undecidable."""
    a = _coerce(x, prec)
    b = _coerce(y, prec)
    if mpf_le(a._hi, b._lo):
        return True
    if mpf_gt(a._lo, b._hi):
        return False
    raise Indeterminate(f"order of {a} and {b} is undecided")


def refine_until(f, predicate, prec0=DEFAULT_PREC, prec_max=PREC_CAP):
    """Evaluate ``f(prec)`` at doubling precision until ``predicate`` decides.

    ``predicate`` either returns a non-None decision or raises Indeterminate
    (returning None also counts as undecided).  The enclosure that produced
    the decision is returned.
    """
    if prec0 > prec_max:
        raise ValueError("prec0 must not exceed prec_max")
    prec = prec0
    while True:
        x = f(prec)
        try:
            if predicate(x) is not None:
                return x
        except Indeterminate:
            pass
        if prec >= prec_max:
            raise PrecisionExhausted(
                f"no decision at precision cap {prec_max} bits"
            )
        prec = min(2 * prec, prec_max)


# ----------------------------------------------------------------------
# elementary functions


def exp_cr(x, prec=None):
    x = x if isinstance(x, CertifiedReal) else CertifiedReal(x)
    p = prec or x.prec
    lo, hi = mpi_exp(x._mpi_, p)
    return CertifiedReal._raw(lo, hi, p)


def log_cr(x, prec=None):
    x = x if isinstance(x, CertifiedReal) else CertifiedReal(x)
    if mpf_le(x._lo, fzero):
        raise ValueError("log of enclosure meeting (-inf, 0]")
    p = prec or x.prec
    lo, hi = mpi_log(x._mpi_, p)
    return CertifiedReal._raw(lo, hi, p)


def sqrt_cr(x, prec=None):
    x = x if isinstance(x, CertifiedReal) else CertifiedReal(x)
    p = prec or x.prec
    lo, hi = mpi_sqrt(x._mpi_, p)
    return CertifiedReal._raw(lo, hi, p)


def cosh_cr(x, prec=None):
    x = x if isinstance(x, CertifiedReal) else CertifiedReal(x)
    p = prec or x.prec
    (clo, chi), _ = mpi_cosh_sinh(x._mpi_, p)
    return CertifiedReal._raw(clo, chi, p)


def _reduce_mod1_raw(x):
    """Exact fractional-part reduction of a CertifiedReal.

    mpf endpoints are dyadic rationals, so subtracting the floor of the lower
    endpoint is exact (prec=0 arithmetic) and costs no enclosure width.
    """
    k = mpf_floor(x._lo, 0, "f")
    lo = mpf_sub(x._lo, k, 0, "n")
    hi = mpf_sub(x._hi, k, 0, "n")
    return lo, hi, to_int(k)


_COS_TABLE = {
    (0, 1): Fraction(1),
    (1, 2): Fraction(-1),
    (1, 4): Fraction(0),
    (3, 4): Fraction(0),
}

_SIN_TABLE = {
    (0, 1): Fraction(0),
    (1, 2): Fraction(0),
    (1, 4): Fraction(1),
    (3, 4): Fraction(-1),
}


def _trig2pi(x, prec, kernel, table):
    p = prec or x.prec
    x = x if isinstance(x, CertifiedReal) else CertifiedReal(x, 0, p)
    wide = mpf_sub(x._hi, x._lo, 10, "c")
    if mpf_ge(wide, fone):
        return CertifiedReal._raw(mpf_neg(fone), fone, p)
    lo, hi, _ = _reduce_mod1_raw(x)
    if lo == hi:
        # exact dyadic phase: consult the quarter-turn table
        num, den = _L.to_rational(lo)
        if (int(num), int(den)) in table:
            return CertifiedReal.from_fraction(table[(int(num), int(den))], p)
    wp = p + 10
    two_pi = mpi_add(mpi_pi(wp), mpi_pi(wp), wp)
    arg = mpi_mul((lo, hi), two_pi, wp)
    out_lo, out_hi = kernel(arg, p)
    return CertifiedReal._raw(out_lo, out_hi, p)


def cos2pi(x, prec=None):
    """Certified cos(2*pi*x) with exact dyadic argument reduction mod 1."""
    return _trig2pi(x, prec, mpi_cos, _COS_TABLE)


def sin2pi(x, prec=None):
    """Certified sin(2*pi*x) with exact dyadic argument reduction mod 1."""
    return _trig2pi(x, prec, mpi_sin, _SIN_TABLE)


def cr_min(*xs):
    out = xs[0]
    for x in xs[1:]:
        p = max(out.prec, x.prec)
        lo = out._lo if mpf_le(out._lo, x._lo) else x._lo
        hi = out._hi if mpf_le(out._hi, x._hi) else x._hi
        out = CertifiedReal._raw(lo, hi, p)
    return out


def cr_max(*xs):
    out = xs[0]
    for x in xs[1:]:
        p = max(out.prec, x.prec)
        lo = out._lo if mpf_ge(out._lo, x._lo) else x._lo
        hi = out._hi if mpf_ge(out._hi, x._hi) else x._hi
        out = CertifiedReal._raw(lo, hi, p)
    return out


def agree(x, y):
    """True when the enclosures of x and y overlap (certified-equal test)."""
    return not (mpf_lt(x._hi, y._lo) or mpf_lt(y._hi, x._lo))
