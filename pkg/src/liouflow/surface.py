"""Intervals, rectangles and boxes inside an energy surface.

The sets are stored as lazy descriptions (base point plus sizes) and only
materialised at sample points; every materialised point gets its third
action re-resolved so it lies on the base's energy surface.  Box membership
uses half-open sides [0, 1/n) internally with torus wrap-around; an exact
hit of the open edge reports False, and an enclosure straddling any edge
raises Indeterminate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .certreal import DEFAULT_PREC, CertifiedReal
from .errors import Indeterminate, PhaseUnreachable
from .exactexpr import ExactExpr
from .flowcore import as_coord, as_cr, coord_mod1, make_point, resolve_r3

__all__ = [
    "IntervalJ",
    "RectangleR",
    "BoxB",
    "sample_interval",
    "contains",
    "witness_phase",
]


@dataclass(frozen=True)
class IntervalJ:
    """On-surface segment parallel to the theta_1 or theta_2 axis."""

    spec: object
    direction: int
    base: object  # PhasePoint
    length: Fraction

    def __post_init__(self):
        if self.direction not in (1, 2):
            raise ValueError("direction must be 1 or 2")
        if self.length <= 0:
            raise ValueError("length must be positive")

    def point_at(self, offset, prec=DEFAULT_PREC):
        """On-surface point with the free angle shifted by ``offset``."""
        offset = as_coord(offset)
        theta = list(self.base.theta)
        idx = self.direction - 1
        theta[idx] = coord_mod1(_coord_add(theta[idx], offset), prec)
        return make_point(
            self.spec,
            tuple(theta),
            (self.base.r[0], self.base.r[1]),
            energy=self.base.energy,
            prec=prec,
        )


@dataclass(frozen=True)
class RectangleR:
    """On-surface rectangle spanning theta_1 and theta_2 sides."""

    spec: object
    base: object
    l1: Fraction
    l2: Fraction

    def __post_init__(self):
        if self.l1 <= 0 or self.l2 <= 0:
            raise ValueError("sides must be positive")

    def point_at(self, off1, off2, prec=DEFAULT_PREC):
        theta = list(self.base.theta)
        theta[0] = coord_mod1(_coord_add(theta[0], as_coord(off1)), prec)
        theta[1] = coord_mod1(_coord_add(theta[1], as_coord(off2)), prec)
        return make_point(
            self.spec,
            tuple(theta),
            (self.base.r[0], self.base.r[1]),
            energy=self.base.energy,
            prec=prec,
        )

    def corners(self, prec=DEFAULT_PREC):
        return [
            self.point_at(o1, o2, prec)
            for o1 in (Fraction(0), self.l1)
            for o2 in (Fraction(0), self.l2)
        ]

    def center(self, prec=DEFAULT_PREC):
        return self.point_at(self.l1 / 2, self.l2 / 2, prec)

    def subrectangle(self, off1, off2, l1, l2, prec=DEFAULT_PREC):
        """Sub-rectangle at the given offsets (must stay inside)."""
        if off1 < 0 or off2 < 0 or off1 + l1 > self.l1 or off2 + l2 > self.l2:
            raise ValueError("sub-rectangle exceeds the parent")
        base = self.point_at(off1, off2, prec)
        return RectangleR(self.spec, base, Fraction(l1), Fraction(l2))


@dataclass(frozen=True)
class BoxB:
    """Full-dimension test box of side 1/n in the five free coordinates."""

    spec: object
    base: object
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")

    @property
    def side(self):
        return Fraction(1, self.n)

    def theta_box(self):
        """The three angle intervals as (base coordinate, side) pairs."""
        return tuple((x, self.side) for x in self.base.theta)


def _coord_add(a, b):
    if isinstance(a, ExactExpr) and isinstance(b, ExactExpr):
        return a + b
    prec = max(
        a.prec if isinstance(a, CertifiedReal) else DEFAULT_PREC,
        b.prec if isinstance(b, CertifiedReal) else DEFAULT_PREC,
    )
    return as_cr(a, prec) + as_cr(b, prec)


def sample_interval(J, count, prec=DEFAULT_PREC):
    """``count`` equally spaced on-surface points spanning [0, length]."""
    if count < 2:
        raise ValueError("need at least two sample points")
    step = J.length / (count - 1)
    return [J.point_at(step * i, prec) for i in range(count)]


def _offset_mod1(x, base, prec):
    """(x - base) mod 1 as an exact expression or enclosure."""
    if isinstance(x, ExactExpr) and isinstance(base, ExactExpr):
        red, _ = (x - base).mod1(prec)
        return red
    d = as_cr(x, prec) - as_cr(base, prec)
    return coord_mod1(d, prec)


def _inside_halfopen(offset, side, prec):
    """Certified offset in [0, side); Indeterminate on edge straddle."""
    if isinstance(offset, ExactExpr):
        if offset.is_rational():
            f = offset.as_fraction()
            return 0 <= f < side
        v = offset.eval(prec)
    else:
        v = offset
    side_cr = CertifiedReal.from_fraction(Fraction(side), prec)
    if v.hi < side_cr.lo and v.lo >= 0:
        return True
    if v.lo >= side_cr.hi or v.hi < 0:
        return False
    raise Indeterminate("coordinate enclosure straddles a box edge")


def contains(B, p, prec=DEFAULT_PREC):
    """Certified membership of a phase point in a box.

    Tests the five free coordinates (three angles with torus wrap, first two
    actions) and certifies that the point lies on the box's energy surface.
    """
    for j in range(3):
        off = _offset_mod1(p.theta[j], B.base.theta[j], prec)
        if not _inside_halfopen(off, B.side, prec):
            return False
    for j in range(2):
        d = as_cr(p.r[j], prec) - as_cr(B.base.r[j], prec)
        if not _inside_interval_linear(d, B.side, prec):
            return False
    # on-surface: energies must agree within enclosures
    gap = p.energy - B.base.energy
    if gap.lo > 0 or gap.hi < 0:
        return False
    return True


def _inside_interval_linear(d, side, prec):
    side_cr = CertifiedReal.from_fraction(Fraction(side), prec)
    if d.lo >= 0 and d.hi < side_cr.lo:
        return True
    if d.hi < 0 or d.lo >= side_cr.hi:
        return False
    raise Indeterminate("action enclosure straddles a box edge")


def witness_phase(J, k, target, prec=DEFAULT_PREC):
    """The point of J whose phase k.theta hits ``target`` mod 1.

    Solved exactly in the expression algebra: the phase moves linearly with
    speed k_direction along the interval, so the smallest admissible offset
    is ((target - k.theta0) mod 1) / |k_direction| (mirrored for negative
    k_direction).  Raises PhaseUnreachable when the offset exceeds the
    interval length; a length >= 1/|k_direction| always reaches.
    """
    kdir = k[J.direction - 1]
    if kdir == 0:
        raise PhaseUnreachable("phase does not depend on the free angle")
    theta0 = [as_coord(x) for x in J.base.theta]
    if not all(isinstance(x, ExactExpr) for x in theta0):
        raise TypeError("witness_phase needs exact base angles")
    ph0 = ExactExpr()
    for kj, x in zip(k, theta0):
        if kj:
            ph0 = ph0 + x * kj
    target = ExactExpr.rational(Fraction(target))
    delta = target - ph0
    if kdir < 0:
        delta = -delta
    red, _ = delta.mod1(prec)
    offset = red.div_rational(abs(kdir))
    # offset is in [0, 1/|kdir|); check it lies within the interval
    length = ExactExpr.rational(J.length)
    gap = length - offset
    from .arith import cert_nonneg

    if not cert_nonneg(gap, prec):
        raise PhaseUnreachable(
            f"phase {target.to_text()} needs offset beyond the interval length"
        )
    return J.point_at(offset, prec)
