"""Trigonometric series and the Hamiltonian families built from them.

All perturbations are finite sums of cosine terms amp * cos(2 pi k.theta)
over integer frequency vectors k.  A series carries a certified tail bound
for the stages a truncation omitted, stated at a given analyticity width
``tail_rho`` (the bound is then valid on D_rho for every rho <= tail_rho,
the real torus included).  Norm bounds on D_rho use the exact supremum of
|cos| on the complex strip, cosh(2 pi rho |k|_1), which is sharper than the
cruder exponential bound it is cross-checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .arith import FrequencyVector, abs_expr, cert_nonneg, expr_sign
from .certreal import (
    DEFAULT_PREC,
    CertifiedReal,
    certified_sign,
    cos2pi,
    cosh_cr,
    sqrt_cr,
)
from .errors import DivisionByNearZero, ResourceLimit, StageUnavailable
from .exactexpr import ExactExpr, cos2pi_expr

__all__ = [
    "TrigTerm",
    "TrigSeries",
    "Rotator",
    "Diffusion",
    "WeakMixing",
    "Model",
    "ModelReparam",
    "build_h",
    "build_phi",
    "build_htilde",
    "analytic_norm_bound",
    "eval_hamiltonian",
    "series_eval",
    "series_range",
]

NORM_ARG_CAP = 10**9  # cosh arguments beyond this raise ResourceLimit


@dataclass(frozen=True)
class TrigTerm:
    """One term amp * cos(2 pi k.theta); k = (0,0,0) is reserved for const_part."""

    amp: ExactExpr
    k: tuple

    def __post_init__(self):
        if tuple(self.k) == (0, 0, 0):
            raise ValueError("constant terms belong in const_part")

    def k1_norm(self):
        return sum(abs(c) for c in self.k)


@dataclass(frozen=True)
class TrigSeries:
    """const_part + sum of TrigTerms, plus a certified bound on omitted terms.

    ``tail_bound`` is a sup bound of everything the truncation dropped, valid
    on D_rho for all rho <= tail_rho; evaluation on the real torus widens
    enclosures by it.
    """

    const_part: ExactExpr
    terms: tuple
    tail_bound: CertifiedReal
    tail_rho: Fraction = Fraction(1)
    stage_tags: tuple = ()  # optional per-term stage labels, parallel to terms

    def __post_init__(self):
        if self.tail_bound.hi < 0:
            raise ValueError("tail_bound must be nonnegative")

    def is_zero(self):
        return (
            self.const_part.is_zero()
            and not self.terms
            and self.tail_bound.hi == 0
        )

    def sup_bound(self, prec=DEFAULT_PREC):
        """Certified real-torus sup bound |const| + sum |amp| + tail."""
        total = abs(self.const_part.eval(prec))
        for t in self.terms:
            total = total + abs(t.amp.eval(prec))
        return total + self.tail_bound

    def theta2_free(self):
        return all(t.k[1] == 0 for t in self.terms)


def zero_series(prec=DEFAULT_PREC):
    return TrigSeries(ExactExpr(), (), CertifiedReal.zero(prec))


def series_eval(s, theta, prec=DEFAULT_PREC):
    """Certified value of the series at torus angles theta.

    theta components may be ExactExpr (phases are then reduced mod 1 in the
    exact algebra, surviving arguments of size e^{q'}) or CertifiedReal.
    """
    total = s.const_part.eval(prec) if s.const_part else CertifiedReal.zero(prec)
    for t in s.terms:
        c = _cos_phase(t.k, theta, prec)
        total = total + t.amp.eval(prec) * c
    return total.widened(s.tail_bound)


def _phase(k, theta, prec):
    if all(isinstance(x, ExactExpr) for x in theta):
        out = ExactExpr()
        for kj, xj in zip(k, theta):
            if kj:
                out = out + xj * kj
        return out
    out = CertifiedReal.zero(prec)
    for kj, xj in zip(k, theta):
        if kj:
            xj = xj.eval(prec) if isinstance(xj, ExactExpr) else xj.at_prec(prec)
            out = out + xj * CertifiedReal.from_int(kj)
    return out


def _cos_phase(k, theta, prec):
    ph = _phase(k, theta, prec)
    if isinstance(ph, ExactExpr):
        return cos2pi_expr(ph, prec)
    return cos2pi(ph, prec)


def series_range(s, prec=DEFAULT_PREC):
    """Certified (lower, upper) bounds of the series on the real torus."""
    spread = CertifiedReal.zero(prec)
    for t in s.terms:
        spread = spread + abs(t.amp.eval(prec))
    spread = spread + s.tail_bound
    c = s.const_part.eval(prec)
    return (c - spread, c + spread)


# ----------------------------------------------------------------------
# Hamiltonian variants


@dataclass(frozen=True)
class Rotator:
    omega: tuple  # (alpha, alpha_prime, 1) as ExactExpr


@dataclass(frozen=True)
class Diffusion:
    omega: tuple
    h: TrigSeries


@dataclass(frozen=True)
class WeakMixing:
    omega: tuple
    phi: TrigSeries
    htilde: TrigSeries

    def validate(self, prec=DEFAULT_PREC):
        if self.phi.const_part != ExactExpr.rational(1):
            raise ValueError("phi must have constant part 1")
        spread = CertifiedReal.zero(prec)
        for t in self.phi.terms:
            spread = spread + abs(t.amp.eval(prec))
        spread = spread + self.phi.tail_bound
        if not spread.hi < 0.25:
            raise ValueError("phi amplitude bound must stay below 1/4")
        return True


@dataclass(frozen=True)
class Model:
    """Single-stage model: H = <r,w> - a_q cos 2pi(q th1 - p th3) - b cos 2pi(q' th2 - p' th3)."""

    omega: tuple
    a_q: ExactExpr
    q: int
    p: int
    b_qp: ExactExpr
    qp: int
    pp: int

    def validate(self, prec=DEFAULT_PREC):
        alpha, alpha_prime, _ = self.omega
        for amp, q, p, a in (
            (self.a_q, self.q, self.p, alpha),
            (self.b_qp, self.qp, self.pp, alpha_prime),
        ):
            err4 = abs_expr(a * q - ExactExpr.rational(p)) * 4
            if not cert_nonneg(ExactExpr.exp(-q) - amp, prec):
                raise ValueError(f"need e^-{q} >= amplitude")
            if not cert_nonneg(amp - err4, prec):
                raise ValueError(f"need amplitude >= 4|{q} a - {p}|")
        return True

    def as_series(self):
        return TrigSeries(
            ExactExpr(),
            (
                TrigTerm(-self.a_q, (self.q, 0, -self.p)),
                TrigTerm(-self.b_qp, (0, self.qp, -self.pp)),
            ),
            CertifiedReal.zero(),
        )


@dataclass(frozen=True)
class ModelReparam:
    """Single-stage reparametrized model (the kappa = q^2 system)."""

    omega: tuple
    phi: TrigSeries
    C: CertifiedReal
    q: int
    p: int
    qp: int
    pp: int
    kappa: int

    def validate(self, prec=DEFAULT_PREC):
        if self.kappa != self.q**2:
            raise ValueError("kappa must equal q^2")
        csq = self.C * self.C
        bound = CertifiedReal.from_int(self.q, prec)
        if not (csq.hi <= bound.lo):
            raise ValueError("need |C| <= sqrt(q)")
        lo, hi = series_range(self.phi, prec)
        if not (
            lo.lo >= CertifiedReal.from_fraction(Fraction(3, 4), prec).lo
            and hi.hi <= 2
        ):
            raise ValueError("need 3/4 <= phi <= 2")
        return True

    def htilde_equivalent(self):
        """The single-stage tilde-series whose flow matches the model system."""
        amp1 = ExactExpr.exp(-self.qp) * (-self.kappa)
        amp2 = ExactExpr.exp(-self.qp) * (-1)
        return TrigSeries(
            ExactExpr(),
            (
                TrigTerm(amp1, (self.kappa * self.q, 0, -self.kappa * self.p)),
                TrigTerm(amp2, (0, self.qp, -self.pp)),
            ),
            CertifiedReal.zero(),
        )


# ----------------------------------------------------------------------
# builders from a frequency vector


def _stage_terms_h(fv, n):
    q, p = fv.q(n), fv.p(n)
    qp, pp = fv.qp(n), fv.pp(n)
    return (
        TrigTerm(-ExactExpr.exp(-q), (q, 0, -p)),
        TrigTerm(-ExactExpr.exp(-qp), (0, qp, -pp)),
    )


def _stage_terms_phi(fv, n):
    q, p = fv.q(n), fv.p(n)
    return (TrigTerm(ExactExpr.exp(-fv.qp(n)) * q, (q, 0, -p)),)


def _stage_terms_htilde(fv, n):
    q, p = fv.q(n), fv.p(n)
    qp, pp = fv.qp(n), fv.pp(n)
    kappa = q * q
    return (
        TrigTerm(ExactExpr.exp(-qp) * (-kappa), (kappa * q, 0, -kappa * p)),
        TrigTerm(-ExactExpr.exp(-qp), (0, qp, -pp)),
    )


def _pi_cr(prec):
    from mpmath.libmp.libmpi import mpi_pi

    lo, hi = mpi_pi(prec)
    return CertifiedReal._raw(lo, hi, prec)


def _term_norm(term, rho, prec):
    """|amp| cosh(2 pi rho |k|_1), certified."""
    arg = 2 * Fraction(rho) * term.k1_norm()
    if arg > NORM_ARG_CAP:
        raise ResourceLimit(
            f"cosh argument 2 pi rho |k|_1 with |k|_1 = {term.k1_norm()} "
            f"exceeds the {NORM_ARG_CAP} cap"
        )
    x = CertifiedReal.from_fraction(arg, prec) * _pi_cr(prec + 10)
    return abs(term.amp.eval(prec)) * cosh_cr(x, prec)


def _truncate(fv, N, stage_terms, const, tail_rho, prec):
    if N < 0 or N > fv.stages:
        raise StageUnavailable(f"stage {N} of {fv.stages} certified stages")
    terms = []
    for n in range(1, N + 1):
        terms.extend(stage_terms(fv, n))
    tags = []
    for n in range(1, N + 1):
        tags.extend([n] * len(stage_terms(fv, n)))
    tail = CertifiedReal.zero(prec)
    for n in range(N + 1, fv.stages + 1):
        for t in stage_terms(fv, n):
            tail = tail + _term_norm(t, tail_rho, prec)
    return TrigSeries(const, tuple(terms), tail, Fraction(tail_rho), tuple(tags))


def build_h(fv, N, tail_rho=1, prec=DEFAULT_PREC):
    """Truncation of the interlaced-cosine perturbation h (yoccoz regime).

    Stage n contributes -e^{-q_n} cos 2pi(q_n th1 - p_n th3) and
    -e^{-q'_n} cos 2pi(q'_n th2 - p'_n th3); stages above N are folded into
    the certified tail bound at width tail_rho.
    """
    if fv.regime != "yoccoz":
        raise ValueError("build_h needs a yoccoz frequency vector")
    return _truncate(fv, N, _stage_terms_h, ExactExpr(), tail_rho, prec)


def build_phi(fv, N, tail_rho=1, prec=DEFAULT_PREC):
    """Time-change factor 1 + sum q_n e^{-q'_n} cos 2pi(q_n th1 - p_n th3)."""
    if fv.regime != "weakmix":
        raise ValueError("build_phi needs a weakmix frequency vector")
    return _truncate(fv, N, _stage_terms_phi, ExactExpr.rational(1), tail_rho, prec)


def build_htilde(fv, N, tail_rho=1, prec=DEFAULT_PREC):
    """Truncation of the kappa-accelerated perturbation (kappa_n = q_n^2)."""
    if fv.regime != "weakmix":
        raise ValueError("build_htilde needs a weakmix frequency vector")
    return _truncate(fv, N, _stage_terms_htilde, ExactExpr(), tail_rho, prec)


def analytic_norm_bound(s, rho, prec=DEFAULT_PREC):
    """Certified upper bound for the sup of |s| on the complex strip D_rho.

    Computes sum |amp_j| cosh(2 pi rho |k_j|_1) + |const| + tail_bound.  The
    stored tail is stated at s.tail_rho, so rho must not exceed it unless the
    tail is zero.
    """
    rho = Fraction(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    if s.tail_bound.hi != 0 and rho > s.tail_rho:
        raise ValueError(
            f"tail bound stated at rho = {s.tail_rho}; cannot certify at {rho}"
        )
    total = abs(s.const_part.eval(prec)) + s.tail_bound
    for t in s.terms:
        total = total + _term_norm(t, rho, prec)
    return total


def crude_exponential_norm_bound(s, rho, prec=DEFAULT_PREC):
    """The cruder per-term bound |amp| e^{2 pi rho |k|_1}, for cross-checking."""
    from .certreal import exp_cr

    rho = Fraction(rho)
    total = abs(s.const_part.eval(prec)) + s.tail_bound
    for t in s.terms:
        x = CertifiedReal.from_fraction(2 * rho * t.k1_norm(), prec) * _pi_cr(prec + 10)
        total = total + abs(t.amp.eval(prec)) * exp_cr(x, prec)
    return total


def omega_dot(omega, r, prec=DEFAULT_PREC):
    """<omega, r> for mixed exact/certified action coordinates."""
    if all(isinstance(x, ExactExpr) for x in r):
        out = ExactExpr()
        for w, x in zip(omega, r):
            out = out + w * x
        return out.eval(prec)
    out = CertifiedReal.zero(prec)
    for w, x in zip(omega, r):
        xc = x.eval(prec) if isinstance(x, ExactExpr) else x.at_prec(prec)
        out = out + w.eval(prec) * xc
    return out


def eval_hamiltonian(spec, theta, r, prec=DEFAULT_PREC):
    """Certified enclosure of H(theta, r) for any variant.

    Truncation only: enclosures are widened by the series tail bounds.
    """
    dot = omega_dot(spec.omega, r, prec)
    if isinstance(spec, Rotator):
        return dot
    if isinstance(spec, Diffusion):
        return dot + series_eval(spec.h, theta, prec)
    if isinstance(spec, Model):
        return dot + series_eval(spec.as_series(), theta, prec)
    if isinstance(spec, (WeakMixing, ModelReparam)):
        ht = (
            spec.htilde if isinstance(spec, WeakMixing) else spec.htilde_equivalent()
        )
        num = dot + series_eval(ht, theta, prec)
        den = series_eval(spec.phi, theta, prec)
        if den.contains_zero():
            raise DivisionByNearZero("phi enclosure meets zero")
        return num / den
    raise TypeError(f"unknown Hamiltonian variant {type(spec)!r}")
