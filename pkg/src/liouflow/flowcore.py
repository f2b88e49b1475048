"""Exact flow evaluation for all Hamiltonian variants.

The linear variants (Model, Diffusion) integrate in closed form along the
straight orbit theta(t) = theta_0 + t omega.  The reparametrized variants
(ModelReparam, WeakMixing) follow the same straight lines traversed at speed
1/phi; the traversal parameter s solves t = integral_0^s phi(theta_0 + u w) du,
which is evaluated exactly per trigonometric term and inverted by certified
bisection.  The third action is never integrated: it is always reconstructed
from energy conservation, which is exact and cheaper.

Angles of initial points are kept as exact expressions whenever possible, so
phases such as t (q a - p) with t = e^{q'} reduce exactly in the expression
algebra instead of losing 35 digits to floating cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .arith import expr_sign
from .certreal import (
    DEFAULT_PREC,
    PREC_CAP,
    CertifiedReal,
    certified_sign,
    cos2pi,
    sin2pi,
)
from .errors import (
    DegenerateFrequency,
    Indeterminate,
    PrecisionExhausted,
    StageUnavailable,
)
from .exactexpr import ExactExpr, cos2pi_expr, sin2pi_expr
from .hamlib import (
    Diffusion,
    Model,
    ModelReparam,
    Rotator,
    TrigSeries,
    WeakMixing,
    eval_hamiltonian,
    series_eval,
    series_range,
)

__all__ = [
    "PhasePoint",
    "ActionDecomposition",
    "FlowResult",
    "TimeChange",
    "make_point",
    "resolve_r3",
    "model_flow",
    "diffusion_flow",
    "diffusion_action",
    "reparam_flow",
    "flow",
    "time_change_forward",
    "time_change_invert",
]


def as_cr(x, prec):
    if isinstance(x, ExactExpr):
        return x.eval(prec)
    if isinstance(x, CertifiedReal):
        return x.at_prec(max(prec, x.prec))
    if isinstance(x, (int, Fraction)):
        return CertifiedReal.from_fraction(Fraction(x), prec)
    raise TypeError(f"cannot interpret {x!r} as a coordinate")


def as_coord(x):
    if isinstance(x, (ExactExpr, CertifiedReal)):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactExpr.rational(Fraction(x))
    raise TypeError(f"cannot interpret {x!r} as a coordinate")


def coord_mod1(x, prec=DEFAULT_PREC):
    """Reduce a coordinate modulo 1 (exactly for expressions)."""
    if isinstance(x, ExactExpr):
        red, _ = x.mod1(prec)
        return red
    from .certreal import _reduce_mod1_raw

    lo, hi, _ = _reduce_mod1_raw(x)
    return CertifiedReal._raw(lo, hi, x.prec)


@dataclass(frozen=True)
class PhasePoint:
    """(theta, r) on an energy surface, with the cached energy value."""

    theta: tuple
    r: tuple
    energy: CertifiedReal

    def theta_cr(self, prec):
        return tuple(as_cr(x, prec) for x in self.theta)

    def r_cr(self, prec):
        return tuple(as_cr(x, prec) for x in self.r)


@dataclass(frozen=True)
class ActionDecomposition:
    """c + main + lower (+/- tail) decomposition of one action coordinate.

    ``c`` makes the total equal the initial action at t = 0; ``tail`` bounds
    the drift of the terms above the tracked stage.
    """

    c: CertifiedReal
    main: CertifiedReal
    lower: CertifiedReal
    tail: CertifiedReal

    def total(self):
        return (self.c + self.main + self.lower).widened(self.tail)


@dataclass(frozen=True)
class FlowResult:
    point: PhasePoint
    decompositions: dict
    s_param: object = None  # traversal parameter for reparametrized flows


def resolve_r3(spec, theta, r1, r2, c, prec=DEFAULT_PREC):
    """Third action making (theta, r) lie on the energy surface H = c.

    The omega_3 = 1 normalisation makes the solve linear and exact:
    for the linear variants  r3 = c - a r1 - a' r2 - h(theta);
    for the reparametrized   r3 = c phi(theta) - a r1 - a' r2 - htilde(theta).
    """
    alpha, alpha_prime, _ = spec.omega
    c = as_cr(c, prec)
    acc = c if not isinstance(spec, (WeakMixing, ModelReparam)) else (
        c * series_eval(spec.phi, theta, prec)
    )
    acc = acc - alpha.eval(prec) * as_cr(r1, prec)
    acc = acc - alpha_prime.eval(prec) * as_cr(r2, prec)
    if isinstance(spec, Diffusion):
        acc = acc - series_eval(spec.h, theta, prec)
    elif isinstance(spec, Model):
        acc = acc - series_eval(spec.as_series(), theta, prec)
    elif isinstance(spec, WeakMixing):
        acc = acc - series_eval(spec.htilde, theta, prec)
    elif isinstance(spec, ModelReparam):
        acc = acc - series_eval(spec.htilde_equivalent(), theta, prec)
    return acc


def make_point(spec, theta, r12, energy=None, r3=None, prec=DEFAULT_PREC):
    """On-surface phase point from angles and the first two actions.

    Give either the target ``energy`` (r3 is resolved) or ``r3`` (the energy
    is computed).
    """
    theta = tuple(as_coord(x) for x in theta)
    r1, r2 = (as_coord(x) for x in r12)
    if (energy is None) == (r3 is None):
        raise ValueError("give exactly one of energy, r3")
    if energy is not None:
        energy = as_cr(energy, prec)
        r3c = resolve_r3(spec, theta, r1, r2, energy, prec)
        return PhasePoint(theta, (r1, r2, r3c), energy)
    r3 = as_coord(r3)
    e = eval_hamiltonian(spec, theta, (r1, r2, r3), prec)
    return PhasePoint(theta, (r1, r2, r3), e)


# ----------------------------------------------------------------------
# linear variants: Model and Diffusion


def _komega(k, omega):
    out = ExactExpr()
    for kj, wj in zip(k, omega):
        if kj:
            out = out + wj * kj
    return out


def _advance_theta(theta, omega, s):
    """theta + s * omega componentwise, exact when both are expressions."""
    out = []
    for x, w in zip(theta, omega):
        if isinstance(x, ExactExpr) and isinstance(s, ExactExpr):
            out.append(x + s * w)
        else:
            prec = s.prec if isinstance(s, CertifiedReal) else DEFAULT_PREC
            xc = as_cr(x, prec)
            sc = as_cr(s, prec)
            out.append(xc + sc * w.eval(prec))
    return tuple(out)


class _LinearTerm:
    """Integrated contribution of one cosine term to one action coordinate."""

    __slots__ = ("amp", "k", "kj", "komega", "amplitude", "degenerate", "stage")

    def __init__(self, amp, k, j, omega, prec, stage=0):
        self.amp = amp
        self.k = k
        self.kj = k[j - 1]
        self.komega = _komega(k, omega)
        self.degenerate = self.komega.is_zero()
        self.stage = stage
        if not self.degenerate:
            den = self.komega.eval(prec + 16)
            if den.contains_zero():
                raise DegenerateFrequency(
                    f"k.omega for k = {k} encloses zero but is not exactly zero"
                )
            # A = -kj * amp / k.omega  so that  r_j(t) = c + A cos(2 pi k.theta(t))
            self.amplitude = (as_cr(self.amp, prec + 16) * (-self.kj)) / den
        else:
            self.amplitude = None

    def value(self, theta_t, s, prec):
        """F(s): the term's contribution at traversal parameter s."""
        if self.degenerate:
            # k.theta constant on the orbit: dr_j/ds = 2 pi kj amp sin(2 pi k.theta0)
            ph = _phase_of(self.k, theta_t, prec)
            sn = _sin_of(ph, prec)
            two_pi = _two_pi(prec)
            return as_cr(self.amp, prec) * (-self.kj) * (-(two_pi)) * sn * as_cr(s, prec)
        ph = _phase_of(self.k, theta_t, prec)
        return self.amplitude * _cos_of(ph, prec)


def _two_pi(prec):
    from mpmath.libmp.libmpi import mpi_pi

    lo, hi = mpi_pi(prec + 5)
    pi = CertifiedReal._raw(lo, hi, prec + 5)
    return pi + pi


def _phase_of(k, theta, prec):
    if all(isinstance(x, ExactExpr) for x in theta):
        out = ExactExpr()
        for kj, x in zip(k, theta):
            if kj:
                out = out + x * kj
        return out
    out = CertifiedReal.zero(prec)
    for kj, x in zip(k, theta):
        if kj:
            out = out + as_cr(x, prec) * CertifiedReal.from_int(kj)
    return out


def _cos_of(ph, prec):
    if isinstance(ph, ExactExpr):
        return cos2pi_expr(ph, prec)
    return cos2pi(ph, prec)


def _sin_of(ph, prec):
    if isinstance(ph, ExactExpr):
        return sin2pi_expr(ph, prec)
    return sin2pi(ph, prec)


def _guard_prec(prec, terms):
    """Working precision covering the largest integrated amplitude."""
    extra = 0
    for t in terms:
        if t.amplitude is not None:
            m = mpmath.mag(t.amplitude.value) if t.amplitude.value else 0
            extra = max(extra, int(m))
    return prec + 48 + max(0, extra)


def _linear_series(spec):
    if isinstance(spec, Model):
        return spec.as_series()
    if isinstance(spec, Diffusion):
        return spec.h
    if isinstance(spec, Rotator):
        return TrigSeries(ExactExpr(), (), CertifiedReal.zero())
    raise TypeError(f"not a linear variant: {type(spec)!r}")


def _linear_flow(spec, s0, t, prec, main_stage=None):
    series = _linear_series(spec)
    t = as_coord(t)
    wp0 = prec + 16
    terms = {1: [], 2: []}
    tags = series.stage_tags or tuple(0 for _ in series.terms)
    for term, tag in zip(series.terms, tags):
        for j in (1, 2):
            if term.k[j - 1]:
                terms[j].append(_LinearTerm(term.amp, term.k, j, spec.omega, wp0, tag))
    theta_t = tuple(
        coord_mod1(x, prec) for x in _advance_theta(s0.theta, spec.omega, t)
    )
    decomps = {}
    new_r = {}
    for j in (1, 2):
        wp = _guard_prec(prec, terms[j])
        vals0 = [tm.value(s0.theta, ExactExpr(), wp) for tm in terms[j]]
        valst = [tm.value(theta_t, t, wp) for tm in terms[j]]
        c = as_cr(s0.r[j - 1], wp)
        for v in vals0:
            c = c - v
        total = c
        for v in valst:
            total = total + v
        new_r[j] = total
        if main_stage is not None:
            decomps[j] = _decompose(terms[j], vals0, valst, s0.r[j - 1], main_stage, t, wp)
        else:
            zero = CertifiedReal.zero(wp)
            main = CertifiedReal.zero(wp)
            for v in valst:
                main = main + v
            decomps[j] = ActionDecomposition(c, main, zero, zero)
    r3 = resolve_r3(spec, theta_t, new_r[1], new_r[2], s0.energy, prec)
    point = PhasePoint(theta_t, (new_r[1], new_r[2], r3), s0.energy)
    return FlowResult(point, decomps)


def _term_drift_bound(tm, t, wp):
    """Certified bound on |F(t) - F(0)| for one integrated term.

    Two sound bounds, the smaller wins: 2|A| (range of the cosine) and
    2 pi |t| |amp k_j| (mean value along the orbit).
    """
    two_pi = _two_pi(wp)
    slope = two_pi * abs(as_cr(tm.amp, wp) * tm.kj) * abs(as_cr(t, wp))
    if tm.amplitude is None:
        return slope
    from .certreal import cr_min

    return cr_min(2 * abs(tm.amplitude), slope)


def _decompose(terms, vals0, valst, r0j, n, t, wp):
    zero = CertifiedReal.zero(wp)
    c = as_cr(r0j, wp)
    main = zero
    lower = zero
    tail = zero
    for tm, v0, vt in zip(terms, vals0, valst):
        if tm.stage <= n:
            c = c - v0
        if tm.stage == n:
            main = main + vt
        elif tm.stage < n:
            lower = lower + vt
        else:
            tail = tail + _term_drift_bound(tm, t, wp)
    return ActionDecomposition(c, main, lower, tail)


def model_flow(spec, s0, t, prec=DEFAULT_PREC):
    """Closed-form flow of the single-stage model Hamiltonian.

    theta(t) = theta0 + t omega;
    r_j(t) = c_j + (k_j amp/(k.omega)) cos(2 pi k.theta(t)) per driving term;
    r_3 is recovered from energy conservation.

    The closed form is valid for any parameters; the stretching lemma's
    amplitude inequalities are enforced by the verifiers, not here.
    """
    return _linear_flow(spec, s0, t, prec, main_stage=1)


def diffusion_flow(spec, s0, t, prec=DEFAULT_PREC, stage=None):
    """Closed-form flow of the interlaced-cosine Hamiltonian."""
    return _linear_flow(spec, s0, t, prec, main_stage=stage)


def diffusion_action(spec, s0, t, n, prec=DEFAULT_PREC, direction=1):
    """Action decomposition at stage n: c + f_n + (lower stages) +/- drift.

    ``main`` is the stage-n term evaluated in closed form, ``lower`` the
    exact sum of stages below n, and ``tail`` a certified drift bound for the
    truncated stages above n.  The decomposition refers to the truncated
    Hamiltonian; ledger bounds for the notional stages beyond the truncation
    are computed by the verifier from the frequency data.
    """
    if spec.h.stage_tags and n > max(spec.h.stage_tags):
        raise StageUnavailable(f"stage {n} beyond truncation")
    res = _linear_flow(spec, s0, t, prec, main_stage=n)
    return res.decompositions[direction]


def flow(spec, s0, t, prec=DEFAULT_PREC, **kw):
    """Dispatch to the closed-form flow of the given variant."""
    if isinstance(spec, (Model,)):
        return model_flow(spec, s0, t, prec)
    if isinstance(spec, (Diffusion, Rotator)):
        return _linear_flow(spec, s0, t, prec, main_stage=kw.get("stage"))
    if isinstance(spec, (WeakMixing, ModelReparam)):
        return reparam_flow(spec, s0, t, prec, **kw)
    raise TypeError(f"unknown variant {type(spec)!r}")


# ----------------------------------------------------------------------
# time change


class TimeChange:
    """t(s) = integral_0^s phi(theta0 + u omega) du, exact per term.

    Each cosine term integrates to
        amp [sin(2 pi (k.theta0 + s k.omega)) - sin(2 pi k.theta0)] / (2 pi k.omega);
    resonant terms (k.omega = 0, possible only for rational test inputs)
    integrate to amp cos(2 pi k.theta0) s.
    """

    def __init__(self, theta0, phi, omega, prec=DEFAULT_PREC):
        self.theta0 = tuple(as_coord(x) for x in theta0)
        self.phi = phi
        self.omega = omega
        self.prec = prec
        self.const = phi.const_part
        self._terms = []
        for term in phi.terms:
            kw = _komega(term.k, omega)
            kth = _phase_of(term.k, self.theta0, prec)
            self._terms.append((term.amp, term.k, kw, kth))
        lo, hi = series_range(phi, prec)
        self.slope_lo, self.slope_hi = lo, hi

    def oscillation_bound(self, prec=None):
        """Certified bound B with |t(s) - const*s| <= B for all s >= 0."""
        prec = prec or self.prec
        two_pi = _two_pi(prec)
        B = CertifiedReal.zero(prec)
        for amp, k, kw, kth in self._terms:
            if kw.is_zero():
                continue  # linear part handled via slope range instead
            den = abs(kw.eval(prec))
            B = B + 2 * abs(as_cr(amp, prec)) / (two_pi * den)
        return B

    def forward(self, s, prec=None):
        """Certified t(s)."""
        prec = prec or self.prec
        s = as_coord(s) if not isinstance(s, CertifiedReal) else s
        total = _mul_coord(self.const, s, prec)
        two_pi = _two_pi(prec)
        for amp, k, kw, kth in self._terms:
            if kw.is_zero():
                total = total + as_cr(amp, prec) * _cos_of(kth, prec) * as_cr(s, prec)
                continue
            if isinstance(kth, ExactExpr) and isinstance(s, ExactExpr):
                end = _sin_of(kth + s * kw, prec)
            else:
                end = _sin_of(as_cr(kth, prec) + as_cr(s, prec) * kw.eval(prec + 16), prec)
            start = _sin_of(kth, prec)
            den = two_pi * kw.eval(prec + 16)
            total = total + as_cr(amp, prec) * (end - start) / den
        return total

    def invert(self, t, prec=None, s_tol=None):
        """Certified s with t(s) = t, by bracketing and certified bisection.

        The initial bracket comes from the slope range of phi (within
        [t/2, 4t/3] for the 3/4 <= phi <= 2 regime, padded by the certified
        oscillation bound).  Bisection stops once the bracket is narrower
        than ``s_tol`` or the sign of t(s) - t becomes undecidable at the
        evaluation precision (the returned enclosure stays certified).
        """
        prec = prec or self.prec
        if self.phi.terms == () and self.phi.tail_bound.hi == 0:
            # pure constant speed: s = t / const exactly
            if isinstance(t, (int, Fraction)):
                t = ExactExpr.rational(Fraction(t))
            if isinstance(t, ExactExpr):
                return t.div_rational(self.const.as_fraction()).eval(prec)
            return as_cr(t, prec) / self.const.eval(prec)
        t_cr = as_cr(t, prec + 32)
        t_coord = as_coord(t) if not isinstance(t, CertifiedReal) else t
        mag_t = mpmath.mag(t_cr.value) if t_cr.value else 0
        wp = prec + 48 + max(0, int(mag_t))
        if s_tol is None:
            s_tol = mpmath.ldexp(1, -(prec // 2))
        B = self.oscillation_bound(wp)
        t_wide = as_cr(t, wp)
        clo = self.slope_lo
        chi = self.slope_hi
        if not (clo.lo > 0):
            raise DegenerateFrequency("time change speed must be positive")
        lo = ((t_wide - B) / chi - CertifiedReal.from_int(1, wp)).lo
        hi = ((t_wide + B) / clo + CertifiedReal.from_int(1, wp)).hi
        lo_cr = CertifiedReal(lo, 0, wp)
        hi_cr = CertifiedReal(hi, 0, wp)

        def sign_at(s_point):
            g = self.forward(s_point, wp) - t_wide
            return certified_sign(g)

        # certified signs at the endpoints
        if sign_at(lo_cr) > 0 or sign_at(hi_cr) < 0:
            raise PrecisionExhausted("initial bracket does not straddle the target")
        while True:
            width = mpmath.mp.make_mpf(
                mpmath.libmp.mpf_sub(hi_cr._lo, lo_cr._lo, 53, "c")
            )
            if width <= s_tol:
                break
            mid_raw = mpmath.libmp.mpf_shift(
                mpmath.libmp.mpf_add(lo_cr._lo, hi_cr._lo, wp, "n"), -1
            )
            mid = CertifiedReal(mpmath.mp.make_mpf(mid_raw), 0, wp)
            try:
                sg = sign_at(mid)
            except Indeterminate:
                break  # cannot split further at this precision; bracket stays certified
            if sg == 0:
                lo_cr = hi_cr = mid
                break
            if sg < 0:
                lo_cr = mid
            else:
                hi_cr = mid
        return CertifiedReal._raw(lo_cr._lo, hi_cr._lo, wp)


def time_change_forward(tc, s, prec=None):
    return tc.forward(s, prec)


def time_change_invert(tc, t, prec=None, s_tol=None):
    return tc.invert(t, prec, s_tol)


def _mul_coord(a, b, prec):
    if isinstance(a, ExactExpr) and isinstance(b, ExactExpr):
        return (a * b).eval(prec)
    return as_cr(a, prec) * as_cr(b, prec)


# ----------------------------------------------------------------------
# reparametrized variants


def _reparam_sources(spec, C, prec):
    """(coeff, k, stage) integrand sources: dr_j/ds = sum coeff (-2 pi k_j) sin(2 pi k.theta)."""
    sources = []
    phi_tags = spec.phi.stage_tags or tuple(0 for _ in spec.phi.terms)
    for term, tag in zip(spec.phi.terms, phi_tags):
        sources.append((C * as_cr(term.amp, prec), term.k, tag, "phi"))
    ht = spec.htilde if isinstance(spec, WeakMixing) else spec.htilde_equivalent()
    ht_tags = ht.stage_tags or tuple(0 for _ in ht.terms)
    for term, tag in zip(ht.terms, ht_tags):
        sources.append((-as_cr(term.amp, prec), term.k, tag, "htilde"))
    return sources


def reparam_flow(spec, s0, t, prec=DEFAULT_PREC, s_tol=None, stage=None, s_param=None):
    """Flow of the reparametrized Hamiltonian through the time change.

    Solves s from t, advances theta along the straight line, and evaluates
    the integrated action terms:

        r_1(t) = c_1 + C q^2 e^{-q'}/(q a - p) cos 2 pi (q th1 - p th3)
                     + q kappa e^{-q'}/(q a - p) cos 2 pi kappa (q th1 - p th3) + ...

    with C the certified energy (WeakMixing) or the given constant
    (ModelReparam).  The decomposition's ``main`` is the kappa-accelerated
    term of the tracked stage, ``lower`` collects everything else.
    """
    lo, hi = series_range(spec.phi, prec)
    if not (lo.lo >= 0.75 and hi.hi <= 2):
        raise ValueError("need certified 3/4 <= phi <= 2")
    if isinstance(spec, ModelReparam):
        C = as_cr(spec.C, prec)
        spec.validate(prec)
    else:
        C = s0.energy
    tc = TimeChange(s0.theta, spec.phi, spec.omega, prec)
    s = s_param if s_param is not None else tc.invert(t, prec, s_tol)
    theta_t = tuple(
        coord_mod1(x, prec) for x in _advance_theta(s0.theta, spec.omega, s)
    )
    sources = _reparam_sources(spec, C, prec + 16)
    if stage is None:
        tagset = [tag for _, _, tag, _ in sources if tag]
        stage = max(tagset) if tagset else 0
    decomps = {}
    new_r = {}
    for j in (1, 2):
        relevant = [
            (coeff, k, tag, fam)
            for coeff, k, tag, fam in sources
            if k[j - 1]
        ]
        wp = prec + 48
        # amplitude magnitudes drive the working precision
        amps = []
        for coeff, k, tag, fam in relevant:
            kw = _komega(k, spec.omega)
            if kw.is_zero():
                amps.append((coeff, k, tag, fam, None))
                continue
            den = kw.eval(wp + 16)
            if den.contains_zero():
                raise DegenerateFrequency(f"k.omega encloses zero for k = {k}")
            A = coeff * CertifiedReal.from_int(k[j - 1]) / den
            amps.append((coeff, k, tag, fam, A))
            if A.value:
                wp = max(wp, prec + 48 + int(mpmath.mag(A.value)))
        c = as_cr(s0.r[j - 1], wp)
        main = CertifiedReal.zero(wp)
        lower = CertifiedReal.zero(wp)
        two_pi = _two_pi(wp)
        total_t = CertifiedReal.zero(wp)
        for coeff, k, tag, fam, A in amps:
            if A is None:
                ph0 = _phase_of(k, s0.theta, wp)
                v0 = CertifiedReal.zero(wp)
                vt = coeff * (-(two_pi * CertifiedReal.from_int(k[j - 1]))) * _sin_of(ph0, wp) * as_cr(s, wp)
            else:
                v0 = A * _cos_of(_phase_of(k, s0.theta, wp), wp)
                vt = A * _cos_of(_phase_of(k, theta_t, wp), wp)
            c = c - v0
            total_t = total_t + vt
            if j == 1 and fam == "htilde" and tag == stage and abs(k[0]) > 1 and _is_kappa_term(spec, k, stage):
                main = main + vt
            elif j == 2 and fam == "htilde" and tag == stage:
                main = main + vt
            else:
                lower = lower + vt
        new_r[j] = c + total_t
        decomps[j] = ActionDecomposition(c, main, lower, CertifiedReal.zero(wp))
    energy = s0.energy if isinstance(spec, WeakMixing) else C
    r3 = resolve_r3(spec, theta_t, new_r[1], new_r[2], energy, prec)
    point = PhasePoint(theta_t, (new_r[1], new_r[2], r3), energy)
    return FlowResult(point, decomps, s_param=s)


def _is_kappa_term(spec, k, stage):
    if isinstance(spec, ModelReparam):
        return abs(k[0]) == spec.kappa * spec.q
    return True  # for WeakMixing, the stage's htilde r1-term is the kappa term
