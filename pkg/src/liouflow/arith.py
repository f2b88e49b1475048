"""Continued fractions, convergents, and frequency-vector constructors.

Two arithmetic regimes are built here:

* ``yoccoz``:  stage denominators interlace super-exponentially,
  e^{q_n} <= q'_n/4 and e^{q'_n} <= q_{n+1}/4.
* ``weakmix``: q'_n = q_n^4 with |q_n a - p_n| <= e^{-2 q'_n} and
  |q'_n a' - p'_n| <= e^{-q'_n}.

Frequencies are realised as a finite rational approximant plus an exp tail,
small enough not to disturb the certified convergents.  Every constructor
output is re-verified by an independent certified pass (`verify_frequency_vector`)
that uses only interval arithmetic on the exact expressions, never the
builder's internal bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .certreal import DEFAULT_PREC, PREC_CAP, CertifiedReal, certified_sign, cr_max, cr_min, refine_until
from .errors import Indeterminate, PrecisionExhausted, ResourceLimit
from .exactexpr import ExactExpr
from . import exactexpr as _xe

__all__ = [
    "ConvergentLadder",
    "FrequencyVector",
    "ConvergentCheck",
    "cf_expand",
    "check_convergent_bounds",
    "dist_to_int",
    "build_yoccoz_pair",
    "build_weakmixing_pair",
    "verify_frequency_vector",
]

LOG2_E = 1.4426950408889634
DEFAULT_BIT_CAP = 10**6


@dataclass(frozen=True)
class ConvergentLadder:
    """Finite prefix of the convergents (p_k, q_k) of a target number."""

    entries: tuple
    target: object  # ExactExpr or CertifiedReal

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def denominators(self):
        return tuple(q for _, q in self.entries)

    def index_of_denominator(self, q):
        for k, (_, qk) in enumerate(self.entries):
            if qk == q:
                return k
        raise KeyError(f"denominator {q} not in ladder")


@dataclass(frozen=True)
class FrequencyVector:
    """omega = (alpha, alpha', 1) with certified convergent ladders.

    ``stage_indices[n-1]`` is the ladder index carrying the paper-stage-n
    approximant of alpha (the yoccoz regime certifies one extra alpha stage,
    used by the window q_{n+1}/4).  Same for the primed side.
    """

    alpha: ExactExpr
    alpha_prime: ExactExpr
    ladder: ConvergentLadder
    ladder_prime: ConvergentLadder
    regime: str
    stages: int
    stage_indices: tuple
    stage_indices_prime: tuple

    def __post_init__(self):
        if self.regime not in ("yoccoz", "weakmix"):
            raise ValueError(f"unknown regime {self.regime!r}")

    # stage accessors, 1-based as in the construction
    def q(self, n):
        return self.ladder.entries[self.stage_indices[n - 1]][1]

    def p(self, n):
        return self.ladder.entries[self.stage_indices[n - 1]][0]

    def qp(self, n):
        return self.ladder_prime.entries[self.stage_indices_prime[n - 1]][1]

    def pp(self, n):
        return self.ladder_prime.entries[self.stage_indices_prime[n - 1]][0]

    @property
    def omega(self):
        return (self.alpha, self.alpha_prime, ExactExpr.rational(1))

    def alpha_err(self, n):
        """Exact expression q_n * alpha - p_n."""
        return self.alpha * self.q(n) - ExactExpr.rational(self.p(n))

    def alpha_prime_err(self, n):
        return self.alpha_prime * self.qp(n) - ExactExpr.rational(self.pp(n))


# ----------------------------------------------------------------------
# continued fraction expansion


def _cf_rational(fr):
    a_list = []
    num, den = fr.numerator, fr.denominator
    while den:
        a, rem = divmod(num, den)
        a_list.append(a)
        num, den = den, rem
    return a_list


def _entries_from_quotients(a_list):
    p_prev, q_prev = 1, 0
    p, q = a_list[0], 1
    entries = [(p, q)]
    for a in a_list[1:]:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        entries.append((p, q))
    return entries


def cf_expand(x, depth, prec=64, prec_cap=PREC_CAP):
    """First ``depth`` convergents of x (including the floor entry p_0/1).

    Rational input expands exactly via the Euclidean algorithm; irrational
    input (an ExactExpr with exp terms, or a CertifiedReal constant) uses
    certified floors at escalating working precision and raises
    PrecisionExhausted when partial quotients cannot be certified.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, ExactExpr) and x.is_rational():
        x = x.as_fraction()
    if isinstance(x, Fraction):
        a_list = _cf_rational(x)
        if len(a_list) < depth:
            raise ValueError(
                f"rational {x} has expansion of length {len(a_list)} < {depth}"
            )
        return ConvergentLadder(
            tuple(_entries_from_quotients(a_list[:depth])),
            ExactExpr.rational(x),
        )

    wp = max(prec, 64)
    while True:
        try:
            entries = _cf_attempt(x, depth, wp)
            target = x if isinstance(x, (ExactExpr, CertifiedReal)) else ExactExpr.rational(x)
            return ConvergentLadder(tuple(entries), target)
        except Indeterminate:
            if wp >= prec_cap:
                raise PrecisionExhausted(
                    f"cannot certify {depth} partial quotients at {prec_cap} bits"
                )
            wp = min(2 * wp, prec_cap)


def _floor_interval(z):
    flo = _xe._exact_floor_int(z._lo)
    fhi = _xe._exact_floor_int(z._hi)
    if flo != fhi:
        raise Indeterminate("floor undecided")
    return flo


def _cf_attempt(x, depth, wp):
    if isinstance(x, ExactExpr):
        z = x.eval(wp)
    elif isinstance(x, CertifiedReal):
        z = x.at_prec(wp)
    else:
        raise TypeError(f"cannot expand {x!r}")
    entries = []
    p_prev, q_prev = 1, 0
    p, q = None, None
    for _ in range(depth):
        a = _floor_interval(z)
        if p is None:
            p, q = a, 1
        else:
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
        entries.append((p, q))
        rem = z - CertifiedReal.from_int(a, wp)
        if rem.contains_zero():
            if rem.is_exact:
                if len(entries) < depth:
                    raise ValueError("expansion terminated before depth")
                break
            raise Indeterminate("remainder straddles zero")
        z = CertifiedReal.from_int(1, wp) / rem
    return entries


# ----------------------------------------------------------------------
# convergent-inequality checks


@dataclass(frozen=True)
class ConvergentCheck:
    k: int
    p: int
    q: int
    lower_ok: bool
    upper_ok: bool
    reason: str
    lower_margin: object = None
    upper_margin: object = None

    @property
    def ok(self):
        return self.lower_ok and self.upper_ok


def _signed_error(ladder, k, prec):
    """(-1)^k (q_k * target - p_k) as a CertifiedReal."""
    p, q = ladder.entries[k]
    t = ladder.target
    sign = 1 if k % 2 == 0 else -1
    if isinstance(t, ExactExpr):
        e = t * q - ExactExpr.rational(p)
        v = e.eval(prec)
    else:
        v = t.at_prec(prec) * CertifiedReal.from_int(q, prec) - CertifiedReal.from_int(p, prec)
    return v if sign == 1 else -v


def check_convergent_bounds(ladder, prec=DEFAULT_PREC):
    """Certify 1/(q_k+q_{k+1}) <= (-1)^k (q_k t - p_k) <= 1/q_{k+1} per index.

    Indices with a successor get both inequalities certified; a final entry
    that represents the target exactly (rational target) is reported as a
    failure with reason ``Terminating``.
    """
    if len(ladder) < 2:
        raise ValueError("ladder needs at least two entries")
    report = []
    exact = isinstance(ladder.target, ExactExpr)
    for k in range(len(ladder) - 1):
        p, q = ladder.entries[k]
        q_next = ladder.entries[k + 1][1]
        sign = 1 if k % 2 == 0 else -1
        if exact:
            err = (ladder.target * q - ExactExpr.rational(p)) * sign
            lo_expr = err - ExactExpr.rational(Fraction(1, q + q_next))
            up_expr = ExactExpr.rational(Fraction(1, q_next)) - err
            lower_ok = cert_nonneg(lo_expr, prec)
            upper_ok = cert_nonneg(up_expr, prec)
            lo_margin = lo_expr.eval(prec)
            up_margin = up_expr.eval(prec)
        else:
            val = _signed_error(ladder, k, prec)
            lo_margin = val - CertifiedReal.from_fraction(Fraction(1, q + q_next), val.prec)
            up_margin = CertifiedReal.from_fraction(Fraction(1, q_next), val.prec) - val
            lower_ok = _nonneg(lo_margin, lambda pr, k=k, q=q, qn=q_next: _signed_error(ladder, k, pr) - CertifiedReal.from_fraction(Fraction(1, q + qn), pr))
            upper_ok = _nonneg(up_margin, lambda pr, k=k, qn=q_next: CertifiedReal.from_fraction(Fraction(1, qn), pr) - _signed_error(ladder, k, pr))
        report.append(
            ConvergentCheck(k, p, q, lower_ok, upper_ok, "", lo_margin, up_margin)
        )
    # terminating rational endpoint
    t = ladder.target
    if isinstance(t, ExactExpr) and t.is_rational():
        p, q = ladder.entries[-1]
        if t.as_fraction() == Fraction(p, q):
            report.append(
                ConvergentCheck(len(ladder) - 1, p, q, False, True, "Terminating")
            )
    return report


def _nonneg(value, recompute, cap=PREC_CAP):
    """Certified test value >= 0, recomputing at higher precision if needed."""
    try:
        return certified_sign(value) >= 0
    except Indeterminate:
        prec = value.prec
        while prec < cap:
            prec = min(2 * prec, cap)
            try:
                return certified_sign(recompute(prec)) >= 0
            except Indeterminate:
                continue
        raise


def dist_to_int(k, x, prec=DEFAULT_PREC):
    """Certified enclosure of min_{p in Z} |k*x - p|."""
    if isinstance(x, (int, Fraction)):
        x = ExactExpr.rational(Fraction(x))
    if isinstance(x, ExactExpr):
        y = x * k
        red, _ = y.mod1(prec)
        if red.is_rational():
            f = red.as_fraction()
            return CertifiedReal.from_fraction(min(f, 1 - f), prec)
        fcr = red.eval(prec)
    else:
        y = x.at_prec(max(prec, x.prec)) * CertifiedReal.from_int(k)
        from .certreal import _reduce_mod1_raw

        lo, hi, _ = _reduce_mod1_raw(y)
        fcr = CertifiedReal._raw(lo, hi, y.prec)
    one = CertifiedReal.from_int(1, fcr.prec)
    d = cr_min(fcr, one - fcr)
    return cr_max(d, CertifiedReal.zero(d.prec))


# ----------------------------------------------------------------------
# certified comparisons on exact expressions


def expr_sign(e, prec=DEFAULT_PREC, cap=PREC_CAP):
    """Certified sign of an ExactExpr.

    Canonical forms whose coefficients all share one sign are decided
    structurally (e^m > 0 for every integer m), which covers margins far
    below any feasible evaluation precision, such as e^{-2q'} tails.
    Mixed-sign forms fall back to interval evaluation at escalating
    precision.
    """
    if e.is_zero():
        return 0
    signs = {1 if c > 0 else -1 for _, c in e.terms}
    if len(signs) == 1:
        return signs.pop()
    refined = refine_until(lambda p: e.eval(p), certified_sign, prec, cap)
    return certified_sign(refined)


def cert_nonneg(e, prec=DEFAULT_PREC, cap=PREC_CAP):
    """Certified e >= 0 for an ExactExpr (sign 0 counts as >= 0)."""
    return expr_sign(e, prec, cap) >= 0


def cert_less(a, b, prec=DEFAULT_PREC, cap=PREC_CAP):
    """Certified a < b for ExactExprs (strict)."""
    d = b - a
    if d.is_zero():
        return False
    return expr_sign(d, prec, cap) > 0


def ceil_cert(e, prec=64, cap=None):
    """Smallest integer >= e for an ExactExpr (exact for rational input)."""
    if e.is_rational():
        fr = e.as_fraction()
        return -((-fr.numerator) // fr.denominator)
    cap = cap or PREC_CAP
    return e.floor(prec, cap) + 1


def _ceil_div(a, b):
    return -((-a) // b)


# ----------------------------------------------------------------------
# builders


def _bits_of_exp(k, factor=1.0):
    """Rough upper bound on the bit size of factor * e^k (k >= 1)."""
    return int(k * LOG2_E) + 4 + max(0, int(math.log2(max(1.0, factor))))


def _check_bits(k, bit_cap, what):
    if _bits_of_exp(k) > bit_cap:
        raise ResourceLimit(
            f"{what} would need about {_bits_of_exp(k)} bits "
            f"(cap {bit_cap}); denominators grow as iterated exponentials"
        )


def _coprime_near_third(q):
    p = max(1, q // 3)
    while math.gcd(p, q) != 1:
        p += 1
    return p


def _coprime_near(q, target):
    """Numerator coprime to q, as close as possible to ``target``."""
    base = max(1, min(q - 1, round(target)))
    for d in range(q):
        for cand in (base + d, base - d):
            if 1 <= cand < q and math.gcd(cand, q) == 1:
                return cand
    raise ValueError(f"no numerator coprime to {q}")


def _tail_sign_for_index(idx):
    # conv_est requires (-1)^idx (q x - p) >= 0 at the last ladder entry
    return 1 if idx % 2 == 0 else -1


def _alpha_from_ladder(entries, k_tail):
    """alpha = p_N/q_N + sign * e^{-k}/q_N with the parity-correct sign."""
    p, q = entries[-1]
    sign = _tail_sign_for_index(len(entries) - 1)
    return (
        ExactExpr.rational(Fraction(p, q))
        + ExactExpr.exp(-k_tail) * Fraction(sign, q)
    )


def _alpha_prime_from_stage(pp, qp, k_tail):
    base = Fraction(pp, qp)
    a_list = _cf_rational(base)
    entries = _entries_from_quotients(a_list)
    sign = _tail_sign_for_index(len(entries) - 1)
    expr = ExactExpr.rational(base) + ExactExpr.exp(-k_tail) * Fraction(sign, qp)
    return expr, tuple(entries)


def build_yoccoz_pair(stages, q1, prec=DEFAULT_PREC, bit_cap=DEFAULT_BIT_CAP):
    """Frequency vector with ``stages`` certified stages of the interlacing
    condition e^{q_n} <= q'_n/4, e^{q'_n} <= q_{n+1}/4.

    Builders choose the smallest admissible denominators at each stage.
    """
    if stages < 1 or q1 < 1:
        raise ValueError("need stages >= 1 and q1 >= 1")
    q_list = [1, q1]  # q_0 = 1
    p_list = [0, 1]
    qp_list = []
    for n in range(1, stages + 1):
        _check_bits(4 * q_list[n], bit_cap, f"q'_{n} >= 4 e^{{q_{n}}}")
        qp = ceil_cert(ExactExpr.exp(q_list[n]) * 4, cap=max(PREC_CAP, 2 * _bits_of_exp(q_list[n]) + 128))
        if qp.bit_length() > bit_cap:
            raise ResourceLimit(f"q'_{n} exceeds {bit_cap} bits")
        qp_list.append(qp)
        _check_bits(qp, bit_cap, f"q_{n+1} >= 4 e^{{q'_{n}}}")
        thr = ceil_cert(ExactExpr.exp(qp) * 4, cap=max(PREC_CAP, 2 * _bits_of_exp(qp) + 128))
        a = max(1, _ceil_div(thr - q_list[n - 1], q_list[n]))
        q_list.append(a * q_list[n] + q_list[n - 1])
        p_list.append(a * p_list[n] + p_list[n - 1])
        if q_list[-1].bit_length() > bit_cap:
            raise ResourceLimit(f"q_{n+1} exceeds {bit_cap} bits")

    entries = [(0, 1)] + [(p_list[i], q_list[i]) for i in range(1, stages + 2)]
    k_alpha = 2 * q_list[-1].bit_length() + 2
    alpha = _alpha_from_ladder(entries, k_alpha)

    # primed side: stage approximants with numerators near q'/3
    pp_list = []
    for n, qp in enumerate(qp_list, start=1):
        if n == 1:
            pp_list.append(_coprime_near_third(qp))
        else:
            target = qp * Fraction(pp_list[-1], qp_list[n - 2])
            pp_list.append(_coprime_near(qp, target))
    k_prime = qp_list[-1] + 2
    alpha_prime, entries_prime = _alpha_prime_from_stage(
        pp_list[-1], qp_list[-1], k_prime
    )

    ladder = ConvergentLadder(tuple(entries), alpha)
    ladder_prime = ConvergentLadder(entries_prime, alpha_prime)
    fv = FrequencyVector(
        alpha=alpha,
        alpha_prime=alpha_prime,
        ladder=ladder,
        ladder_prime=ladder_prime,
        regime="yoccoz",
        stages=stages,
        stage_indices=tuple(range(1, stages + 2)),
        stage_indices_prime=tuple(
            ladder_prime.index_of_denominator(qp) for qp in qp_list
        ),
    )
    verify_frequency_vector(fv, prec)
    return fv


def build_weakmixing_pair(stages, q1, prec=DEFAULT_PREC, bit_cap=DEFAULT_BIT_CAP):
    """Frequency vector with ``stages`` certified stages of
    q_n^4 <= q'_n, |q_n a - p_n| <= e^{-2 q'_n}, |q'_n a' - p'_n| <= e^{-q'_n}.

    The construction takes q'_n = q_n^4 exactly and realises the required
    approximation rates with exp tails.
    """
    if stages < 1 or q1 < 2:
        raise ValueError("need stages >= 1 and q1 >= 2")
    q_list = [1, q1]
    p_list = [0, 1]
    qp_list = [q1**4]
    for n in range(1, stages):
        _check_bits(2 * qp_list[-1], bit_cap, f"q_{n+1} >= e^{{2 q'_{n}}}")
        thr = ceil_cert(
            ExactExpr.exp(2 * qp_list[-1]),
            cap=max(PREC_CAP, 2 * _bits_of_exp(2 * qp_list[-1]) + 128),
        )
        a = max(1, _ceil_div(thr - q_list[n - 1], q_list[n]))
        q_list.append(a * q_list[n] + q_list[n - 1])
        p_list.append(a * p_list[n] + p_list[n - 1])
        if q_list[-1].bit_length() > bit_cap:
            raise ResourceLimit(f"q_{n+1} exceeds {bit_cap} bits")
        qp = q_list[-1] ** 4
        if qp.bit_length() > bit_cap:
            raise ResourceLimit(f"q'_{n+1} exceeds {bit_cap} bits")
        qp_list.append(qp)

    entries = [(0, 1)] + [(p_list[i], q_list[i]) for i in range(1, stages + 1)]
    k_alpha = 2 * qp_list[-1] + 1
    alpha = _alpha_from_ladder(entries, k_alpha)

    pp_list = []
    for n, qp in enumerate(qp_list, start=1):
        if n == 1:
            pp_list.append(_coprime_near_third(qp))
        else:
            target = qp * Fraction(pp_list[-1], qp_list[n - 2])
            pp_list.append(_coprime_near(qp, target))
    k_prime = qp_list[-1] + 1
    alpha_prime, entries_prime = _alpha_prime_from_stage(
        pp_list[-1], qp_list[-1], k_prime
    )

    ladder = ConvergentLadder(tuple(entries), alpha)
    ladder_prime = ConvergentLadder(entries_prime, alpha_prime)
    fv = FrequencyVector(
        alpha=alpha,
        alpha_prime=alpha_prime,
        ladder=ladder,
        ladder_prime=ladder_prime,
        regime="weakmix",
        stages=stages,
        stage_indices=tuple(range(1, stages + 1)),
        stage_indices_prime=tuple(
            ladder_prime.index_of_denominator(qp) for qp in qp_list
        ),
    )
    verify_frequency_vector(fv, prec)
    return fv


# ----------------------------------------------------------------------
# independent verification pass


def _certify_ladder(ladder, prec):
    """Certify the entries really are the leading convergents of the target.

    The entries must reproduce the continued fraction recurrence
    p_{k+1} = a p_k + p_{k-1}, q_{k+1} = a q_k + q_{k-1} with integer
    quotients a >= 1, and the target must lie strictly inside the cylinder
    of the quotient prefix, i.e. strictly between p_J/q_J and the mediant
    (p_J + p_{J-1})/(q_J + q_{J-1}).  A real lies in that open interval iff
    its continued fraction starts with exactly these quotients, which makes
    every listed entry a genuine convergent at its listed index.
    """
    e = ladder.entries
    t = ladder.target
    if not isinstance(t, ExactExpr):
        raise TypeError("certification needs an exact target")
    p0, q0 = e[0]
    if q0 != 1:
        raise ValueError("ladder must start at the floor entry p_0/1")
    pm1, qm1 = 1, 0  # virtual index -1
    pk, qk = p0, q0
    for k in range(1, len(e)):
        p, q = e[k]
        if (q - qm1) % qk != 0:
            raise ValueError(f"ladder breaks the cf recurrence at index {k}")
        a = (q - qm1) // qk
        if a < 1 or p != a * pk + pm1:
            raise ValueError(f"ladder breaks the cf recurrence at index {k}")
        pm1, qm1, pk, qk = pk, qk, p, q
    # floor entry: p_0 <= t < p_0 + 1
    if not cert_nonneg(t - ExactExpr.rational(p0), prec) or not cert_less(
        t - ExactExpr.rational(p0), ExactExpr.rational(1), prec
    ):
        raise ValueError("first entry is not the floor of the target")
    # strict cylinder membership at the last entry
    J = len(e) - 1
    if J >= 1:
        sigma = 1 if J % 2 == 0 else -1
        end = ExactExpr.rational(Fraction(pk, qk))
        mediant = ExactExpr.rational(Fraction(pk + pm1, qk + qm1))
        if not cert_less((t - end) * sigma, (mediant - end) * sigma, prec):
            raise ValueError("target outside the continued-fraction cylinder")
        if expr_sign((t - end) * sigma, prec) <= 0:
            raise ValueError("target not strictly inside the cylinder")


def abs_expr(e):
    """|e| as an exact expression when the sign of e is certifiable."""
    if cert_nonneg(e, 64):
        return e
    return -e


def verify_frequency_vector(fv, prec=DEFAULT_PREC):
    """Independent certified re-verification of all regime invariants.

    Raises on any failure; returns a dict of check names to True.
    """
    out = {}
    _certify_ladder(fv.ladder, prec)
    _certify_ladder(fv.ladder_prime, prec)
    out["ladders_certified"] = True

    for name, ladder in (("alpha", fv.ladder), ("alpha_prime", fv.ladder_prime)):
        for rec in check_convergent_bounds(ladder, prec):
            if rec.reason != "Terminating" and not rec.ok:
                raise ValueError(f"conv_est fails for {name} at k={rec.k}")
    out["conv_est"] = True

    # tail margin: the exp tail must not disturb certified convergents
    for ladder in (fv.ladder, fv.ladder_prime):
        pN, qN = ladder.entries[-1]
        tail = ladder.target - ExactExpr.rational(Fraction(pN, qN))
        tail_abs = abs_expr(tail)
        for k in range(len(ladder) - 1):
            q, q_next = ladder.entries[k][1], ladder.entries[k + 1][1]
            if not cert_less(tail_abs, ExactExpr.rational(Fraction(1, 3 * q * q_next)), prec):
                raise ValueError(f"tail margin violated between q_{k} and q_{k+1}")
    out["tail_margin"] = True

    if fv.regime == "yoccoz":
        for n in range(1, fv.stages + 1):
            qn, qpn, qn1 = fv.q(n), fv.qp(n), fv.q(n + 1)
            if not cert_less(ExactExpr.exp(qn), ExactExpr.rational(Fraction(qpn, 4)), prec):
                raise ValueError(f"cond_Y first inequality fails at stage {n}")
            if not cert_less(ExactExpr.exp(qpn), ExactExpr.rational(Fraction(qn1, 4)), prec):
                raise ValueError(f"cond_Y second inequality fails at stage {n}")
        out["cond_Y"] = True
    else:
        for n in range(1, fv.stages + 1):
            if fv.q(n) ** 4 > fv.qp(n):
                raise ValueError(f"q^4 <= q' fails at stage {n}")
            err = abs_expr(fv.alpha_err(n))
            if not cert_nonneg(ExactExpr.exp(-2 * fv.qp(n)) - err, prec):
                raise ValueError(f"alpha approximation rate fails at stage {n}")
            err_p = abs_expr(fv.alpha_prime_err(n))
            if not cert_nonneg(ExactExpr.exp(-fv.qp(n)) - err_p, prec):
                raise ValueError(f"alpha' approximation rate fails at stage {n}")
        out["num_est"] = True

    # consequence of conv_est on the alpha side: |q_n a - p_n| <= 1/q_{n+1}
    for n in range(1, fv.stages + 1):
        idx = fv.stage_indices[n - 1]
        if idx + 1 < len(fv.ladder):
            q_next = fv.ladder.entries[idx + 1][1]
            gap = ExactExpr.rational(Fraction(1, q_next)) - abs_expr(fv.alpha_err(n))
            if not cert_nonneg(gap, prec):
                raise ValueError(f"dist_to_int bound fails at stage {n}")
    out["dist_bound"] = True
    return out


# ----------------------------------------------------------------------
# serialization


def dump_frequency_vector(fv):
    lines = [
        "# liouflow frequency vector",
        f"regime = {fv.regime}",
        f"stages = {fv.stages}",
        f"alpha = {fv.alpha.to_text()}",
        f"alpha_prime = {fv.alpha_prime.to_text()}",
        "ladder = " + " ".join(f"{p}/{q}" for p, q in fv.ladder.entries),
        "ladder_prime = " + " ".join(f"{p}/{q}" for p, q in fv.ladder_prime.entries),
        "stage_indices = " + " ".join(map(str, fv.stage_indices)),
        "stage_indices_prime = " + " ".join(map(str, fv.stage_indices_prime)),
        "",
    ]
    return "\n".join(lines)


def load_frequency_vector(text, verify=False, prec=DEFAULT_PREC):
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        fields[key.strip()] = val.strip()
    try:
        alpha = ExactExpr.parse(fields["alpha"])
        alpha_prime = ExactExpr.parse(fields["alpha_prime"])

        def entries(key):
            out = []
            for tok in fields[key].split():
                p, _, q = tok.partition("/")
                out.append((int(p), int(q)))
            return tuple(out)

        fv = FrequencyVector(
            alpha=alpha,
            alpha_prime=alpha_prime,
            ladder=ConvergentLadder(entries("ladder"), alpha),
            ladder_prime=ConvergentLadder(entries("ladder_prime"), alpha_prime),
            regime=fields["regime"],
            stages=int(fields["stages"]),
            stage_indices=tuple(int(v) for v in fields["stage_indices"].split()),
            stage_indices_prime=tuple(
                int(v) for v in fields["stage_indices_prime"].split()
            ),
        )
    except KeyError as exc:
        raise ValueError(f"missing field {exc} in frequency vector file")
    if verify:
        verify_frequency_vector(fv, prec)
    return fv
