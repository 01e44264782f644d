"""B-side pipeline: mirror-curve construction, closed-form Puiseux solution
of log y, the Newton oracle, the instanton superpotential, and the
term-by-term comparison against the A-side.

The normalized curve is H(y, tq) = 1 + y + sum_a tq_a y^{eps_a}.  Internally
only v' = log y - i pi is ever stored: under y = -y', tq_a = (-1)^{-eps_a}
tq'_a the equation becomes 1 - e^{v'} + sum_a tq'_a e^{eps_a v'} = 0, whose
solution is a power series with cyclotomic coefficients and v'(0) = 0.  No
transcendental constants enter any coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .amodel import (
    FramedBrane,
    UnsupportedInput,
    disk_potential_A,
    extended_charge_matrix,
    potential_ring,
)
from .exactring import pochhammer
from .lattice import StackyFan, invert_rational
from .series import PuiseuxSeries, SeriesRing, newton_solve


class CurveError(ValueError):
    pass


@dataclass(frozen=True)
class MirrorCurve:
    """Normalized mirror-curve data for a framed brane.

    eps[a] is the y-exponent of tq_a; subst[a] gives the exponents of
    (x, q_1..q_k) in the image of tq_a; p_tilde and p_tilde_inv are the
    basis-change matrices between the hatted and tilded moduli.
    """

    brane: FramedBrane
    eps: tuple
    subst: tuple
    p_tilde: tuple
    p_tilde_inv: tuple

    @property
    def s1(self) -> int:
        return self.brane.s1

    @property
    def k(self) -> int:
        return self.brane.fan.k

    def equation(self) -> str:
        terms = ["1", "y"]
        for a, e in enumerate(self.eps):
            terms.append(f"tq_{a}*y^({e})" if e != 0 else f"tq_{a}")
        return " + ".join(terms) + " = 0"


def build_curve(fan: StackyFan, brane: FramedBrane) -> MirrorCurve:
    """Normalized curve exponents and moduli transforms for the brane."""
    flag = brane.flag
    f = brane.f
    s1 = brane.s1
    i_sigma, pair, _ = fan.sigma_basis(brane.sigma)
    eps = [Fraction(-f)]
    for a in range(fan.k):
        eps.append(f * pair[flag.i1][a] - pair[flag.i2][a])
    # tq_0 = x^{s1}, tq_a = q_a x^{-s1 <D_{i1}, e^a>}
    subst = [[s1] + [0] * fan.k]
    for a in range(fan.k):
        xexp = -s1 * pair[flag.i1][a]
        if xexp.denominator != 1:
            raise AssertionError("brane-variable exponent must be integral")
        row = [int(xexp)] + [1 if b == a else 0 for b in range(fan.k)]
        subst.append(row)
    # basis-change matrices (p~_{ab}) = l~^{(b)}_{i(a)}, i(0) = i1
    ext = extended_charge_matrix(fan, brane)
    indices = [flag.i1] + i_sigma
    p_tilde = [[ext[b][indices[a] - 1] for b in range(fan.k + 1)]
               for a in range(fan.k + 1)]
    try:
        p_inv = invert_rational(p_tilde)
    except Exception as exc:
        raise CurveError("the moduli basis-change matrix is singular") from exc
    # cross-check the exponents against the basis-change route
    for a in range(fan.k + 1):
        via_inv = -sum(
            Fraction(ext[b][flag.i2 - 1]) * p_inv[b][a] for b in range(fan.k + 1)
        )
        if via_inv != eps[a]:
            raise AssertionError("curve exponents disagree with the p-matrix route")
    return MirrorCurve(
        brane=brane,
        eps=tuple(eps),
        subst=tuple(tuple(row) for row in subst),
        p_tilde=tuple(tuple(row) for row in p_tilde),
        p_tilde_inv=tuple(tuple(row) for row in p_inv),
    )


# ---------------------------------------------------------------------------
# solving for log y
# ---------------------------------------------------------------------------

def moduli_ring(curve: MirrorCurve, T) -> SeriesRing:
    """Unit-weight ring in tq_0..tq_k deep enough to cover image weight T.

    A monomial tq^n maps to x^{d0} q^m with weight |d0|/s1 + sum m; its
    tq-total-degree is at most (1 + max(0, gamma)) times that weight, so
    truncating at that multiple keeps every needed term.
    """
    fan = curve.brane.fan
    brane = curve.brane
    _, pair, _ = fan.sigma_basis(brane.sigma)
    gammas = [pair[brane.flag.i1][a] for a in range(fan.k)]
    gamma_plus = max([Fraction(0)] + [g for g in gammas if g > 0])
    depth = Fraction(T) * (1 + gamma_plus)
    names = tuple(f"tq_{a}" for a in range(fan.k + 1))
    return SeriesRing(
        vars=names,
        weights=tuple(Fraction(1) for _ in names),
        trunc=depth,
    )


def solve_log_y_closed(curve: MirrorCurve, T, field) -> PuiseuxSeries:
    """Closed-form series for v' = log y - i pi in the tq variables.

    Coefficient of tq^n is the phase (-1)^{sum eps_a n_a} times
    (sum eps_a n_a - 1)_(sum n_a - 1) / prod n_a!.
    """
    ring = moduli_ring(curve, T)
    terms = {}
    for n in _degree_grid(ring.nvars, int(ring.trunc)):
        if not any(n):
            continue
        total = sum(n)
        rate = sum((Fraction(e) * x for e, x in zip(curve.eps, n)), Fraction(0))
        coeff = pochhammer(rate - 1, total - 1)
        for x in n:
            coeff /= factorial(x)
        terms[tuple(Fraction(x) for x in n)] = field.phase(rate) * coeff
    return PuiseuxSeries(ring, terms)


def solve_log_y_newton(curve: MirrorCurve, T, field) -> PuiseuxSeries:
    """Newton-iteration series for v'; must equal the closed form exactly."""
    ring = moduli_ring(curve, T)
    one = ring.from_const(field.one())
    terms = [(one, Fraction(0)), (-one, Fraction(1))]
    for a, e in enumerate(curve.eps):
        exps = tuple(Fraction(1 if b == a else 0) for b in range(ring.nvars))
        terms.append((ring.monomial(exps, field.phase(e)), Fraction(e)))
    return newton_solve(terms, ring)


def _degree_grid(k: int, limit: int):
    if k == 0:
        yield ()
        return
    for head in range(limit + 1):
        for tail in _degree_grid(k - 1, limit - head):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# the instanton part
# ---------------------------------------------------------------------------

def w_h_inst(curve: MirrorCurve, T, field, method: str = "newton"):
    """Instanton part of the superpotential in (x, q), plus the log part.

    Transforms v' to the brane variables, strips the x-degree-0 terms (they
    assemble the f(q) log q_0 term, returned separately), and applies the
    dlog antiderivative: x^{d0} picks up s1/d0.
    """
    if method == "newton":
        v_prime = solve_log_y_newton(curve, T, field)
    elif method == "closed":
        v_prime = solve_log_y_closed(curve, T, field)
    else:
        raise ValueError(f"unknown method {method!r}")
    target = potential_ring(curve.brane, T)
    image = v_prime.substitute_monomial(target, [list(r) for r in curve.subst])
    log_part, rest = image.split_at_zero("x")
    return rest.integrate_dlog("x", curve.s1), log_part


# ---------------------------------------------------------------------------
# the two-pipeline comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyReport:
    equal: bool
    first_mismatch: tuple          # (exps, a_coeff, b_coeff) or None
    n_monomials_a: int
    n_monomials_b: int
    n_agree: int
    truncation: Fraction
    field_order: int
    a_side: PuiseuxSeries
    b_side: PuiseuxSeries
    log_part: PuiseuxSeries
    sectors: dict


def verify_identity(fan: StackyFan, brane: FramedBrane, T, field=None,
                    perturb=None, field_cap: int = 10**4) -> VerifyReport:
    """Monomial-by-monomial comparison of the two pipelines up to weight T.

    Preconditions are refused, not crashed: torsion lattices and
    non-semi-projective fans raise UnsupportedInput.  perturb, when given,
    is an exponent tuple in (x, q_1..q_k); the A-side coefficient there is
    shifted by +1 as a negative control.
    """
    if fan.torsion:
        raise UnsupportedInput("torsion unsupported in mirror pipeline")
    if not fan.semiprojectivity_check():
        raise UnsupportedInput(
            "fan is not semi-projective; the mirror theorem hypotheses fail"
        )
    field = field or brane.field(field_cap)
    sectors, a_side = disk_potential_A(fan, brane, T, field)
    curve = build_curve(fan, brane)
    b_side, log_part = w_h_inst(curve, T, field)
    if perturb is not None:
        ring = a_side.ring
        exps = tuple(Fraction(e) for e in perturb)
        a_side = a_side + ring.monomial(exps, field.one())
    monomials = set(a_side.terms) | set(b_side.terms)
    order = sorted(monomials, key=lambda e: (a_side.ring.weight(e), e))
    first = None
    agree = 0
    for e in order:
        ca = a_side.terms.get(e, field.zero())
        cb = b_side.terms.get(e, field.zero())
        if ca == cb:
            agree += 1
        elif first is None:
            first = (e, ca, cb)
    return VerifyReport(
        equal=first is None,
        first_mismatch=first,
        n_monomials_a=len(a_side.terms),
        n_monomials_b=len(b_side.terms),
        n_agree=agree,
        truncation=Fraction(T),
        field_order=field.order,
        a_side=a_side,
        b_side=b_side,
        log_part=log_part,
        sectors=sectors,
    )
