"""A-side pipeline: extended charge data for a framed brane, enumeration of
the extended effective classes, disk factors, the closed-form pulled-back
coefficients, twisted-sector character weights, the assembled disk potential,
and the mirror-map series.

All formulas are post-specialization of the torus weights (w2 = f w1) and
homogeneous of weight zero in w1; the only w1 bookkeeping left is the audit
power reported by disk_factor_prime.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .exactring import CyclotomicField, lcm, pochhammer
from .lattice import BoxElement, FlagData, StackyFan, _grid, invert_rational
from .series import SeriesRing


class BraneError(ValueError):
    """Invalid brane data for the given fan."""


class UnsupportedInput(ValueError):
    """Structured refusal: input outside the engine's verified domain."""


def _frac_part(x: Fraction) -> Fraction:
    return x - x.__floor__()


@dataclass(frozen=True)
class FramedBrane:
    """A framed Aganagic-Vafa brane: a flag plus framing integer(s).

    Outer branes carry one framing integer f; inner branes carry (f+, f-)
    together with the second adjacent cone, its distinguished ray i4, and
    the compact-curve class alpha (stored through its divisor pairings).
    """

    fan: StackyFan
    flag: FlagData
    f: int                                  # f for outer, f+ for inner
    f_minus: int = None
    sigma_minus: tuple = None
    i4: int = None
    s1_minus: int = None
    alpha_pairings: tuple = None            # <D_i, alpha>, index i-1

    @property
    def outer(self) -> bool:
        return self.flag.outer

    @property
    def s1(self) -> int:
        return self.flag.s1

    @property
    def sigma(self) -> tuple:
        return self.flag.sigma

    @staticmethod
    def make(fan: StackyFan, ordering, framing) -> FramedBrane:
        """Build and validate a brane from the ray ordering (i1, i2, i3).

        framing is a single integer for an outer brane or an (f+, f-) pair
        for an inner one; inner pairs are checked against the line-bundle
        degrees the fan dictates.
        """
        i1, i2, i3 = ordering
        sigma = tuple(sorted(ordering))
        flag = fan.flag_data((i2, i3), sigma, ordering)
        if flag.outer:
            if not isinstance(framing, int):
                raise BraneError("outer brane takes a single framing integer")
            return FramedBrane(fan=fan, flag=flag, f=framing)
        if isinstance(framing, int):
            raise BraneError("inner brane takes a framing pair (f+, f-)")
        f_plus, f_minus = framing
        adjacent = fan.adjacent_cones((i2, i3))
        sigma_minus = next(tuple(c) for c in adjacent if tuple(c) != sigma)
        i4 = next(j for j in sigma_minus if j not in (i2, i3))
        flag_minus = fan.flag_data((i2, i3), sigma_minus, (i4, i3, i2))
        s1m = flag_minus.s1
        s1 = flag.s1
        # alpha = (1/s1-) e^{a(i4)} in the sigma_+ chart
        i_sigma, pair, _ = fan.sigma_basis(sigma)
        a4 = i_sigma.index(i4)
        alpha = tuple(pair[i][a4] / s1m for i in range(1, fan.r + 1))
        if alpha[i1 - 1] != Fraction(1, s1):
            raise AssertionError("curve class pairs incorrectly with D_{i1}")
        a2, a3 = alpha[i2 - 1], alpha[i3 - 1]
        if a2 != Fraction(f_plus, s1) - Fraction(f_minus + 1, s1m):
            raise BraneError(
                f"framing pair ({f_plus}, {f_minus}) inconsistent with "
                f"deg L2 = {a2}"
            )
        if a3 != Fraction(f_minus, s1m) - Fraction(f_plus + 1, s1):
            raise BraneError(
                f"framing pair ({f_plus}, {f_minus}) inconsistent with "
                f"deg L3 = {a3}"
            )
        return FramedBrane(
            fan=fan, flag=flag, f=f_plus, f_minus=f_minus,
            sigma_minus=sigma_minus, i4=i4, s1_minus=s1m,
            alpha_pairings=alpha,
        )

    def box(self) -> list:
        return self.fan.box_elements(self.sigma)

    def min_field_order(self) -> int:
        """Smallest even M so that Q(zeta_M) holds every phase of this run."""
        dens = [self.s1]
        for b in self.box():
            dens += [c.denominator for c in b.c.values()]
        _, pair, _ = self.fan.sigma_basis(self.sigma)
        for i in range(1, self.fan.r + 1):
            dens += [x.denominator for x in pair[i]]
        if not self.outer:
            dens.append(self.s1_minus)
            for b in self.fan.box_elements(self.sigma_minus):
                dens += [c.denominator for c in b.c.values()]
            dens += [x.denominator for x in self.alpha_pairings]
        return 2 * lcm(*dens)

    def field(self, cap: int = 10**4) -> CyclotomicField:
        M = self.min_field_order()
        if M > cap:
            raise UnsupportedInput(
                f"required root-of-unity order {M} exceeds the cap {cap}"
            )
        return CyclotomicField(M)


# ---------------------------------------------------------------------------
# extended charge data
# ---------------------------------------------------------------------------

def extended_charge_matrix(fan: StackyFan, brane: FramedBrane):
    """(k+1) x (r+2) matrix: framing row first, then padded charge rows.

    The framing row has 1, f, -f-1 at (i1, i2, i3) and (1, -1) in the two
    phantom columns; the phantom columns never enter I_sigma/I_tau products.
    """
    flag = brane.flag
    framing_row = [0] * (fan.r + 2)
    framing_row[flag.i1 - 1] = 1
    framing_row[flag.i2 - 1] = brane.f
    framing_row[flag.i3 - 1] = -brane.f - 1
    framing_row[fan.r] = 1
    framing_row[fan.r + 1] = -1
    rows = [tuple(framing_row)]
    for row in fan.charge_matrix():
        rows.append(tuple(row) + (0, 0))
    return rows


@dataclass(frozen=True)
class ExtendedDegree:
    """A winding/class pair (d0, beta) with cached pairings and sector."""

    d0: int
    n: tuple                # e^a coordinates of beta (sigma_+ chart)
    pairings: dict          # i -> <D_i, beta~> extended, keys 1..r
    beta_pairings: dict     # i -> <D_i, beta>
    box: BoxElement
    q_exps: tuple           # exponents of q_1..q_k
    weight: Fraction


def _extend_pairings(brane: FramedBrane, d0: int, beta_pairings: dict) -> dict:
    flag = brane.flag
    t = Fraction(d0, brane.s1)
    framing = {flag.i1: 1, flag.i2: brane.f, flag.i3: -brane.f - 1}
    return {
        i: t * framing.get(i, 0) + beta_pairings[i]
        for i in range(1, brane.fan.r + 1)
    }


def enumeration_weights(brane: FramedBrane):
    """(gammas, weights): <D_{i1}, e^a> and the weight each n_a carries.

    The weight of x^{d0} q^beta is d0/s1 + sum_a <p_a, beta>, which in the
    outer parametrization is n_0 + sum_a (1 - gamma_a) n_a.
    """
    fan = brane.fan
    _, pair, _ = fan.sigma_basis(brane.sigma)
    gammas = [pair[brane.flag.i1][a] for a in range(fan.k)]
    weights = [Fraction(1)] + [1 - g for g in gammas]
    if any(w <= 0 for w in weights):
        raise UnsupportedInput(
            "an effective-cone generator has non-positive weighted degree; "
            "the truncation does not terminate for this flag"
        )
    return gammas, weights


def _bounded_grid(weights, budget):
    """All nonnegative integer tuples n with sum w_a n_a <= budget."""
    if not weights:
        yield ()
        return
    w = weights[0]
    head = 0
    while head * w <= budget:
        for tail in _bounded_grid(weights[1:], budget - head * w):
            yield (head,) + tail
        head += 1


def enumerate_extended(fan: StackyFan, brane: FramedBrane, T) -> list:
    """All extended degrees of weighted degree <= T with d0 != 0.

    Outer: beta~ = sum_a n_a e~^a over nonnegative integers.  Inner: d0
    ranges over nonzero integers and beta over the union of the per-cone
    effective classes, subject to <D_i, beta~> in Z_{>=0} for i in I_tau.
    """
    T = Fraction(T)
    if T < 0:
        raise BraneError("truncation must be >= 0")
    if brane.outer:
        return _enumerate_outer(fan, brane, T)
    return _enumerate_inner(fan, brane, T)


def _enumerate_outer(fan, brane, T):
    s1 = brane.s1
    gammas, weights = enumeration_weights(brane)
    out = []
    for n in _bounded_grid(weights, T):
        d0_over_s1 = n[0] - sum(g * na for g, na in zip(gammas, n[1:]))
        d0 = d0_over_s1 * s1
        if d0 == 0:
            continue
        if d0.denominator != 1:
            raise AssertionError(f"winding {d0} is not an integer at n = {n}")
        d0 = int(d0)
        beta = tuple(n[1:])
        beta_pairings = fan.beta_pairings(brane.sigma, beta)
        out.append(ExtendedDegree(
            d0=d0,
            n=beta,
            pairings=_extend_pairings(brane, d0, beta_pairings),
            beta_pairings=beta_pairings,
            box=fan.v_of_beta(brane.sigma, beta_pairings),
            q_exps=beta,
            weight=Fraction(abs(d0), s1) + sum(beta, Fraction(0)),
        ))
    out.sort(key=lambda ed: (ed.weight, ed.d0, ed.q_exps))
    return out


def _enumerate_inner(fan, brane, T):
    flag = brane.flag
    s1 = brane.s1
    i_sigma, _, _ = fan.sigma_basis(brane.sigma)
    i_tau = [i for i in range(1, fan.r + 1) if i not in (flag.i2, flag.i3)]
    candidates = {}
    for cone in fan.cones:
        cap = _conversion_cap(fan, brane.sigma, cone, T)
        for n in _grid(fan.k, cap):
            coords = fan.beta_coords(cone, n)
            if coords not in candidates:
                candidates[coords] = {
                    i: sum(Fraction(x) * Fraction(c)
                           for x, c in zip(fan.divisor_class(i), coords))
                    for i in range(1, fan.r + 1)
                }
    out = []
    max_d0 = int(T * s1)
    for coords, beta_pairings in sorted(candidates.items()):
        q_exps = tuple(beta_pairings[i] for i in i_sigma)
        q_weight = sum((abs(q) for q in q_exps), Fraction(0))
        if q_weight > T:
            continue
        for d0 in range(-max_d0, max_d0 + 1):
            if d0 == 0:
                continue
            weight = Fraction(abs(d0), s1) + q_weight
            if weight > T:
                continue
            pairings = _extend_pairings(brane, d0, beta_pairings)
            if any(pairings[i] < 0 or pairings[i].denominator != 1 for i in i_tau):
                continue
            try:
                box = fan.v_of_beta(brane.sigma, beta_pairings)
            except AssertionError as exc:
                raise UnsupportedInput(
                    "inner-brane class has a sector outside Box(sigma+); "
                    "the unified-sum convention does not cover this input"
                ) from exc
            out.append(ExtendedDegree(
                d0=d0,
                n=tuple(int(e) for e in q_exps),
                pairings=pairings,
                beta_pairings=beta_pairings,
                box=box,
                q_exps=tuple(int(e) for e in q_exps),
                weight=weight,
            ))
    out.sort(key=lambda ed: (ed.weight, ed.d0, ed.q_exps))
    return out


def _conversion_cap(fan, sigma, other_cone, T) -> int:
    """Grid bound in the other cone's basis covering all weight-<=T classes."""
    if fan.k == 0:
        return 0
    i_other, _, _ = fan.sigma_basis(other_cone)
    bound = Fraction(1)
    for a in range(fan.k):
        unit = tuple(1 if b == a else 0 for b in range(fan.k))
        coords = fan.beta_coords(sigma, unit)
        total = sum(
            abs(sum(Fraction(x) * Fraction(c)
                    for x, c in zip(fan.divisor_class(i), coords)))
            for i in i_other
        )
        bound = max(bound, total)
    return int(T * bound) + 1


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def disk_factor_prime(brane: FramedBrane, d0: int, k_box: BoxElement, field):
    """Basic orbi-disk weight D'(d0, k; f) on the sigma_+ side.

    Returns (value in Q(zeta_M), w1 audit power = age(k)); the w1 power
    cancels in the amplitude coefficients and is exposed for auditing.
    """
    flag = brane.flag
    s1 = brane.s1
    if d0 <= 0:
        raise BraneError("disk factor needs d0 > 0 on the sigma_+ side")
    t = Fraction(d0, s1)
    eps1 = k_box.c_of(flag.i1)
    eps2 = k_box.c_of(flag.i2)
    eps3 = k_box.c_of(flag.i3)
    if _frac_part(t) != eps1:
        raise BraneError(f"(d0, k) = ({d0}, {k_box.v}) is not in H_(tau,sigma)")
    age = int(k_box.age)
    f = brane.f
    phase = field.phase(t * (-f - 1) - eps3 - _frac_part(eps2 - f * eps1))
    prod = Fraction(1)
    floor_t = int(t.__floor__())
    for a in range(1, floor_t + age):
        prod *= f * t - eps2 + a
    value = -phase * ((1 / t) ** (age + 1) * prod / factorial(floor_t))
    return value, age


def amplitude_coefficient(brane: FramedBrane, ed: ExtendedDegree, field):
    """The pulled-back disk amplitude coefficient A_{beta~}.

    Exact evaluation of the Gamma-ratio closed form; returns 0 when some
    I_tau pairing is negative or fractional (the term is absent).
    """
    flag = brane.flag
    fan = brane.fan
    f = brane.f
    i_tau = [i for i in range(1, fan.r + 1) if i not in (flag.i2, flag.i3)]
    for i in i_tau:
        p = ed.pairings[i]
        if p < 0 or p.denominator != 1:
            return field.zero()
    t = Fraction(ed.d0, brane.s1)
    p2 = ed.pairings[flag.i2]
    p3 = ed.pairings[flag.i3]
    n = -p2 - p3 - 1
    if n.denominator != 1:
        raise AssertionError("Pochhammer offset must be an integer (CY row sums)")
    n = int(n)
    if n < 0:
        raise AssertionError("Pochhammer offset negative on the effective domain")
    poch = pochhammer(-p3 - 1, n)
    v = ed.box
    exponent = (
        t * (-f - 1)
        - _frac_part(v.c_of(flag.i2) - f * v.c_of(flag.i1))
        + ed.beta_pairings[flag.i3]
    )
    denom = t
    for i in i_tau:
        denom *= factorial(int(ed.pairings[i]))
    return -field.phase(exponent) * (poch / denom)


def character_sqrt(brane: FramedBrane, v: BoxElement, field):
    """Square-root character weight of the twisted sector v."""
    flag = brane.flag
    return field.phase(v.c_of(flag.i2) - brane.f * v.c_of(flag.i1))


# ---------------------------------------------------------------------------
# assembled potential
# ---------------------------------------------------------------------------

def potential_ring(brane: FramedBrane, T) -> SeriesRing:
    """Series ring in (x, q_1..q_k) with weight 1/s1 on the brane variable."""
    fan = brane.fan
    names = ("x",) + tuple(f"q_{a}" for a in range(1, fan.k + 1))
    weights = (Fraction(1, brane.s1),) + tuple(Fraction(1) for _ in range(fan.k))
    laurent = (not brane.outer,) + tuple(False for _ in range(fan.k))
    return SeriesRing(vars=names, weights=weights, trunc=Fraction(T), laurent=laurent)


def disk_potential_A(fan: StackyFan, brane: FramedBrane, T, field=None):
    """Per-sector potentials W_v and the assembled A-side potential.

    Returns (sectors, assembled): sectors maps each Box point v to its
    series W_v; assembled = sum_v W_v * sqrt(chi(v)).
    """
    field = field or brane.field()
    ring = potential_ring(brane, T)
    sectors = {b.v: ring.zero() for b in brane.box()}
    for ed in enumerate_extended(fan, brane, T):
        coeff = amplitude_coefficient(brane, ed, field)
        if coeff.is_zero():
            continue
        exps = (Fraction(ed.d0),) + tuple(Fraction(e) for e in ed.q_exps)
        sectors[ed.box.v] = sectors[ed.box.v] + ring.monomial(exps, coeff)
    assembled = ring.zero()
    box_table = fan.box_by_point(brane.sigma)
    for v in sorted(sectors):
        assembled = assembled + sectors[v].scalar_mul(
            character_sqrt(brane, box_table[v], field)
        )
    return sectors, assembled


# ---------------------------------------------------------------------------
# closed-string series and mirror maps
# ---------------------------------------------------------------------------

def _gamma_ratio(c: Fraction) -> Fraction:
    """prod_{m >= ceil(c)} (c-m) / prod_{m >= 0} (c-m), the I-function factor.

    Equals 1/(c(c-1)...(c-ceil(c)+1)) for ceil(c) > 0, is 1 at ceil(c) = 0,
    and is (c-ceil(c))...(c+1) for ceil(c) < 0; vanishes for c a negative
    integer, which removes the class from the sum.
    """
    top = -((-c).__floor__())
    if top == 0:
        return Fraction(1)
    if top > 0:
        prod = Fraction(1)
        for m in range(top):
            prod *= c - m
        return 1 / prod
    prod = Fraction(1)
    for m in range(top, 0):
        prod *= c - m
    return prod


def a_i_series(fan: StackyFan, sigma, T) -> list:
    """The closed mirror-map input series A_1..A_r in the sigma chart.

    Returned as a 1-based list (index 0 unused).  Expressed in q-variables
    dual to {D_i}_{i in I_sigma}; this is the global answer whenever sigma
    is the only maximal cone.
    """
    T = Fraction(T)
    sigma = tuple(sorted(sigma))
    ring = SeriesRing(
        vars=tuple(f"q_{a}" for a in range(1, fan.k + 1)),
        weights=tuple(Fraction(1) for _ in range(fan.k)),
        trunc=T,
    )
    zero_point = tuple(0 for _ in range(fan.dim + len(fan.torsion)))
    out = [ring.zero() for _ in range(fan.r + 1)]
    for n, coords, pairings, box in fan.k_eff_enumerate(sigma, T):
        if all(x == 0 for x in n):
            continue
        exps = tuple(Fraction(e) for e in n)
        if box.v == zero_point and all(p.denominator == 1 for p in pairings.values()):
            for i in range(1, fan.r_prime + 1):
                pi = pairings[i]
                if pi >= 0 or any(
                    pairings[j] < 0 for j in range(1, fan.r + 1) if j != i
                ):
                    continue
                num = Fraction((-1) ** (int(-pi) - 1)) * factorial(int(-pi) - 1)
                den = Fraction(1)
                for j in range(1, fan.r + 1):
                    if j != i:
                        den *= factorial(int(pairings[j]))
                out[i] = out[i] + ring.monomial(exps, num / den)
        for i in range(fan.r_prime + 1, fan.r + 1):
            if box.v != fan.reduce_point(fan.vector(i)):
                continue
            coeff = Fraction(1)
            for j in range(1, fan.r + 1):
                coeff *= _gamma_ratio(pairings[j])
                if coeff == 0:
                    break
            if coeff != 0:
                out[i] = out[i] + ring.monomial(exps, coeff)
    return out


def mirror_maps(fan: StackyFan, brane: FramedBrane, T):
    """Closed mirror map {tau_a} and the open map log X - log x.

    Log parts are symbolic tags, series parts exact.  Requires N_tor = 0.
    """
    if fan.torsion:
        raise UnsupportedInput("mirror maps need a torsion-free lattice N")
    sigma = brane.sigma
    series = a_i_series(fan, sigma, T)
    ring = series[1].ring
    i_sigma, _, _ = fan.sigma_basis(sigma)
    k_prime = fan.r_prime - 3
    if [i for i in i_sigma if i <= fan.r_prime] != i_sigma[:k_prime]:
        raise AssertionError("chart ordering broke the divisor/extra split")
    inv = None
    if k_prime > 0:
        cols = [list(fan.divisor_class(i_sigma[a])) for a in range(k_prime)]
        cols += [list(fan.divisor_class(i)) for i in range(fan.r_prime + 1, fan.r + 1)]
        B = [[cols[c][t] for c in range(fan.k)] for t in range(fan.k)]
        try:
            inv = invert_rational(B)
        except Exception as exc:
            raise UnsupportedInput(
                "chart divisors do not induce a basis of H^2"
            ) from exc
    closed = []
    for a in range(1, fan.k + 1):
        if a <= k_prime:
            acc = ring.zero()
            for i in range(1, fan.r_prime + 1):
                d_i = fan.divisor_class(i)
                lbar = sum(Fraction(inv[a - 1][t]) * d_i[t] for t in range(fan.k))
                if lbar:
                    acc = acc + series[i].scalar_mul(lbar)
            closed.append({"tau": a, "log_var": f"q_{a}", "series": acc})
        else:
            i = fan.r_prime + (a - k_prime)
            closed.append({"tau": a, "log_var": None, "series": series[i]})
    flag = brane.flag
    open_series = ring.zero()
    for i, coef in ((flag.i1, 1), (flag.i2, brane.f), (flag.i3, -brane.f - 1)):
        if i <= fan.r_prime and coef:
            open_series = open_series + series[i].scalar_mul(Fraction(coef, brane.s1))
    return {"closed": closed, "open": {"log_var": "x", "series": open_series}}
