"""Truncated multivariate Puiseux/Laurent series over an exact coefficient ring.

A series lives in a SeriesRing that fixes the variable list, a positive
weight per variable, per-variable exponent denominators, which variables
admit negative exponents, and an inclusive weighted truncation order.  All
arithmetic drops monomials beyond the truncation and keeps everything else
exact.  Coefficients are duck-typed: Fraction and CycloNumber both work.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class SeriesRing:
    """Shape of a truncated series: variables, weights, truncation."""

    vars: tuple
    weights: tuple
    trunc: Fraction
    laurent: tuple = None
    denominators: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))
        object.__setattr__(self, "trunc", Fraction(self.trunc))
        if self.laurent is None:
            object.__setattr__(self, "laurent", tuple(False for _ in self.vars))
        if self.denominators is None:
            object.__setattr__(self, "denominators", tuple(1 for _ in self.vars))
        if not (len(self.vars) == len(self.weights) == len(self.laurent) == len(self.denominators)):
            raise SeriesError("ring component lengths disagree")
        if any(w <= 0 for w in self.weights):
            raise SeriesError("variable weights must be positive")

    @property
    def nvars(self) -> int:
        return len(self.vars)

    def weight(self, exps) -> Fraction:
        total = Fraction(0)
        for w, e, lau in zip(self.weights, exps, self.laurent):
            total += w * (abs(e) if lau else e)
        return total

    def check_exponents(self, exps):
        if len(exps) != self.nvars:
            raise SeriesError(f"exponent tuple {exps} has wrong arity")
        out = []
        for e, lau, den, name in zip(exps, self.laurent, self.denominators, self.vars):
            e = Fraction(e)
            if not lau and e < 0:
                raise SeriesError(f"negative exponent of {name} in a non-Laurent ring")
            if den % e.denominator != 0:
                raise SeriesError(
                    f"exponent {e} of {name} needs denominator {e.denominator}, "
                    f"ring allows {den}; enlarge the ring denominator"
                )
            out.append(e)
        return tuple(out)

    def zero(self) -> PuiseuxSeries:
        return PuiseuxSeries(self, {})

    def one(self) -> PuiseuxSeries:
        return self.from_const(Fraction(1))

    def from_const(self, c) -> PuiseuxSeries:
        z = tuple(Fraction(0) for _ in self.vars)
        return PuiseuxSeries(self, {z: c} if not _is_zero(c) else {})

    def monomial(self, exps, coeff) -> PuiseuxSeries:
        exps = self.check_exponents(exps)
        if _is_zero(coeff) or self.weight(exps) > self.trunc:
            return self.zero()
        return PuiseuxSeries(self, {exps: coeff})

    def var(self, name) -> PuiseuxSeries:
        i = self.vars.index(name)
        exps = tuple(Fraction(1 if j == i else 0) for j in range(self.nvars))
        return self.monomial(exps, Fraction(1))


def _is_zero(c) -> bool:
    return c == 0


class PuiseuxSeries:
    """Sparse truncated series; immutable once constructed."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: SeriesRing, terms: dict):
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "terms", {e: c for e, c in terms.items() if not _is_zero(c)})

    def __setattr__(self, *a):
        raise AttributeError("PuiseuxSeries is immutable")

    # -- basics -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self):
        z = tuple(Fraction(0) for _ in self.ring.vars)
        return self.terms.get(z, Fraction(0))

    def coefficient(self, exps):
        exps = self.ring.check_exponents(exps)
        return self.terms.get(exps, Fraction(0))

    def monomials(self):
        """(exponents, coefficient) pairs sorted by (weight, exponents)."""
        return sorted(self.terms.items(), key=lambda t: (self.ring.weight(t[0]), t[0]))

    def min_weight(self):
        if not self.terms:
            return None
        return min(self.ring.weight(e) for e in self.terms)

    def _same_ring(self, other):
        if self.ring != other.ring:
            raise SeriesError("series rings disagree (variables/weights/truncation)")

    # -- ring operations ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.from_const(Fraction(other))
        elif not isinstance(other, PuiseuxSeries):
            other = self.ring.from_const(other)
        self._same_ring(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            acc = out.get(e)
            out[e] = c if acc is None else acc + c
        return PuiseuxSeries(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)) or not isinstance(other, PuiseuxSeries):
            other = self.ring.from_const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return self.scalar_mul(other)
        self._same_ring(other)
        ring = self.ring
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if ring.weight(e) > ring.trunc:
                    continue
                c = c1 * c2
                acc = out.get(e)
                out[e] = c if acc is None else acc + c
        return PuiseuxSeries(ring, out)

    def __rmul__(self, other):
        return self * other

    def scalar_mul(self, c):
        if _is_zero(c):
            return self.ring.zero()
        return PuiseuxSeries(self.ring, {e: v * c for e, v in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise SeriesError("negative powers only via divide_unit")
        out = self.ring.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __repr__(self):
        if self.is_zero():
            return "0"
        bits = []
        for e, c in self.monomials():
            mono = "*".join(
                f"{v}^{x}" if x != 1 else f"{v}"
                for v, x in zip(self.ring.vars, e)
                if x != 0
            )
            bits.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(bits)

    # -- analytic-style operations -------------------------------------------
    def exp(self) -> PuiseuxSeries:
        if not _is_zero(self.constant_term()):
            raise SeriesError("exp needs zero constant term")
        out = self.ring.one()
        power = self.ring.one()
        m = 0
        while True:
            power = power * self
            m += 1
            if power.is_zero():
                break
            out = out + power.scalar_mul(Fraction(1, factorial(m)))
            if m > 10000:
                raise SeriesError("exp failed to terminate")
        return out

    def log(self) -> PuiseuxSeries:
        if self.constant_term() != 1:
            raise SeriesError("log needs constant term 1")
        u = self - 1
        out = self.ring.zero()
        power = self.ring.one()
        m = 0
        while True:
            power = power * u
            m += 1
            if power.is_zero():
                break
            out = out + power.scalar_mul(Fraction((-1) ** (m - 1), m))
            if m > 10000:
                raise SeriesError("log failed to terminate")
        return out

    def divide_unit(self, denom: PuiseuxSeries) -> PuiseuxSeries:
        """self / denom where denom has an invertible constant term."""
        self._same_ring(denom)
        c0 = denom.constant_term()
        if _is_zero(c0):
            raise SeriesError("division by a series with zero constant term")
        scaled = denom.scalar_mul(_invert_coeff(c0))
        rest = self.ring.one() - scaled
        inv = self.ring.one()
        power = self.ring.one()
        m = 0
        while True:
            power = power * rest
            m += 1
            if power.is_zero():
                break
            inv = inv + power
            if m > 10000:
                raise SeriesError("division failed to terminate")
        return (self * inv).scalar_mul(_invert_coeff(c0))

    # -- structural operations -------------------------------------------------
    def scale_vars(self, factors) -> PuiseuxSeries:
        """Substitute var_i -> factor_i * var_i; exponents must be integral."""
        if len(factors) != self.ring.nvars:
            raise SeriesError("need one scale factor per variable")
        out = {}
        for e, c in self.terms.items():
            val = c
            for x, f in zip(e, factors):
                if x.denominator != 1:
                    raise SeriesError("scale_vars needs integer exponents")
                if f != 1:
                    val = val * f**int(x)
            out[e] = val
        return PuiseuxSeries(self.ring, out)

    def substitute_monomial(self, target: SeriesRing, matrix) -> PuiseuxSeries:
        """Map each source monomial through an exponent matrix.

        matrix[i][j] is the exponent of target variable j in the image of
        source variable i; the transform must be invertible over Q when
        square.  Truncation is re-imposed in the target weights.
        """
        rows = len(matrix)
        if rows != self.ring.nvars:
            raise SeriesError("matrix must have one row per source variable")
        cols = len(matrix[0]) if rows else 0
        if rows == cols and rows and _det(matrix) == 0:
            raise SeriesError("exponent transform is not invertible")
        out = {}
        for e, c in self.terms.items():
            img = tuple(
                sum(Fraction(e[i]) * Fraction(matrix[i][j]) for i in range(rows))
                for j in range(cols)
            )
            img = target.check_exponents(img)
            if target.weight(img) > target.trunc:
                continue
            acc = out.get(img)
            out[img] = c if acc is None else acc + c
        return PuiseuxSeries(target, out)

    def split_at_zero(self, var) -> tuple:
        """(terms with exponent 0 in var, the rest)."""
        i = self.ring.vars.index(var)
        flat, rest = {}, {}
        for e, c in self.terms.items():
            (flat if e[i] == 0 else rest)[e] = c
        return PuiseuxSeries(self.ring, flat), PuiseuxSeries(self.ring, rest)

    def integrate_dlog(self, var, s1: int) -> PuiseuxSeries:
        """Termwise antiderivative against dlog of var^{s1}: e -> (s1/e) e.

        Precondition: no monomial is constant in var (the caller strips the
        logarithm part first).
        """
        i = self.ring.vars.index(var)
        out = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                raise SeriesError("integrate_dlog hit a degree-0 term in the brane variable")
            out[e] = c * Fraction(s1, 1) / e[i]
        return PuiseuxSeries(self.ring, out)


def _invert_coeff(c):
    if isinstance(c, (int, Fraction)):
        return Fraction(1) / Fraction(c)
    return c.inverse()


def _det(matrix):
    n = len(matrix)
    M = [[Fraction(x) for x in row] for row in matrix]
    out = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            out = -out
        out *= M[col][col]
        inv = 1 / M[col][col]
        for r in range(col + 1, n):
            if M[r][col] != 0:
                f = M[r][col] * inv
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return out


# ---------------------------------------------------------------------------
# formal Newton solver for exponential-polynomial equations
# ---------------------------------------------------------------------------

def eval_exp_poly(terms, u: PuiseuxSeries) -> PuiseuxSeries:
    """Evaluate H(u) = sum_j c_j * exp(r_j * u) at a series u."""
    out = u.ring.zero()
    for c_j, r_j in terms:
        factor = u.scalar_mul(Fraction(r_j)).exp() if r_j != 0 else u.ring.one()
        out = out + c_j * factor
    return out


def newton_solve(terms, ring: SeriesRing, max_iter: int = 64) -> PuiseuxSeries:
    """Solve H(u) = sum_j c_j(q) e^{r_j u} = 0 for a series u with u(0) = 0.

    terms is a list of (coefficient series in ring, rational rate).  Needs
    H(0,0) = 0 and dH/du(0,0) invertible; converges quadratically on the
    truncated ring.
    """
    h0 = Fraction(0)
    d0 = Fraction(0)
    for c_j, r_j in terms:
        h0 = h0 + c_j.constant_term()
        d0 = d0 + c_j.constant_term() * Fraction(r_j)
    if not _is_zero(h0):
        raise SeriesError("newton_solve needs H(0,0) = 0")
    if _is_zero(d0):
        raise SeriesError("newton_solve: singular linearization at the origin")
    dterms = [(c_j.scalar_mul(Fraction(r_j)), r_j) for c_j, r_j in terms if r_j != 0]
    u = ring.zero()
    for _ in range(max_iter):
        h = eval_exp_poly(terms, u)
        if h.is_zero():
            return u
        dh = eval_exp_poly(dterms, u)
        correction = h.divide_unit(dh)
        if correction.is_zero():
            raise SeriesError("newton_solve stalled with nonzero residual")
        u = u - correction
    raise SeriesError("newton_solve did not converge")
