"""Exact coefficient arithmetic: rationals, the cyclotomic field Q(zeta_M),
root-of-unity phases (-1)^r for rational r, and the Pochhammer symbol.

Every series coefficient in the engine lives in one fixed field Q(zeta_M),
represented modulo the M-th cyclotomic polynomial so that sums of phases
that vanish in C (such as 1 + zeta_3 + zeta_3^2) test as exact zeros.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
import cmath


class PochhammerPole(ArithmeticError):
    """Raised when (a)_n with n < 0 hits a zero factor in the denominator."""


class OrderError(ValueError):
    """Raised when a phase exponent is incompatible with the field order M."""


def pochhammer(a, n: int) -> Fraction:
    """Falling-style Pochhammer symbol (a)_n = Gamma(a+1)/Gamma(a-n+1).

    Three cases: a(a-1)...(a-n+1) for n > 0, 1 for n = 0, and
    1/((a+1)...(a-n)) for n < 0.  Gamma itself is never evaluated.
    """
    a = Fraction(a)
    if n == 0:
        return Fraction(1)
    if n > 0:
        out = Fraction(1)
        for j in range(n):
            out *= a - j
        return out
    out = Fraction(1)
    for j in range(1, -n + 1):
        factor = a + j
        if factor == 0:
            raise PochhammerPole(f"({a})_{n} has a zero factor a+{j}")
        out *= factor
    return 1 / out


def _poly_trim(c: list) -> list:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_divmod(num: list, den: list):
    """Exact division of coefficient lists (ascending order) over Q."""
    num = list(num)
    q = [Fraction(0)] * max(0, len(num) - len(den) + 1)
    lead = Fraction(den[-1])
    while len(num) >= len(den) and _poly_trim(num):
        shift = len(num) - len(den)
        coef = Fraction(num[-1]) / lead
        q[shift] = coef
        for i, d in enumerate(den):
            num[shift + i] -= coef * d
        _poly_trim(num)
    return _poly_trim(q), num


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple:
    """Coefficients (ascending, exact integers) of the n-th cyclotomic polynomial."""
    if n == 1:
        return (-1, 1)
    poly = [-1] + [0] * (n - 1) + [1]          # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            q, r = _poly_divmod(poly, list(cyclotomic_polynomial(d)))
            if r:
                raise AssertionError("cyclotomic division must be exact")
            poly = q
    return tuple(int(c) for c in poly)


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    out = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            out -= out // p
        p += 1
    if m > 1:
        out -= out // m
    return out


class CyclotomicField:
    """The field Q(zeta_M) for a fixed even order M >= 2.

    Elements are coefficient vectors of length phi(M) over Q, reduced modulo
    the M-th cyclotomic polynomial; equality and zero tests are exact.
    """

    _cache: dict = {}

    def __new__(cls, order: int):
        if order in cls._cache:
            return cls._cache[order]
        self = super().__new__(cls)
        cls._cache[order] = self
        return self

    def __init__(self, order: int):
        if getattr(self, "order", None) == order:
            return
        if order < 2 or order % 2 != 0:
            raise OrderError(f"field order must be even and >= 2, got {order}")
        self.order = order
        self.degree = euler_phi(order)
        self.modulus = cyclotomic_polynomial(order)
        # x^j mod Phi_M for j = degree .. 2*degree-2, used by multiplication
        self._xpow = []
        d = self.degree
        cur = [Fraction(-c, self.modulus[-1]) for c in self.modulus[:-1]]
        self._xpow.append(tuple(cur))
        for _ in range(d - 2):
            nxt = [Fraction(0)] * d
            for i, c in enumerate(cur):
                if c == 0:
                    continue
                if i + 1 < d:
                    nxt[i + 1] += c
                else:
                    for t, m in enumerate(self._xpow[0]):
                        nxt[t] += c * m
            cur = nxt
            self._xpow.append(tuple(cur))

    def __repr__(self):
        return f"CyclotomicField(order={self.order})"

    def element(self, coeffs) -> CycloNumber:
        c = [Fraction(x) for x in coeffs]
        if len(c) > self.degree:
            raise ValueError("coefficient vector too long")
        c += [Fraction(0)] * (self.degree - len(c))
        return CycloNumber(self, tuple(c))

    def zero(self) -> CycloNumber:
        return self.element([])

    def one(self) -> CycloNumber:
        return self.element([1])

    def from_rational(self, a) -> CycloNumber:
        return self.element([Fraction(a)])

    def root(self, j: int) -> CycloNumber:
        """zeta_M^j as a field element."""
        j %= self.order
        d = self.degree
        if j < d:
            c = [Fraction(0)] * d
            c[j] = Fraction(1)
            return CycloNumber(self, tuple(c))
        # square-and-multiply on the class of x keeps reductions small
        if d == 1:
            base = self.element([Fraction(-self.modulus[0], self.modulus[1])])
        else:
            base = self.element([0, 1])
        out = self.one()
        n = j
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def phase(self, r) -> CycloNumber:
        """(-1)^r := e^{i pi r} for rational r; requires den(r) | M/2."""
        r = Fraction(r)
        t = r * self.order / 2
        if t.denominator != 1:
            raise OrderError(
                f"phase exponent {r} needs order divisible by {2 * r.denominator}, "
                f"field has order {self.order}"
            )
        return self.root(int(t) % self.order)

    def coerce(self, x) -> CycloNumber:
        if isinstance(x, CycloNumber):
            if x.field is not self:
                raise ValueError("operands belong to different cyclotomic fields")
            return x
        if isinstance(x, (int, Fraction)):
            return self.from_rational(x)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self!r}")


class CycloNumber:
    """Immutable element of a fixed CyclotomicField."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: CyclotomicField, coeffs: tuple):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, *args):
        raise AttributeError("CycloNumber is immutable")

    # -- structure ---------------------------------------------------------
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def phase_factorization(self):
        """Return (rational, t) with self = rational * zeta_M^t, smallest t >= 0.

        Returns None when the element is not a rational multiple of a root of
        unity.  Rationals (including 0) factor with t = 0.
        """
        if self.is_zero():
            return Fraction(0), 0
        for t in range(self.field.order):
            cand = self * self.field.root(-t)
            if cand.is_rational():
                return cand.coeffs[0], t
        return None

    # -- arithmetic --------------------------------------------------------
    def _binary(self, other):
        try:
            return self.field.coerce(other)
        except TypeError:
            return None

    def __add__(self, other):
        o = self._binary(other)
        if o is None:
            return NotImplemented
        return CycloNumber(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycloNumber(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._binary(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            r = Fraction(other)
            return CycloNumber(self.field, tuple(a * r for a in self.coeffs))
        o = self._binary(other)
        if o is None:
            return NotImplemented
        d = self.field.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                if b:
                    prod[i + j] += a * b
        out = list(prod[:d])
        for j in range(d, 2 * d - 1):
            c = prod[j]
            if c:
                for t, m in enumerate(self.field._xpow[j - d]):
                    out[t] += c * m
        return CycloNumber(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> CycloNumber:
        """Multiplicative inverse via the extended Euclidean algorithm in Q[x]."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of 0 in cyclotomic field")
        if self.is_rational():
            return self.field.from_rational(1 / self.coeffs[0])
        # gcd(self, Phi_M) = 1 since Phi_M is irreducible over Q
        r0 = [Fraction(c) for c in self.field.modulus]
        r1 = _poly_trim(list(self.coeffs))
        s0, s1 = [], [Fraction(1)]
        while True:
            q, r = _poly_divmod(r0, r1)
            if not r:
                break
            s_next = list(s0)
            s_next += [Fraction(0)] * (max(0, len(q) + len(s1) - 1 - len(s_next)))
            for i, qi in enumerate(q):
                if qi == 0:
                    continue
                for j, sj in enumerate(s1):
                    s_next[i + j] -= qi * sj
            r0, r1 = r1, r
            s0, s1 = s1, _poly_trim(s_next)
        lead = r1[-1] if len(r1) > 1 else r1[0]
        if len(r1) > 1:
            raise AssertionError("cyclotomic modulus must be irreducible")
        inv = [c / lead for c in s1]
        return self.field.element(inv)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            r = Fraction(other)
            return CycloNumber(self.field, tuple(a / r for a in self.coeffs))
        o = self._binary(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, CycloNumber):
            return self.field is other.field and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        return hash((self.field.order, self.coeffs))

    def complex_value(self) -> complex:
        """Numerical embedding at zeta_M = e^{2 pi i / M}; diagnostics only."""
        z = cmath.exp(2j * cmath.pi / self.field.order)
        return sum(float(c) * z**j for j, c in enumerate(self.coeffs))

    def __repr__(self):
        if self.is_zero():
            return "0"
        parts = []
        for j, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if j == 0:
                parts.append(str(c))
            elif c == 1:
                parts.append(f"z{j}" if j > 1 else "z")
            else:
                parts.append(f"{c}*z^{j}" if j > 1 else f"{c}*z")
        return " + ".join(parts).replace("z1", "z")


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        v = abs(int(v))
        if v:
            out = out * v // gcd(out, v)
    return out
