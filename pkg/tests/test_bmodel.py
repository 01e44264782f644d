import random
from fractions import Fraction

import pytest

from orbidisk.amodel import FramedBrane, UnsupportedInput
from orbidisk.bmodel import (
    MirrorCurve,
    build_curve,
    moduli_ring,
    solve_log_y_closed,
    solve_log_y_newton,
    verify_identity,
    w_h_inst,
)
from orbidisk.exactring import CyclotomicField
from orbidisk.series import SeriesRing

from test_amodel import (
    brane_c3,
    brane_conifold,
    brane_x111,
    brane_x120_s1,
    brane_x120_s3,
)
from test_lattice import fan_nonsemiproj, fan_x000, fan_x111


# --- curve construction -----------------------------------------------------

def test_curve_c3():
    b = brane_c3(3)
    curve = build_curve(b.fan, b)
    assert curve.eps == (-3,)
    assert curve.subst == ((1,),)


def test_curve_x111():
    for f in (-1, 0, 1, 2):
        b = brane_x111(f)
        curve = build_curve(b.fan, b)
        assert curve.eps == (Fraction(-f), Fraction(1 - f, 3))
        assert curve.subst == ((3, 0), (1, 1))  # tq_0 = x^3, tq_1 = q_1 x


def test_curve_x120_flags():
    b = brane_x120_s1(2)
    curve = build_curve(b.fan, b)
    assert curve.eps == (-2, Fraction(1, 3), Fraction(2, 3))
    assert curve.subst == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    b = brane_x120_s3(1)
    curve = build_curve(b.fan, b)
    assert curve.eps == (-1, Fraction(1, 3), Fraction(-1, 3))
    assert curve.subst == ((3, 0, 0), (1, 1, 0), (2, 0, 1))


def test_curve_p_matrix_roundtrip():
    b = brane_x111(1)
    curve = build_curve(b.fan, b)
    n = len(curve.p_tilde)
    prod = [
        [
            sum(Fraction(curve.p_tilde[i][t]) * curve.p_tilde_inv[t][j]
                for t in range(n))
            for j in range(n)
        ]
        for i in range(n)
    ]
    assert prod == [[1 if i == j else 0 for j in range(n)] for i in range(n)]


# --- closed form vs newton ----------------------------------------------------

def test_closed_form_log_series():
    # k = 0 with eps_0 = 0 reproduces log(1 + s)
    b = brane_c3(0)
    curve = build_curve(b.fan, b)
    K = CyclotomicField(2)
    v = solve_log_y_closed(curve, 6, K)
    for n in range(1, 7):
        assert v.coefficient((n,)) == K.from_rational(Fraction((-1) ** (n - 1), n))


def test_closed_equals_newton_builtin():
    for b in (brane_c3(0), brane_c3(1), brane_x111(0), brane_x111(2),
              brane_x120_s1(0), brane_x120_s3(1)):
        K = b.field()
        curve = build_curve(b.fan, b)
        assert solve_log_y_closed(curve, 3, K) == solve_log_y_newton(curve, 3, K)


def _random_exp_poly_check(rng):
    k = rng.randint(0, 3)
    eps = [Fraction(rng.randint(-6, 6), rng.choice([1, 2, 3, 4]))
           for _ in range(k + 1)]
    T = rng.randint(1, 5)
    M = 2 * 12  # covers denominators up to 4 (and 3)
    K = CyclotomicField(M)
    ring = SeriesRing(
        vars=tuple(f"tq_{a}" for a in range(k + 1)),
        weights=tuple(Fraction(1) for _ in range(k + 1)),
        trunc=Fraction(T),
    )
    # closed form
    from orbidisk.bmodel import _degree_grid
    from orbidisk.exactring import pochhammer
    from math import factorial
    from orbidisk.series import PuiseuxSeries, newton_solve
    terms = {}
    for n in _degree_grid(k + 1, T):
        if not any(n):
            continue
        rate = sum((Fraction(e) * x for e, x in zip(eps, n)), Fraction(0))
        coeff = pochhammer(rate - 1, sum(n) - 1)
        for x in n:
            coeff /= factorial(x)
        terms[tuple(Fraction(x) for x in n)] = K.phase(rate) * coeff
    closed = PuiseuxSeries(ring, terms)
    # newton
    one = ring.from_const(K.one())
    nterms = [(one, Fraction(0)), (-one, Fraction(1))]
    for a, e in enumerate(eps):
        exps = tuple(Fraction(1 if b == a else 0) for b in range(k + 1))
        nterms.append((ring.monomial(exps, K.phase(e)), Fraction(e)))
    assert newton_solve(nterms, ring) == closed


def test_closed_equals_newton_randomized():
    rng = random.Random(2024)
    for _ in range(20):
        _random_exp_poly_check(rng)


def test_setting_tq0_to_zero_reduces_variables():
    # the induction step of the closed form: kill tq_0, get the k-1 solution
    b = brane_x120_s1(1)
    K = b.field()
    curve = build_curve(b.fan, b)
    v = solve_log_y_closed(curve, 3, K)
    for exps, coeff in v.terms.items():
        if exps[0] != 0:
            continue
        # compare against the closed form of the reduced exponent list
        rate = sum((Fraction(e) * x for e, x in zip(curve.eps, exps)), Fraction(0))
        from orbidisk.exactring import pochhammer
        from math import factorial
        expect = pochhammer(rate - 1, int(sum(exps)) - 1)
        for x in exps:
            expect /= factorial(int(x))
        assert coeff == K.phase(rate) * expect


def test_exp_substitution_residual():
    # 1 - e^{v'} + sum tq'_a e^{eps_a v'} = 0 mod truncation
    for b in (brane_x111(1), brane_x120_s3(0)):
        K = b.field()
        curve = build_curve(b.fan, b)
        v = solve_log_y_newton(curve, 3, K)
        ring = v.ring
        residual = ring.from_const(K.one()) - v.exp()
        for a, e in enumerate(curve.eps):
            exps = tuple(Fraction(1 if t == a else 0) for t in range(ring.nvars))
            tq_prime = ring.monomial(exps, K.phase(e))
            residual = residual + tq_prime * v.scalar_mul(Fraction(e)).exp()
        assert residual.is_zero()


# --- the instanton part -------------------------------------------------------

def test_w_h_inst_c3():
    b = brane_c3(0)
    K = b.field()
    curve = build_curve(b.fan, b)
    W, log_part = w_h_inst(curve, 6, K)
    for d in range(1, 7):
        assert W.coefficient((d,)) == K.from_rational(Fraction((-1) ** (d - 1), d * d))
    assert log_part.is_zero()


def test_w_h_inst_x111_xq():
    b = brane_x111(0)
    K = b.field()
    curve = build_curve(b.fan, b)
    W, _ = w_h_inst(curve, 2, K)
    assert W.coefficient((1, 1)) == 3 * K.phase(Fraction(1, 3))


def test_w_h_inst_no_flat_terms():
    for b in (brane_x111(0), brane_x120_s1(1)):
        K = b.field()
        curve = build_curve(b.fan, b)
        W, _ = w_h_inst(curve, 3, K)
        for exps in W.terms:
            assert exps[0] != 0


def test_w_h_inst_methods_agree():
    b = brane_x120_s3(1)
    K = b.field()
    curve = build_curve(b.fan, b)
    assert w_h_inst(curve, 3, K, "newton")[0] == w_h_inst(curve, 3, K, "closed")[0]


# --- verify -------------------------------------------------------------------

def test_verify_c3_all_framings():
    b0 = brane_c3(0)
    for f in (-2, -1, 0, 1, 2, 3):
        report = verify_identity(b0.fan, brane_c3(f), 5)
        assert report.equal, (f, report.first_mismatch)
        assert report.n_monomials_a == report.n_monomials_b


def test_verify_x111():
    b = brane_x111(0)
    report = verify_identity(b.fan, b, 4)
    assert report.equal, report.first_mismatch


def test_verify_x120_both_flags():
    b = brane_x120_s1(0)
    report = verify_identity(b.fan, b, 3)
    assert report.equal, report.first_mismatch
    b = brane_x120_s3(0)
    report = verify_identity(b.fan, b, 3)
    assert report.equal, report.first_mismatch


def test_verify_conifold_inner():
    b = brane_conifold(0)
    report = verify_identity(b.fan, b, 3)
    assert report.equal, report.first_mismatch


def test_verify_negative_control():
    b = brane_c3(0)
    report = verify_identity(b.fan, b, 4, perturb=(2,))
    assert not report.equal
    exps, ca, cb = report.first_mismatch
    assert exps == (2,)
    assert ca - cb == 1


def test_verify_refusals():
    fan = fan_x000()
    b = FramedBrane.make(fan, (1, 2, 3), 0)
    with pytest.raises(UnsupportedInput):
        verify_identity(fan, b, 2)
    fan = fan_nonsemiproj()
    b = FramedBrane.make(fan, (3, 1, 4), 0)
    with pytest.raises(UnsupportedInput):
        verify_identity(fan, b, 2)


def test_log_part_reported_x120():
    # the s1 = 1 flag has honest f(q) log q_0 terms, stripped and reported
    b = brane_x120_s1(0)
    K = b.field()
    curve = build_curve(b.fan, b)
    _, log_part = w_h_inst(curve, 3, K)
    assert not log_part.is_zero()
    for exps in log_part.terms:
        assert exps[0] == 0
