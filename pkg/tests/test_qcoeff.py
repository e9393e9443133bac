import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qsphere.qcoeff import (INF, ParamContext, Scalar, eval_numeric, lambda_n, parse_r,
                            parse_rational, qbracket)

from conftest import ctx_of


def test_qbracket_small_values():
    assert qbracket(0).is_zero()
    assert qbracket(1) == Scalar.const(1)
    assert qbracket(2).evaluate(0.5) == pytest.approx(2.5, abs=1e-15)


def test_qbracket_odd():
    for n in range(1, 8):
        assert qbracket(-n) == -qbracket(n)


def test_lambda_n_values():
    assert lambda_n(0, 0.5) == 0.0
    assert lambda_n(1, 0.5) == pytest.approx(math.sqrt(0.75), abs=1e-15)
    assert lambda_n(3, 0.5) == pytest.approx(math.sqrt(1 - 2 ** -6), abs=1e-15)


def test_eval_numeric_examples():
    ctx = ctx_of("1/2", "2")
    assert eval_numeric(qbracket(3), ctx) == pytest.approx(5.25, abs=1e-14)
    assert eval_numeric(ctx.lam_plus(), ctx) == pytest.approx(2.0, abs=1e-15)
    assert eval_numeric(ctx.sparam(), ctx) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)


@pytest.mark.parametrize("r", ["1", "2", "3/7", "5"])
def test_lambda_roots_exact(r):
    ctx = ctx_of("1/2", r)
    lp, lm = ctx.lam_plus(), ctx.lam_minus()
    assert (lp + lm - 1).is_zero()
    assert (lp * lm + Scalar.const(Fraction(r))).is_zero()


def test_lam_symbol_ring_laws():
    r = Fraction(3)
    lam, rho = Scalar.lam(r), Scalar.rho(r)
    assert lam * lam == lam + Scalar.const(r)
    assert rho * rho == Scalar.const(r)
    assert (lam * lam.inv() - 1).is_zero()
    assert lam.inv() == (lam - 1) / Scalar.const(r)


def test_infinite_r_mode():
    ctx = ctx_of("1/2", "inf")
    assert ctx.is_inf and ctx.r_rel == 1
    assert ctx.lam_pm_f(1) == 1.0 and ctx.lam_pm_f(-1) == -1.0
    with pytest.raises(ValueError):
        ctx.rho()


def test_r_zero_collapses():
    ctx = ctx_of("1/2", "0")
    assert ctx.lam_plus() == Scalar.const(1)
    assert ctx.lam_minus().is_zero()
    assert ctx.sparam().is_zero()


def test_parsers():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_r("inf") is INF
    assert parse_r("2") == 2
    with pytest.raises(ValueError):
        ParamContext(q=Fraction(3, 2))
    with pytest.raises(ValueError):
        ParamContext(r=-1)


small = st.integers(-12, 12)


@given(small, small)
def test_bracket_addition_rule(m, n):
    lhs = qbracket(m + n)
    rhs = qbracket(m) * Scalar.qpow(n) + Scalar.qpow(-m) * qbracket(n)
    assert lhs == rhs


def _scalars(r):
    coef = st.fractions(min_value=-5, max_value=5, max_denominator=7)
    pure = st.builds(lambda d: Scalar.laurent(d), st.dictionaries(st.integers(-4, 4), coef, max_size=3))
    return st.builds(lambda a, b, c: a + b * Scalar.lam(r) + c * Scalar.rho(r), pure, pure, pure)


@given(_scalars(Fraction(2)), _scalars(Fraction(2)), _scalars(Fraction(2)))
def test_distributivity_and_commutativity(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert x * y == y * x


@given(_scalars(Fraction(5, 3)))
def test_inverse(x):
    if not x.is_zero():
        assert (x * x.inv() - 1).is_zero()


@given(_scalars(Fraction(2)))
def test_evaluation_is_a_homomorphism(x):
    ctx = ctx_of("1/2", "2")
    y = x * x + x
    assert eval_numeric(y, ctx) == pytest.approx(eval_numeric(x, ctx) ** 2 + eval_numeric(x, ctx),
                                                 rel=1e-9, abs=1e-9)
