import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsphere.haar import (FuncElement, Fn, build_haar_table, check_action_forms,
                          check_faithful, check_haar_invariance, check_hqf, check_invariance,
                          check_commutator_identities, check_series_vs_trace, check_twisted_trace,
                          counterexample_value, h0, haar_state, inner, sample_elements,
                          sphere_state_series, sphere_state_trace, uq_action_on_functions)
from qsphere.hopf import suq2
from qsphere.qcoeff import ONE, Scalar

from conftest import ctx_of

A = suq2()


def test_state_normalization_and_weights():
    assert haar_state(A.one()) == ONE
    assert haar_state(A.gen("a")).is_zero()
    assert haar_state(A.parse("a b")).is_zero()


@pytest.mark.parametrize("qs", ["0.5", "0.3"])
def test_bc_moments_match_classical_values(qs, oracle):
    tab = build_haar_table(8)
    want = oracle["haar_bc_powers"][qs]
    for n, v in enumerate(want):
        assert tab.values[n].evaluate(float(qs)) == pytest.approx(v, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("qs", ["0.5", "0.3"])
def test_ad_from_determinant(qs, oracle):
    assert haar_state(A.parse("a d")).evaluate(float(qs)) == pytest.approx(oracle["haar_ad"][qs], rel=1e-13)


def test_degree_zero_table():
    tab = build_haar_table(0)
    assert tab.values == {0: ONE}


def test_table_invariance_exact():
    assert check_haar_invariance(build_haar_table(6)).passed


def test_table_degree_cap():
    with pytest.raises(ValueError):
        build_haar_table(26)


def test_inner_examples():
    assert inner(A.one(), A.one()) == ONE
    assert inner(A.gen("a"), A.gen("b")).is_zero()


def test_inner_positive_on_span():
    ctx = ctx_of("1/2", "1")
    basis = [A.parse(w) for w in ("1", "a", "b", "c", "d", "a b", "b c", "b d")]
    G = np.array([[ctx.ev(inner(x, y)) for y in basis] for x in basis])
    assert np.allclose(G, G.T, atol=1e-14)
    assert np.linalg.eigvalsh(G).min() > 0


@pytest.mark.parametrize("r", ["1", "2", "0", "inf"])
def test_series_examples(r):
    ctx = ctx_of("1/2", r)
    assert sphere_state_series(FuncElement.one(ctx)) == pytest.approx(1.0, abs=1e-14)
    assert sphere_state_series(FuncElement.fn(Fn.ident(), ctx, 1)) == 0.0
    assert sphere_state_trace(FuncElement.one(ctx), N=60) == pytest.approx(1.0, abs=1e-10)


def test_series_point_mass():
    ctx = ctx_of("1/2", "2")
    val = sphere_state_series(FuncElement.fn(Fn.chi_point(0, 1, ctx), ctx))
    assert val == pytest.approx(ctx.ev(ctx.gamma(1)), abs=1e-15)


@pytest.mark.parametrize("r", ["1.0", "2.0", "0.0"])
def test_state_of_A(r, oracle):
    ctx = ctx_of("1/2", r.split(".")[0])
    want = oracle["state_of_A_q1/2"][r]
    x = FuncElement.A(ctx)
    assert sphere_state_series(x) == pytest.approx(want, abs=1e-12)
    assert sphere_state_trace(x, N=60) == pytest.approx(want, abs=1e-10)


def test_unbounded_function_rejected():
    ctx = ctx_of("1/2", "1")
    with pytest.raises(ValueError):
        h0(Fn(lambda t: 1 / t, "1/A"), ctx)


@pytest.mark.parametrize("r", ["1.0", "2.0"])
def test_counterexample(r, oracle):
    ctx = ctx_of("1/2", r.split(".")[0])
    val, closed = counterexample_value(ctx)
    assert closed == pytest.approx(oracle["counterexample_q1/2"][r], abs=1e-14)
    assert abs(val - closed) <= 1e-10
    assert abs(val) > 1e-3


def test_action_examples():
    ctx = ctx_of("1/2", "1")
    x = FuncElement.fn(Fn.poly([1, 2]), ctx, 1)
    Kx = uq_action_on_functions("K", x)
    t = np.array([0.3, 0.7])
    assert np.allclose(Kx.terms[1](t), x.terms[1](t) / 0.5)
    for g in ("E", "F"):
        y = uq_action_on_functions(g, FuncElement.one(ctx))
        assert all(np.allclose(f(t), 0) for f in y.terms.values())


@pytest.mark.parametrize("r", ["1", "2", "0", "inf", "1/5"])
def test_state_suite(r):
    ctx = ctx_of("1/2", r)
    for rep in (check_series_vs_trace(ctx), check_invariance(ctx), check_twisted_trace(ctx),
                check_hqf(ctx), check_action_forms(ctx), check_commutator_identities(ctx),
                check_faithful(ctx)):
        assert rep.passed, (rep.name, rep.residual)


def test_state_q_small():
    ctx = ctx_of("3/10", "1")
    assert check_series_vs_trace(ctx).passed
    assert check_invariance(ctx).passed


@given(st.integers(0, 40))
def test_series_and_trace_agree_on_samples(seed):
    ctx = ctx_of("1/2", "1")
    x = sample_elements(ctx, 1, seed=seed)[0]
    assert abs(sphere_state_series(x) - sphere_state_trace(x, N=60)) <= 1e-10


@given(st.floats(-2, 2), st.integers(-2, 2))
def test_K_invariance_of_state(c, k):
    ctx = ctx_of("1/2", "2")
    x = FuncElement.fn(Fn.poly([c, 1.0, -0.5]), ctx, k)
    assert sphere_state_series(uq_action_on_functions("K", x)) == pytest.approx(
        sphere_state_series(x), abs=1e-12)
