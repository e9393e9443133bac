from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qsphere.bundle import u_vec, w_vec
from qsphere.haar import inner
from qsphere.hopf import (TensorPoly, act_left, act_right, antipode, check_action_routes,
                          check_embedding_relations, check_hopf_axioms, check_invariance_embedded,
                          check_skew_primitive, coassociativity_residual, coproduct, counit,
                          counit_legs, embed_sphere_generators, pairing, suq2, theta, uq, x_r)
from qsphere.qcoeff import ONE, Scalar

from conftest import ctx_of

q = Scalar.qpow
U, A = uq(), suq2()


def test_coproduct_examples():
    assert coproduct(U.gen("K"), "Uq_su2").terms == TensorPoly.simple(U.gen("K"), U.gen("K")).terms
    assert coproduct(U.one(), "Uq_su2").terms == {((), ()): ONE}
    a2 = A.parse("a a")
    assert counit_legs(coproduct(a2, "O_SUq2"), "O_SUq2", 0) == a2
    assert counit_legs(coproduct(a2, "O_SUq2"), "O_SUq2", 1) == a2
    with pytest.raises(ValueError):
        coproduct(U.gen("E"), "O_S2qr")


def test_pairing_table():
    assert pairing(U.gen("K"), A.gen("a")) == q(Fraction(-1, 2))
    assert pairing(U.gen("K"), A.gen("d")) == q(Fraction(1, 2))
    assert pairing(U.gen("E"), A.gen("c")) == ONE
    assert pairing(U.gen("F"), A.gen("b")) == ONE
    assert pairing(U.gen("E"), A.gen("b")).is_zero()


def _monomials(deg):
    out = [()]
    for _ in range(deg):
        out = out + [w + (g,) for w in out for g in "abcd" if len(w) < deg]
    return sorted(set(out))


def test_pairing_respects_uq_relation():
    # brute force over the monomials of degree <= 3
    lhs = U.parse("E F - F E")
    li = (q(1) - q(-1)).inv()
    rhs = (U.parse("K K") - U.parse("Kinv Kinv")).scale(li)
    for w in _monomials(3):
        x = A.normal_form(A.elem({w: ONE}))
        assert pairing(lhs, x) == pairing(rhs, x), w


def test_actions_examples():
    assert act_left(U.gen("K"), A.gen("d")) == A.gen("d").scale(q(Fraction(1, 2)))
    x = A.parse("a b + c d")
    assert act_left(U.one(), x) == x
    for r in ("2", "0", "inf"):
        assert act_right(A.one(), x_r(ctx_of("1/2", r))).is_zero()


def test_E_on_w_half():
    # by hand: Delta a = a(x)a + b(x)c and Delta c = c(x)a + d(x)c, <E,c> = 1, <E,a> = 0,
    # so E |> a = b and E |> c = d, hence E |> (a - q s c) = b - q s d
    ctx = ctx_of("1/2", "2")
    s = ctx.sparam()
    w = w_vec(Fraction(1, 2), ctx)
    assert act_left(U.gen("E"), w) == A.gen("b") - A.gen("d").scale(q(1) * s)
    assert act_left(U.gen("E"), w) == u_vec(Fraction(-1, 2), ctx)


@pytest.mark.parametrize("r", ["2", "0", "inf", "1/3"])
def test_embedded_generators_invariant(r):
    ctx = ctx_of("1/2", r)
    X = x_r(ctx)
    for x in embed_sphere_generators(ctx)[0]:
        assert act_right(x, X).is_zero()


def test_embedding_counit():
    # every non-constant term of x_0 contains b or c
    assert counit(embed_sphere_generators(ctx_of("1/2", "2"))[0][1], "O_SUq2") == ONE


def test_x1_at_r0_is_bd():
    x1 = embed_sphere_generators(ctx_of("1/2", "0"))[0][2]
    assert x1 == A.parse("b d")


def test_theta():
    assert theta(A.gen("b")) == A.gen("c").scale(-q(1))
    assert theta(A.parse("a b")) == A.parse("a c").scale(-q(1))
    assert theta(theta(A.gen("c"))) == A.gen("c")


def test_antipode_generators():
    assert antipode(U.gen("K")) == U.gen("Kinv")
    assert antipode(U.gen("E")) == U.gen("E").scale(-q(1))
    assert antipode(U.gen("F")) == U.gen("F").scale(-q(-1))


@pytest.mark.parametrize("r", ["0", "2", "inf"])
def test_skew_primitive(r):
    assert check_skew_primitive(ctx_of("1/2", r)).passed


@pytest.mark.parametrize("r", ["0", "2", "inf"])
def test_hopf_suite_checks(r):
    ctx = ctx_of("1/2", r)
    assert check_embedding_relations(ctx).passed
    assert check_invariance_embedded(ctx).passed


def test_hopf_axioms_and_routes():
    assert check_hopf_axioms(3).passed
    assert check_action_routes(3, ctx_of("1/2", "2")).passed


def test_negative_control_ratio_of_terms():
    for r in ("0", "2", "inf"):
        ctx = ctx_of("1/2", r, perturb=Fraction(1, 1000))
        assert not check_invariance_embedded(ctx).passed


word = st.lists(st.sampled_from("abcd"), min_size=0, max_size=3).map(tuple)


@given(word)
def test_coassociativity(w):
    assert coassociativity_residual(A.elem({w: ONE}), "O_SUq2") == 0


@given(st.lists(st.sampled_from(["E", "F", "K", "Kinv"]), max_size=3).map(tuple))
def test_coassociativity_uq(w):
    assert coassociativity_residual(U.elem({w: ONE}), "Uq_su2") == 0


@given(word, word, st.sampled_from(["E", "F", "K"]))
def test_module_algebra_law(u, v, g):
    x, y = A.elem({u: ONE}), A.elem({v: ONE})
    f = U.gen(g)
    lhs = act_left(f, A.mul(x, y))
    rhs = A.zero()
    for (f1, f2), c in coproduct(f, "Uq_su2").terms.items():
        rhs = rhs + A.mul(act_left(U.elem({f1: ONE}), x), act_left(U.elem({f2: ONE}), y)).scale(c)
    assert lhs == rhs


@given(word, word)
def test_right_action_hermitian(u, v):
    ctx = ctx_of("1/2", "2")
    X = x_r(ctx)
    a, b = A.elem({u: ONE}), A.elem({v: ONE})
    lhs = ctx.ev(inner(a, act_right(b, X)))
    rhs = ctx.ev(inner(act_right(a, X), b))
    assert abs(lhs - rhs) <= 1e-10


@pytest.mark.parametrize("j", [Fraction(n, 2) for n in range(-3, 4)])
def test_mu_eigenvalues(j):
    ctx = ctx_of("1/2", "2")
    X = x_r(ctx)
    u = u_vec(j, ctx)
    assert act_right(u, X) == u.scale(ctx.mu(j))
    if j > 0:
        w = w_vec(j, ctx)
        assert act_right(w, X) == w.scale(ctx.mu(-j))
