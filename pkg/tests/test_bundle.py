from fractions import Fraction

import pytest

from qsphere.bundle import (build_basis, build_projector, chart_identities, chart_matrices,
                            check_basis, check_chart_matrices, check_completeness, check_ladder,
                            check_mu_spectrum, check_orthogonal_decomposition, check_projector,
                            express_in_sphere, psi_isometry_check, twisted_cyclicity_check, u_vec,
                            vstar_v, w_vec, xi, xi_identities)
from qsphere.hopf import act_left, act_right, suq2, uq, x_r
from qsphere.qcoeff import Scalar, qbracket

from conftest import ctx_of

A, U = suq2(), uq()


def test_spin_zero_vectors_are_one():
    ctx = ctx_of(r="2")
    assert u_vec(0, ctx) == A.one()
    assert w_vec(0, ctx) == A.one()
    b = build_basis(0, 0, ctx)
    assert b.vectors[(0, 0)] == A.one()


def test_u_half_and_eigenvalue():
    ctx = ctx_of(r="2")
    s = ctx.sparam()
    assert abs(ctx.ev(s) - 2 ** 0.5 / 2) < 1e-15
    u = u_vec(Fraction(1, 2), ctx)
    assert (u - (A.gen("d") + A.gen("b").scale(Scalar.qpow(-1) * s))).is_zero()
    assert (act_right(u, x_r(ctx)) - u.scale(ctx.mu(Fraction(1, 2)))).is_zero()


def test_u_minus_half_from_lowering_w():
    ctx = ctx_of(r="2")
    s = ctx.sparam()
    w = A.gen("a") - A.gen("c").scale(Scalar.qpow(1) * s)
    assert w == w_vec(Fraction(1, 2), ctx)
    assert (u_vec(Fraction(-1, 2), ctx) - act_left(U.gen("E"), w)).is_zero()


@pytest.mark.parametrize("r", ["0", "2", "inf"])
@pytest.mark.parametrize("j", ["0", "1/2", "-1/2", "1", "-1"])
def test_basis_invariants(j, r):
    ctx = ctx_of(r=r)
    b = build_basis(j, abs(Fraction(j)) + 1, ctx)
    assert check_basis(b).passed
    assert check_ladder(b).passed


@pytest.mark.parametrize("r", ["0", "2", "inf", "1/5"])
def test_mu_eigenvectors_and_distinct(r):
    js = [Fraction(n, 2) for n in range(-3, 4)]
    rep = check_mu_spectrum(js, ctx_of(r=r))
    assert rep.passed, rep.details


def test_mu_closed_forms_r0_rinf():
    q = 0.5
    ctx0, ctxi = ctx_of(r="0"), ctx_of(r="inf")
    for n in range(-3, 4):
        j = Fraction(n, 2)
        assert ctx0.ev(ctx0.mu(j)) == pytest.approx(1 - q ** (2 * n / 2), abs=1e-14)
        want = q ** 0.5 / (1 / q - q) * (q ** (-n) - q ** n)
        assert ctxi.ev(ctxi.mu(j)) == pytest.approx(want, rel=1e-14)
    assert ctx0.mu(0).is_zero()


def test_mu_values_match_oracle(oracle):
    ctx = ctx_of(r="2")
    vals = oracle["mu_q1/2_r2"]
    for key, want in vals.items():
        n = int(key.split("/")[0])
        assert ctx.ev(ctx.mu(Fraction(n, 2))) == pytest.approx(want, rel=1e-13, abs=1e-15)
    got = sorted(vals.values())
    assert min(b - a for a, b in zip(got, got[1:])) > 1e-3


def test_projector_spin_zero_is_identity():
    P = build_projector(0, ctx_of(r="2"))
    assert P.size == 1
    assert P.coefficient(0, 0) == pytest.approx(1.0)
    assert P.entries[(0, 0)] == A.one()


@pytest.mark.parametrize("j", ["1/2", "-1/2", "1", "-1"])
def test_projector_identities_r2(j):
    P = build_projector(j, ctx_of(r="2"))
    assert vstar_v(P) == A.one()
    rep = check_projector(P)
    assert rep.passed, rep.details


def test_projector_idempotent_exactly():
    # the square roots of the norms cancel: (P^2)_nm / factor_nm is exact
    ctx = ctx_of(r="2")
    P = build_projector(Fraction(1, 2), ctx)
    inv = qbracket(2).inv()
    for n in P.ks():
        for m in P.ks():
            sq = A.zero()
            for k in P.ks():
                c = Scalar.qpow(-2 * k) * inv * P.norms2[k].inv()
                sq = sq + A.prod(P.entries[(n, k)], P.entries[(k, m)]).scale(c)
            assert (sq - P.entries[(n, m)]).is_zero()
            assert (A.star(P.entries[(n, m)]) - P.entries[(m, n)]).is_zero()


def test_entries_are_sphere_shaped():
    ctx = ctx_of(r="2")
    P = build_projector(1, ctx)
    for (n, m), form in P.sphere_forms.items():
        assert form is not None, (n, m)
    # a generator of SU_q(2) outside the sphere is rejected
    assert express_in_sphere(A.gen("a"), 0, ctx, 2) is None


@pytest.mark.parametrize("j", ["0", "1/2", "-1"])
def test_psi_isometry(j):
    rep = psi_isometry_check(j, ctx_of(r="2"), samples=1)
    assert rep.passed, rep.details


def test_psi_isometry_spin_zero_unit_row():
    rep = psi_isometry_check(0, ctx_of(r="1"), samples=1)
    assert rep.details["c_j"] == pytest.approx(1.0)


@pytest.mark.parametrize("j", ["1/2", "-1/2"])
def test_twisted_cyclicity(j):
    rep = twisted_cyclicity_check(j, ctx_of(r="2"), samples=2)
    assert rep.passed, rep.details


def test_xi_identities_examples():
    s = Scalar.const(Fraction(3, 7))
    ids = xi_identities(s)
    assert all(d.is_zero() for d in ids.values())
    lhs = A.mul(A.gen("a") - A.gen("c").scale(Scalar.qpow(1) * s), A.gen("d") + A.gen("b").scale(s))
    assert (lhs + xi(s) - A.one()).is_zero()


@pytest.mark.parametrize("r", ["0", "2", "inf"])
@pytest.mark.parametrize("j", ["1/2", "-1/2", "1", "3/2", "-3/2"])
def test_chart_identities(j, r):
    rep = chart_identities(j, ctx_of(r=r))
    assert rep.passed, rep.details


def test_chart_identities_half_reports_gamma():
    rep = chart_identities(Fraction(1, 2), ctx_of(r="2"))
    assert set(rep.details["gamma"]) == {"1/2", "-1/2"}
    assert all(g != 0 for g in rep.details["gamma"].values())


def test_chart_matrices_spin_zero():
    m, md, n = chart_matrices(0, ctx_of())
    assert m == {(0, 0): {("B",): 2.0}}
    assert md == {(0, 0): {("Bst",): 0.5}}
    assert n == {(0, 0): {("A",): 0.5}}


@pytest.mark.parametrize("r", ["0", "1", "2", "inf"])
@pytest.mark.parametrize("j", ["0", "1/2", "-1", "3/2"])
def test_chart_matrix_relations(j, r):
    rep = check_chart_matrices(j, ctx_of(r=r))
    assert rep.passed, rep.details
    assert rep.details["off_tridiagonal"] == []


@pytest.mark.parametrize("r", ["0", "2"])
def test_orthogonal_decomposition(r):
    rep = check_orthogonal_decomposition(ctx_of(r=r), l_max=1)
    assert rep.passed, rep.details


@pytest.mark.parametrize("l,k", [("1/2", "1/2"), ("1", "0"), ("1", "-1"), ("3/2", "1/2")])
def test_completeness(l, k):
    rep = check_completeness(ctx_of(r="2"), l, k)
    assert rep.passed, rep.details


def test_basis_bounds_rejected():
    with pytest.raises(ValueError):
        build_basis(Fraction(1, 2), 6, ctx_of())
    with pytest.raises(ValueError):
        build_basis(1, Fraction(1, 2), ctx_of())
    with pytest.raises(ValueError):
        build_projector(2, ctx_of())
