import math
from fractions import Fraction

import numpy as np
import pytest

from qsphere.repnum import (adjoint_reconstruction_check, build_coeffs, build_I_pm, build_pi_j,
                            build_rho_chart, build_sigma_pm, build_Tl, build_Yr_rep, c_pm, cg_check,
                            check_coeffs, corrupted_control, decompose, equivalence_pi_vs_bundle,
                            multiplicity_one_check, pidef_check, rho_formula_check,
                            rho_vs_I_check, rho_vs_products_check, sigma_restriction_check,
                            tensor_rep, verify_relations, weight_grading_check, xvn_residual)

from conftest import ctx_of

H2 = Fraction(1, 2)


def br(n, q):
    return (q ** n - q ** -n) / (q - 1 / q)


def _oracle_key(r, q, j, sign):
    return f"r={float(r)},q={q},j={int(2 * j)}/2,{'+' if sign > 0 else '-'}"


# --------------------------------------------------------------------------- T_l
def test_T0_is_counit():
    T = build_Tl(0, ctx_of())
    assert T.dim == 1
    assert T.matrix("E")[0, 0] == 0 and T.matrix("F")[0, 0] == 0 and T.matrix("K")[0, 0] == 1


def test_T_half_matrices():
    T = build_Tl(H2, ctx_of())
    q = 0.5
    assert T.entry("K", (H2, H2), (H2, H2)) == pytest.approx(q ** 0.5)
    assert T.entry("K", (H2, -H2), (H2, -H2)) == pytest.approx(q ** -0.5)
    E = T.matrix("E")
    assert np.count_nonzero(E) == 1 and E.max() == pytest.approx(1.0)


def test_T1_lowering_coefficient():
    T = build_Tl(1, ctx_of())
    assert T.entry("F", (1, 0), (1, 1)) == pytest.approx(math.sqrt(br(2, 0.5)), rel=1e-14)


@pytest.mark.parametrize("l", ["0", "1/2", "1", "3/2", "5/2"])
def test_Tl_relations(l):
    T = build_Tl(l, ctx_of())
    assert verify_relations(T, tol=1e-13).passed
    q = 0.5
    E, F, K = T.matrix("E"), T.matrix("F"), T.matrix("K")
    Ki = np.linalg.inv(K)
    assert np.allclose(E @ F - F @ E, (K @ K - Ki @ Ki) / (q - 1 / q), atol=1e-13)


# --------------------------------------------------------------------------- coefficients
@pytest.mark.parametrize("r", ["1", "0", "inf"])
@pytest.mark.parametrize("q", ["3/10", "1/2"])
@pytest.mark.parametrize("j2", [1, 2, 3])
def test_beta0_lowest_against_oracle(oracle, r, q, j2):
    ctx = ctx_of(q=q, r=r)
    j = Fraction(j2, 2)
    for sign in ((1,) if r == "0" else (1, -1)):
        tab = build_coeffs(j, sign, j + 2, ctx)
        key = _oracle_key(ctx.rf if r != "inf" else math.inf, float(Fraction(q)), j, sign)
        assert tab.beta0(j) == pytest.approx(oracle["beta0_lowest"][key], rel=1e-12)


def test_beta0_half_closed_form():
    ctx = ctx_of(r="2")
    q = 0.5
    lp, lm = 2.0, -1.0
    for sign, (a, b) in ((1, (lp, lm)), (-1, (lm, lp))):
        tab = build_coeffs(H2, sign, 3, ctx)
        assert tab.beta0(H2) == pytest.approx((a / q ** 2 - b) / br(3, q), rel=1e-14)


def test_beta0_infinite_r():
    ctx = ctx_of(r="inf")
    q = 0.5
    for j in (H2, Fraction(1), Fraction(3, 2)):
        for sign in (1, -1):
            tab = build_coeffs(j, sign, j + 3, ctx)
            for l in (j, j + 1, j + 3):
                want = sign / q * br(2, q) * br(2 * j, q) / br(2 * l + 2, q)
                assert tab.beta0(l) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("r", ["0", "1", "2"])
def test_spin_zero_chain_starts_at_zero_and_branches_agree(r):
    ctx = ctx_of(r=r)
    p, m = build_coeffs(0, 1, 5, ctx), build_coeffs(0, -1, 5, ctx)
    assert p.beta0(0) == 0.0
    for l in range(6):
        assert p.beta0(l) == pytest.approx(m.beta0(l), abs=1e-14)
        assert p.alpha_plus(l) == pytest.approx(m.alpha_plus(l), abs=1e-14)


@pytest.mark.parametrize("q", ["3/10", "1/2", "7/10"])
@pytest.mark.parametrize("r", ["0", "1", "inf"])
@pytest.mark.parametrize("j", ["0", "1/2", "1"])
def test_coefficient_identities(q, r, j):
    ctx = ctx_of(q=q, r=r)
    for sign in ((1,) if r == "0" else (1, -1)):
        rep = check_coeffs(build_coeffs(j, sign, Fraction(j) + 6, ctx))
        assert rep.passed, rep.details
        assert rep.details["alpha_closed_form"] <= 1e-10


def test_negative_alpha_square_rejected():
    with pytest.raises(ValueError):
        build_coeffs(1, 2, 3, ctx_of())
    with pytest.raises(ValueError):
        build_coeffs(1, 1, H2, ctx_of())


# --------------------------------------------------------------------------- pi_j
def test_pi0_lowest_x0_is_zero():
    pi = build_pi_j(0, 4, ctx_of())
    assert pi.entry("x0", (0, 0), (0, 0)) == 0.0


@pytest.mark.parametrize("j", ["1/2", "-1/2"])
def test_pi_half_lowest_expectation(j):
    ctx = ctx_of(r="1")
    pi = build_pi_j(j, Fraction(13, 2), ctx)
    tab = build_coeffs(H2, 1 if j == "1/2" else -1, 2, ctx)
    got = pi.entry("x0", (H2, H2), (H2, H2))
    assert got == pytest.approx(tab.beta0(H2), rel=1e-14)
    assert (got > 0) == (j == "1/2")


@pytest.mark.parametrize("r", ["0", "1"])
@pytest.mark.parametrize("j", ["0", "1/2", "-1/2", "1", "-1"])
def test_pi_relations(j, r):
    pi = build_pi_j(j, abs(Fraction(j)) + 6, ctx_of(r=r))
    rep = verify_relations(pi)
    assert rep.passed, rep.residual
    assert all("Ainv" in rule for rule in rep.details["skipped"])


def test_pi_relations_example_truncation():
    rep = verify_relations(build_pi_j(H2, Fraction(13, 2), ctx_of(r="1")))
    assert rep.residual <= 1e-9


def test_pi_L_must_fit():
    with pytest.raises(ValueError):
        build_pi_j(H2, 3, ctx_of())
    with pytest.raises(ValueError):
        build_pi_j(2, 1, ctx_of())


@pytest.mark.parametrize("j", ["0", "1/2", "-1"])
def test_multiplicity_one_and_grading(j):
    pi = build_pi_j(j, abs(Fraction(j)) + 4, ctx_of())
    assert multiplicity_one_check(pi).passed
    assert weight_grading_check(pi).passed


def test_harness_detects_corruption():
    pi = build_pi_j(H2, Fraction(9, 2), ctx_of())
    rep = corrupted_control(pi)
    assert rep.passed and rep.residual > 1e-3


# --------------------------------------------------------------------------- sphere and Y_r
def test_sigma_top_weight_vanishes():
    for r in ("0", "1", "2", "1/5"):
        assert c_pm(1, 0, ctx_of(r=r)) == pytest.approx(0.0, abs=1e-15)


def test_sigma_infinite_B_weights(oracle):
    sig = build_sigma_pm(1, 8, ctx_of(r="inf"))
    got = [sig.entry("B", n - 1, n) for n in range(1, 6)]
    assert got == pytest.approx(oracle["sigma_inf_B_q1/2"], rel=1e-15)


@pytest.mark.parametrize("r", ["0", "1", "2", "inf"])
def test_sigma_relations_and_sign_of_A(r):
    ctx = ctx_of(r=r)
    for sign in ((1,) if r == "0" else (1, -1)):
        sig = build_sigma_pm(sign, 30, ctx)
        assert verify_relations(sig, tol=1e-12).passed
        assert np.all(sign * np.diag(sig.matrix("A")) > 0)


def test_sigma_minus_rejected_at_r0():
    with pytest.raises(ValueError):
        build_sigma_pm(-1, 10, ctx_of(r="0"))


def test_Yr_examples():
    ctx = ctx_of(r="1")
    q, Y0 = 0.5, 0.8
    rep = build_Yr_rep(Y0, 20, ctx)
    X, Xs, Y = rep.matrix("X"), rep.matrix("Xst"), rep.matrix("Y")
    assert np.all(Xs[:, 0] == 0)
    assert np.allclose(np.diag(Y), [q ** (2 * n) * Y0 for n in range(20)])
    XX = Xs @ X
    for n in range(18):
        assert XX[n, n] == pytest.approx((1 - q ** (2 * n + 2)) * (q ** (2 * n) * Y0 ** 2 + 1), rel=1e-14)
    assert verify_relations(rep, tol=1e-12).passed
    assert xvn_residual(rep, 8) <= 1e-12
    with pytest.raises(ValueError):
        build_Yr_rep(0.0, 10, ctx)


# --------------------------------------------------------------------------- (I) families
def test_I_examples():
    ctx = ctx_of(r="1")
    q = 0.5
    H = q ** -0.5
    rep = build_I_pm(1, H, 12, 8, ctx)
    assert rep.entry("K", (0, 0), (0, 0)) == pytest.approx(H)
    lp = ctx.lam_pm_f(1)
    for (n, m) in rep.labels:
        assert rep.entry("A", (n, m), (n, m)) == pytest.approx(lp * q ** (2 * n))
    assert verify_relations(rep).passed
    assert sigma_restriction_check(rep).passed


@pytest.mark.parametrize("r", ["1", "2", "1/5"])
@pytest.mark.parametrize("H", [0.7, -1.3])
def test_I_relations(r, H):
    ctx = ctx_of(r=r)
    for sign in (1, -1):
        rep = verify_relations(build_I_pm(sign, H, 12, 10, ctx))
        assert rep.passed, rep.details["rules"]


def test_I_bad_inputs():
    with pytest.raises(ValueError):
        build_I_pm(1, 1.0, 5, 5, ctx_of(r="inf"))
    with pytest.raises(ValueError):
        build_I_pm(-1, 1.0, 5, 5, ctx_of(r="0"))
    with pytest.raises(ValueError):
        build_I_pm(1, 0.0, 5, 5, ctx_of())


# --------------------------------------------------------------------------- charts
def test_rho_chart_examples():
    ctx = ctx_of(r="1")
    q = 0.5
    j = H2
    rep = build_rho_chart(j, 1, 8, 8, ctx)
    lp = ctx.lam_pm_f(1)
    Y0 = q ** (2 * 0.5 + 1) * lp
    assert rep.entry("Y", (0, 0), (0, 0)) == pytest.approx(Y0, rel=1e-15)
    for k in range(6):
        want = math.sqrt(1 - q ** (2 * k + 2)) * math.sqrt(q ** (2 * k) * Y0 ** 2 + 1)
        assert rep.entry("X", (2, k + 1), (2, k)) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("r", ["0", "1", "inf"])
@pytest.mark.parametrize("j", ["0", "1/2", "-1"])
def test_rho_chart_checks(j, r):
    ctx = ctx_of(r=r)
    for sign in ((1,) if r == "0" else (1, -1)):
        rep = build_rho_chart(j, sign, 10, 10, ctx)
        assert verify_relations(rep, tol=1e-10).passed
        assert verify_relations(rep, tol=1e-9, presentation="cross_EFK").passed
        assert rho_vs_products_check(rep).passed
        if r != "inf":
            assert rho_vs_I_check(rep).passed
        assert rho_formula_check(j, sign, ctx).passed


@pytest.mark.parametrize("r", ["0", "1", "2"])
def test_pidef_right_multiplication(r):
    assert pidef_check(ctx_of(r=r)).passed


# --------------------------------------------------------------------------- tensor products
def test_tensor_with_trivial_is_identity():
    pi = build_pi_j(H2, Fraction(9, 2), ctx_of())
    t = tensor_rep(pi, 0)
    for g in ("x0", "x1", "E", "F", "K"):
        assert np.allclose(t.matrix(g), pi.matrix(g), atol=0)


def test_tensor_K_and_relations():
    ctx = ctx_of()
    pi = build_pi_j(0, 5, ctx)
    t = tensor_rep(pi, H2)
    T = build_Tl(H2, ctx)
    assert np.allclose(t.matrix("K"), np.kron(pi.matrix("K"), T.matrix("K")))
    assert verify_relations(t).passed


def test_decompose_pi0_half():
    ctx = ctx_of()
    assert decompose(tensor_rep(build_pi_j(0, 6, ctx), H2)) == [(-H2, 1), (H2, 1)]


def test_decompose_pi_half_half():
    ctx = ctx_of()
    assert decompose(tensor_rep(build_pi_j(H2, Fraction(13, 2), ctx), H2)) == [(0, 1), (1, 1)]


def test_decompose_pi0_spin_one():
    ctx = ctx_of()
    assert decompose(tensor_rep(build_pi_j(0, 7, ctx), 1)) == [(-1, 1), (0, 1), (1, 1)]


@pytest.mark.parametrize("r", ["1", "0", "inf"])
@pytest.mark.parametrize("j2", [1, 2, 3, -1, -2])
def test_cg_expectation_against_oracle(oracle, r, j2):
    ctx = ctx_of(r=r)
    j = Fraction(j2, 2)
    rep = cg_check(j, ctx)
    assert rep.passed, rep.details
    if r == "0" and j2 < 0:
        return  # the oracle tabulates only the + branch at r = 0
    key = _oracle_key(ctx.rf if r != "inf" else math.inf, 0.5, abs(j), 1 if j > 0 else -1)
    assert rep.details["expectation"] == pytest.approx(oracle["cg_expectation"][key], rel=1e-8,
                                                        abs=1e-12)


# --------------------------------------------------------------------------- Haar-side model
@pytest.mark.parametrize("j", ["0", "1/2", "-1/2"])
def test_equivalence_with_bundle(j):
    rep = equivalence_pi_vs_bundle(j, abs(Fraction(j)) + 1, ctx_of(r="1"))
    assert rep.passed, rep.details


def test_equivalence_sign_identifies_branch():
    rep = equivalence_pi_vs_bundle(H2, H2, ctx_of(r="1"))
    assert rep.details["sample"]["x0[1/2,1/2;1/2,1/2]"] > 0
    rep = equivalence_pi_vs_bundle(-H2, H2, ctx_of(r="1"))
    assert rep.details["sample"]["x0[1/2,1/2;1/2,1/2]"] < 0


# --------------------------------------------------------------------------- adjoint
@pytest.mark.parametrize("r", ["1", "0", "2"])
@pytest.mark.parametrize("j", ["0", "1/2", "-1"])
def test_adjoint_reconstruction(j, r):
    rep = adjoint_reconstruction_check(j, abs(Fraction(j)) + 6, ctx_of(r=r))
    assert rep.passed, rep.details
