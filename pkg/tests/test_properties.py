"""Randomized invariants of the numeric models."""
from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from qsphere.qcoeff import ParamContext
from qsphere.repnum import (adjointness_residual, build_I_pm, build_pi_j, build_rho_chart,
                            build_sigma_pm, build_Yr_rep, multiplicity_one_check, verify_relations,
                            weight_grading_check, xvn_residual)

qs = st.sampled_from([Fraction(3, 10), Fraction(1, 2), Fraction(7, 10), Fraction(2, 5)])
rs = st.sampled_from(["0", "1", "2", "inf", "1/5", "7/3"])
finite_pos_r = st.sampled_from(["1", "2", "1/5", "7/3"])
labels = st.integers(-3, 3).map(lambda n: Fraction(n, 2))


def _ctx(q, r):
    return ParamContext(q=q, r=r)


@given(qs, rs, labels, st.integers(2, 4))
def test_pi_adjointness_grading_multiplicity(q, r, j, extra):
    if r == "0" and j < 0:
        j = -j
    pi = build_pi_j(j, abs(j) + extra, _ctx(q, r))
    assert adjointness_residual(pi) <= 1e-13
    assert weight_grading_check(pi).passed
    assert multiplicity_one_check(pi).passed
    assert np.all(np.diag(pi.gens["K"]) > 0)


@given(qs, rs, st.sampled_from([1, -1]), st.integers(5, 25))
def test_sigma_sign_split(q, r, sign, N):
    if r == "0":
        sign = 1
    sig = build_sigma_pm(sign, N, _ctx(q, r))
    A = np.diag(sig.gens["A"])
    assert np.all(sign * A > 0)
    assert sig.gens["B"][:, 0].tolist() == [0.0] * N
    assert adjointness_residual(sig) == 0.0


@given(qs, rs, st.floats(0.05, 5.0) | st.floats(-5.0, -0.05))
def test_shift_model_xvn(q, r, Y0):
    rep = build_Yr_rep(Y0, 24, _ctx(q, r))
    assert xvn_residual(rep, 8) <= 1e-12
    assert verify_relations(rep, tol=1e-12).passed


@given(qs, finite_pos_r, st.sampled_from([1, -1]), st.floats(0.3, 3.0) | st.floats(-3.0, -0.3))
def test_I_family_relations(q, r, sign, H):
    rep = build_I_pm(sign, H, 10, 8, _ctx(q, r))
    assert verify_relations(rep).passed
    assert np.all(sign * np.diag(rep.gens["A"]) > 0)


@given(qs, rs, labels)
def test_chart_K_positive_and_relations(q, r, j):
    sign = 1 if r == "0" else (1 if j >= 0 else -1)
    rep = build_rho_chart(j, sign, 8, 8, _ctx(q, r))
    assert np.all(np.diag(rep.gens["K"]) > 0)
    assert verify_relations(rep, tol=1e-10).passed
