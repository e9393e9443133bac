"""Acceptance gate: criteria 1-10 at their stated tolerances and grids.

Each test records one PASS/FAIL line; conftest prints them at the end of the
run.  ``python3 tests/test_acceptance.py`` runs the gate on its own.
"""
import time
from fractions import Fraction

import pytest

from qsphere import bundle, haar, hopf, ncpoly, repnum
from qsphere.cli import SUITES, counterexample_report, decomposition_report, main
from qsphere.qcoeff import ParamContext

RESULTS: dict = {}
H = Fraction(1, 2)
JS = [Fraction(0), H, -H, Fraction(1), Fraction(-1)]


def ctx(q="1/2", r="1"):
    return ParamContext(q=Fraction(q), r=r)


def record(n: int, title: str, failures: list, elapsed: float, limit: float | None = None):
    slow = limit is not None and elapsed >= limit
    ok = not failures and not slow
    note = f"{elapsed:.1f}s" + (f" (limit {limit:.0f}s)" if limit else "")
    if failures:
        note += "; failed: " + ", ".join(failures[:6]) + (" ..." if len(failures) > 6 else "")
    if slow:
        note += "; over time limit"
    RESULTS[n] = f"CRITERION {n:2d} {'PASS' if ok else 'FAIL'}  {title}  [{note}]"
    assert ok, RESULTS[n]


def _names(reports, tag=""):
    return [f"{r.name}{tag}" for r in reports if not r.passed]


def test_criterion_01_presentations():
    t0 = time.perf_counter()
    fails = []
    for r in ("0", "2", "inf"):
        c = ctx(r=r)
        fails += _names([ncpoly.check_presentation(ncpoly.make_presentation(n, c), 6)
                         for n in ncpoly.PRESENTATION_NAMES], f"@r={r}")
    record(1, "rewrite systems confluent and *-compatible, degree <= 6, r in {0,2,inf}", fails,
           time.perf_counter() - t0, 30)


def test_criterion_02_hopf():
    t0 = time.perf_counter()
    fails = []
    js = [Fraction(n, 2) for n in range(-3, 4)]
    for r in ("0", "1", "2", "inf"):
        c = ctx(r=r)
        fails += _names([hopf.check_skew_primitive(c), hopf.check_embedding_relations(c),
                         hopf.check_invariance_embedded(c), bundle.check_mu_spectrum(js, c)],
                        f"@r={r}")
    record(2, "skew-primitivity, invariance of x_i, u_j/w_j eigenvectors (exact)", fails,
           time.perf_counter() - t0, 60)


def test_criterion_03_projectors():
    t0 = time.perf_counter()
    c = ctx(r="2")
    fails = []
    for j in (H, -H, Fraction(1), Fraction(-1)):
        P = bundle.build_projector(j, c)
        if bundle.vstar_v(P) != hopf.suq2().one():
            fails.append(f"v*v!=1 j={j}")
        fails += _names([bundle.check_projector(P)], f"@j={j}")
    record(3, "v*v = 1 and entries X_r-invariant, j in {+-1/2,+-1}, r=2, q=1/2", fails,
           time.perf_counter() - t0, 120)


def test_criterion_04_classification():
    t0 = time.perf_counter()
    fails, flagged, slowest = [], [], 0.0
    for q in ("3/10", "1/2", "7/10"):
        for r in ("0", "1", "inf"):
            c = ctx(q, r)
            for j in JS:
                t1 = time.perf_counter()
                L = abs(j) + 6
                tag = f"@q={q},r={r},j={j}"
                pi = repnum.build_pi_j(j, L, c)
                fails += _names([repnum.verify_relations(pi, 1e-9)], tag)
                br = 1 if j >= 0 else -1
                rep = repnum.check_coeffs(repnum.build_coeffs(abs(j), br, L, c), 1e-12, 1e-10)
                fails += _names([rep], tag)
                if rep.details["alpha_closed_form_flagged"]:
                    flagged.append(tag)
                slowest = max(slowest, time.perf_counter() - t1)
    if slowest >= 60:
        fails.append(f"slowest point {slowest:.1f}s")
    note = f"; closed-form alpha+ flagged at {len(flagged)} points" if flagged else ""
    record(4, "pi_j relations <= 1e-9, coefficient identities <= 1e-12" + note, fails,
           time.perf_counter() - t0)


def test_criterion_05_decomposition():
    t0 = time.perf_counter()
    fails = []
    for r in ("0", "1", "inf"):
        c = ctx(r=r)
        for j in JS:
            rep = repnum.tensor_rep(repnum.build_pi_j(j, abs(j) + 6, c), H)
            fails += _names([decomposition_report(rep, [j - H, j + H], f"pi_{j}xT_1/2")], f"@r={r}")
            if j != 0:
                fails += _names([repnum.cg_check(j, c, tol=1e-8)], f"@r={r}")
        rep = repnum.tensor_rep(repnum.build_pi_j(0, 7, c), 1)
        fails += _names([decomposition_report(rep, [-1, 0, 1], "pi_0xT_1")], f"@r={r}")
    record(5, "pi_j x T_1/2 and pi_0 x T_1 decompositions, CG expectation <= 1e-8", fails,
           time.perf_counter() - t0)


def test_criterion_06_decoupling():
    t0 = time.perf_counter()
    fails = []
    for r in ("0", "1", "2", "inf"):
        c = ctx(r=r)
        signs = (1,) if c.is_zero else (1, -1)
        tag = f"@r={r}"
        fails += _names([ncpoly.check_commutant(ncpoly.make_presentation(p, c), c)
                         for p in ("cross_decoupled_XY", "cross_decoupled_XK")], tag)
        for s in signs:
            y = repnum.build_Yr_rep(repnum.chart_Y0(0, s, c), 16, c)
            fails += _names([repnum.verify_relations(y, 1e-12)], tag)
            if repnum.xvn_residual(y, 8) > 1e-12:
                fails.append("shift power relation" + tag)
            if not c.is_inf:
                for Hv in (c.qf ** -0.5, 0.7):
                    fails += _names([repnum.verify_relations(repnum.build_I_pm(s, Hv, 16, 8, c), 1e-9)],
                                    tag)
    record(6, "commutants exact, shift model <= 1e-12, (I) families <= 1e-9", fails,
           time.perf_counter() - t0)


def test_criterion_07_state():
    t0 = time.perf_counter()
    fails = []
    for q in ("3/10", "1/2", "7/10"):
        for r in ("0", "1", "2", "inf"):
            c = ctx(q, r)
            tag = f"@q={q},r={r}"
            reps = [haar.check_series_vs_trace(c, 20, 60, 1e-10), haar.check_invariance(c, 1e-9),
                    haar.check_twisted_trace(c, 1e-10)]
            if r in ("1", "2"):
                reps.append(counterexample_report(c, 1e-10))
            fails += _names(reps, tag)
    record(7, "series vs trace <= 1e-10, invariance <= 1e-9, counterexample and twisted trace "
              "<= 1e-10", fails, time.perf_counter() - t0)


def test_criterion_08_charts_adjoint():
    t0 = time.perf_counter()
    fails = []
    for r in ("0", "1", "inf"):
        c = ctx(r=r)
        tag = f"@r={r}"
        for j in [Fraction(n, 2) for n in range(-3, 4)]:
            fails += _names([bundle.chart_identities(j, c)], tag)
        for j in JS:
            fails += _names([bundle.check_chart_matrices(j, c, 1e-10)], tag)
            for s in ((1,) if c.is_zero else (1, -1)):
                fails += _names([repnum.rho_formula_check(j, s, c, tol=1e-12)], tag)
            fails += _names([repnum.adjoint_reconstruction_check(j, abs(j) + 6, c, tol=1e-9,
                                                                 spec_tol=1e-8)], tag)
    record(8, "chart identities exact, chart matrices <= 1e-10, chart action <= 1e-12, "
              "adjoint identities <= 1e-9, Y spectrum <= 1e-8", fails, time.perf_counter() - t0)


def test_criterion_09_equivalence():
    t0 = time.perf_counter()
    fails = []
    for r in ("1", "2"):
        c = ctx(r=r)
        for j in JS:
            fails += _names([repnum.equivalence_pi_vs_bundle(j, abs(j) + 1, c, 1e-8)], f"@r={r}")
    record(9, "Haar-side x0, x1 matrix elements match pi_j <= 1e-8, l <= |j|+1", fails,
           time.perf_counter() - t0)


def test_criterion_10_negative_controls(capsys):
    t0 = time.perf_counter()
    fails = []
    for r in ("1", "0", "inf"):
        for suite in SUITES:
            code = main(["verify", suite, "--r", r, "--perturb", "1/1000"])
            capsys.readouterr()
            if code != 1:
                fails.append(f"{suite}@r={r} exit {code}")
    record(10, "every suite exits 1 with a 1e-3 perturbation, r in {1,0,inf}", fails,
           time.perf_counter() - t0)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
