"""Command-line driver: verification suites, matrix exports and coefficient tables.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import bundle, haar, hopf, ncpoly, repnum
from .qcoeff import ParamContext, parse_r, parse_rational
from .report import CheckReport, _fmt, residual_report

SUITES = ("presentations", "hopf", "bundle", "classify", "tensor", "decouple", "charts",
          "state", "adjoint", "equivalence")
BUILDS = ("pi", "sigma", "yr", "I", "rho", "Tl")
DEFAULT_JS = (Fraction(0), Fraction(1, 2), Fraction(-1, 2), Fraction(1), Fraction(-1))

# tolerances fixed by the check itself; --tol governs the generic 1e-9 residuals
TOL_COEFF = 1e-12
TOL_SHIFT = 1e-12
TOL_STATE = 1e-10
TOL_CHART = 1e-10
TOL_RHO = 1e-12
TOL_MATCH = 1e-8


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# configuration
@dataclass(frozen=True)
class RunConfig:
    q: Fraction = Fraction(1, 2)
    r: Fraction | float = Fraction(1)
    j: Fraction | None = None
    branch: int | None = None
    L: Fraction | None = None
    N: int = 16
    M: int = 8
    tol: float = 1e-9
    out: str | None = None
    format: str = "json"
    perturb: Fraction = Fraction(0)
    l: Fraction = Fraction(1, 2)
    sign: int = 1
    H: float = 1.0
    y0: float | None = None
    max_degree: int = 8

    def ctx(self) -> ParamContext:
        return ParamContext(q=self.q, r=self.r, tol=self.tol, perturb=self.perturb)

    def js(self) -> list:
        return [self.j] if self.j is not None else list(DEFAULT_JS)

    def level(self, j: Fraction, extra: int = 6) -> Fraction:
        """Top spin for label j: L itself, or L - 1/2 when L and j differ in parity."""
        if self.L is None:
            return abs(j) + extra
        return self.L if (self.L - abs(j)).denominator == 1 else self.L - Fraction(1, 2)

    def to_json(self) -> dict:
        return {"q": str(self.q), "r": "inf" if isinstance(self.r, float) else str(self.r),
                "j": None if self.j is None else str(self.j), "branch": self.branch,
                "L": None if self.L is None else str(self.L), "N": self.N, "M": self.M,
                "tol": self.tol, "perturb": str(self.perturb)}


def _sign(text: str) -> int:
    t = str(text).strip()
    if t in ("+", "+1", "1", "plus"):
        return 1
    if t in ("-", "-1", "minus"):
        return -1
    raise UsageError(f"expected + or -, got {text!r}")


_CONVERT: dict[str, Callable] = {
    "q": parse_rational, "r": parse_r, "j": repnum.half, "branch": _sign, "L": repnum.half,
    "N": int, "M": int, "tol": float, "out": str, "format": str, "perturb": parse_rational,
    "l": repnum.half, "sign": _sign, "H": float, "y0": float, "max_degree": int,
}


def read_config_file(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as e:
        raise UsageError(f"cannot read config file: {e}") from e
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in _CONVERT:
            raise UsageError(f"{path}:{n}: unknown key {k!r}")
        out[k] = v
    return out


def make_config(args: argparse.Namespace) -> RunConfig:
    raw = read_config_file(args.config) if getattr(args, "config", None) else {}
    for k in _CONVERT:
        v = getattr(args, k, None)
        if v is not None:
            raw[k] = v
    vals = {}
    for k, v in raw.items():
        try:
            vals[k] = _CONVERT[k](v)
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(f"bad value for {k}: {v!r} ({e})") from e
    cfg = RunConfig(**vals)
    if not (0 < cfg.q < 1):
        raise UsageError(f"q must lie in (0,1), got {cfg.q}")
    if not isinstance(cfg.r, float) and cfg.r < 0:
        raise UsageError("r must be >= 0 or inf")
    if not cfg.tol > 0:
        raise UsageError("tol must be positive")
    if cfg.format not in ("json", "csv", "md"):
        raise UsageError(f"format must be json, csv or md, got {cfg.format!r}")
    if cfg.N < 3 or cfg.M < 3:
        raise UsageError("N and M must be at least 3")
    if cfg.L is not None and cfg.j is not None:
        if cfg.L < abs(cfg.j) or (cfg.L - abs(cfg.j)).denominator != 1:
            raise UsageError(f"L={cfg.L} must be >= |j|={abs(cfg.j)} and differ from it by an integer")
    if cfg.l < 0:
        raise UsageError("l must be >= 0")
    if getattr(args, "cmd", None) == "verify" and cfg.L is not None:
        # relations are checked on levels below L; L = |j| leaves nothing to check
        low = abs(cfg.j) if cfg.j is not None else max(abs(j) for j in DEFAULT_JS)
        if cfg.L < low + 1:
            raise UsageError(f"verify needs L >= |j| + 1 = {low + 1} (nonempty interior), got L={cfg.L}")
    return cfg


# ----------------------------------------------------------------------------
# suites: each returns a list of zero-argument callables producing CheckReports
def _signs(ctx: ParamContext) -> tuple:
    return (1,) if ctx.is_zero else (1, -1)


def _presentations(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    return [lambda n=n: ncpoly.check_presentation(ncpoly.make_presentation(n, ctx), 6)
            for n in ncpoly.PRESENTATION_NAMES]


def _hopf(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    js = [Fraction(n, 2) for n in range(-3, 4)]
    return [
        lambda: hopf.check_skew_primitive(ctx),
        lambda: hopf.check_embedding_relations(ctx),
        lambda: hopf.check_invariance_embedded(ctx),
        lambda: bundle.check_mu_spectrum(js, ctx),
        lambda: hopf.check_hopf_axioms(3),
        lambda: hopf.check_action_routes(3, ctx),
    ]


def _bundle(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    js = [cfg.j] if cfg.j not in (None, 0) else [Fraction(1, 2), Fraction(-1, 2), Fraction(1), Fraction(-1)]
    if any(abs(j) > Fraction(3, 2) for j in js):
        raise UsageError("projectors are built for |j| <= 3/2")
    out = [lambda j=j: bundle.check_projector(bundle.build_projector(j, ctx)) for j in js]
    j0 = js[0]
    out += [
        lambda: bundle.check_basis(bundle.build_basis(j0, abs(j0) + 1, ctx)),
        lambda: bundle.check_ladder(bundle.build_basis(j0, abs(j0) + 1, ctx)),
    ]
    return out


def _coeff_branch(cfg: RunConfig, j: Fraction) -> int:
    if cfg.branch is not None:
        return cfg.branch
    return 1 if j >= 0 else -1


def _classify(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    out = []
    for j in cfg.js():
        L = cfg.level(j)
        br = cfg.branch

        def pi(j=j, L=L, br=br):
            return repnum.build_pi_j(j, L, ctx, br)

        out += [
            lambda pi=pi: repnum.verify_relations(pi(), cfg.tol),
            lambda j=j, L=L: repnum.check_coeffs(
                repnum.build_coeffs(abs(j), _coeff_branch(cfg, j), L, ctx), TOL_COEFF, 1e-10),
            lambda pi=pi: repnum.weight_grading_check(pi()),
            lambda pi=pi: repnum.multiplicity_one_check(pi()),
        ]
    return out


def decomposition_report(rep: repnum.TruncatedRep, expected: list, name: str) -> CheckReport:
    """Compare decompose(rep) with the expected multiset of labels."""
    try:
        got, info = repnum.decompose(rep, details=True)
    except repnum.DecompositionError as e:
        return CheckReport(name, False, params=rep.ctx.to_json(), basis_size=rep.dim,
                           details={"error": str(e)})
    want = sorted((Fraction(x), 1) for x in expected)
    return CheckReport(name, list(got) == want, params=rep.ctx.to_json(), basis_size=rep.dim,
                       residual=info["max_match_error"],
                       details={"found": [[str(a), m] for a, m in got],
                                "expected": [[str(a), m] for a, m in want],
                                "resolved_max_spin": info["resolved_max_spin"],
                                "min_margin": info["min_margin"],
                                "unseparated_spins": info["unseparated_spins"]})


def _tensor(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    h = Fraction(1, 2)
    out = []
    for j in cfg.js():
        L = cfg.level(j)

        def dec(j=j, L=L):
            rep = repnum.tensor_rep(repnum.build_pi_j(j, L, ctx, cfg.branch), h)
            return decomposition_report(rep, [j - h, j + h], f"decompose[pi_{j} x T_1/2]")

        out.append(dec)
        if j != 0:
            out.append(lambda j=j: repnum.cg_check(j, ctx, tol=TOL_MATCH))
    if cfg.j in (None, 0):
        def dec0():
            L = cfg.level(Fraction(0))
            rep = repnum.tensor_rep(repnum.build_pi_j(0, L, ctx), 1)
            return decomposition_report(rep, [-1, 0, 1], "decompose[pi_0 x T_1]")
        out.append(dec0)
    return out


def _decouple(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    out = [
        lambda: ncpoly.check_commutant(ncpoly.make_presentation("cross_decoupled_XY", ctx), ctx),
        lambda: ncpoly.check_commutant(ncpoly.make_presentation("cross_decoupled_XK", ctx), ctx),
        lambda: ncpoly.check_decoupling_identities(ctx),
    ]
    N = max(cfg.N, 12)
    y0s = [cfg.y0] if cfg.y0 is not None else [repnum.chart_Y0(0, s, ctx) for s in _signs(ctx)]
    for y0 in y0s:
        def yr(y0=y0):
            return repnum.build_Yr_rep(y0, N, ctx)
        out.append(lambda yr=yr: repnum.verify_relations(yr(), TOL_SHIFT))
        out.append(lambda yr=yr, y0=y0: residual_report(
            "shift_power_relation", repnum.xvn_residual(yr(), 8), TOL_SHIFT,
            params={**ctx.to_json(), "Y0": y0, "n_max": 8}, basis_size=N))
    for s in _signs(ctx):
        out.append(lambda s=s: repnum.verify_relations(repnum.build_sigma_pm(s, cfg.N, ctx), cfg.tol))
    if not ctx.is_inf:
        for s in _signs(ctx):
            for H in sorted({cfg.H, 0.7}):
                def fam(s=s, H=H):
                    return repnum.build_I_pm(s, H, cfg.N, cfg.M, ctx)
                out.append(lambda fam=fam: repnum.verify_relations(fam(), cfg.tol))
                out.append(lambda fam=fam: repnum.sigma_restriction_check(fam()))
    return out


def _charts(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    js = cfg.js()
    out = []
    for j in js:
        if 2 * abs(j) <= 3:
            out.append(lambda j=j: bundle.chart_identities(j, ctx))
        out.append(lambda j=j: bundle.check_chart_matrices(j, ctx, TOL_CHART))
        for s in _signs(ctx):
            def chart(j=j, s=s):
                return repnum.build_rho_chart(j, s, cfg.N, cfg.M, ctx)
            out += [
                lambda j=j, s=s: repnum.rho_formula_check(j, s, ctx, tol=TOL_RHO),
                lambda chart=chart: repnum.verify_relations(chart(), cfg.tol),
                lambda chart=chart: repnum.verify_relations(chart(), cfg.tol, "cross_EFK"),
                lambda chart=chart: repnum.rho_vs_products_check(chart()),
            ]
            if not ctx.is_inf:
                out.append(lambda chart=chart: repnum.rho_vs_I_check(chart()))
    out.append(lambda: repnum.pidef_check(ctx))
    return out


def counterexample_report(ctx: ParamContext, tol: float = TOL_STATE) -> CheckReport:
    val, closed = haar.counterexample_value(ctx)
    return residual_report("state_counterexample", abs(val - closed), tol, params=ctx.to_json(),
                           details={"computed": val, "closed_form": closed})


def _state(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    return [
        lambda: haar.check_series_vs_trace(ctx, 20, 60, TOL_STATE),
        lambda: haar.check_invariance(ctx, cfg.tol),
        lambda: counterexample_report(ctx),
        lambda: haar.check_twisted_trace(ctx, TOL_STATE),
        lambda: haar.check_hqf(ctx, TOL_STATE),
        lambda: haar.check_action_forms(ctx),
        lambda: haar.check_commutator_identities(ctx),
        lambda: haar.check_faithful(ctx),
        lambda: haar.check_haar_invariance(haar.build_haar_table(cfg.max_degree)),
    ]


def _adjoint(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    return [lambda j=j: repnum.adjoint_reconstruction_check(j, cfg.level(j), ctx, tol=cfg.tol,
                                                            spec_tol=TOL_MATCH)
            for j in cfg.js()]


def _equivalence(cfg: RunConfig) -> list:
    ctx = cfg.ctx()
    js = cfg.js()
    if any(abs(j) > 1 for j in js):
        raise UsageError("the equivalence suite covers |j| <= 1")
    out = []
    for j in js:
        L = cfg.L if cfg.L is not None and cfg.L <= abs(j) + 2 else abs(j) + 1
        out.append(lambda j=j, L=L: repnum.equivalence_pi_vs_bundle(j, L, ctx, TOL_MATCH))
    return out


SUITE_BUILDERS = {
    "presentations": _presentations, "hopf": _hopf, "bundle": _bundle, "classify": _classify,
    "tensor": _tensor, "decouple": _decouple, "charts": _charts, "state": _state,
    "adjoint": _adjoint, "equivalence": _equivalence,
}


def _threads() -> int:
    env = os.environ.get("QSPHERE_THREADS", "")
    if env.strip().isdigit() and int(env) > 0:
        return int(env)
    return min(4, os.cpu_count() or 1)


def _guard(name: str, fn: Callable[[], CheckReport]) -> CheckReport:
    try:
        return fn()
    except (ValueError, ArithmeticError, KeyError, RuntimeError) as e:
        return CheckReport(f"{name}:error", False, details={"error": f"{type(e).__name__}: {e}"})


def run_suite(suite: str, cfg: RunConfig) -> list:
    """Run the named suite (or ``all``); returns (suite, CheckReport) pairs in a fixed order."""
    names = SUITES if suite == "all" else (suite,)
    jobs = []
    for s in names:
        if s not in SUITE_BUILDERS:
            raise UsageError(f"unknown suite {s!r}")
        jobs += [(s, fn) for fn in SUITE_BUILDERS[s](cfg)]
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        futs = [ex.submit(_guard, s, fn) for s, fn in jobs]
        return [(s, f.result()) for (s, _), f in zip(jobs, futs)]


# ----------------------------------------------------------------------------
# output
def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(_fmt(obj), indent=2, sort_keys=True) + "\n"


def format_reports(results: list, cfg: RunConfig, suite: str) -> str:
    passed = all(r.passed for _, r in results)
    if cfg.format == "json":
        return _dump_json({"command": "verify", "suite": suite, "config": cfg.to_json(),
                           "passed": passed,
                           "reports": [{"suite": s, **r.to_json()} for s, r in results]})
    rows = [(s, r.name, "PASS" if r.passed else "FAIL",
             "" if r.residual is None else f"{r.residual:.17g}",
             "" if r.tol is None else f"{r.tol:.17g}",
             "" if r.basis_size is None else str(r.basis_size),
             json.dumps(_fmt(r.params), sort_keys=True)) for s, r in results]
    head = ("suite", "check", "status", "residual", "tol", "basis_size", "params")
    return _table(head, rows, cfg.format)


def _table(head, rows, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(head)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "md":
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    return _dump_json([dict(zip(head, row)) for row in rows])


def cmd_verify(args, cfg: RunConfig) -> int:
    results = run_suite(args.suite, cfg)
    for s, r in results:
        print(f"[{s}] {r.line()}", file=sys.stderr)
    _write(format_reports(results, cfg, args.suite), cfg.out)
    n_fail = sum(not r.passed for _, r in results)
    print(f"{args.suite}: {len(results) - n_fail}/{len(results)} checks passed", file=sys.stderr)
    return 0 if n_fail == 0 else 1


def build_rep(what: str, cfg: RunConfig) -> repnum.TruncatedRep:
    ctx = cfg.ctx()
    j = cfg.j if cfg.j is not None else Fraction(0)
    if what == "Tl":
        return repnum.build_Tl(cfg.l, ctx)
    if what == "pi":
        return repnum.build_pi_j(j, cfg.level(j), ctx, cfg.branch)
    if what == "sigma":
        return repnum.build_sigma_pm(cfg.sign, cfg.N, ctx)
    if what == "yr":
        y0 = cfg.y0 if cfg.y0 is not None else repnum.chart_Y0(j, cfg.sign, ctx)
        return repnum.build_Yr_rep(y0, cfg.N, ctx)
    if what == "I":
        return repnum.build_I_pm(cfg.sign, cfg.H, cfg.N, cfg.M, ctx)
    if what == "rho":
        return repnum.build_rho_chart(j, cfg.sign, cfg.N, cfg.M, ctx)
    raise UsageError(f"unknown representation {what!r}")


def cmd_build(args, cfg: RunConfig) -> int:
    try:
        rep = build_rep(args.what, cfg)
    except ValueError as e:
        raise UsageError(str(e)) from e
    data = rep.to_json()
    if cfg.format == "json":
        text = _dump_json(data)
    else:
        rows = [(g, i, k, f"{v:.17g}") for g, m in data["generators"].items()
                for i, k, v in m["triplets"]]
        text = _table(("generator", "row", "col", "value"), rows, cfg.format)
    _write(text, cfg.out)
    return 0


def coefficient_table(cfg: RunConfig) -> list:
    """Rows (j, branch, l, beta0, alpha+ from the alpha-beta relation, alpha+ closed form)."""
    ctx = cfg.ctx()
    js = [abs(cfg.j)] if cfg.j is not None else [Fraction(n, 2) for n in range(4)]
    branches = (cfg.branch,) if cfg.branch is not None else (1, -1)
    rows = []
    for j in js:
        L = cfg.L if cfg.L is not None else j + 3
        for br in branches:
            try:
                tab = repnum.build_coeffs(j, br, L, ctx)
            except ValueError:
                continue  # branch absent for these parameters
            for l in sorted(tab.alpha):
                a, c = tab.alpha[l], tab.alpha_closed[l]
                diff = abs(a - c)
                rows.append((str(j), "+" if br > 0 else "-", str(l), f"{tab.beta[l]:.17g}",
                             f"{a:.17g}", f"{c:.17g}", f"{diff:.3e}",
                             "yes" if diff / max(1.0, abs(a)) > 1e-10 else "no"))
    return rows


def cmd_tables(args, cfg: RunConfig) -> int:
    head = ("j", "branch", "l", "beta0", "alpha_plus", "alpha_plus_closed", "abs_diff", "flagged")
    _write(_table(head, coefficient_table(cfg), cfg.format), cfg.out)
    return 0


def cmd_haar_table(args, cfg: RunConfig) -> int:
    try:
        tab = haar.build_haar_table(cfg.max_degree)
    except ValueError as e:
        raise UsageError(str(e)) from e
    _write(_dump_json(tab.to_json()), cfg.out)
    return 0


def cmd_projector(args, cfg: RunConfig) -> int:
    if cfg.j is None:
        raise UsageError("projector needs --j")
    try:
        P = bundle.build_projector(cfg.j, cfg.ctx())
    except ValueError as e:
        raise UsageError(str(e)) from e
    _write(_dump_json(P.to_json()), cfg.out)
    return 0


def _parse_elem(alg: str, text: str, ctx: ParamContext):
    try:
        return ncpoly.make_presentation(alg, ctx).parse(text, ctx)
    except (KeyError, ValueError, SyntaxError) as e:
        raise UsageError(f"cannot parse {text!r} in {alg}: {e}") from e


def cmd_element(args, cfg: RunConfig) -> int:
    ctx = cfg.ctx()
    if args.op == "nf":
        res = _parse_elem(args.alg, args.x, ctx)
    else:
        f = _parse_elem("Uq_su2", args.f, ctx)
        x = _parse_elem("O_SUq2", args.x, ctx)
        if args.op == "pair":
            _write(_dump_json({"value": hopf.pairing(f, x).to_json(),
                               "numeric": ctx.ev(hopf.pairing(f, x))}), cfg.out)
            return 0
        res = hopf.act_left(f, x) if args.op == "act-left" else hopf.act_right(x, f)
    _write(_dump_json({"element": repr(res), "terms": res.to_json()}), cfg.out)
    return 0


# ----------------------------------------------------------------------------
def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration (flags override --config)")
    g.add_argument("--config", help="key=value file merged under the flags")
    g.add_argument("--q")
    g.add_argument("--r", help="0, a rational, or inf")
    g.add_argument("--j", help="half-integer label such as 3/2 or -1/2")
    g.add_argument("--branch", choices=("+", "-"))
    g.add_argument("--L", help="highest spin level (half-integer)")
    g.add_argument("--N", type=int)
    g.add_argument("--M", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--out")
    g.add_argument("--format", choices=("json", "csv", "md"))
    g.add_argument("--perturb", help="relative perturbation of a designated coefficient")
    g.add_argument("--l", help="spin of T_l")
    g.add_argument("--sign", choices=("+", "-"))
    g.add_argument("--H", type=float)
    g.add_argument("--y0", type=float)
    g.add_argument("--max-degree", dest="max_degree", type=int)


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsphere", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    _common(v)
    b = sub.add_parser("build", help="export generator matrices of a truncated representation")
    b.add_argument("what", choices=BUILDS)
    _common(b)
    _common(sub.add_parser("tables", help="beta0 / alpha+ coefficient tables"))
    _common(sub.add_parser("haar-table", help="Haar state values on O(SU_q(2))"))
    _common(sub.add_parser("projector", help="projector matrix P_j"))
    e = sub.add_parser("element", help="normal forms, actions and pairings of parsed elements")
    e.add_argument("op", choices=("nf", "act-left", "act-right", "pair"))
    e.add_argument("x", help="element (of --alg for nf, of O_SUq2 otherwise)")
    e.add_argument("--f", default="1", help="U_q(su2) element for act-*/pair")
    e.add_argument("--alg", default="O_SUq2", choices=ncpoly.PRESENTATION_NAMES)
    _common(e)
    return p


COMMANDS = {"verify": cmd_verify, "build": cmd_build, "tables": cmd_tables,
            "haar-table": cmd_haar_table, "projector": cmd_projector, "element": cmd_element}


def main(argv=None) -> int:
    try:
        args = parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = make_config(args)
        return COMMANDS[args.cmd](args, cfg)
    except UsageError as e:
        print(f"qsphere: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
