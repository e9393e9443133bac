"""Truncated numeric models of the representations of the cross product algebra.

Every model is a set of real matrices on a finite slice of an infinite basis.
Relations that move at most two steps along the grading are exact on the
``interior`` labels, which is where :func:`verify_relations` measures them.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ncpoly import make_presentation
from .qcoeff import ParamContext, lambda_n, qnum
from .report import CheckReport, residual_report


def half(x) -> Fraction:
    """Parse a half-integer label (``"3/2"``, ``-0.5``, ``Fraction``)."""
    if isinstance(x, float):
        x = Fraction(x).limit_denominator(2)
    f = Fraction(x) if not isinstance(x, str) else Fraction(x.strip())
    if (2 * f).denominator != 1:
        raise ValueError(f"{x!r} is not a half-integer")
    return f


def _threads(ctx: ParamContext) -> int:
    env = os.environ.get("QSPHERE_THREADS")
    n = int(env) if env and env.isdigit() else ctx.threads
    return max(1, n)


# ----------------------------------------------------------------------------
@dataclass
class TruncatedRep:
    """Generator matrices on a truncated labelled basis.

    ``interior`` marks the labels on which relations of ladder degree at most
    two are exactly represented.
    """

    name: str
    presentation: str
    labels: list
    gens: dict
    ctx: ParamContext
    interior: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def dim(self) -> int:
        return len(self.labels)

    def matrix(self, g: str) -> np.ndarray:
        return self.gens[g]

    def vector(self, label) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.index[label]] = 1.0
        return v

    def entry(self, g: str, row, col) -> float:
        return float(self.gens[g][self.index[row], self.index[col]])

    def word(self, w) -> np.ndarray:
        out = np.eye(self.dim)
        for g in w:
            out = out @ self.gens[g]
        return out

    def to_json(self) -> dict:
        def lab(x):
            return [str(c) for c in x] if isinstance(x, tuple) else str(x)
        gens = {}
        for g in sorted(self.gens):
            M = self.gens[g]
            rows, cols = np.nonzero(M)
            gens[g] = {"rows": self.dim, "cols": self.dim,
                       "triplets": [[int(i), int(j), float(M[i, j])] for i, j in zip(rows, cols)]}
        return {"name": self.name, "presentation": self.presentation,
                "params": self.ctx.to_json(), "meta": {k: str(v) for k, v in self.meta.items()},
                "basis": [lab(x) for x in self.labels], "generators": gens}


def _with_inverse(gens: dict, g: str, ginv: str) -> None:
    d = np.diag(gens[g])
    gens[ginv] = np.diag(1.0 / d)


# ----------------------------------------------------------------------------
# spin-l representations
def _br(n: Fraction, q: float) -> float:
    return qnum(float(n), q)


def _coef(q: float, prefactor: float, *factors) -> float:
    """``prefactor * prod [n]^p`` with the zero-coefficient convention.

    A factor ``[n]^p`` with ``n == 0`` and ``p > 0`` forces the result to zero
    whatever the other (possibly singular) factors are.
    """
    if any(Fraction(n) == 0 and p > 0 for n, p in factors):
        return 0.0
    out = prefactor
    for n, p in factors:
        b = _br(Fraction(n), q)
        if b == 0.0:
            raise ZeroDivisionError(f"singular factor [{n}]^{p}")
        p = Fraction(p)
        if p.denominator == 1:
            out *= b ** int(p)
        elif b < 0:
            raise ValueError(f"negative base [{n}] under fractional power")
        else:
            out *= b ** float(p)
    return out


def _ks(l: Fraction):
    return [-l + i for i in range(int(2 * l) + 1)]


def _uq_blocks(labels, q: float, pert: float = 0.0) -> dict:
    """E, F, K, Kinv on labels ``(l, k)`` by the spin-l ladder formulas."""
    n = len(labels)
    idx = {lab: i for i, lab in enumerate(labels)}
    E = np.zeros((n, n))
    F = np.zeros((n, n))
    K = np.zeros((n, n))
    for i, lab in enumerate(labels):
        l, k = lab[-2], lab[-1]
        K[i, i] = q ** float(k)
        up = lab[:-1] + (k + 1,)
        if up in idx:
            E[idx[up], i] = _coef(q, 1.0 + pert, (l - k, Fraction(1, 2)), (l + k + 1, Fraction(1, 2)))
        dn = lab[:-1] + (k - 1,)
        if dn in idx:
            F[idx[dn], i] = _coef(q, 1.0, (l - k + 1, Fraction(1, 2)), (l + k, Fraction(1, 2)))
    gens = {"E": E, "F": F, "K": K}
    _with_inverse(gens, "K", "Kinv")
    return gens


def build_Tl(l, ctx: ParamContext) -> TruncatedRep:
    """The (2l+1)-dimensional spin-l representation of U_q(su2)."""
    l = half(l)
    if l < 0:
        raise ValueError("spin must be nonnegative")
    labels = [(l, k) for k in _ks(l)]
    gens = _uq_blocks(labels, ctx.qf, float(ctx.perturb))
    return TruncatedRep(f"T_{l}", "Uq_su2", labels, gens, ctx,
                        np.ones(len(labels), dtype=bool), {"l": l})


# ----------------------------------------------------------------------------
# coefficients of the irreducible integrable representations
@dataclass
class CoeffTable:
    """alpha^+(l,l) and beta^0(l,l) for one label ``j >= 0`` and branch."""

    j: Fraction
    branch: int
    L: Fraction
    ctx: ParamContext
    alpha: dict
    beta: dict
    alpha_closed: dict
    checks: dict

    def alpha_plus(self, l) -> float:
        """alpha^+(l,l); zero below the lowest spin."""
        l = Fraction(l)
        if l < self.j:
            return 0.0
        return self.alpha[l]

    def beta0(self, l) -> float:
        return self.beta[Fraction(l)]

    def derived(self, l, k) -> dict:
        """The ladder coefficients alpha^{+,0,-}(l,k), beta^{+,0}(l,k)."""
        q = self.ctx.qf
        l, k = Fraction(l), Fraction(k)
        half_ = Fraction(1, 2)
        a, b = self.alpha_plus(l), self.beta0(l)
        out = {
            "alpha+": _coef(q, q ** float(-l + k) * a, (l + k + 1, half_), (l + k + 2, half_),
                            (2 * l + 1, -half_), (2 * l + 2, -half_)),
            "alpha0": _coef(q, -q ** float(k + 2) * b, (l - k, half_), (l + k + 1, half_),
                            (2, half_), (2 * l, -1)),
            "beta+": _coef(q, q ** float(k) * a, (l - k + 1, half_), (l + k + 1, half_),
                           (2, half_), (2 * l + 1, -half_), (2 * l + 2, -half_)),
            "beta0": b * (1.0 - _coef(q, q ** float(l + k + 1), (l - k, 1), (2, 1), (2 * l, -1))),
        }
        am = self.alpha_plus(l - 1)
        out["alpha-"] = 0.0 if l - 1 < self.j else _coef(
            q, -q ** float(l + k + 1) * am, (l - k - 1, half_), (l - k, half_),
            (2 * l - 1, -half_), (2 * l, -half_))
        return out


def _beta_closed(l: Fraction, j: Fraction, branch: int, ctx: ParamContext) -> float:
    q = ctx.qf
    if ctx.is_inf:
        return branch * _coef(q, 1.0 / q, (2, 1), (2 * j, 1), (2 * l + 2, -1)) if j else 0.0
    lp, lm = ctx.lam_pm_f(branch), ctx.lam_pm_f(-branch)
    if ctx.is_zero:
        lp, lm = (1.0, 0.0) if branch > 0 else (0.0, 1.0)
    val = _br(2 * j, q) * (lp / q ** 2 - lm) - (1 - q ** -2) * _br(l - j, q) * _br(l + j + 1, q)
    return val / _br(2 * l + 2, q)


def _alpha_sq_from_beta(l: Fraction, beta: float, ctx: ParamContext) -> float:
    """|alpha^+(l,l)|^2 from the alpha-beta relation."""
    q = ctx.qf
    b2 = _br(2, q)
    rho = b2 * b2 if ctx.is_inf else 1.0 + b2 * b2 * ctx.rf
    lin = 0.0 if ctx.is_inf else (1 - q * q) * beta
    return _br(2 * l + 2, q) / _br(2 * l + 3, q) / b2 * (rho - lin - q * q * beta * beta)


def _alpha_closed(l: Fraction, j: Fraction, branch: int, ctx: ParamContext) -> float:
    q = ctx.qf
    pref = math.sqrt(_br(2, q) / (_br(2 * l + 3, q) * _br(2 * l + 2, q)))
    if ctx.is_inf:
        return pref * math.sqrt(_br(2 * (l + j + 1), q) * _br(2 * (l - j + 1), q))
    c = ctx.rf
    inner = ((1 / q - q) * _br(l - j + 1, q) * _br(l + j + 1, q) / 2
             + branch * _br(2 * j, q) * math.sqrt(c + 0.25))
    rad = _br(2 * l + 2, q) ** 2 * (c + 0.25) - inner * inner
    return pref * math.sqrt(max(rad, 0.0))


def build_coeffs(j, branch: int, L, ctx: ParamContext) -> CoeffTable:
    """alpha^+(l,l) and beta^0(l,l) for ``|j| <= l <= L`` on the given branch.

    ``beta^0`` is taken from its closed form and ``alpha^+`` from the
    alpha-beta relation; the closed form for ``alpha^+`` is kept as an
    independent cross-check.
    """
    j, L = abs(half(j)), half(L)
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    if L < j:
        raise ValueError(f"L={L} must be >= |j|={j}")
    q = ctx.qf
    pert = float(ctx.perturb)
    alpha, beta, closed = {}, {}, {}
    l = j
    while l <= L:
        b = _beta_closed(l, j, branch, ctx)
        a2 = _alpha_sq_from_beta(l, b, ctx)
        if a2 < -1e-12:
            raise ValueError(f"negative |alpha^+({l},{l})|^2 = {a2:.3e}; parameters out of range")
        beta[l] = b
        alpha[l] = math.sqrt(max(a2, 0.0))
        closed[l] = _alpha_closed(l, j, branch, ctx)
        l += 1
    if pert:
        alpha[j] *= 1.0 + pert
    tab = CoeffTable(j, branch, L, ctx, alpha, beta, closed, {})
    tab.checks = _coeff_identities(tab)
    return tab


def _coeff_identities(tab: CoeffTable) -> dict:
    """Residuals of the coefficient identities, relative to the size of their terms."""
    ctx, q = tab.ctx, tab.ctx.qf
    b2 = _br(2, q)
    rho = b2 * b2 if ctx.is_inf else 1.0 + b2 * b2 * ctx.rf
    lin = 0.0 if ctx.is_inf else 1.0
    rel, rel0, cross = 0.0, 0.0, 0.0
    for l, a in tab.alpha.items():
        b = tab.beta[l]
        terms = (_br(2 * l + 3, q) / _br(2 * l + 2, q) * a * a,
                 -rho / b2, lin * (1 - q * q) * b / b2, q * q * b * b / b2)
        rel = max(rel, abs(sum(terms)) / max(1.0, *map(abs, terms)))
        am = tab.alpha_plus(l - 1)
        lhs0 = b2 * _br(2 * l + 1, q) * am * am
        if l == 0:
            terms0 = (lhs0, -lin * (1 - q * q) * _br(2, q) * b)
        else:
            terms0 = (lhs0, -_br(2 * l, q) * rho, -lin * (1 - q * q) * _br(2 * l + 2, q) * b,
                      _br(2 * l + 2, q) ** 2 / _br(2 * l, q) * q * q * b * b)
        rel0 = max(rel0, abs(sum(terms0)) / max(1.0, *map(abs, terms0)))
        cross = max(cross, abs(a - tab.alpha_closed[l]) / max(1.0, abs(a)))
    return {"alpha_beta_relation": rel, "beta_recursion": rel0, "alpha_closed_form": cross,
            "beta00": abs(tab.beta[Fraction(0)]) if Fraction(0) in tab.beta else 0.0}


def check_coeffs(tab: CoeffTable, tol: float = 1e-12, cross_tol: float = 1e-10) -> CheckReport:
    c = tab.checks
    ok = c["alpha_beta_relation"] <= tol and c["beta_recursion"] <= tol and c["beta00"] <= tol
    flagged = c["alpha_closed_form"] > cross_tol
    return CheckReport("coefficient_identities", bool(ok),
                       params={**tab.ctx.to_json(), "j": str(tab.j), "branch": tab.branch,
                               "L": str(tab.L)},
                       residual=max(c["alpha_beta_relation"], c["beta_recursion"], c["beta00"]),
                       tol=tol,
                       details={**c, "alpha_closed_form_flagged": flagged})


def _label_branch(j: Fraction) -> tuple:
    """Signed label -> (|j|, branch): pi_j = pi^+_j for j >= 0, pi^-_{-j} for j < 0."""
    return (abs(j), 1 if j >= 0 else -1)


def build_pi_j(j, L, ctx: ParamContext, branch: int | None = None) -> TruncatedRep:
    """pi_j on the spin levels ``|j| <= l <= L``.

    ``j`` is the signed label; ``branch`` overrides the sign (needed only
    for the coincident pair at ``j = 0``).
    """
    j, L = half(j), half(L)
    aj, br = _label_branch(j)
    if branch is not None:
        br = branch
    if L < aj or (L - aj).denominator != 1:
        raise ValueError(f"L={L} must be >= |j| and differ from |j| by an integer")
    q = ctx.qf
    tab = build_coeffs(aj, br, L, ctx)
    labels = []
    l = aj
    while l <= L:
        labels += [(l, k) for k in _ks(l)]
        l += 1
    n = len(labels)
    idx = {lab: i for i, lab in enumerate(labels)}
    gens = _uq_blocks(labels, q)
    X1, X0, Xm = np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n))
    h = Fraction(1, 2)

    def put(M, target, col, val):
        if target in idx and val != 0.0:
            M[idx[target], col] += val

    for i, (l, k) in enumerate(labels):
        a, b = tab.alpha_plus(l), tab.beta0(l)
        am = tab.alpha_plus(l - 1)
        put(X1, (l + 1, k + 1), i, _coef(q, q ** float(-l + k) * a, (l + k + 1, h), (l + k + 2, h),
                                         (2 * l + 1, -h), (2 * l + 2, -h)))
        put(X1, (l, k + 1), i, _coef(q, -q ** float(k + 2) * b, (l - k, h), (l + k + 1, h),
                                     (2, h), (2 * l, -1)))
        if am:
            put(X1, (l - 1, k + 1), i, _coef(q, -q ** float(l + k + 1) * am, (l - k - 1, h),
                                             (l - k, h), (2 * l - 1, -h), (2 * l, -h)))
        put(X0, (l + 1, k), i, _coef(q, q ** float(k) * a, (l - k + 1, h), (l + k + 1, h), (2, h),
                                     (2 * l + 1, -h), (2 * l + 2, -h)))
        put(X0, (l, k), i, b * (1.0 - _coef(q, q ** float(l + k + 1), (l - k, 1), (2, 1),
                                            (2 * l, -1))))
        if am:
            put(X0, (l - 1, k), i, _coef(q, q ** float(k) * am, (l - k, h), (l + k, h), (2, h),
                                         (2 * l - 1, -h), (2 * l, -h)))
        put(Xm, (l + 1, k - 1), i, _coef(q, q ** float(l + k) * a, (l - k + 1, h), (l - k + 2, h),
                                         (2 * l + 1, -h), (2 * l + 2, -h)))
        put(Xm, (l, k - 1), i, _coef(q, q ** float(k) * b, (l - k + 1, h), (l + k, h), (2, h),
                                     (2 * l, -1)))
        if am:
            put(Xm, (l - 1, k - 1), i, _coef(q, -q ** float(-l + k - 1) * am, (l + k - 1, h),
                                             (l + k, h), (2 * l - 1, -h), (2 * l, -h)))
    s = math.sqrt(1 + q * q)
    gens["x1"], gens["x0"], gens["xm1"] = X1, X0, Xm
    gens["B"] = q / s * Xm
    gens["Bst"] = -X1 / s
    I = np.eye(n)
    gens["A"] = -X0 / (1 + q * q) if ctx.is_inf else (I - X0) / (1 + q * q)
    interior = np.array([lab[0] <= L - 2 for lab in labels])
    return TruncatedRep(f"pi_{j}", "cross_EFK", labels, gens, ctx, interior,
                        {"j": j, "branch": br, "L": L, "coeffs": tab})


# ----------------------------------------------------------------------------
# relation harness
def _abs_word(rep: TruncatedRep, w) -> np.ndarray:
    out = np.eye(rep.dim)
    for g in w:
        out = out @ np.abs(rep.gens[g])
    return out


def _rule_residual(rep: TruncatedRep, lhs: tuple, rhs: dict, cols: np.ndarray, ctx0) -> float:
    """max over interior columns of |(L - R) v| / max(1, ||L| v|, |c_w| ||w| v|).

    |w| is the product of the entrywise absolute values of the letters, the
    magnitude that bounds the rounding error of the matrix product.
    """
    if len(cols) == 0:
        return 0.0
    M = rep.word(lhs)[:, cols]
    scale = np.maximum(1.0, np.linalg.norm(_abs_word(rep, lhs)[:, cols], axis=0))
    for w, c in rhs.items():
        cw = ctx0.ev(c)
        T = cw * rep.word(w)[:, cols]
        scale = np.maximum(scale, abs(cw) * np.linalg.norm(_abs_word(rep, w)[:, cols], axis=0))
        M = M - T
    return float(np.max(np.linalg.norm(M, axis=0) / scale))


def adjointness_residual(rep: TruncatedRep, presentation=None) -> float:
    """max |M_g^T - M_{g*}| / max(1, |M_{g*}|) over single-letter involutions."""
    P = presentation or make_presentation(rep.presentation, rep.ctx.with_(perturb=0))
    out = 0.0
    for g, img in P.involution.items():
        if g not in rep.gens or len(img) != 1:
            continue
        (w, c), = img.items()
        if len(w) != 1 or w[0] not in rep.gens:
            continue
        ref = rep.ctx.ev(c) * rep.gens[w[0]]
        D = np.abs(rep.gens[g].T - ref) / np.maximum(1.0, np.abs(ref))
        out = max(out, float(np.max(D)))
    return out


def verify_relations(rep: TruncatedRep, tol: float = 1e-9, presentation: str | None = None
                     ) -> CheckReport:
    """Residual of every rewrite rule of the presentation on the interior labels.

    Residuals are taken relative to the largest term of the rule applied to
    the same basis vector, since the truncations of A^-1 and Y^-1 grow
    geometrically along the grading.

    Rules mentioning a generator absent from ``rep`` are listed as skipped.
    The adjointness defect of the generator matrices is folded into the
    residual.
    """
    t0 = time.perf_counter()
    ctx0 = rep.ctx.with_(perturb=0)
    P = make_presentation(presentation or rep.presentation, ctx0)
    cols = np.nonzero(rep.interior)[0]
    todo, skipped = [], []
    for lhs, rhs in P.rules.items():
        letters = set(lhs) | {g for w in rhs for g in w}
        if letters <= set(rep.gens):
            todo.append((lhs, rhs))
        else:
            skipped.append(" ".join(lhs))
    with ThreadPoolExecutor(max_workers=_threads(rep.ctx)) as ex:
        vals = list(ex.map(lambda lr: _rule_residual(rep, lr[0], lr[1], cols, ctx0), todo))
    per_rule = {" ".join(lhs): v for (lhs, _), v in zip(todo, vals)}
    adj = adjointness_residual(rep, P)
    res = max([adj] + vals)
    return residual_report(f"relations[{rep.name}|{P.name}]", res, tol,
                           params={**rep.ctx.to_json(), **{k: str(v) for k, v in rep.meta.items()
                                                           if k != "coeffs"}},
                           basis_size=rep.dim,
                           details={"rules": per_rule, "skipped": skipped, "adjointness": adj,
                                    "interior": int(len(cols)),
                                    "elapsed": time.perf_counter() - t0})


def corrupted_control(rep: TruncatedRep, g: str = "x1", factor: float = 1.1) -> CheckReport:
    """Negative control: scale the first nonzero entry of ``g`` and re-verify.

    The sphere generators are re-derived from the corrupted x-matrix; the
    report passes when the harness sees a residual above 1e-3.
    """
    gens = {k: v.copy() for k, v in rep.gens.items()}
    M = gens[g]
    rows, cols = np.nonzero(M)
    M[rows[0], cols[0]] *= factor
    if g == "x1":
        gens["Bst"] = -M / math.sqrt(1 + rep.ctx.qf ** 2)
    bad = TruncatedRep(rep.name + "~", rep.presentation, rep.labels, gens, rep.ctx, rep.interior,
                       rep.meta)
    r = verify_relations(bad, tol=1e-3)
    return CheckReport("harness_sensitivity", not r.passed, residual=r.residual, tol=1e-3,
                       details={"corrupted": g, "factor": factor})


# ----------------------------------------------------------------------------
# sphere, Y_r and the decoupled families
def c_pm(sign: int, n: int, ctx: ParamContext) -> float:
    """Weight of B on the sign-branch of the sphere representation."""
    q = ctx.qf
    if ctx.is_inf:
        return math.sqrt(max(1.0 - q ** (4 * n), 0.0))
    lam = ctx.lam_pm_f(sign) if not ctx.is_zero else 1.0
    t = lam * q ** (2 * n)
    return math.sqrt(max(ctx.rf + t - t * t, 0.0))


def _lam_sign(sign: int, ctx: ParamContext) -> float:
    if ctx.is_zero:
        return 1.0 if sign > 0 else 0.0
    return ctx.lam_pm_f(sign)


def build_sigma_pm(sign: int, N: int, ctx: ParamContext) -> TruncatedRep:
    """Irreducible representation of the sphere on eta_0..eta_{N-1} (sign branch)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if sign < 0 and ctx.is_zero:
        raise ValueError("the - branch does not exist for r = 0")
    q = ctx.qf
    pert = float(ctx.perturb)
    lam = _lam_sign(sign, ctx)
    A = np.diag([lam * q ** (2 * n) for n in range(N)])
    B = np.zeros((N, N))
    for n in range(1, N):
        B[n - 1, n] = c_pm(sign, n, ctx) * (1 + pert if n == 1 else 1.0)
    gens = {"A": A, "B": B, "Bst": B.T.copy()}
    _with_inverse(gens, "A", "Ainv")
    interior = np.arange(N) <= N - 2
    return TruncatedRep(f"sigma_{'+' if sign > 0 else '-'}", "O_S2qr_localized",
                        list(range(N)), gens, ctx, interior, {"sign": sign, "N": N})


def build_Yr_rep(Y0: float, N: int, ctx: ParamContext) -> TruncatedRep:
    """The pure-shift representation of Y_r with parameter ``Y0`` on zeta_0..zeta_{N-1}."""
    Y0 = float(Y0)
    if Y0 == 0.0:
        raise ValueError("Y0 must be nonzero (Y has trivial kernel)")
    q = ctx.qf
    r = float(ctx.r_rel)
    pert = float(ctx.perturb)
    X = np.zeros((N, N))
    for n in range(N - 1):
        X[n + 1, n] = lambda_n(n + 1, q) * math.sqrt(q ** (2 * n) * Y0 * Y0 + r)
    X[1, 0] *= 1 + pert
    gens = {"X": X, "Xst": X.T.copy(), "Y": np.diag([q ** (2 * n) * Y0 for n in range(N)])}
    _with_inverse(gens, "Y", "Yinv")
    interior = np.arange(N) <= N - 2
    return TruncatedRep("Yr_shift", "Yr", list(range(N)), gens, ctx, interior,
                        {"Y0": Y0, "N": N})


def xvn_residual(rep: TruncatedRep, n_max: int = 8) -> float:
    """|X|^2 v^n - v^n (q^{2n}|X|^2 + (1-q^{2n})(q^{2n+2}Y^2 + r)) on the shift model."""
    q = rep.ctx.qf
    r = float(rep.ctx.r_rel)
    N = rep.dim
    X, Y = rep.gens["X"], rep.gens["Y"]
    # v is the isometric part of X: the plain shift
    v = np.zeros((N, N))
    for m in range(N - 1):
        v[m + 1, m] = 1.0
    absX2 = X.T @ X
    I = np.eye(N)
    out = 0.0
    for n in range(n_max + 1):
        vn = np.linalg.matrix_power(v, n)
        rhs = vn @ (q ** (2 * n) * absX2 + (1 - q ** (2 * n)) * (q ** (2 * n + 2) * Y @ Y + r * I))
        D = absX2 @ vn - rhs
        cols = [m for m in range(N) if m + n <= N - 2]
        if cols:
            out = max(out, float(np.max(np.abs(D[:, cols]))))
    return out


def _I_coeffs(sign: int, H: float, n: int, m: int, ctx: ParamContext) -> tuple:
    """(E to (n,m-1), E to (n+1,m), F to (n,m+1), F to (n-1,m)).

    Both E and F carry the overall sign of lam_+-: inserting the shift model
    into F = q^-3/2 lam^-1 (X - qB) K A^-1 produces the factor lam_+-/|lam_+-|,
    which is invisible on the + family.
    """
    q = ctx.qf
    r = ctx.rf
    lam = _lam_sign(sign, ctx)
    lq = q - 1 / q
    pref = math.copysign(q ** -0.5 / lq, lq * lam)
    li2 = lam ** -2

    def sq(x):
        return math.sqrt(max(x, 0.0))

    e1 = pref * q ** -n * lambda_n(m, q) * sq(li2 * q ** (-2 * m) * r + H ** -4) * H if m else 0.0
    e2 = -pref * q ** -m * sq(li2 * q ** (-2 * n - 2) * r + 1 / lam - q ** (2 * n + 2)) * H
    f1 = pref * q ** -n * lambda_n(m + 1, q) * sq(li2 * q ** (-2 * m - 2) * r + H ** -4) * H
    f2 = -pref * q ** -m * sq(li2 * q ** (-2 * n) * r + 1 / lam - q ** (2 * n)) * H if n else 0.0
    return e1, e2, f1, f2


def build_I_pm(sign: int, H: float, N: int, M: int, ctx: ParamContext) -> TruncatedRep:
    """The family (I)_{sign,H} with scalar H on eta_{nm}, n < N, m < M."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if ctx.is_inf:
        raise ValueError("the (I) formulas are stated for finite r")
    if sign < 0 and ctx.is_zero:
        raise ValueError("only the + family exists for r = 0")
    H = float(H)
    if H == 0.0:
        raise ValueError("H must be invertible")
    q = ctx.qf
    pert = float(ctx.perturb)
    labels = [(n, m) for n in range(N) for m in range(M)]
    idx = {lab: i for i, lab in enumerate(labels)}
    d = len(labels)
    G = {g: np.zeros((d, d)) for g in ("A", "B", "E", "F", "K")}
    lam = _lam_sign(sign, ctx)
    for i, (n, m) in enumerate(labels):
        G["A"][i, i] = lam * q ** (2 * n)
        G["K"][i, i] = q ** (n - m) * H
        if n >= 1:
            G["B"][idx[(n - 1, m)], i] = c_pm(sign, n, ctx)
        e1, e2, f1, f2 = _I_coeffs(sign, H, n, m, ctx)
        if (n, m - 1) in idx:
            G["E"][idx[(n, m - 1)], i] = e1 * (1 + pert if (n, m) == (0, 1) else 1.0)
        if (n + 1, m) in idx:
            G["E"][idx[(n + 1, m)], i] = e2
        if (n, m + 1) in idx:
            G["F"][idx[(n, m + 1)], i] = f1
        if (n - 1, m) in idx:
            G["F"][idx[(n - 1, m)], i] = f2
    G["Bst"] = G["B"].T.copy()
    _with_inverse(G, "A", "Ainv")
    _with_inverse(G, "K", "Kinv")
    interior = np.array([n <= N - 2 and m <= M - 2 for n, m in labels])
    return TruncatedRep(f"I_{'+' if sign > 0 else '-'},H", "cross_EFK", labels, G, ctx, interior,
                        {"sign": sign, "H": H, "N": N, "M": M})


def sigma_restriction_check(rep: TruncatedRep, tol: float = 1e-13) -> CheckReport:
    """The {A, B, B*} part of (I)_{+-,H} equals sigma_{+-} tensor identity."""
    sign, N, M = rep.meta["sign"], rep.meta["N"], rep.meta["M"]
    sig = build_sigma_pm(sign, N, rep.ctx.with_(perturb=0))
    I = np.eye(M)
    res = max(float(np.max(np.abs(rep.gens[g] - np.kron(sig.gens[g], I))))
              for g in ("A", "B", "Bst"))
    return residual_report("I_restricts_to_sigma", res, tol, basis_size=rep.dim)


# ----------------------------------------------------------------------------
# the chart representations rho_{j,+-}
def chart_Y0(j, sign: int, ctx: ParamContext) -> float:
    """Y0 = q^(+-2j+1) lam_+- of the chart with the given sign."""
    j = half(j)
    return ctx.qf ** (sign * 2 * float(j) + 1) * _lam_sign(sign, ctx)


def _chart_X(sign: int, Y0: float, k: int, ctx: ParamContext) -> float:
    """Weight of X from zeta_{nk} to zeta_{n,k+1}."""
    q = ctx.qf
    return lambda_n(k + 1, q) * math.sqrt(q ** (2 * k) * Y0 * Y0 + float(ctx.r_rel))


def build_rho_chart(j, sign: int, N: int, M: int, ctx: ParamContext) -> TruncatedRep:
    """rho_{j,sign} on zeta_{nk} (n < N, k < M) with K, E, F reconstructed from |Y|, |A|.

    K = q^(1/2) |Y|^(-1/2) |A|^(1/2), E = q^(-3/2) lam^-1 A^-1 K (X* - q B*) and
    F = q^(-3/2) lam^-1 (X - q B) K A^-1.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if sign < 0 and ctx.is_zero:
        raise ValueError("the - chart is empty for r = 0")
    j = half(j)
    q = ctx.qf
    pert = float(ctx.perturb)
    lam = _lam_sign(sign, ctx)
    Y0 = chart_Y0(j, sign, ctx)
    labels = [(n, k) for n in range(N) for k in range(M)]
    idx = {lab: i for i, lab in enumerate(labels)}
    d = len(labels)
    G = {g: np.zeros((d, d)) for g in ("A", "B", "X", "Y")}
    for i, (n, k) in enumerate(labels):
        G["A"][i, i] = lam * q ** (2 * n)
        G["Y"][i, i] = q ** (2 * k) * Y0
        if n >= 1:
            G["B"][idx[(n - 1, k)], i] = c_pm(sign, n, ctx)
        if (n, k + 1) in idx:
            G["X"][idx[(n, k + 1)], i] = _chart_X(sign, Y0, k, ctx) * (1 + pert if k == 0 else 1.0)
    G["Bst"], G["Xst"] = G["B"].T.copy(), G["X"].T.copy()
    _with_inverse(G, "A", "Ainv")
    _with_inverse(G, "Y", "Yinv")
    G["K"] = np.diag(q ** 0.5 * np.abs(np.diag(G["Y"])) ** -0.5 * np.abs(np.diag(G["A"])) ** 0.5)
    _with_inverse(G, "K", "Kinv")
    c = q ** -1.5 / (q - 1 / q)
    G["E"] = c * G["Ainv"] @ G["K"] @ (G["Xst"] - q * G["Bst"])
    G["F"] = c * (G["X"] - q * G["B"]) @ G["K"] @ G["Ainv"]
    interior = np.array([n <= N - 2 and k <= M - 2 for n, k in labels])
    return TruncatedRep(f"rho_{j},{'+' if sign > 0 else '-'}", "cross_decoupled_XY", labels, G,
                        ctx, interior, {"j": j, "sign": sign, "N": N, "M": M, "Y0": Y0})


def _safe_sqrt_ratio(num, den):
    """sqrt(num/den) where both are positive, 0 elsewhere (avoids nan * 0)."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    ok = (num > 0) & (den > 0)
    out = np.zeros(np.broadcast(num, den).shape)
    out[ok] = np.sqrt(num[ok] / den[ok])
    return out


def _chart_g(j: Fraction, sign: int, ctx: ParamContext):
    from .haar import Fn
    lp, lm = ctx.lam_pm_f(1), (0.0 if ctx.is_zero else ctx.lam_pm_f(-1))
    q4j = ctx.qf ** (4 * float(j))
    if sign < 0:
        return Fn(lambda t: _safe_sqrt_ratio(lp - t / q4j, lp - t), "g-")
    return Fn(lambda t: _safe_sqrt_ratio(q4j * t - lm, t - lm), "g+")


def _theta_norm(n: int, l: int, sign: int, ctx: ParamContext) -> float:
    """c_{nl} / gamma^(-1/2); gamma cancels from every matrix element."""
    q = ctx.qf
    lam = _lam_sign(sign, ctx)
    lp, lm = ctx.lam_pm_f(1), (0.0 if ctx.is_zero else ctx.lam_pm_f(-1))
    rng = range(0, -l) if l < 0 else range(1, l + 1)
    p = 1.0
    for m in rng:
        t = q ** (2 * (n - m if l < 0 else n + m)) * lam
        p *= (t - lm) * (lp - t)
    return q ** (-n - l) * p ** -0.5


def rho_action_functional(j, sign: int, ctx: ParamContext, n_max: int = 5, l_max: int = 5
                          ) -> dict:
    """Matrix elements of rho_{j,sign} on theta_{nl} from the function-algebra formulas.

    Each generator acts on the element c_{nl} chi_n(A) B^{#l} by left
    multiplication (A, B, B*) or by right multiplication with the chart
    function (X, X*, Y); the image is read off at every spectral point.
    Returns {(g, (n, l)): {(n', l'): coefficient}}.
    """
    from .haar import Fn, FuncElement
    j = half(j)
    q = ctx.qf
    lam = _lam_sign(sign, ctx)
    g = _chart_g(j, sign, ctx)
    Af, Bf, Bsf = FuncElement.A(ctx), FuncElement.B(ctx), FuncElement.Bst(ctx)
    gfun = FuncElement.fn(g, ctx)
    qy = q ** (sign * 2 * float(j) + 1)
    ops = {
        "A": lambda f: Af * f,
        "B": lambda f: Bf * f,
        "Bst": lambda f: Bsf * f,
        "X": lambda f: (f * Bf * gfun).scale(1 / q),
        "Xst": lambda f: (f * gfun * Bsf).scale(q),
        "Y": lambda f: (f * Af).scale(qy),
    }
    pts = np.array([lam * q ** (2 * n) for n in range(n_max + l_max + 3)])
    out = {}
    for n in range(n_max + 1):
        for l in range(-n, l_max + 1):
            theta = FuncElement.fn(Fn.chi_point(n, sign, ctx).scale(_theta_norm(n, l, sign, ctx)),
                                   ctx, l)
            for name, op in ops.items():
                img = op(theta)
                coeffs = {}
                for l2, F in img.terms.items():
                    vals = F(pts)
                    for n2 in np.nonzero(vals)[0]:
                        n2 = int(n2)
                        if l2 >= -n2:  # chi_n(A) B*^m is the zero element for m > n
                            coeffs[(n2, l2)] = float(vals[n2]) / _theta_norm(n2, l2, sign, ctx)
                out[(name, (n, l))] = coeffs
    return out


def rho_action_list(j, sign: int, n: int, l: int, ctx: ParamContext) -> dict:
    """The closed-form basis action on theta_{nl}: {g: {(n', l'): coefficient}}."""
    j = half(j)
    q = ctx.qf
    lam = _lam_sign(sign, ctx)
    Y0 = chart_Y0(j, sign, ctx)
    r = float(ctx.r_rel)
    out = {"A": {(n, l): lam * q ** (2 * n)},
           "B": {(n - 1, l + 1): c_pm(sign, n, ctx)} if n >= 1 else {},
           "Bst": {(n + 1, l - 1): c_pm(sign, n + 1, ctx)},
           "Y": {(n, l): lam * q ** (sign * 2 * float(j) + 1) * q ** (2 * (n + l))},
           "X": {(n, l + 1): lambda_n(n + l + 1, q) * math.sqrt(q ** (2 * (n + l)) * Y0 ** 2 + r)}}
    out["Xst"] = ({(n, l - 1): lambda_n(n + l, q) * math.sqrt(q ** (2 * (n + l - 1)) * Y0 ** 2 + r)}
                  if n + l >= 1 else {})
    return out


def _coeff_diff(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return max([abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys] + [0.0])


def rho_formula_check(j, sign: int, ctx: ParamContext, n_max: int = 5, l_max: int = 5,
                      tol: float = 1e-12) -> CheckReport:
    """Three routes to the chart action agree coefficient by coefficient.

    Route 1 applies the function-algebra formulas to theta_{nl}; route 2 is
    the closed-form list; route 3 reads the matrices of build_rho_chart
    after renaming zeta_{nk} = theta_{n,k-n}.
    """
    t0 = time.perf_counter()
    j = half(j)
    func = rho_action_functional(j, sign, ctx.with_(perturb=0), n_max, l_max)
    N, M = n_max + 2, n_max + l_max + 3
    rep = build_rho_chart(j, sign, N, M, ctx)
    worst = {"functional_vs_list": 0.0, "matrix_vs_list": 0.0}
    for n in range(n_max + 1):
        for l in range(-n, l_max + 1):
            lst = rho_action_list(j, sign, n, l, ctx.with_(perturb=0))
            col = rep.index[(n, n + l)]
            for g, want in lst.items():
                worst["functional_vs_list"] = max(worst["functional_vs_list"],
                                                  _coeff_diff(func[(g, (n, l))], want))
                M_g = rep.gens[g]
                got = {}
                for row in np.nonzero(M_g[:, col])[0]:
                    n2, k2 = rep.labels[row]
                    got[(n2, k2 - n2)] = float(M_g[row, col])
                worst["matrix_vs_list"] = max(worst["matrix_vs_list"], _coeff_diff(got, want))
    res = max(worst.values())
    return residual_report(f"rho_action[j={j},{'+' if sign > 0 else '-'}]", res, tol,
                           params={**ctx.to_json(), "j": str(j), "sign": sign},
                           details={**worst, "elapsed": time.perf_counter() - t0})


def rho_vs_products_check(rep: TruncatedRep, tol: float = 1e-12) -> CheckReport:
    """On O(S^2) (x) Y_r the chart is sigma (x) the shift model with Y0 = q^(+-2j+1) lam_+-."""
    sign, N, M, Y0 = rep.meta["sign"], rep.meta["N"], rep.meta["M"], rep.meta["Y0"]
    ctx0 = rep.ctx.with_(perturb=0)
    sig = build_sigma_pm(sign, N, ctx0)
    yr = build_Yr_rep(Y0, M, ctx0)
    res = 0.0
    for g in ("A", "B", "Bst"):
        res = max(res, float(np.max(np.abs(rep.gens[g] - np.kron(sig.gens[g], np.eye(M))))))
    for g in ("X", "Xst", "Y"):
        res = max(res, float(np.max(np.abs(rep.gens[g] - np.kron(np.eye(N), yr.gens[g])))))
    return residual_report("rho_is_sigma_tensor_shift", res, tol, basis_size=rep.dim,
                           params={"sign": sign, "Y0": Y0})


def rho_vs_I_check(rep: TruncatedRep, tol: float = 1e-10) -> CheckReport:
    """The reconstructed cross-product action equals (I)_{+-,H} with H = q^(-+j)."""
    j, sign, N, M = rep.meta["j"], rep.meta["sign"], rep.meta["N"], rep.meta["M"]
    H = rep.ctx.qf ** (-sign * float(j))
    ref = build_I_pm(sign, H, N, M, rep.ctx.with_(perturb=0))
    res = 0.0
    for g in ("A", "B", "Bst", "K", "E", "F"):
        D = (rep.gens[g] - ref.gens[g])[:, rep.interior]
        scale = max(1.0, float(np.max(np.abs(ref.gens[g][:, rep.interior]))))
        res = max(res, float(np.max(np.abs(D))) / scale)
    return residual_report("rho_equals_I", res, tol, basis_size=rep.dim,
                           params={"j": str(j), "sign": sign, "H": H})


def pidef_check(ctx: ParamContext, n_max: int = 5, l_max: int = 5, tol: float = 1e-12
                ) -> CheckReport:
    """For j = 0 the chart X is right multiplication by q^-1 B on both signs."""
    from .haar import Fn, FuncElement
    signs = (1,) if ctx.is_zero else (1, -1)
    res = 0.0
    for sign in signs:
        func = rho_action_functional(0, sign, ctx, n_max, l_max)
        q = ctx.qf
        Bf = FuncElement.B(ctx)
        lam = _lam_sign(sign, ctx)
        pts = np.array([lam * q ** (2 * n) for n in range(n_max + l_max + 3)])
        for n in range(n_max + 1):
            for l in range(-n, l_max + 1):
                c = _theta_norm(n, l, sign, ctx)
                theta = FuncElement.fn(Fn.chi_point(n, sign, ctx).scale(c), ctx, l)
                img = (theta * Bf).scale(1 / q)
                want = {}
                for l2, F in img.terms.items():
                    vals = F(pts)
                    for n2 in np.nonzero(vals)[0]:
                        if l2 >= -n2:
                            want[(int(n2), l2)] = (float(vals[n2])
                                                   / _theta_norm(int(n2), l2, sign, ctx))
                res = max(res, _coeff_diff(func[("X", (n, l))], want))
    return residual_report("pidef_right_multiplication", res, tol, params=ctx.to_json())


# ----------------------------------------------------------------------------
# tensor products and decomposition
def tensor_rep(pi: TruncatedRep, l) -> TruncatedRep:
    """pi (x) T_l: U_q acts through the coproduct, sphere generators act on the first factor."""
    l = half(l)
    T = build_Tl(l, pi.ctx.with_(perturb=0))
    I1, I2 = np.eye(pi.dim), np.eye(T.dim)
    G = {}
    for g, M in pi.gens.items():
        if g not in ("E", "F", "K", "Kinv"):
            G[g] = np.kron(M, I2)
    G["K"] = np.kron(pi.gens["K"], T.gens["K"])
    G["Kinv"] = np.kron(pi.gens["Kinv"], T.gens["Kinv"])
    G["E"] = np.kron(pi.gens["E"], T.gens["K"]) + np.kron(pi.gens["Kinv"], T.gens["E"])
    G["F"] = np.kron(pi.gens["F"], T.gens["K"]) + np.kron(pi.gens["Kinv"], T.gens["F"])
    labels = [a + (b[-1],) for a in pi.labels for b in T.labels]
    interior = np.kron(pi.interior, np.ones(T.dim, dtype=bool))
    meta = {k: v for k, v in pi.meta.items() if k != "coeffs"}
    meta["tensor_l"] = l + pi.meta.get("tensor_l", 0)
    return TruncatedRep(f"{pi.name}(x)T_{l}", pi.presentation, labels, G, pi.ctx, interior, meta)


def weights(rep: TruncatedRep) -> np.ndarray:
    """Half-integer weights m with K = q^m on the diagonal."""
    d = np.diag(rep.gens["K"])
    return np.round(2 * np.log(d) / math.log(rep.ctx.qf)) / 2


def highest_weight_spaces(rep: TruncatedRep, tol: float = 1e-9) -> dict:
    """{m: orthonormal columns spanning ker E on the weight-m space}."""
    w = weights(rep)
    E = rep.gens["E"]
    out = {}
    for m in sorted(set(w.tolist())):
        cols = np.nonzero(w == m)[0]
        rows = np.nonzero(w == m + 1)[0]
        if len(rows) == 0:
            basis = np.eye(len(cols))
        else:
            sub = E[np.ix_(rows, cols)]
            _, s, vt = np.linalg.svd(sub)
            scale = max(1.0, s[0] if len(s) else 0.0)
            rank = int(np.sum(s > tol * scale))
            basis = vt[rank:].T
        if basis.shape[1]:
            V = np.zeros((rep.dim, basis.shape[1]))
            V[cols] = basis
            out[m] = V
    return out


class DecompositionError(ValueError):
    pass


def _label(jp: Fraction, branch: int) -> Fraction:
    return jp if branch > 0 else -jp


def _candidates(m: Fraction, ctx: ParamContext) -> dict:
    """{signed label: beta0(m,m)} for every j' with |j'| <= m."""
    out = {}
    jp = m - int(m)
    while jp <= m:
        for br in (1, -1):
            lab = _label(jp, br)
            if lab not in out:
                out[lab] = _beta_closed(m, jp, br, ctx)
        jp += 1
    return out


def decompose(rep: TruncatedRep, rel_tol: float = 1e-6, details: bool = False):
    """Components pi_{j'} of an integrable-type model, with multiplicities.

    For each resolved spin m the compression of x0 to the highest-weight
    vectors of weight m is diagonalized; every eigenvalue must match one
    beta0(m,m)_{j'} within ``rel_tol``.  A component pi_{j'} first appears
    at spin |j'|; the counts at higher spins are cross-checked.

    The beta0 values crowd together as m grows.  A spin at which some
    eigenvalue is within ``rel_tol`` of two candidates is only accepted when
    it carries no new component (its dimension equals the number of
    components already found); otherwise the match is ambiguous.
    """
    ctx = rep.ctx.with_(perturb=0)
    L = rep.meta["L"]
    lt = rep.meta.get("tensor_l", Fraction(0))
    m_res = L - lt - 1
    hw = highest_weight_spaces(rep)
    x0 = rep.gens["x0"]
    found: dict = {}
    info = {"resolved_max_spin": str(m_res), "levels": {}, "min_margin": math.inf,
            "max_match_error": 0.0, "unresolved_spins": [], "unseparated_spins": []}
    for m, V in sorted(hw.items()):
        mf = Fraction(m).limit_denominator(2)
        if mf > m_res:
            info["unresolved_spins"].append(str(mf))
            continue
        C = V.T @ x0 @ V
        ev = np.linalg.eigvalsh(0.5 * (C + C.T))
        cand = _candidates(mf, ctx)
        labs = sorted(cand)
        vals = np.array([cand[k] for k in labs])
        floor = max(1e-8, 1e-3 * float(np.max(np.abs(vals))))  # x0 has norm about 1
        counts: dict = {}
        margins, errs = [], []
        for e in ev:
            err = np.abs(vals - e) / np.maximum(np.abs(vals), floor)
            order = np.argsort(err)
            best = order[0]
            if err[best] > rel_tol:
                raise DecompositionError(
                    f"x0 eigenvalue {e:.17g} at spin {mf} matches no beta0 value "
                    f"(closest relative error {err[best]:.3e})")
            margins.append(float(err[order[1]]) if len(order) > 1 else math.inf)
            errs.append(float(err[best]))
            counts[labs[best]] = counts.get(labs[best], 0) + 1
        old = sum(c for lab, c in found.items() if abs(lab) < mf)
        if min(margins) <= rel_tol:
            if len(ev) != old:
                raise DecompositionError(
                    f"ambiguous match at spin {mf}: margin {min(margins):.3e} with "
                    f"{len(ev) - old} new component(s)")
            info["unseparated_spins"].append(str(mf))
            continue
        info["min_margin"] = min(info["min_margin"], min(margins))
        info["max_match_error"] = max(info["max_match_error"], max(errs))
        info["levels"][str(mf)] = {str(k): v for k, v in sorted(counts.items())}
        for lab, c in counts.items():
            if abs(lab) == mf:
                found[lab] = found.get(lab, 0) + c
            elif c != found.get(lab, 0):
                raise DecompositionError(
                    f"label {lab} occurs {c} times at spin {mf} but {found.get(lab, 0)} "
                    f"times at its lowest spin")
        for lab, c in found.items():
            if abs(lab) < mf and counts.get(lab, 0) != c:
                raise DecompositionError(f"component {lab} lost at spin {mf}")
    out = sorted(found.items())
    return (out, info) if details else out


def uq_spectrum(rep: TruncatedRep) -> dict:
    """{spin: multiplicity} of the restriction to U_q (dimension of ker E per weight)."""
    return {Fraction(m).limit_denominator(2): V.shape[1]
            for m, V in highest_weight_spaces(rep).items()}


def multiplicity_one_check(pi: TruncatedRep) -> CheckReport:
    """pi_j restricted to U_q is T_{|j|} + T_{|j|+1} + ... each once."""
    aj, L = abs(pi.meta["j"]), pi.meta["L"]
    spec = uq_spectrum(pi)
    want = {aj + n: 1 for n in range(int(L - aj) + 1)}
    ok = spec == want
    return CheckReport("multiplicity_one", ok, params={"j": str(pi.meta["j"]), "L": str(L)},
                       details={"spins": {str(k): v for k, v in sorted(spec.items())}})


def weight_grading_check(pi: TruncatedRep, tol: float = 1e-12) -> CheckReport:
    """x1 raises the K-eigenvalue by q: K x1 = q x1 K (x0 and x_-1 likewise)."""
    q = pi.ctx.qf
    K = pi.gens["K"]
    res = 0.0
    for g, f in (("x1", q), ("x0", 1.0), ("xm1", 1 / q)):
        M = pi.gens[g]
        D = K @ M - f * M @ K
        res = max(res, float(np.max(np.abs(D))) / max(1.0, float(np.max(np.abs(M)))))
    return residual_report("weight_grading", res, tol, params={"j": str(pi.meta["j"])})


def cg_vector(rep: TruncatedRep) -> np.ndarray:
    """The spin-(|j|-1/2) highest-weight vector of pi_j (x) T_{1/2} in closed form."""
    j = abs(rep.meta["j"])
    if j == 0:
        raise ValueError("needs |j| >= 1/2")
    q = rep.ctx.qf
    h = Fraction(1, 2)
    v = (q ** 0.5 * _br(2 * j, q) ** 0.5 * rep.vector((j, j, -h))
         - q ** float(-j) * rep.vector((j, j - 1, h)))
    return v / _br(2 * j + 1, q) ** 0.5


def cg_expectation_closed(j, branch: int, ctx: ParamContext) -> float:
    j = abs(half(j))
    q = ctx.qf
    return (_br(2 * j + 2, q) * _br(2 * j - 1, q) / _br(2 * j + 1, q) / _br(2 * j, q)
            * _beta_closed(j, j, branch, ctx))


def cg_check(j, ctx: ParamContext, L=None, tol: float = 1e-8) -> CheckReport:
    """E kills the closed-form vector, which is a unit vector with the closed-form x0 expectation."""
    j = half(j)
    L = half(L) if L is not None else abs(j) + 4
    pi = build_pi_j(j, L, ctx)
    rep = tensor_rep(pi, Fraction(1, 2))
    v = cg_vector(rep)
    Ev = float(np.linalg.norm(rep.gens["E"] @ v))
    nrm = abs(float(v @ v) - 1.0)
    got = float(v @ rep.gens["x0"] @ v)
    want = cg_expectation_closed(j, pi.meta["branch"], ctx.with_(perturb=0))
    err = abs(got - want) / max(1.0, abs(want))
    hw = highest_weight_spaces(rep).get(float(abs(j) - Fraction(1, 2)))
    span = abs(1.0 - float(np.linalg.norm(hw.T @ v))) if hw is not None and hw.shape[1] == 1 else 1.0
    res = max(Ev, nrm, err, span)
    return residual_report(f"cg_vector[j={j}]", res, tol, basis_size=rep.dim,
                           params={**ctx.to_json(), "j": str(j)},
                           details={"E_v": Ev, "norm_defect": nrm, "expectation": got,
                                    "closed_form": want, "span_defect": span})


# ----------------------------------------------------------------------------
# Haar-side model of the line-bundle representation
def equivalence_pi_vs_bundle(j, L, ctx: ParamContext, tol: float = 1e-8) -> CheckReport:
    """Matrix elements of x0, x1 on the orthonormalized ladder vectors of the bundle.

    The vectors live in O(SU_q(2)); inner products are exact Haar values
    h(y^* x) evaluated at the end.  They are compared entrywise with pi_j.
    """
    from .bundle import build_basis, h_product
    from .hopf import embed_sphere_generators, suq2
    t0 = time.perf_counter()
    j, L = half(j), half(L)
    if abs(j) > 1 or L > abs(j) + 2:
        raise ValueError("supported range is |j| <= 1, L <= |j| + 2")
    ctx0 = ctx.with_(perturb=0)
    basis = build_basis(j, L, ctx0)
    (xm, x0p, x1p), (fm, f0, f1) = embed_sphere_generators(ctx0)
    A = suq2()
    labels = basis.labels()
    pi = build_pi_j(j, L, ctx)
    res = 0.0
    sample = {}
    count = 0
    for g, poly, fac in (("x0", x0p, f0), ("x1", x1p, f1)):
        for lab in labels:
            xv = A.mul(poly, basis.vectors[lab])
            for lab2 in labels:
                if lab2[1] - lab[1] != (1 if g == "x1" else 0):
                    continue
                val = fac * ctx0.ev(h_product(xv, basis.vectors[lab2]))
                val /= basis.norm(*lab) * basis.norm(*lab2)
                ref = pi.entry(g, lab2, lab)
                res = max(res, abs(val - ref))
                count += 1
                if lab == lab2 or len(sample) < 4:
                    sample[f"{g}[{lab2[0]},{lab2[1]};{lab[0]},{lab[1]}]"] = val
    return residual_report(f"equivalence[j={j}]", res, tol, basis_size=len(labels),
                           params={**ctx.to_json(), "j": str(j), "L": str(L)},
                           details={"sample": sample, "compared": count,
                                    "elapsed": time.perf_counter() - t0})


# ----------------------------------------------------------------------------
# the decoupled generators inside pi_j
class _Combo:
    """A linear combination of words in fixed matrices, kept unexpanded.

    Evaluating on a set of columns also returns sum |c| | |M1| ... |Mk| e |, the
    magnitude that bounds the rounding error of the expanded sum.
    """

    def __init__(self, terms):
        self.terms = list(terms)

    def __add__(self, o: "_Combo") -> "_Combo":
        return _Combo(self.terms + o.terms)

    def __sub__(self, o: "_Combo") -> "_Combo":
        return _Combo(self.terms + [(-c, w) for c, w in o.terms])

    def __mul__(self, o) -> "_Combo":
        if isinstance(o, _Combo):
            return _Combo([(c1 * c2, w1 + w2) for c1, w1 in self.terms for c2, w2 in o.terms])
        return _Combo([(c * o, w) for c, w in self.terms])

    __rmul__ = __mul__

    def evaluate(self, cols: np.ndarray, dim: int) -> tuple:
        E = np.eye(dim)[:, cols]
        val = np.zeros_like(E)
        mag = np.zeros(len(cols))
        for c, w in self.terms:
            v, a = E, E
            for M in reversed(w):
                v = M @ v
                a = np.abs(M) @ a
            val += c * v
            mag += abs(c) * np.linalg.norm(a, axis=0)
        return val, mag


def _combo_residual(expr: _Combo, cols: np.ndarray, dim: int) -> float:
    if len(cols) == 0:
        return 0.0
    val, mag = expr.evaluate(cols, dim)
    return float(np.max(np.linalg.norm(val, axis=0) / np.maximum(1.0, mag)))


def decoupled_generators(pi: TruncatedRep, expanded: bool = False) -> dict:
    """X = q^(3/2) lam F K^-1 A + q B, X* = X^T, Y = q K^-2 A, all inside pi_j."""
    q = pi.ctx.qf
    lam = q - 1 / q
    G = pi.gens
    X = _Combo([(q ** 1.5 * lam, (G["F"], G["Kinv"], G["A"])), (q, (G["B"],))])
    Xst = _Combo([(q ** 1.5 * lam, (G["A"].T, G["Kinv"].T, G["F"].T)), (q, (G["B"].T,))])
    Y = _Combo([(q, (G["Kinv"], G["Kinv"], G["A"]))])
    out = {"X": X, "Xst": Xst, "Y": Y}
    if expanded:
        return out
    n = pi.dim
    return {k: v.evaluate(np.arange(n), n)[0] for k, v in out.items()}


def _block_abs_sqrt(M: np.ndarray, w: np.ndarray, ref: np.ndarray | None = None,
                    cut: float = 1e-6) -> tuple:
    """|M|^(1/2) for a symmetric M commuting with the weight grading, and a projector.

    The projector is onto the eigenvectors of ``ref`` (default M) whose
    eigenvalue exceeds ``cut`` times the block norm: the square root turns
    rounding errors of eigenvalues near zero (truncation artifacts) into
    errors of size sqrt(eps).
    """
    out = np.zeros_like(M)
    P = np.zeros_like(M)
    ref = M if ref is None else ref
    for m in sorted(set(w.tolist())):
        idx = np.nonzero(w == m)[0]
        ix = np.ix_(idx, idx)
        ev, U = np.linalg.eigh(0.5 * (M[ix] + M[ix].T))
        out[ix] = (U * np.sqrt(np.abs(ev))) @ U.T
        rv, V = np.linalg.eigh(0.5 * (ref[ix] + ref[ix].T))
        keep = np.abs(rv) >= cut * max(1e-300, float(np.max(np.abs(rv))))
        P[ix] = V[:, keep] @ V[:, keep].T
    return out, P


def adjoint_reconstruction_check(j, L, ctx: ParamContext, tol: float = 1e-9,
                                 spec_tol: float = 1e-8, n_check: int = 3, m_window: float = 2,
                                 L_spectral=None) -> CheckReport:
    """The decoupled picture reconstructed inside pi_j.

    * A K^-1 E = q^-3/2 lam^-1 (X* - q B*) and A F K^-1 = q^-3/2 lam^-1 (X - q^-1 B),
      with X from the F K^-1 A form and X* = X^T;
    * |Y|^(1/2) K = q^(1/2) |A|^(1/2), |A|^(1/2) K^-1 = q^(-1/2) |Y|^(1/2), and K equals
      q^(1/2) |Y|^(-1/2) |A|^(1/2);
    * X, X* commute with A, B, B* and satisfy the Y_r relations;
    * per weight, the top of the Y-spectrum is q^(2k) q^(+-2j+1) lam_+-, and the
      moduli of X and B between the joint eigenvectors of A and Y are those of
      rho_{j,-} + rho_{j,+}.

    The identities are measured on pi_j truncated at ``L``.  The spectral
    part uses a second truncation ``L_spectral`` (default |j| + 22): it looks
    at the weights |m| <= ``m_window`` and the top ``n_check`` eigenvalues of
    each sign, which need many spin levels to converge, whereas the deep
    levels carry rounding errors that grow by about 1/q^2 per level in
    the identities.
    """
    t0 = time.perf_counter()
    j, L = half(j), half(L)
    L_spectral = half(L_spectral) if L_spectral is not None else abs(j) + 22
    pi = build_pi_j(j, L, ctx)
    q = pi.ctx.qf
    lam = q - 1 / q
    G = dict(pi.gens)
    D = decoupled_generators(pi, expanded=True)
    G.update({k: v.evaluate(np.arange(pi.dim), pi.dim)[0] for k, v in D.items()})
    cols = np.nonzero(pi.interior)[0]
    n = pi.dim
    c = q ** -1.5 / lam

    def W(*ms):
        return _Combo([(1.0, tuple(G[m] for m in ms))])

    def res(expr):
        return _combo_residual(expr, cols, n)

    def rel(Lm, Rm):
        Dm = (Lm - Rm)[:, cols]
        return float(np.max(np.linalg.norm(Dm, axis=0)
                            / np.maximum(1.0, np.linalg.norm(Rm[:, cols], axis=0))))

    X, Xst, Y = D["X"], D["Xst"], D["Y"]
    det = {}
    det["EX"] = res(W("A", "Kinv", "E") - c * (Xst - q * W("Bst")))
    det["FX"] = res(W("A", "F", "Kinv") - c * (X - (1 / q) * W("B")))
    comm = 0.0
    for x in (X, Xst):
        for g in ("A", "B", "Bst"):
            comm = max(comm, res(x * W(g) - W(g) * x))
    det["commutant"] = comm
    r_ = float(pi.ctx.r_rel)
    one = _Combo([(1.0, ())])
    det["Yr_relations"] = max(res(Y * X - q * q * X * Y), res(Y * Xst - q ** -2 * Xst * Y),
                              res(Xst * X - q * q * X * Xst - (1 - q * q) * (Y * Y + r_ * one)))
    w = weights(pi)
    sA, P = _block_abs_sqrt(G["A"], w)
    sY, _ = _block_abs_sqrt(G["Y"], w)
    det["KY"] = rel(sY @ G["K"] @ P, q ** 0.5 * sA @ P)
    det["KY_inverse"] = rel(sA @ G["Kinv"] @ P, q ** -0.5 * sY @ P)
    # K from |Y| and |A| in the joint eigenbasis of each weight block; eigenvalues of
    # the truncated A below 1e-6 of the block norm are truncation artifacts
    krec, offdiag = 0.0, 0.0
    for m in sorted(set(w.tolist())):
        idx = np.nonzero(w == m)[0]
        subA = G["A"][np.ix_(idx, idx)]
        ev, U = np.linalg.eigh(0.5 * (subA + subA.T))
        Yd = U.T @ G["Y"][np.ix_(idx, idx)] @ U
        Kd = U.T @ G["K"][np.ix_(idx, idx)] @ U
        keep = np.abs(ev) >= 1e-6 * max(1e-300, float(np.max(np.abs(ev))))
        y = np.diag(Yd)
        offdiag = max(offdiag, float(np.max(np.abs(Yd - np.diag(y)))) / max(1.0, float(np.max(np.abs(y)))))
        d = q ** 0.5 * np.abs(y[keep]) ** -0.5 * np.abs(ev[keep]) ** 0.5
        kd = np.diag(Kd)[keep]
        if len(d):
            krec = max(krec, float(np.max(np.abs(d - kd) / kd)))
    det["K_reconstruction"] = max(krec, offdiag)
    # spectral picture, weight by weight
    pi = build_pi_j(j, L_spectral, ctx)
    G = dict(pi.gens)
    G.update(decoupled_generators(pi))
    w = weights(pi)
    L = L_spectral
    signs = (1,) if pi.ctx.is_zero else (1, -1)
    spec_err, mod_err = 0.0, 0.0
    r = float(pi.ctx.r_rel)
    blocks = {}
    for m in sorted(set(w.tolist())):
        if m > -float(L) + 0.5 and m < float(L) - 0.5:  # keep the stable weights only
            idx = np.nonzero(w == m)[0]
            subA = G["A"][np.ix_(idx, idx)]
            ev, U = np.linalg.eigh(0.5 * (subA + subA.T))
            blocks[m] = (idx, ev, U)
    m_lim = float(m_window)
    for m, (idx, ev, U) in blocks.items():
        if abs(m) > m_lim:
            continue
        Yb = G["Y"][np.ix_(idx, idx)]
        yev = np.linalg.eigvalsh(0.5 * (Yb + Yb.T))
        for s in signs:
            ls = _lam_sign(s, pi.ctx)
            Y0 = chart_Y0(j, s, pi.ctx)
            n0 = max(0, int(round(m + s * float(j))))
            for n in range(n0, n0 + n_check):
                kp = n - m - s * float(j)
                want = q ** (2 * kp) * Y0
                spec_err = max(spec_err, float(np.min(np.abs(yev - want))) / abs(want))
                # modulus of X between joint eigenvectors
                if m - 1 in blocks and abs(m - 1) <= m_lim:
                    idx2, ev2, U2 = blocks[m - 1]
                    a = int(np.argmin(np.abs(ev - ls * q ** (2 * n))))
                    b = int(np.argmin(np.abs(ev2 - ls * q ** (2 * n))))
                    x = abs(float(U2[:, b] @ G["X"][np.ix_(idx2, idx)] @ U[:, a]))
                    xw = _chart_X(s, Y0, int(round(kp)), pi.ctx)
                    mod_err = max(mod_err, abs(x - xw) / max(1.0, xw))
                    if n >= 1:
                        b2 = int(np.argmin(np.abs(ev2 - ls * q ** (2 * n - 2))))
                        bb = abs(float(U2[:, b2] @ G["B"][np.ix_(idx2, idx)] @ U[:, a]))
                        mod_err = max(mod_err, abs(bb - c_pm(s, n, pi.ctx)))
    det["Y_spectrum"] = spec_err
    det["chart_moduli"] = mod_err
    keys = ("EX", "FX", "KY", "KY_inverse", "K_reconstruction", "commutant", "Yr_relations")
    ok = all(det[k] <= tol for k in keys) and spec_err <= spec_tol and mod_err <= spec_tol
    res = max(det[k] for k in keys)
    return CheckReport(f"adjoint_reconstruction[j={j}]", bool(ok),
                       params={**ctx.to_json(), "j": str(j), "L": str(L)}, residual=res, tol=tol,
                       basis_size=pi.dim,
                       details={**det, "L_spectral": str(L_spectral),
                                "elapsed": time.perf_counter() - t0})
