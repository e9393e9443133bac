"""Haar state on O(SU_q(2)) and the invariant state on the sphere function algebras.

The Haar state is obtained as the unique solution of the invariance
equations h(E|>x) = h(F|>x) = h(x<|E) = h(x<|F) = 0, h(1) = 1 on
monomials of bounded degree.  Weight invariance under K restricts the
support to the words b^n c^n.

Functions of A live on the spectrum {lam_+- q^(2n)}; an element of the
function algebra is a finite sum  sum_k f_k(A) B^{#k}  with B^{#k} = B^k
for k >= 0 and B*^{-k} for k < 0.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .hopf import act_left, act_right, suq2, uq
from .ncpoly import NCPoly
from .qcoeff import ONE, ZERO, ParamContext, Scalar, qnum
from .report import CheckReport, residual_report


# ----------------------------------------------------------------------------
# Haar state on O(SU_q(2))
def _normal_words(max_degree: int):
    """All PBW words b^j c^k a^i and b^j c^k d^i up to ``max_degree``."""
    for n in range(max_degree + 1):
        for j in range(n + 1):
            for k in range(n - j + 1):
                i = n - j - k
                base = ("b",) * j + ("c",) * k
                if i == 0:
                    yield base
                else:
                    yield base + ("a",) * i
                    yield base + ("d",) * i


def _biweight(w: tuple) -> tuple:
    """Twice the (left, right) K-weights of a monomial."""
    lw = sum(1 if g in "bd" else -1 for g in w)
    rw = sum(1 if g in "cd" else -1 for g in w)
    return lw, rw


def _bc_index(w: tuple):
    n = len(w) // 2
    if len(w) % 2 == 0 and w == ("b",) * n + ("c",) * n:
        return n
    return None


@dataclass
class HaarTable:
    """Values h(b^n c^n) of the Haar state, n <= max_degree/2."""

    max_degree: int
    values: dict = field(default_factory=dict)
    rank: int = 0
    n_equations: int = 0

    def __call__(self, x: NCPoly) -> Scalar:
        return self.state(x)

    def state(self, x: NCPoly) -> Scalar:
        A = suq2()
        x = A.normal_form(x)
        out = ZERO
        for w, c in x.terms.items():
            if len(w) > self.max_degree:
                n = _bc_index(w)
                if n is not None:
                    raise ValueError(f"degree {len(w)} exceeds Haar table bound {self.max_degree}")
                continue
            n = _bc_index(w)
            if n is not None:
                out = out + c * self.values[n]
        return out

    def to_json(self) -> dict:
        return {"max_degree": self.max_degree, "rank": self.rank,
                "equations": self.n_equations,
                "values": {" ".join(("b",) * n + ("c",) * n) or "1": v.to_json()
                           for n, v in sorted(self.values.items())}}


def _solve_exact(rows: list, n: int) -> tuple:
    """Row-reduce exact rows (lists of Scalars with a right-hand side) and solve."""
    basis: list = []  # (pivot, row)
    for row in rows:
        row = list(row)
        for piv, b in basis:
            if not row[piv].is_zero():
                f = row[piv]
                row = [x - f * y for x, y in zip(row, b)]
        piv = next((i for i in range(n) if not row[i].is_zero()), None)
        if piv is None:
            if not row[n].is_zero():
                raise ValueError("inconsistent invariance system")
            continue
        inv = row[piv].inv()
        row = [x * inv for x in row]
        new_basis = []
        for p2, b in basis:
            if not b[piv].is_zero():
                f = b[piv]
                b = [x - f * y for x, y in zip(b, row)]
            new_basis.append((p2, b))
        basis = new_basis + [(piv, row)]
        if len(basis) == n:
            break
    sol = [None] * n
    for piv, b in basis:
        sol[piv] = b[n]
    return sol, len(basis)


_TABLES: dict = {}


def build_haar_table(max_degree: int = 8) -> HaarTable:
    """Solve the invariance system for the Haar state up to ``max_degree``."""
    if max_degree > 24:
        raise ValueError("max_degree must be <= 24")
    if max_degree in _TABLES:
        return _TABLES[max_degree]
    U = uq()
    gens = [U.gen("E"), U.gen("F")]
    M = max_degree // 2
    nunk = M + 1
    eqs = []
    norm = [ONE] + [ZERO] * M + [ONE]
    eqs.append(norm)
    seen = 0
    A = suq2()
    for w in _normal_words(max_degree):
        # only words one E/F step away from weight (0, 0) can reach b^n c^n
        if _biweight(w) not in ((2, 0), (-2, 0), (0, 2), (0, -2)):
            continue
        x = NCPoly({w: ONE}, A)
        for g in gens:
            for y in (act_left(g, x), act_right(x, g)):
                row = [ZERO] * (nunk + 1)
                hit = False
                for w2, c in y.terms.items():
                    n = _bc_index(w2)
                    if n is not None and n <= M:
                        row[n] = row[n] + c
                        hit = True
                if hit:
                    eqs.append(row)
                    seen += 1
    # solve with the normalization first, then verify every equation
    sol, rank = _solve_exact(eqs, nunk)
    if rank < nunk or any(s is None for s in sol):
        raise ValueError(f"Haar invariance system is rank deficient ({rank} < {nunk})")
    for row in eqs:
        res = row[nunk] if row is norm else ZERO
        tot = sum((row[i] * sol[i] for i in range(nunk)), ZERO)
        if not (tot - res).is_zero():
            raise ValueError("Haar table violates an invariance equation")
    t = HaarTable(max_degree, {n: sol[n] for n in range(nunk)}, rank, len(eqs))
    _TABLES[max_degree] = t
    return t


def haar_state(x: NCPoly, table: HaarTable | None = None) -> Scalar:
    if table is None:
        table = build_haar_table(max(2, min(24, _even_ceil(x.degree()))))
    return table.state(x)


def _even_ceil(n: int) -> int:
    return n + (n % 2)


def inner(a: NCPoly, b: NCPoly, table: HaarTable | None = None) -> Scalar:
    """<a, b> = h(b* a)."""
    A = suq2()
    return haar_state(A.mul(A.star(b), a), table)


def check_haar_invariance(table: HaarTable) -> CheckReport:
    """Invariance residuals under E, F (both sides) and K on all words of the table."""
    t0 = time.perf_counter()
    U = uq()
    A = suq2()
    bad = 0
    n = 0
    for w in _normal_words(table.max_degree):
        x = NCPoly({w: ONE}, A)
        hx = table.state(x)
        for g in ("E", "F"):
            for y in (act_left(U.gen(g), x), act_right(x, U.gen(g))):
                n += 1
                if not table.state(y).is_zero():
                    bad += 1
        for y in (act_left(U.gen("K"), x), act_right(x, U.gen("K"))):
            n += 1
            if not (table.state(y) - hx).is_zero():
                bad += 1
    return CheckReport("haar_invariance", bad == 0, details={"checks": n, "violations": bad,
                                                              "rank": table.rank},
                       elapsed=time.perf_counter() - t0)


# ----------------------------------------------------------------------------
# functions on the spectrum of A
class Fn:
    """A real function of the spectral variable, vectorized over numpy arrays."""

    __slots__ = ("fn", "tag")

    def __init__(self, fn: Callable, tag: str = "f"):
        self.fn = fn
        self.tag = tag

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self.fn(t), dtype=float), t.shape).copy()

    def __add__(self, o: "Fn") -> "Fn":
        return Fn(lambda t, a=self, b=o: a(t) + b(t), f"({self.tag}+{o.tag})")

    def __sub__(self, o: "Fn") -> "Fn":
        return Fn(lambda t, a=self, b=o: a(t) - b(t), f"({self.tag}-{o.tag})")

    def __mul__(self, o: "Fn") -> "Fn":
        return Fn(lambda t, a=self, b=o: a(t) * b(t), f"{self.tag}*{o.tag}")

    def scale(self, c: float) -> "Fn":
        return Fn(lambda t, a=self: c * a(t), f"{c:g}*{self.tag}")

    def dilate(self, c: float) -> "Fn":
        """t -> f(c t)."""
        if c == 1.0:
            return self
        return Fn(lambda t, a=self: a(c * t), f"{self.tag}({c:g}A)")

    @staticmethod
    def const(c: float) -> "Fn":
        return Fn(lambda t: np.full(np.shape(t), float(c)), f"{c:g}")

    @staticmethod
    def poly(coeffs) -> "Fn":
        cs = [float(c) for c in coeffs]
        return Fn(lambda t: np.polynomial.polynomial.polyval(t, cs), f"poly{cs}")

    @staticmethod
    def ident() -> "Fn":
        return Fn(lambda t: t, "A")

    @staticmethod
    def chi(sign: int) -> "Fn":
        """Characteristic function of [0, inf) (sign=+1) or (-inf, 0) (sign=-1)."""
        if sign > 0:
            return Fn(lambda t: (t >= 0).astype(float), "chi+")
        return Fn(lambda t: (t < 0).astype(float), "chi-")

    @staticmethod
    def chi_point(n: int, sign: int, ctx: ParamContext) -> "Fn":
        """Indicator of the single spectral point lam_+- q^(2n)."""
        p = ctx.lam_pm_f(sign) * ctx.qf ** (2 * n)

        def f(t):
            return (np.abs(t - p) <= 1e-12 * max(1.0, abs(p))).astype(float)
        return Fn(f, f"chi_{n}{'+' if sign > 0 else '-'}")


def spectrum(ctx: ParamContext, N: int) -> list:
    """[(sign, n, t)] for the truncated spectrum of A, + branch first."""
    signs = (1,) if ctx.is_zero else (1, -1)
    return [(s, n, ctx.lam_pm_f(s) * ctx.qf ** (2 * n)) for s in signs for n in range(N)]


def _p_r(t, ctx: ParamContext):
    """B*B as a function of A: t - t^2 + r, or 1 - t^2 for r = inf."""
    if ctx.is_inf:
        return 1.0 - t * t
    return t - t * t + ctx.rf


# ----------------------------------------------------------------------------
class FuncElement:
    """sum_k f_k(A) B^{#k} in the function algebra of the sphere."""

    def __init__(self, terms: dict, ctx: ParamContext):
        self.terms = {int(k): f for k, f in terms.items()}
        self.ctx = ctx

    # constructors
    @classmethod
    def fn(cls, f: Fn, ctx: ParamContext, k: int = 0) -> "FuncElement":
        return cls({k: f}, ctx)

    @classmethod
    def one(cls, ctx: ParamContext) -> "FuncElement":
        return cls({0: Fn.const(1.0)}, ctx)

    @classmethod
    def A(cls, ctx: ParamContext) -> "FuncElement":
        return cls({0: Fn.ident()}, ctx)

    @classmethod
    def B(cls, ctx: ParamContext) -> "FuncElement":
        return cls({1: Fn.const(1.0)}, ctx)

    @classmethod
    def Bst(cls, ctx: ParamContext) -> "FuncElement":
        return cls({-1: Fn.const(1.0)}, ctx)

    # algebra
    def __add__(self, o: "FuncElement") -> "FuncElement":
        out = dict(self.terms)
        for k, f in o.terms.items():
            out[k] = out[k] + f if k in out else f
        return FuncElement(out, self.ctx)

    def __sub__(self, o: "FuncElement") -> "FuncElement":
        return self + o.scale(-1.0)

    def scale(self, c: float) -> "FuncElement":
        return FuncElement({k: f.scale(c) for k, f in self.terms.items()}, self.ctx)

    def _bb(self, k: int, l: int) -> Fn:
        """h with B^{#k} B^{#l} = h(A) B^{#(k+l)}."""
        q2 = self.ctx.qf ** 2
        ctx = self.ctx
        facs = []
        if k > 0 and l < 0:
            m = -l
            if k >= m:
                facs = [q2 ** (i + k - m) for i in range(1, m + 1)]
            else:
                facs = [q2 ** i for i in range(1, k + 1)]
        elif k < 0 and l > 0:
            m, n = -k, l
            if m >= n:
                facs = [q2 ** (-i - (m - n)) for i in range(n)]
            else:
                facs = [q2 ** (-i) for i in range(m)]
        if not facs:
            return Fn.const(1.0)

        def h(t, facs=tuple(facs)):
            out = np.ones_like(t)
            for c in facs:
                out = out * _p_r(c * t, ctx)
            return out
        return Fn(h, f"P{len(facs)}")

    def __mul__(self, o: "FuncElement") -> "FuncElement":
        if not isinstance(o, FuncElement):
            return self.scale(float(o))
        q2 = self.ctx.qf ** 2
        out: dict = {}
        for k, f in self.terms.items():
            for l, g in o.terms.items():
                term = f * g.dilate(q2 ** k) * self._bb(k, l)
                out[k + l] = out[k + l] + term if (k + l) in out else term
        return FuncElement(out, self.ctx)

    def star(self) -> "FuncElement":
        q2 = self.ctx.qf ** 2
        return FuncElement({-k: f.dilate(q2 ** (-k)) for k, f in self.terms.items()}, self.ctx)

    def matrix(self, N: int) -> np.ndarray:
        """Operator on the truncated sigma_+ (+) sigma_- space."""
        spec = spectrum(self.ctx, N)
        dim = len(spec)
        t = np.array([s[2] for s in spec])
        Bm = _B_matrix(self.ctx, N)
        out = np.zeros((dim, dim))
        for k, f in self.terms.items():
            P = np.linalg.matrix_power(Bm if k >= 0 else Bm.T, abs(k))
            out += f(t)[:, None] * P
        return out


def _B_matrix(ctx: ParamContext, N: int) -> np.ndarray:
    spec = spectrum(ctx, N)
    dim = len(spec)
    Bm = np.zeros((dim, dim))
    for i, (s, n, t) in enumerate(spec):
        if n > 0:
            Bm[i - 1, i] = math.sqrt(max(_p_r(t, ctx), 0.0))
    return Bm


def A_matrix(ctx: ParamContext, N: int) -> np.ndarray:
    return np.diag([s[2] for s in spectrum(ctx, N)])


# ----------------------------------------------------------------------------
# the invariant state
def _series_terms(ctx: ParamContext, f: Fn, tail_bound: float, nmax: int = 4000) -> tuple:
    q2 = ctx.qf ** 2
    gp, gm = ctx.ev(ctx.gamma(1)), ctx.ev(ctx.gamma(-1))
    branches = (1,) if ctx.is_zero else (1, -1)
    probe = np.abs(np.array([f(ctx.lam_pm_f(s) * q2 ** np.arange(200)) for s in branches]))
    sup = float(np.max(probe))
    # bounded f settle near f(0); still growing deep in the tail means unbounded
    late, mid = np.max(probe[:, 150:]), np.max(probe[:, 100:150])
    if not np.isfinite(sup) or late > mid * (1 + 1e-9) + 1e-12:
        raise ValueError("function is unbounded on the spectrum")
    tot = (abs(gp) + abs(gm)) / (1 - q2)
    N = 1
    while q2 ** N * max(sup, 1e-300) * tot >= tail_bound and N < nmax:
        N += 1
    return N, gp, gm


def h0(f: Fn, ctx: ParamContext, tail_bound: float = 1e-14) -> tuple:
    """Series form of the invariant state on functions of A; returns (value, N)."""
    N, gp, gm = _series_terms(ctx, f, tail_bound)
    gp *= float(1 + ctx.perturb)  # negative-control hook
    q2 = ctx.qf ** 2
    w = q2 ** np.arange(N)
    val = gp * float(np.sum(f(ctx.lam_pm_f(1) * w) * w))
    if not ctx.is_zero:
        val += gm * float(np.sum(f(ctx.lam_pm_f(-1) * w) * w))
    return val, N


def sphere_state_series(x: FuncElement, ctx: ParamContext | None = None,
                        tail_bound: float = 1e-14) -> float:
    """h(sum_k f_k(A) B^{#k}) = h0(f_0)."""
    ctx = ctx or x.ctx
    f = x.terms.get(0)
    if f is None:
        return 0.0
    return h0(f, ctx, tail_bound)[0]


def sphere_state_trace(x: FuncElement, ctx: ParamContext | None = None, N: int = 60) -> float:
    """(1-q^2)(lam_+ - lam_-)^(-1) Tr |A| x on the truncated sigma_+ (+) sigma_- space."""
    ctx = ctx or x.ctx
    M = x.matrix(N)
    absA = np.abs(np.array([s[2] for s in spectrum(ctx, N)]))
    lp, lm = ctx.lam_pm_f(1), ctx.lam_pm_f(-1)
    if ctx.is_zero:
        lp, lm = 1.0, 0.0
    return (1 - ctx.qf ** 2) / (lp - lm) * float(np.sum(absA * np.diag(M)))


# ----------------------------------------------------------------------------
# U_q(su2) action on the function algebra
def _q3bracket(n: int, q: float) -> float:
    return (q ** (-3 * n) - q ** n) / (q ** -3 - q)


def _D(f: Fn, q: float) -> Fn:
    """(f(t) - f(q^2 t)) / ((1-q^2) t)."""
    q2 = q * q
    return Fn(lambda t, f=f: (f(t) - f(q2 * t)) / ((1 - q2) * t), f"D{f.tag}")


def _Dm(f: Fn, q: float) -> Fn:
    """(f(q^-2 t) - f(t)) / ((q^-2 - 1) t)."""
    q2 = q * q
    return Fn(lambda t, f=f: (f(t / q2) - f(t)) / ((1 / q2 - 1) * t), f"D'{f.tag}")


def _drop_top(f: Fn, n: int, ctx: ParamContext) -> Fn:
    """f with its values at the top n spectral points of each branch set to 0.

    In B^n f(A) and f(A) B*^n those points are killed by B^n, so the element is
    unchanged; dropping them avoids carrying values of f taken off the spectrum.
    """
    if n <= 0:
        return f
    q2 = ctx.qf ** 2
    cut = {s: abs(ctx.lam_pm_f(s)) * q2 ** n * (1 + 1 / q2) / 2 for s in (1, -1)}

    def h(t, f=f):
        keep = np.where(t >= 0, np.abs(t) < cut[1], np.abs(t) < cut[-1])
        return np.where(keep, f(t), 0.0)
    return Fn(h, f.tag)


def _act_gen(g: str, x: FuncElement) -> FuncElement:
    """Closed-form action of one generator; terms with k < 0 are trimmed at the top."""
    out = _act_gen_raw(g, x)
    return FuncElement({k: _drop_top(f, -k, x.ctx) for k, f in out.terms.items()}, x.ctx)


def _act_gen_raw(g: str, x: FuncElement) -> FuncElement:
    ctx = x.ctx
    q = ctx.qf
    q2 = q * q
    inf = ctx.is_inf
    out = FuncElement({}, ctx)
    for k, f in x.terms.items():
        if g in ("K", "Kinv"):
            e = -k if g == "K" else k
            out = out + FuncElement({k: f.scale(q ** e)}, ctx)
            continue
        if k >= 0:
            # f(A) B^n = B^n f~(A) with f~(t) = f(q^(-2n) t)
            n = k
            ft = _drop_top(f.dilate(q2 ** (-n)), n, ctx)
            if g == "E":
                part = FuncElement({}, ctx)
                if n >= 1:
                    c1 = 0.0 if inf else qnum(n, q)
                    c3 = _q3bracket(n, q)
                    # q^(1/2) B^(n-1) [c1 - (1+q^2) c3 A] f~(A)
                    g1 = (Fn.const(c1) - Fn.ident().scale((1 + q2) * c3)) * ft
                    part = part + FuncElement({n - 1: g1.dilate(q2 ** (n - 1)).scale(q ** 0.5)}, ctx)
                # q^(-1/2) q^n B^n B* D f~(A)
                Df = _D(ft, q)
                if n >= 1:
                    # B^n B* = B^(n-1) p(q^2 A)
                    pr = Fn(lambda t: _p_r(q2 * t, ctx), "p(q2A)")
                    g2 = (pr * Df).dilate(q2 ** (n - 1)).scale(q ** (n - 0.5))
                    part = part + FuncElement({n - 1: g2}, ctx)
                else:
                    part = part + FuncElement({-1: Df.dilate(q2 ** -1).scale(q ** -0.5)}, ctx)
                out = out + part
            else:  # F on B^n f~(A): -q^(-3/2) q^n B^(n+1) D' f~(A)
                g1 = _Dm(ft, q).dilate(q2 ** (n + 1)).scale(-q ** (n - 1.5))
                out = out + FuncElement({n + 1: g1}, ctx)
        else:
            n = -k
            if g == "E":
                # q^(-1/2) q^n D'f(A) B*^(n+1)
                out = out + FuncElement({-(n + 1): _Dm(f, q).scale(q ** (n - 0.5))}, ctx)
            else:
                # -q^(-3/2) q^n D f(A) B B*^n
                Df = _D(f, q).scale(-q ** (n - 1.5))
                if n >= 1:
                    pr = Fn(lambda t: _p_r(q2 * t, ctx), "p(q2A)")
                    out = out + FuncElement({-(n - 1): Df * pr}, ctx)
                    c1 = 0.0 if inf else qnum(n, q)
                    c3 = _q3bracket(n, q)
                    g2 = f * (Fn.const(c1) - Fn.ident().scale((1 + q2) * c3))
                    out = out + FuncElement({-(n - 1): g2.scale(-q ** -0.5)}, ctx)
                else:
                    out = out + FuncElement({1: Df}, ctx)
    return out


def uq_action_on_functions(word, x: FuncElement) -> FuncElement:
    """Closed-form action of a word in E, F, K, Kinv (rightmost letter acts first)."""
    if isinstance(word, str):
        word = word.split()
    for g in reversed(list(word)):
        if g not in ("E", "F", "K", "Kinv"):
            raise KeyError(f"unknown generator {g}")
        x = _act_gen(g, x)
    return x


def operator_action(g: str, T: np.ndarray, ctx: ParamContext, N: int) -> np.ndarray:
    """Commutator form of the action of E, F, K, K^-1 on an operator T."""
    t = np.array([s[2] for s in spectrum(ctx, N)])
    absA = np.abs(t)
    sgn = np.sign(t)
    lam = ctx.qf - 1 / ctx.qf
    q = ctx.qf
    Bm = _B_matrix(ctx, N)
    ih = absA ** -0.5
    if g == "K":
        return (absA ** 0.5)[:, None] * T * ih[None, :]
    if g == "Kinv":
        return ih[:, None] * T * (absA ** 0.5)[None, :]
    if g == "E":
        C = Bm.T @ T - T @ Bm.T
        return -q ** -0.5 / lam * (sgn * ih)[:, None] * C * ih[None, :]
    if g == "F":
        C = Bm @ T - T @ Bm
        return -q ** -1.5 / lam * (sgn * ih)[:, None] * C * ih[None, :]
    raise KeyError(g)


def is_smooth_at_zero(f: Fn, ctx: ParamContext, n: int = 60) -> bool:
    """f has a limit at 0 along the spectrum and (f - f(0))/A stays bounded."""
    q2 = ctx.qf ** 2
    signs = (1,) if ctx.is_zero else (1, -1)
    lims = []
    for s in signs:
        t = ctx.lam_pm_f(s) * q2 ** np.arange(n)
        v = f(t)
        lims.append(v[-1])
    f0 = lims[0]
    if any(abs(l - f0) > 1e-8 for l in lims):
        return False
    for s in signs:
        t = ctx.lam_pm_f(s) * q2 ** np.arange(n // 2)
        d = (f(t) - f0) / t
        if np.max(np.abs(d[-5:])) > 10 * max(1.0, np.max(np.abs(d[:5]))):
            return False
    return True


# ----------------------------------------------------------------------------
def sample_functions(ctx: ParamContext, smooth_only: bool = True) -> list:
    """A fixed family of test functions on the spectrum."""
    fs = [
        Fn.const(1.0),
        Fn.ident(),
        Fn.poly([0.3, -1.2, 0.7]),
        Fn.poly([1.0, 0.0, 0.0, -0.5]),
        Fn(lambda t: np.exp(t), "exp"),
        Fn(lambda t: 1.0 / (2.0 + t * t), "1/(2+A^2)"),
        Fn(lambda t: np.cos(3 * t), "cos3A"),
        Fn.ident() * Fn.chi(1),
        Fn(lambda t: np.sin(t) * (t >= 0), "sin*chi+"),
    ]
    if not smooth_only:
        fs += [Fn.chi(1), Fn.chi_point(0, 1, ctx), Fn.chi_point(2, 1, ctx)]
        if not ctx.is_zero:
            fs += [Fn.chi(-1), Fn.chi_point(1, -1, ctx)]
    return fs


def sample_elements(ctx: ParamContext, count: int = 20, seed: int = 0) -> list:
    """Deterministic pseudo-random FuncElements, including products."""
    rng = np.random.default_rng(seed)
    fs = sample_functions(ctx, smooth_only=False)
    out = []
    while len(out) < count:
        ks = rng.integers(-2, 3, size=2)
        a = FuncElement.fn(fs[rng.integers(len(fs))], ctx, int(ks[0]))
        b = FuncElement.fn(fs[rng.integers(len(fs))], ctx, int(ks[1]))
        c = float(rng.normal())
        out.append((a * b.star()) + FuncElement.fn(Fn.const(c), ctx) if len(out) % 2 else a * b)
    return out


def check_series_vs_trace(ctx: ParamContext, count: int = 20, N: int = 60, tol: float = 1e-10) -> CheckReport:
    t0 = time.perf_counter()
    worst = 0.0
    for x in sample_elements(ctx, count):
        worst = max(worst, abs(sphere_state_series(x, ctx) - sphere_state_trace(x, ctx, N)))
    return residual_report("state_series_vs_trace", worst, tol, params={**ctx.to_json(), "N": N},
                           details={"samples": count}, elapsed=time.perf_counter() - t0)


def smooth_samples(ctx: ParamContext) -> list:
    fs = sample_functions(ctx, smooth_only=True)
    out = []
    for f in fs:
        for k in (-2, -1, 0, 1, 2):
            out.append(FuncElement.fn(f, ctx, k))
    return out


def check_invariance(ctx: ParamContext, tol: float = 1e-9) -> CheckReport:
    """h(E|>x) = h(F|>x) = 0 and h(K|>x) = h(x) on smooth samples."""
    t0 = time.perf_counter()
    worst = 0.0
    n = 0
    for x in smooth_samples(ctx):
        hx = sphere_state_series(x, ctx)
        for g in ("E", "F"):
            worst = max(worst, abs(sphere_state_series(uq_action_on_functions(g, x), ctx)))
        worst = max(worst, abs(sphere_state_series(uq_action_on_functions("K", x), ctx) - hx))
        n += 1
    return residual_report("state_invariance", worst, tol, params=ctx.to_json(),
                           details={"samples": n}, elapsed=time.perf_counter() - t0)


def counterexample_value(ctx: ParamContext) -> tuple:
    """(computed h(E|>B chi_+(A)), closed form q^(1/2)(1-q^2)^(-1) gamma_+ lam_-)."""
    x = FuncElement.fn(Fn.chi(1), ctx, 1)
    val = sphere_state_series(uq_action_on_functions("E", x), ctx)
    q = ctx.qf
    closed = q ** 0.5 / (1 - q * q) * ctx.ev(ctx.gamma(1)) * ctx.lam_pm_f(-1)
    return val, closed


def check_twisted_trace(ctx: ParamContext, tol: float = 1e-10) -> CheckReport:
    """h(yB) = q^2 h(By), h(yB*) = q^-2 h(B*y), h(y g(A)) = h(g(A) y)."""
    t0 = time.perf_counter()
    q2 = ctx.qf ** 2
    B, Bs = FuncElement.B(ctx), FuncElement.Bst(ctx)
    gs = [FuncElement.fn(f, ctx) for f in sample_functions(ctx, smooth_only=False)[:6]]
    worst = 0.0
    for y in sample_elements(ctx, 12, seed=7):
        h = lambda z: sphere_state_series(z, ctx)  # noqa: E731
        worst = max(worst, abs(h(y * B) - q2 * h(B * y)))
        worst = max(worst, abs(h(y * Bs) - h(Bs * y) / q2))
        for g in gs:
            worst = max(worst, abs(h(y * g) - h(g * y)))
    return residual_report("twisted_trace", worst, tol, params=ctx.to_json(),
                           elapsed=time.perf_counter() - t0)


def _interior_rows(ctx: ParamContext, N: int, n_max: int) -> np.ndarray:
    return np.array([n <= n_max for (_, n, _) in spectrum(ctx, N)])


def check_action_forms(ctx: ParamContext, N: int = 40, tol: float = 1e-10) -> CheckReport:
    """Closed-form actions agree with the commutator forms on the interior."""
    t0 = time.perf_counter()
    q = ctx.qf
    # keep q^(-2n) eps well below tol on the checked block
    n_max = max(2, min(N - 4, int(math.log(tol * 1e-4 / 1e-16) / (2 * math.log(q)) * -1) // 2))
    n_max = min(n_max, N - 4)
    mask = _interior_rows(ctx, N, n_max)
    worst = 0.0
    for x in smooth_samples(ctx):
        if not is_smooth_at_zero(x.terms[next(iter(x.terms))], ctx):
            continue
        T = x.matrix(N)
        for g in ("E", "F", "K", "Kinv"):
            closed = uq_action_on_functions(g, x).matrix(N)
            op = operator_action(g, T, ctx, N)
            d = np.abs(closed - op)[np.ix_(mask, mask)]
            scale = max(1.0, float(np.max(np.abs(closed[np.ix_(mask, mask)]))))
            worst = max(worst, float(np.max(d)) / scale)
    return residual_report("function_action_forms", worst, tol,
                           params={**ctx.to_json(), "N": N, "interior_n": n_max},
                           elapsed=time.perf_counter() - t0)


def check_commutator_identities(ctx: ParamContext, N: int = 40, tol: float = 1e-9) -> CheckReport:
    """Ax = (K^2|>x)A, xA = A(K^-2|>x), [B*,x] = -q^(1/2) lam A (K^-1 E|>x), [B,x] = -q^(3/2) lam A (K^-1 F|>x)."""
    t0 = time.perf_counter()
    q = ctx.qf
    lam = q - 1 / q
    Am = A_matrix(ctx, N)
    Bm = _B_matrix(ctx, N)
    mask = _interior_rows(ctx, N, N - 4)
    gens = [FuncElement.A(ctx), FuncElement.B(ctx), FuncElement.Bst(ctx),
            FuncElement.A(ctx) * FuncElement.B(ctx), FuncElement.Bst(ctx) * FuncElement.Bst(ctx)]
    worst = 0.0
    for x in gens:
        X = x.matrix(N)
        res = [
            Am @ X - uq_action_on_functions("K K", x).matrix(N) @ Am,
            X @ Am - Am @ uq_action_on_functions("Kinv Kinv", x).matrix(N),
            Bm.T @ X - X @ Bm.T + q ** 0.5 * lam * Am @ uq_action_on_functions("Kinv E", x).matrix(N),
            Bm @ X - X @ Bm + q ** 1.5 * lam * Am @ uq_action_on_functions("Kinv F", x).matrix(N),
        ]
        for R in res:
            worst = max(worst, float(np.max(np.abs(R[np.ix_(mask, mask)]))))
    return residual_report("commutator_identities", worst, tol, params={**ctx.to_json(), "N": N},
                           elapsed=time.perf_counter() - t0)


def check_hqf(ctx: ParamContext, tol: float = 1e-10) -> CheckReport:
    """h(g(A)) - q^2 h(g(q^2 A)) - gamma_+ g(lam_+) - gamma_- g(lam_-) = 0."""
    t0 = time.perf_counter()
    q2 = ctx.qf ** 2
    gp, gm = ctx.ev(ctx.gamma(1)), ctx.ev(ctx.gamma(-1))
    worst = 0.0
    for f in sample_functions(ctx, smooth_only=False):
        lhs = h0(f, ctx)[0] - q2 * h0(f.dilate(q2), ctx)[0]
        rhs = gp * float(f(ctx.lam_pm_f(1))) + (0.0 if ctx.is_zero else gm * float(f(ctx.lam_pm_f(-1))))
        worst = max(worst, abs(lhs - rhs))
    return residual_report("state_recursion", worst, tol, params=ctx.to_json(),
                           elapsed=time.perf_counter() - t0)


def check_faithful(ctx: ParamContext, N: int = 60) -> CheckReport:
    """Gram matrices h(x_i* x_j) of small families are positive definite."""
    t0 = time.perf_counter()
    fs = [Fn.const(1.0), Fn.ident(), Fn.chi_point(2, 1, ctx), Fn.poly([0, 0, 1])]
    worst = math.inf
    for k in (-1, 0, 1, 2):
        els = [FuncElement.fn(f, ctx, k) for f in fs]
        G = np.array([[sphere_state_series(a.star() * b, ctx) for b in els] for a in els])
        worst = min(worst, float(np.min(np.linalg.eigvalsh((G + G.T) / 2))))
    return CheckReport("state_faithful_probe", worst > 0, params=ctx.to_json(),
                       residual=worst, details={"min_eigenvalue": worst},
                       elapsed=time.perf_counter() - t0)
