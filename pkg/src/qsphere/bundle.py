"""Highest-weight vectors, line-bundle projectors and charts over the sphere.

Everything exact is done with unnormalized vectors and exact squared
norms; normalization constants (square roots of norms) only enter the
numeric layer.  Indices follow the spin convention: ``j`` is a signed
half-integer, ``l`` runs over ``|j|, |j|+1, ...`` and ``k`` over
``-l..l``.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .haar import A_matrix, _B_matrix, build_haar_table, haar_state, spectrum
from .hopf import E_pow, F_pow, act_left, act_right, embed_sphere_generators, sphere_hom, suq2, uq, x_r
from .ncpoly import NCPoly, make_presentation
from .qcoeff import ONE, ZERO, ParamContext, Scalar, qbracket, qnum
from .report import CheckReport, residual_report

_q = Scalar.qpow


def half(j) -> Fraction:
    """Parse a half-integer label exactly."""
    x = Fraction(j) if not isinstance(j, str) else Fraction(j.strip())
    if (2 * x).denominator != 1:
        raise ValueError(f"{j} is not a half-integer")
    return x


def _ks(J: Fraction):
    """k = -J, -J+1, ..., J."""
    return [-J + i for i in range(int(2 * J) + 1)]


def _table_for(degree: int):
    d = degree + (degree % 2)
    if d > 24:
        raise ValueError(f"Haar evaluation of degree {degree} exceeds the supported bound 24")
    return build_haar_table(max(2, d))


def _h(x: NCPoly) -> Scalar:
    return haar_state(x, _table_for(x.degree()))


# ----------------------------------------------------------------------------
# the vectors u_j, w_j
def u_vec(j, ctx: ParamContext) -> NCPoly:
    """u_j: the right X_r-eigenvector of left weight |j| generating the j-th summand."""
    j = half(j)
    A = suq2()
    if j < 0:
        return act_left(E_pow(int(-2 * j)), w_vec(-j, ctx))
    s = ctx.sparam()
    out = A.one()
    for i in range(1, int(2 * j) + 1):
        out = A.mul(out, A.gen("d") + A.gen("b").scale(_q(-i) * s))
    return out


def w_vec(j, ctx: ParamContext) -> NCPoly:
    """w_j (j >= 0): lowest-weight vector with eigenvalue mu_{-j}."""
    j = half(j)
    if j < 0:
        raise ValueError("w_j is defined for j >= 0")
    A = suq2()
    s = ctx.sparam()
    out = A.one()
    for i in range(1, int(2 * j) + 1):
        out = A.mul(out, A.gen("a") - A.gen("c").scale(_q(i) * s))
    return out


def x1_poly(ctx: ParamContext) -> NCPoly:
    """Radical-free multiple of the highest sphere coordinate x_1."""
    (_, _, x1), _ = embed_sphere_generators(ctx)
    return x1


# ----------------------------------------------------------------------------
@dataclass
class HopfModuleBasis:
    """Unnormalized ladder vectors of one summand, with exact squared norms."""

    j: Fraction
    L_max: Fraction
    ctx: ParamContext
    vectors: dict = field(default_factory=dict)  # (l, k) -> NCPoly
    norms2: dict = field(default_factory=dict)  # (l, k) -> Scalar

    def labels(self):
        return sorted(self.vectors, key=lambda t: (t[0], -t[1]))

    def norm(self, l, k) -> float:
        return math.sqrt(self.ctx.ev(self.norms2[(l, k)]))

    def levels(self):
        J = abs(self.j)
        return [J + n for n in range(int(self.L_max - J) + 1)]

    def to_json(self) -> dict:
        return {
            "j": str(self.j), "L_max": str(self.L_max), "params": self.ctx.to_json(),
            "vectors": [{"l": str(l), "k": str(k), "poly": self.vectors[(l, k)].to_json(),
                         "norm2": self.norms2[(l, k)].to_json() if (l, k) in self.norms2 else None}
                        for l, k in self.labels()],
        }


def build_basis(j, L_max, ctx: ParamContext, norms: bool = True) -> HopfModuleBasis:
    """Vectors F^(l-k) |> (x_1^(l-|j|) u_j) for |j| <= l <= L_max."""
    j, L_max = half(j), half(L_max)
    J = abs(j)
    if L_max < J or (L_max - J).denominator != 1:
        raise ValueError(f"L_max={L_max} must be |j| plus a nonnegative integer")
    if L_max > J + 4:
        raise ValueError("L_max may exceed |j| by at most 4")
    A = suq2()
    F = uq().gen("F")
    x1 = x1_poly(ctx)
    basis = HopfModuleBasis(j, L_max, ctx)
    top = u_vec(j, ctx)
    for n in range(int(L_max - J) + 1):
        l = J + n
        v = top
        for k in reversed(_ks(l)):
            basis.vectors[(l, k)] = v
            if norms:
                basis.norms2[(l, k)] = h_product(v, v)
            v = act_left(F, v)
        top = A.mul(x1, top)
    return basis


def check_basis(basis: HopfModuleBasis, tol: float = 1e-9) -> CheckReport:
    """Weight, highest weight, X_r-eigenvalue, exact ladder norms and the Gram matrix."""
    t0 = time.perf_counter()
    ctx = basis.ctx
    U = uq()
    A = suq2()
    X = x_r(ctx)
    mu = ctx.mu(basis.j)
    fails = []
    for (l, k), v in basis.vectors.items():
        if not (act_left(U.gen("K"), v) - v.scale(_q(k))).is_zero():
            fails.append(f"weight ({l},{k})")
        if k == l and not act_left(U.gen("E"), v).is_zero():
            fails.append(f"highest weight ({l},{k})")
        if not (act_right(v, X) - v.scale(mu)).is_zero():
            fails.append(f"eigenvalue ({l},{k})")
        if k > -l and basis.norms2:
            # ||F v_k||^2 = [l+k][l-k+1] ||v_k||^2
            lhs = basis.norms2[(l, k - 1)]
            rhs = basis.norms2[(l, k)] * qbracket(l + k) * qbracket(l - k + 1)
            if not (lhs - rhs).is_zero():
                fails.append(f"ladder ({l},{k})")
    labels = basis.labels()
    gram = np.eye(len(labels))
    nonzero_off = 0
    if basis.norms2:
        for i, a in enumerate(labels):
            for jj in range(i + 1, len(labels)):
                b = labels[jj]
                val = h_product(basis.vectors[a], basis.vectors[b])
                if not val.is_zero():
                    nonzero_off += 1
                g = ctx.ev(val) / (basis.norm(*a) * basis.norm(*b))
                gram[i, jj] = gram[jj, i] = g
            gram[i, i] = ctx.ev(basis.norms2[a]) / basis.norm(*a) ** 2
    res = float(np.max(np.abs(gram - np.eye(len(labels))))) if labels else 0.0
    ok = not fails and res <= tol and nonzero_off == 0
    return CheckReport("hopf_module_basis", ok, params={**ctx.to_json(), "j": str(basis.j),
                                                        "L_max": str(basis.L_max)},
                       residual=res, tol=tol, basis_size=len(labels),
                       details={"failures": fails[:20], "nonzero_off_diagonal": nonzero_off},
                       elapsed=time.perf_counter() - t0)


def ladder_coefficients(basis: HopfModuleBasis) -> dict:
    """Numeric F-ladder coefficients ||F v_k|| / ||v_k|| on normalized vectors."""
    out = {}
    for (l, k) in basis.labels():
        if k > -l:
            out[(l, k)] = basis.norm(l, k - 1) / basis.norm(l, k)
    return out


def check_ladder(basis: HopfModuleBasis, tol: float = 1e-9) -> CheckReport:
    q = basis.ctx.qf
    res = 0.0
    for (l, k), c in ladder_coefficients(basis).items():
        want = math.sqrt(qnum(float(l - k + 1), q) * qnum(float(l + k), q))
        res = max(res, abs(c - want))
    return residual_report("F_ladder_coefficients", res, tol,
                           params={**basis.ctx.to_json(), "j": str(basis.j)},
                           basis_size=len(basis.vectors))


def check_mu_spectrum(j_range, ctx: ParamContext, tol: float = 1e-9) -> CheckReport:
    """u_j <| X_r = mu_j u_j, w_j <| X_r = mu_{-j} w_j and distinct eigenvalues."""
    t0 = time.perf_counter()
    X = x_r(ctx)
    fails = []
    values = {}
    for j in j_range:
        j = half(j)
        u = u_vec(j, ctx)
        if not (act_right(u, X) - u.scale(ctx.mu(j))).is_zero():
            fails.append(f"u_{j}")
        if j > 0:
            w = w_vec(j, ctx)
            if not (act_right(w, X) - w.scale(ctx.mu(-j))).is_zero():
                fails.append(f"w_{j}")
        values[str(j)] = ctx.ev(ctx.mu(j))
    vals = sorted(values.values())
    gap = min((b - a for a, b in zip(vals, vals[1:])), default=math.inf)
    if gap <= tol:
        fails.append("eigenvalues not distinct")
    return CheckReport("mu_spectrum", not fails, params=ctx.to_json(),
                       details={"failures": fails, "mu": values, "min_gap": gap},
                       elapsed=time.perf_counter() - t0)


# ----------------------------------------------------------------------------
# projectors
@dataclass
class ProjectorMatrix:
    """P_j with entries c_nm * v~_n v~_m^*; c_nm = q^-(n+m) [2|j|+1]^-1 N_n N_m."""

    j: Fraction
    ctx: ParamContext
    vectors: dict  # k -> v~_k
    norms2: dict  # k -> ||v~_k||^2
    entries: dict  # (n, m) -> v~_n v~_m^*
    sphere_forms: dict = field(default_factory=dict)  # (n, m) -> (power of B, [coeffs of A^i])

    @property
    def size(self) -> int:
        return len(self.vectors)

    def ks(self):
        return _ks(abs(self.j))

    def coefficient(self, n, m) -> float:
        J = abs(self.j)
        q = self.ctx.qf
        nn = 1.0 / math.sqrt(self.ctx.ev(self.norms2[n]))
        nm = 1.0 / math.sqrt(self.ctx.ev(self.norms2[m]))
        return q ** float(-(n + m)) / qnum(float(2 * J + 1), q) * nn * nm

    def numeric_entry(self, n, m) -> dict:
        c = self.coefficient(n, m)
        return {w: c * self.ctx.ev(v) for w, v in self.entries[(n, m)].terms.items()}

    def to_json(self) -> dict:
        rows = []
        for n in self.ks():
            row = []
            for m in self.ks():
                row.append({
                    "factor": self.coefficient(n, m),
                    "poly": self.entries[(n, m)].to_json(),
                    "numeric": [[" ".join(w), c] for w, c in
                                sorted(self.numeric_entry(n, m).items())],
                })
            rows.append(row)
        return {"j": str(self.j), "params": self.ctx.to_json(), "size": self.size,
                "index": [str(k) for k in self.ks()], "entries": rows,
                "norms2": {str(k): v.to_json() for k, v in self.norms2.items()}}


def build_projector(j, ctx: ParamContext, certify: bool = True) -> ProjectorMatrix:
    j = half(j)
    J = abs(j)
    if J > Fraction(3, 2):
        raise ValueError("exact projectors are built for |j| <= 3/2")
    basis = build_basis(j, J, ctx)
    A = suq2()
    vec = {k: basis.vectors[(J, k)] for k in _ks(J)}
    n2 = {k: basis.norms2[(J, k)] for k in _ks(J)}
    entries = {(n, m): A.mul(vec[n], A.star(vec[m])) for n in _ks(J) for m in _ks(J)}
    P = ProjectorMatrix(j, ctx, vec, n2, entries)
    if certify:
        for (n, m), x in entries.items():
            P.sphere_forms[(n, m)] = express_in_sphere(x, int(m - n), ctx, int(2 * J) - abs(int(m - n)))
    return P


def vstar_v(P: ProjectorMatrix) -> NCPoly:
    """sum_k q^-2k [2|j|+1]^-1 N_k^2 v~_k^* v~_k (should be 1)."""
    A = suq2()
    J = abs(P.j)
    out = A.zero()
    inv = qbracket(2 * J + 1).inv()
    for k in P.ks():
        c = _q(-2 * k) * inv * P.norms2[k].inv()
        out = out + A.mul(A.star(P.vectors[k]), P.vectors[k]).scale(c)
    return out


def check_projector(P: ProjectorMatrix) -> CheckReport:
    t0 = time.perf_counter()
    ctx = P.ctx
    A = suq2()
    U = uq()
    X = x_r(ctx)
    details = {}
    s = vstar_v(P)
    details["v*v - 1"] = len((s - A.one()).terms)
    # F applied termwise; the k-terms cancel against their neighbours
    fs = A.zero()
    for k in P.ks():
        c = _q(-2 * k) * qbracket(2 * abs(P.j) + 1).inv() * P.norms2[k].inv()
        fs = fs + act_left(U.gen("F"), A.mul(A.star(P.vectors[k]), P.vectors[k])).scale(c)
    details["F|>(v*v)"] = len(fs.terms)
    inv = 0
    herm = 0
    for (n, m), x in P.entries.items():
        if not act_right(x, X).is_zero():
            inv += 1
        if not (A.star(x) - P.entries[(m, n)]).is_zero():
            herm += 1
    details["entries not X_r-invariant"] = inv
    details["hermiticity violations"] = herm
    missing = [f"{n},{m}" for (n, m) in P.entries if P.sphere_forms and P.sphere_forms.get((n, m)) is None]
    details["entries outside B^#k p(A)"] = missing
    ok = (details["v*v - 1"] == 0 and details["F|>(v*v)"] == 0 and inv == 0 and herm == 0
          and not missing)
    return CheckReport("projector", ok, params={**ctx.to_json(), "j": str(P.j)},
                       basis_size=P.size, details=details, elapsed=time.perf_counter() - t0)


def _sphere_monomial(k: int, i: int, ctx: ParamContext) -> NCPoly:
    S = make_presentation("O_S2qr", ctx)
    g = "B" if k >= 0 else "Bst"
    word = (g,) * abs(k) + ("A",) * i
    return sphere_hom(ctx, NCPoly({word: ONE}, S))


def express_in_sphere(x: NCPoly, k: int, ctx: ParamContext, max_i: int):
    """Coefficients c_i with x = sum_i c_i B^{#k} A^i in O(SU_q(2)), or None."""
    from .haar import _solve_exact
    A = suq2()
    x = A.normal_form(x)
    cols = [_sphere_monomial(k, i, ctx) for i in range(max(0, max_i) + 1)]
    words = set(x.terms)
    for c in cols:
        words |= set(c.terms)
    n = len(cols)
    rows = [[c.coeff(w) for c in cols] + [x.coeff(w)] for w in sorted(words, key=A.key)]
    try:
        sol, _ = _solve_exact(rows, n)
    except ValueError:
        return None
    sol = [ZERO if v is None else v for v in sol]
    fit = A.zero()
    for c, v in zip(cols, sol):
        fit = fit + c.scale(v)
    if not (fit - x).is_zero():
        return None
    return sol


# ----------------------------------------------------------------------------
# inner products
def c_const(j, ctx: ParamContext) -> Scalar:
    """c_j = h(v v^*)^-1 for the normalized top vector of spin |j|."""
    j = half(j)
    J = abs(j)
    A = suq2()
    v = u_vec(j, ctx)
    n2 = h_product(v, v)
    return n2 / _h(A.mul(v, A.star(v)))


def sample_sphere_elements(ctx: ParamContext, count: int = 4, degree: int = 1, seed: int = 0) -> list:
    """Pseudo-random elements of O(S^2_qr) of degree <= ``degree`` in A, B, B*, as SU_q(2) polys."""
    rng = random.Random(seed)
    S = make_presentation("O_S2qr", ctx)
    words = [()]
    for d in range(1, degree + 1):
        words += [w for w in _words(("A", "B", "Bst"), d)]
    out = []
    for _ in range(count):
        terms = {w: Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for w in words}
        out.append(sphere_hom(ctx, S.normal_form(NCPoly(terms, S))))
    return out


def _words(gens, d):
    if d == 0:
        yield ()
        return
    for w in _words(gens, d - 1):
        for g in gens:
            yield w + (g,)


def _row_times_P(y: list, P: ProjectorMatrix) -> list:
    """(yP)_m as a list of (float, exact poly) pairs."""
    A = suq2()
    ks = P.ks()
    out = []
    for m in ks:
        terms = []
        for idx, k in enumerate(ks):
            if y[idx].is_zero():
                continue
            terms.append((P.coefficient(k, m), A.mul(y[idx], P.entries[(k, m)])))
        out.append(terms)
    return out


_PAIR_CACHE: dict = {}


def _h_words(u: tuple, v: tuple, table) -> Scalar:
    """h(u v) for normal words; independent of r, hence cached globally."""
    from .haar import _bc_index
    key = (u, v)
    hit = _PAIR_CACHE.get(key)
    if hit is None:
        A = suq2()
        hit = ZERO
        for w, c in A._mul_words(u, v).items():
            n = _bc_index(w)
            if n is not None:
                hit = hit + c * table.values[n]
        _PAIR_CACHE[key] = hit
    return hit


def h_product(x: NCPoly, y: NCPoly) -> Scalar:
    """Exact h(y^* x); only word pairs of total weight zero are multiplied."""
    from .haar import _biweight
    A = suq2()
    ystar = A.star(y)
    table = _table_for(ystar.degree() + x.degree())
    xw: dict = {}
    for v, cv in A.normal_form(x).terms.items():
        xw.setdefault(_biweight(v), []).append((v, cv))
    tot = ZERO
    for u, cu in ystar.terms.items():
        lw, rw = _biweight(u)
        for v, cv in xw.get((-lw, -rw), ()):
            hv = _h_words(u, v, table)
            if not hv.is_zero():
                tot = tot + cu * cv * hv
    return tot


def _h_pairs(xs: list, ys: list, ctx: ParamContext) -> float:
    """h(Y^* X) for float combinations X = sum a_i X_i, Y = sum b_j Y_j."""
    tot = 0.0
    for a, x in xs:
        for b, y in ys:
            tot += a * b * ctx.ev(h_product(x, y))
    return tot


def psi_map(yP: list, P: ProjectorMatrix) -> list:
    """Psi_j(yP) = [2|j|+1]^-1/2 sum_k q^-k (yP)_k v_k as (float, poly) pairs."""
    A = suq2()
    q = P.ctx.qf
    J = abs(P.j)
    pre = qnum(float(2 * J + 1), q) ** -0.5
    out = []
    for idx, k in enumerate(P.ks()):
        nk = 1.0 / math.sqrt(P.ctx.ev(P.norms2[k]))
        for c, x in yP[idx]:
            out.append((pre * q ** float(-k) * nk * c, A.mul(x, P.vectors[k])))
    return out


def psi_isometry_check(j, ctx: ParamContext, samples: int = 2, seed: int = 0,
                       tol: float = 1e-9) -> CheckReport:
    """<Psi(yP), Psi(zP)> against the weighted inner product of yP, zP."""
    t0 = time.perf_counter()
    j = half(j)
    J = abs(j)
    P = build_projector(j, ctx, certify=False)
    q = ctx.qf
    cj = ctx.ev(c_const(j, ctx))
    size = P.size
    pool = sample_sphere_elements(ctx, count=2 * samples * size, degree=1, seed=seed)
    res = 0.0
    vals = []
    for t in range(samples):
        y = pool[2 * t * size:(2 * t + 1) * size]
        z = pool[(2 * t + 1) * size:(2 * t + 2) * size]
        yP, zP = _row_times_P(y, P), _row_times_P(z, P)
        lhs = _h_pairs(psi_map(yP, P), psi_map(zP, P), ctx)
        rhs = cj * q ** float(2 * J) * sum(q ** float(-2 * k) * _h_pairs(yP[i], zP[i], ctx)
                                           for i, k in enumerate(P.ks()))
        res = max(res, abs(lhs - rhs) / max(1.0, abs(rhs)))
        vals.append((lhs, rhs))
    return residual_report("psi_isometry", res, tol, params={**ctx.to_json(), "j": str(j)},
                           basis_size=size, details={"pairs": vals, "c_j": cj},
                           elapsed=time.perf_counter() - t0)


def twisted_cyclicity_check(j, ctx: ParamContext, samples: int = 3, seed: int = 1) -> CheckReport:
    """h(v_k^* x v_l) = c_j q^(2|j|-2k) h(x v_l v_k^*) exactly on sample x."""
    t0 = time.perf_counter()
    j = half(j)
    J = abs(j)
    A = suq2()
    basis = build_basis(j, J, ctx, norms=False)
    cj = c_const(j, ctx)
    xs = [A.one()] + sample_sphere_elements(ctx, count=samples, degree=1, seed=seed)
    fails = []
    for x in xs:
        for k in _ks(J):
            for l in _ks(J):
                vk, vl = basis.vectors[(J, k)], basis.vectors[(J, l)]
                lhs = _h(A.prod(A.star(vk), x, vl))
                rhs = cj * _q(2 * J - 2 * k) * _h(A.prod(x, vl, A.star(vk)))
                if not (lhs - rhs).is_zero():
                    fails.append(f"k={k} l={l}")
    return CheckReport("twisted_cyclicity", not fails, params={**ctx.to_json(), "j": str(j)},
                       details={"failures": fails[:10], "samples": len(xs),
                                "c_j": ctx.ev(cj)},
                       elapsed=time.perf_counter() - t0)


# ----------------------------------------------------------------------------
# chart identities
def xi(s: Scalar) -> NCPoly:
    """-s ab + (s^2 - 1) q bc + s q^2 dc."""
    A = suq2()
    return A.normal_form(A.elem({("a", "b"): -s, ("b", "c"): (s * s - 1) * _q(1),
                                 ("d", "c"): s * _q(2)}))


def _lin2(x: Scalar, gx: str, y: Scalar, gy: str) -> NCPoly:
    A = suq2()
    return A.gen(gx).scale(x) + A.gen(gy).scale(y)


def xi_identities(s: Scalar) -> dict:
    """Product and commutation identities of xi(s); every value should be 0."""
    A = suq2()
    q = _q
    one = A.one()
    out = {}
    out["(a-qsc)(d+sb)"] = A.mul(_lin2(ONE, "a", -q(1) * s, "c"), _lin2(ONE, "d", s, "b")) - (one - xi(s))
    out["(d+q^-1 sb)(a-sc)"] = (A.mul(_lin2(ONE, "d", q(-1) * s, "b"), _lin2(ONE, "a", -s, "c"))
                                - (one - xi(s).scale(q(-2))))
    out["(b-qsd)(-qc-qsa)"] = (A.mul(_lin2(ONE, "b", -q(1) * s, "d"), _lin2(-q(1), "c", -q(1) * s, "a"))
                               - (one.scale(q(2) * s * s) + xi(s)))
    out["(qc+sa)(-b+sd)"] = (A.mul(_lin2(q(1), "c", s, "a"), _lin2(-ONE, "b", s, "d"))
                             - (one.scale(s * s) + xi(s)))
    qs, qis = q(1) * s, q(-1) * s
    e1 = _lin2(ONE, "a", -q(1) * s, "c")
    out["(a-qsc) xi(qs)"] = A.mul(e1, xi(qs)) - A.mul(xi(s), e1).scale(q(2))
    e2 = _lin2(ONE, "d", q(-1) * s, "b")
    out["(d+q^-1 sb) xi(q^-1 s)"] = A.mul(e2, xi(qis)) - A.mul(xi(s), e2).scale(q(-2))
    e3 = _lin2(ONE, "b", -q(1) * s, "d")
    out["(b-qsd) xi(qs)"] = A.mul(e3, xi(qs)) - A.mul(xi(s), e3)
    e4 = _lin2(ONE, "c", q(-1) * s, "a")
    out["(c+q^-1 sa) xi(q^-1 s)"] = A.mul(e4, xi(qis)) - A.mul(xi(s), e4)
    return out


def _a_product(factors, ctx: ParamContext) -> NCPoly:
    """prod (alpha + beta A) in O(SU_q(2)) for factors (alpha, beta)."""
    A = suq2()
    Aimg = sphere_hom(ctx, NCPoly({("A",): ONE}, make_presentation("O_S2qr", ctx)))
    out = A.one()
    for al, be in factors:
        out = A.mul(out, A.one().scale(al) + Aimg.scale(be))
    return out


def extreme_products(j, ctx: ParamContext) -> dict:
    """v~_k v~_k^* for k = +-|j| with the predicted A-polynomials.

    Returns {k: (product, polynomial)}; the product should be a scalar
    multiple of the polynomial.
    """
    j = half(j)
    J = abs(j)
    n = int(2 * J)
    lp, lm = ctx.lam_plus(), ctx.lam_minus()
    if j > 0:
        top = [(lp, -_q(-2 * i)) for i in range(n)]
        bot = [(-lm, _q(2 * i)) for i in range(1, n + 1)]
    else:
        top = [(-lm, _q(-2 * i)) for i in range(n)]
        bot = [(lp, -_q(2 * i)) for i in range(1, n + 1)]
    basis = build_basis(j, J, ctx, norms=False)
    A = suq2()
    out = {}
    for k, fac in ((J, top), (-J, bot)):
        v = basis.vectors[(J, k)]
        out[k] = (A.mul(v, A.star(v)), _a_product(fac, ctx))
    return out


def _ratio(x: NCPoly, y: NCPoly):
    """gamma with x = gamma y exactly, or None."""
    if y.is_zero():
        return ZERO if x.is_zero() else None
    w, c = next(iter(sorted(y.terms.items(), key=lambda t: suq2().key(t[0]))))
    g = x.coeff(w) / c
    return g if (x - y.scale(g)).is_zero() else None


def vl_relations(l, ctx: ParamContext) -> dict:
    """Radical-free forms of the two spin-l/spin-1/2 coupling relations (both should be 0)."""
    l = half(l)
    A = suq2()
    U = uq()
    s = ctx.sparam()
    b2l = qbracket(2 * l)
    ep_top = _lin2(ONE, "d", _q(-2 * l - 1) * s, "b")
    ep_bot = act_left(U.gen("F"), ep_top)
    # the factor extending w_l to w_{l+1/2}
    em_bot = _lin2(ONE, "a", -_q(2 * l + 1) * s, "c")
    em_top = act_left(U.gen("E"), em_bot)
    u = u_vec(l, ctx)
    w = w_vec(l, ctx)
    first = A.mul(u, ep_bot).scale(_q(Fraction(1, 2)) * b2l) - A.mul(act_left(U.gen("F"), u), ep_top).scale(_q(-l))
    second = A.mul(w, em_top).scale(_q(Fraction(-1, 2)) * b2l) - A.mul(act_left(U.gen("E"), w), em_bot).scale(_q(l))
    return {"plus": first, "minus": second}


def chart_identities(j, ctx: ParamContext) -> CheckReport:
    """xi(s) identities, extreme products as A-polynomials, and the coupling relations."""
    t0 = time.perf_counter()
    j = half(j)
    J = abs(j)
    details = {}
    fails = []
    s_vals = {"s": ctx.sparam(), "s=2/3": Scalar.const(Fraction(2, 3))}
    for tag, s in s_vals.items():
        for name, d in xi_identities(s).items():
            if not d.is_zero():
                fails.append(f"{name} [{tag}]")
    gammas = {}
    if J > 0:
        A = suq2()
        for k, (prod, poly) in extreme_products(j, ctx).items():
            g = _ratio(prod, poly)
            if g is None or g.is_zero():
                fails.append(f"extreme product k={k}")
                continue
            # normalized vectors: gamma = g / ||v~_k||^2
            n2 = h_product(u_vec(j, ctx), u_vec(j, ctx)) if k == J else None
            if n2 is None:
                basis = build_basis(j, J, ctx)
                n2 = basis.norms2[(J, k)]
            gammas[str(k)] = ctx.ev(g / n2)
        for tag, d in vl_relations(J, ctx).items():
            if not d.is_zero():
                fails.append(f"coupling relation {tag} l={J}")
    details["gamma"] = gammas
    details["failures"] = fails
    return CheckReport("chart_identities", not fails, params={**ctx.to_json(), "j": str(j)},
                       details=details, elapsed=time.perf_counter() - t0)


# ----------------------------------------------------------------------------
# chart matrices
def chart_matrices(j, ctx: ParamContext) -> tuple:
    """(m, m_dagger, n): dicts (row, col) -> {sphere word: float} indexed by k = -|j|..|j|."""
    J = abs(half(j))
    q = ctx.qf
    lam = q - 1.0 / q
    m, md, n = {}, {}, {}
    for k in _ks(J):
        m[(k, k)] = {("B",): 1.0 / q}
        md[(k, k)] = {("Bst",): q}
        n[(k, k)] = {("A",): q ** float(-2 * k + 1)}
        if k > -J:
            root = math.sqrt(qnum(float(J - k + 1), q) * qnum(float(J + k), q))
            m[(k, k - 1)] = {("A",): q ** float(Fraction(1, 2) - k) * lam * root}
            md[(k - 1, k)] = {("A",): q ** float(Fraction(5, 2) - k) * lam * root}
    return m, md, n


def _mat_mul(x: dict, y: dict, size_ks, S, ctx) -> dict:
    out = {}
    for (i, k1), a in x.items():
        for (k2, l), b in y.items():
            if k1 != k2:
                continue
            acc = out.setdefault((i, l), {})
            for u, cu in a.items():
                for v, cv in b.items():
                    for w, c in S.normal_form_word(u + v).items():
                        acc[w] = acc.get(w, 0.0) + cu * cv * ctx.ev(c)
    return out


def _mat_lin(terms, ks) -> dict:
    out = {}
    for c, mat in terms:
        for key, ent in mat.items():
            acc = out.setdefault(key, {})
            for w, v in ent.items():
                acc[w] = acc.get(w, 0.0) + c * v
    return out


def _max_abs(mat: dict) -> float:
    return max((abs(v) for ent in mat.values() for v in ent.values()), default=0.0)


def _mat_operator(mat: dict, ks, ctx: ParamContext, N: int) -> np.ndarray:
    """Right multiplication model: block operator with blocks given by sphere words under sigma."""
    Am = A_matrix(ctx, N)
    Bm = _B_matrix(ctx, N)
    gens = {"A": Am, "B": Bm, "Bst": Bm.T}
    d = Am.shape[0]
    size = len(ks)
    out = np.zeros((size * d, size * d))
    pos = {k: i for i, k in enumerate(ks)}
    for (r, c), ent in mat.items():
        block = np.zeros((d, d))
        for w, v in ent.items():
            M = np.eye(d)
            for g in w:
                M = M @ gens[g]
            block += v * M
        out[pos[r] * d:(pos[r] + 1) * d, pos[c] * d:(pos[c] + 1) * d] = block
    return out


def check_chart_matrices(j, ctx: ParamContext, tol: float = 1e-10, N: int = 30) -> CheckReport:
    """Commutation relations of the chart matrices, algebraically and under sigma_+-."""
    t0 = time.perf_counter()
    J = abs(half(j))
    ks = _ks(J)
    S = make_presentation("O_S2qr", ctx)
    m, md, n = chart_matrices(j, ctx)
    q = ctx.qf
    r = float(ctx.r_rel)
    mm = lambda x, y: _mat_mul(x, y, ks, S, ctx)  # noqa: E731
    ident = {(k, k): {(): 1.0} for k in ks}
    n2 = mm(n, n)
    rel = {
        "n md - q^2 md n": _mat_lin([(1.0, mm(n, md)), (-q * q, mm(md, n))], ks),
        "n m - q^-2 m n": _mat_lin([(1.0, mm(n, m)), (-q ** -2, mm(m, n))], ks),
        "m md - q^2 md m - (1-q^2)(n^2+r)": _mat_lin(
            [(1.0, mm(m, md)), (-q * q, mm(md, m)), (-(1 - q * q), n2), (-(1 - q * q) * r, ident)], ks),
    }
    res = {k: _max_abs(v) for k, v in rel.items()}
    # off-tridiagonal entries vanish identically
    off = [key for key in list(m) + list(md) if abs(ks.index(key[0]) - ks.index(key[1])) > 1]
    # second route: matrices of A, B, B* on the truncated spectral model
    ops = {name: _mat_operator(x, ks, ctx, N) for name, x in (("m", m), ("md", md), ("n", n))}
    d = A_matrix(ctx, N).shape[0]
    interior = [i * d + p for i in range(len(ks)) for p, (_, nn, _) in enumerate(spectrum(ctx, N))
                if nn <= N - 2]
    M, Md, Nn = ops["m"], ops["md"], ops["n"]
    I = np.eye(M.shape[0])
    R = M @ Md - q * q * Md @ M - (1 - q * q) * (Nn @ Nn + r * I)
    res["operator model"] = float(np.max(np.abs(R[:, interior]))) if interior else 0.0
    worst = max(res.values())
    return CheckReport("chart_matrices", worst <= tol and not off,
                       params={**ctx.to_json(), "j": str(half(j))}, residual=worst, tol=tol,
                       basis_size=len(ks), details={"residuals": res, "off_tridiagonal": off},
                       elapsed=time.perf_counter() - t0)


# ----------------------------------------------------------------------------
# orthogonality and completeness
def check_orthogonal_decomposition(ctx: ParamContext, l_max=2, tol: float = 1e-9) -> CheckReport:
    """Vectors of different summands are Haar-orthogonal (exactly and numerically)."""
    t0 = time.perf_counter()
    l_max = half(l_max)
    A = suq2()
    js = [Fraction(n, 2) for n in range(-int(2 * l_max), int(2 * l_max) + 1)]
    bases = {j: build_basis(j, l_max if (l_max - abs(j)).denominator == 1 else l_max - Fraction(1, 2), ctx)
             for j in js}
    res = 0.0
    nonzero = 0
    pairs = 0
    for i, j1 in enumerate(js):
        for j2 in js[i + 1:]:
            b1, b2 = bases[j1], bases[j2]
            for key1, v1 in b1.vectors.items():
                for key2, v2 in b2.vectors.items():
                    if key1 != key2:
                        continue  # different spins or weights are orthogonal for weight reasons
                    pairs += 1
                    val = h_product(v1, v2)
                    if not val.is_zero():
                        nonzero += 1
                    res = max(res, abs(ctx.ev(val)) / (b1.norm(*key1) * b2.norm(*key2)))
    return residual_report("orthogonal_decomposition", res, tol, params=ctx.to_json(),
                           details={"pairs": pairs, "exact_nonzero": nonzero},
                           elapsed=time.perf_counter() - t0) if nonzero == 0 else CheckReport(
        "orthogonal_decomposition", False, params=ctx.to_json(), residual=res, tol=tol,
        details={"pairs": pairs, "exact_nonzero": nonzero}, elapsed=time.perf_counter() - t0)


def check_completeness(ctx: ParamContext, l, k, tol: float = 1e-9) -> CheckReport:
    """span{v^l_{k,i} : |i| <= l} has dimension 2l+1 (numeric Gram rank)."""
    t0 = time.perf_counter()
    l, k = half(l), half(k)
    A = suq2()
    vecs = []
    for i in _ks(l):
        b = build_basis(i, l, ctx, norms=False)
        vecs.append(b.vectors[(l, k)])
    n = len(vecs)
    G = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            G[a, b] = ctx.ev(h_product(vecs[a], vecs[b]))
    d = np.sqrt(np.diag(G))
    Gn = G / np.outer(d, d)
    rank = int(np.linalg.matrix_rank(Gn, tol=tol))
    return CheckReport("completeness", rank == n, params={**ctx.to_json(), "l": str(l), "k": str(k)},
                       basis_size=n, details={"rank": rank, "expected": n},
                       elapsed=time.perf_counter() - t0)
