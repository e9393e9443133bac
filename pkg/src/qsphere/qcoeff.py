"""Exact scalars and q-combinatorics.

A :class:`Scalar` is an element of ``Q(s)[lam, rho] / (lam^2 - lam - r, rho^2 - r)``
where ``s = q^(1/2)`` is kept symbolic and ``r`` is a fixed rational.  The
symbol ``lam`` stands for the larger root ``lam_+ = 1/2 + (r + 1/4)^(1/2)``
and ``rho`` for ``r^(1/2)``.  Identities that reduce to zero in this ring hold
for every value of ``q`` and for both Galois conjugates of ``lam`` and ``rho``.

Denominators are restricted to polynomials in ``s`` (no ``lam``/``rho``), which
is enough for ``(q - 1/q)^-1``, inverse brackets and Haar values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import flint

Rational = Union[int, Fraction, flint.fmpq]

_ZERO = flint.fmpq_poly([])
_ONE = flint.fmpq_poly([1])


def _fmpq(x: Rational) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    if isinstance(x, int):
        return flint.fmpq(x)
    raise TypeError(f"not a rational: {x!r}")


def _valuation(p: flint.fmpq_poly) -> int:
    for i, c in enumerate(p.coeffs()):
        if c != 0:
            return i
    return 0


def _floats(p: flint.fmpq_poly) -> list[float]:
    return [float(c) for c in p.coeffs()]


def _horner(cs: list[float], x: float) -> float:
    acc = 0.0
    for c in reversed(cs):
        acc = acc * x + c
    return acc


class Scalar:
    """``s^e * (p0 + p1*lam + p2*rho + p3*lam*rho) / den`` in canonical form.

    Canonical form: ``den`` is monic with nonzero constant term (``None`` for
    1), the parts share no common factor with ``den`` and no common power of
    ``s``.  ``r`` is ``None`` when the value does not involve ``lam``/``rho``.
    """

    __slots__ = ("e", "parts", "den", "r", "_hash", "_fl")

    def __init__(self, e, parts, den, r):
        self.e = e
        self.parts = parts
        self.den = den
        self.r = r
        self._hash = None
        self._fl = None

    # construction -----------------------------------------------------
    @staticmethod
    def _make(e: int, parts, den, r) -> "Scalar":
        nz = [p for p in parts if not p.is_zero()]
        if not nz:
            return ZERO
        if den is not None:
            g = den
            for p in nz:
                if g.is_constant():
                    break
                g = g.gcd(p)
            if not g.is_constant():
                den = den // g
                parts = tuple(p // g for p in parts)
            lc = den.leading_coefficient()
            if den.degree() == 0:
                parts = tuple(p / lc for p in parts)
                den = None
            elif lc != 1:
                den = den / lc
                parts = tuple(p / lc for p in parts)
        v = min(_valuation(p) for p in parts if not p.is_zero())
        if v:
            parts = tuple(p.right_shift(v) for p in parts)
            e += v
        if r is not None and parts[1].is_zero() and parts[2].is_zero() and parts[3].is_zero():
            r = None
        return Scalar(e, parts, den, r)

    @staticmethod
    def const(c: Rational) -> "Scalar":
        c = _fmpq(c)
        if c == 0:
            return ZERO
        return Scalar(0, (flint.fmpq_poly([c]), _ZERO, _ZERO, _ZERO), None, None)

    @staticmethod
    def spow(n: int) -> "Scalar":
        """``s**n`` for an integer ``n``."""
        return Scalar(int(n), (_ONE, _ZERO, _ZERO, _ZERO), None, None)

    @staticmethod
    def qpow(x: Rational) -> "Scalar":
        """``q**x`` where ``2x`` is an integer."""
        two = Fraction(x) * 2
        if two.denominator != 1:
            raise ValueError(f"q-power {x} is not in (1/2)Z")
        return Scalar.spow(int(two))

    @staticmethod
    def laurent(coeffs: dict[int, Rational]) -> "Scalar":
        """Pure Laurent polynomial ``sum c_k s^k``."""
        items = {k: _fmpq(v) for k, v in coeffs.items() if v != 0}
        if not items:
            return ZERO
        lo = min(items)
        cs = [flint.fmpq(0)] * (max(items) - lo + 1)
        for k, v in items.items():
            cs[k - lo] = v
        return Scalar._make(lo, (flint.fmpq_poly(cs), _ZERO, _ZERO, _ZERO), None, None)

    @staticmethod
    def lam(r: Rational) -> "Scalar":
        """The symbol ``lam`` (numerically ``lam_+``) of the ring with parameter ``r``."""
        r = _fmpq(r)
        if r <= 0:
            raise ValueError("the quadratic extension needs r > 0")
        return Scalar(0, (_ZERO, _ONE, _ZERO, _ZERO), None, r)

    @staticmethod
    def rho(r: Rational) -> "Scalar":
        """The symbol ``rho = r^(1/2)``."""
        r = _fmpq(r)
        if r <= 0:
            raise ValueError("the quadratic extension needs r > 0")
        return Scalar(0, (_ZERO, _ZERO, _ONE, _ZERO), None, r)

    # predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return self is ZERO or all(p.is_zero() for p in self.parts)

    def is_pure(self) -> bool:
        return self.r is None

    def __bool__(self) -> bool:
        return not self.is_zero()

    def _key(self):
        return (
            self.e,
            tuple(tuple(p.coeffs()) for p in self.parts),
            None if self.den is None else tuple(self.den.coeffs()),
            self.r,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scalar):
            try:
                other = Scalar.const(other)
            except TypeError:
                return NotImplemented
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        return (
            self.e == other.e
            and self.r == other.r
            and all(a == b for a, b in zip(self.parts, other.parts))
            and (self.den == other.den if self.den is not None and other.den is not None
                 else self.den is None and other.den is None)
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(repr(self._key()))
        return self._hash

    # arithmetic -------------------------------------------------------
    @staticmethod
    def _ring(a: "Scalar", b: "Scalar"):
        if a.r is None:
            return b.r
        if b.r is None or a.r == b.r:
            return a.r
        raise ValueError(f"scalars from different rings r={a.r} and r={b.r}")

    def __add__(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            other = Scalar.const(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        r = Scalar._ring(self, other)
        e = min(self.e, other.e)
        sa, sb = self.e - e, other.e - e
        pa = self.parts if sa == 0 else tuple(p.left_shift(sa) for p in self.parts)
        pb = other.parts if sb == 0 else tuple(p.left_shift(sb) for p in other.parts)
        if self.den is None and other.den is None:
            return Scalar._make(e, tuple(x + y for x, y in zip(pa, pb)), None, r)
        da = self.den if self.den is not None else _ONE
        db = other.den if other.den is not None else _ONE
        g = da.gcd(db)
        fa, fb = db // g, da // g
        parts = tuple(x * fa + y * fb for x, y in zip(pa, pb))
        return Scalar._make(e, parts, da * fa, r)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        if self.is_zero():
            return self
        return Scalar(self.e, tuple(-p for p in self.parts), self.den, self.r)

    def __sub__(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            other = Scalar.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "Scalar":
        return Scalar.const(other) - self

    def __mul__(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction, flint.fmpq)):
                c = _fmpq(other)
                if c == 0 or self.is_zero():
                    return ZERO
                return Scalar(self.e, tuple(p * c for p in self.parts), self.den, self.r)
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return ZERO
        r = Scalar._ring(self, other)
        a, b = self.parts, other.parts
        if r is None:
            parts = (a[0] * b[0], _ZERO, _ZERO, _ZERO)
        else:
            # (P + rho Q)(P' + rho Q'), P = a0 + a1 lam, Q = a2 + a3 lam
            def lmul(x0, x1, y0, y1):
                t = x1 * y1
                return x0 * y0 + t * r, x0 * y1 + x1 * y0 + t

            pp = lmul(a[0], a[1], b[0], b[1])
            qq = lmul(a[2], a[3], b[2], b[3])
            pq = lmul(a[0], a[1], b[2], b[3])
            qp = lmul(a[2], a[3], b[0], b[1])
            parts = (pp[0] + qq[0] * r, pp[1] + qq[1] * r, pq[0] + qp[0], pq[1] + qp[1])
        if self.den is None and other.den is None:
            den = None
        elif self.den is None:
            den = other.den
        elif other.den is None:
            den = self.den
        else:
            den = self.den * other.den
        return Scalar._make(self.e + other.e, parts, den, r)

    __rmul__ = __mul__

    def _conj_rho(self) -> "Scalar":
        p = self.parts
        return Scalar(self.e, (p[0], p[1], -p[2], -p[3]), self.den, self.r)

    def _conj_lam(self) -> "Scalar":
        p = self.parts
        return Scalar._make(self.e, (p[0] + p[1], -p[1], p[2] + p[3], -p[3]), self.den, self.r)

    def inv(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero scalar")
        if self.r is None:
            p0 = self.parts[0]
            lc = p0.leading_coefficient()
            num = (self.den if self.den is not None else _ONE) / lc
            return Scalar._make(-self.e, (num, _ZERO, _ZERO, _ZERO), p0 / lc, None)
        c1 = self._conj_rho()
        n1 = self * c1
        c2 = n1._conj_lam()
        n2 = n1 * c2
        if n2.is_zero() or not n2.is_pure():
            raise ZeroDivisionError("scalar is a zero divisor in the quadratic extension")
        return c1 * c2 * n2.inv()

    def __truediv__(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            other = Scalar.const(other)
        return self * other.inv()

    def __rtruediv__(self, other) -> "Scalar":
        return Scalar.const(other) * self.inv()

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            return self.inv() ** (-n)
        out, base = ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # views ------------------------------------------------------------------
    def terms(self) -> dict[int, tuple[Fraction, Fraction, Fraction, Fraction]]:
        """Map exponent of ``s`` to the 4-tuple ``(c0, c_lam, c_rho, c_lamrho)``.

        Only defined when the denominator is 1.
        """
        if self.den is not None:
            raise ValueError("scalar has a nontrivial denominator")
        out: dict[int, list[Fraction]] = {}
        for idx, p in enumerate(self.parts):
            for i, c in enumerate(p.coeffs()):
                if c != 0:
                    out.setdefault(self.e + i, [Fraction(0)] * 4)[idx] = Fraction(int(c.p), int(c.q))
        return {k: tuple(v) for k, v in sorted(out.items())}

    def to_json(self) -> dict:
        def enc(p):
            return [str(c) for c in p.coeffs()]

        return {
            "shift": self.e,
            "num": [enc(p) for p in self.parts],
            "den": None if self.den is None else enc(self.den),
            "r": None if self.r is None else str(self.r),
        }

    def evaluate(self, q: float, r: float | None = None) -> float:
        """Float value at ``s = q**0.5``, ``lam = lam_+(r)``, ``rho = r**0.5``."""
        if self.is_zero():
            return 0.0
        if self._fl is None:
            self._fl = (
                [_floats(p) for p in self.parts],
                None if self.den is None else _floats(self.den),
            )
        nums, den = self._fl
        s = math.sqrt(q)
        val = _horner(nums[0], s)
        if self.r is not None:
            rr = float(self.r) if r is None else float(r)
            lam = 0.5 + math.sqrt(rr + 0.25)
            rho = math.sqrt(rr)
            val += lam * _horner(nums[1], s) + rho * _horner(nums[2], s) + lam * rho * _horner(nums[3], s)
        if den is not None:
            val /= _horner(den, s)
        return val * s ** self.e

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        names = ["", "lam", "rho", "lam*rho"]
        chunks = []
        for name, p in zip(names, self.parts):
            if p.is_zero():
                continue
            terms = []
            for i, c in enumerate(p.coeffs()):
                if c != 0:
                    k = self.e + i
                    terms.append(f"{c}" + ("" if k == 0 else f"*s^{k}"))
            body = " + ".join(terms)
            chunks.append(f"({body})" + (f"*{name}" if name else ""))
        out = " + ".join(chunks)
        if self.den is not None:
            out = f"({out})/({self.den.str(var='s')})"
        return out


ZERO = Scalar(0, (_ZERO, _ZERO, _ZERO, _ZERO), None, None)
ONE = Scalar(0, (_ONE, _ZERO, _ZERO, _ZERO), None, None)


def as_scalar(x) -> Scalar:
    return x if isinstance(x, Scalar) else Scalar.const(x)


# q-numbers -------------------------------------------------------------------
def qbracket(n: Rational) -> Scalar:
    """Exact ``[n] = (q^n - q^-n)/(q - q^-1)``; Laurent in ``s`` for integer ``n``."""
    n = Fraction(n)
    if n == 0:
        return ZERO
    if n < 0:
        return -qbracket(-n)
    if n.denominator == 1:
        m = int(n)
        # q^{-(m-1)} (1 + q^2 + ... + q^{2(m-1)})
        return Scalar.laurent({-2 * (m - 1) + 4 * i: 1 for i in range(m)})
    return (Scalar.qpow(n) - Scalar.qpow(-n)) / (Scalar.qpow(1) - Scalar.qpow(-1))


def qnum(n: float, q: float) -> float:
    """Float q-bracket."""
    if n == 0:
        return 0.0
    return (q ** n - q ** (-n)) / (q - 1.0 / q)


def lambda_n(n: int, q: float) -> float:
    """``(1 - q^(2n))^(1/2)``."""
    if n < 0:
        raise ValueError("lambda_n needs n >= 0")
    return math.sqrt(1.0 - q ** (2 * n))


# parameters ------------------------------------------------------------------
def _rat_sqrt(x: Fraction) -> Fraction | None:
    """Rational square root of a nonnegative rational, or None."""
    x = Fraction(x)
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


INF = math.inf


def parse_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 12)
    return Fraction(x)


def parse_r(x) -> Fraction | float:
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    if isinstance(x, float) and math.isinf(x):
        return INF
    return parse_rational(x)


@dataclass(frozen=True)
class ParamContext:
    """Deformation parameter ``q``, sphere parameter ``r`` (``INF`` allowed) and tolerances.

    ``perturb`` multiplies one designated coefficient per check family by
    ``1 + perturb``; it exists only for negative controls.
    """

    q: Fraction = Fraction(1, 2)
    r: Fraction | float = Fraction(1)
    tol: float = 1e-9
    exact: bool = True
    perturb: Fraction = Fraction(0)
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "q", parse_rational(self.q))
        object.__setattr__(self, "r", parse_r(self.r))
        object.__setattr__(self, "perturb", parse_rational(self.perturb))
        if not (0 < self.q < 1):
            raise ValueError(f"q must lie in (0,1), got {self.q}")
        if not self.is_inf and self.r < 0:
            raise ValueError(f"r must be >= 0 or inf, got {self.r}")

    # modes
    @property
    def is_inf(self) -> bool:
        return isinstance(self.r, float) and math.isinf(self.r)

    @property
    def is_zero(self) -> bool:
        return not self.is_inf and self.r == 0

    @property
    def qf(self) -> float:
        return float(self.q)

    @property
    def rf(self) -> float:
        return math.inf if self.is_inf else float(self.r)

    @property
    def r_rel(self) -> Fraction:
        """The constant entering the r-dependent relations (1 when r is infinite)."""
        return Fraction(1) if self.is_inf else self.r

    def with_(self, **kw) -> "ParamContext":
        d = dict(q=self.q, r=self.r, tol=self.tol, exact=self.exact, perturb=self.perturb,
                 threads=self.threads)
        d.update(kw)
        return ParamContext(**d)

    def pert(self) -> Scalar:
        """``1 + perturb`` as an exact scalar (negative-control hook)."""
        return Scalar.const(1 + self.perturb)

    def to_json(self) -> dict:
        return {"q": str(self.q), "r": "inf" if self.is_inf else str(self.r), "tol": self.tol}

    # exact constants
    def ev(self, x: Scalar) -> float:
        return eval_numeric(x, self)

    def lam_plus(self) -> Scalar:
        if self.is_inf or self.is_zero:
            return ONE
        root = _rat_sqrt(4 * self.r + 1)
        if root is not None:
            return Scalar.const((1 + root) / 2)
        return Scalar.lam(self.r)

    def lam_minus(self) -> Scalar:
        if self.is_inf:
            return -ONE
        if self.is_zero:
            return ZERO
        return ONE - self.lam_plus()

    def rho(self) -> Scalar:
        """``r^(1/2)`` (only for finite r).

        Rational square roots are returned as rationals, and when ``r^(1/2)``
        lies in the field generated by ``lam`` it is written through ``lam``,
        so that the scalar ring stays a field.
        """
        if self.is_inf:
            raise ValueError("r^(1/2) is undefined for r = inf")
        if self.is_zero:
            return ZERO
        root = _rat_sqrt(self.r)
        if root is not None:
            return Scalar.const(root)
        ratio = _rat_sqrt(self.r / (4 * self.r + 1))
        if ratio is not None and _rat_sqrt(4 * self.r + 1) is None:
            return (self.lam_plus() * 2 - 1) * ratio
        return Scalar.rho(self.r)

    def rho_inv(self) -> Scalar:
        if self.is_inf or self.is_zero:
            raise ValueError("r^(-1/2) needs 0 < r < inf")
        return self.rho() / Scalar.const(self.r)

    def sparam(self) -> Scalar:
        """The parameter ``s = r^(1/2)/lam_+`` of the vectors u_j, w_j."""
        if self.is_inf:
            return ONE
        if self.is_zero:
            return ZERO
        return self.rho() * (self.lam_plus() - 1) / Scalar.const(self.r)

    def lam_q(self) -> Scalar:
        """``q - q^-1``."""
        return Scalar.spow(2) - Scalar.spow(-2)

    def mu(self, j: Rational) -> Scalar:
        """Eigenvalue of the right action of X_r on u_j."""
        j = Fraction(j)
        q2j, qm2j = Scalar.qpow(2 * j), Scalar.qpow(-2 * j)
        if self.is_zero:
            return ONE - q2j
        pref = Scalar.spow(1) / (Scalar.spow(-2) - Scalar.spow(2))
        if self.is_inf:
            return pref * (qm2j - q2j)
        return pref * self.rho_inv() * (ONE - qm2j * self.lam_minus() - q2j * self.lam_plus())

    def gamma(self, sign: int) -> Scalar:
        lp, lm = self.lam_plus(), self.lam_minus()
        one_q2 = ONE - Scalar.spow(4)
        if self.is_zero:
            return one_q2 if sign > 0 else ZERO
        num = lp if sign > 0 else lm
        den = (lp - lm) if sign > 0 else (lm - lp)
        return one_q2 * num / den

    def rho_abbrev(self) -> Scalar:
        b2 = qbracket(2)
        if self.is_inf:
            return b2 * b2
        return ONE + b2 * b2 * Scalar.const(self.r)

    # float constants
    def lam_pm_f(self, sign: int) -> float:
        if self.is_inf:
            return float(sign)
        return 0.5 + sign * math.sqrt(float(self.r) + 0.25)


def eval_numeric(x: Scalar, ctx: ParamContext) -> float:
    """Float value of an exact scalar under ``ctx``."""
    x = as_scalar(x)
    if x.r is not None:
        if ctx.is_inf:
            raise ValueError("expression carries the symbol r but r = inf")
        if Fraction(int(x.r.p), int(x.r.q)) != ctx.r:
            raise ValueError(f"scalar built for r={x.r}, context has r={ctx.r}")
    return x.evaluate(ctx.qf)
