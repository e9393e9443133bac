"""Noncommutative polynomials, rewriting to PBW normal form, and the presentation catalog."""
from __future__ import annotations

import itertools
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .qcoeff import ONE, ZERO, ParamContext, Scalar, as_scalar, qbracket
from .report import CheckReport

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

Word = tuple


def _acc(out: dict, w, c: Scalar) -> None:
    if c.is_zero():
        return
    old = out.get(w)
    if old is None:
        out[w] = c
    else:
        new = old + c
        if new.is_zero():
            del out[w]
        else:
            out[w] = new


class NCPoly:
    """Finite linear combination of words with :class:`Scalar` coefficients.

    When ``pres`` is set, products are reduced to normal form.
    """

    __slots__ = ("terms", "pres")

    def __init__(self, terms: Mapping | None = None, pres: "Presentation | None" = None):
        self.terms: dict = {}
        if terms:
            for w, c in terms.items():
                _acc(self.terms, tuple(w), as_scalar(c))
        self.pres = pres

    @classmethod
    def _raw(cls, terms: dict, pres) -> "NCPoly":
        out = cls.__new__(cls)
        out.terms = terms
        out.pres = pres
        return out

    # constructors
    @classmethod
    def const(cls, c, pres=None) -> "NCPoly":
        return cls({(): as_scalar(c)}, pres)

    @classmethod
    def word(cls, w: Iterable[str], c=ONE, pres=None) -> "NCPoly":
        return cls({tuple(w): as_scalar(c)}, pres)

    # basic protocol
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def coeff(self, w) -> Scalar:
        return self.terms.get(tuple(w), ZERO)

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def _p(self, other):
        return self.pres if self.pres is not None else getattr(other, "pres", None)

    def __add__(self, other) -> "NCPoly":
        if not isinstance(other, NCPoly):
            other = NCPoly.const(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            _acc(out, w, c)
        return NCPoly._raw(out, self._p(other))

    __radd__ = __add__

    def __neg__(self) -> "NCPoly":
        return NCPoly._raw({w: -c for w, c in self.terms.items()}, self.pres)

    def __sub__(self, other) -> "NCPoly":
        if not isinstance(other, NCPoly):
            other = NCPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "NCPoly":
        return NCPoly.const(other, self.pres) - self

    def scale(self, c) -> "NCPoly":
        c = as_scalar(c)
        if c.is_zero():
            return NCPoly._raw({}, self.pres)
        return NCPoly._raw({w: v * c for w, v in self.terms.items()}, self.pres)

    def __mul__(self, other) -> "NCPoly":
        if isinstance(other, NCPoly):
            pres = self._p(other)
            if pres is not None:
                return pres.mul(self, other)
            out: dict = {}
            for u, a in self.terms.items():
                for v, b in other.terms.items():
                    _acc(out, u + v, a * b)
            return NCPoly._raw(out, None)
        return self.scale(other)

    def __rmul__(self, other) -> "NCPoly":
        return self.scale(other)

    def __pow__(self, n: int) -> "NCPoly":
        out = NCPoly.const(ONE, self.pres)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCPoly):
            other = NCPoly.const(other)
        diff = self - other
        if diff.pres is not None:
            diff = diff.pres.normal_form(diff)
        return diff.is_zero()

    __hash__ = None

    def map_coeffs(self, fn: Callable[[Scalar], Scalar]) -> "NCPoly":
        return NCPoly({w: fn(c) for w, c in self.terms.items()}, self.pres)

    def evaluate(self, ctx: ParamContext) -> dict:
        return {w: ctx.ev(c) for w, c in self.terms.items()}

    def star(self) -> "NCPoly":
        if self.pres is None:
            raise ValueError("involution needs a presentation")
        return self.pres.star(self)

    def nf(self) -> "NCPoly":
        return self.pres.normal_form(self)

    def sorted_items(self):
        if self.pres is not None:
            return sorted(self.terms.items(), key=lambda t: self.pres.key(t[0]))
        return sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0]))

    def to_json(self) -> list:
        return [[" ".join(w), c.to_json()] for w, c in self.sorted_items()]

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.sorted_items():
            parts.append(f"({c})" + ("*" + "*".join(w) if w else ""))
        return " + ".join(parts)


# ----------------------------------------------------------------------------
@dataclass
class Presentation:
    """Generators, monomial order, rewrite rules and involution of an algebra.

    The order compares words by the graded sums listed in ``gradings`` (each
    a letter-weight map), then by length, then lexicographically along
    ``alphabet``.  Rule keys are leading words; values map words to scalars.
    """

    name: str
    alphabet: tuple
    rules: dict
    involution: dict
    gradings: tuple = ()
    variant: str = ""
    _append_memo: dict = field(default_factory=dict, repr=False)
    _mul_memo: dict = field(default_factory=dict, repr=False)
    _star_memo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {g: i for i, g in enumerate(self.alphabet)}
        self._pair_rules = all(len(k) == 2 for k in self.rules)
        self._maxlen = max((len(k) for k in self.rules), default=0)

    # monomial order
    def key(self, w: Word):
        return (
            tuple(sum(g.get(x, 0) for x in w) for g in self.gradings),
            len(w),
            tuple(self._index[x] for x in w),
        )

    def gen(self, name: str) -> NCPoly:
        if name not in self._index:
            raise KeyError(f"{name} is not a generator of {self.name}")
        return NCPoly._raw({(name,): ONE}, self)

    def one(self) -> NCPoly:
        return NCPoly._raw({(): ONE}, self)

    def zero(self) -> NCPoly:
        return NCPoly._raw({}, self)

    def elem(self, terms: Mapping) -> NCPoly:
        return self.normal_form(NCPoly(terms, self))

    def is_normal(self, w: Word) -> bool:
        if self._pair_rules:
            return not any((w[i], w[i + 1]) in self.rules for i in range(len(w) - 1))
        return self._find_redex(w) is None

    # reduction
    def _find_redex(self, w: Word):
        for i in range(len(w)):
            for L in range(2, self._maxlen + 1):
                if i + L <= len(w) and w[i:i + L] in self.rules:
                    return i, L
            if (w[i],) in self.rules:
                return i, 1
        return None

    def _append(self, u: Word, x: str) -> dict:
        key = (u, x)
        hit = self._append_memo.get(key)
        if hit is not None:
            return hit
        if u and (u[-1], x) in self.rules:
            out: dict = {}
            prefix = u[:-1]
            for w, c in self.rules[(u[-1], x)].items():
                for w2, c2 in self._mul_words(prefix, w).items():
                    _acc(out, w2, c * c2)
        else:
            out = {u + (x,): ONE}
        self._append_memo[key] = out
        return out

    def _mul_words(self, u: Word, v: Word) -> dict:
        """Normal form of ``u*v`` for normal words ``u``, ``v``."""
        if not v:
            return {u: ONE}
        if not u:
            if self.is_normal(v):
                return {v: ONE}
        key = (u, v)
        hit = self._mul_memo.get(key)
        if hit is not None:
            return hit
        if not self._pair_rules:
            out = self._nf_word_generic(u + v)
        else:
            cur = {u: ONE}
            for x in v:
                nxt: dict = {}
                for w, c in cur.items():
                    for w2, c2 in self._append(w, x).items():
                        _acc(nxt, w2, c * c2)
                cur = nxt
            out = cur
        self._mul_memo[key] = out
        return out

    def _nf_word_generic(self, w: Word, steps: list | None = None) -> dict:
        steps = steps if steps is not None else [0]
        red = self._find_redex(w)
        if red is None:
            return {w: ONE}
        steps[0] += 1
        if steps[0] > 10 ** 6:
            raise RuntimeError(f"rewriting in {self.name} does not terminate")
        i, L = red
        out: dict = {}
        for v, c in self.rules[w[i:i + L]].items():
            for v2, c2 in self._nf_word_generic(w[:i] + v + w[i + L:], steps).items():
                _acc(out, v2, c * c2)
        return out

    def normal_form_word(self, w: Word) -> dict:
        w = tuple(w)
        for x in w:
            if x not in self._index:
                raise KeyError(f"{x} is not a generator of {self.name}")
        return self._mul_words((), w)

    def normal_form(self, x: NCPoly) -> NCPoly:
        out: dict = {}
        for w, c in x.terms.items():
            for w2, c2 in self.normal_form_word(w).items():
                _acc(out, w2, c * c2)
        return NCPoly._raw(out, self)

    def mul(self, x: NCPoly, y: NCPoly) -> NCPoly:
        """Product of two elements; both are normal-formed first."""
        if x.pres is not self or any(not self.is_normal(w) for w in x.terms):
            x = self.normal_form(x)
        if y.pres is not self or any(not self.is_normal(w) for w in y.terms):
            y = self.normal_form(y)
        out: dict = {}
        for u, a in x.terms.items():
            for v, b in y.terms.items():
                ab = a * b
                for w, c in self._mul_words(u, v).items():
                    _acc(out, w, ab * c)
        return NCPoly._raw(out, self)

    def prod(self, *xs) -> NCPoly:
        out = self.one()
        for x in xs:
            out = self.mul(out, x if isinstance(x, NCPoly) else NCPoly.const(x, self))
        return out

    def commutator(self, x: NCPoly, y: NCPoly) -> NCPoly:
        return self.mul(x, y) - self.mul(y, x)

    # involution
    def star_word(self, w: Word) -> dict:
        hit = self._star_memo.get(w)
        if hit is not None:
            return hit
        cur = {(): ONE}
        for x in reversed(w):
            img = self.involution[x]
            nxt: dict = {}
            for u, a in cur.items():
                for v, b in img.items():
                    for w2, c in self._mul_words(u, v).items():
                        _acc(nxt, w2, a * b * c)
            cur = nxt
        self._star_memo[w] = cur
        return cur

    def star(self, x: NCPoly) -> NCPoly:
        if x.pres is not self or any(not self.is_normal(w) for w in x.terms):
            x = self.normal_form(x)
        out: dict = {}
        for w, c in x.terms.items():
            for w2, c2 in self.star_word(w).items():
                _acc(out, w2, c * c2)
        return NCPoly._raw(out, self)

    # parsing
    def parse(self, text: str, ctx: ParamContext | None = None) -> NCPoly:
        return self.normal_form(_Parser(text, self, ctx).parse())

    # diagnostics
    def check_order(self) -> list:
        """Rules whose right-hand side is not strictly below the leading word."""
        bad = []
        for lhs, rhs in self.rules.items():
            k = self.key(lhs)
            for w in rhs:
                if not self.key(w) < k:
                    bad.append((lhs, w))
        return bad

    def overlaps(self, max_degree: int = 6) -> list:
        """Words ``xyz`` where leading words overlap (self-overlaps included)."""
        keys = list(self.rules)
        out = set()
        for l1 in keys:
            for l2 in keys:
                for k in range(1, min(len(l1), len(l2))):
                    if l1[-k:] == l2[:k]:
                        w = l1 + l2[k:]
                        if len(w) <= max_degree:
                            out.add((w, len(l1)))
        return sorted(out, key=lambda t: self.key(t[0]))

    def check_confluence(self, max_degree: int = 6) -> tuple[int, list]:
        """Resolve every overlap ambiguity; return (count, failures)."""
        fails = []
        ovs = self.overlaps(max_degree)
        for w, l1len in ovs:
            lhs1 = w[:l1len]
            left = NCPoly._raw({}, self)
            for v, c in self.rules[lhs1].items():
                left = left + NCPoly.word(v + w[l1len:], c, self)
            # second reduction: leading word that starts inside lhs1
            for start in range(1, l1len):
                for L in range(2, self._maxlen + 1):
                    seg = w[start:start + L]
                    if len(seg) == L and start + L > l1len and seg in self.rules:
                        right = NCPoly._raw({}, self)
                        for v, c in self.rules[seg].items():
                            right = right + NCPoly.word(w[:start] + v + w[start + L:], c, self)
                        d = self.normal_form(left) - self.normal_form(right)
                        if not d.is_zero():
                            fails.append((w, d))
        return len(ovs), fails

    def check_involution(self) -> list:
        """Rules ``L -> R`` with ``nf(L*) != nf(R*)``."""
        fails = []
        for lhs, rhs in self.rules.items():
            a = self._star_free(NCPoly.word(lhs, ONE))
            b = self._star_free(NCPoly(rhs))
            d = self.normal_form(a) - self.normal_form(b)
            if not d.is_zero():
                fails.append((lhs, d))
        return fails

    def _star_free(self, x: NCPoly) -> NCPoly:
        """Involution applied letterwise without prior reduction."""
        out = NCPoly._raw({}, None)
        for w, c in x.terms.items():
            term = NCPoly.const(c)
            for letter in reversed(w):
                term = term * NCPoly(self.involution[letter])
            out = out + term
        return out

    def check_strategies(self, max_len: int = 4) -> list:
        """Compare left-to-right folding with generic leftmost rewriting on all short words."""
        fails = []
        for n in range(max_len + 1):
            for w in itertools.product(self.alphabet, repeat=n):
                a = self._mul_words((), w) if self._pair_rules else None
                b = self._nf_word_generic(w)
                if a is not None:
                    d = NCPoly(a, self) - NCPoly(b, self)
                    if not d.is_zero():
                        fails.append(w)
        return fails


# ----------------------------------------------------------------------------
# parser for the textual element syntax
_TOKEN = re.compile(r"\s*(q\^\(\s*-?\d+(?:/\d+)?\s*\)|\d+(?:/\d+)?|[A-Za-z]+|\^|\*|\+|-|\(|\))")


class _Parser:
    def __init__(self, text: str, pres: Presentation, ctx: ParamContext | None):
        self.pres = pres
        self.ctx = ctx
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise ValueError(f"cannot parse element near {text[pos:]!r}")
            self.toks.append(m.group(1))
            pos = m.end()
        self.i = 0
        self.names = sorted(pres.alphabet, key=len, reverse=True)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> NCPoly:
        out = self.expr()
        if self.peek() is not None:
            raise ValueError(f"unexpected token {self.peek()!r}")
        return out

    def expr(self) -> NCPoly:
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
        out = self.term().scale(sign)
        while self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
            out = out + self.term().scale(sign)
        return out

    def term(self) -> NCPoly:
        out = self.factor()
        while self.peek() is not None and self.peek() not in ("+", "-", ")"):
            if self.peek() == "*":
                self.take()
            out = out * self.factor()
        return out

    def factor(self) -> NCPoly:
        base = self.atom()
        if self.peek() == "^":
            self.take()
            n = int(self.take())
            base = base ** n
        return base

    def atom(self) -> NCPoly:
        t = self.take()
        if t is None:
            raise ValueError("unexpected end of element")
        if t == "(":
            out = self.expr()
            if self.take() != ")":
                raise ValueError("unbalanced parentheses")
            return out
        if t.startswith("q^("):
            return NCPoly.const(Scalar.qpow(Fraction(t[3:-1].strip())), self.pres)
        if t[0].isdigit():
            return NCPoly.const(Fraction(t), self.pres)
        if t in ("lam", "rho") and t not in self.pres.alphabet:
            if self.ctx is None:
                raise ValueError(f"{t} needs a parameter context")
            return NCPoly.const(self.ctx.lam_plus() if t == "lam" else self.ctx.rho(), self.pres)
        # split juxtaposed generator names greedily
        out = NCPoly.const(ONE, self.pres)
        rest = t
        while rest:
            for name in self.names:
                if rest.startswith(name):
                    out = out * self.pres.gen(name)
                    rest = rest[len(name):]
                    break
            else:
                raise ValueError(f"unknown generator in {t!r}")
        return out


# ----------------------------------------------------------------------------
# catalog
def _q(x) -> Scalar:
    return Scalar.qpow(Fraction(x))


def _t(*pairs) -> dict:
    """Build a term dict from ``(coefficient, "w o r d")`` pairs."""
    out: dict = {}
    for c, w in pairs:
        _acc(out, tuple(w.split()), as_scalar(c))
    return out


def _inv_lamq() -> Scalar:
    return (Scalar.spow(2) - Scalar.spow(-2)).inv()


def _uq_rules(pert: Scalar) -> dict:
    li = _inv_lamq()
    return {
        ("K", "Kinv"): _t((1, "")),
        ("Kinv", "K"): _t((1, "")),
        ("K", "F"): _t((_q(-1) * pert, "F K")),
        ("Kinv", "F"): _t((_q(1), "F Kinv")),
        ("E", "K"): _t((_q(-1), "K E")),
        ("E", "Kinv"): _t((_q(1), "Kinv E")),
        ("E", "F"): _t((1, "F E"), (li, "K K"), (-li, "Kinv Kinv")),
    }


def _uq_inv() -> dict:
    return {"E": _t((1, "F")), "F": _t((1, "E")), "K": _t((1, "K")), "Kinv": _t((1, "Kinv"))}


def _hat_rules() -> dict:
    li = _inv_lamq()
    return {
        ("k", "kinv"): _t((1, "")),
        ("kinv", "k"): _t((1, "")),
        ("k", "f"): _t((_q(-2), "f k")),
        ("kinv", "f"): _t((_q(2), "f kinv")),
        ("e", "k"): _t((_q(-2), "k e")),
        ("e", "kinv"): _t((_q(2), "kinv e")),
        ("e", "f"): _t((1, "f e"), (li, "k"), (-li, "kinv")),
    }


def _hat_inv() -> dict:
    # e = EK, f = K^-1 F:  e* = KF = q^-2 f k,  f* = E K^-1 = q^2 kinv e
    return {"e": _t((_q(-2), "f k")), "f": _t((_q(2), "kinv e")),
            "k": _t((1, "k")), "kinv": _t((1, "kinv"))}


def _suq2_rules() -> dict:
    return {
        ("c", "b"): _t((1, "b c")),
        ("a", "b"): _t((_q(1), "b a")),
        ("a", "c"): _t((_q(1), "c a")),
        ("d", "b"): _t((_q(-1), "b d")),
        ("d", "c"): _t((_q(-1), "c d")),
        ("a", "d"): _t((1, ""), (_q(1), "b c")),
        ("d", "a"): _t((1, ""), (_q(-1), "b c")),
    }


def _suq2_inv() -> dict:
    return {"a": _t((1, "d")), "d": _t((1, "a")), "b": _t((-_q(1), "c")), "c": _t((-_q(-1), "b"))}


def _sphere_rules(ctx: ParamContext, localized: bool) -> dict:
    q2, q4 = _q(2), _q(4)
    if ctx.is_inf:
        bsb = _t((-1, "A A"), (1, ""))
        bbs = _t((-q4, "A A"), (1, ""))
    else:
        r = Scalar.const(ctx.r)
        bsb = _t((1, "A"), (-1, "A A"), (r, ""))
        bbs = _t((q2, "A"), (-q4, "A A"), (r, ""))
    rules = {
        ("B", "A"): _t((_q(2), "A B")),  # AB = q^-2 BA
        ("Bst", "A"): _t((_q(-2), "A Bst")),  # AB* = q^2 B*A
        ("Bst", "B"): bsb,
        ("B", "Bst"): bbs,
    }
    if localized:
        rules.update({
            ("A", "Ainv"): _t((1, "")),
            ("Ainv", "A"): _t((1, "")),
            ("B", "Ainv"): _t((_q(-2), "Ainv B")),
            ("Bst", "Ainv"): _t((_q(2), "Ainv Bst")),
        })
    return rules


def _sphere_inv(localized: bool) -> dict:
    out = {"A": _t((1, "A")), "B": _t((1, "Bst")), "Bst": _t((1, "B"))}
    if localized:
        out["Ainv"] = _t((1, "Ainv"))
    return out


def _cross_EFK_rules(ctx: ParamContext) -> dict:
    inf = ctx.is_inf
    one_q2 = ONE + _q(2)
    rules = {
        ("K", "A"): _t((1, "A K")),
        ("Kinv", "A"): _t((1, "A Kinv")),
        ("K", "Ainv"): _t((1, "Ainv K")),
        ("Kinv", "Ainv"): _t((1, "Ainv Kinv")),
        ("K", "B"): _t((_q(-1), "B K")),
        ("Kinv", "B"): _t((_q(1), "B Kinv")),
        ("K", "Bst"): _t((_q(1), "Bst K")),
        ("Kinv", "Bst"): _t((_q(-1), "Bst Kinv")),
        ("E", "A"): _t((1, "A E"), (_q(Fraction(-1, 2)), "Bst K")),
        ("F", "A"): _t((1, "A F"), (-_q(Fraction(-3, 2)), "B K")),
        ("E", "B"): _t((_q(1), "B E"), (-_q(Fraction(1, 2)) * one_q2, "A K"),
                       *(() if inf else ((_q(Fraction(1, 2)), "K"),))),
        ("F", "B"): _t((_q(1), "B F")),
        ("E", "Bst"): _t((_q(-1), "Bst E")),
        ("F", "Bst"): _t((_q(-1), "Bst F"), (_q(Fraction(-1, 2)) * one_q2, "A K"),
                         *(() if inf else ((-_q(Fraction(-1, 2)), "K"),))),
        ("E", "Ainv"): _t((1, "Ainv E"), (-_q(Fraction(-5, 2)), "Bst Ainv Ainv K")),
        ("F", "Ainv"): _t((1, "Ainv F"), (_q(Fraction(1, 2)), "B Ainv Ainv K")),
    }
    return rules


def _cross_efk_rules(ctx: ParamContext) -> dict:
    inf = ctx.is_inf
    one_q2 = ONE + _q(2)
    return {
        ("k", "A"): _t((1, "A k")),
        ("kinv", "A"): _t((1, "A kinv")),
        ("k", "Ainv"): _t((1, "Ainv k")),
        ("kinv", "Ainv"): _t((1, "Ainv kinv")),
        ("k", "B"): _t((_q(-2), "B k")),
        ("kinv", "B"): _t((_q(2), "B kinv")),
        ("k", "Bst"): _t((_q(2), "Bst k")),
        ("kinv", "Bst"): _t((_q(-2), "Bst kinv")),
        ("e", "A"): _t((1, "A e"), (_q(Fraction(-1, 2)), "Bst k")),
        ("e", "B"): _t((1, "B e"), (-_q(Fraction(-1, 2)) * one_q2, "A k"),
                       *(() if inf else ((_q(Fraction(-1, 2)), "k"),))),
        ("e", "Bst"): _t((1, "Bst e")),
        ("f", "A"): _t((1, "A f"), (-_q(Fraction(-1, 2)), "B")),
        ("f", "B"): _t((_q(2), "B f")),
        ("f", "Bst"): _t((_q(-2), "Bst f"), (_q(Fraction(-1, 2)) * one_q2, "A"),
                         *(() if inf else ((-_q(Fraction(-1, 2)), ""),))),
        ("e", "Ainv"): _t((1, "Ainv e"), (-_q(Fraction(-5, 2)), "Bst Ainv Ainv k")),
        ("f", "Ainv"): _t((1, "Ainv f"), (_q(Fraction(3, 2)), "B Ainv Ainv")),
    }


def _yr_rules(ctx: ParamContext) -> dict:
    r = Scalar.const(ctx.r_rel)
    one_q2 = ONE - _q(2)
    return {
        ("Y", "Yinv"): _t((1, "")),
        ("Yinv", "Y"): _t((1, "")),
        ("Y", "X"): _t((_q(2), "X Y")),
        ("Yinv", "X"): _t((_q(-2), "X Yinv")),
        ("Xst", "Y"): _t((_q(2), "Y Xst")),
        ("Xst", "Yinv"): _t((_q(-2), "Yinv Xst")),
        ("Xst", "X"): _t((_q(2), "X Xst"), (one_q2, "Y Y"), (one_q2 * r, "")),
    }


_SPHERE = ("Ainv", "A", "B", "Bst")
_SPHERE_W = {"A": 1, "Ainv": 1, "B": 2, "Bst": 2}

PRESENTATION_NAMES = (
    "Uq_su2", "Uq_su2_hat", "O_SUq2", "O_S2qr", "O_S2qr_localized",
    "cross_EFK", "cross_efk", "cross_decoupled_XY", "cross_decoupled_XK", "Yr",
)

_CACHE: dict = {}


def make_presentation(name: str, ctx: ParamContext | None = None) -> Presentation:
    """Presentation ``name`` with the r-variant selected by ``ctx`` (cached)."""
    ctx = ctx or ParamContext()
    if name not in PRESENTATION_NAMES:
        raise KeyError(f"unknown presentation {name!r}; expected one of {PRESENTATION_NAMES}")
    key = (name, "inf" if ctx.is_inf else ctx.r, ctx.perturb)
    if key in _CACHE:
        return _CACHE[key]
    variant = "r=inf" if ctx.is_inf else f"r={ctx.r}"
    pert = ctx.pert()
    if name == "Uq_su2":
        p = Presentation(name, ("F", "Kinv", "K", "E"), _uq_rules(pert), _uq_inv(),
                         ({"E": 1, "F": 1},), "any r")
    elif name == "Uq_su2_hat":
        p = Presentation(name, ("f", "kinv", "k", "e"), _hat_rules(), _hat_inv(),
                         ({"e": 1, "f": 1},), "any r")
    elif name == "O_SUq2":
        p = Presentation(name, ("b", "c", "a", "d"), _suq2_rules(), _suq2_inv(), (), "any r")
    elif name == "O_S2qr":
        p = Presentation(name, ("A", "B", "Bst"), _sphere_rules(ctx, False), _sphere_inv(False),
                         ({"A": 1, "B": 2, "Bst": 2},), variant)
    elif name == "O_S2qr_localized":
        p = Presentation(name, _SPHERE, _sphere_rules(ctx, True), _sphere_inv(True),
                         (_SPHERE_W,), variant)
    elif name == "cross_EFK":
        rules = {**_sphere_rules(ctx, True), **_uq_rules(pert), **_cross_EFK_rules(ctx)}
        inv = {**_sphere_inv(True), **_uq_inv()}
        p = Presentation(name, _SPHERE + ("F", "Kinv", "K", "E"), rules, inv,
                         ({"E": 1, "F": 1}, _SPHERE_W), variant)
    elif name == "cross_efk":
        rules = {**_sphere_rules(ctx, True), **_hat_rules(), **_cross_efk_rules(ctx)}
        inv = {**_sphere_inv(True), **_hat_inv()}
        p = Presentation(name, _SPHERE + ("f", "kinv", "k", "e"), rules, inv,
                         ({"e": 1, "f": 1}, _SPHERE_W), variant)
    elif name == "Yr":
        p = Presentation(name, ("X", "Yinv", "Y", "Xst"), _yr_rules(ctx),
                         {"X": _t((1, "Xst")), "Xst": _t((1, "X")), "Y": _t((1, "Y")),
                          "Yinv": _t((1, "Yinv"))},
                         ({"X": 2, "Xst": 2, "Y": 1, "Yinv": 1},), variant)
    elif name == "cross_decoupled_XY":
        rules = {**_sphere_rules(ctx, True), **_yr_rules(ctx)}
        for y in ("X", "Xst", "Y", "Yinv"):
            for c in _SPHERE:
                rules[(y, c)] = _t((1, f"{c} {y}"))
        inv = {**_sphere_inv(True), "X": _t((1, "Xst")), "Xst": _t((1, "X")),
               "Y": _t((1, "Y")), "Yinv": _t((1, "Yinv"))}
        p = Presentation(name, _SPHERE + ("X", "Yinv", "Y", "Xst"), rules, inv,
                         ({**_SPHERE_W, "X": 2, "Xst": 2, "Y": 1, "Yinv": 1},), variant)
    else:  # cross_decoupled_XK
        r = Scalar.const(ctx.r_rel)
        one_q2 = ONE - _q(2)
        rules = {**_sphere_rules(ctx, True)}
        rules.update({
            ("K", "Kinv"): _t((1, "")),
            ("Kinv", "K"): _t((1, "")),
            ("K", "A"): _t((1, "A K")),
            ("Kinv", "A"): _t((1, "A Kinv")),
            ("K", "Ainv"): _t((1, "Ainv K")),
            ("Kinv", "Ainv"): _t((1, "Ainv Kinv")),
            ("K", "B"): _t((_q(-1), "B K")),
            ("Kinv", "B"): _t((_q(1), "B Kinv")),
            ("K", "Bst"): _t((_q(1), "Bst K")),
            ("Kinv", "Bst"): _t((_q(-1), "Bst Kinv")),
            ("K", "X"): _t((_q(-1), "X K")),
            ("Kinv", "X"): _t((_q(1), "X Kinv")),
            ("K", "Xst"): _t((_q(1), "Xst K")),
            ("Kinv", "Xst"): _t((_q(-1), "Xst Kinv")),
            ("Xst", "X"): _t((_q(2), "X Xst"), (one_q2 * _q(2), "A A Kinv Kinv Kinv Kinv"),
                             (one_q2 * r, "")),
        })
        for y in ("X", "Xst"):
            for c in _SPHERE:
                rules[(y, c)] = _t((1, f"{c} {y}"))
        inv = {**_sphere_inv(True), "X": _t((1, "Xst")), "Xst": _t((1, "X")),
               "K": _t((1, "K")), "Kinv": _t((1, "Kinv"))}
        p = Presentation(name, _SPHERE + ("X", "Xst", "Kinv", "K"), rules, inv,
                         ({**_SPHERE_W, "X": 2, "Xst": 2},), variant)
    _CACHE[key] = p
    return p


def substitute(x: NCPoly, images: Mapping[str, NCPoly], target: Presentation) -> NCPoly:
    """Algebra map defined on generators, evaluated in ``target``."""
    out = target.zero()
    for w, c in x.terms.items():
        term = NCPoly.const(c, target)
        for letter in w:
            term = target.mul(term, images[letter])
        out = out + term
    return out


# ----------------------------------------------------------------------------
# decoupled generators inside the cross product with U_q(su2)
def decoupled_images(ctx: ParamContext) -> dict:
    """X, X*, Y, Y^-1, e, f, k, k^-1 written in the localized cross product."""
    P = make_presentation("cross_EFK", ctx)
    lamq = (Scalar.spow(2) - Scalar.spow(-2)) * ctx.pert()
    X = P.elem(_t((_q(Fraction(3, 2)) * lamq, "F Kinv A"), (_q(1), "B")))
    return {
        "X": X,
        "Xst": P.star(X),
        "Y": P.elem(_t((_q(1), "Kinv Kinv A"))),
        "Yinv": P.elem(_t((_q(-1), "Ainv K K"))),
        "e": P.elem(_t((1, "E K"))),
        "f": P.elem(_t((1, "Kinv F"))),
        "k": P.elem(_t((1, "K K"))),
        "kinv": P.elem(_t((1, "Kinv Kinv"))),
        "K": P.gen("K"),
        "Kinv": P.gen("Kinv"),
        **{g: P.gen(g) for g in _SPHERE},
    }


def check_commutant(p: Presentation, ctx: ParamContext | None = None,
                    replace: Mapping[str, str] | None = None) -> CheckReport:
    """Decoupled generators commute with A, B, B*.

    Checked both inside ``p`` and, via the defining formulas, inside the
    localized cross product with U_q(su2).  ``replace`` swaps a decoupled
    generator for a cross-product generator (negative control).
    """
    t0 = time.perf_counter()
    ctx = ctx or ParamContext()
    if p.name not in ("cross_decoupled_XY", "cross_decoupled_XK"):
        raise ValueError("check_commutant needs a decoupled cross presentation")
    ys = ("X", "Xst", "Y", "Yinv") if p.name.endswith("XY") else ("X", "Xst")
    imgs = decoupled_images(ctx)
    C = make_presentation("cross_EFK", ctx)
    replace = dict(replace or {})
    details = {}
    ok = True
    for y in ys:
        for c in ("A", "B", "Bst"):
            if y in replace:
                val = C.commutator(C.gen(replace[y]), C.gen(c))
                inner = val
            else:
                inner = p.commutator(p.gen(y), p.gen(c))
                val = C.commutator(imgs[y], imgs[c])
            zero = inner.is_zero() and val.is_zero()
            details[f"[{y},{c}]"] = "0" if zero else repr(val)[:200]
            ok = ok and zero
    return CheckReport("commutant", ok, params={**ctx.to_json(), "presentation": p.name},
                       residual=None, details=details, elapsed=time.perf_counter() - t0)


def check_decoupling_identities(ctx: ParamContext) -> CheckReport:
    """Substitution identities between E,F,K and the decoupled generators."""
    t0 = time.perf_counter()
    C = make_presentation("cross_EFK", ctx)
    im = decoupled_images(ctx)
    lamq = Scalar.spow(2) - Scalar.spow(-2)
    li = lamq.inv()
    A, B, Bst, K, Kinv, Ainv = (C.gen(g) for g in ("A", "B", "Bst", "K", "Kinv", "Ainv"))
    E, F = C.gen("E"), C.gen("F")
    X, Xst, Y, Yinv = im["X"], im["Xst"], im["Y"], im["Yinv"]
    q = _q
    checks = {}
    # second ordering of X and X*
    X2 = C.elem(_t((q(Fraction(3, 2)) * lamq, "A F Kinv"), (q(-1), "B")))
    Xst1 = C.elem(_t((q(Fraction(3, 2)) * lamq, "A Kinv E"), (q(1), "Bst")))
    Xst2 = C.elem(_t((q(Fraction(3, 2)) * lamq, "Kinv E A"), (q(-1), "Bst")))
    checks["X two orderings"] = X - X2
    checks["X* first ordering"] = Xst - Xst1
    checks["X* second ordering"] = Xst - Xst2
    # F and E recovered
    checks["F from X"] = C.prod(X - B.scale(q(1)), K, Ainv).scale(q(Fraction(-3, 2)) * li) - F
    checks["E from X*"] = C.prod(Ainv, K, Xst - Bst.scale(q(1))).scale(q(Fraction(-3, 2)) * li) - E
    # hat generators
    checks["k = q Y^-1 A"] = C.prod(Yinv, A).scale(q(1)) - im["k"]
    checks["e from X*, Y"] = C.prod(Xst - Bst.scale(q(-1)), Yinv).scale(q(Fraction(1, 2)) * li) - im["e"]
    checks["f from X"] = C.prod(X - B.scale(q(1)), Ainv).scale(q(Fraction(-1, 2)) * li) - im["f"]
    checks["Y Y^-1 = 1"] = C.prod(Y, Yinv) - C.one()
    # relations of the decoupled algebra
    r = Scalar.const(ctx.r_rel)
    checks["YX = q^2 XY"] = C.prod(Y, X) - C.prod(X, Y).scale(q(2))
    checks["YX* = q^-2 X*Y"] = C.prod(Y, Xst) - C.prod(Xst, Y).scale(q(-2))
    checks["X*X - q^2 XX*"] = (C.prod(Xst, X) - C.prod(X, Xst).scale(q(2))
                              - (C.prod(Y, Y) + C.one().scale(r)).scale(ONE - q(2)))
    checks["X*X via K"] = (C.prod(Xst, X) - C.prod(X, Xst).scale(q(2))
                          - (C.prod(Kinv, Kinv, Kinv, Kinv, A, A).scale(q(2)) + C.one().scale(r)).scale(ONE - q(2)))
    checks["XK = qKX"] = C.prod(X, K) - C.prod(K, X).scale(q(1))
    checks["YK = KY"] = C.prod(Y, K) - C.prod(K, Y)
    # relations of the hat algebra
    e, f, k, kinv = im["e"], im["f"], im["k"], im["kinv"]
    checks["ke = q^2 ek"] = C.prod(k, e) - C.prod(e, k).scale(q(2))
    checks["kf = q^-2 fk"] = C.prod(k, f) - C.prod(f, k).scale(q(-2))
    checks["ef - fe"] = C.prod(e, f) - C.prod(f, e) - (k - kinv).scale(li)
    details = {name: ("0" if d.is_zero() else repr(d)[:300]) for name, d in checks.items()}
    ok = all(d.is_zero() for d in checks.values())
    return CheckReport("decoupling_identities", ok, params=ctx.to_json(), residual=None,
                       details=details, elapsed=time.perf_counter() - t0)


def check_presentation(p: Presentation, max_degree: int = 6) -> CheckReport:
    """Order, overlap resolution and involution compatibility of a rule set."""
    t0 = time.perf_counter()
    bad_order = p.check_order()
    n_ov, fails = p.check_confluence(max_degree)
    inv_fails = p.check_involution()
    ok = not bad_order and not fails and not inv_fails
    details = {
        "rules": len(p.rules),
        "overlaps_checked": n_ov,
        "order_violations": [str(b) for b in bad_order],
        "confluence_failures": [" ".join(w) for w, _ in fails][:20],
        "involution_failures": [" ".join(w) for w, _ in inv_fails][:20],
        "pbw_order": " < ".join(p.alphabet),
    }
    return CheckReport(f"presentation:{p.name}", ok, params={"variant": p.variant},
                       residual=None, details=details, elapsed=time.perf_counter() - t0)
