"""Exact coefficient field: rational functions in named parameters over Q.

A coefficient is a reduced fraction of multivariate polynomials in the
session's registered parameters (mesh steps, viscosity, ...).  All
arithmetic is exact; the canonical form is unique, so equality and
printing are structural.  Parameters are ordered by first registration,
which fixes the (graded-lex) term order used for leading coefficients
and sign normalization.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd


class ParameterRegistry:
    """Session-wide table of parameter names; index = order of first use."""

    def __init__(self):
        self._names: list[str] = []
        self._index: dict[str, int] = {}

    def index(self, name: str) -> int:
        idx = self._index.get(name)
        if idx is None:
            idx = len(self._names)
            self._names.append(name)
            self._index[name] = idx
        return idx

    def name(self, idx: int) -> str:
        return self._names[idx]

    def names(self) -> tuple[str, ...]:
        return tuple(self._names)


_REGISTRY = ParameterRegistry()


def registry() -> ParameterRegistry:
    return _REGISTRY


# A polynomial term is a sorted tuple of (parameter index, exponent > 0)
# pairs; the empty tuple is the constant term.
Term = tuple


def _term_mul(a: Term, b: Term) -> Term:
    if not a:
        return b
    if not b:
        return a
    exps: dict[int, int] = dict(a)
    for idx, e in b:
        exps[idx] = exps.get(idx, 0) + e
    return tuple(sorted(exps.items()))


def _term_key(t: Term, width: int):
    # graded-lex over registry indices; earlier parameter = more significant
    dense = [0] * width
    total = 0
    for idx, e in t:
        dense[idx] = e
        total += e
    return (total, tuple(dense))


def _width(*term_iters) -> int:
    w = 0
    for terms in term_iters:
        for t in terms:
            for idx, _ in t:
                if idx + 1 > w:
                    w = idx + 1
    return w


class ParamPoly:
    """Sparse polynomial in the registered parameters, rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        self.terms = terms  # Term -> Fraction, no zero values

    # -- constructors ------------------------------------------------

    @staticmethod
    def zero() -> "ParamPoly":
        return ParamPoly({})

    @staticmethod
    def const(q) -> "ParamPoly":
        q = Fraction(q)
        return ParamPoly({(): q} if q else {})

    @staticmethod
    def var(name: str) -> "ParamPoly":
        return ParamPoly({((registry().index(name), 1),): Fraction(1)})

    # -- queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return self.terms[()]

    def variables(self) -> set:
        vs = set()
        for t in self.terms:
            for idx, _ in t:
                vs.add(idx)
        return vs

    def degree_in(self, v: int) -> int:
        d = 0
        for t in self.terms:
            for idx, e in t:
                if idx == v and e > d:
                    d = e
        return d

    def leading(self) -> tuple:
        """(term, coeff) maximal in graded-lex order."""
        w = _width(self.terms)
        t = max(self.terms, key=lambda s: _term_key(s, w))
        return t, self.terms[t]

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "ParamPoly") -> "ParamPoly":
        out = dict(self.terms)
        for t, c in other.terms.items():
            s = out.get(t)
            if s is None:
                out[t] = c
            else:
                s = s + c
                if s:
                    out[t] = s
                else:
                    del out[t]
        return ParamPoly(out)

    def __sub__(self, other: "ParamPoly") -> "ParamPoly":
        return self + (-other)

    def __neg__(self) -> "ParamPoly":
        return ParamPoly({t: -c for t, c in self.terms.items()})

    def __mul__(self, other: "ParamPoly") -> "ParamPoly":
        out: dict = {}
        for t1, c1 in self.terms.items():
            for t2, c2 in other.terms.items():
                t = _term_mul(t1, t2)
                c = c1 * c2
                s = out.get(t)
                if s is None:
                    out[t] = c
                else:
                    s = s + c
                    if s:
                        out[t] = s
                    else:
                        del out[t]
        return ParamPoly(out)

    def scale(self, q: Fraction) -> "ParamPoly":
        if not q:
            return ParamPoly({})
        return ParamPoly({t: c * q for t, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, ParamPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def evaluate(self, env: dict) -> Fraction:
        """Exact value with parameter index -> Fraction bindings."""
        total = Fraction(0)
        for t, c in self.terms.items():
            v = c
            for idx, e in t:
                v *= env[idx] ** e
            total += v
        return total

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        w = _width(self.terms)
        parts = []
        for t in sorted(self.terms, key=lambda s: _term_key(s, w), reverse=True):
            c = self.terms[t]
            factors = []
            for idx, e in t:
                name = registry().name(idx)
                factors.append(name if e == 1 else f"{name}^{e}")
            mag = abs(c)
            if not factors or mag != 1:
                factors.insert(0, str(mag))
            body = "*".join(factors)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append((" + " if c > 0 else " - ") + body)
        return "".join(parts)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# gcd / exact division (primitive PRS, small inputs only)
# ---------------------------------------------------------------------------


def _to_univ(p: ParamPoly, v: int) -> dict:
    """View p as univariate in v: degree -> ParamPoly in the other params."""
    out: dict = {}
    for t, c in p.terms.items():
        d = 0
        rest = []
        for idx, e in t:
            if idx == v:
                d = e
            else:
                rest.append((idx, e))
        coeff = out.setdefault(d, {})
        rest_t = tuple(rest)
        coeff[rest_t] = coeff.get(rest_t, Fraction(0)) + c
    return {d: ParamPoly({t: c for t, c in terms.items() if c}) for d, terms in out.items()}


def _from_univ(u: dict, v: int) -> ParamPoly:
    out: dict = {}
    for d, coeff in u.items():
        for t, c in coeff.terms.items():
            full = _term_mul(t, ((v, d),) if d else ())
            out[full] = out.get(full, Fraction(0)) + c
    return ParamPoly({t: c for t, c in out.items() if c})


def _univ_clean(u: dict) -> dict:
    return {d: c for d, c in u.items() if not c.is_zero()}


def _univ_deg(u: dict) -> int:
    return max(u) if u else -1


def _content(u: dict) -> ParamPoly:
    g = ParamPoly.zero()
    for c in u.values():
        g = poly_gcd(g, c)
        if g.is_const() and not g.is_zero():
            break
    return g


def poly_gcd(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    """Primitive gcd with integer coefficients and positive leading term."""
    if a.is_zero():
        return _canonical_int(b)
    if b.is_zero():
        return _canonical_int(a)
    if a.is_const() or b.is_const():
        return ParamPoly.const(1)
    v = max(a.variables() | b.variables())
    A, B = _to_univ(a, v), _to_univ(b, v)
    ca, cb = _content(A), _content(B)
    cont = poly_gcd(ca, cb)
    A = {d: poly_divexact(c, ca) for d, c in A.items()}
    B = {d: poly_divexact(c, cb) for d, c in B.items()}
    if _univ_deg(A) < _univ_deg(B):
        A, B = B, A
    while B:
        R = _pseudo_rem(A, B, v)
        A = B
        if R:
            cr = _content(R)
            B = {d: poly_divexact(c, cr) for d, c in R.items()}
        else:
            B = {}
    g = cont * _from_univ(A, v)
    return _canonical_int(g)


def _pseudo_rem(A: dict, B: dict, v: int) -> dict:
    dB = _univ_deg(B)
    lB = B[dB]
    R = dict(A)
    while R and _univ_deg(R) >= dB:
        dR = _univ_deg(R)
        lR = R[dR]
        new: dict = {}
        for d, c in R.items():
            new[d] = c * lB
        for d, c in B.items():
            shifted = d + dR - dB
            cur = new.get(shifted, ParamPoly.zero())
            new[shifted] = cur - lR * c
        R = _univ_clean(new)
    return R


def poly_divexact(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    """a / b when the division is exact; raises ValueError otherwise."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero():
        return ParamPoly.zero()
    if b.is_const():
        return a.scale(1 / b.const_value())
    v = max(b.variables())
    A, B = _to_univ(a, v), _to_univ(b, v)
    dB = _univ_deg(B)
    lB = B[dB]
    Q: dict = {}
    while A:
        dA = _univ_deg(A)
        if dA < dB:
            raise ValueError("inexact polynomial division")
        q = poly_divexact(A[dA], lB)
        Q[dA - dB] = q
        new = dict(A)
        for d, c in B.items():
            shifted = d + dA - dB
            cur = new.get(shifted, ParamPoly.zero())
            new[shifted] = cur - q * c
        A = _univ_clean(new)
    return _from_univ(Q, v)


def poly_lcm(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    if a.is_zero() or b.is_zero():
        return ParamPoly.zero()
    return _canonical_int(poly_divexact(a * b, poly_gcd(a, b)))


def _canonical_int(p: ParamPoly) -> ParamPoly:
    """Scale to integer coefficients, content 1, positive leading coefficient."""
    if p.is_zero():
        return p
    num_gcd = 0
    den_lcm = 1
    for c in p.terms.values():
        num_gcd = _int_gcd(num_gcd, c.numerator)
        den_lcm = den_lcm * c.denominator // _int_gcd(den_lcm, c.denominator)
    scale = Fraction(den_lcm, num_gcd)
    _, lead = p.leading()
    if lead < 0:
        scale = -scale
    return p.scale(scale)


# ---------------------------------------------------------------------------
# Coefficient field
# ---------------------------------------------------------------------------


class Coeff:
    """Reduced fraction of ParamPolys; canonical and immutable.

    Invariants: gcd(num, den) = 1, num and den have coprime integer
    coefficients taken jointly, and den's leading coefficient is positive.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: ParamPoly, den: ParamPoly, _canonical: bool = False):
        if den.is_zero():
            raise ZeroDivisionError("division by zero coefficient")
        if not _canonical:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero() -> "Coeff":
        return Coeff(ParamPoly.zero(), ParamPoly.const(1), _canonical=True)

    @staticmethod
    def one() -> "Coeff":
        return Coeff(ParamPoly.const(1), ParamPoly.const(1), _canonical=True)

    @staticmethod
    def from_rational(q) -> "Coeff":
        return Coeff(ParamPoly.const(Fraction(q)), ParamPoly.const(1))

    @staticmethod
    def param(name: str) -> "Coeff":
        return Coeff(ParamPoly.var(name), ParamPoly.const(1), _canonical=True)

    # -- queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num == ParamPoly.const(1) and self.den == ParamPoly.const(1)

    def is_rational(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("coefficient is not a plain rational")
        return self.num.const_value() / self.den.const_value()

    def leading_sign(self) -> int:
        """Sign of the graded-lex leading coefficient of the numerator."""
        if self.is_zero():
            return 0
        return 1 if self.num.leading()[1] > 0 else -1

    # -- field operations ------------------------------------------------

    def __add__(self, other: "Coeff") -> "Coeff":
        other = _coerce(other)
        return Coeff(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other: "Coeff") -> "Coeff":
        other = _coerce(other)
        return Coeff(self.num * other.den - other.num * self.den, self.den * other.den)

    def __rsub__(self, other) -> "Coeff":
        return _coerce(other) - self

    def __neg__(self) -> "Coeff":
        return Coeff(-self.num, self.den, _canonical=True)

    def __mul__(self, other) -> "Coeff":
        other = _coerce(other)
        return Coeff(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Coeff":
        other = _coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero coefficient")
        return Coeff(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "Coeff":
        return _coerce(other) / self

    def __pow__(self, k: int) -> "Coeff":
        if k < 0:
            return Coeff.one() / self ** (-k)
        out = Coeff.one()
        for _ in range(k):
            out = out * self
        return out

    def inverse(self) -> "Coeff":
        return Coeff.one() / self

    def __eq__(self, other) -> bool:
        return isinstance(other, Coeff) and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def evaluate(self, env: dict) -> Fraction:
        """Exact rational value at Fraction parameter bindings keyed by name."""
        idx_env = {registry().index(k): Fraction(v) for k, v in env.items()}
        den = self.den.evaluate(idx_env)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at given parameter values")
        return self.num.evaluate(idx_env) / den

    def __str__(self) -> str:
        if self.den == ParamPoly.const(1):
            return _wrap(str(self.num), top=True)
        return f"{_wrap(str(self.num), top=True)}/{_wrap(str(self.den))}"

    __repr__ = __str__


def _coerce(x) -> Coeff:
    if isinstance(x, Coeff):
        return x
    return Coeff.from_rational(x)


def _wrap(s: str, top: bool = False) -> str:
    bare = not any(ch in s for ch in "+-*/^ ") or (top and " " not in s)
    if top:
        # numerator needs parens only when it is a sum
        return s if " " not in s else f"({s})"
    return s if bare else f"({s})"


def _normalize(num: ParamPoly, den: ParamPoly) -> tuple:
    if num.is_zero():
        return ParamPoly.zero(), ParamPoly.const(1)
    g = poly_gcd(num, den)
    if not (g.is_const() and g.const_value() == 1):
        num = poly_divexact(num, g)
        den = poly_divexact(den, g)
    num_gcd = 0
    den_lcm = 1
    for p in (num, den):
        for c in p.terms.values():
            num_gcd = _int_gcd(num_gcd, c.numerator)
            den_lcm = den_lcm * c.denominator // _int_gcd(den_lcm, c.denominator)
    scale = Fraction(den_lcm, num_gcd)
    if den.leading()[1] < 0:
        scale = -scale
    return num.scale(scale), den.scale(scale)


def normalize(c: Coeff) -> Coeff:
    """Re-normalize a coefficient; idempotent by construction."""
    return Coeff(c.num, c.den)
