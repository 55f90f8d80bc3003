"""Text format for difference systems (.dps files).

Example::

    params h tau nu;
    shifts St Sx;                 # most significant shift first
    indets u_x > u > f;           # elimination priority, highest first
    ranking elimination lex;
    eq: 2*h*Sx(u_x) - Sx^2(u) + u;

Shift application is prefix (``Sx^2(u)``); products of shift operators
compose (``Sx^2*St(u_x)``).  Coefficients are rational expressions in
the declared parameters.  ``#`` starts a comment.  Equations must be
linear in the indeterminates and purely homogeneous (no constant term).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import Coeff
from .diffpoly import DiffPoly, DiffRing, Ranking, poly_str

_KEYWORDS = {"params", "shifts", "indets", "ranking", "eq"}


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, kind: str = "syntax"):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.kind = kind


@dataclass
class SystemSource:
    params: tuple
    ring: DiffRing
    kind: str = "elimination"
    shift_kind: str = "lex"
    equations: list = field(default_factory=list)

    @property
    def ranking(self) -> Ranking:
        return Ranking(
            ring=self.ring,
            priority=tuple(range(len(self.ring.indets))),
            kind=self.kind,
            shift_kind=self.shift_kind,
        )

    def __eq__(self, other):
        return (
            isinstance(other, SystemSource)
            and self.params == other.params
            and self.ring.shifts == other.ring.shifts
            and self.ring.indets == other.ring.indets
            and self.kind == other.kind
            and self.shift_kind == other.shift_kind
            and self.equations == other.equations
        )


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_PUNCT = {";", ":", "(", ")", "*", "/", "+", "-", "^", ">"}


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("num", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            tokens.append((ch, ch, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, start_col, kind="lexical")
    tokens.append(("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# expression values: coefficient * pending-shift * optional linear part
# ---------------------------------------------------------------------------


class _Val:
    __slots__ = ("coeff", "theta", "poly", "line", "col")

    def __init__(self, coeff, theta, poly, line, col):
        self.coeff = coeff
        self.theta = theta
        self.poly = poly
        self.line = line
        self.col = col


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, what=None):
        t = self.next()
        if t[0] != kind:
            raise ParseError(f"expected {what or kind}, found {t[1]!r}", t[2], t[3])
        return t

    # -- toplevel ----------------------------------------------------

    def parse_system(self) -> SystemSource:
        params: list = []
        shifts: list = []
        indets: list = []
        kind = "elimination"
        shift_kind = "lex"
        raw_equations = []  # (tokens slice start) for deferred parse
        ranking_seen = False

        while self.peek()[0] != "eof":
            t = self.next()
            if t[0] != "name" or t[1] not in _KEYWORDS:
                raise ParseError(f"expected a declaration or 'eq', found {t[1]!r}", t[2], t[3])
            if t[1] == "params":
                while self.peek()[0] == "name":
                    params.append(self._decl_name(params, shifts, indets))
                self.expect(";")
            elif t[1] == "shifts":
                while self.peek()[0] == "name":
                    shifts.append(self._decl_name(params, shifts, indets))
                if not shifts:
                    raise ParseError("at least one shift operator required", t[2], t[3])
                self.expect(";")
            elif t[1] == "indets":
                indets.append(self._decl_name(params, shifts, indets))
                while self.peek()[0] == ">":
                    self.next()
                    indets.append(self._decl_name(params, shifts, indets))
                self.expect(";")
            elif t[1] == "ranking":
                if ranking_seen:
                    raise ParseError("duplicate ranking declaration", t[2], t[3])
                ranking_seen = True
                words = []
                while self.peek()[0] == "name":
                    words.append(self.next()[1])
                self.expect(";")
                for w in words:
                    if w in ("elimination", "orderly"):
                        kind = w
                    elif w in ("lex", "grlex"):
                        shift_kind = w
                    else:
                        tt = self.peek()
                        raise ParseError(f"unknown ranking word {w!r}", tt[2], tt[3])
            else:  # eq
                self.expect(":")
                raw_equations.append(self.pos)
                depth = 0
                while True:
                    tt = self.peek()
                    if tt[0] == "eof":
                        raise ParseError("unterminated equation (missing ';')", tt[2], tt[3])
                    if tt[0] == ";" and depth == 0:
                        self.next()
                        break
                    if tt[0] == "(":
                        depth += 1
                    elif tt[0] == ")":
                        depth -= 1
                    self.next()

        if not shifts or not indets:
            if raw_equations:
                t = self.tokens[raw_equations[0]]
                raise ParseError("equations require shifts and indets declarations", t[2], t[3])
        ring = DiffRing(shifts, indets)
        src = SystemSource(tuple(params), ring, kind, shift_kind, [])
        for start in raw_equations:
            self.pos = start
            val = self._expr(src)
            poly = self._finalize_poly(val)
            src.equations.append(poly)
        return src

    def _decl_name(self, *groups) -> str:
        t = self.expect("name", "identifier")
        if t[1] in _KEYWORDS:
            raise ParseError(f"{t[1]!r} is a reserved word", t[2], t[3])
        for g in groups:
            if t[1] in g:
                raise ParseError(f"symbol {t[1]!r} declared twice", t[2], t[3])
        return t[1]

    # -- expressions ---------------------------------------------------

    def _expr(self, src) -> _Val:
        t = self.peek()
        negate = False
        if t[0] in ("+", "-"):
            self.next()
            negate = t[0] == "-"
        val = self._term(src)
        if negate:
            val = self._negate(val)
        while self.peek()[0] in ("+", "-"):
            op = self.next()
            rhs = self._term(src)
            if op[0] == "-":
                rhs = self._negate(rhs)
            val = self._add(val, rhs, op)
        return val

    def _term(self, src) -> _Val:
        val = self._factor(src)
        while self.peek()[0] in ("*", "/"):
            op = self.next()
            rhs = self._factor(src)
            if op[0] == "*":
                val = self._mul(val, rhs)
            else:
                val = self._div(val, rhs, op)
        return val

    def _factor(self, src) -> _Val:
        t = self.next()
        if t[0] == "num":
            val = _Val(Coeff.from_rational(int(t[1])), None, None, t[2], t[3])
        elif t[0] == "(":
            val = self._expr(src)
            self.expect(")")
        elif t[0] == "name":
            val = self._name_factor(t, src)
        else:
            raise ParseError(f"unexpected token {t[1]!r}", t[2], t[3])
        if self.peek()[0] == "^":
            caret = self.next()
            val = self._power(val, self._exponent(caret), caret)
        return val

    def _exponent(self, caret) -> int:
        neg = False
        if self.peek()[0] == "-":
            self.next()
            neg = True
        t = self.expect("num", "integer exponent")
        k = int(t[1])
        return -k if neg else k

    def _name_factor(self, t, src) -> _Val:
        name = t[1]
        if src is None:
            # bare coefficient context: every name is a parameter
            return _Val(Coeff.param(name), None, None, t[2], t[3])
        ring = src.ring
        if name in ring.shifts:
            power = 1
            if self.peek()[0] == "^":
                caret = self.next()
                power = self._exponent(caret)
                if power < 0:
                    raise ParseError("negative shift exponent", caret[2], caret[3], kind="negative_shift")
            theta = [0] * ring.n_shifts
            theta[ring.shift_index(name)] = power
            theta = tuple(theta)
            if self.peek()[0] == "(":
                self.next()
                inner = self._expr(src)
                self.expect(")")
                return self._apply_shift(theta, inner, t)
            return _Val(Coeff.one(), theta, None, t[2], t[3])
        if name in ring.indets:
            k = ring.indet_index(name)
            mon = (k, (0,) * ring.n_shifts)
            return _Val(Coeff.one(), None, DiffPoly.monomial(mon), t[2], t[3])
        if name in src.params:
            return _Val(Coeff.param(name), None, None, t[2], t[3])
        raise ParseError(f"undeclared symbol {name!r}", t[2], t[3], kind="undeclared")

    # -- value algebra ---------------------------------------------------

    @staticmethod
    def _zeros(val: _Val) -> tuple:
        return val.theta if val.theta is not None else None

    def _apply_shift(self, theta, inner: _Val, t) -> _Val:
        if inner.poly is not None:
            poly = inner.poly.shifted(theta)
            return _Val(inner.coeff, inner.theta, poly, t[2], t[3])
        # shifts act trivially on shift-invariant coefficients
        return _Val(inner.coeff, inner.theta, None, t[2], t[3])

    def _negate(self, v: _Val) -> _Val:
        return _Val(-v.coeff, v.theta, v.poly, v.line, v.col)

    def _mul(self, a: _Val, b: _Val) -> _Val:
        if a.poly is not None and b.poly is not None:
            raise ParseError(
                "nonlinear term: product of two indeterminate monomials",
                b.line,
                b.col,
                kind="nonlinear",
            )
        theta = None
        for v in (a, b):
            if v.theta is not None:
                theta = v.theta if theta is None else tuple(x + y for x, y in zip(theta, v.theta))
        poly = a.poly if a.poly is not None else b.poly
        return _Val(a.coeff * b.coeff, theta, poly, a.line, a.col)

    def _div(self, a: _Val, b: _Val, op) -> _Val:
        if b.poly is not None:
            raise ParseError("division by an indeterminate expression", b.line, b.col, kind="nonlinear")
        if b.coeff.is_zero():
            raise ParseError("division by zero", op[2], op[3])
        return _Val(a.coeff / b.coeff, a.theta, a.poly, a.line, a.col)

    def _power(self, v: _Val, k: int, caret) -> _Val:
        if v.poly is not None:
            if k == 1:
                return v
            raise ParseError(
                "nonlinear term: indeterminate raised to a power other than 1",
                caret[2],
                caret[3],
                kind="nonlinear",
            )
        theta = None
        if v.theta is not None:
            if k < 0:
                raise ParseError("negative shift exponent", caret[2], caret[3], kind="negative_shift")
            theta = tuple(x * k for x in v.theta)
        return _Val(v.coeff**k, theta, None, v.line, v.col)

    def _add(self, a: _Val, b: _Val, op) -> _Val:
        fa, fb = self._finalize(a), self._finalize(b)
        if isinstance(fa, DiffPoly) and isinstance(fb, DiffPoly):
            return _Val(Coeff.one(), None, fa + fb, a.line, a.col)
        if isinstance(fa, Coeff) and isinstance(fb, Coeff):
            return _Val(fa + fb, None, None, a.line, a.col)
        coeff, poly = (fa, fb) if isinstance(fa, Coeff) else (fb, fa)
        if coeff.is_zero():
            return _Val(Coeff.one(), None, poly, a.line, a.col)
        raise ParseError("constant term added to an indeterminate expression", op[2], op[3])

    @staticmethod
    def _finalize(v: _Val):
        if v.poly is None:
            return v.coeff
        poly = v.poly.scale(v.coeff)
        if v.theta is not None:
            poly = poly.shifted(v.theta)
        return poly

    def _finalize_poly(self, v: _Val) -> DiffPoly:
        out = self._finalize(v)
        if isinstance(out, Coeff):
            if out.is_zero():
                return DiffPoly.zero()
            raise ParseError("equation has no indeterminate part", v.line, v.col)
        return out


def parse_system(text: str) -> SystemSource:
    return _Parser(text).parse_system()


def parse_coeff(text: str) -> Coeff:
    """Parse a bare coefficient expression; names become parameters."""
    p = _Parser(text)
    val = p._expr(None)
    t = p.peek()
    if t[0] != "eof":
        raise ParseError(f"trailing input {t[1]!r}", t[2], t[3])
    out = p._finalize(val)
    return out


def print_system(src: SystemSource) -> str:
    lines = []
    if src.params:
        lines.append("params " + " ".join(src.params) + ";")
    lines.append("shifts " + " ".join(src.ring.shifts) + ";")
    lines.append("indets " + " > ".join(src.ring.indets) + ";")
    lines.append(f"ranking {src.kind} {src.shift_kind};")
    r = src.ranking
    for eq in src.equations:
        lines.append(f"eq: {poly_str(eq, src.ring, r)};")
    return "\n".join(lines) + "\n"
