"""Linear difference polynomials, rankings, and elementary reductions.

A monomial is a pair ``(k, mu)``: indeterminate index ``k`` and a shift
exponent vector ``mu`` (one slot per shift operator).  A polynomial maps
monomials to nonzero field coefficients; the zero polynomial is the
empty map.  Rankings are shift-compatible total orders realized as sort
keys, so leading-term extraction is a ``max``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import Coeff, ParamPoly, poly_divexact, poly_gcd, poly_lcm

Mon = tuple  # (indet: int, mu: tuple[int, ...])


def mon_shift(mon: Mon, theta: tuple) -> Mon:
    k, mu = mon
    return (k, tuple(a + b for a, b in zip(mu, theta)))


def mon_divides(a: Mon, b: Mon) -> bool:
    """a divides b in the shift sense: same indeterminate, b - a >= 0."""
    if a[0] != b[0]:
        return False
    return all(x <= y for x, y in zip(a[1], b[1]))


def mon_quotient(b: Mon, a: Mon):
    """theta with b = theta o a, or None."""
    if a[0] != b[0]:
        return None
    diff = tuple(y - x for x, y in zip(a[1], b[1]))
    if any(d < 0 for d in diff):
        return None
    return diff


def mon_strictly_divides(a: Mon, b: Mon) -> bool:
    q = mon_quotient(b, a)
    return q is not None and any(q)


def mon_lcm(a: Mon, b: Mon):
    if a[0] != b[0]:
        return None
    return (a[0], tuple(max(x, y) for x, y in zip(a[1], b[1])))


class DiffRing:
    """Names of the shift operators and difference indeterminates."""

    def __init__(self, shifts, indets):
        self.shifts = tuple(shifts)
        self.indets = tuple(indets)
        self._shift_index = {s: i for i, s in enumerate(self.shifts)}
        self._indet_index = {u: i for i, u in enumerate(self.indets)}

    @property
    def n_shifts(self) -> int:
        return len(self.shifts)

    def shift_index(self, name: str) -> int:
        return self._shift_index[name]

    def indet_index(self, name: str) -> int:
        return self._indet_index[name]

    def axis(self, name: str) -> tuple:
        e = [0] * len(self.shifts)
        e[self._shift_index[name]] = 1
        return tuple(e)

    def mon_str(self, mon: Mon) -> str:
        k, mu = mon
        ops = []
        for i, e in enumerate(mu):
            if e == 1:
                ops.append(self.shifts[i])
            elif e > 1:
                ops.append(f"{self.shifts[i]}^{e}")
        if not ops:
            return self.indets[k]
        return "*".join(ops) + f"({self.indets[k]})"


@dataclass(frozen=True)
class Ranking:
    """Shift-compatible total order on monomials.

    ``kind`` is ``elimination`` (indeterminate priority dominates any
    shift) or ``orderly`` (total shift degree dominates).  Within an
    indeterminate, exponent vectors are compared by ``lex`` or ``grlex``
    over ``shift_priority`` (most significant axis first).
    """

    ring: DiffRing
    priority: tuple  # indet indices, highest first
    kind: str = "elimination"
    shift_kind: str = "lex"
    shift_priority: tuple = None  # axis indices, most significant first

    _rank: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.kind not in ("elimination", "orderly"):
            raise ValueError(f"unknown ranking kind {self.kind!r}")
        if self.shift_kind not in ("lex", "grlex"):
            raise ValueError(f"unknown shift order {self.shift_kind!r}")
        if self.shift_priority is None:
            object.__setattr__(self, "shift_priority", tuple(range(self.ring.n_shifts)))
        m = len(self.priority)
        object.__setattr__(
            self, "_rank", {k: m - 1 - pos for pos, k in enumerate(self.priority)}
        )

    def shift_key(self, mu: tuple):
        perm = tuple(mu[a] for a in self.shift_priority)
        if self.shift_kind == "grlex":
            return (sum(mu), perm)
        return perm

    def key(self, mon: Mon):
        k, mu = mon
        if self.kind == "elimination":
            return (self._rank[k], self.shift_key(mu))
        return (sum(mu), self._rank[k], self.shift_key(mu))

    def greater(self, a: Mon, b: Mon) -> bool:
        return self.key(a) > self.key(b)


class DiffPoly:
    """Linear difference polynomial: monomial -> Coeff, no zero entries."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        self.terms = terms

    @staticmethod
    def zero() -> "DiffPoly":
        return DiffPoly({})

    @staticmethod
    def monomial(mon: Mon, coeff: Coeff = None) -> "DiffPoly":
        coeff = Coeff.one() if coeff is None else coeff
        return DiffPoly({mon: coeff} if not coeff.is_zero() else {})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "DiffPoly") -> "DiffPoly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
        return DiffPoly(out)

    def __sub__(self, other: "DiffPoly") -> "DiffPoly":
        return self + (-other)

    def __neg__(self) -> "DiffPoly":
        return DiffPoly({m: -c for m, c in self.terms.items()})

    def scale(self, c: Coeff) -> "DiffPoly":
        if c.is_zero():
            return DiffPoly.zero()
        if c.is_one():
            return self
        return DiffPoly({m: cc * c for m, cc in self.terms.items()})

    def shifted(self, theta: tuple) -> "DiffPoly":
        if not any(theta):
            return self
        return DiffPoly({mon_shift(m, theta): c for m, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, DiffPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def leading(self, r: Ranking) -> tuple:
        """(monomial, coefficient) maximal under the ranking."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        m = max(self.terms, key=r.key)
        return m, self.terms[m]

    def lm(self, r: Ranking) -> Mon:
        return self.leading(r)[0]

    def monic(self, r: Ranking) -> "DiffPoly":
        _, c = self.leading(r)
        if c.is_one():
            return self
        return self.scale(c.inverse())

    def indets(self) -> set:
        return {m[0] for m in self.terms}

    def sorted_terms(self, r: Ranking):
        return sorted(self.terms.items(), key=lambda item: r.key(item[0]), reverse=True)


def apply_shift(theta: tuple, p: DiffPoly) -> DiffPoly:
    if any(t < 0 for t in theta):
        raise ValueError("shift exponents must be nonnegative")
    return p.shifted(theta)


class ReductionError(ValueError):
    pass


def reduce_once(h: DiffPoly, f: DiffPoly, at: Mon, r: Ranking) -> DiffPoly:
    """One elementary reduction of h at monomial `at` by f.

    Requires `at` present in h and `at` = theta o lm(f); returns
    h - c * theta o (f / lc(f)).
    """
    c = h.terms.get(at)
    if c is None or c.is_zero():
        raise ReductionError("monomial does not occur in polynomial")
    lmf, lcf = f.leading(r)
    theta = mon_quotient(at, lmf)
    if theta is None:
        raise ReductionError("target monomial is not a shift of the divisor's leading monomial")
    return h - f.scale(c / lcf).shifted(theta)


def normal_form(h: DiffPoly, F, r: Ranking, *, head_only: bool = False, cofactors=None) -> DiffPoly:
    """Ordinary (full Theta) normal form of h modulo the set F.

    Reduces the highest reducible monomial first, taking the first
    divisor in F order, which makes the result deterministic.  With
    ``cofactors`` a list, appends (index, theta, coeff) per step so that
    h = sum coeff * theta o F[index] + result.
    """
    F = [f for f in F if not f.is_zero()]
    leads = [f.leading(r) for f in F]
    while not h.is_zero():
        target = None
        mons = [max(h.terms, key=r.key)] if head_only else sorted(h.terms, key=r.key, reverse=True)
        for m in mons:
            for i, (lmf, lcf) in enumerate(leads):
                theta = mon_quotient(m, lmf)
                if theta is not None:
                    target = (m, i, theta, lcf)
                    break
            if target is not None:
                break
        if target is None:
            return h
        m, i, theta, lcf = target
        c = h.terms[m]
        h = h - F[i].scale(c / lcf).shifted(theta)
        if cofactors is not None:
            cofactors.append((i, theta, c / lcf))
    return h


def canonical_form(p: DiffPoly, r: Ranking = None) -> DiffPoly:
    """Denominator-cleared form, integer content removed, leading sign positive.

    With no ranking the sign pivot is the plain-tuple-maximal monomial,
    which makes the form usable for ranking-free comparisons.
    """
    if p.is_zero():
        return p
    den_lcm = ParamPoly.const(1)
    for c in p.terms.values():
        den_lcm = poly_lcm(den_lcm, c.den)
    nums = {}
    g = ParamPoly.zero()
    for m, c in p.terms.items():
        n = c.num * poly_divexact(den_lcm, c.den)
        nums[m] = n
        g = poly_gcd(g, n)
    num_gcd = 0
    den_l = 1
    from fractions import Fraction
    from math import gcd as _ig

    for m, n in nums.items():
        n = poly_divexact(n, g)
        nums[m] = n
        for q in n.terms.values():
            num_gcd = _ig(num_gcd, q.numerator)
            den_l = den_l * q.denominator // _ig(den_l, q.denominator)
    scale = Fraction(den_l, num_gcd)
    pivot = max(nums, key=r.key) if r is not None else max(nums)
    if nums[pivot].leading()[1] * scale < 0:
        scale = -scale
    one = ParamPoly.const(1)
    return DiffPoly({m: Coeff(n.scale(scale), one, _canonical=True) for m, n in nums.items()})


def shift_normalize(p: DiffPoly) -> DiffPoly:
    """Translate so the componentwise minimum shift exponent is zero."""
    if p.is_zero():
        return p
    mus = [m[1] for m in p.terms]
    mins = tuple(min(mu[i] for mu in mus) for i in range(len(mus[0])))
    if not any(mins):
        return p
    return DiffPoly({(k, tuple(a - b for a, b in zip(mu, mins))): c for (k, mu), c in p.terms.items()})


def poly_str(p: DiffPoly, ring: DiffRing, r: Ranking = None) -> str:
    if p.is_zero():
        return "0"
    items = p.sorted_terms(r) if r is not None else sorted(p.terms.items(), key=lambda t: t[0], reverse=True)
    parts = []
    for m, c in items:
        sign = 1
        if c.leading_sign() < 0:
            sign, c = -1, -c
        mon = ring.mon_str(m)
        body = mon if c.is_one() else f"{c}*{mon}"
        if not parts:
            parts.append(body if sign > 0 else "-" + body)
        else:
            parts.append((" + " if sign > 0 else " - ") + body)
    return "".join(parts)
