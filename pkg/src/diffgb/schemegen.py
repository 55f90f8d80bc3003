"""Construction of difference systems and extraction of schemes.

Each canned problem couples a contour/PDE equation (a fixed template on
the integration contour) with one quadrature relation per proper
derivative.  Eliminating the derivatives through the engine leaves
polynomials in the surviving grid functions only; those are the
schemes.  Scheme identity is always taken modulo an overall shift and a
nonzero coefficient factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .algebra import Coeff
from .diffpoly import DiffPoly, DiffRing, Ranking, canonical_form, poly_str, shift_normalize
from .engine import BasisResult, groebner_basis
from .parser import parse_system


class Quadrature(Enum):
    MIDPOINT = "midpoint"
    TRAPEZOID = "trapezoid"
    EXPLICIT_EULER = "explicit_euler"
    LAX_SUBSTITUTED = "lax_substituted"


@dataclass(frozen=True)
class SchemeMeta:
    """How scheme monomials map onto a numeric grid."""

    time_axis: int  # -1 when the problem has no time direction
    space_axis: int
    u: int
    f: int = -1
    step_params: tuple = ()  # (axis, parameter name) pairs


@dataclass
class ProblemSpec:
    name: str
    ring: DiffRing
    ranking: Ranking
    equations: list
    survivors: frozenset
    meta: SchemeMeta
    rules: dict = field(default_factory=dict)  # relation tag -> Quadrature


@dataclass
class Scheme:
    poly: DiffPoly  # shift-normalized, content-cleared
    ring: DiffRing
    meta: SchemeMeta
    name: str = ""

    def display(self) -> str:
        return poly_str(self.poly, self.ring)

    @property
    def stencil(self):
        out = []
        t_ax = self.meta.time_axis
        s_ax = self.meta.space_axis
        for (k, mu), c in sorted(self.poly.terms.items()):
            dt = mu[t_ax] if t_ax >= 0 else 0
            out.append((dt, mu[s_ax], self.ring.indets[k], c))
        return tuple(out)


@dataclass
class GeneratedScheme:
    scheme: Scheme
    all_schemes: list
    basis: BasisResult
    spec: ProblemSpec


@dataclass
class ProductScheme:
    """Formal product of two linear factors at a common node (Godunov)."""

    factors: tuple  # (DiffPoly, DiffPoly), aligned
    ring: DiffRing
    meta: SchemeMeta
    branches: tuple = ()  # the per-branch GeneratedSchemes

    def display(self) -> str:
        a, b = self.factors
        return f"({poly_str(a, self.ring)}) * ({poly_str(b, self.ring)})"


class SchemeGenerationError(Exception):
    def __init__(self, message: str, basis: BasisResult = None):
        super().__init__(message)
        self.basis = basis


# ---------------------------------------------------------------------------
# quadrature templates
# ---------------------------------------------------------------------------


def discretize_relation(ring: DiffRing, derivative: str, primitive: str, rule: Quadrature, axis: str, step: str) -> DiffPoly:
    """Difference relation tying a derivative to its primitive.

    midpoint (double cell):  2*step * S(d) - (S^2 - 1)(u)
    trapezoid (single cell): step/2 * (S + 1)(d) - (S - 1)(u)
    explicit_euler (time):   step * d - (S - 1)(u)
    """
    d = ring.indet_index(derivative)
    u = ring.indet_index(primitive)
    e = ring.axis(axis)
    zero = tuple(0 for _ in e)
    e2 = tuple(2 * x for x in e)
    s = Coeff.param(step)
    one = Coeff.one()
    if rule == Quadrature.MIDPOINT:
        return DiffPoly({(d, e): 2 * s, (u, e2): -one, (u, zero): one})
    if rule == Quadrature.TRAPEZOID:
        half = s / 2
        return DiffPoly({(d, e): half, (d, zero): half, (u, e): -one, (u, zero): one})
    if rule == Quadrature.EXPLICIT_EULER:
        return DiffPoly({(d, zero): s, (u, e): -one, (u, zero): one})
    raise ValueError(f"no direct template for rule {rule}")


def euler_two_level(ring: DiffRing, derivative: str, new: str, old: str, axis: str, step: str) -> DiffPoly:
    """step * d - S(new) + old; the predictor/corrector time relation."""
    d = ring.indet_index(derivative)
    e = ring.axis(axis)
    zero = tuple(0 for _ in e)
    return DiffPoly(
        {
            (d, zero): Coeff.param(step),
            (ring.indet_index(new), e): -Coeff.one(),
            (ring.indet_index(old), zero): Coeff.one(),
        }
    )


def lax_substitute(p: DiffPoly, ring: DiffRing, axis: str, target: str) -> DiffPoly:
    """Pre-multiply by the axis shift, then average the designated term.

    The lone target occurrence S_axis(target) in the shifted relation is
    replaced by (S_axis^2 + 1)/2 (target).
    """
    e = ring.axis(axis)
    shifted = p.shifted(e)
    k = ring.indet_index(target)
    mon = (k, e)
    c = shifted.terms.get(mon)
    if c is None:
        raise ValueError(f"designated term S({target}) not present after pre-multiplication")
    half = c / 2
    e2 = tuple(2 * x for x in e)
    zero = tuple(0 for _ in e)
    repl = DiffPoly({(k, e2): half, (k, zero): half}) - DiffPoly({mon: c})
    return shifted + repl


# ---------------------------------------------------------------------------
# scheme extraction and identity
# ---------------------------------------------------------------------------


def _normalize_scheme_poly(p: DiffPoly) -> DiffPoly:
    return canonical_form(shift_normalize(p))


def generate_scheme(spec: ProblemSpec, *, budget: int = 10_000_000) -> GeneratedScheme:
    basis = groebner_basis(spec.equations, spec.ranking, budget=budget)
    survivors = spec.survivors
    found = [g for g in basis.reduced_gb if g.indets() <= survivors]
    if not found:
        raise SchemeGenerationError(
            f"no element of the reduced basis is free of eliminated indeterminates ({spec.name})",
            basis,
        )
    found.sort(key=lambda g: spec.ranking.key(g.lm(spec.ranking)))
    schemes = [
        Scheme(_normalize_scheme_poly(g), spec.ring, spec.meta, name=spec.name) for g in found
    ]
    return GeneratedScheme(scheme=schemes[0], all_schemes=schemes, basis=basis, spec=spec)


def scheme_equiv(a, b) -> bool:
    """Equal up to an overall shift and a nonzero coefficient factor."""
    pa = a.poly if isinstance(a, Scheme) else a
    pb = b.poly if isinstance(b, Scheme) else b
    if pa.is_zero() or pb.is_zero():
        return pa.is_zero() and pb.is_zero()
    return _normalize_scheme_poly(pa) == _normalize_scheme_poly(pb)


def product_equiv(a: ProductScheme, b: ProductScheme) -> bool:
    """Products agree up to one common shift and per-factor constants."""
    a1, a2 = a.factors
    for b1, b2 in ((b.factors[0], b.factors[1]), (b.factors[1], b.factors[0])):
        if _pair_matches(a1, a2, b1, b2):
            return True
    return False


def _pair_matches(a1, a2, b1, b2) -> bool:
    off1 = _shift_offset(a1, b1)
    off2 = _shift_offset(a2, b2)
    if off1 is None or off2 is None or off1 != off2:
        return False
    return scheme_equiv(a1, b1) and scheme_equiv(a2, b2)


def _shift_offset(p, q):
    """Per-axis offset sigma with q = const * sigma(p), else None."""
    if not scheme_equiv(p, q):
        return None
    mins_p = _min_exponents(p)
    mins_q = _min_exponents(q)
    return tuple(b - a for a, b in zip(mins_p, mins_q))


def _min_exponents(p: DiffPoly):
    mus = [m[1] for m in p.terms]
    return tuple(min(mu[i] for mu in mus) for i in range(len(mus[0])))


def telescoping_conservation(scheme: Scheme, period: int = 8) -> bool:
    """Summing all space shifts over one period must cancel every flux
    term and leave per-time-level totals of the u terms that sum to zero."""
    meta = scheme.meta
    s_ax = meta.space_axis
    total: dict = {}
    for (k, mu), c in scheme.poly.terms.items():
        for j in range(period):
            red = list(mu)
            red[s_ax] = (mu[s_ax] + j) % period
            key = (k, tuple(red))
            cur = total.get(key, Coeff.zero())
            cur = cur + c
            if cur.is_zero():
                total.pop(key, None)
            else:
                total[key] = cur
    levels: dict = {}
    for (k, mu), c in total.items():
        if k != meta.u:
            return False  # a flux (or derivative) term survived
        lvl = mu[meta.time_axis] if meta.time_axis >= 0 else 0
        prev = levels.get(lvl)
        if prev is not None and prev != c:
            return False  # not uniform across the period
        levels[lvl] = c
    acc = Coeff.zero()
    for c in levels.values():
        acc = acc + c
    return acc.is_zero()


# ---------------------------------------------------------------------------
# canned problems
# ---------------------------------------------------------------------------

_M = Quadrature.MIDPOINT
_T = Quadrature.TRAPEZOID


def _meta_xt(ring: DiffRing, u="u", f=None) -> SchemeMeta:
    return SchemeMeta(
        time_axis=ring.shift_index("St"),
        space_axis=ring.shift_index("Sx"),
        u=ring.indet_index(u),
        f=ring.indet_index(f) if f else -1,
        step_params=((ring.shift_index("St"), "tau"), (ring.shift_index("Sx"), "h")),
    )


def laplace_problem() -> ProblemSpec:
    src = parse_system(
        """
        params h;
        shifts Sx Sy;
        indets u_x > u_y > u;
        ranking elimination lex;
        eq: Sx^2*Sy(u_x) - Sy(u_x) + Sx*Sy^2(u_y) - Sx(u_y);
        """
    )
    ring = src.ring
    eqs = list(src.equations)
    eqs.append(discretize_relation(ring, "u_x", "u", _M, "Sx", "h"))
    eqs.append(discretize_relation(ring, "u_y", "u", _M, "Sy", "h"))
    meta = SchemeMeta(
        time_axis=-1,
        space_axis=ring.shift_index("Sx"),
        u=ring.indet_index("u"),
        step_params=((0, "h"), (1, "h")),
    )
    return ProblemSpec("laplace", ring, src.ranking, eqs, frozenset({ring.indet_index("u")}), meta)


def heat_problem() -> ProblemSpec:
    src = parse_system(
        """
        params alpha h tau;
        shifts St Sx;
        indets u_x > u;
        ranking elimination lex;
        eq: alpha*tau/2*(u_x + St(u_x) - Sx^2(u_x) - St*Sx^2(u_x)) - 2*h*(Sx*St(u) - Sx(u));
        """
    )
    ring = src.ring
    eqs = list(src.equations)
    eqs.append(discretize_relation(ring, "u_x", "u", _T, "Sx", "h"))
    return ProblemSpec(
        "heat", ring, src.ranking, eqs, frozenset({ring.indet_index("u")}), _meta_xt(ring)
    )


def wave_problem() -> ProblemSpec:
    src = parse_system(
        """
        params h;
        shifts St Sx;
        indets u_t > u_x > u;
        ranking elimination lex;
        eq: Sx(u_t) - Sx*St^2(u_t) + Sx^2*St(u_x) - St(u_x);
        """
    )
    ring = src.ring
    eqs = list(src.equations)
    eqs.append(discretize_relation(ring, "u_x", "u", _T, "Sx", "h"))
    eqs.append(discretize_relation(ring, "u_t", "u", _T, "St", "h"))
    meta = SchemeMeta(
        time_axis=ring.shift_index("St"),
        space_axis=ring.shift_index("Sx"),
        u=ring.indet_index("u"),
        step_params=((0, "h"), (1, "h")),
    )
    return ProblemSpec("wave", ring, src.ranking, eqs, frozenset({ring.indet_index("u")}), meta)


def advection_problem() -> ProblemSpec:
    src = parse_system(
        """
        params h tau nu;
        shifts St Sx;
        indets u_t > u_x > u;
        ranking elimination lex;
        eq: u_t + nu*u_x;
        """
    )
    ring = src.ring
    eqs = list(src.equations)
    time_rel = discretize_relation(ring, "u_t", "u", Quadrature.EXPLICIT_EULER, "St", "tau")
    eqs.append(lax_substitute(time_rel, ring, "Sx", "u"))
    eqs.append(discretize_relation(ring, "u_x", "u", _M, "Sx", "h"))
    return ProblemSpec(
        "advection", ring, src.ranking, eqs, frozenset({ring.indet_index("u")}), _meta_xt(ring)
    )


def burgers_conservation_problem() -> ProblemSpec:
    src = parse_system(
        """
        params h tau nu;
        shifts St Sx;
        indets u_x > u > f;
        ranking elimination lex;
        eq: h*(Sx*St^2(u) - Sx(u)) - nu*tau*(Sx^2*St(u_x) - St(u_x)) + tau*(Sx^2*St(f) - St(f));
        """
    )
    ring = src.ring
    eqs = list(src.equations)
    eqs.append(discretize_relation(ring, "u_x", "u", _M, "Sx", "h"))
    survivors = frozenset({ring.indet_index("u"), ring.indet_index("f")})
    return ProblemSpec("burgers-ftfs", ring, src.ranking, eqs, survivors, _meta_xt(ring, f="f"))


def _rule(digit) -> Quadrature:
    if digit in (1, "1", "m", _M):
        return _M
    if digit in (2, "2", "t", _T):
        return _T
    raise ValueError(f"unknown quadrature digit {digit!r}")


def burgers_lax_problem(rules=(1, 1, 1)) -> ProblemSpec:
    """Lax time stepping; `rules` picks midpoint/trapezoid for the three
    spatial integrals in the order (f_x, u_x, u_xx)."""
    r1, r2, r3 = (_rule(d) for d in rules)
    src = parse_system(
        """
        params h tau nu;
        shifts St Sx;
        indets u_xx > u_t > u_x > f_x > u > f;
        ranking elimination lex;
        eq: u_t + f_x - nu*u_xx;
        """
    )
    ring = src.ring
    eqs = list(src.equations)
    time_rel = discretize_relation(ring, "u_t", "u", Quadrature.EXPLICIT_EULER, "St", "tau")
    eqs.append(lax_substitute(time_rel, ring, "Sx", "u"))
    eqs.append(discretize_relation(ring, "f_x", "f", r1, "Sx", "h"))
    eqs.append(discretize_relation(ring, "u_x", "u", r2, "Sx", "h"))
    eqs.append(discretize_relation(ring, "u_xx", "u_x", r3, "Sx", "h"))
    survivors = frozenset({ring.indet_index("u"), ring.indet_index("f")})
    name = "burgers-lax" if tuple(rules) == (1, 1, 1) else f"burgers-{''.join(str(d) for d in rules)}"
    spec = ProblemSpec(name, ring, src.ranking, eqs, survivors, _meta_xt(ring, f="f"))
    spec.rules = {"f_x": r1, "u_x": r2, "u_xx": r3}
    return spec


@dataclass
class VariantEnumeration:
    variants: list  # (code, Scheme)
    groups: list  # lists of codes giving the same scheme
    distinct: list  # one Scheme per group, order of first appearance


def enumerate_burgers_variants(*, budget: int = 10_000_000) -> VariantEnumeration:
    """All eight midpoint/trapezoid combinations for the Lax pipeline."""
    variants = []
    for d1 in (1, 2):
        for d2 in (1, 2):
            for d3 in (1, 2):
                code = f"{d1}{d2}{d3}"
                spec = burgers_lax_problem((d1, d2, d3))
                gen = generate_scheme(spec, budget=budget)
                variants.append((code, gen.scheme))
    groups: list = []
    reps: list = []
    for code, scheme in variants:
        for gi, rep in enumerate(reps):
            if scheme_equiv(rep, scheme):
                groups[gi].append(code)
                break
        else:
            reps.append(scheme)
            groups.append([code])
    return VariantEnumeration(variants=variants, groups=groups, distinct=reps)


def lax_wendroff_problem(rules=(1, 1, 1, 1, 1, 1)) -> ProblemSpec:
    """Two-step pipeline with intermediate levels ub, fb; `rules` picks the
    quadrature for (f_x, u_x, u_xx, fb_x, ub_x, ub_xx)."""
    rr = [_rule(d) for d in rules]
    src = parse_system(
        """
        params h tau nu;
        shifts St Sx;
        indets u_xx > ub_xx > u_x > ub_x > u_t > ub_t > f_x > fb_x > f > u > fb > ub;
        ranking elimination lex;
        eq: u_t + f_x - nu*u_xx;
        eq: ub_t + fb_x - nu*ub_xx;
        """
    )
    ring = src.ring
    eqs = list(src.equations)
    step1_time = euler_two_level(ring, "u_t", "ub", "u", "St", "tau")
    eqs.append(lax_substitute(step1_time, ring, "Sx", "u"))
    eqs.append(discretize_relation(ring, "f_x", "f", rr[0], "Sx", "h"))
    eqs.append(discretize_relation(ring, "u_x", "u", rr[1], "Sx", "h"))
    eqs.append(discretize_relation(ring, "u_xx", "u_x", rr[2], "Sx", "h"))
    eqs.append(discretize_relation(ring, "ub_t", "u", Quadrature.EXPLICIT_EULER, "St", "tau"))
    eqs.append(discretize_relation(ring, "fb_x", "fb", rr[3], "Sx", "h"))
    eqs.append(discretize_relation(ring, "ub_x", "ub", rr[4], "Sx", "h"))
    eqs.append(discretize_relation(ring, "ub_xx", "ub_x", rr[5], "Sx", "h"))
    survivors = frozenset(ring.indet_index(n) for n in ("f", "u", "fb", "ub"))
    return ProblemSpec("lax-wendroff", ring, src.ranking, eqs, survivors, _meta_xt(ring, f="f"))


def generate_lax_wendroff(rules=(1, 1, 1, 1, 1, 1), *, budget: int = 10_000_000):
    """Both members of the two-step scheme: (predictor, corrector)."""
    spec = lax_wendroff_problem(rules)
    gen = generate_scheme(spec, budget=budget)
    ring = spec.ring
    f = ring.indet_index("f")
    fb = ring.indet_index("fb")
    step1 = [s for s in gen.all_schemes if f in s.poly.indets()]
    step2 = [s for s in gen.all_schemes if fb in s.poly.indets()]
    if not step1 or not step2:
        raise SchemeGenerationError("two-step pair not found in eliminated basis", gen.basis)
    return (step1[0], step2[0]), gen


def godunov_branch_problem(branch: str) -> ProblemSpec:
    """Inviscid conservation system with one linear factor of the flux
    Riemann condition; branch 'left' has f_x at the shifted node."""
    src = parse_system(
        """
        params h tau;
        shifts St Sx;
        indets u_xx > u_x > u_t > f_x > f > u;
        ranking elimination lex;
        eq: u_t + f_x;
        """
    )
    ring = src.ring
    eqs = list(src.equations)
    eqs.append(discretize_relation(ring, "u_t", "u", Quadrature.EXPLICIT_EULER, "St", "tau"))
    h = Coeff.param("h")
    one = Coeff.one()
    ex = ring.axis("Sx")
    zero = tuple(0 for _ in ex)
    fx = ring.indet_index("f_x")
    f = ring.indet_index("f")
    flux_diff = DiffPoly({(f, ex): -one, (f, zero): one})
    if branch == "left":
        factor = DiffPoly({(fx, ex): h}) + flux_diff
    elif branch == "right":
        factor = DiffPoly({(fx, zero): h}) + flux_diff
    else:
        raise ValueError("branch must be 'left' or 'right'")
    eqs.append(factor)
    eqs.append(discretize_relation(ring, "u_x", "u", _M, "Sx", "h"))
    eqs.append(discretize_relation(ring, "u_xx", "u_x", _M, "Sx", "h"))
    survivors = frozenset({ring.indet_index("u"), f})
    return ProblemSpec(
        f"godunov-{branch}", ring, src.ranking, eqs, survivors, _meta_xt(ring, f="f")
    )


def godunov_compose(*, budget: int = 10_000_000) -> ProductScheme:
    """Run both branch eliminations and compose the factored product."""
    gens = []
    for branch in ("left", "right"):
        spec = godunov_branch_problem(branch)
        try:
            gens.append(generate_scheme(spec, budget=budget))
        except SchemeGenerationError as e:
            raise SchemeGenerationError(f"branch {branch!r} failed to eliminate", e.basis) from e
    meta = gens[0].spec.meta
    ring = gens[0].spec.ring
    pa, pb = gens[0].scheme.poly, gens[1].scheme.poly
    ua = _u_anchor(pa, meta)
    ub = _u_anchor(pb, meta)
    target = tuple(max(x, y) for x, y in zip(ua, ub))
    pa = pa.shifted(tuple(t - x for t, x in zip(target, ua)))
    pb = pb.shifted(tuple(t - x for t, x in zip(target, ub)))
    return ProductScheme(factors=(pa, pb), ring=ring, meta=meta, branches=tuple(gens))


def _u_anchor(p: DiffPoly, meta: SchemeMeta):
    mus = [mu for (k, mu) in p.terms if k == meta.u]
    return tuple(max(mu[i] for mu in mus) for i in range(len(mus[0])))


CANNED = {
    "laplace": laplace_problem,
    "heat": heat_problem,
    "wave": wave_problem,
    "advection": advection_problem,
    "burgers-ftfs": burgers_conservation_problem,
    "burgers-lax": burgers_lax_problem,
}
