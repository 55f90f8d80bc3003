"""Completion of linear difference systems to reduced Groebner bases.

The main driver keeps a set T of accepted triples (polynomial, ancestor,
applied difference powers) and a queue Q of candidates.  Candidates are
head-reduced with Janet-like reductions only: a monomial is J-reducible
by g when it is a shift of lm(g) whose quotient avoids every difference
power of g, which leaves at most one admissible reductor per monomial.
Chain/co-prime criteria discard prolongations whose reduction to zero is
forced; their soundness is cross-checked against a plain Buchberger
oracle rather than assumed.

Outputs: the Janet-like basis (all of T, with difference powers), and
the reduced Groebner basis (ancestor elements, fully auto-reduced).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diffpoly import (
    DiffPoly,
    Ranking,
    canonical_form,
    mon_lcm,
    mon_quotient,
    mon_shift,
    mon_strictly_divides,
    normal_form,
)


class BudgetExceededError(Exception):
    def __init__(self, work: int):
        super().__init__(f"reduction budget exceeded after {work} work units")
        self.work = work


class _Budget:
    __slots__ = ("limit", "work")

    def __init__(self, limit: int):
        self.limit = limit
        self.work = 0

    def tick(self, n: int = 1):
        self.work += n
        if self.work > self.limit:
            raise BudgetExceededError(self.work)


def difference_powers(mu: tuple, lm_set) -> frozenset:
    """Difference powers of the monomial mu within its indeterminate's lm set.

    Follows the degree-group partition: at axis i the group consists of
    the monomials agreeing with mu on axes < i; if some group member has
    a larger degree in axis i, the minimal positive gap s gives the
    power theta_i^s.
    """
    group = list(lm_set)
    n = len(mu)
    out = set()
    for i in range(n):
        mx = max(v[i] for v in group)
        if mx > mu[i]:
            s = min(v[i] - mu[i] for v in group if v[i] > mu[i])
            e = [0] * n
            e[i] = s
            out.add(tuple(e))
        group = [v for v in group if v[i] == mu[i]]
    return frozenset(out)


def in_j_cone(theta: tuple, dps) -> bool:
    """theta lies in J = Theta minus the difference-power multiples."""
    for dp in dps:
        if all(t >= d for t, d in zip(theta, dp)):
            return False
    return True


@dataclass
class _Triple:
    pol: DiffPoly  # monic w.r.t. the active ranking
    anc_tid: int
    anc_lm: tuple
    tid: int
    dp: set = field(default_factory=set)
    idx: int = -1  # insertion position in T; -1 while queued
    parent_tid: int = -1  # DP-prolongation provenance
    parent_theta: tuple = None
    cur_dp: frozenset = frozenset()  # DP(pol, T) while a member of T
    lm: tuple = None


@dataclass
class BasisElement:
    poly: DiffPoly
    difference_powers: tuple
    ancestor: int  # index of the ancestor element within the basis
    idx: int


@dataclass
class BasisResult:
    janet_like: list
    reduced_gb: list
    stats: dict

    def janet_pairs(self):
        return [(el.poly, frozenset(el.difference_powers)) for el in self.janet_like]


class _Completion:
    def __init__(self, ranking: Ranking, criteria, budget: int, trace=None):
        self.r = ranking
        self.criteria = frozenset(criteria)
        self.budget = _Budget(budget)
        self.T: list = []
        self.by_tid: dict = {}
        self.next_tid = 0
        self.next_idx = 0
        self.stats = {
            "head_reductions": 0,
            "tail_reductions": 0,
            "prolongations": 0,
            "displacements": 0,
            "purged": 0,
            "criteria_hits": {1: 0, 2: 0, 3: 0, 4: 0},
        }
        self.trace = trace
        self.constant_mode = False

    # -- triple bookkeeping -------------------------------------------

    def _new_triple(self, pol, anc_tid=None, anc_lm=None, parent_tid=-1, parent_theta=None):
        tid = self.next_tid
        self.next_tid += 1
        pol = pol.monic(self.r)
        lm = pol.lm(self.r)
        if anc_tid is None:  # its own ancestor
            anc_tid, anc_lm = tid, lm
        return _Triple(
            pol=pol,
            anc_tid=anc_tid,
            anc_lm=anc_lm,
            tid=tid,
            parent_tid=parent_tid,
            parent_theta=parent_theta,
            lm=lm,
        )

    def _insert(self, t: _Triple):
        t.idx = self.next_idx
        self.next_idx += 1
        self.T.append(t)
        self.by_tid[t.tid] = t
        self._refresh_dp(t.lm[0])
        if self.trace is not None:
            self.trace.append(("insert", t.lm))

    def _remove(self, t: _Triple):
        self.T.remove(t)
        del self.by_tid[t.tid]
        self._refresh_dp(t.lm[0])

    def _refresh_dp(self, indet: int):
        mus = [t.lm[1] for t in self.T if t.lm[0] == indet]
        for t in self.T:
            if t.lm[0] == indet:
                t.cur_dp = difference_powers(t.lm[1], mus)

    def _check_partition(self):
        """Debug: recompute every DP set from scratch and compare."""
        for t in self.T:
            mus = [s.lm[1] for s in self.T if s.lm[0] == t.lm[0]]
            assert t.cur_dp == difference_powers(t.lm[1], mus), "stale Janet partition"

    # -- Janet-like reduction -----------------------------------------

    def _j_reductor(self, mon):
        found = None
        for t in self.T:
            theta = mon_quotient(mon, t.lm)
            if theta is not None and in_j_cone(theta, t.cur_dp):
                if found is not None:
                    raise RuntimeError("multiple Janet-like reductors for one monomial")
                found = (t, theta)
        return found

    def _head_normal_form(self, p: _Triple) -> DiffPoly:
        h = p.pol
        red = self._j_reductor(h.lm(self.r))
        if red is None:
            return h
        g, _ = red
        if h.lm(self.r) != p.anc_lm and p.parent_tid >= 0:
            # the guard "pol(p) = theta o pol(f), f in T, theta in DP(f, T)"
            # checked via provenance: parent still a member, power still current
            f = self.by_tid.get(p.parent_tid)
            if f is not None and p.parent_theta in f.cur_dp:
                which = self._criteria_fire(p, g, f)
                if which:
                    self.stats["criteria_hits"][which] += 1
                    return DiffPoly.zero()
        while not h.is_zero():
            red = self._j_reductor(h.lm(self.r))
            if red is None:
                break
            g, theta = red
            _, lc = h.leading(self.r)
            h = h - g.pol.scale(lc).shifted(theta)
            self.budget.tick()
            self.stats["head_reductions"] += 1
        return h

    def _tail_normal_form(self, p: _Triple) -> DiffPoly:
        h = p.pol
        while True:
            lmh = h.lm(self.r)
            target = None
            for m in sorted(h.terms, key=self.r.key, reverse=True):
                if m == lmh:
                    continue
                red = self._j_reductor(m)
                if red is not None:
                    target = (m, red)
                    break
            if target is None:
                return h
            m, (g, theta) = target
            h = h - g.pol.scale(h.terms[m]).shifted(theta)
            self.budget.tick()
            self.stats["tail_reductions"] += 1

    # -- criteria -------------------------------------------------------

    def _criteria_fire(self, p: _Triple, g: _Triple, f: _Triple):
        lm_p = p.lm
        if 1 in self.criteria:
            L = mon_lcm(p.anc_lm, g.anc_lm)
            if L is not None and mon_strictly_divides(L, lm_p):
                return 1
        if 2 in self.criteria:
            L = mon_lcm(p.anc_lm, g.anc_lm)
            if L is not None:
                for t in self.T:
                    a = mon_lcm(t.lm, p.anc_lm)
                    b = mon_lcm(t.lm, g.anc_lm)
                    if (
                        a is not None
                        and b is not None
                        and mon_strictly_divides(a, L)
                        and mon_strictly_divides(b, L)
                    ):
                        return 2
        if 3 in self.criteria:
            for t in self.T:
                if t.idx >= f.idx:
                    continue
                hit = False
                for y in t.cur_dp:
                    if mon_shift(t.lm, y) == lm_p:
                        hit = True
                        break
                if not hit:
                    continue
                L = mon_lcm(p.anc_lm, t.anc_lm)
                if L is not None and mon_strictly_divides(L, lm_p):
                    return 3
        if 4 in self.criteria and self.constant_mode:
            if lm_p[0] == g.lm[0]:
                if all(min(a, b) == 0 for a, b in zip(lm_p[1], g.lm[1])):
                    return 4
        return 0

    # -- HeadReduce -------------------------------------------------------

    def _head_reduce(self, Q: list) -> list:
        S = list(Q)
        out = []
        while S:
            p = S.pop(0)
            h = self._head_normal_form(p)
            if not h.is_zero():
                if h.lm(self.r) != p.lm:
                    w = self._new_triple(h)
                    out.append(w)
                    if self.trace is not None:
                        self.trace.append(("wrap", p.lm, w.lm))
                else:
                    out.append(p)
            else:
                if p.lm == p.anc_lm:
                    keep = []
                    for q in S:
                        if q.anc_tid == p.tid:
                            self.stats["purged"] += 1
                        else:
                            keep.append(q)
                    S = keep
                if self.trace is not None:
                    self.trace.append(("drop", p.lm))
        return out

    # -- main loop ----------------------------------------------------------

    def run(self, F) -> list:
        polys = [f for f in F if not f.is_zero()]
        if not polys:
            return []
        self.constant_mode = all(
            c.is_rational() for f in polys for c in f.terms.values()
        )
        order = sorted(range(len(polys)), key=lambda i: (self.r.key(polys[i].lm(self.r)), i))
        first = self._new_triple(polys[order[0]])
        self._insert(first)
        if self.trace is not None:
            self.trace.append(("init", first.lm))
        Q = [self._new_triple(polys[i]) for i in order[1:]]
        Q = self._head_reduce(Q)
        while Q:
            p = min(Q, key=lambda q: (self.r.key(q.lm), q.tid))
            Q.remove(p)
            if self.trace is not None:
                self.trace.append(("select", p.lm))
            if p.anc_tid == p.tid:
                displaced = [q for q in self.T if mon_strictly_divides(p.lm, q.lm)]
                for q in displaced:
                    self._remove(q)
                    Q.append(q)
                    self.stats["displacements"] += 1
            p.pol = self._tail_normal_form(p)
            p.lm = p.pol.lm(self.r)
            self._insert(p)
            for q in list(self.T):
                fresh = [d for d in sorted(q.cur_dp) if d not in q.dp]
                applied = set()
                for theta in fresh:
                    prol = self._new_triple(
                        q.pol.shifted(theta),
                        anc_tid=q.anc_tid,
                        anc_lm=q.anc_lm,
                        parent_tid=q.tid,
                        parent_theta=theta,
                    )
                    Q.append(prol)
                    applied.add(theta)
                    self.stats["prolongations"] += 1
                q.dp = (q.dp & set(q.cur_dp)) | applied
            Q = self._head_reduce(Q)
        return self.T


def autoreduce(G, r: Ranking, budget: _Budget = None) -> list:
    """Fully inter-reduce to the unique reduced (monic) basis."""
    G = [g.monic(r) for g in G if not g.is_zero()]
    changed = True
    while changed:
        changed = False
        for i in range(len(G)):
            rest = G[:i] + G[i + 1 :]
            nf = normal_form(G[i], rest, r)
            if budget is not None:
                budget.tick()
            if nf != G[i]:
                changed = True
                if nf.is_zero():
                    G.pop(i)
                else:
                    G[i] = nf.monic(r)
                break
    return sorted(G, key=lambda g: r.key(g.lm(r)), reverse=True)


def groebner_basis(F, ranking: Ranking, *, criteria=(1, 2, 3, 4), budget: int = 10_000_000, trace=None, debug_checks: bool = False) -> BasisResult:
    """Reduced Groebner basis of the linear difference ideal Id(F).

    ``criteria`` selects which of C1..C4 may discard prolongations; C4
    only ever applies when all input coefficients are plain rationals.
    Raises BudgetExceededError when the reduction-work cap is hit.
    """
    comp = _Completion(ranking, criteria, budget, trace)
    T = comp.run(F)
    if debug_checks:
        comp._check_partition()
    tid_to_pos = {t.tid: i for i, t in enumerate(T)}
    janet = []
    for i, t in enumerate(T):
        janet.append(
            BasisElement(
                poly=canonical_form(t.pol, ranking),
                difference_powers=tuple(sorted(t.cur_dp)),
                ancestor=tid_to_pos.get(t.anc_tid, i),
                idx=t.idx,
            )
        )
    ancestors = [t.pol for t in T if t.anc_tid == t.tid]
    reduced = autoreduce(ancestors, ranking, comp.budget)
    reduced = [canonical_form(g, ranking) for g in reduced]
    stats = dict(comp.stats)
    stats["work"] = comp.budget.work
    stats["criteria_hits"] = dict(comp.stats["criteria_hits"])
    return BasisResult(janet_like=janet, reduced_gb=reduced, stats=stats)


# ---------------------------------------------------------------------------
# Janet-like normal form against a finished basis (certificates, tests)
# ---------------------------------------------------------------------------


def j_normal_form(h: DiffPoly, basis, r: Ranking, *, head_only: bool = False) -> DiffPoly:
    """J-normal form of h modulo [(poly, difference_powers), ...]."""
    items = []
    for poly, dps in basis:
        if poly.is_zero():
            continue
        items.append((poly.lm(r), poly.monic(r), frozenset(dps)))

    def reductor(mon):
        found = None
        for lm, poly, dps in items:
            theta = mon_quotient(mon, lm)
            if theta is not None and in_j_cone(theta, dps):
                if found is not None:
                    raise RuntimeError("multiple Janet-like reductors for one monomial")
                found = (poly, theta)
        return found

    while not h.is_zero():
        mons = [h.lm(r)] if head_only else sorted(h.terms, key=r.key, reverse=True)
        target = None
        for m in mons:
            red = reductor(m)
            if red is not None:
                target = (m, red)
                break
        if target is None:
            return h
        m, (poly, theta) = target
        h = h - poly.scale(h.terms[m]).shifted(theta)
    return h


# ---------------------------------------------------------------------------
# independent Buchberger-style oracle
# ---------------------------------------------------------------------------


def s_polynomial(f: DiffPoly, g: DiffPoly, r: Ranking):
    """S-polynomial for leading monomials on the same indeterminate, else None."""
    lmf, lcf = f.leading(r)
    lmg, lcg = g.leading(r)
    L = mon_lcm(lmf, lmg)
    if L is None:
        return None
    tf = mon_quotient(L, lmf)
    tg = mon_quotient(L, lmg)
    return f.scale(lcf.inverse()).shifted(tf) - g.scale(lcg.inverse()).shifted(tg)


def buchberger_oracle(F, ranking: Ranking, *, budget: int = 10_000_000) -> list:
    """Reduced Groebner basis by plain pair completion, no Janet machinery."""
    b = _Budget(budget)
    G = [f.monic(ranking) for f in F if not f.is_zero()]
    if not G:
        return []
    pairs = [(i, j) for i in range(len(G)) for j in range(i + 1, len(G))]
    while pairs:
        pairs.sort(
            key=lambda p: (
                _pair_key(G, p, ranking),
                p,
            )
        )
        i, j = pairs.pop(0)
        s = s_polynomial(G[i], G[j], ranking)
        if s is None:
            continue
        b.tick()
        nf = normal_form(s, G, ranking)
        if not nf.is_zero():
            G.append(nf.monic(ranking))
            k = len(G) - 1
            pairs.extend((i2, k) for i2 in range(k))
    reduced = autoreduce(G, ranking, b)
    return [canonical_form(g, ranking) for g in reduced]


def _pair_key(G, pair, r):
    i, j = pair
    L = mon_lcm(G[i].lm(r), G[j].lm(r))
    if L is None:
        return (0, (-1, ()))
    return (1, r.key(L))


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def check_completion(basis_pairs, r: Ranking) -> bool:
    """Algorithmic Janet-like characterization: every difference-power
    prolongation of every element J-reduces to zero."""
    for poly, dps in basis_pairs:
        for theta in dps:
            if not j_normal_form(poly.shifted(theta), basis_pairs, r).is_zero():
                return False
    return True


def check_groebner(G, r: Ranking) -> bool:
    """Every same-indeterminate S-polynomial reduces to zero."""
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            s = s_polynomial(G[i], G[j], r)
            if s is not None and not normal_form(s, G, r).is_zero():
                return False
    return True


def check_membership(F, G, r: Ranking) -> bool:
    return all(normal_form(f, G, r).is_zero() for f in F)


def check_shift_stability(G, r: Ranking, max_total: int = 3) -> bool:
    """NF(theta o g, G) = 0 for all shifts with |theta| <= max_total."""
    if not G:
        return True
    n = len(G[0].lm(r)[1])
    thetas = _small_shifts(n, max_total)
    for g in G:
        for theta in thetas:
            if not normal_form(g.shifted(theta), G, r).is_zero():
                return False
    return True


def _small_shifts(n, max_total):
    out = []

    def rec(prefix, remaining):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for v in range(remaining + 1):
            rec(prefix + [v], remaining - v)

    rec([], max_total)
    return [t for t in out if any(t)]
