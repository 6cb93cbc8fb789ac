"""Lex-order Groebner bases by Buchberger's algorithm.

Internally polynomials are dicts ``{exponent tuple: int}`` kept primitive
(integer coefficients with gcd 1 and positive leading coefficient), so the
inner reduction loop never touches fractions.  Lex order on exponent tuples
is just Python tuple comparison.

Pair handling follows Gebauer and Moeller; the next pair is the one with
the smallest sugar degree, ties broken by the smaller lcm.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from math import gcd
from typing import Dict, List, Sequence, Tuple

from .poly import RationalPoly, variables_union
from .resultant import EliminationError

Mono = Tuple[int, ...]
IPoly = Dict[Mono, int]

DEFAULT_BUDGET = 50_000


class BudgetExceeded(EliminationError):
    def __init__(self, used: int, budget: int):
        super().__init__(f"elimination budget exceeded ({used} > {budget} terms)")
        self.used = used
        self.budget = budget


# -- integer polynomial helpers ------------------------------------------------

def _primitive(p: IPoly) -> IPoly:
    if not p:
        return p
    g = 0
    for c in p.values():
        g = gcd(g, c)
        if g == 1:
            break
    lead = p[max(p)]
    if lead < 0:
        g = -g
    if g == 1:
        return p
    return {m: c // g for m, c in p.items()}


def _from_rational(p: RationalPoly) -> IPoly:
    den = 1
    for c in p.terms.values():
        den = den * c.denominator // gcd(den, c.denominator)
    return _primitive({m: int(c * den) for m, c in p.terms.items()})


def _to_rational(p: IPoly, variables: Tuple[str, ...]) -> RationalPoly:
    lead = p[max(p)]
    return RationalPoly._raw(variables, {m: Fraction(c, lead) for m, c in p.items()})


def _divides(a: Mono, b: Mono) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Mono, b: Mono) -> Mono:
    return tuple(max(x, y) for x, y in zip(a, b))


def _sub(a: Mono, b: Mono) -> Mono:
    return tuple(x - y for x, y in zip(a, b))


def _add(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


class _Counter:
    __slots__ = ("budget", "peak")

    def __init__(self, budget: int):
        self.budget = budget
        self.peak = 0

    def check(self, n: int):
        if n > self.peak:
            self.peak = n
        if n > self.budget:
            raise BudgetExceeded(n, self.budget)


def _reduce(f: IPoly, basis: Sequence[Tuple[Mono, IPoly]], counter: _Counter | None,
            live: int = 0, full: bool = True) -> IPoly:
    """Fraction-free normal form of ``f`` modulo ``basis`` (pairs of (lm, poly))."""
    f = dict(f)
    rem: IPoly = {}
    while f:
        m = max(f)
        c = f[m]
        for lm, g in basis:
            if _divides(lm, m):
                lc = g[lm]
                k = gcd(c, lc)
                a, b = lc // k, c // k
                shift = _sub(m, lm)
                if a != 1:
                    for key in f:
                        f[key] *= a
                    for key in rem:
                        rem[key] *= a
                for gm, gc in g.items():
                    key = _add(gm, shift)
                    v = f.get(key, 0) - b * gc
                    if v:
                        f[key] = v
                    else:
                        f.pop(key, None)
                if counter is not None:
                    counter.check(live + len(f) + len(rem))
                break
        else:
            if not full:
                rem.update(f)
                break
            rem[m] = f.pop(m)
        if len(rem) > 64 and any(abs(v) > 1 << 256 for v in rem.values()):
            # keep coefficient growth in check
            g = 0
            for v in list(rem.values()) + list(f.values()):
                g = gcd(g, v)
            if g > 1:
                rem = {k: v // g for k, v in rem.items()}
                f = {k: v // g for k, v in f.items()}
    return _primitive(rem)


def _spoly(f: IPoly, g: IPoly) -> IPoly:
    lf, lg = max(f), max(g)
    l = _lcm(lf, lg)
    cf, cg = f[lf], g[lg]
    k = gcd(cf, cg)
    a, b = cg // k, cf // k
    sf, sg = _sub(l, lf), _sub(l, lg)
    out: IPoly = {}
    for m, c in f.items():
        out[_add(m, sf)] = a * c
    for m, c in g.items():
        key = _add(m, sg)
        v = out.get(key, 0) - b * c
        if v:
            out[key] = v
        else:
            out.pop(key, None)
    return out


# -- Buchberger ---------------------------------------------------------------------

def _buchberger(F: List[IPoly], counter: _Counter) -> List[IPoly]:
    G: List[IPoly] = []
    lms: List[Mono] = []
    sugar: List[int] = []
    alive: List[bool] = []
    pairs: list = []  # heap of (sugar, lcm, i, j)
    seq = 0

    def deg(m: Mono) -> int:
        return sum(m)

    def live_terms() -> int:
        return sum(len(g) for g, a in zip(G, alive) if a)

    def update(h: IPoly, s: int):
        nonlocal pairs
        lh = max(h)
        idx = len(G)
        G.append(h)
        lms.append(lh)
        sugar.append(s)
        alive.append(True)
        # Gebauer-Moeller: new pairs (k, idx)
        cand = []
        for k in range(idx):
            if alive[k]:
                cand.append((k, _lcm(lms[k], lh)))
        # criterion M/F: drop pairs whose lcm is a proper multiple of another new lcm
        kept = []
        for a, (k, l) in enumerate(cand):
            dominated = False
            for b, (k2, l2) in enumerate(cand):
                if a != b and _divides(l2, l) and (l2 != l or b < a):
                    dominated = True
                    break
            if not dominated:
                kept.append((k, l))
        # product criterion
        new = []
        for k, l in kept:
            if l == _add(lms[k], lh):
                continue
            new.append((k, l))
        # criterion B on old pairs
        old = []
        for entry in pairs:
            s_, l, i, j = entry
            if _divides(lh, l) and _lcm(lms[i], lh) != l and _lcm(lms[j], lh) != l:
                continue
            old.append(entry)
        for k, l in new:
            s_ = max(sugar[k] + deg(l) - deg(lms[k]), s + deg(l) - deg(lh))
            old.append((s_, l, k, idx))
        pairs = old
        heapq.heapify(pairs)
        # drop basis elements made redundant by h
        for k in range(idx):
            if alive[k] and _divides(lh, lms[k]):
                alive[k] = False

    for f in F:
        h = _reduce(f, [(lms[k], G[k]) for k in range(len(G)) if alive[k]], counter)
        if h:
            update(h, deg(max(h)))
    while pairs:
        s_, l, i, j = heapq.heappop(pairs)
        sp = _spoly(G[i], G[j])
        if not sp:
            continue
        active = [(lms[k], G[k]) for k in range(len(G)) if alive[k] or k in (i, j)]
        h = _reduce(sp, active, counter, live=live_terms(), full=False)
        if h:
            update(h, s_)
    return [G[k] for k in range(len(G)) if alive[k]]


def _reduced(G: List[IPoly], counter: _Counter) -> List[IPoly]:
    G = sorted(G, key=max)
    # minimal basis
    minimal = []
    for k, g in enumerate(G):
        lg = max(g)
        if any(_divides(max(h), lg) for n, h in enumerate(G) if n != k and (max(h) != lg or n < k)):
            continue
        minimal.append(g)
    out = []
    for k, g in enumerate(minimal):
        others = [(max(h), h) for n, h in enumerate(minimal) if n != k]
        out.append(_reduce(g, others, counter))
    out.sort(key=max)
    return out


def groebner_lex(system: Sequence[RationalPoly], order: Sequence[str],
                 budget: int = DEFAULT_BUDGET) -> List[RationalPoly]:
    """Reduced lex Groebner basis of ``system`` with ``order[0]`` largest.

    Symbolic parameters belong at the end of ``order`` so they are the last
    to be eliminated.  ``budget`` caps the number of terms alive at any
    point (basis plus the polynomial under reduction); going over raises
    :class:`BudgetExceeded`.
    """
    system = [p for p in system]
    if not system:
        raise ValueError("empty system")
    order = tuple(order)
    if len(set(order)) != len(order):
        raise ValueError("repeated variable in order")
    missing = set(variables_union(system)) - set(order)
    missing = {v for v in missing if any(p.degree(v) > 0 for p in system)}
    if missing:
        raise ValueError(f"order does not cover variables {sorted(missing)}")
    F = [_from_rational(p.with_variables(order)) for p in system if not p.is_zero()]
    if not F:
        return [RationalPoly.constant(0, order)]
    counter = _Counter(budget)
    if any(len(f) == 1 and not any(max(f)) for f in F):
        return [RationalPoly.constant(1, order)]
    G = _reduced(_buchberger(F, counter), counter)
    return [_to_rational(g, order) for g in G]


def elimination_ideal(basis: Sequence[RationalPoly], eliminated: Sequence[str]) -> List[RationalPoly]:
    """Basis elements free of every variable in ``eliminated``."""
    return [g for g in basis if all(g.degree(v) == 0 for v in eliminated)]


def reduce_poly(f: RationalPoly, basis: Sequence[RationalPoly]) -> RationalPoly:
    """Normal form of ``f`` modulo ``basis`` (up to a rational factor)."""
    order = variables_union([f, *basis])
    G = [_from_rational(g.with_variables(order)) for g in basis if not g.is_zero()]
    r = _reduce(_from_rational(f.with_variables(order)), [(max(g), g) for g in G], None)
    if not r:
        return RationalPoly.constant(0, order)
    return _to_rational(r, order)


def is_groebner(basis: Sequence[RationalPoly]) -> bool:
    """Buchberger's criterion: every S-polynomial reduces to zero."""
    order = variables_union(basis)
    G = [_from_rational(g.with_variables(order)) for g in basis if not g.is_zero()]
    pairs = [(max(g), g) for g in G]
    for a in range(len(G)):
        for b in range(a + 1, len(G)):
            sp = _spoly(G[a], G[b])
            if sp and _reduce(sp, pairs, None):
                return False
    return True
