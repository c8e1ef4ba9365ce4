"""Buchberger's algorithm under pure lex, with normal-form reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .polynomial import (
    Monomial,
    Polynomial,
    PolynomialError,
    VariableOrder,
    lex_key,
    mono_div,
    mono_divides,
    mono_lcm,
    mono_mul,
)

Terms = Dict[Monomial, Fraction]


class ResourceExhausted(RuntimeError):
    """Raised when Buchberger exceeds its configured step limit."""


@dataclass(frozen=True)
class GroebnerBasis:
    generators: Tuple[Polynomial, ...]
    order: VariableOrder

    def __iter__(self):
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)


def _lead(t: Terms) -> Monomial:
    return max(t, key=lex_key)


def _normal_form(f: Terms, basis: Sequence[Tuple[Monomial, Fraction, Terms]], last: bool = False) -> Terms:
    f = dict(f)
    rem: Terms = {}
    divisors = list(reversed(basis)) if last else basis
    while f:
        m = _lead(f)
        c = f[m]
        for lm, lc, g in divisors:
            if mono_divides(lm, m):
                q = mono_div(m, lm)
                factor = c / lc
                for gm, gc in g.items():
                    t = mono_mul(gm, q)
                    v = f.get(t, 0) - factor * gc
                    if v:
                        f[t] = v
                    else:
                        del f[t]
                break
        else:
            rem[m] = c
            del f[m]
    return rem


def _entry(p: Terms) -> Tuple[Monomial, Fraction, Terms]:
    lm = _lead(p)
    return lm, p[lm], p


def reduce(p: Polynomial, basis: Sequence[Polynomial], select: str = "first") -> Polynomial:
    """Full normal form of ``p`` modulo ``basis``.

    ``select`` picks the divisor when several leading monomials divide the
    current term: ``"first"`` (basis order) or ``"last"``.
    """
    if select not in ("first", "last"):
        raise ValueError(f"unknown selection rule {select!r}")
    entries = []
    for g in basis:
        if g.is_zero():
            raise PolynomialError("zero polynomial in reduction basis")
        g._check(p)
        entries.append(_entry(g._terms))
    return Polynomial._raw(_normal_form(p._terms, entries, select == "last"), p.order)


def _spoly(f: Terms, g: Terms) -> Terms:
    lf, lg = _lead(f), _lead(g)
    L = mono_lcm(lf, lg)
    a, b = mono_div(L, lf), mono_div(L, lg)
    cf, cg = f[lf], g[lg]
    out: Terms = {}
    for m, c in f.items():
        out[mono_mul(m, a)] = c / cf
    for m, c in g.items():
        t = mono_mul(m, b)
        v = out.get(t, 0) - c / cg
        if v:
            out[t] = v
        else:
            out.pop(t, None)
    return out


def s_polynomial(f: Polynomial, g: Polynomial) -> Polynomial:
    """S(f, g) = (L/lt(f)) f - (L/lt(g)) g with L the lcm of the leading monomials."""
    if f.is_zero() or g.is_zero():
        raise PolynomialError("S-polynomial of a zero polynomial")
    f._check(g)
    return Polynomial._raw(_spoly(f._terms, g._terms), f.order)


def _normalize_terms(t: Terms) -> Terms:
    den = 1
    for c in t.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    nums = [int(c * den) for c in t.values()]
    g = 0
    for n in nums:
        g = math.gcd(g, n)
    if t[_lead(t)] < 0:
        g = -g
    return {m: Fraction(n, g) for m, n in zip(t.keys(), nums)}


def normalize(p: Polynomial) -> Polynomial:
    """Integer, content-free multiple of ``p`` with positive leading coefficient."""
    if p.is_zero():
        raise PolynomialError("cannot normalize the zero polynomial")
    return Polynomial._raw(_normalize_terms(p._terms), p.order)


def buchberger(polys: Sequence[Polynomial], step_limit: Optional[int] = None) -> GroebnerBasis:
    """Reduced lex Groebner basis, normalized and sorted by ascending leading monomial."""
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise PolynomialError("Groebner basis of an empty or all-zero input")
    order = polys[0].order
    for p in polys:
        if p.order != order:
            p._check(polys[0])

    G: List[Terms] = []
    leads: List[Monomial] = []
    pairs = set()

    def push(t: Terms) -> None:
        lm = _lead(t)
        lc = t[lm]
        G.append({m: c / lc for m, c in t.items()})
        leads.append(lm)
        k = len(G) - 1
        for i in range(k):
            pairs.add((i, k))

    # canonical start: sorting removes any dependence on caller order
    for p in sorted(polys, key=lambda p: [(lex_key(m), c) for m, c in p.items()]):
        push(dict(p._terms))

    steps = 0
    while pairs:
        def rank(ij):
            L = mono_lcm(leads[ij[0]], leads[ij[1]])
            return (sum(L), lex_key(L), ij)

        ij = min(pairs, key=rank)
        pairs.discard(ij)
        i, j = ij
        li, lj = leads[i], leads[j]
        if all(a == 0 or b == 0 for a, b in zip(li, lj)):
            continue
        steps += 1
        if step_limit is not None and steps > step_limit:
            raise ResourceExhausted(f"Buchberger exceeded {step_limit} steps")
        h = _normal_form(_spoly(G[i], G[j]), [(leads[k], Fraction(1), G[k]) for k in range(len(G))])
        if h:
            push(h)

    # minimal basis: drop generators whose leading monomial is a multiple of another's
    keep = []
    for k, lm in enumerate(leads):
        dominated = False
        for o, lo in enumerate(leads):
            if o == k:
                continue
            if mono_divides(lo, lm) and (lo != lm or o < k):
                dominated = True
                break
        if not dominated:
            keep.append(k)
    basis = [G[k] for k in keep]

    # inter-reduce: only the tails can change
    reduced = []
    for k, g in enumerate(basis):
        others = [_entry(h) for o, h in enumerate(basis) if o != k]
        reduced.append(_normal_form(g, others))

    out = [Polynomial._raw(_normalize_terms(t), order) for t in reduced]
    out.sort(key=lambda p: lex_key(_lead(p._terms)))
    return GroebnerBasis(tuple(out), order)


def is_groebner_basis(gens: Sequence[Polynomial]) -> bool:
    """Buchberger's criterion: every S-polynomial reduces to zero."""
    for g in gens:
        if g.is_zero():
            raise PolynomialError("zero polynomial in candidate basis")
    entries = [_entry(g._terms) for g in gens]
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if _normal_form(_spoly(gens[i]._terms, gens[j]._terms), entries):
                return False
    return True
