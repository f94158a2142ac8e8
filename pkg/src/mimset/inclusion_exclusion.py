"""Inclusion-exclusion decomposition of the non-m-connecting imset.

:func:`nie` splits ``n_imset(g)`` into an inclusion imset and an exclusion
imset whose up-Möbius transforms are sums of semi-elementary imsets.  The
certificates for those sums are returned alongside.  :func:`olmp` builds the
certificate that witnesses the ordered local Markov statements, and
:func:`verify_decomposition` runs every check on one graph and order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .graph import (Admg, GraphError, TotalOrder, ancestral_sets, barren_subset, bits,
                    collider_connected, consistent_order, district_within, is_ancestral_set,
                    is_consistent, subsets)
from .heads_tails import n_imset, parameterizing_sets
from .imset import Imset, SemiElemCombination, evaluate_certificate, mobius_up, triple_family
from .separation import Triple, m_separated, minimal_latent_set


@dataclass(frozen=True)
class PairsResult:
    ms: tuple[int, ...]
    ns: tuple[int, ...]


@dataclass
class NieResult:
    inclusion: Imset
    exclusion: Imset
    inclusion_cert: SemiElemCombination
    exclusion_cert: SemiElemCombination

    def difference(self) -> Imset:
        return self.inclusion - self.exclusion


def _pairs(table: np.ndarray, within: int, b: int) -> PairsResult:
    bb = 1 << b
    remaining = {s for s in subsets(within) if s & bb and not table[s]}
    ms, ns = [], []
    while remaining:
        tops = [s for s in remaining if not any(t != s and s & ~t == 0 for t in remaining)]
        top = min(tops)
        cands = [s for s in subsets(top) if s & bb and table[s]]
        m = max(cands, key=int.bit_count)
        if any(s & ~m for s in cands):
            raise GraphError("no unique maximal parameterizing set; is b barren?")
        ms.append(m)
        ns.append(top)
        remaining = {s for s in remaining if s & ~top or not s & ~m}
    return PairsResult(tuple(ms), tuple(ns))


def pairs(g: Admg, b, within: int | None = None) -> PairsResult:
    """Paired maximal constrained and parameterizing sets containing ``b``.

    ``within`` restricts the graph to an ancestral set (default: all of V).
    Among several maximal constrained sets the smallest mask is taken first.
    """
    b = g.index(b)
    within = g.full if within is None else within
    if not is_ancestral_set(g, within):
        raise GraphError("pairs needs an ancestral vertex set")
    if not barren_subset(g, within) >> b & 1:
        raise GraphError(f"{g.names[b]} is not barren in the given set")
    return _pairs(parameterizing_sets(g).table, within, b)


def _terms(p: PairsResult, b: int):
    """``(even, N_J, M_JK)`` for every non-empty J and K with a non-empty family."""
    k = len(p.ns)
    for j in range(1, 1 << k):
        nj = -1
        for i in bits(j):
            nj &= p.ns[i]
        for kk in subsets(j):
            if not kk:
                continue
            mk = nj
            for i in bits(kk):
                mk &= p.ms[i]
            if nj & ~mk:
                yield ((j & ~kk).bit_count() % 2 == 0, nj, mk)


def nie(g: Admg, order: TotalOrder | None = None, nonredundant: bool = False) -> NieResult:
    """Run the inclusion-exclusion decomposition along ``order``.

    With ``nonredundant`` a term whose set family already sits on the
    opposite side within the same vertex step cancels against it instead of
    being added.
    """
    if order is None:
        order = consistent_order(g)
    if not is_consistent(g, order.sequence):
        raise GraphError("order is not consistent with the graph")
    table = parameterizing_sets(g).table
    masks = np.arange(1 << g.n, dtype=np.int64)
    inc = np.zeros(1 << g.n, dtype=np.int64)
    exc = np.zeros(1 << g.n, dtype=np.int64)
    inc_cert = SemiElemCombination(g.names)
    exc_cert = SemiElemCombination(g.names)
    a = g.full
    for b in reversed(order.sequence):
        bb = 1 << b
        p = _pairs(table, a, b)
        plus, minus = Counter(), Counter()
        listing = []
        for even, nj, mk in _terms(p, b):
            key = (nj, mk)
            if not nonredundant:
                listing.append((even, key))
            elif even:
                if minus[key]:
                    minus[key] -= 1
                else:
                    plus[key] += 1
            else:
                if plus[key]:
                    plus[key] -= 1
                else:
                    minus[key] += 1
        if nonredundant:
            listing = [(True, key) for key in sorted(plus) for _ in range(plus[key])]
            listing += [(False, key) for key in sorted(minus) for _ in range(minus[key])]
        for even, (nj, mk) in listing:
            family = ((masks & ~nj) == 0) & ((masks & bb) != 0) & ((masks & ~mk) != 0)
            t = Triple(bb, nj & ~mk, mk & ~bb)
            if even:
                inc += family
                inc_cert.add(t)
            else:
                exc += family
                exc_cert.add(t)
        a &= ~bb
    return NieResult(Imset(g.names, inc), Imset(g.names, exc), inc_cert, exc_cert)


def nie_nonredundant(g: Admg, order: TotalOrder | None = None) -> NieResult:
    return nie(g, order, nonredundant=True)


def _descendants_within(g: Admg, a: int, within: int) -> int:
    seen = a & within
    frontier = seen
    while frontier:
        nxt = 0
        for v in bits(frontier):
            nxt |= g.ch[v]
        nxt &= within & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def olmp(g: Admg, order: TotalOrder, a: int) -> SemiElemCombination:
    """Certificate of semi-elementary triples for the ordered local Markov statements of ``a``.

    The district test for each step uses the district of ``max(a)`` in the
    subgraph on its predecessors.
    """
    out = SemiElemCombination(g.names)
    if not a:
        return out
    if not is_ancestral_set(g, a):
        raise GraphError("olmp needs an ancestral set")
    _olmp(g, order, a, out)
    return out


def _olmp(g: Admg, order: TotalOrder, a: int, out: SemiElemCombination):
    b = order.last_in(a)
    bb = 1 << b
    r_all = order.preceding(b)
    m_r = collider_connected(g, bb, r_all)
    lat = minimal_latent_set(g, order, a)
    big_d = _descendants_within(g, lat, r_all) & ~lat
    # D is removed from N and C so that B, C, D, F partition R.
    n_set = m_r & ~lat & ~big_d
    big_b = bb | lat
    big_c = m_r & ~big_b & ~big_d
    big_f = r_all & ~(m_r | big_d)
    dis_b = district_within(g, bb, r_all)
    seq = order.sequence
    start = min(seq.index(v) for v in bits(big_b))
    before = 0
    for v in seq[:start]:
        before |= 1 << v
    for r in seq[start:]:
        rb = 1 << r
        r_i = before | rb
        b_i, c_i, f_i = r_i & big_b, r_i & big_c, r_i & big_f
        c_prev = before & big_c
        if dis_b & rb:
            m_i = collider_connected(g, rb, r_i)
            out.add(Triple(rb, r_i & ~m_i, m_i & ~rb))
            out.add(Triple(rb, f_i, (b_i | c_i) & ~rb))
            if big_c & rb:
                out.add(Triple(rb | b_i, f_i, c_prev))
        elif (big_c | big_f) & rb:
            _olmp(g, order, r_i & ~big_d, out)
            out.add(Triple(b_i, rb, (c_i | f_i) & ~rb))
            if big_c & rb:
                out.add(Triple(b_i, rb | f_i, c_prev))
        out.add(Triple(b_i, f_i, c_i))
        if r == b:
            break
        before = r_i
    m = collider_connected(g, bb, a)
    out.add(Triple(bb, a & ~n_set, n_set & ~bb))
    out.add(Triple(bb, n_set & ~m, m & ~bb))
    out.add(Triple(bb, a & ~m, m & ~bb))


# -- semigraphoid closure -------------------------------------------------------

def _canon(t: tuple[int, int, int]) -> tuple[int, int, int]:
    a, b, c = t
    return (a, b, c) if a <= b else (b, a, c)


def semigraphoid_closure(triples, limit: int = 20000) -> set[tuple[int, int, int]]:
    """Close non-trivial triples under symmetry, decomposition, weak union and contraction."""
    known = {_canon((t.a, t.b, t.c)) for t in triples if t.a and t.b}
    frontier = list(known)
    while frontier:
        if len(known) > limit:
            raise RuntimeError("semigraphoid closure exceeded its size bound")
        new = []
        for a, b, c in frontier:
            for x, y in ((a, b), (b, a)):
                # decomposition and weak union on the y side
                for keep in subsets(y):
                    if keep and keep != y:
                        for t in (_canon((x, keep, c)), _canon((x, keep, c | (y & ~keep)))):
                            if t not in known:
                                known.add(t)
                                new.append(t)
        # contraction: <x, y | zw> and <x, w | z>  give  <x, yw | z>
        snapshot = list(known)
        by_first = {}
        for a, b, c in snapshot:
            by_first.setdefault(a, []).append((b, c))
            by_first.setdefault(b, []).append((a, c))
        for x, rows in by_first.items():
            for y, zw in rows:
                for w, z in rows:
                    if w & zw == w and z == zw & ~w and not w & y:
                        t = _canon((x, y | w, z))
                        if t not in known:
                            known.add(t)
                            new.append(t)
        frontier = new
    return known


def statement_derivable(t: Triple, closure: set[tuple[int, int, int]]) -> bool:
    if t.is_trivial():
        return True
    return _canon((t.a, t.b, t.c)) in closure


# -- verification -----------------------------------------------------------------

@dataclass
class DecompositionReport:
    failures: list[str] = field(default_factory=list)
    checked_triples: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_decomposition(g: Admg, order: TotalOrder | None = None,
                         closure_check: bool = True) -> DecompositionReport:
    """Check the decomposition, its certificates and the OLMP witnesses on one graph."""
    if order is None:
        order = consistent_order(g)
    report = DecompositionReport()
    for variant in (False, True):
        res = nie(g, order, nonredundant=variant)
        tag = "nonredundant " if variant else ""
        if res.difference() != n_imset(g):
            report.failures.append(f"{tag}n != i - e")
        if evaluate_certificate(res.inclusion_cert) != mobius_up(res.inclusion):
            report.failures.append(f"{tag}inclusion certificate mismatch")
        if evaluate_certificate(res.exclusion_cert) != mobius_up(res.exclusion):
            report.failures.append(f"{tag}exclusion certificate mismatch")
        for t in res.inclusion_cert.triples() + res.exclusion_cert.triples():
            report.checked_triples += 1
            if not m_separated(g, t.a, t.b, t.c):
                report.failures.append(f"{tag}certificate triple {t.render(g)} not separated")
    for a in ancestral_sets(g):
        if not a:
            continue
        cert = olmp(g, order, a)
        for t in cert.triples():
            report.checked_triples += 1
            if not m_separated(g, t.a, t.b, t.c):
                report.failures.append(f"olmp({g.label(a)}) triple {t.render(g)} not separated")
        if closure_check:
            b = order.last_in(a)
            cl = collider_connected(g, 1 << b, a)
            target = Triple(1 << b, a & ~cl, cl & ~(1 << b))
            direct = {_canon((t.a, t.b, t.c)) for t in cert.triples() if t.a and t.b}
            if not statement_derivable(target, direct) and \
                    not statement_derivable(target, semigraphoid_closure(cert.triples())):
                report.failures.append(f"olmp({g.label(a)}) misses {target.render(g)}")
    return report


def triple_family_of(g: Admg, t: Triple) -> Imset:
    return triple_family(g.names, t)
