"""Heads, tails, parameterizing sets and the m-connecting imset."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graph import (Admg, GraphError, ancestors, barren_subset, bits, collider_connected,
                    is_ancestral_set, is_collider_connecting_set, subsets)
from .imset import Imset


@dataclass(frozen=True)
class HeadTail:
    head: int
    tail: int


@dataclass(frozen=True)
class ParamFamily:
    """The parameterizing sets of a graph.

    Attributes
    ----------
    table : numpy.ndarray of bool
        ``table[S]`` is true iff ``S`` is parameterizing.  ``table[0]`` is false.
    head_tails : tuple of HeadTail
        Heads in increasing mask order with their tails.
    """

    n: int
    table: np.ndarray
    head_tails: tuple[HeadTail, ...]

    @property
    def sets(self) -> list[int]:
        return [int(s) for s in np.flatnonzero(self.table)]

    def __contains__(self, s: int) -> bool:
        return bool(self.table[s])

    def key(self) -> bytes:
        """Canonical key: equal keys exactly when the families are equal."""
        return np.packbits(self.table, bitorder="little").tobytes()

    def max_size(self) -> int:
        return max((s.bit_count() for s in self.sets), default=0)


def heads(g: Admg) -> list[int]:
    out = set()
    for c in range(1, 1 << g.n):
        if is_collider_connecting_set(g, c):
            out.add(barren_subset(g, c))
    return sorted(out)


def _tail(g: Admg, h: int) -> int:
    return collider_connected(g, h, ancestors(g, h)) & ~h


def tail(g: Admg, h: int) -> int:
    if h not in _head_set(g):
        raise GraphError(f"{g.label(h)} is not a head")
    return _tail(g, h)


@lru_cache(maxsize=4096)
def _head_set(g: Admg) -> frozenset[int]:
    return frozenset(heads(g))


@lru_cache(maxsize=4096)
def parameterizing_sets(g: Admg) -> ParamFamily:
    table = np.zeros(1 << g.n, dtype=bool)
    hts = []
    for h in sorted(_head_set(g)):
        t = _tail(g, h)
        hts.append(HeadTail(h, t))
        for extra in subsets(t):
            table[h | extra] = True
    return ParamFamily(g.n, table, tuple(hts))


def is_parameterizing(g: Admg, s: int) -> bool:
    """Direct test: ``S <= co(ba(S))`` inside ``G[an(S)]``."""
    if not s:
        return False
    return s & ~collider_connected(g, barren_subset(g, s), ancestors(g, s)) == 0


def constrained_sets(g: Admg) -> list[int]:
    table = parameterizing_sets(g).table
    return [s for s in range(1, 1 << g.n) if not table[s]]


def m_imset(g: Admg) -> Imset:
    values = parameterizing_sets(g).table.astype(np.int64)
    values[0] = 1
    return Imset(g.names, values)


def n_imset(g: Admg) -> Imset:
    values = (~parameterizing_sets(g).table).astype(np.int64)
    values[0] = 0
    return Imset(g.names, values)


def characteristic_imset(g: Admg) -> Imset:
    """Characteristic imset of a DAG on sets of size two or more."""
    if not g.is_dag():
        raise GraphError("characteristic imsets are defined for DAGs only")
    values = np.zeros(1 << g.n, dtype=np.int64)
    for s in range(1 << g.n):
        if s.bit_count() < 2:
            continue
        if any((s & ~(1 << a)) & ~g.pa[a] == 0 for a in bits(s)):
            values[s] = 1
    return Imset(g.names, values)


def head_partition(g: Admg, s: int) -> list[int]:
    """Partition ``s`` into heads: take the maximal heads inside, then recurse on the rest.

    Blocks come out level by level; within a level they are ordered by their
    vertices in name order.
    """
    hs = sorted(_head_set(g))
    an = {h: ancestors(g, h) for h in hs}
    out = []
    while s:
        inside = [h for h in hs if h & ~s == 0]
        top = [h for h in inside
               if not any(k != h and h & ~an[k] == 0 and k & ~an[h] != 0 for k in inside)]
        if not top:
            raise GraphError("no head inside a non-empty set")
        out.extend(sorted(top, key=lambda h: list(bits(h))))
        for h in top:
            s &= ~h
    return out


def head_factorization(g: Admg, a: int) -> list[HeadTail]:
    """Heads of ``[a]`` with their tails, for an ancestral set ``a``."""
    if not is_ancestral_set(g, a):
        raise GraphError("head factorization needs an ancestral set")
    return [HeadTail(h, _tail(g, h)) for h in head_partition(g, a)]
