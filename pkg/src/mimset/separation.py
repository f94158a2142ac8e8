"""m-separation and the independence models of ADMGs."""

from __future__ import annotations

from dataclasses import dataclass

from .graph import (Admg, GraphError, TotalOrder, ancestors, bits, district_within,
                    is_ancestral_set, siblings, subsets)


@dataclass(frozen=True, order=True)
class Triple:
    """A disjoint triple ``<a, b | c>`` of vertex bitmasks."""

    a: int
    b: int
    c: int = 0

    def __post_init__(self):
        if self.a & self.b or self.a & self.c or self.b & self.c:
            raise GraphError("triple components must be pairwise disjoint")

    def canonical(self) -> "Triple":
        """Symmetric form with the smaller side first."""
        return self if self.a <= self.b else Triple(self.b, self.a, self.c)

    def is_trivial(self) -> bool:
        return not self.a or not self.b

    def render(self, g: Admg) -> str:
        return f"<{g.label(self.a)},{g.label(self.b)}|{g.label(self.c)}>"


def m_reachable(g: Admg, a: int, c: int) -> int:
    """Vertices reachable from vertex ``a`` by an m-connecting path given ``c``.

    Search states are (vertex, arrived-by-arrowhead).  A vertex is passed as
    a collider only if it is an ancestor of ``c``; as a non-collider only if
    it lies outside ``c``.
    """
    anc = ancestors(g, c)
    # head = 1 when the edge used to arrive points into v.
    seen = set()
    stack = []
    for w in bits(g.ch[a]):
        stack.append((w, 1))
    for w in bits(g.sib[a]):
        stack.append((w, 1))
    for w in bits(g.pa[a]):
        stack.append((w, 0))
    reached = 0
    while stack:
        state = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        v, head = state
        if c >> v & 1 and not head:
            continue
        reached |= 1 << v
        # Leaving v along an edge that also points into v makes v a collider.
        if head:
            if anc >> v & 1:
                stack.extend((w, 1) for w in bits(g.sib[v]))
                stack.extend((w, 0) for w in bits(g.pa[v]))
            if not c >> v & 1:
                stack.extend((w, 1) for w in bits(g.ch[v]))
        else:
            stack.extend((w, 1) for w in bits(g.ch[v] | g.sib[v]))
            stack.extend((w, 0) for w in bits(g.pa[v]))
    return reached & ~c & ~(1 << a)


def m_connecting_exists(g: Admg, a: int, b: int, c: int) -> bool:
    """Whether an m-connecting path joins vertices ``a`` and ``b`` given mask ``c``."""
    if a == b or (c >> a & 1) or (c >> b & 1):
        raise GraphError("endpoints must be distinct and outside the conditioning set")
    return bool(m_reachable(g, a, c) >> b & 1)


def m_separated(g: Admg, a: int, b: int, c: int = 0) -> bool:
    """Whether every vertex of ``a`` is m-separated from every vertex of ``b`` given ``c``."""
    Triple(a, b, c)
    for v in bits(a):
        if m_reachable(g, v, c) & b:
            return False
    return True


def triple_holds(g: Admg, t: Triple) -> bool:
    return m_separated(g, t.a, t.b, t.c)


def independence_model(g: Admg, limit: int = 8) -> frozenset[Triple]:
    """All separation statements with singleton sides, in canonical form."""
    if g.n > limit:
        raise GraphError(f"independence model extraction is limited to {limit} vertices")
    out = set()
    for a in range(g.n):
        for b in range(a + 1, g.n):
            rest = g.full & ~(1 << a) & ~(1 << b)
            for c in subsets(rest):
                if not m_reachable(g, a, c) >> b & 1:
                    out.add(Triple(1 << a, 1 << b, c))
    return frozenset(out)


def separation_table(g: Admg) -> dict[tuple[int, int], int]:
    """Map each vertex pair ``(a, b)`` with ``a < b`` to a bitmask over conditioning sets.

    Bit ``c`` of the value is set when ``a`` and ``b`` are m-separated given ``c``.
    """
    out = {}
    for a in range(g.n):
        for b in range(a + 1, g.n):
            rest = g.full & ~(1 << a) & ~(1 << b)
            flags = 0
            for c in subsets(rest):
                if not m_reachable(g, a, c) >> b & 1:
                    flags |= 1 << c
            out[a, b] = flags
    return out


def minimal_latent_set(g: Admg, order: TotalOrder, a: int) -> int:
    """Siblings of the district of ``max(a)`` within its predecessors, outside ``G[a]``'s district."""
    if not a:
        return 0
    if not is_ancestral_set(g, a):
        raise GraphError("minimal latent set needs an ancestral set")
    b = order.last_in(a)
    r = order.preceding(b)
    dis = district_within(g, 1 << b, a)
    return siblings(g, dis) & r & ~dis
