"""Acyclic directed mixed graphs over bitmask vertex sets.

Vertex sets are plain Python ints used as bitmasks: bit ``i`` is set when
vertex ``i`` is a member.  Every set function accepts and returns masks.
Use :meth:`Admg.mask` and :meth:`Admg.labels` to convert to and from names.
"""

from __future__ import annotations

import heapq
import numbers
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

MAX_VERTICES = 25


class GraphError(ValueError):
    """Raised for malformed graphs or graph files."""


def bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def subsets(mask: int) -> Iterator[int]:
    """Yield every subset of ``mask``, starting from the empty set."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def popcount(mask: int) -> int:
    return mask.bit_count()


class Admg:
    """An acyclic directed mixed graph with named vertices.

    Parameters
    ----------
    names : sequence of str
        Vertex names; the position of a name is its index.
    directed : iterable of (a, b)
        Directed edges ``a -> b`` given as names or indices.
    bidirected : iterable of (a, b)
        Bidirected edges ``a <-> b`` given as names or indices.

    A pair may carry both a directed and a bidirected edge.  The directed
    part must be acyclic.  Instances are immutable and hashable.
    """

    __slots__ = ("names", "pa", "ch", "sib", "_index", "_an", "_de", "_hash")

    def __init__(self, names: Sequence[str], directed: Iterable = (), bidirected: Iterable = ()):
        names = tuple(str(v) for v in names)
        if len(set(names)) != len(names):
            raise GraphError("duplicate vertex name")
        if len(names) > MAX_VERTICES:
            raise GraphError(f"at most {MAX_VERTICES} vertices are supported")
        self.names = names
        self._index = {v: i for i, v in enumerate(names)}
        n = len(names)
        pa = [0] * n
        ch = [0] * n
        sib = [0] * n
        for a, b in directed:
            i, j = self.index(a), self.index(b)
            if i == j:
                raise GraphError(f"self-loop at {names[i]}")
            pa[j] |= 1 << i
            ch[i] |= 1 << j
        for a, b in bidirected:
            i, j = self.index(a), self.index(b)
            if i == j:
                raise GraphError(f"self-loop at {names[i]}")
            sib[i] |= 1 << j
            sib[j] |= 1 << i
        self.pa = tuple(pa)
        self.ch = tuple(ch)
        self.sib = tuple(sib)
        self._an = _closure(self.pa)
        if any(_on_cycle(self.pa, i) for i in range(n)):
            raise GraphError("directed cycle")
        self._de = _closure(self.ch)
        self._hash = None

    # -- naming ---------------------------------------------------------

    def index(self, v) -> int:
        if isinstance(v, numbers.Integral):
            v = int(v)
            if not 0 <= v < len(self.names):
                raise GraphError(f"vertex index {v} out of range")
            return v
        try:
            return self._index[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def mask(self, vs) -> int:
        """Bitmask of a vertex collection (names or indices); ints pass through."""
        if isinstance(vs, numbers.Integral):
            return int(vs)
        if isinstance(vs, str):
            vs = [vs] if vs in self._index else list(vs)
        m = 0
        for v in vs:
            m |= 1 << self.index(v)
        return m

    def labels(self, mask: int) -> list[str]:
        return [self.names[i] for i in bits(mask)]

    def label(self, mask: int) -> str:
        """Compact rendering of a vertex set, e.g. ``abd`` or ``{x1,x2}``."""
        names = self.labels(mask)
        if all(len(v) == 1 for v in self.names):
            return "".join(names)
        return "{" + ",".join(names) + "}"

    # -- structure -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def full(self) -> int:
        return (1 << len(self.names)) - 1

    @property
    def directed(self) -> list[tuple[int, int]]:
        return [(a, b) for b in range(self.n) for a in bits(self.pa[b])]

    @property
    def bidirected(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.n) for b in bits(self.sib[a]) if a < b]

    def is_dag(self) -> bool:
        return not any(self.sib)

    def __eq__(self, other):
        return (isinstance(other, Admg) and self.names == other.names
                and self.pa == other.pa and self.sib == other.sib)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.names, self.pa, self.sib))
        return self._hash

    def __repr__(self):
        edges = [f"{self.names[a]}->{self.names[b]}" for a, b in self.directed]
        edges += [f"{self.names[a]}<->{self.names[b]}" for a, b in self.bidirected]
        return f"Admg([{' '.join(self.names)}] {', '.join(edges)})"


def _closure(rel: Sequence[int]) -> tuple[int, ...]:
    """Reflexive-transitive closure of a per-vertex adjacency relation."""
    n = len(rel)
    out = []
    for i in range(n):
        seen = 1 << i
        frontier = rel[i]
        while frontier & ~seen:
            frontier &= ~seen
            seen |= frontier
            nxt = 0
            for j in bits(frontier):
                nxt |= rel[j]
            frontier = nxt
        out.append(seen)
    return tuple(out)


def _on_cycle(pa: Sequence[int], i: int) -> bool:
    seen = 0
    frontier = pa[i]
    while frontier & ~seen:
        frontier &= ~seen
        if frontier >> i & 1:
            return True
        seen |= frontier
        nxt = 0
        for j in bits(frontier):
            nxt |= pa[j]
        frontier = nxt
    return False


# -- disjunctive set functions -------------------------------------------

def _union(rel: Sequence[int], a: int) -> int:
    out = 0
    for i in bits(a):
        out |= rel[i]
    return out


def parents(g: Admg, a: int) -> int:
    return _union(g.pa, a)


def children(g: Admg, a: int) -> int:
    return _union(g.ch, a)


def siblings(g: Admg, a: int) -> int:
    return _union(g.sib, a)


def ancestors(g: Admg, a: int) -> int:
    return _union(g._an, a)


def descendants(g: Admg, a: int) -> int:
    return _union(g._de, a)


def district_within(g: Admg, a: int, within: int) -> int:
    """District of ``a`` in the induced subgraph ``G[within]`` (a is clipped to it)."""
    seen = a & within
    frontier = seen
    while frontier:
        nxt = _union(g.sib, frontier) & within & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def district(g: Admg, a: int) -> int:
    return district_within(g, a, g.full)


def collider_connected_within(g: Admg, v: int, within: int) -> int:
    """All vertices joined to vertex ``v`` by a collider path inside ``G[within]``.

    A collider path is one on which every non-endpoint is a collider.  Apart
    from direct neighbours, such paths leave ``v`` into an arrowhead, run
    along bidirected edges and end at a parent or sibling of the last
    collider.  The result includes ``v``.
    """
    vb = 1 << v
    rest = within & ~vb
    adj = (g.pa[v] | g.ch[v] | g.sib[v]) & within
    colliders = district_within(g, (g.ch[v] | g.sib[v]) & rest, rest)
    reach = (_union(g.pa, colliders) | _union(g.sib, colliders)) & within
    return vb | adj | colliders | reach


def collider_connected(g: Admg, a: int, within: int | None = None) -> int:
    """Conjunctive collider closure ``co(a)``, optionally inside ``G[within]``."""
    if not a:
        raise GraphError("collider closure of the empty set is undefined")
    if within is None:
        within = g.full
    out = within
    for v in bits(a):
        out &= collider_connected_within(g, v, within)
    return out


# -- set families -----------------------------------------------------------

def is_ancestral_set(g: Admg, a: int) -> bool:
    return ancestors(g, a) == a


def ancestral_sets(g: Admg) -> list[int]:
    return [s for s in range(1 << g.n) if ancestors(g, s) == s]


def is_collider_connecting_set(g: Admg, c: int) -> bool:
    return bool(c) and collider_connected(g, c, c) == c


def barren_subset(g: Admg, b: int) -> int:
    out = 0
    for i in bits(b):
        if not descendants(g, 1 << i) & b & ~(1 << i):
            out |= 1 << i
    return out


def induced_subgraph(g: Admg, a: int) -> Admg:
    keep = list(bits(a))
    return Admg([g.names[i] for i in keep],
                [(g.names[x], g.names[y]) for x, y in g.directed if a >> x & 1 and a >> y & 1],
                [(g.names[x], g.names[y]) for x, y in g.bidirected if a >> x & 1 and a >> y & 1])


def latent_project(g: Admg, latent: int) -> Admg:
    """Latent projection onto ``V \\ latent``, one latent vertex at a time."""
    n = g.n
    pa = list(g.pa)
    sib = list(g.sib)
    alive = g.full
    for l in bits(latent):
        lb = 1 << l
        ch_l = [b for b in bits(alive) if pa[b] & lb]
        for b in ch_l:
            for a in bits(pa[l] & alive):
                if a != b:
                    pa[b] |= 1 << a
            for a in bits((sib[l] | _children_of(pa, l, alive)) & alive & ~lb):
                if a != b:
                    sib[a] |= 1 << b
                    sib[b] |= 1 << a
        alive &= ~lb
        for i in range(n):
            pa[i] &= ~lb
            sib[i] &= ~lb
    keep = list(bits(alive))
    names = [g.names[i] for i in keep]
    directed = [(g.names[a], g.names[b]) for b in keep for a in bits(pa[b])]
    bidirected = [(g.names[a], g.names[b]) for a in keep for b in bits(sib[a]) if a < b]
    return Admg(names, directed, bidirected)


def _children_of(pa: Sequence[int], l: int, alive: int) -> int:
    out = 0
    for b in bits(alive):
        if pa[b] >> l & 1:
            out |= 1 << b
    return out


# -- orders -------------------------------------------------------------------

@dataclass(frozen=True)
class TotalOrder:
    """A permutation of vertex indices, earliest first."""

    sequence: tuple[int, ...]

    def position(self) -> dict[int, int]:
        return {v: k for k, v in enumerate(self.sequence)}

    def preceding(self, b: int) -> int:
        """``pre(b)``: the vertices up to and including ``b``."""
        out = 0
        for v in self.sequence:
            out |= 1 << v
            if v == b:
                return out
        raise GraphError(f"vertex {b} not in order")

    def last_in(self, a: int) -> int:
        """The maximal element of the non-empty set ``a``."""
        for v in reversed(self.sequence):
            if a >> v & 1:
                return v
        raise GraphError("empty set has no maximum")


def consistent_order(g: Admg) -> TotalOrder:
    """Topological order of the directed part, lowest index first on ties."""
    indeg = [popcount(p) for p in g.pa]
    heap = [i for i in range(g.n) if not indeg[i]]
    heapq.heapify(heap)
    seq = []
    while heap:
        v = heapq.heappop(heap)
        seq.append(v)
        for c in bits(g.ch[v]):
            indeg[c] -= 1
            if not indeg[c]:
                heapq.heappush(heap, c)
    return TotalOrder(tuple(seq))


def make_order(g: Admg, vertices: Sequence) -> TotalOrder:
    """Validate a user-supplied order against ``g``."""
    seq = tuple(g.index(v) for v in vertices)
    if sorted(seq) != list(range(g.n)):
        raise GraphError("order must list every vertex exactly once")
    if not is_consistent(g, seq):
        raise GraphError("order is not consistent with the graph")
    return TotalOrder(seq)


def is_consistent(g: Admg, seq: Sequence[int]) -> bool:
    seen = 0
    for v in seq:
        if g._an[v] & ~(1 << v) & ~seen:
            return False
        seen |= 1 << v
    return True


def consistent_orders(g: Admg) -> Iterator[TotalOrder]:
    """Every topological order of ``g``."""
    def rec(prefix, placed):
        if placed == g.full:
            yield TotalOrder(tuple(prefix))
            return
        for v in range(g.n):
            if not placed >> v & 1 and g.pa[v] & ~placed == 0:
                prefix.append(v)
                yield from rec(prefix, placed | 1 << v)
                prefix.pop()
    yield from rec([], 0)


def markov_closure(g: Admg, b: int) -> int:
    return collider_connected_within(g, b, g.full)


def markov_boundary(g: Admg, b: int) -> int:
    return markov_closure(g, b) & ~(1 << b)


# -- directed MAGs ------------------------------------------------------------

def has_inducing_path(g: Admg, a: int, b: int) -> bool:
    """Whether an inducing path joins ``a`` and ``b``.

    Every non-endpoint of an inducing path is a collider and an ancestor of
    ``a`` or ``b``.  Consecutive colliders must share a bidirected edge, so
    the search walks bidirected edges through ancestors of the endpoints.
    """
    ends = (1 << a) | (1 << b)
    allowed = ancestors(g, ends) & ~ends
    if (g.pa[a] | g.ch[a] | g.sib[a]) >> b & 1:
        return True
    start = (g.ch[a] | g.sib[a]) & allowed
    colliders = district_within(g, start, allowed)
    return bool((parents(g, colliders) | siblings(g, colliders)) >> b & 1)


def is_directed_mag(g: Admg) -> bool:
    for v in range(g.n):
        if g.pa[v] & g.sib[v]:
            return False
        if g.sib[v] & (g._an[v] | g._de[v]) & ~(1 << v):
            return False
    for a in range(g.n):
        adj = g.pa[a] | g.ch[a] | g.sib[a]
        for b in range(a + 1, g.n):
            if not adj >> b & 1 and has_inducing_path(g, a, b):
                return False
    return True


# -- text and JSON formats ---------------------------------------------------

def parse_graph(text: str) -> tuple[Admg, TotalOrder | None]:
    """Parse the line-oriented graph format.

    Returns the graph and the declared order, if any.  Errors name the line.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return graph_from_json(json.loads(stripped))
    names = None
    directed, bidirected = [], []
    order = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vertices:"):
            if names is not None:
                raise GraphError(f"line {lineno}: second vertices header")
            names = line[len("vertices:"):].split()
            dup = {v for v in names if names.count(v) > 1}
            if dup:
                raise GraphError(f"line {lineno}: duplicate vertex {sorted(dup)[0]!r}")
            continue
        if names is None:
            raise GraphError(f"line {lineno}: edge before vertices header")
        if line.startswith("order:"):
            order = (lineno, line[len("order:"):].split())
            continue
        parts = line.split()
        if len(parts) != 3 or parts[1] not in ("->", "<->"):
            raise GraphError(f"line {lineno}: malformed line {raw.strip()!r}")
        a, arrow, b = parts
        for v in (a, b):
            if v not in names:
                raise GraphError(f"line {lineno}: unknown vertex {v!r}")
        if a == b:
            raise GraphError(f"line {lineno}: self-loop at {a!r}")
        (directed if arrow == "->" else bidirected).append((a, b))
        try:
            Admg(names, directed)
        except GraphError:
            raise GraphError(f"line {lineno}: directed cycle") from None
    if names is None:
        raise GraphError("missing vertices header")
    g = Admg(names, directed, bidirected)
    if order is None:
        return g, None
    lineno, seq = order
    try:
        return g, make_order(g, seq)
    except GraphError as err:
        raise GraphError(f"line {lineno}: {err}") from None


def format_graph(g: Admg, order: TotalOrder | None = None) -> str:
    lines = ["vertices: " + " ".join(g.names)]
    lines += [f"{g.names[a]} -> {g.names[b]}" for a, b in g.directed]
    lines += [f"{g.names[a]} <-> {g.names[b]}" for a, b in g.bidirected]
    if order is not None:
        lines.append("order: " + " ".join(g.names[v] for v in order.sequence))
    return "\n".join(lines) + "\n"


def graph_to_json(g: Admg, order: TotalOrder | None = None) -> dict:
    out = {
        "vertices": list(g.names),
        "directed": [[g.names[a], g.names[b]] for a, b in g.directed],
        "bidirected": [[g.names[a], g.names[b]] for a, b in g.bidirected],
    }
    if order is not None:
        out["order"] = [g.names[v] for v in order.sequence]
    return out


def graph_from_json(obj: dict) -> tuple[Admg, TotalOrder | None]:
    try:
        g = Admg(obj["vertices"], obj.get("directed", []), obj.get("bidirected", []))
    except KeyError as err:
        raise GraphError(f"missing field {err}") from None
    order = obj.get("order")
    return g, (make_order(g, order) if order else None)
