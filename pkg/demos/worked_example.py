"""Walk through the inclusion-exclusion decomposition of a five-vertex ADMG."""

from mimset import n_imset, nie, parameterizing_sets, parse_graph
from mimset.inclusion_exclusion import pairs

TEXT = """
vertices: a b c d e
a -> b
e -> d
b <-> c
c <-> d
order: e a d b c
"""

g, order = parse_graph(TEXT)

print("heads and tails")
for ht in parameterizing_sets(g).head_tails:
    print(f"  H={g.label(ht.head):<4} T={g.label(ht.tail) or '-'}")

# peel off the last vertex of the order, one ancestral set at a time
within = g.full
for b in reversed(order.sequence):
    p = pairs(g, b, within=within)
    print(f"pairs on {g.label(within)} at {g.names[b]}: "
          f"N={[g.label(s) for s in p.ns]} M={[g.label(s) for s in p.ms]}")
    within &= ~(1 << b)

res = nie(g, order)
print("inclusion terms:", " ".join(t.render(g) for t in res.inclusion_cert.triples()))
print("exclusion terms:", " ".join(t.render(g) for t in res.exclusion_cert.triples()))
print("n = i - e:", res.difference() == n_imset(g))
