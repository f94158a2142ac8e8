"""Simulate from a bidirected chain and see where its class lands in the BIC_MF ranking."""

import sys

from mimset import Admg, SampleMoments, build_mec_catalog, rank_models, simulate
from mimset.graph import format_graph

n = int(sys.argv[1]) if len(sys.argv) > 1 else 5000
truth = Admg("abcd", [], [(0, 1), (1, 2), (2, 3)])
cat = build_mec_catalog(4)
print(f"{len(cat)} equivalence classes of directed MAGs on 4 vertices")

x, _ = simulate(truth, n, seed=1)
rep = rank_models(cat, SampleMoments.from_data(x), truth=cat.class_of(truth))
print(f"n={n}: true class ranked {rep.rank_of_truth} ({rep.seconds * 1000:.1f} ms)")
for pos, cid in enumerate(rep.ranking[:5], start=1):
    graph = format_graph(cat.representative(cid)).strip().splitlines()[1:]
    print(f"  {pos}. score {rep.scores[cid]:.2f}  {', '.join(graph) or 'no edges'}")
