"""Acceptance checks, one test per criterion.

Each test records a PASS/FAIL line in ``RESULTS``; the conftest prints them at
the end of the session, and running this file directly prints them too.
"""

import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import multivariate_normal

sys.path.insert(0, str(Path(__file__).parent))

from conftest import (CHAIN5_TEXT, CYCLE6_TEXT, G1_TEXT, G2_TEXT, G3_TEXT,  # noqa: E402
                      all_admgs)
from mimset.gaussian import (SampleMoments, bic_mf, dag_bic, factorized_loglik,  # noqa: E402
                             gaussian_dimension, point_log_marginal, random_parameters,
                             simulate, uses_adjusted_form)
from mimset.graph import (Admg, barren_subset, consistent_order, consistent_orders,  # noqa: E402
                          is_ancestral_set, is_collider_connecting_set, parse_graph)
from mimset.heads_tails import (head_factorization, m_imset, n_imset,  # noqa: E402
                                parameterizing_sets, head_partition)
from mimset.imset import (Imset, mobius_down, mobius_up, triple_family,  # noqa: E402
                          zeta_down, zeta_up)
from mimset.inclusion_exclusion import nie, pairs, verify_decomposition  # noqa: E402
from mimset.mec import build_mec_catalog, random_mag_sampler, recovery_experiment  # noqa: E402
from mimset.separation import Triple, m_connecting_exists  # noqa: E402
from oracles import independence_key, m_imset_by_separation, mags_by_brute_force  # noqa: E402

RESULTS: dict[int, str] = {}


def record(k: int, ok: bool, detail: str):
    RESULTS[k] = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def labels(g, sets):
    return [g.label(s) for s in sets]


# -- 1 ---------------------------------------------------------------------------------

SET_PROPERTY_ROWS = [
    ("ab", True, False, "ab"), ("ac", True, True, "c"), ("ad", False, True, "ad"),
    ("bc", False, True, "bc"), ("bd", True, True, "d"), ("cd", False, False, "cd"),
    ("abc", True, True, "bc"), ("abd", True, True, "ad"), ("acd", False, False, "cd"),
    ("bcd", False, False, "cd"), ("abcd", True, False, "cd"),
]


def test_criterion_01_set_property_table():
    start = time.perf_counter()
    g, _ = parse_graph(G2_TEXT)
    bad = []
    for s, anc, ccs, barren in SET_PROPERTY_ROWS:
        mask = g.mask(list(s))
        got = (is_ancestral_set(g, mask), is_collider_connecting_set(g, mask),
               g.label(barren_subset(g, mask)))
        if got != (anc, ccs, barren):
            bad.append(s)
    secs = time.perf_counter() - start
    ok = record(1, not bad and secs < 1, f"{len(SET_PROPERTY_ROWS) - len(bad)}/11 rows match, {secs:.3f}s")
    assert ok, bad


# -- 2 ---------------------------------------------------------------------------------

def partition_text(g, blocks):
    return "{" + ",".join("{" + ",".join(g.label(b)) + "}" for b in blocks) + "}"


def test_criterion_02_heads_tails_tables():
    start = time.perf_counter()
    g1, _ = parse_graph(G1_TEXT)
    g2, _ = parse_graph(G2_TEXT)

    def table(g):
        return {g.label(ht.head): g.label(ht.tail) for ht in parameterizing_sets(g).head_tails}

    g1_table = table(g1) == {"a": "", "b": "a", "c": "b", "d": "abc"}
    g2_table = table(g2) == {"a": "", "b": "", "c": "a", "d": "b", "ad": "b", "bc": "a"}
    p1 = head_partition(g1, g1.full)
    p2 = head_partition(g2, g2.full)
    p3 = head_partition(g2, g2.mask(["a", "b"]))
    texts = [partition_text(g1, p1), partition_text(g2, p2), partition_text(g2, p3)]
    parts = texts == ["{{d},{c},{b},{a}}", "{{a,d},{b,c}}", "{{a},{b}}"]
    facs = sorted((g2.label(h.head), g2.label(h.tail)) for h in head_factorization(g2, g2.full)) == \
        [("ad", "b"), ("bc", "a")]
    secs = time.perf_counter() - start
    ok = record(2, g1_table and g2_table and parts and facs and secs < 1,
                f"G1 table={g1_table} G2 table={g2_table} partitions={' '.join(texts)}, {secs:.3f}s")
    assert ok


# -- 3 ---------------------------------------------------------------------------------

PAIRS_STEPS = [  # (vertices of the ancestral set, b, N list, M list)
    ("abcde", "c", ["abce", "acde"], ["abc", "cde"]),
    ("abde", "b", ["abde"], ["ab"]),
    ("ade", "d", ["ade"], ["de"]),
    ("ae", "a", ["ae"], ["a"]),
    ("e", "e", [], []),
]
INCLUSION = [("c", "e", "ab"), ("c", "a", "de"), ("c", "ae", ""), ("b", "de", "a"),
             ("d", "a", "e"), ("a", "e", "")]
EXCLUSION = [("c", "e", "a"), ("c", "a", "e")]


def test_criterion_03_worked_example():
    start = time.perf_counter()
    g, order = parse_graph(G3_TEXT)
    steps_ok = True
    for within, b, ns, ms in PAIRS_STEPS:
        p = pairs(g, b, within=g.mask(list(within)))
        steps_ok &= labels(g, p.ns) == ns and labels(g, p.ms) == ms
    res = nie(g, order)

    def fam(specs):
        total = Imset(g.names)
        for a, b, c in specs:
            total = total + triple_family(g.names, Triple(g.mask(list(a)), g.mask(list(b)), g.mask(list(c))))
        return total

    inc_terms = [(t.render(g)) for t in res.inclusion_cert.triples()]
    exc_terms = [(t.render(g)) for t in res.exclusion_cert.triples()]
    terms_ok = inc_terms == [f"<{a},{b}|{c}>" for a, b, c in INCLUSION] and \
        exc_terms == [f"<{a},{b}|{c}>" for a, b, c in EXCLUSION]
    imsets_ok = res.inclusion == fam(INCLUSION) and res.exclusion == fam(EXCLUSION)
    pointwise = res.difference() == n_imset(g)
    secs = time.perf_counter() - start
    ok = record(3, steps_ok and terms_ok and imsets_ok and pointwise and secs < 1,
                f"pairs={steps_ok} terms={terms_ok} imsets={imsets_ok} n=i-e:{pointwise}, {secs:.3f}s")
    assert ok


# -- 4 ---------------------------------------------------------------------------------

def test_criterion_04_cycle6_marginals():
    start = time.perf_counter()
    g, _ = parse_graph(CYCLE6_TEXT)
    n = n_imset(g)
    sizes = [sum(int(n[s]) for s in range(64) if s.bit_count() == k) for k in range(6, 0, -1)]
    secs = time.perf_counter() - start
    ok = record(4, sizes == [0, 0, 9, 14, 9, 0] and secs < 1, f"marginals {tuple(sizes)}, {secs:.3f}s")
    assert ok


# -- 5 ---------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_05_oracle_sweep():
    start = time.perf_counter()
    graphs = orders = triples = 0
    failures = []
    for n in range(1, 5):
        for g in all_admgs(n):
            graphs += 1
            if not np.array_equal(m_imset(g).values, m_imset_by_separation(g, m_connecting_exists)):
                failures.append(f"m_imset {g}")
            for order in consistent_orders(g):
                orders += 1
                rep = verify_decomposition(g, order, closure_check=False)
                triples += rep.checked_triples
                if not rep.ok:
                    failures.append(f"{g} {order}: {rep.failures[:2]}")
    secs = time.perf_counter() - start
    ok = record(5, not failures and secs <= 600,
                f"{graphs} graphs, {orders} orders, {triples} certificate triples, "
                f"{len(failures)} failures, {secs:.0f}s")
    assert ok, failures[:5]


# -- 6 ---------------------------------------------------------------------------------

def relation_matrix(n: int, up: bool, signed: bool) -> np.ndarray:
    """Dense matrix of a subset-lattice transform, built from the definition."""
    size = 1 << n
    m = np.zeros((size, size), dtype=np.int64)
    for a in range(size):
        for b in range(size):
            if ((a & b) == a) if up else ((a & b) == b):
                m[a, b] = -1 if signed and (a ^ b).bit_count() % 2 else 1
    return m


def test_criterion_06_transforms():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    mats = {(n, up, sg): relation_matrix(n, up, sg)
            for n in range(7) for up in (False, True) for sg in (False, True)}
    fns = {(False, False): zeta_down, (False, True): mobius_down,
           (True, False): zeta_up, (True, True): mobius_up}
    bad = 0
    for _ in range(1000):
        n = int(rng.integers(0, 7))
        u = Imset("abcdef"[:n], rng.integers(-10**6, 10**6, size=1 << n))
        ok = mobius_down(zeta_down(u)) == u and zeta_down(mobius_down(u)) == u and \
            mobius_up(zeta_up(u)) == u and zeta_up(mobius_up(u)) == u
        for key, fn in fns.items():
            ok &= np.array_equal(fn(u).values, mats[(n, *key)] @ u.values)
        bad += not ok
    secs = time.perf_counter() - start
    ok = record(6, bad == 0 and secs < 10, f"{1000 - bad}/1000 imsets exact, {secs:.2f}s")
    assert ok


# -- 7 ---------------------------------------------------------------------------------

def test_criterion_07_numeric_factorization():
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = {}
    branches = {}
    for name, text in [("G1", G1_TEXT), ("G2", G2_TEXT), ("G3", G3_TEXT), ("C6", CYCLE6_TEXT)]:
        g, order = parse_graph(text)
        order = order or consistent_order(g)
        sigma = random_parameters(g, rng).sigma
        dist = multivariate_normal(np.zeros(g.n), sigma)
        branches[name] = uses_adjusted_form(g)
        err = 0.0
        for x in rng.multivariate_normal(np.zeros(g.n), sigma, size=100):
            err = max(err, abs(factorized_loglik(g, order, point_log_marginal(sigma, x)) - dist.logpdf(x)))
        worst[name] = err
    secs = time.perf_counter() - start
    right_branch = branches == {"G1": False, "G2": False, "G3": False, "C6": True}
    ok = record(7, max(worst.values()) <= 1e-8 and right_branch and secs < 10,
                "max |delta| " + " ".join(f"{k}={v:.1e}" for k, v in worst.items()) + f", {secs:.2f}s")
    assert ok


# -- 8 ---------------------------------------------------------------------------------

def test_criterion_08_dag_reduction():
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(200):
        p = int(rng.integers(1, 6))
        perm = rng.permutation(p)
        edges = [(int(perm[i]), int(perm[j])) for i, j in itertools.combinations(range(p), 2)
                 if rng.random() < 0.5]
        d = Admg("abcde"[:p], edges)
        n = int(rng.integers(20, 2000))
        x = rng.standard_normal((n, p)) @ rng.standard_normal((p, p)) + rng.standard_normal(p)
        mom = SampleMoments.from_data(x)
        worst = max(worst, abs(bic_mf(d, consistent_order(d), mom).score - dag_bic(d, mom).score))
    secs = time.perf_counter() - start
    ok = record(8, worst <= 1e-8 and secs < 30, f"max |delta| {worst:.1e} over 200 pairs, {secs:.2f}s")
    assert ok


# -- 9 ---------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_09_mec_catalog():
    c2 = len(build_mec_catalog(2))
    c3 = len(build_mec_catalog(3))
    oracle3 = len({independence_key(g) for g in mags_by_brute_force(3)})
    start = time.perf_counter()
    c5 = len(build_mec_catalog(5))
    secs = time.perf_counter() - start
    ok = record(9, c2 == 2 and c3 == oracle3 and c5 == 24259 and secs <= 300,
                f"p=2: {c2}, p=3: {c3} (oracle {oracle3}), p=5: {c5} in {secs:.1f}s")
    assert ok


# -- 10 --------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_10_scaled_recovery():
    start = time.perf_counter()
    chain, _ = parse_graph(CHAIN5_TEXT)
    cat = build_mec_catalog(5, chain.names)
    runs = [("chain n=50000", recovery_experiment(cat, chain, 50_000, 50, seed=0), 0.90),
            ("chain n=500", recovery_experiment(cat, chain, 500, 50, seed=0), 0.35),
            ("random |E|<=5 n=50000",
             recovery_experiment(cat, random_mag_sampler(cat, (0, 5)), 50_000, 50, seed=0), 0.85)]
    slowest = max(max(r.rank_seconds) for _, r, _ in runs)
    secs = time.perf_counter() - start
    ok = all(r.top1() >= bar for _, r, bar in runs) and slowest <= 30 and secs <= 7200
    record(10, ok, "; ".join(f"{name}: top1 {r.top1():.2f} (>= {bar})" for name, r, bar in runs)
           + f"; slowest ranking {slowest:.2f}s; total {secs:.0f}s")
    assert ok


# -- 11 --------------------------------------------------------------------------------

def test_criterion_11_consistency_trend():
    start = time.perf_counter()
    # a -> b <-> c <- d, and a supermodel adding a -> c and b <-> d
    truth = Admg("abcd", [(0, 1), (3, 2)], [(1, 2)])
    bigger = Admg("abcd", [(0, 1), (3, 2), (0, 2)], [(1, 2), (1, 3)])
    ddim = gaussian_dimension(bigger) - gaussian_dimension(truth)
    n = 100_000
    ratios = []
    for seed in range(20):
        x, _ = simulate(truth, n, seed)
        mom = SampleMoments.from_data(x)
        gap = bic_mf(truth, None, mom).score - bic_mf(bigger, None, mom).score
        ratios.append(gap / math.log(n))
    mean = float(np.mean(ratios))
    rel = abs(mean - ddim / 2) / (ddim / 2)
    secs = time.perf_counter() - start
    ok = record(11, ddim > 0 and rel <= 0.20 and secs < 300,
                f"mean gap/log n {mean:.3f} vs ddim/2 {ddim / 2} (off by {100 * rel:.1f}%), {secs:.1f}s")
    assert ok


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except Exception:  # noqa: BLE001 - reported as FAIL below
                pass
    for k in sorted(RESULTS):
        print(RESULTS[k])
