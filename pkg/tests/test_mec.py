import itertools
from collections import defaultdict

import numpy as np
import pytest

from mimset.gaussian import SampleMoments, bic_mf, simulate
from mimset.graph import Admg, GraphError, consistent_order, is_directed_mag
from mimset.mec import (build_mec_catalog, decode, directed_mag_codes, encode,
                        enumerate_directed_mags, markov_equivalent, param_key, random_mag_sampler,
                        rank_models, recovery_experiment, vertex_pairs)
from oracles import independence_key, mags_by_brute_force


@pytest.fixture(scope="module")
def cat3():
    return build_mec_catalog(3)


@pytest.fixture(scope="module")
def cat4():
    return build_mec_catalog(4)


def test_small_mag_counts():
    assert len(directed_mag_codes(1)) == 1
    assert [str(g) for g in enumerate_directed_mags(2)] == \
        [str(decode(c, 2)) for c in range(4)]


def test_three_vertex_mags_match_brute_force():
    ours = {str(g) for g in enumerate_directed_mags(3)}
    theirs = {str(g) for g in mags_by_brute_force(3)}
    assert ours == theirs and len(ours) == 56


def test_four_vertex_mags_pass_the_validator(cat4):
    codes = set(int(c) for c in cat4.mag_codes)
    for code in range(4 ** 6):
        try:
            g = decode(code, 4)
        except GraphError:
            continue
        assert (code in codes) == is_directed_mag(g)


def test_encode_decode_round_trip():
    for code in range(4 ** 3):
        try:
            g = decode(code, 3)
        except GraphError:
            continue
        assert encode(g) == code
    with pytest.raises(GraphError):
        encode(Admg("ab", [(0, 1)], [(0, 1)]))


def test_markov_equivalence_examples():
    assert markov_equivalent(Admg("ab", [(0, 1)]), Admg("ab", [], [(0, 1)]))
    assert not markov_equivalent(Admg("abc", [(0, 1), (1, 2)]), Admg("abc", [(0, 1), (2, 1)]))
    g = Admg("abc", [(0, 1)], [(1, 2)])
    assert markov_equivalent(g, g)
    with pytest.raises(GraphError):
        markov_equivalent(Admg("ab"), Admg("xy"))


def test_catalog_sizes(cat3):
    assert len(build_mec_catalog(1)) == 1
    assert len(build_mec_catalog(2)) == 2
    assert len(cat3) == 11
    assert int(cat3.counts.sum()) == 56
    with pytest.raises(GraphError):
        build_mec_catalog(6)


def test_catalog_matches_independence_models(cat3):
    groups = defaultdict(set)
    for g in mags_by_brute_force(3):
        groups[independence_key(g)].add(encode(g))
    ours = [set(int(c) for c in cat3.members(cid)) for cid in range(len(cat3))]
    assert sorted(map(sorted, ours)) == sorted(map(sorted, groups.values()))


def test_batch_keys_match_single_graph_keys(cat4):
    for k, code in enumerate(cat4.mag_codes):
        if k % 5:
            continue
        g = decode(int(code), 4)
        assert cat4.keys[cat4.mag_class[k]] == param_key(g)


def test_representatives_are_minimal_codes(cat4):
    for cid in range(len(cat4)):
        members = cat4.members(cid)
        assert cat4.rep_codes[cid] == members.min()
        assert cat4.class_of(cat4.representative(cid)) == cid
    assert list(cat4.rep_codes) == sorted(cat4.rep_codes)


def test_batched_scores_match_bic_mf(cat4):
    g = Admg("abcd", [(0, 1), (2, 3)], [(1, 2)])
    x, _ = simulate(g, 2000, seed=4)
    mom = SampleMoments.from_data(x)
    rep = rank_models(cat4, mom, cat4.class_of(g))
    for cid in range(0, len(cat4), 7):
        h = cat4.representative(cid)
        direct = bic_mf(h, consistent_order(h), mom)
        assert rep.scores[cid] == pytest.approx(direct.score, rel=1e-10)
        assert rep.dims[cid] == direct.dimension
    assert sorted(rep.ranking) == list(range(len(cat4)))
    assert 1 <= rep.rank_of_truth <= len(cat4)


def test_edgeless_population_ranks_empty_class_first(cat3):
    mom = SampleMoments.from_covariance(np.diag([1.0, 2.0, 0.5]), 50_000)
    empty = cat3.class_of(Admg("abc"))
    assert rank_models(cat3, mom, empty).rank_of_truth == 1


def test_correlated_pair_ranks_saturated_first():
    cat = build_mec_catalog(2)
    mom = SampleMoments.from_covariance(np.array([[1.0, 0.8], [0.8, 1.0]]), 1000)
    full = cat.class_of(Admg("ab", [(0, 1)]))
    assert rank_models(cat, mom, full).rank_of_truth == 1


def test_ties_are_broken_by_class_id():
    cat = build_mec_catalog(2)
    mom = SampleMoments.from_covariance(np.eye(2), 10)
    rep = rank_models(cat, mom)
    assert rep.rank_of_truth is None
    assert len(rep.ranking) == 2


def test_random_sampler_respects_edge_range(cat4):
    draw = random_mag_sampler(cat4, (2, 3))
    rng = np.random.default_rng(0)
    for _ in range(50):
        g = draw(rng)
        assert 2 <= len(g.directed) + len(g.bidirected) <= 3
    with pytest.raises(GraphError):
        random_mag_sampler(cat4, (9, 10))


def test_recovery_experiment_is_seeded(cat3):
    chain = Admg("abc", [], [(0, 1), (1, 2)])
    a = recovery_experiment(cat3, chain, 2000, 3, seed=5)
    b = recovery_experiment(cat3, chain, 2000, 3, seed=5)
    assert a.ranks == b.ranks
    empty = recovery_experiment(cat3, chain, 2000, 0)
    assert empty.histogram() == [] and empty.ranks == []


def test_vertex_pairs_order():
    assert vertex_pairs(3) == list(itertools.combinations(range(3), 2))
