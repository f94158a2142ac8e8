"""Markov equivalence classes of directed MAGs and exhaustive BIC_MF ranking.

Graphs on ``p`` labeled vertices are encoded as base-4 integers with one
digit per vertex pair ``(i, j), i < j``, first pair most significant:
0 none, 1 ``i -> j``, 2 ``j -> i``, 3 ``i <-> j``.  The batch kernels below
work on whole arrays of such codes at once, with vertex sets as bitmasks.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .gaussian import LOG_2PI, NumericalError, SampleMoments, ScoreResult, simulate
from .graph import Admg, GraphError, bits, consistent_order
from .heads_tails import parameterizing_sets

MAX_P = 5
DEFAULT_NAMES = "abcdefgh"


def vertex_pairs(p: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(p), 2))


def decode(code: int, p: int, names=None) -> Admg:
    names = names or DEFAULT_NAMES[:p]
    prs = vertex_pairs(p)
    directed, bidirected = [], []
    for k, (i, j) in enumerate(prs):
        state = (code >> 2 * (len(prs) - 1 - k)) & 3
        if state == 1:
            directed.append((i, j))
        elif state == 2:
            directed.append((j, i))
        elif state == 3:
            bidirected.append((i, j))
    return Admg(names, directed, bidirected)


def encode(g: Admg) -> int:
    prs = vertex_pairs(g.n)
    code = 0
    for i, j in prs:
        if (g.pa[j] >> i & 1) + (g.pa[i] >> j & 1) + (g.sib[i] >> j & 1) > 1:
            raise GraphError("a pair carries more than one edge")
        state = 1 if g.pa[j] >> i & 1 else 2 if g.pa[i] >> j & 1 else 3 if g.sib[i] >> j & 1 else 0
        code = code * 4 + state
    return code


# -- batch kernels -------------------------------------------------------------

def _gather_or(rel, x, p):
    """``OR_{u in x} rel[u]`` elementwise over a batch."""
    out = np.zeros_like(x)
    for u in range(p):
        out |= np.where((x >> u) & 1 == 1, rel[u], 0)
    return out


class _Batch:
    """Adjacency bitmasks for an array of graph codes."""

    def __init__(self, codes: np.ndarray, p: int):
        self.p = p
        self.codes = codes
        prs = vertex_pairs(p)
        pa = [np.zeros(len(codes), dtype=np.int64) for _ in range(p)]
        sib = [np.zeros(len(codes), dtype=np.int64) for _ in range(p)]
        for k, (i, j) in enumerate(prs):
            state = (codes >> 2 * (len(prs) - 1 - k)) & 3
            pa[j] |= np.where(state == 1, 1 << i, 0)
            pa[i] |= np.where(state == 2, 1 << j, 0)
            sib[i] |= np.where(state == 3, 1 << j, 0)
            sib[j] |= np.where(state == 3, 1 << i, 0)
        self.pa, self.sib = pa, sib
        an = [pa[v] | (1 << v) for v in range(p)]
        for _ in range(p):
            an = [_gather_or(an, an[v], p) for v in range(p)]
        self.an = an
        self.ch = [sum(np.where((pa[v] >> u) & 1 == 1, 1 << v, 0) for v in range(p)) for u in range(p)]

    def subset(self, keep: np.ndarray) -> "_Batch":
        out = object.__new__(_Batch)
        out.p = self.p
        out.codes = self.codes[keep]
        out.pa = [a[keep] for a in self.pa]
        out.sib = [a[keep] for a in self.sib]
        out.an = [a[keep] for a in self.an]
        out.ch = [a[keep] for a in self.ch]
        return out

    def acyclic(self) -> np.ndarray:
        ok = np.ones(len(self.codes), dtype=bool)
        for v in range(self.p):
            strict = _gather_or(self.an, self.pa[v], self.p)
            ok &= (strict >> v) & 1 == 0
        return ok

    def ancestral(self) -> np.ndarray:
        ok = np.ones(len(self.codes), dtype=bool)
        for v in range(self.p):
            strict = self.an[v] & ~(1 << v)
            ok &= (self.sib[v] & strict) == 0
        return ok

    def district_within(self, start, within):
        x = start & within
        for _ in range(self.p):
            x = x | (_gather_or(self.sib, x, self.p) & within)
        return x

    def maximal(self) -> np.ndarray:
        p = self.p
        ok = np.ones(len(self.codes), dtype=bool)
        for a, b in vertex_pairs(p):
            ends = (1 << a) | (1 << b)
            adjacent = ((self.pa[a] | self.ch[a] | self.sib[a]) >> b) & 1 == 1
            allowed = (self.an[a] | self.an[b]) & ~ends
            start = (self.ch[a] | self.sib[a]) & allowed
            coll = self.district_within(start, allowed)
            reach = _gather_or(self.pa, coll, p) | _gather_or(self.sib, coll, p)
            ok &= adjacent | ((reach >> b) & 1 == 0)
        return ok

    def collider_connected(self, v: int, within):
        vb = 1 << v
        rest = within & ~vb
        adj = (self.pa[v] | self.ch[v] | self.sib[v]) & within
        coll = self.district_within((self.ch[v] | self.sib[v]) & rest, rest)
        reach = (_gather_or(self.pa, coll, self.p) | _gather_or(self.sib, coll, self.p)) & within
        return vb | adj | coll | reach

    def param_keys(self) -> np.ndarray:
        """Bit ``S`` of each key is set iff ``S`` is parameterizing in that graph."""
        p = self.p
        keys = np.zeros(len(self.codes), dtype=np.int64)
        for s in range(1, 1 << p):
            anc = _gather_or(self.an, np.full(len(self.codes), s, dtype=np.int64), p)
            members = list(bits(s))
            co = np.full(len(self.codes), (1 << p) - 1, dtype=np.int64)
            for v in members:
                above = np.zeros(len(self.codes), dtype=bool)
                for u in members:
                    if u != v:
                        above |= (self.an[u] >> v) & 1 == 1
                co &= np.where(above, (1 << p) - 1, self.collider_connected(v, anc))
            keys |= np.where((s & ~co) == 0, np.int64(1) << s, 0)
        return keys


def _all_mag_batch(p: int) -> _Batch:
    if not 1 <= p <= MAX_P:
        raise GraphError(f"enumeration supports 1 to {MAX_P} vertices")
    codes = np.arange(4 ** len(vertex_pairs(p)), dtype=np.int64)
    batch = _Batch(codes, p)
    batch = batch.subset(batch.acyclic())
    batch = batch.subset(batch.ancestral())
    return batch.subset(batch.maximal())


def directed_mag_codes(p: int) -> np.ndarray:
    return _all_mag_batch(p).codes


def enumerate_directed_mags(p: int, names=None):
    """Yield every directed MAG on ``p`` labeled vertices in code order."""
    for code in directed_mag_codes(p):
        yield decode(int(code), p, names)


def param_key(g: Admg) -> int:
    """The parameterizing-set family of ``g`` as a bitmask over subsets."""
    key = 0
    for s in parameterizing_sets(g).sets:
        key |= 1 << s
    return key


def markov_equivalent(g1: Admg, g2: Admg) -> bool:
    if g1.names != g2.names:
        raise GraphError("graphs must share a vertex set")
    return param_key(g1) == param_key(g2)


# -- catalog -----------------------------------------------------------------

@dataclass
class MecCatalog:
    """Classes of directed MAGs with equal parameterizing-set families.

    Class ids follow the codes of the representatives, which are the
    smallest codes in each class.
    """

    p: int
    names: tuple[str, ...]
    keys: np.ndarray
    rep_codes: np.ndarray
    counts: np.ndarray
    mag_codes: np.ndarray
    mag_class: np.ndarray
    index: dict = field(repr=False, default_factory=dict)
    _plan: "ScoringPlan | None" = field(default=None, repr=False)

    def __len__(self):
        return len(self.keys)

    def representative(self, cid: int) -> Admg:
        return decode(int(self.rep_codes[cid]), self.p, self.names)

    def class_of(self, g: Admg) -> int:
        try:
            return self.index[param_key(g)]
        except KeyError:
            raise GraphError("graph is not equivalent to any catalogued MAG") from None

    def members(self, cid: int) -> np.ndarray:
        return self.mag_codes[self.mag_class == cid]

    @property
    def plan(self) -> "ScoringPlan":
        if self._plan is None:
            self._plan = ScoringPlan.build(self)
        return self._plan


def build_mec_catalog(p: int, names=None) -> MecCatalog:
    names = tuple(names or DEFAULT_NAMES[:p])
    batch = _all_mag_batch(p)
    keys = batch.param_keys()
    uniq, first, inverse, counts = np.unique(keys, return_index=True, return_inverse=True,
                                             return_counts=True)
    order = np.argsort(first, kind="stable")
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    cat = MecCatalog(p, names, uniq[order], batch.codes[first[order]], counts[order],
                     batch.codes, relabel[inverse.ravel()])
    cat.index = {int(k): i for i, k in enumerate(cat.keys)}
    return cat


# -- batched scoring ---------------------------------------------------------

@dataclass
class ScoringPlan:
    """Per-class quantities that do not depend on data.

    ``coef[c, Y]`` is the weight of the marginal log-likelihood of ``Y`` in
    the class score, ``dag_id[c]`` points into ``dags`` (dominating-DAG
    parent masks), ``dims[c]`` is the Gaussian dimension.
    """

    p: int
    coef: np.ndarray
    dims: np.ndarray
    dags: np.ndarray
    dag_id: np.ndarray

    @classmethod
    def build(cls, cat: MecCatalog) -> "ScoringPlan":
        p = cat.p
        size = 1 << p
        table = ((cat.keys[:, None] >> np.arange(size)) & 1).astype(np.int64)
        sizes = np.array([s.bit_count() for s in range(size)])
        if (table[:, sizes > 5]).any():
            raise GraphError("batched scoring covers classes whose parameterizing sets have at most 5 members")
        dims = p + table[:, (sizes == 1) | (sizes == 2)].sum(axis=1)
        coef = table.copy()
        for i in range(p):
            view = coef.reshape(len(coef), -1, 2, 1 << i)
            view[:, :, 0, :] -= view[:, :, 1, :]
        parents = np.zeros((len(cat), p), dtype=np.int64)
        for cid in range(len(cat)):
            g = cat.representative(cid)
            parents[cid] = _dominating_from_table(table[cid], consistent_order(g).sequence)
        dags, dag_id = np.unique(parents, axis=0, return_inverse=True)
        return cls(p, coef, dims, dags, dag_id.ravel())


def _dominating_from_table(row: np.ndarray, seq) -> list[int]:
    """Largest parameterizing set containing ``b`` within ``pre(b)``, minus ``b``."""
    out = [0] * len(seq)
    pre = 0
    for b in seq:
        pre |= 1 << b
        best = 1 << b
        sub = pre
        while sub:
            if sub >> b & 1 and row[sub] and sub.bit_count() > best.bit_count():
                best = sub
            sub = (sub - 1) & pre
        out[b] = best & ~(1 << b)
    return out


def _batched_sigma(dags: np.ndarray, S: np.ndarray) -> np.ndarray:
    p = S.shape[0]
    coef = {}
    for b in range(p):
        for pa in np.unique(dags[:, b]):
            idx = list(bits(int(pa)))
            if idx:
                beta = np.linalg.solve(S[np.ix_(idx, idx)], S[idx, b])
                resid = S[b, b] - S[b, idx] @ beta
            else:
                beta, resid = np.zeros(0), S[b, b]
            if not resid > 0:
                raise NumericalError(f"non-positive residual variance at vertex {b}")
            coef[b, int(pa)] = (idx, beta, resid)
    u = len(dags)
    B = np.zeros((u, p, p))
    omega = np.zeros((u, p, p))
    for b in range(p):
        for pa in np.unique(dags[:, b]):
            rows = dags[:, b] == pa
            idx, beta, resid = coef[b, int(pa)]
            if idx:
                B[np.ix_(rows, [b], idx)] = beta
            omega[rows, b, b] = resid
    inv = np.linalg.inv(np.eye(p)[None] - B)
    sig = inv @ omega @ np.transpose(inv, (0, 2, 1))
    return (sig + np.transpose(sig, (0, 2, 1))) / 2


def _batched_marginals(sig: np.ndarray, moments: SampleMoments) -> np.ndarray:
    """``L[d, Y]`` for every fitted covariance ``d`` and subset ``Y``."""
    p = sig.shape[1]
    out = np.zeros((len(sig), 1 << p))
    for y in range(1, 1 << p):
        idx = list(bits(y))
        block = sig[:, idx][:, :, idx]
        sign, logdet = np.linalg.slogdet(block)
        if np.any(sign <= 0):
            raise NumericalError(f"fitted covariance not positive definite on subset {idx}")
        s_y = moments.S[np.ix_(idx, idx)]
        trace = np.trace(np.linalg.solve(block, np.broadcast_to(s_y, block.shape)), axis1=1, axis2=2)
        out[:, y] = -0.5 * moments.n * (len(idx) * LOG_2PI + logdet + trace)
    return out


@dataclass
class RankReport:
    scores: np.ndarray
    logliks: np.ndarray
    dims: np.ndarray
    ranking: np.ndarray
    rank_of_truth: int | None
    ties_with_truth: int
    seconds: float

    def score_result(self, cid: int, n: int) -> ScoreResult:
        pen = 0.5 * int(self.dims[cid]) * math.log(n)
        return ScoreResult(float(self.scores[cid]), float(self.logliks[cid]), int(self.dims[cid]), pen)


def score_classes(cat: MecCatalog, moments: SampleMoments) -> tuple[np.ndarray, np.ndarray]:
    """BIC_MF of every class representative; returns ``(scores, logliks)``."""
    plan = cat.plan
    sig = _batched_sigma(plan.dags, moments.S)
    marg = _batched_marginals(sig, moments)
    logliks = np.einsum("cy,cy->c", plan.coef, marg[plan.dag_id])
    return logliks - 0.5 * plan.dims * math.log(moments.n), logliks


def rank_models(cat: MecCatalog, moments: SampleMoments, truth: int | None = None,
                tie_tol: float = 1e-9) -> RankReport:
    """Score every class and sort by descending score, ties by class id."""
    start = time.perf_counter()
    scores, logliks = score_classes(cat, moments)
    ranking = np.lexsort((np.arange(len(scores)), -scores))
    rank = ties = None
    if truth is not None:
        rank = int(np.flatnonzero(ranking == truth)[0]) + 1
        gap = np.abs(scores - scores[truth])
        ties = int(np.sum(gap <= tie_tol * max(1.0, abs(scores[truth])))) - 1
    return RankReport(scores, logliks, cat.plan.dims, ranking, rank, ties or 0,
                      time.perf_counter() - start)


# -- recovery experiments ------------------------------------------------------

@dataclass
class RecoveryResult:
    n: int
    reps: int
    ranks: list[int]
    ties: list[int]
    seconds: float
    seed: int
    rank_seconds: list[float] = field(default_factory=list)

    def top1(self) -> float:
        return sum(r == 1 for r in self.ranks) / len(self.ranks) if self.ranks else float("nan")

    def mean_rank(self) -> float:
        return float(np.mean(self.ranks)) if self.ranks else float("nan")

    def histogram(self) -> list[tuple[int, int]]:
        counts: dict[int, int] = {}
        for r in self.ranks:
            counts[r] = counts.get(r, 0) + 1
        return sorted(counts.items())


def random_mag_sampler(cat: MecCatalog, edge_range: tuple[int, int]):
    """Uniform draws among catalogued MAGs whose edge count lies in ``edge_range``."""
    lo, hi = edge_range
    digits = np.zeros(len(cat.mag_codes), dtype=np.int64)
    codes = cat.mag_codes.copy()
    for _ in range(len(vertex_pairs(cat.p))):
        digits += (codes & 3) != 0
        codes >>= 2
    pool = cat.mag_codes[(digits >= lo) & (digits <= hi)]
    if not len(pool):
        raise GraphError("no MAG has an edge count in the requested range")

    def draw(rng: np.random.Generator) -> Admg:
        return decode(int(rng.choice(pool)), cat.p, cat.names)

    return draw


def recovery_experiment(cat: MecCatalog, generator, n: int, reps: int, seed: int = 0) -> RecoveryResult:
    """Repeatedly simulate, rank, and record the rank of the generating class.

    ``generator`` is an :class:`Admg` or a callable drawing one from an RNG.
    Repetition ``r`` uses the generator ``default_rng([seed, r])``.
    """
    start = time.perf_counter()
    ranks, ties, timings = [], [], []
    for r in range(reps):
        rng = np.random.default_rng([seed, r])
        g = generator(rng) if callable(generator) else generator
        x, _ = simulate(g, n, rng)
        rep = rank_models(cat, SampleMoments.from_data(x), truth=cat.class_of(g))
        ranks.append(rep.rank_of_truth)
        ties.append(rep.ties_with_truth)
        timings.append(rep.seconds)
    return RecoveryResult(n, reps, ranks, ties, time.perf_counter() - start, seed, timings)
