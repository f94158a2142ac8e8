"""Gaussian simulation, dominating-DAG fits and the BIC_MF score.

Every marginal log-likelihood sum is evaluated from a fitted covariance and
the sample covariance through the trace identity, so scoring never touches
individual rows of data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import (Admg, GraphError, TotalOrder, bits, collider_connected, consistent_order,
                    is_directed_mag, subsets)
from .heads_tails import parameterizing_sets

LOG_2PI = math.log(2.0 * math.pi)
PD_ATTEMPTS = 10_000


class NumericalError(ArithmeticError):
    """A covariance block that should be positive definite is not."""


@dataclass
class GaussianModel:
    B: np.ndarray
    omega: np.ndarray
    sigma: np.ndarray


@dataclass
class SampleMoments:
    """Sample size, MLE covariance (divisor n) and mean."""

    n: int
    S: np.ndarray
    mean: np.ndarray

    @classmethod
    def from_data(cls, x: np.ndarray) -> "SampleMoments":
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("data must be a non-empty 2-d array")
        mean = x.mean(axis=0)
        xc = x - mean
        return cls(x.shape[0], xc.T @ xc / x.shape[0], mean)

    @classmethod
    def from_covariance(cls, s: np.ndarray, n: int) -> "SampleMoments":
        s = np.asarray(s, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or not np.allclose(s, s.T):
            raise ValueError("covariance must be a symmetric square matrix")
        return cls(int(n), s, np.zeros(s.shape[0]))


@dataclass(frozen=True)
class ScoreResult:
    score: float
    loglik: float
    dimension: int
    penalty: float


def _coef(rng: np.random.Generator, size=None):
    return rng.choice([-1.0, 1.0], size=size) * rng.uniform(0.3, 0.7, size=size)


def random_parameters(g: Admg, rng: np.random.Generator) -> GaussianModel:
    """Draw edge coefficients and a positive definite error covariance for ``g``.

    Works for any ADMG; :func:`simulate` adds the directed-MAG requirement.
    """
    p = g.n
    for _ in range(PD_ATTEMPTS):
        omega = np.diag(rng.uniform(1.0, 3.0, size=p))
        for a, b in g.bidirected:
            omega[a, b] = omega[b, a] = _coef(rng)
        if _is_pd(omega):
            break
    else:
        raise NumericalError(f"no positive definite error covariance after {PD_ATTEMPTS} draws")
    B = np.zeros((p, p))
    for a, b in g.directed:
        B[b, a] = _coef(rng)
    inv = np.linalg.inv(np.eye(p) - B)
    sigma = inv @ omega @ inv.T
    return GaussianModel(B, omega, (sigma + sigma.T) / 2)


def _is_pd(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return False
    return True


def simulate(g: Admg, n: int, seed=None) -> tuple[np.ndarray, GaussianModel]:
    """Draw ``n`` zero-mean rows from a random linear SEM on the directed MAG ``g``."""
    if not is_directed_mag(g):
        raise GraphError("simulation needs a directed MAG")
    if n < 1:
        raise ValueError("n must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    model = random_parameters(g, rng)
    chol = np.linalg.cholesky(model.sigma)
    x = rng.standard_normal((n, g.n)) @ chol.T
    return x, model


# -- dominating DAG -------------------------------------------------------------

def dominating_parents(g: Admg, order: TotalOrder) -> tuple[int, ...]:
    """Markov boundary of each vertex within the subgraph on its predecessors."""
    pa = [0] * g.n
    for v in order.sequence:
        pre = order.preceding(v)
        pa[v] = collider_connected(g, 1 << v, pre) & ~(1 << v)
    return tuple(pa)


def dominating_dag(g: Admg, order: TotalOrder | None = None) -> Admg:
    if order is None:
        order = consistent_order(g)
    pa = dominating_parents(g, order)
    return Admg(g.names, [(a, b) for b in range(g.n) for a in bits(pa[b])])


def dag_mle_sigma(d: Admg, moments: SampleMoments) -> np.ndarray:
    """Implied covariance of the Gaussian DAG MLE for ``d``."""
    if not d.is_dag():
        raise GraphError("dag_mle_sigma needs a DAG")
    return mle_sigma_from_parents(d.pa, moments.S)


def mle_sigma_from_parents(pa, S: np.ndarray) -> np.ndarray:
    p = S.shape[0]
    B = np.zeros((p, p))
    resid = np.zeros(p)
    for b in range(p):
        idx = list(bits(pa[b]))
        if idx:
            block = S[np.ix_(idx, idx)]
            try:
                chol = np.linalg.cholesky(block)
            except np.linalg.LinAlgError:
                raise NumericalError(f"singular covariance block on parents of vertex {b}") from None
            beta = np.linalg.solve(chol.T, np.linalg.solve(chol, S[idx, b]))
            B[b, idx] = beta
            resid[b] = S[b, b] - S[b, idx] @ beta
        else:
            resid[b] = S[b, b]
        if not resid[b] > 0:
            raise NumericalError(f"non-positive residual variance at vertex {b}")
    inv = np.linalg.inv(np.eye(p) - B)
    sigma = inv @ np.diag(resid) @ inv.T
    return (sigma + sigma.T) / 2


# -- log-likelihood pieces -----------------------------------------------------

def gaussian_marginal_loglik_sum(subset: int, sigma_hat: np.ndarray, moments: SampleMoments) -> float:
    """``-(n/2) [k log 2pi + log det Sigma_X + tr(Sigma_X^-1 S_X)]`` for ``X = subset``."""
    if not subset:
        return 0.0
    idx = list(bits(subset))
    sig = sigma_hat[np.ix_(idx, idx)]
    try:
        chol = np.linalg.cholesky(sig)
    except np.linalg.LinAlgError:
        raise NumericalError(f"fitted covariance not positive definite on subset {idx}") from None
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    half = np.linalg.solve(chol, moments.S[np.ix_(idx, idx)])
    trace = np.trace(np.linalg.solve(chol.T, half))
    return float(-0.5 * moments.n * (len(idx) * LOG_2PI + logdet + trace))


def point_log_marginal(sigma: np.ndarray, x: np.ndarray) -> Callable[[int], float]:
    """``S -> log f_S(x)`` for a zero-mean Gaussian with covariance ``sigma``."""
    x = np.asarray(x, dtype=float)

    def logf(subset: int) -> float:
        if not subset:
            return 0.0
        idx = list(bits(subset))
        sig = sigma[np.ix_(idx, idx)]
        chol = np.linalg.cholesky(sig)
        z = np.linalg.solve(chol, x[idx])
        return float(-0.5 * (len(idx) * LOG_2PI + z @ z) - np.log(np.diag(chol)).sum())

    return logf


def mobius_term(logmarg: Callable[[int], float], s: int) -> float:
    """``phi_S = sum_{Y <= S} (-1)^{|S\\Y|} L(Y)``."""
    total = 0.0
    for y in subsets(s):
        sign = -1.0 if (s & ~y).bit_count() & 1 else 1.0
        total += sign * logmarg(y)
    return total


def uses_adjusted_form(g: Admg) -> bool:
    return parameterizing_sets(g).max_size() > 5


def factorized_loglik(g: Admg, order: TotalOrder, logmarg: Callable[[int], float],
                      adjusted: bool | None = None) -> float:
    """The m-connecting factorization of a log-likelihood.

    ``logmarg(S)`` returns the log marginal (a sum over data points, or one
    point).  The head-tail form is used unless ``adjusted`` is true or, when
    ``adjusted`` is None, some parameterizing set has more than five members.
    """
    if adjusted is None:
        adjusted = uses_adjusted_form(g)
    cache: dict[int, float] = {}

    def L(s: int) -> float:
        if s not in cache:
            cache[s] = logmarg(s)
        return cache[s]

    if not adjusted:
        total = 0.0
        for ht in parameterizing_sets(g).head_tails:
            for s in subsets(ht.head):
                sign = -1.0 if (ht.head & ~s).bit_count() & 1 else 1.0
                total += sign * L(s | ht.tail)
        return total
    from .inclusion_exclusion import nie

    inc = nie(g, order).inclusion
    pa = dominating_parents(g, order)
    total = 0.0
    for b in range(g.n):
        bb = 1 << b
        total += L(bb | pa[b]) - L(pa[b])
        for s in subsets(pa[b]):
            k = inc[bb | s]
            if k:
                total -= k * mobius_term(L, bb | s)
    return total


def approx_loglik(g: Admg, order: TotalOrder, sigma_hat: np.ndarray, moments: SampleMoments,
                  adjusted: bool | None = None) -> float:
    return factorized_loglik(g, order, lambda s: gaussian_marginal_loglik_sum(s, sigma_hat, moments),
                             adjusted)


# -- dimensions and scores -----------------------------------------------------

def gaussian_dimension(g: Admg) -> int:
    sizes = [s.bit_count() for s in parameterizing_sets(g).sets]
    return g.n + sum(1 for k in sizes if k in (1, 2))


def multinomial_dimension(g: Admg, cards) -> int:
    """``sum_H |X_T| prod_{h in H} (|X_h| - 1)`` over heads H with tails T."""
    cards = [int(c) for c in cards]
    if len(cards) != g.n or any(c < 2 for c in cards):
        raise ValueError("need a category count of at least 2 for every vertex")
    total = 0
    for ht in parameterizing_sets(g).head_tails:
        size = 1
        for t in bits(ht.tail):
            size *= cards[t]
        for h in bits(ht.head):
            size *= cards[h] - 1
        total += size
    return total


def bic_mf(g: Admg, order: TotalOrder | None, moments: SampleMoments) -> ScoreResult:
    if order is None:
        order = consistent_order(g)
    sigma_hat = mle_sigma_from_parents(dominating_parents(g, order), moments.S)
    loglik = float(approx_loglik(g, order, sigma_hat, moments))
    dim = gaussian_dimension(g)
    penalty = 0.5 * dim * math.log(moments.n)
    return ScoreResult(loglik - penalty, loglik, dim, penalty)


def dag_bic(d: Admg, moments: SampleMoments) -> ScoreResult:
    """Exact Gaussian BIC of a DAG; the dimension counts means, variances and edges."""
    sigma_hat = dag_mle_sigma(d, moments)
    loglik = 0.0
    for b in range(d.n):
        loglik += gaussian_marginal_loglik_sum(d.pa[b] | 1 << b, sigma_hat, moments)
        loglik -= gaussian_marginal_loglik_sum(d.pa[b], sigma_hat, moments)
    loglik = float(loglik)
    dim = 2 * d.n + len(d.directed)
    penalty = 0.5 * dim * math.log(moments.n)
    return ScoreResult(loglik - penalty, loglik, dim, penalty)


# -- file input ------------------------------------------------------------------

def read_data_csv(path: str, names=None) -> tuple[list[str], np.ndarray]:
    """Read a CSV with a header of vertex names; ``#`` lines are skipped.

    Columns are reordered to ``names`` when given.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#")) if r]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    try:
        x = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as err:
        raise ValueError(f"{path}: {err}") from None
    if x.size == 0:
        raise ValueError(f"{path}: no data rows")
    if x.ndim != 2 or x.shape[1] != len(header):
        raise ValueError(f"{path}: every row must have {len(header)} values")
    if names is not None:
        missing = [v for v in names if v not in header]
        if missing:
            raise ValueError(f"{path}: missing column {missing[0]!r}")
        x = x[:, [header.index(v) for v in names]]
        header = list(names)
    return header, x


def read_covariance_csv(path: str, names=None) -> tuple[list[str], np.ndarray]:
    return read_data_csv(path, names) if names is None else _reorder_cov(path, names)


def _reorder_cov(path, names):
    header, s = read_data_csv(path)
    if s.shape[0] != len(header):
        raise ValueError(f"{path}: covariance must be square")
    idx = []
    for v in names:
        if v not in header:
            raise ValueError(f"{path}: missing column {v!r}")
        idx.append(header.index(v))
    return list(names), s[np.ix_(idx, idx)]
