"""Integer-valued functions on the subset lattice and their transforms.

An :class:`Imset` on ground set ``V`` stores one int64 per subset, indexed by
the subset's bitmask.  Zeta and Möbius transforms come in two orientations:

* down: sums over subsets, ``zeta_down(u)(A) = sum_{B <= A} u(B)``
* up: sums over supersets, ``zeta_up(u)(A) = sum_{B >= A} u(B)``

Under the up orientation ``mobius_up(delta_family(<A,B|C>))`` is the
semi-elementary imset of the triple.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import bits, subsets
from .separation import Triple

_LIMIT = 1 << 62


class ImsetError(ValueError):
    pass


def _masks(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def _bound(values: np.ndarray) -> int:
    return int(np.abs(values).max()) if values.size else 0


class Imset:
    """Dense integer vector over the power set of ``names``."""

    __slots__ = ("names", "values")

    def __init__(self, names: Sequence[str], values=None):
        self.names = tuple(names)
        size = 1 << len(self.names)
        if values is None:
            values = np.zeros(size, dtype=np.int64)
        values = np.asarray(values)
        if values.shape != (size,):
            raise ImsetError(f"expected {size} values, got shape {values.shape}")
        if values.dtype != np.int64:
            if not np.all(np.asarray(values) == np.round(values)):
                raise ImsetError("imset values must be integers")
            values = values.astype(np.int64)
        self.values = values

    @property
    def n(self) -> int:
        return len(self.names)

    def __getitem__(self, mask: int) -> int:
        return int(self.values[mask])

    def _check(self, other: "Imset"):
        if not isinstance(other, Imset) or other.names != self.names:
            raise ImsetError("imsets must share a ground set")

    def __add__(self, other):
        self._check(other)
        if _bound(self.values) + _bound(other.values) >= _LIMIT:
            raise OverflowError("imset addition overflows int64")
        return Imset(self.names, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        if _bound(self.values) + _bound(other.values) >= _LIMIT:
            raise OverflowError("imset subtraction overflows int64")
        return Imset(self.names, self.values - other.values)

    def __neg__(self):
        return Imset(self.names, -self.values)

    def __mul__(self, k: int):
        k = int(k)
        if _bound(self.values) * abs(k) >= _LIMIT:
            raise OverflowError("imset scaling overflows int64")
        return Imset(self.names, self.values * k)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Imset) and self.names == other.names and \
            bool(np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.names, self.values.tobytes()))

    def is_zero(self) -> bool:
        return not self.values.any()

    def support(self) -> list[int]:
        return [int(m) for m in np.flatnonzero(self.values)]

    def items(self) -> list[tuple[int, int]]:
        """Non-zero ``(subset mask, value)`` pairs."""
        return [(m, int(self.values[m])) for m in self.support()]

    def __repr__(self):
        terms = ", ".join(f"{_render(self.names, m)}:{v}" for m, v in self.items())
        return f"Imset({{{terms}}})"


def _render(names, mask):
    picked = [names[i] for i in bits(mask)]
    if all(len(v) == 1 for v in names):
        return "".join(picked) or "∅"
    return "{" + ",".join(picked) + "}"


# -- constructors ---------------------------------------------------------------

def delta(names: Sequence[str], sets: int | Iterable[int]) -> Imset:
    """Indicator of one subset (a mask) or of a family of subsets."""
    u = Imset(names)
    if isinstance(sets, (int, np.integer)):
        sets = [int(sets)]
    for s in sets:
        u.values[s] = 1
    return u


def indicator(names: Sequence[str], predicate: Callable[[np.ndarray], np.ndarray]) -> Imset:
    """Indicator of the subsets selected by a vectorised predicate on masks."""
    s = _masks(len(names))
    return Imset(names, predicate(s).astype(np.int64))


def triple_family(names: Sequence[str], t: Triple) -> Imset:
    """Indicator of ``{S <= ABC : S not <= AC, S not <= BC}``."""
    abc = t.a | t.b | t.c
    ac, bc = t.a | t.c, t.b | t.c
    return indicator(names, lambda s: ((s & ~abc) == 0) & ((s & ~ac) != 0) & ((s & ~bc) != 0))


def semi_elementary(names: Sequence[str], t: Triple) -> Imset:
    """``delta(ABC) + delta(C) - delta(AC) - delta(BC)``; zero when a side is empty."""
    u = Imset(names)
    if not t.a or not t.b:
        return u
    u.values[t.a | t.b | t.c] += 1
    u.values[t.c] += 1
    u.values[t.a | t.c] -= 1
    u.values[t.b | t.c] -= 1
    return u


def elementary(names: Sequence[str], t: Triple) -> Imset:
    if t.a.bit_count() != 1 or t.b.bit_count() != 1:
        raise ImsetError("elementary imsets need singleton sides")
    return semi_elementary(names, t)


def elementary_expansion(t: Triple) -> list[Triple]:
    """Elementary triples whose imsets sum to the semi-elementary imset of ``t``.

    Telescopes over the members of A and B in index order.
    """
    out = []
    a_seen = 0
    for a in bits(t.a):
        b_seen = 0
        for b in bits(t.b):
            out.append(Triple(1 << a, 1 << b, t.c | a_seen | b_seen))
            b_seen |= 1 << b
        a_seen |= 1 << a
    return out


# -- transforms -----------------------------------------------------------------

def _butterfly(u: Imset, up: bool, sign: int) -> Imset:
    n = u.n
    if _bound(u.values) and _bound(u.values) >= _LIMIT >> n:
        raise OverflowError("transform may overflow int64")
    v = u.values.copy()
    for i in range(n):
        view = v.reshape(-1, 2, 1 << i)
        if up:
            view[:, 0, :] += sign * view[:, 1, :]
        else:
            view[:, 1, :] += sign * view[:, 0, :]
    return Imset(u.names, v)


def zeta_down(u: Imset) -> Imset:
    return _butterfly(u, up=False, sign=1)


def mobius_down(u: Imset) -> Imset:
    return _butterfly(u, up=False, sign=-1)


def zeta_up(u: Imset) -> Imset:
    return _butterfly(u, up=True, sign=1)


def mobius_up(u: Imset) -> Imset:
    return _butterfly(u, up=True, sign=-1)


# -- certificates -----------------------------------------------------------------

@dataclass
class SemiElemCombination:
    """A non-negative combination of semi-elementary imsets.

    ``terms`` holds ``(Triple, coefficient)`` pairs; coefficients are stored
    as :class:`fractions.Fraction`.
    """

    names: tuple[str, ...]
    terms: list[tuple[Triple, Fraction]] = field(default_factory=list)

    def __post_init__(self):
        self.names = tuple(self.names)
        fixed = []
        for t, k in self.terms:
            k = Fraction(k)
            if k < 0:
                raise ImsetError("certificate coefficients must be non-negative")
            fixed.append((t, k))
        self.terms = fixed

    def add(self, t: Triple, k=1):
        k = Fraction(k)
        if k < 0:
            raise ImsetError("certificate coefficients must be non-negative")
        self.terms.append((t, k))

    def extend(self, other: "SemiElemCombination"):
        self.terms.extend(other.terms)

    def triples(self) -> list[Triple]:
        return [t for t, _ in self.terms]

    def __len__(self):
        return len(self.terms)


def evaluate_certificate(c: SemiElemCombination, elementary_only: bool = False) -> Imset:
    """Sum of the combination's semi-elementary imsets.

    With ``elementary_only`` each term is first expanded into elementary
    imsets, which gives the same result.
    """
    denom = lcm(*(k.denominator for _, k in c.terms)) if c.terms else 1
    total = np.zeros(1 << len(c.names), dtype=np.int64)
    for t, k in c.terms:
        if k < 0:
            raise ImsetError("certificate coefficients must be non-negative")
        weight = int(k * denom)
        parts = elementary_expansion(t) if elementary_only else [t]
        for p in parts:
            total += weight * semi_elementary(c.names, p).values
    if denom != 1:
        if np.any(total % denom):
            raise ImsetError("certificate does not evaluate to an integer imset")
        total //= denom
    return Imset(c.names, total)


def is_certified_structural(c: SemiElemCombination, u: Imset) -> bool:
    return evaluate_certificate(c) == u


def imset_factor_check(u: Imset, logdens: Callable[[int], float]) -> float:
    """``sum_S u(S) * logdens(S)`` over the support of ``u``."""
    return float(sum(v * logdens(m) for m, v in u.items()))


def subset_sum_oracle(u: Imset, up: bool, signed: bool) -> Imset:
    """Quadratic reference implementation of the four transforms."""
    n = u.n
    full = (1 << n) - 1
    out = np.zeros(1 << n, dtype=np.int64)
    for a in range(1 << n):
        rng = subsets(full & ~a) if up else subsets(a)
        for extra in rng:
            b = a | extra if up else extra
            sign = -1 if signed and ((a ^ b).bit_count() & 1) else 1
            out[a] += sign * u.values[b]
    return Imset(u.names, out)
