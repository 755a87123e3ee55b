"""Smoothing neighborhoods and the (noisy) smooth values averaged over them.

A neighborhood is a finite family of sets X; the smooth value of S over it is
the mean of g(S | X), where g is either an exact set function or an oracle.
Members are produced lazily, in a fixed order that is part of the
reproducibility contract: the order in which a noisy oracle sees queries
never depends on anything but the inputs.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import filterfalse
from typing import Callable, Iterator, Sequence

from .setfn import BudgetError, ElemSet

SUBSET_CAP = 2 ** 20
SUBSET_SAMPLE = 2 ** 16


@dataclass
class Neighborhood:
    kind: str
    size: int
    _gen: Callable[[], Iterator[frozenset]] = field(repr=False)
    source: dict = field(default_factory=dict)

    def __iter__(self):
        return self._gen()

    def __len__(self):
        return self.size

    def materialize(self) -> list[ElemSet]:
        return [tuple(sorted(X)) for X in self]


@lru_cache(maxsize=64)
def subset_masks(ell: int, cap: int = SUBSET_CAP, sample: int | None = SUBSET_SAMPLE,
                 seed: int = 0, proper: bool = False) -> tuple[int, ...]:
    """Bitmasks over ``ell`` items: all of them, or a seeded uniform sample
    without replacement once the family would exceed ``cap`` members."""
    total = (1 << ell) - (1 if proper else 0)
    if total <= cap:
        return tuple(range(total))
    if sample is None:
        raise BudgetError(f"2^{ell} subsets exceed the cap of {cap} and sampling is off")
    return tuple(sorted(random.Random(seed).sample(range(total), min(sample, total))))


def _blocks_subsets(blocks: Sequence[frozenset], masks, extra: frozenset):
    for m in masks:
        X = extra
        for i, b in enumerate(blocks):
            if m >> i & 1:
                X = X | b
        yield X


def subset_neighborhood(H: Sequence[int], a: int | None = None, *, cap: int = SUBSET_CAP,
                        sample: int | None = SUBSET_SAMPLE, seed: int = 0,
                        proper: bool = False) -> Neighborhood:
    """{H' | {a} : H' subset of H}.  ``proper`` leaves out H' = H."""
    H = tuple(sorted(set(H)))
    if a is not None and a in H:
        raise ValueError(f"element {a} belongs to the smoothing set")
    extra = frozenset() if a is None else frozenset((a,))
    blocks = [frozenset((h,)) for h in H]
    masks = subset_masks(len(H), cap, sample, seed, proper)
    return Neighborhood("subset_of_H", len(masks), lambda: _blocks_subsets(blocks, masks, extra),
                        {"H": H, "a": a})


def bundle_subset_neighborhood(bundles: Sequence[Sequence[int]], a: int | None = None, *,
                               cap: int = SUBSET_CAP, sample: int | None = SUBSET_SAMPLE,
                               seed: int = 0, proper: bool = False) -> Neighborhood:
    """Like ``subset_neighborhood`` but H' ranges over unions of whole bundles,
    so any two members differ in at least one full bundle."""
    blocks = [frozenset(b) for b in bundles]
    union = frozenset().union(*blocks)
    if sum(map(len, blocks)) != len(union):
        raise ValueError("bundles must be pairwise disjoint")
    if a is not None and a in union:
        raise ValueError(f"element {a} belongs to a smoothing bundle")
    extra = frozenset() if a is None else frozenset((a,))
    masks = subset_masks(len(blocks), cap, sample, seed, proper)
    return Neighborhood("bundle_subset", len(masks), lambda: _blocks_subsets(blocks, masks, extra),
                        {"bundles": [tuple(sorted(b)) for b in blocks], "a": a})


def swap_neighborhood(A: Sequence[int], S: Sequence[int], n: int, *,
                      sample: int | None = None, seed: int = 0) -> Neighborhood:
    """All A_ij = (A - a_i) + a_j with a_i in A and a_j outside S | A.

    ``sample`` averages over a seeded uniform subset of that many members
    instead of all c(n - c - |S|) of them.
    """
    A = tuple(sorted(set(A)))
    Sset = frozenset(S)
    if Sset.intersection(A):
        raise ValueError("bundle overlaps the current solution")
    Aset = frozenset(A)
    outside = list(filterfalse((Sset | Aset).__contains__, range(n)))
    m = len(outside)
    total = len(A) * m
    drops = [Aset - {x} for x in A]

    if sample is not None and sample < total:
        idx = sorted(random.Random(seed).sample(range(total), sample))

        def gen():
            for t in idx:
                i, j = divmod(t, m)
                yield drops[i] | {outside[j]}

        size = sample
    else:
        def gen():
            for d in drops:
                for j in outside:
                    yield d | {j}

        size = total
    return Neighborhood("swap", size, gen, {"A": A, "S": tuple(sorted(Sset)), "t": total})


def extension_neighborhood(A: Sequence[int], n: int) -> Neighborhood:
    """{A + x : x not in A}."""
    Aset = frozenset(A)
    if len(Aset) >= n:
        raise ValueError("cannot extend the full ground set")
    outside = [x for x in range(n) if x not in Aset]
    return Neighborhood("extension", len(outside), lambda: (Aset | {x} for x in outside),
                        {"A": tuple(sorted(Aset))})


def partition_swap_neighborhood(A: Sequence[int], S: Sequence[int], n: int, d: int) -> Neighborhood:
    """Swap whole d-element groups: (A - Q_i) | P_j, where Q partitions A and P
    partitions the elements outside S | A into consecutive d-blocks (a short
    trailing block is dropped so members keep size |A|)."""
    A = tuple(sorted(set(A)))
    Sset = frozenset(S)
    if d < 1 or len(A) % d:
        raise ValueError(f"bundle size {len(A)} is not a multiple of d={d}")
    if Sset.intersection(A):
        raise ValueError("bundle overlaps the current solution")
    Aset = frozenset(A)
    outside = [j for j in range(n) if j not in Sset and j not in Aset]
    Q = [frozenset(A[i:i + d]) for i in range(0, len(A), d)]
    P = [frozenset(outside[i:i + d]) for i in range(0, len(outside) - d + 1, d)]

    def gen():
        for q in Q:
            rest = Aset - q
            for p in P:
                yield rest | p

    return Neighborhood("partition_swap", len(Q) * len(P), gen, {"A": A, "d": d})


def smooth_value(g, S, nb: Neighborhood) -> float:
    """Mean of g(S | X) over the neighborhood (g: set function or oracle)."""
    if not len(nb):
        raise ValueError("empty smoothing neighborhood")
    S = frozenset(S)
    return math.fsum(g(S | X) for X in nb) / len(nb)


def smooth_marginal(f, S, nb: Neighborhood) -> float:
    """Mean of f_S(X) over the neighborhood."""
    if not len(nb):
        raise ValueError("empty smoothing neighborhood")
    S = frozenset(S)
    base = f(S)
    return math.fsum(f(S | X) - base for X in nb) / len(nb)


def variation(f, S, nb: Neighborhood) -> float:
    """max over min of the member marginals f_S(X); inf when the min is <= 0."""
    if not len(nb):
        raise ValueError("empty smoothing neighborhood")
    S = frozenset(S)
    base = f(S)
    gains = [f(S | X) - base for X in nb]
    lo = min(gains)
    if lo <= 0:
        return math.inf
    return max(gains) / lo


def chunk(elements: Sequence[int], size: int) -> list[tuple[int, ...]]:
    return [tuple(elements[i:i + size]) for i in range(0, len(elements) - size + 1, size)]


def bundle_families(elements: Sequence[int], ell: int, d: int,
                    size: int | None = None) -> list[list[tuple[int, ...]]]:
    """d families of ell disjoint bundles, cut from ``elements`` in order.

    Bundles hold d + 1 elements by default: d-correlated noise may tie
    together sets at distance exactly d, so members of one average must sit
    strictly farther apart than that.
    """
    size = d + 1 if size is None else size
    need = d * ell * size
    if len(elements) < need:
        raise ValueError(f"need {need} elements for {d} families of {ell} bundles")
    bundles = chunk(list(elements)[:need], size)
    return [bundles[i * ell:(i + 1) * ell] for i in range(d)]
