"""Set functions over a dense integer ground set.

Sets are passed around as ``frozenset`` internally; the canonical public
form is a sorted tuple (``ElemSet``).  All bundled families return floats and
are pure: the same set always evaluates to the bit-identical value, whatever
order its elements were inserted in.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

ElemSet = tuple  # sorted, duplicate-free tuple of ints


class BudgetError(RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""


def canon(S: Iterable[int]) -> ElemSet:
    return tuple(sorted(set(S)))


@dataclass(frozen=True)
class GroundSet:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ground set needs n >= 1, got {self.n}")

    def __iter__(self):
        return iter(range(self.n))

    def __len__(self):
        return self.n

    def __contains__(self, a):
        return 0 <= a < self.n


class SetFunction:
    """Base class: subclasses implement ``_value(S)`` for a frozenset ``S``."""

    kind = "custom"
    monotone = True
    submodular = True

    def __init__(self, n: int):
        self.ground = GroundSet(n)
        self.n = n
        self._elems = frozenset(range(n))

    def _value(self, S: frozenset) -> float:
        raise NotImplementedError

    def _check(self, S) -> frozenset:
        S = S if isinstance(S, frozenset) else frozenset(S)
        if not S <= self._elems:
            bad = next(a for a in S if a not in self._elems)
            raise IndexError(f"element {bad} outside ground set of size {self.n}")
        return S

    def __call__(self, S: Iterable[int]) -> float:
        return self._value(self._check(S))

    def marginal(self, S: Iterable[int], T: Iterable[int]) -> float:
        """f_S(T) = f(S | T) - f(S)."""
        S = self._check(S)
        return self._value(S | self._check(T)) - self._value(S)

    def to_json(self) -> dict:
        raise TypeError(f"{type(self).__name__} has no JSON form")

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


def evaluate(f: SetFunction, S: Iterable[int]) -> float:
    return f(S)


def marginal(f: SetFunction, S: Iterable[int], T: Iterable[int]) -> float:
    return f.marginal(S, T)


class Coverage(SetFunction):
    """f(S) = number of universe items covered by the sets indexed by S."""

    kind = "coverage"

    def __init__(self, sets: Sequence[Iterable[int]]):
        super().__init__(len(sets))
        self.sets = [tuple(sorted(set(s))) for s in sets]
        for s in self.sets:
            if s and s[0] < 0:
                raise ValueError("coverage items must be non-negative integers")
        self._masks = [sum(1 << i for i in s) for s in self.sets]

    def _value(self, S):
        m = 0
        masks = self._masks
        for a in S:
            m |= masks[a]
        return float(m.bit_count())

    def to_json(self):
        return {"kind": self.kind, "n": self.n, "sets": [list(s) for s in self.sets]}


class Additive(SetFunction):
    kind = "additive"

    def __init__(self, weights: Sequence[float]):
        super().__init__(len(weights))
        if any(w < 0 for w in weights):
            raise ValueError("additive weights must be non-negative")
        self.weights = list(weights)

    def _value(self, S):
        # fsum is correctly rounded, so the result does not depend on the
        # frozenset's iteration order
        return math.fsum(map(self.weights.__getitem__, S))

    def to_json(self):
        return {"kind": self.kind, "n": self.n, "weights": self.weights}


class UnitDemand(SetFunction):
    """f(S) = max value of an element in S (0 on the empty set)."""

    kind = "unit_demand"

    def __init__(self, values: Sequence[float]):
        super().__init__(len(values))
        if any(v < 0 for v in values):
            raise ValueError("unit-demand values must be non-negative")
        self.values = list(values)

    def _value(self, S):
        return float(max(map(self.values.__getitem__, S), default=0.0))

    def to_json(self):
        return {"kind": self.kind, "n": self.n, "values": self.values}


class FunctionOf(SetFunction):
    """Wraps an arbitrary ``fn(frozenset) -> float``.

    ``spec`` is the JSON document that regenerates the instance, when there
    is one.
    """

    def __init__(self, n: int, fn: Callable[[frozenset], float], kind: str = "custom",
                 monotone: bool = True, submodular: bool = True, spec: dict | None = None):
        super().__init__(n)
        self._fn = fn
        self.kind = kind
        self.monotone = monotone
        self.submodular = submodular
        self.spec = spec

    def _value(self, S):
        return float(self._fn(S))

    def to_json(self):
        if self.spec is None:
            raise TypeError(f"{self.kind} instance has no JSON form")
        return dict(self.spec)


# -- exhaustive property checks ---------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    witness: tuple | None = None  # (S, T, a) for the first violation found

    def __bool__(self):
        return self.ok


def all_values(f: SetFunction, limit_n: int = 16) -> np.ndarray:
    """Values of f on every subset, indexed by bitmask."""
    n = f.n
    if n > limit_n:
        raise BudgetError(f"exhaustive check needs n <= {limit_n}, got n={n}")
    vals = np.empty(1 << n)
    for mask in range(1 << n):
        vals[mask] = f(frozenset(i for i in range(n) if mask >> i & 1))
    return vals


def _unmask(mask: int) -> ElemSet:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _tol(vals):
    return 1e-9 * max(1.0, float(np.max(np.abs(vals))))


def check_monotone(f: SetFunction, limit_n: int = 16, vals: np.ndarray | None = None) -> CheckResult:
    """Exhaustively verify f(S) <= f(S + a); single-element steps suffice."""
    if vals is None:
        vals = all_values(f, limit_n)
    n = f.n
    masks = np.arange(1 << n)
    tol = _tol(vals)
    for a in range(n):
        bit = 1 << a
        base = masks[(masks & bit) == 0]
        bad = np.nonzero(vals[base | bit] < vals[base] - tol)[0]
        if bad.size:
            m = int(base[bad[0]])
            return CheckResult(False, (_unmask(m), _unmask(m | bit), a))
    return CheckResult(True)


def check_submodular(f: SetFunction, limit_n: int = 16, vals: np.ndarray | None = None) -> CheckResult:
    """Exhaustively verify f_S(a) >= f_{S+b}(a) for all S and a, b outside S.

    The local two-element condition is equivalent to diminishing returns over
    all S subset of T.
    """
    if vals is None:
        vals = all_values(f, limit_n)
    n = f.n
    masks = np.arange(1 << n)
    tol = _tol(vals)
    for a in range(n):
        abit = 1 << a
        for b in range(n):
            if b == a:
                continue
            bbit = 1 << b
            base = masks[(masks & (abit | bbit)) == 0]
            gain_small = vals[base | abit] - vals[base]
            gain_big = vals[base | abit | bbit] - vals[base | bbit]
            bad = np.nonzero(gain_small < gain_big - tol)[0]
            if bad.size:
                m = int(base[bad[0]])
                return CheckResult(False, (_unmask(m), _unmask(m | bbit), a))
    return CheckResult(True)


def brute_force_opt(f: SetFunction, k: int, budget: int = 10**7) -> tuple[ElemSet, float]:
    """Exact argmax of f over |S| <= k, lexicographically smallest on ties.

    Monotone instances only need the size-k layer.
    """
    n = f.n
    k = min(k, n)
    sizes = [k] if f.monotone else range(k + 1)
    total = sum(math.comb(n, j) for j in sizes)
    if total > budget:
        raise BudgetError(f"brute force over {total} sets exceeds budget {budget}")
    best, best_val = None, -math.inf
    for j in sizes:
        for S in itertools.combinations(range(n), j):
            v = f(S)
            if v > best_val or (v == best_val and S < best):
                best, best_val = S, v
    return best, best_val


# -- JSON instance format ---------------------------------------------------


def to_json(f: SetFunction) -> dict:
    return f.to_json()


def from_json(doc: dict) -> SetFunction:
    from . import generators

    kind = doc.get("kind")
    n = doc.get("n")
    if kind == "coverage":
        f = Coverage(doc["sets"])
    elif kind == "additive":
        f = Additive(doc["weights"])
    elif kind == "unit_demand":
        f = UnitDemand(doc["values"])
    elif kind in generators.PARAMETRIC:
        return generators.PARAMETRIC[kind](doc)
    else:
        raise ValueError(f"unknown instance kind {kind!r}")
    if n is not None and n != f.n:
        raise ValueError(f"instance declares n={n} but payload has {f.n} elements")
    return f


def save(f: SetFunction, path) -> None:
    with open(path, "w") as fh:
        json.dump(f.to_json(), fh, indent=1)


def load(path) -> SetFunction:
    with open(path) as fh:
        return from_json(json.load(fh))
