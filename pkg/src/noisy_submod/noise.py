"""Noise distributions and value oracles with query accounting.

Noisy multipliers are never drawn from a shared stateful RNG.  Each draw is a
pure function of a 64-bit stream key, and the key of a set is a seeded hash
of the set itself, so a consistent oracle answers identically no matter how
often or in which order sets are queried, without storing past answers.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Iterable

from .setfn import SetFunction

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer: a bijective avalanche mix on 64-bit words."""
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def unit_from_key(key: int) -> float:
    """Map a stream key to a uniform draw strictly inside (0, 1)."""
    return ((mix64(key & MASK64) >> 11) + 0.5) * 2.0 ** -53


# -- distributions -------------------------------------------------------------


class NoiseDistribution:
    kind = ""

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def from_unit(self, u: float) -> float:
        raise NotImplementedError

    def sample(self, key: int) -> float:
        return self.from_unit(unit_from_key(key))

    def to_json(self) -> dict:
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class Uniform(NoiseDistribution):
    lo: float
    hi: float
    kind = "uniform"

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"uniform needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def mean(self):
        return (self.lo + self.hi) / 2

    def from_unit(self, u):
        return self.lo + (self.hi - self.lo) * u


@dataclass(frozen=True)
class Gaussian(NoiseDistribution):
    mean_: float = 1.0
    sd: float = 0.1
    kind = "gaussian"

    def __post_init__(self):
        if self.sd <= 0:
            raise ValueError(f"gaussian needs sd > 0, got {self.sd}")

    @property
    def mean(self):
        return self.mean_

    def from_unit(self, u):
        return NormalDist(self.mean_, self.sd).inv_cdf(u)

    def to_json(self):
        return {"kind": self.kind, "mean": self.mean_, "sd": self.sd}


@dataclass(frozen=True)
class Exponential(NoiseDistribution):
    mean_: float = 1.0
    kind = "exponential"

    def __post_init__(self):
        if self.mean_ <= 0:
            raise ValueError(f"exponential needs mean > 0, got {self.mean_}")

    @property
    def mean(self):
        return self.mean_

    def from_unit(self, u):
        return -self.mean_ * math.log1p(-u)

    def to_json(self):
        return {"kind": self.kind, "mean": self.mean_}


@dataclass(frozen=True)
class TwoPoint(NoiseDistribution):
    p: float
    hi: float
    lo: float
    kind = "two_point"

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError(f"two_point needs p in [0, 1], got {self.p}")
        if self.hi < self.lo:
            raise ValueError("two_point needs hi >= lo")

    @property
    def mean(self):
        return self.p * self.hi + (1 - self.p) * self.lo

    def from_unit(self, u):
        return self.hi if u < self.p else self.lo


@dataclass(frozen=True)
class Constant(NoiseDistribution):
    c: float = 1.0
    kind = "constant"

    @property
    def mean(self):
        return self.c

    def from_unit(self, u):
        return self.c


def sample(dist: NoiseDistribution, stream_key: int) -> float:
    return dist.sample(stream_key)


def uniform_eps(eps: float) -> Uniform:
    return Uniform(1 - eps, 1 + eps)


def dist_from_json(doc: dict) -> NoiseDistribution:
    doc = dict(doc)
    kind = doc.pop("kind", None)
    try:
        if kind == "uniform":
            return Uniform(**doc)
        if kind == "gaussian":
            return Gaussian(doc.pop("mean", 1.0), **doc)
        if kind == "exponential":
            return Exponential(doc.pop("mean", 1.0), **doc)
        if kind == "two_point":
            return TwoPoint(**doc)
        if kind == "constant":
            return Constant(**doc)
    except TypeError as e:
        raise ValueError(f"bad parameters for {kind} noise: {e}") from None
    raise ValueError(f"unknown noise distribution {kind!r}")


# -- oracles -----------------------------------------------------------------


class Oracle:
    """Counted access to a set function.  ``true_value`` is uncounted and exists
    for instrumentation only; algorithms never call it to make decisions."""

    def __init__(self, f: SetFunction):
        self.f = f
        self.n = f.n
        self.queries = 0

    def __call__(self, S: Iterable[int]) -> float:
        self.queries += 1
        return self._query(self.f._check(S))

    def _query(self, S: frozenset) -> float:
        raise NotImplementedError

    def true_value(self, S: Iterable[int]) -> float:
        return self.f(S)

    def query_count(self) -> int:
        return self.queries

    def reset(self) -> None:
        self.queries = 0


class ExactOracle(Oracle):
    def _query(self, S):
        return self.f._value(S)


class RuleOracle(Oracle):
    """Mounts a distorted-oracle rule (see ``generators.OracleRule``)."""

    def __init__(self, f: SetFunction, rule):
        super().__init__(f)
        self.rule = rule

    def _query(self, S):
        return float(self.rule(S))


MODES = ("multiplicative", "additive", "marginal_multiplicative", "marginal_additive")
TEMPORAL = ("consistent", "iid_in_time")

_TAGS = {m: i + 1 for i, m in enumerate(MODES)}
_PAIR_SALT = 0x6A09E667F3BCC909
_TIME_SALT = 0xBB67AE8584CAA73B


class NoisyOracle(Oracle):
    """f~(S) = xi_S * f(S) (or f(S) + xi_S, or the marginal variants).

    ``d`` > 0 switches on d-correlated noise: a set queried for the first time
    adopts the multiplier of the earliest previously queried set within
    symmetric difference d, else draws a fresh independent one.
    """

    def __init__(self, f: SetFunction, dist: NoiseDistribution, mode: str = "multiplicative",
                 temporal: str = "consistent", d: int = 0, seed: int = 0,
                 truncate: bool = False):
        super().__init__(f)
        if mode not in MODES:
            raise ValueError(f"unknown noise mode {mode!r}")
        if temporal not in TEMPORAL:
            raise ValueError(f"unknown temporal model {temporal!r}")
        if d < 0:
            raise ValueError("d must be non-negative")
        if d and temporal != "consistent":
            raise ValueError("d-correlated noise requires the consistent temporal model")
        self.dist, self.mode, self.temporal, self.d = dist, mode, temporal, d
        self.seed, self.truncate = seed, truncate
        self._mult = mode in ("multiplicative", "marginal_multiplicative")
        self._iid = temporal == "iid_in_time"
        self._marg = mode.startswith("marginal")
        base = mix64((seed & MASK64) ^ (_TAGS[mode] * _GOLDEN & MASK64))
        self._salt = mix64(base ^ _TAGS[mode])
        self._z = [mix64(base ^ ((e + 1) * _GOLDEN & MASK64)) for e in range(self.n)]
        self._calls = 0
        self._memo: dict[frozenset, int] = {}
        self._by_size: dict[int, list] = {}
        self.memo_log: list[tuple[tuple, int, tuple | None]] = []

    @property
    def marginal_mode(self) -> bool:
        return self.mode.startswith("marginal")

    def set_hash(self, S: frozenset) -> int:
        # sum of per-element keys mod 2^64: order-free, and sum() runs in C
        return sum(map(self._z.__getitem__, S)) & MASK64

    def _fresh_key(self, h: int) -> int:
        if self._iid:
            return mix64(h ^ mix64(self._calls ^ _TIME_SALT) ^ self._salt)
        return mix64(h ^ self._salt)

    def stream_key(self, S: frozenset) -> int:
        """Key of the multiplier for S (consults and extends the d-correlated memo)."""
        if not self.d:
            return self._fresh_key(self.set_hash(S))
        key = self._memo.get(S)
        if key is not None:
            return key
        best = None
        for size in range(max(0, len(S) - self.d), len(S) + self.d + 1):
            for order, T, tkey in self._by_size.get(size, ()):
                if (best is None or order < best[0]) and len(S ^ T) <= self.d:
                    best = (order, T, tkey)
        if best is None:
            key, source = self._fresh_key(self.set_hash(S)), None
        else:
            key, source = best[2], tuple(sorted(best[1]))
        self._memo[S] = key
        self._by_size.setdefault(len(S), []).append((len(self.memo_log), S, key))
        self.memo_log.append((tuple(sorted(S)), key, source))
        return key

    def _draw(self, key: int) -> float:
        xi = self.dist.sample(key)
        return max(xi, 0.0) if self.truncate else xi

    def _apply(self, value: float, xi: float) -> float:
        return xi * value if self._mult else value + xi

    def _query(self, S):
        self._calls += 1
        if self._marg:
            empty = frozenset()
            return self.f._value(empty) + self._marginal(empty, S)
        if self.d:
            key = self.stream_key(S)
        else:
            # hot path, same result as stream_key(S)
            h = sum(map(self._z.__getitem__, S)) & MASK64
            key = self._fresh_key(h) if self._iid else mix64(h ^ self._salt)
        xi = self.dist.sample(key)
        if self.truncate and xi < 0.0:
            xi = 0.0
        return xi * self.f._value(S) if self._mult else self.f._value(S) + xi

    def _marginal(self, S: frozenset, T: frozenset) -> float:
        hs, ht = self.set_hash(S), self.set_hash(T)
        key = self._fresh_key(mix64(hs ^ _PAIR_SALT) ^ mix64(ht))
        fs = self.f._value(S)
        return self._apply(self.f._value(S | T) - fs, self._draw(key))

    def marginal(self, S: Iterable[int], T: Iterable[int]) -> float:
        """Noisy f_S(T), keyed by the (S, T) pair."""
        if not self.marginal_mode:
            raise ValueError("noisy_marginal needs a marginal-mode oracle")
        self.queries += 1
        self._calls += 1
        return self._marginal(self.f._check(S), self.f._check(T))

    def reset(self):
        super().reset()
        self._calls = 0


def noisy_eval(o: Oracle, S: Iterable[int]) -> float:
    return o(S)


def noisy_marginal(o: NoisyOracle, S: Iterable[int], T: Iterable[int]) -> float:
    return o.marginal(S, T)


def d_correlated_eval(o: NoisyOracle, S: Iterable[int]) -> float:
    if not o.d:
        raise ValueError("oracle is not d-correlated")
    return o(S)


def query_count(o: Oracle) -> int:
    return o.queries


def reset(o: Oracle) -> None:
    o.reset()


NOISE_KEYS = {"dist", "mode", "temporal", "correlation", "truncate"}


def oracle_from_config(f: SetFunction, spec: dict | None, seed: int = 0) -> Oracle:
    """Build an oracle from the experiment-config noise block; ``None`` is exact."""
    if spec is None:
        return ExactOracle(f)
    unknown = set(spec) - NOISE_KEYS
    if unknown:
        raise ValueError(f"unknown noise keys: {sorted(unknown)}")
    corr = spec.get("correlation") or {}
    if set(corr) - {"d"}:
        raise ValueError(f"unknown correlation keys: {sorted(set(corr) - {'d'})}")
    return NoisyOracle(f, dist_from_json(spec.get("dist", {"kind": "constant", "c": 1.0})),
                       mode=spec.get("mode", "multiplicative"),
                       temporal=spec.get("temporal", "consistent"),
                       d=int(corr.get("d", 0)), seed=seed,
                       truncate=bool(spec.get("truncate", False)))
