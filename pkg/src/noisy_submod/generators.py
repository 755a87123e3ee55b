"""Instance families: random benchmarks and the hardness constructions.

Constructions that come with a distorted oracle return it as an
``OracleRule``: a callable mapping a set to the value the oracle reports.
``noise.RuleOracle`` mounts any rule behind the usual query interface.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .setfn import Additive, Coverage, FunctionOf, SetFunction, UnitDemand


def random_coverage(n: int, universe: int | None = None, density: float = 0.15,
                    seed: int = 0) -> Coverage:
    """Each of the n sets covers each universe item independently w.p. ``density``."""
    rng = random.Random(seed)
    universe = universe if universe is not None else 2 * n
    sets = []
    for _ in range(n):
        s = [i for i in range(universe) if rng.random() < density]
        if not s:
            s = [rng.randrange(universe)]
        sets.append(s)
    return Coverage(sets)


def random_additive(n: int, seed: int = 0, lo: int = 0, hi: int = 20) -> Additive:
    rng = random.Random(seed)
    return Additive([float(rng.randint(lo, hi)) for _ in range(n)])


def random_unit_demand(n: int, seed: int = 0, hi: int = 20) -> UnitDemand:
    rng = random.Random(seed)
    return UnitDemand([float(rng.randint(1, hi)) for _ in range(n)])


def random_instance(n: int, seed: int = 0) -> SetFunction:
    """Coverage or additive with equal odds; used by property tests."""
    rng = random.Random(seed)
    if rng.random() < 0.5:
        return random_coverage(n, universe=rng.randint(n, 3 * n),
                               density=rng.uniform(0.05, 0.35), seed=rng.getrandbits(32))
    return random_additive(n, seed=rng.getrandbits(32))


class OracleRule:
    """Maps a set to the value a distorted oracle reports for it."""

    def __call__(self, S: frozenset) -> float:
        raise NotImplementedError


# -- erroneous-oracle lower bound --------------------------------------------


@dataclass
class AdversarialPair:
    n: int
    delta: float
    eps: float
    X: frozenset
    f1: SetFunction
    f2: SetFunction
    rule: "AdversarialRule" = field(repr=False)

    @property
    def k(self) -> int:
        return max(1, round(self.n ** (0.5 + self.delta)))


class AdversarialRule(OracleRule):
    """Erroneous oracle for f1: reports f2(S) whenever f2 is within (1 +- eps) of f1."""

    def __init__(self, f1, f2, eps):
        self.f1, self.f2, self.eps = f1, f2, eps

    def __call__(self, S):
        v1, v2 = self.f1(S), self.f2(S)
        if (1 - self.eps) * v1 <= v2 <= (1 + self.eps) * v1:
            return v2
        return v1


def _planted_set(n, p, seed):
    rng = random.Random(seed)
    return frozenset(i for i in range(n) if rng.random() < p)


def _adversarial_f1(n, delta, eps, X):
    sq, base, cap = math.sqrt(n), n ** (0.5 + delta) / eps, n ** (1 + delta)

    def f1(S):
        return min(len(S & X) * sq + base, len(S) * cap)

    return f1


def _adversarial_f2(n, delta, eps):
    slope, base, cap = n ** delta, n ** (0.5 + delta) / eps, n ** (1 + delta)

    def f2(S):
        return min(len(S) * slope + base, len(S) * cap)

    return f2


def make_adversarial_pair(n: int, delta: float, eps: float, seed: int = 0) -> AdversarialPair:
    """Two normalized monotone submodular functions with far-apart maxima that an
    eps-erroneous oracle can make look identical.

    X holds each element independently w.p. n^(-1/2 + delta).
    """
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if n < 2:
        raise ValueError("n must be at least 2")
    X = _planted_set(n, n ** (-0.5 + delta), seed)
    spec = {"n": n, "delta": delta, "eps": eps}
    f1 = FunctionOf(n, _adversarial_f1(n, delta, eps, X), kind="adversarial_f1",
                    spec={"kind": "adversarial_f1", **spec, "seed": seed})
    f2 = FunctionOf(n, _adversarial_f2(n, delta, eps), kind="adversarial_f2",
                    spec={"kind": "adversarial_f2", **spec})
    return AdversarialPair(n, delta, eps, X, f1, f2, AdversarialRule(f1, f2, eps))


# -- max-coverage trap for greedy under error --------------------------------


class TrapRule(OracleRule):
    """Exact union sizes, except: any nonempty S inside the trap family reads
    core + delta', and trap sets plus exactly one singleton set read core."""

    def __init__(self, f: Coverage, num_a: int, core: int, delta_prime: float):
        self.f, self.num_a, self.core, self.delta_prime = f, num_a, core, delta_prime

    def __call__(self, S):
        a_part = sum(1 for x in S if x < self.num_a)
        b_part = len(S) - a_part
        if a_part and b_part == 0:
            return self.core + self.delta_prime
        if a_part and b_part == 1:
            return float(self.core)
        return self.f(S)


def trap_core_size(eps: float) -> int:
    # ceil((1 - eps) / eps) with slack for float noise, e.g. eps = 1/3 -> 2
    return max(1, math.ceil((1 - eps) / eps - 1e-9))


def make_greedy_trap(num_b_sets: int, eps: float, num_a_sets: int | None = None,
                     core_size: int | None = None,
                     delta_prime: float | None = None) -> tuple[Coverage, TrapRule]:
    """Coverage instance where an eps-erroneous oracle lures greedy into a family
    of identical sets.

    Elements 0..num_a-1 all cover the same ``core_size`` items; elements after
    that each cover one private item.
    """
    if num_b_sets < 1:
        raise ValueError("need at least one singleton-coverage set")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    num_a = num_a_sets if num_a_sets is not None else num_b_sets
    if num_a < 1:
        raise ValueError("need at least one trap set")
    core = core_size if core_size is not None else trap_core_size(eps)
    dp = delta_prime if delta_prime is not None else 1e-3 * core
    sets = [list(range(core)) for _ in range(num_a)]
    sets += [[core + j] for j in range(num_b_sets)]
    f = Coverage(sets)
    return f, TrapRule(f, num_a, core, dp)


# -- greedy under random noise -----------------------------------------------


def make_noisy_greedy_failure(n: int) -> Additive:
    """sqrt(n) good elements worth n^(1/4) (indices 0..sqrt(n)-1), the rest worth 1."""
    k = math.isqrt(n)
    good = n ** 0.25
    return Additive([good] * k + [1.0] * (n - k))


def greedy_failure_k(n: int) -> int:
    return math.isqrt(n)


# -- tiny-k lower-bound pairs ------------------------------------------------


def _tinyk_f1(k):
    def f1(S):
        s = len(S)
        if s < k:
            return 2 * s
        return 2 * k - 1 if s == k else 2 * k

    return f1


def _tinyk_f2(k, planted):
    def f2(S):
        s = len(S)
        if s < k:
            return 2 * s
        if s == k:
            return 2 * k if S == planted else 2 * k - 1
        return 2 * k

    return f2


def make_tinyk_pair(n: int, k: int, seed: int = 0) -> tuple[SetFunction, SetFunction]:
    """Symmetric f1 and its twin f2 that rewards one planted k-set S*.

    For k = 1 this is f1 = min(|S|, 2) against the variant with a special
    element worth 2.  ``f2.planted`` holds S*.
    """
    if k < 1 or n <= 2 * k:
        raise ValueError(f"need k >= 1 and n > 2k, got n={n}, k={k}")
    planted = frozenset(random.Random(seed).sample(range(n), k))
    f1 = FunctionOf(n, _tinyk_f1(k), kind="tinyk_f1", spec={"kind": "tinyk_f1", "n": n, "k": k})
    f2 = FunctionOf(n, _tinyk_f2(k, planted), kind="tinyk_f2",
                    spec={"kind": "tinyk_f2", "n": n, "k": k, "seed": seed})
    f2.planted = tuple(sorted(planted))
    return f1, f2


def tinyk_noise(n: int, k: int):
    """Noise for the tiny-k pair: 2k/(2k-1) w.p. n^(-1/2), else 1."""
    from .noise import TwoPoint

    return TwoPoint(p=n ** -0.5, hi=2 * k / (2 * k - 1), lo=1.0)


# -- correlated-noise impossibility ------------------------------------------


class UnitDemandRule(OracleRule):
    """Multiplier 1/M on sets holding the special element, 1 elsewhere."""

    def __init__(self, f: UnitDemand, special: int, M: float):
        self.f, self.special, self.M = f, special, M

    def __call__(self, S):
        v = self.f(S)
        return v / self.M if self.special in S else v


def make_unit_demand_correlated(n: int, M: float, special: int = 0) -> tuple[UnitDemand, UnitDemandRule]:
    if M <= 1:
        raise ValueError(f"M must exceed 1, got {M}")
    if not 0 <= special < n:
        raise IndexError("special element outside ground set")
    values = [1.0] * n
    values[special] = float(M)
    f = UnitDemand(values)
    return f, UnitDemandRule(f, special, M)


# -- JSON regeneration of parametric kinds -----------------------------------


def _load_adv(doc, which):
    pair = make_adversarial_pair(doc["n"], doc["delta"], doc["eps"], doc.get("seed", 0))
    return pair.f1 if which == 1 else pair.f2


def _load_tinyk(doc, which):
    f1, f2 = make_tinyk_pair(doc["n"], doc["k"], doc.get("seed", 0))
    return f1 if which == 1 else f2


PARAMETRIC = {
    "adversarial_f1": lambda d: _load_adv(d, 1),
    "adversarial_f2": lambda d: _load_adv(d, 2),
    "tinyk_f1": lambda d: _load_tinyk(d, 1),
    "tinyk_f2": lambda d: _load_tinyk(d, 2),
}


def generate(family: str, n: int, seed: int = 0, **params) -> SetFunction:
    """Build an instance by family name (the CLI ``generate`` entry point)."""
    if family == "coverage":
        return random_coverage(n, params.get("universe"), params.get("density", 0.15), seed)
    if family == "additive":
        return random_additive(n, seed, hi=params.get("hi", 20))
    if family == "unit_demand":
        return random_unit_demand(n, seed)
    if family == "greedy_failure":
        return make_noisy_greedy_failure(n)
    if family == "greedy_trap":
        return make_greedy_trap(max(1, n // 2), params.get("eps", 1 / 3),
                                num_a_sets=n - max(1, n // 2))[0]
    if family == "adversarial":
        return make_adversarial_pair(n, params.get("delta", 0.25), params.get("eps", 0.25), seed).f1
    if family == "tinyk":
        return make_tinyk_pair(n, params.get("k", 1), seed)[1]
    if family == "unit_demand_correlated":
        return make_unit_demand_correlated(n, params.get("M", 10.0))[0]
    raise ValueError(f"unknown family {family!r}")


FAMILIES = ("coverage", "additive", "unit_demand", "greedy_failure", "greedy_trap",
            "adversarial", "tinyk", "unit_demand_correlated")
