"""Greedy-family maximizers for monotone submodular f under |S| <= k,
driven through a (possibly noisy) oracle.

Every argmax scans candidates in lexicographic order of their canonical sets
and keeps the first maximum, so ties go to the lexicographically smallest set
and runs are reproducible bit for bit.
"""
from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field

from . import smoothing as sm
from .setfn import BudgetError, ElemSet

log = logging.getLogger(__name__)


class RegimeError(ValueError):
    """Parameters fall outside the regime an algorithm is defined for."""


@dataclass
class AlgoConfig:
    k: int
    eps: float = 0.5
    ell: int | None = None          # smoothing-set size; None = auto rule
    delta: float | None = None      # Slick partition parameter; None = eps / 6
    c: int | None = None            # SM bundle size; None = ceil(16 / eps)
    subset_cap: int = sm.SUBSET_CAP
    subset_sample: int | None = sm.SUBSET_SAMPLE
    pool: int | None = None         # SM candidate pool (heuristic, off by default)
    swap_sample: int | None = None  # SM: average over a sample of the swap family
    proper_compare: bool = True
    d: int = 0                      # correlated-noise schemes when > 0
    force: bool = False             # run Slick outside its asymptotic regime
    budget: int = 10 ** 7
    seed: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


@dataclass
class RunResult:
    algo: str
    solution: ElemSet
    value: float                    # true f(solution)
    queries: int
    trace: list = field(default_factory=list)
    noisy_value: float | None = None
    info: dict = field(default_factory=dict)


def _sorted(S) -> ElemSet:
    return tuple(sorted(S))


def _result(algo, oracle, S, q0, trace, **info) -> RunResult:
    noisy = info.pop("noisy_value", None)
    return RunResult(algo, _sorted(S), oracle.true_value(S), oracle.queries - q0, trace,
                     noisy, info)


def _loglog(n: int) -> float:
    # ln ln n, floored at 1 so tiny ground sets do not flip the thresholds' sign
    return math.log(max(math.log(n), math.e))


def auto_ell(n: int, k: int) -> int:
    if k >= 2400 * math.log(n):
        return math.ceil(25 * math.log(n))
    return math.ceil(33 * _loglog(n))


def num_smoothing_sets(eps: float, delta: float | None = None) -> int:
    """1/delta for delta = eps/6, with delta rounded down to a unit fraction."""
    delta = eps / 6 if delta is None else delta
    return max(1, math.ceil(1 / delta - 1e-9))


# -- classic greedy ----------------------------------------------------------


def greedy(oracle, k: int) -> RunResult:
    """k rounds of argmax over f~(S + a)."""
    n = oracle.n
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    q0 = oracle.queries
    S = frozenset()
    trace = []
    for step in range(k):
        best, best_v = None, -math.inf
        for a in range(n):
            if a in S:
                continue
            v = oracle(S | {a})
            if v > best_v:
                best, best_v = a, v
        S = S | {best}
        trace.append({"step": step, "chosen": best, "score": best_v,
                      "value": oracle.true_value(S)})
    return _result("greedy", oracle, S, q0, trace,
                   noisy_value=trace[-1]["score"] if trace else None)


# -- large k -----------------------------------------------------------------


def smooth_greedy(oracle, k: int, H=(), R=(), *, bundles=None, cap: int = sm.SUBSET_CAP,
                  sample: int | None = sm.SUBSET_SAMPLE, seed: int = 0) -> RunResult:
    """Greedy on the noisy smooth value: average f~(S | H' | a) over subsets H' of H.

    Starts from S = R and adds elements outside H until |S| = k - |H|.  The
    returned solution is S; callers add H themselves.  ``bundles`` replaces H
    by d families of disjoint bundles used in rotation (one family per
    iteration), for d-correlated noise.
    """
    n = oracle.n
    if bundles is None:
        families = [[(h,) for h in sorted(set(H))]]
    else:
        families = [[tuple(b) for b in fam] for fam in bundles]
    Hall = frozenset(x for fam in families for b in fam for x in b)
    R = frozenset(R)
    if Hall & R:
        raise ValueError("smoothing set and initial set overlap")
    if len(Hall) + len(R) >= k:
        raise ValueError(f"|H| + |R| = {len(Hall) + len(R)} leaves no room under k={k}")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    q0 = oracle.queries
    S = R
    target = k - len(Hall)
    trace = []
    it = 0
    while len(S) < target:
        fam = families[it % len(families)]
        best, best_v = None, -math.inf
        for a in range(n):
            if a in S or a in Hall:
                continue
            nb = sm.bundle_subset_neighborhood(fam, a, cap=cap, sample=sample, seed=seed)
            v = sm.smooth_value(oracle, S, nb)
            if v > best_v:
                best, best_v = a, v
        S = S | {best}
        trace.append({"step": it, "chosen": best, "score": best_v,
                      "value": oracle.true_value(S)})
        it += 1
    return _result("smooth_greedy", oracle, S, q0, trace, H=_sorted(Hall), R=_sorted(R))


def _compare(oracle, Ti, Tj, Hij, proper=True, bundles=None):
    Ti, Tj = frozenset(Ti), frozenset(Tj)
    blocks = [(h,) for h in sorted(set(Hij))] if bundles is None else bundles
    nb = sm.bundle_subset_neighborhood(blocks, None, proper=proper)
    if nb.source["bundles"] and frozenset().union(*map(frozenset, blocks)) & (Ti | Tj):
        raise ValueError("comparison set must avoid both candidates")
    wins = total = 0
    for Hp in nb:
        vi = oracle(Ti | Hp)
        vj = oracle(Tj | Hp)
        total += 1
        wins += vi >= vj
    winner = Ti if 2 * wins >= total else Tj
    return winner, wins, total


def smooth_compare(oracle, Ti, Tj, Hij, *, proper: bool = True, bundles=None) -> ElemSet:
    """Majority vote of f~(Ti | H') >= f~(Tj | H') over subsets H' of Hij.

    Ti wins ties within a comparison and also wins a split vote.  ``proper``
    ranges over proper subsets only (the empty set included).
    """
    return _sorted(_compare(oracle, Ti, Tj, Hij, proper, bundles)[0])


def slick_threshold(n: int, eps: float) -> float:
    return 3168 * _loglog(n) / eps ** 2


def slick_greedy(oracle, k: int, eps: float, *, ell: int | None = None,
                 delta: float | None = None, d: int = 0, force: bool = False,
                 proper: bool = True, cap: int = sm.SUBSET_CAP,
                 sample: int | None = sm.SUBSET_SAMPLE, seed: int = 0) -> RunResult:
    """Smooth-Greedy from 1/delta disjoint smoothing sets, each run seeded with
    the union of the others, then a Smooth-Compare tournament."""
    n = oracle.n
    if not force and k < slick_threshold(n, eps):
        raise RegimeError(f"k={k} is below the large-k threshold {slick_threshold(n, eps):.0f}")
    m = num_smoothing_sets(eps, delta)
    if ell is None:
        ell = auto_ell(n, k)
    width = d * (d + 1) if d else 1  # elements per smoothing unit
    if m * ell * width >= k:
        shrunk = (k - 1) // (m * width)
        if shrunk < 1:
            raise RegimeError(f"k={k} cannot fit {m} smoothing sets plus one greedy pick")
        log.warning("slick: shrinking ell from %d to %d so %d smoothing sets fit under k=%d",
                    ell, shrunk, m, k)
        ell = shrunk
    block = ell * width
    if m * block > n:
        raise RegimeError(f"n={n} is too small for {m} smoothing sets of {block} elements")
    q0 = oracle.queries
    Hs = [tuple(range(j * block, (j + 1) * block)) for j in range(m)]
    everything = frozenset(range(m * block))
    Ti = frozenset()
    trace = []
    for j, Hj in enumerate(Hs):
        Rj = everything - frozenset(Hj)
        bundles = sm.bundle_families(Hj, ell, d) if d else None
        run = smooth_greedy(oracle, k, Hj, Rj, bundles=bundles, cap=cap, sample=sample, seed=seed)
        Tj = frozenset(run.solution) | frozenset(Hj)
        if j == 0:
            Ti = Tj
            trace.append({"step": j, "H": Hj, "T": _sorted(Tj), "T_value": oracle.true_value(Tj),
                          "H_cmp": (), "wins": 0, "comparisons": 0, "kept": "challenger"})
            continue
        free = [x for x in range(n) if x not in Ti and x not in Tj]
        if len(free) < block:
            raise RegimeError(f"n={n} leaves no room for a comparison set of size {block}")
        Hij = free[:block]
        cmp_bundles = sm.chunk(Hij, d + 1) if d else None
        winner, wins, total = _compare(oracle, Ti, Tj, Hij, proper, cmp_bundles)
        trace.append({"step": j, "H": Hj, "T": _sorted(Tj), "T_value": oracle.true_value(Tj),
                      "H_cmp": tuple(Hij), "wins": wins, "comparisons": total,
                      "kept": "incumbent" if winner is Ti else "challenger"})
        Ti = winner
    return _result("slick", oracle, Ti, q0, trace, ell=ell, m=m)


# -- small k -----------------------------------------------------------------


def sm_bundle_size(k: int, eps: float, c: int | None = None, d: int = 0) -> int:
    if c is None:
        c = math.ceil(16 / eps - 1e-9)
        if c <= k < math.ceil(1 / eps ** 2 - 1e-9):
            c = k  # single-iteration band: k in Omega(1/eps) and O(1/eps^2)
    if d:
        c = math.ceil(c / d) * d
    if c > k:
        raise RegimeError(f"bundle size c={c} exceeds k={k}")
    if c < 1:
        raise RegimeError("bundle size must be positive")
    return c


def sm_greedy(oracle, k: int, eps: float, *, c: int | None = None, pool: int | None = None,
              swap_sample: int | None = None, d: int = 0, budget: int = 10 ** 7,
              seed: int = 0) -> RunResult:
    """Bundle greedy on the sampled mean.

    Each round picks the c-bundle A with the largest noisy mean over its swap
    neighborhood, then adds the single neighbor A_ij whose own noisy value is
    largest.  ``pool`` restricts bundles to the top-``pool`` elements by noisy
    singleton value (a heuristic for large n); ``swap_sample`` averages over a
    seeded sample of each swap family; ``d`` swaps whole d-groups instead.
    """
    n = oracle.n
    c = sm_bundle_size(k, eps, c, d)
    q0 = oracle.queries
    single = None
    if pool is not None:
        single = [oracle(frozenset((a,))) for a in range(n)]
    S = frozenset()
    target = c * (k // c)
    trace = []
    it = 0
    while len(S) < target:
        rest = [a for a in range(n) if a not in S]
        if n - len(S) - c < (d or 1):
            raise RegimeError(f"no swap candidates left at |S|={len(S)}, c={c}, n={n}")
        if single is not None:
            cand = sorted(sorted(rest, key=lambda a: -single[a])[:max(pool, c)])
        else:
            cand = rest
        t_full = c * (n - len(S) - c)
        t_used = min(t_full, swap_sample) if swap_sample else t_full
        cost = math.comb(len(cand), c) * t_used + t_full
        if cost > budget:
            raise BudgetError(f"SM-Greedy round needs {cost} queries, budget is {budget}")

        def nbhd(B, sample=None):
            if d:
                return sm.partition_swap_neighborhood(B, S, n, d)
            return sm.swap_neighborhood(B, S, n, sample=sample, seed=seed + it)

        A, A_score = None, -math.inf
        for B in itertools.combinations(cand, c):
            v = sm.smooth_value(oracle, S, nbhd(B, swap_sample))
            if v > A_score:
                A, A_score = B, v
        best, best_v = None, -math.inf
        for X in nbhd(A):
            v = oracle(S | X)
            if v > best_v or (v == best_v and _sorted(X) < _sorted(best)):
                best, best_v = X, v
        S = S | best
        trace.append({"step": it, "bundle": A, "score": A_score, "chosen": _sorted(best),
                      "chosen_noisy": best_v, "value": oracle.true_value(S)})
        it += 1
    return _result("sm", oracle, S, q0, trace, c=c)


# -- very small k ------------------------------------------------------------


def _best_extension_set(oracle, size, budget):
    n = oracle.n
    cost = math.comb(n, size) * (n - size)
    if cost > budget:
        raise BudgetError(f"enumerating {math.comb(n, size)} sets of size {size} "
                          f"costs {cost} queries, budget is {budget}")
    A, A_score = None, -math.inf
    for B in itertools.combinations(range(n), size):
        v = sm.smooth_value(oracle, (), sm.extension_neighborhood(B, n))
        if v > A_score:
            A, A_score = B, v
    return frozenset(A), A_score


def exp_small_greedy(oracle, k: int, rng=None, *, budget: int = 10 ** 7) -> RunResult:
    """Best k-set by noisy mean over one-element extensions, then a uniformly
    random k-subset of that set plus a uniformly random outside element.

    The guarantee holds in expectation over ``rng`` (a Random or an int seed).
    """
    n = oracle.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    q0 = oracle.queries
    if k == n:
        S = frozenset(range(n))
        return _result("exp_small", oracle, S, q0, [])
    A, A_score = _best_extension_set(oracle, k, budget)
    x = rng.choice([y for y in range(n) if y not in A])
    S = frozenset(rng.sample(sorted(A | {x}), k))
    trace = [{"step": 0, "bundle": _sorted(A), "score": A_score, "extra": x,
              "value": oracle.true_value(S)}]
    return _result("exp_small", oracle, S, q0, trace)


def whp_small_greedy(oracle, k: int, *, budget: int = 10 ** 7) -> RunResult:
    """Best (k-1)-set by noisy mean over one-element extensions, completed by
    the extension with the largest single noisy value."""
    n = oracle.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    q0 = oracle.queries
    if k == 1:
        A, A_score = frozenset(), None
    else:
        A, A_score = _best_extension_set(oracle, k - 1, budget)
    best, best_v = None, -math.inf
    for x in range(n):
        if x in A:
            continue
        v = oracle(A | {x})
        if v > best_v:
            best, best_v = x, v
    S = A | {best}
    trace = [{"step": 0, "bundle": _sorted(A), "score": A_score, "chosen": best,
              "chosen_noisy": best_v, "value": oracle.true_value(S)}]
    return _result("whp_small", oracle, S, q0, trace)


# -- dispatch ----------------------------------------------------------------


@dataclass(frozen=True)
class Regime:
    tag: str            # "slick" | "sm" | "very_small"
    ell: int
    delta: float
    c: int
    slick_threshold: float


def select_regime(n: int, k: int, eps: float) -> Regime:
    thr = slick_threshold(n, eps)
    c = math.ceil(16 / eps - 1e-9)
    if k >= thr:
        tag = "slick"
    elif k >= c:
        tag = "sm"
    else:
        tag = "very_small"
    return Regime(tag, auto_ell(n, k), 1 / num_smoothing_sets(eps), c, thr)


def boosted_opt(oracle, k: int, t: int, inner: str = "auto",
                cfg: AlgoConfig | None = None) -> RunResult:
    """Maximize f~ itself: solve with budget k - r, then probe t distinct
    r-element extensions and keep the one with the largest noisy value.

    r is the smallest positive integer with C(n - k, r) >= t.
    """
    n = oracle.n
    if t < 1:
        raise ValueError("t must be positive")
    r = 1
    while math.comb(n - k, r) < t:
        r += 1
        if r > n - k:
            raise RegimeError(f"no r with C({n - k}, r) >= {t}")
    if r >= k:
        raise RegimeError(f"r={r} leaves no budget for the inner algorithm (k={k})")
    base = cfg or AlgoConfig(k=k)
    inner_cfg = AlgoConfig(**{**base.__dict__, "k": k - r})
    q0 = oracle.queries
    G = frozenset(run(inner, oracle, inner_cfg).solution)
    outside = [x for x in range(n) if x not in G]
    best, best_v = None, -math.inf
    probes = []
    for ext in itertools.islice(itertools.combinations(outside, r), t):
        v = oracle(G | frozenset(ext))
        probes.append((ext, v))
        if v > best_v:
            best, best_v = ext, v
    S = G | frozenset(best)
    trace = [{"step": 0, "inner": _sorted(G), "probes": probes, "chosen": best,
              "value": oracle.true_value(S)}]
    return _result("boosted", oracle, S, q0, trace, r=r, noisy_value=best_v)


ALGORITHMS = ("greedy", "smooth_greedy", "slick", "sm", "exp_small", "whp_small", "auto")


def run(tag: str, oracle, cfg: AlgoConfig) -> RunResult:
    """Run an algorithm by tag.  ``auto`` picks by regime."""
    n, k = oracle.n, cfg.k
    if tag == "auto":
        regime = select_regime(n, k, cfg.eps).tag
        tag = "whp_small" if regime == "very_small" else regime
    if tag == "greedy":
        return greedy(oracle, k)
    if tag == "smooth_greedy":
        ell = cfg.ell if cfg.ell is not None else auto_ell(n, k)
        if k - ell <= 0:
            log.warning("smooth_greedy: shrinking ell from %d to %d for k=%d", ell, k // 2, k)
            ell = k // 2
        H = tuple(range(ell))
        res = smooth_greedy(oracle, k, H, cap=cfg.subset_cap, sample=cfg.subset_sample,
                            seed=cfg.seed)
        res.solution = _sorted(set(res.solution) | set(H))
        res.value = oracle.true_value(res.solution)
        return res
    if tag == "slick":
        return slick_greedy(oracle, k, cfg.eps, ell=cfg.ell, delta=cfg.delta, d=cfg.d,
                            force=cfg.force, proper=cfg.proper_compare, cap=cfg.subset_cap,
                            sample=cfg.subset_sample, seed=cfg.seed)
    if tag == "sm":
        return sm_greedy(oracle, k, cfg.eps, c=cfg.c, pool=cfg.pool,
                         swap_sample=cfg.swap_sample, d=cfg.d, budget=cfg.budget,
                         seed=cfg.seed)
    if tag == "exp_small":
        return exp_small_greedy(oracle, k, cfg.seed, budget=cfg.budget)
    if tag == "whp_small":
        return whp_small_greedy(oracle, k, budget=cfg.budget)
    raise ValueError(f"unknown algorithm {tag!r}")
