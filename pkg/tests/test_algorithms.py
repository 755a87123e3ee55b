import math
import random

import pytest
from hypothesis import given, strategies as st

from noisy_submod import algorithms as al
from noisy_submod import generators as gen
from noisy_submod import smoothing as sm
from noisy_submod.noise import Constant, ExactOracle, NoisyOracle, uniform_eps
from noisy_submod.setfn import Additive, BudgetError, Coverage, brute_force_opt


def noiseless(f, seed=0):
    return NoisyOracle(f, Constant(1.0), seed=seed)


def noisy(f, seed=0, eps=0.1):
    return NoisyOracle(f, uniform_eps(eps), seed=seed)


# -- greedy ------------------------------------------------------------------


def test_greedy_additive():
    res = al.greedy(ExactOracle(Additive([5, 3, 1])), 2)
    assert res.solution == (0, 1) and res.value == 8.0 and res.queries == 3 + 2


def test_greedy_ties_lowest_id():
    assert al.greedy(ExactOracle(Additive([1, 1, 1])), 2).solution == (0, 1)


def test_greedy_k_too_large():
    with pytest.raises(ValueError):
        al.greedy(ExactOracle(Additive([1, 2])), 3)


def test_greedy_frozen_noisy_run():
    f = gen.random_coverage(10, seed=1)
    res = al.greedy(noisy(f, seed=5), 3)
    assert res.solution == (0, 6, 9) and res.value == 11.0
    assert [t["score"] for t in res.trace] == [5.4692970058513755, 9.1694455907743,
                                               11.090995303348723]


# -- smooth greedy -----------------------------------------------------------


def test_smooth_greedy_without_h_is_greedy():
    f = gen.random_coverage(11, seed=4)
    a = al.greedy(ExactOracle(f), 4)
    b = al.smooth_greedy(noiseless(f), 4)
    assert a.solution == b.solution
    assert [t["score"] for t in a.trace] == [t["score"] for t in b.trace]


@pytest.mark.parametrize("seed", range(5))
def test_smooth_greedy_additive_top_weights(seed):
    f = gen.random_additive(12, seed=seed)
    H = (0, 1)
    res = al.smooth_greedy(noiseless(f), 6, H)
    rest = sorted((x for x in range(12) if x not in H), key=lambda x: (-f.weights[x], x))
    assert res.solution == tuple(sorted(rest[:4]))


def test_smooth_greedy_query_count_and_initial_set():
    f = gen.random_coverage(12, seed=2)
    o = noiseless(f)
    H, R, k = (0, 1, 2), (3,), 7
    res = al.smooth_greedy(o, k, H, R)
    steps = k - len(H) - len(R)
    expected = sum((12 - len(H) - len(R) - i) * 2 ** len(H) for i in range(steps))
    assert res.queries == expected == o.queries
    assert set(R) <= set(res.solution) and len(res.solution) == k - len(H)


def test_smooth_greedy_errors():
    f = Additive([1.0] * 6)
    with pytest.raises(ValueError):
        al.smooth_greedy(ExactOracle(f), 4, H=(0, 1), R=(1,))
    with pytest.raises(ValueError):
        al.smooth_greedy(ExactOracle(f), 3, H=(0, 1), R=(2,))


def test_smooth_greedy_bundle_scheme_keeps_averages_independent():
    f = gen.random_coverage(20, seed=3)
    o = NoisyOracle(f, uniform_eps(0.2), d=1, seed=1)
    fams = sm.bundle_families(range(6), 3, 1)  # bundles of 2 elements
    res = al.smooth_greedy(o, 9, bundles=fams)
    assert len(res.solution) == 3
    S = frozenset()
    for step in res.trace:
        for a in range(6, 20):
            if a in S:
                continue
            keys = [o._memo[S | X] for X in sm.bundle_subset_neighborhood(fams[0], a)]
            assert len(set(keys)) == len(keys)
        S = S | {step["chosen"]}


# -- smooth compare ----------------------------------------------------------


def test_smooth_compare_unanimous_and_ties():
    f = Additive([5, 1, 0, 0, 0, 0])
    assert al.smooth_compare(noiseless(f), (1,), (0,), (3, 4)) == (0,)
    assert al.smooth_compare(noiseless(f), (0,), (1,), (3, 4)) == (0,)
    assert al.smooth_compare(noiseless(f), (1,), (1,), (3, 4)) == (1,)
    # a 1-1 split goes to T_i
    assert al.smooth_compare(noiseless(Additive([1, 1, 0])), (0,), (1,), (2,)) == (0,)


def test_smooth_compare_query_counts():
    f = gen.random_coverage(8, seed=1)
    o = noiseless(f)
    al.smooth_compare(o, (0,), (1,), (2, 3, 4))
    assert o.queries == 2 * (2 ** 3 - 1)
    o.reset()
    al.smooth_compare(o, (0,), (1,), (2, 3, 4), proper=False)
    assert o.queries == 2 * 2 ** 3


def test_smooth_compare_overlap():
    with pytest.raises(ValueError):
        al.smooth_compare(ExactOracle(Additive([1, 1, 1])), (0,), (1,), (1, 2))


# -- slick -------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(4))
def test_slick_half_opt_noiseless(seed):
    f = gen.random_coverage(16, seed=seed)
    k = 8
    res = al.slick_greedy(noiseless(f), k, 1.0, ell=1, force=True)
    assert len(res.solution) == k
    assert res.value >= 0.5 * brute_force_opt(f, k)[1]


def test_slick_disjointness_from_trace():
    f = gen.random_coverage(24, seed=7)
    res = al.slick_greedy(noisy(f, 2), 9, 1.0, ell=1, force=True)
    Hs = [set(t["H"]) for t in res.trace]
    for i in range(len(Hs)):
        for j in range(i + 1, len(Hs)):
            assert not Hs[i] & Hs[j]
    incumbent = set(res.trace[0]["T"])
    for t in res.trace[1:]:
        assert not set(t["H_cmp"]) & (incumbent | set(t["T"]))
        if t["kept"] == "challenger":
            incumbent = set(t["T"])
    assert incumbent == set(res.solution)


def test_slick_regime_guard_and_rounding():
    f = gen.random_coverage(24, seed=1)
    with pytest.raises(al.RegimeError):
        al.slick_greedy(noiseless(f), 8, 1.0, ell=1)
    assert al.num_smoothing_sets(0.7) == 9
    assert al.num_smoothing_sets(1.0, delta=0.3) == 4
    with pytest.raises(al.RegimeError):
        al.slick_greedy(noiseless(f), 4, 1.0, ell=1, force=True)


def test_slick_shrinks_ell(caplog):
    f = gen.random_coverage(40, seed=1)
    res = al.slick_greedy(noiseless(f), 13, 1.0, ell=5, force=True)
    assert res.info["ell"] == 2 and "shrinking" in caplog.text


def test_slick_d_correlated_runs():
    f = gen.random_coverage(40, seed=2)
    o = NoisyOracle(f, uniform_eps(0.1), d=1, seed=3)
    res = al.slick_greedy(o, 14, 1.0, ell=1, d=1, force=True)
    assert len(res.solution) == 14


# -- SM-Greedy ---------------------------------------------------------------


def reference_sm(f, n, k, c):
    """Direct transcription of the bundle loop with exact values."""
    import itertools
    S = ()
    while len(S) < c * (k // c):
        rest = [x for x in range(n) if x not in S]

        def swaps(B):
            return [tuple(sorted(set(S) | (set(B) - {i}) | {j}))
                    for i in sorted(B) for j in rest if j not in B]

        def mean(B):
            vals = [f(X) for X in swaps(B)]
            return math.fsum(vals) / len(vals)

        A = max(itertools.combinations(rest, c), key=lambda B: (mean(B), [-x for x in B]))
        S = max(swaps(A), key=lambda X: (f(X), [-x for x in X]))
    return S


@pytest.mark.parametrize("seed", range(8))
def test_sm_greedy_matches_reference(seed):
    f = gen.random_additive(6, seed=seed, hi=1000)
    res = al.sm_greedy(noiseless(f), 4, 1.0, c=2)
    assert res.solution == reference_sm(f, 6, 4, 2)


def test_sm_greedy_refinement_never_keeps_the_argmax_bundle():
    # the added bundle is always a one-swap neighbor of A, so with weights
    # 6 > 5 > ... the top pair {0, 1} is never added as a whole
    f = Additive([6, 5, 4, 3, 2, 1])
    res = al.sm_greedy(noiseless(f), 2, 1.0, c=2)
    assert res.trace[0]["bundle"] == (0, 1) and res.solution == (0, 2)


@pytest.mark.parametrize("seed", range(5))
def test_sm_greedy_noiseless_quality(seed):
    f = gen.random_instance(10, seed)
    res = al.sm_greedy(noiseless(f), 4, 1.0, c=2)
    assert res.value >= 0.5 * brute_force_opt(f, 4)[1]


def test_sm_bundle_rules():
    assert al.sm_bundle_size(20, 1.0) == 16
    assert al.sm_bundle_size(8, 4.0) == 4
    assert al.sm_bundle_size(6, 4.0, d=4) == 4
    assert al.sm_bundle_size(40, 0.5) == 32
    with pytest.raises(al.RegimeError):
        al.sm_bundle_size(3, 1.0)
    with pytest.raises(al.RegimeError):
        al.sm_greedy(noiseless(Additive([1.0] * 8)), 3, 0.5)


def test_sm_single_iteration_band():
    # with eps = 0.05 the band is 320 <= k < 400; there a single k-bundle is taken
    assert al.sm_bundle_size(350, 0.05) == 350
    assert al.sm_bundle_size(400, 0.05) == 320


def test_sm_query_count_per_iteration():
    f = gen.random_coverage(9, seed=3)
    o = noiseless(f)
    res = al.sm_greedy(o, 4, 1.0, c=2)
    expected = 0
    s = 0
    for _ in range(2):
        t = 2 * (9 - s - 2)
        expected += math.comb(9 - s, 2) * t + t
        s += 2
    assert res.queries == expected == o.queries


def test_sm_pool_and_partition_modes():
    f = gen.random_coverage(30, seed=5)
    res = al.sm_greedy(noisy(f, 1), 6, 1.0, c=2, pool=8, swap_sample=5)
    assert len(res.solution) == 6
    o = NoisyOracle(f, uniform_eps(0.1), d=2, seed=4)
    res = al.sm_greedy(o, 8, 1.0, c=3, d=2)
    assert res.info["c"] == 4 and len(res.solution) == 8


def test_sm_budget():
    with pytest.raises(BudgetError):
        al.sm_greedy(noiseless(gen.random_coverage(40, seed=1)), 6, 1.0, c=3, budget=1000)


# -- very small k ------------------------------------------------------------


def test_exp_small_basics():
    f = Additive([5, 1, 1])
    res = al.exp_small_greedy(noiseless(f), 1, rng=0)
    assert len(res.solution) == 1 and res.trace[0]["bundle"] == (0,)
    full = al.exp_small_greedy(noiseless(f), 3, rng=1)
    assert full.solution == (0, 1, 2)
    with pytest.raises(ValueError):
        al.exp_small_greedy(noiseless(f), 0)


def test_exp_small_accepts_random_instance():
    f = gen.random_coverage(8, seed=2)
    a = al.exp_small_greedy(noiseless(f), 2, random.Random(5))
    b = al.exp_small_greedy(noiseless(f), 2, 5)
    assert a.solution == b.solution


def test_whp_small_k1_is_singleton_argmax():
    f = Additive([2, 7, 7, 1])
    o = noiseless(f)
    res = al.whp_small_greedy(o, 1)
    assert res.solution == (1,) and res.queries == 4


@pytest.mark.parametrize("seed", range(10))
def test_whp_small_noiseless_skeleton(seed):
    f = gen.random_instance(10, seed)
    for k in (2, 3):
        res = al.whp_small_greedy(noiseless(f), k)
        assert len(res.solution) == k
        assert res.value >= (1 - 1 / k) * brute_force_opt(f, k)[1] - 1e-9


def test_small_budget():
    with pytest.raises(BudgetError):
        al.whp_small_greedy(noiseless(Additive([1.0] * 30)), 5, budget=10 ** 4)


# -- dispatch and boost ------------------------------------------------------


def test_select_regime_examples():
    assert al.select_regime(10 ** 6, 2, 0.5).tag == "very_small"
    thr = al.slick_threshold(10 ** 6, 0.5)
    assert al.select_regime(10 ** 6, math.ceil(thr), 0.5).tag == "slick"
    assert al.select_regime(10 ** 6, 40, 0.5).tag == "sm"
    reg = al.select_regime(10 ** 6, 40, 0.5)
    assert reg.c == 32 and reg.delta == pytest.approx(1 / 12)


@given(st.integers(2, 10 ** 7), st.integers(0, 10 ** 5), st.floats(0.01, 1.0))
def test_select_regime_total(n, k, eps):
    reg = al.select_regime(n, k, eps)
    assert reg.tag in ("slick", "sm", "very_small")
    assert (reg.tag == "slick") == (k >= reg.slick_threshold)


def test_auto_ell():
    assert al.auto_ell(100, 5) == math.ceil(33 * math.log(math.log(100)))
    n = 50
    assert al.auto_ell(n, math.ceil(2400 * math.log(n))) == math.ceil(25 * math.log(n))


def test_boosted_r_rule_and_probes():
    f = gen.random_coverage(20, seed=1)
    res = al.boosted_opt(noiseless(f), 5, 10, inner="greedy")
    assert res.info["r"] == 1 and len(res.trace[0]["probes"]) == 10
    G = set(res.trace[0]["inner"])
    best = max(res.trace[0]["probes"], key=lambda p: p[1])
    assert set(res.solution) == G | set(best[0])
    assert res.value == max(f(G | set(p[0])) for p in res.trace[0]["probes"])
    one = al.boosted_opt(noiseless(f), 5, 1, inner="greedy")
    assert len(one.trace[0]["probes"]) == 1
    assert al.boosted_opt(noiseless(f), 5, 100, inner="greedy").info["r"] == 2


def test_run_dispatch():
    f = gen.random_coverage(12, seed=3)
    cfg = al.AlgoConfig(k=3, eps=0.5)
    assert al.run("auto", noiseless(f), cfg).algo == "whp_small"
    assert al.run("smooth_greedy", noiseless(f), al.AlgoConfig(k=3, ell=2)).solution
    with pytest.raises(ValueError):
        al.run("nope", noiseless(f), cfg)


# -- invariants --------------------------------------------------------------


def _small_instance(seed):
    rng = random.Random(seed)
    return gen.random_instance(rng.randint(6, 12), seed), rng.randint(1, 4)


@given(st.integers(0, 10 ** 6))
def test_noiseless_equivalence(seed):
    f, k = _small_instance(seed)
    for run in (lambda o: al.greedy(o, k),
                lambda o: al.smooth_greedy(o, k),
                lambda o: al.whp_small_greedy(o, k),
                lambda o: al.sm_greedy(o, k, 1.0, c=1)):
        a, b = run(ExactOracle(f)), run(noiseless(f, seed))
        assert (a.solution, a.trace, a.queries) == (b.solution, b.trace, b.queries)


@given(st.integers(0, 10 ** 6))
def test_budget_honesty_and_monotone_traces(seed):
    f, k = _small_instance(seed)
    for res in (al.greedy(noisy(f, seed), k), al.smooth_greedy(noisy(f, seed), k),
                al.sm_greedy(noisy(f, seed), k, 1.0, c=1),
                al.whp_small_greedy(noisy(f, seed), k),
                al.exp_small_greedy(noisy(f, seed), k, seed)):
        assert len(res.solution) <= k
        vals = [t["value"] for t in res.trace]
        assert vals == sorted(vals)


def test_determinism():
    f = gen.random_coverage(14, seed=9)
    for run in (lambda o: al.greedy(o, 4), lambda o: al.sm_greedy(o, 4, 1.0, c=2),
                lambda o: al.slick_greedy(o, 8, 1.0, ell=1, force=True),
                lambda o: al.exp_small_greedy(o, 2, 3)):
        assert run(noisy(f, 11)) == run(noisy(f, 11))


def test_classic_guarantee_sample():
    for seed in range(20):
        f = gen.random_instance(10, seed)
        for k in (2, 4):
            assert al.greedy(ExactOracle(f), k).value >= (1 - 1 / math.e) * brute_force_opt(f, k)[1] - 1e-9


def test_coverage_example_matches_brute_force():
    f = Coverage([[1, 2], [2, 3], [1]])
    assert al.greedy(ExactOracle(f), 2).value == brute_force_opt(f, 2)[1] == 3.0
