"""Monotone submodular maximization under a cardinality constraint with a
noisy value oracle."""
from .setfn import (Additive, BudgetError, Coverage, FunctionOf, SetFunction, UnitDemand,
                    brute_force_opt, check_monotone, check_submodular, evaluate, marginal)
from .noise import (Constant, ExactOracle, Gaussian, NoisyOracle, RuleOracle, Uniform,
                    noisy_eval, oracle_from_config, query_count)
from .algorithms import (AlgoConfig, RegimeError, RunResult, boosted_opt, exp_small_greedy, greedy,
                         select_regime, slick_greedy, sm_greedy, smooth_compare, smooth_greedy,
                         whp_small_greedy)

__version__ = "0.1.0"
