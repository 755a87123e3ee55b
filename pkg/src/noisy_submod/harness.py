"""Experiment orchestration: configs, seeded runs, baselines, scenarios, reports."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import random
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import algorithms as al
from . import generators as gen
from .noise import ExactOracle, NoisyOracle, RuleOracle, oracle_from_config, uniform_eps
from .setfn import BudgetError, SetFunction, brute_force_opt, from_json

CSV_HEADER = ("algo", "seed", "n", "k", "value", "baseline", "ratio", "queries", "ms")
BASELINES = ("brute_force", "exact_greedy", "none")
DEFAULT_BUDGET = 10 ** 7
BUDGET_ENV = "NOISY_SUBMOD_BUDGET"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{BUDGET_ENV} must be positive")
    return value


# -- configuration -----------------------------------------------------------

CONFIG_KEYS = {"instance", "noise", "algorithm", "params", "seeds", "baseline"}
PARAM_KEYS = {f.name for f in dataclasses.fields(al.AlgoConfig)} - {"seed", "budget"}


@dataclass
class ExperimentConfig:
    instance: SetFunction
    algorithms: list[str]
    params: dict
    seeds: list[int] = field(default_factory=lambda: [0])
    noise: dict | None = None
    baseline: str = "brute_force"

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str | Path | None = None) -> "ExperimentConfig":
        """Validate every field up front; unknown keys are errors."""
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("instance", "algorithm", "params"):
            if key not in doc:
                raise ConfigError(f"config is missing {key!r}")

        inst = doc["instance"]
        try:
            if isinstance(inst, str):
                path = Path(inst)
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                with open(path) as fh:
                    inst = json.load(fh)
            if not isinstance(inst, dict):
                raise ConfigError("instance must be an object or a file path")
            f = from_json(inst)
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"cannot load instance: {e}") from None

        algos = doc["algorithm"]
        algos = [algos] if isinstance(algos, str) else algos
        if not isinstance(algos, list) or not algos:
            raise ConfigError("algorithm must be a tag or a non-empty list of tags")
        for a in algos:
            if a not in al.ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}; choose from {', '.join(al.ALGORITHMS)}")

        params = doc["params"]
        if not isinstance(params, dict):
            raise ConfigError("params must be an object")
        bad = set(params) - PARAM_KEYS
        if bad:
            raise ConfigError(f"unknown params: {sorted(bad)}")
        if "k" not in params:
            raise ConfigError("params must set k")
        try:
            al.AlgoConfig(**params)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad params: {e}") from None
        if params["k"] > f.n:
            raise ConfigError(f"k={params['k']} exceeds n={f.n}")

        seeds = doc.get("seeds", [0])
        if not isinstance(seeds, list) or not seeds or not all(
                isinstance(s, int) and not isinstance(s, bool) for s in seeds):
            raise ConfigError("seeds must be a non-empty list of integers")
        if len(set(seeds)) != len(seeds):
            raise ConfigError("seeds must be distinct")

        noise = doc.get("noise")
        if noise is not None:
            try:
                oracle_from_config(f, noise, 0)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"bad noise spec: {e}") from None

        baseline = doc.get("baseline", "brute_force")
        if baseline not in BASELINES:
            raise ConfigError(f"baseline must be one of {BASELINES}")
        return cls(f, algos, dict(params), list(seeds), noise, baseline)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}") from None
        return cls.from_dict(doc, Path(path).parent)


# -- reports -----------------------------------------------------------------


@dataclass
class Row:
    algo: str
    seed: int
    n: int
    k: int
    value: float
    baseline: float | None
    ratio: float | None
    queries: int
    ms: float
    solution: tuple = ()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass
class ExperimentReport:
    rows: list[Row]
    baseline_kind: str
    baseline_value: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows.sort(key=lambda r: (r.algo, r.seed))

    def ratios(self, algo: str) -> list[float]:
        return [r.ratio for r in self.rows if r.algo == algo and r.ratio is not None]

    def aggregate(self) -> dict:
        out = {}
        for algo in sorted({r.algo for r in self.rows}):
            rows = [r for r in self.rows if r.algo == algo]
            ratios = self.ratios(algo)
            out[algo] = {
                "runs": len(rows),
                "mean_ratio": statistics.fmean(ratios) if ratios else None,
                "median_ratio": statistics.median(ratios) if ratios else None,
                "min_ratio": min(ratios) if ratios else None,
                "mean_queries": statistics.fmean(r.queries for r in rows),
            }
        return out

    def to_csv(self, with_ms: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER if with_ms else CSV_HEADER[:-1])
        for r in self.rows:
            cells = [r.algo, r.seed, r.n, r.k, _fmt(r.value), _fmt(r.baseline), _fmt(r.ratio),
                     r.queries]
            if with_ms:
                cells.append(f"{r.ms:.3f}")
            w.writerow(cells)
        return buf.getvalue()

    def summary(self) -> dict:
        return {"baseline": self.baseline_kind, "baseline_value": self.baseline_value,
                "aggregate": self.aggregate(), **self.meta}

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / "results.csv", out / "summary.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


# -- running -----------------------------------------------------------------


def compute_baseline(f: SetFunction, k: int, kind: str, budget: int) -> float | None:
    if kind == "none":
        return None
    if kind == "brute_force":
        return brute_force_opt(f, k, budget)[1]
    return al.greedy(ExactOracle(f), k).value


def _ratio(value, base):
    if base is None:
        return None
    if base == 0:
        return 1.0 if value == 0 else math.inf
    return value / base


def run_experiment(cfg: ExperimentConfig, budget: int | None = None) -> ExperimentReport:
    """One fresh oracle per (algorithm, seed); the oracle and algorithm share the seed."""
    budget = default_budget() if budget is None else budget
    f, k = cfg.instance, cfg.params["k"]
    base = compute_baseline(f, k, cfg.baseline, budget)
    rows = []
    for algo in cfg.algorithms:
        for seed in cfg.seeds:
            oracle = oracle_from_config(f, cfg.noise, seed)
            acfg = al.AlgoConfig(**cfg.params, seed=seed, budget=budget)
            t0 = time.perf_counter()
            res = al.run(algo, oracle, acfg)
            ms = (time.perf_counter() - t0) * 1e3
            rows.append(Row(algo, seed, f.n, k, res.value, base, _ratio(res.value, base),
                            res.queries, ms, res.solution))
    label = "exact_greedy_proxy" if cfg.baseline == "exact_greedy" else cfg.baseline
    return ExperimentReport(rows, label, base, {"n": f.n, "k": k, "noise": cfg.noise})


# -- scenarios ---------------------------------------------------------------


DEFAULT_SM_FAILURE = {"c": 2, "pool": 16, "swap_sample": 4}


def scenario_greedy_failure(n: int = 4096, eps: float = 0.1, seeds=range(50),
                            sm_params: dict | None = None) -> ExperimentReport:
    """Naive noisy greedy against SM-Greedy on the good/bad additive instance.

    OPT is known in closed form (all sqrt(n) good elements), so no brute force
    is needed.  SM-Greedy runs with a small bundle and the candidate-pool
    heuristic so that n = 4096 stays at desk scale.
    """
    f = gen.make_noisy_greedy_failure(n)
    k = gen.greedy_failure_k(n)
    opt = k * n ** 0.25
    dist = uniform_eps(eps)
    smp = {**DEFAULT_SM_FAILURE, **(sm_params or {})}
    rows = []
    for seed in seeds:
        for algo in ("greedy", "sm"):
            oracle = NoisyOracle(f, dist, seed=seed)
            t0 = time.perf_counter()
            if algo == "greedy":
                res = al.greedy(oracle, k)
            else:
                res = al.sm_greedy(oracle, k, 1.0, seed=seed, **smp)
            ms = (time.perf_counter() - t0) * 1e3
            rows.append(Row(algo, seed, n, k, res.value, opt, res.value / opt, res.queries, ms,
                            res.solution))
    return ExperimentReport(rows, "analytic_opt", opt,
                            {"scenario": "greedy_failure", "n": n, "k": k, "eps": eps,
                             "sm_params": smp})


# The distinguishing game.  A strategy gets a query function, the public
# parameters and a private RNG, and answers 1 or 2 for the function it thinks
# sits behind the oracle.

Strategy = Callable[..., int]


def _consistent_with_f2(query, f2, sets):
    return all(query(S) == f2(S) for S in sets)


def always_f2(query, pair, budget, rng) -> int:
    return 2


def random_singleton(query, pair, budget, rng) -> int:
    sets = [frozenset((rng.randrange(pair.n),)) for _ in range(budget)]
    return 2 if _consistent_with_f2(query, pair.f2, sets) else 1


def random_set(query, pair, budget, rng) -> int:
    size = min(pair.k, pair.n)
    sets = [frozenset(rng.sample(range(pair.n), size)) for _ in range(budget)]
    return 2 if _consistent_with_f2(query, pair.f2, sets) else 1


STRATEGIES = {"always_f2": always_f2, "random_singleton": random_singleton, "random_set": random_set}


@dataclass
class AdversarialReport:
    n: int
    delta: float
    eps: float
    query_budget: int
    strategy: str
    outcomes: list[dict]

    @property
    def success_rate(self) -> float:
        return statistics.fmean(o["correct"] for o in self.outcomes) if self.outcomes else math.nan

    def summary(self) -> dict:
        return {"scenario": "adversarial", "n": self.n, "delta": self.delta, "eps": self.eps,
                "query_budget": self.query_budget, "strategy": self.strategy,
                "trials": len(self.outcomes), "success_rate": self.success_rate}


def _truth(seed: int) -> int:
    # alternate by seed parity so consecutive seed ranges are exactly balanced
    return 1 if seed % 2 == 0 else 2


def scenario_adversarial(n: int = 4096, delta: float = 0.25, eps: float = 0.4,
                         query_budget: int = 100, strategy: str | Strategy = "random_set",
                         seeds=range(200)) -> AdversarialReport:
    """Distinguish f1 (behind the erroneous oracle) from f2 with few queries.

    Each seed plants a fresh hidden set, picks which function is real by seed
    parity, and lets the strategy spend up to ``query_budget``
    queries before guessing.
    """
    if callable(strategy):
        play, name = strategy, getattr(strategy, "__name__", "custom")
    elif strategy in STRATEGIES:
        play, name = STRATEGIES[strategy], strategy
    else:
        raise ConfigError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    outcomes = []
    for seed in seeds:
        pair = gen.make_adversarial_pair(n, delta, eps, seed)
        truth = _truth(seed)
        oracle = RuleOracle(pair.f1, pair.rule) if truth == 1 else ExactOracle(pair.f2)
        spent = 0

        def query(S, _o=oracle):
            nonlocal spent
            if spent >= query_budget:
                raise BudgetError(f"strategy exceeded its {query_budget}-query budget")
            spent += 1
            return _o(S)

        guess = play(query, pair, query_budget, random.Random(seed))
        outcomes.append({"seed": seed, "truth": truth, "guess": guess, "queries": spent,
                         "correct": guess == truth})
    return AdversarialReport(n, delta, eps, query_budget, name, outcomes)
