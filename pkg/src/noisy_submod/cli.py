"""Command-line entry point: ``noisy-submod <command> ...``.

Exit codes: 0 success, 1 a ``check`` found a violation, 2 configuration
error, 3 enumeration budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import algorithms as al
from . import generators as gen
from . import harness as hz
from .setfn import BudgetError, check_monotone, check_submodular, load

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _common(p):
    p.add_argument("--seed", type=int, default=None,
                   help="base seed; seed lists become seed, seed+1, ...")
    p.add_argument("--out", default=None, help="output path (directory for run/compare/scenario)")
    p.add_argument("--budget", type=int, default=None,
                   help=f"enumeration budget (default ${hz.BUDGET_ENV} or {hz.DEFAULT_BUDGET})")


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="noisy-submod", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    _common(r)

    c = sub.add_parser("check", help="exhaustively check monotonicity and submodularity")
    c.add_argument("instance")
    _common(c)

    g = sub.add_parser("generate", help="write an instance JSON")
    g.add_argument("family", choices=gen.FAMILIES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="family parameter, repeatable")
    _common(g)

    m = sub.add_parser("compare", help="several algorithms on one instance")
    m.add_argument("instance")
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--algos", default="greedy,auto,whp_small",
                   help="comma-separated algorithm tags")
    m.add_argument("--noise", default=None, help="noise spec as a JSON file or inline JSON")
    m.add_argument("--eps", type=float, default=0.5)
    m.add_argument("--seeds", type=int, default=5, help="number of seeds")
    m.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="extra AlgoConfig field, repeatable")
    m.add_argument("--baseline", choices=hz.BASELINES, default=None,
                   help="default: brute force when affordable, else exact greedy")
    _common(m)

    s = sub.add_parser("scenario", help="hardness demonstrations")
    s.add_argument("name", choices=("greedy_failure", "adversarial"))
    s.add_argument("--n", type=int, default=4096)
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--delta", type=float, default=0.25)
    s.add_argument("--query-budget", type=int, default=100)
    s.add_argument("--strategy", choices=tuple(hz.STRATEGIES), default="random_set")
    s.add_argument("--seeds", type=int, default=None, help="number of seeds")
    _common(s)
    return p


def _params(pairs) -> dict:
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep:
            raise hz.ConfigError(f"expected KEY=VALUE, got {item!r}")
        out[key] = _parse_value(value)
    return out


def _emit(report, out, summary):
    if out:
        csv_path, json_path = report.write(out)
        print(f"wrote {csv_path} and {json_path}")
    else:
        sys.stdout.write(report.to_csv())
    for algo, agg in summary.get("aggregate", {}).items():
        med = agg["median_ratio"]
        med = "n/a" if med is None else f"{med:.4f}"
        print(f"# {algo}: runs={agg['runs']} median_ratio={med} "
              f"mean_queries={agg['mean_queries']:.1f}", file=sys.stderr)


def cmd_run(a, budget):
    cfg = hz.ExperimentConfig.load(a.config)
    if a.seed is not None:
        cfg.seeds = [a.seed + i for i in range(len(cfg.seeds))]
    report = hz.run_experiment(cfg, budget)
    _emit(report, a.out, report.summary())
    return EXIT_OK


def cmd_check(a, budget):
    try:
        f = load(a.instance)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise hz.ConfigError(f"cannot load instance: {e}") from None
    if (1 << f.n) > budget:
        raise BudgetError(f"exhaustive check over 2^{f.n} sets exceeds budget {budget}")
    mono = check_monotone(f, limit_n=f.n)
    sub = check_submodular(f, limit_n=f.n)
    for name, res in (("monotone", mono), ("submodular", sub)):
        line = f"{name}: {'yes' if res else 'no'}"
        if not res:
            S, T, x = res.witness
            line += f" (witness S={list(S)} T={list(T)} element={x})"
        print(line)
    return EXIT_OK if mono and sub else EXIT_CHECK_FAILED


def cmd_generate(a, budget):
    params = _params(a.param)
    try:
        f = gen.generate(a.family, a.n, a.seed or 0, **params)
        doc = f.to_json()
    except (TypeError, ValueError, IndexError) as e:
        raise hz.ConfigError(str(e)) from None
    text = json.dumps(doc) + "\n"
    if a.out:
        Path(a.out).write_text(text)
        print(f"wrote {a.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _noise_arg(text):
    if text is None:
        return {"dist": {"kind": "constant", "c": 1.0}}
    path = Path(text)
    try:
        raw = path.read_text() if path.exists() else text
        return json.loads(raw)
    except (OSError, json.JSONDecodeError) as e:
        raise hz.ConfigError(f"cannot read noise spec: {e}") from None


def cmd_compare(a, budget):
    try:
        with open(a.instance) as fh:
            inst = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise hz.ConfigError(f"cannot read instance: {e}") from None
    base = a.seed or 0
    baseline = a.baseline
    if baseline is None:
        n = inst.get("n", 0) if isinstance(inst, dict) else 0
        baseline = "brute_force" if math.comb(n, min(a.k, n)) <= budget else "exact_greedy"
    doc = {"instance": inst, "algorithm": [t for t in a.algos.split(",") if t],
           "params": {"k": a.k, "eps": a.eps, **_params(a.param)},
           "seeds": list(range(base, base + a.seeds)), "noise": _noise_arg(a.noise),
           "baseline": baseline}
    report = hz.run_experiment(hz.ExperimentConfig.from_dict(doc), budget)
    summary = report.summary()
    if a.out:
        report.write(a.out)
    print(f"{'algo':<14}{'median':>10}{'mean':>10}{'min':>10}{'queries':>12}   baseline={summary['baseline']}")
    for algo, agg in summary["aggregate"].items():
        cells = [agg[x] for x in ("median_ratio", "mean_ratio", "min_ratio")]
        cells = ["n/a" if v is None else f"{v:.4f}" for v in cells]
        print(f"{algo:<14}{cells[0]:>10}{cells[1]:>10}{cells[2]:>10}{agg['mean_queries']:>12.1f}")
    return EXIT_OK


def cmd_scenario(a, budget):
    base = a.seed or 0
    if a.name == "greedy_failure":
        count = a.seeds or 50
        eps = 0.1 if a.eps is None else a.eps
        report = hz.scenario_greedy_failure(a.n, eps, range(base, base + count))
        _emit(report, a.out, report.summary())
        return EXIT_OK
    count = a.seeds or 200
    eps = 0.4 if a.eps is None else a.eps
    try:
        rep = hz.scenario_adversarial(a.n, a.delta, eps, a.query_budget, a.strategy,
                                      range(base, base + count))
    except ValueError as e:
        raise hz.ConfigError(str(e)) from None
    text = json.dumps(rep.summary(), indent=2, sort_keys=True) + "\n"
    if a.out:
        out = Path(a.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "check": cmd_check, "generate": cmd_generate,
            "compare": cmd_compare, "scenario": cmd_scenario}


def main(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG
    try:
        budget = a.budget if a.budget is not None else hz.default_budget()
        if budget < 1:
            raise hz.ConfigError("--budget must be positive")
        return COMMANDS[a.command](a, budget)
    except BudgetError as e:
        print(f"budget error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (hz.ConfigError, al.RegimeError, ValueError, IndexError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
