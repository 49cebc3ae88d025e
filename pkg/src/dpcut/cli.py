"""Command-line driver: ``dpcut {gen,run,compare,decompose,audit}``.

Exit codes: 0 ok, 1 configuration error, 2 runtime error, 3 a requested
check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .expander import OracleConfig, PsiBelowFloorError, expander_decompose
from .graph import GraphInputError, generate, load_edge_list, save_edge_list
from .harness import ConfigError, ExperimentConfig, compare_baselines, run
from .privacy import BudgetError, NoiseSource, NoiseSpec, PrivacyBudget, audit_scalar_mechanism

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3


def _kv(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _config_from_args(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
    if args.input:
        data["input"] = {"path": args.input}
    if args.generator:
        data["input"] = {"kind": args.generator, **_kv(args.param)}
    for name in ("mechanism", "epsilon", "delta", "alpha", "gamma", "eta", "k", "cut_sample_count",
                 "psi", "solver", "workers"):
        val = getattr(args, name, None)
        if val is not None:
            data[name] = val
    if args.seeds and "seeds" not in data:
        data["seeds"] = args.seeds
    if args.sweep_n:
        data["sweep_n"] = args.sweep_n
    if args.noiseless:
        data["noiseless"] = True
    if args.out:
        data["output_dir"] = args.out
    data.setdefault("mechanism", "pipeline")
    if "input" not in data:
        raise ConfigError("no input: give --config, --input or --generator")
    return ExperimentConfig.from_dict(data)


def _add_experiment_flags(p):
    p.add_argument("--config", help="JSON experiment config (its values win over --seeds)")
    p.add_argument("--input", help="edge-list file")
    p.add_argument("--generator", help="generator kind, parameters via --param key=value")
    p.add_argument("--param", action="append", help="generator parameter key=value")
    p.add_argument("--mechanism")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--psi", type=float)
    p.add_argument("--solver")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--sweep-n", dest="sweep_n", type=int, nargs="+")
    p.add_argument("--cut-sample-count", dest="cut_sample_count", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--noiseless", action="store_true", help="zero all privacy noise (not private)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--check-delta", action="store_true",
                   help="exit 3 if any row's max slack exceeds its budgeted additive error")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpcut", description="Private synthetic graphs for cut queries")
    sub = parser.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", help="write a generated graph as an edge list")
    g.add_argument("kind")
    g.add_argument("--param", action="append", help="key=value")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    for verb in ("run", "compare"):
        _add_experiment_flags(sub.add_parser(verb, help=f"{verb} an experiment"))

    d = sub.add_parser("decompose", help="private expander decomposition of an edge list")
    d.add_argument("--input", required=True)
    d.add_argument("--psi", type=float, required=True)
    d.add_argument("--epsilon", type=float, required=True)
    d.add_argument("--delta", type=float, required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--noiseless", action="store_true")
    d.add_argument("--out", required=True)

    a = sub.add_parser("audit", help="empirical epsilon of a scalar noise mechanism")
    a.add_argument("--family", choices=("laplace", "gaussian"), default="laplace")
    a.add_argument("--scale", type=float, required=True)
    a.add_argument("--sensitivity", type=float, default=1.0)
    a.add_argument("--trials", type=int, default=10**6)
    a.add_argument("--bins", type=int, default=50)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--expect-epsilon", type=float, help="exit 3 unless the estimate is within --tolerance")
    a.add_argument("--tolerance", type=float, default=0.1, help="relative tolerance for --expect-epsilon")
    a.add_argument("--out")
    return parser


def _write_json(path, obj):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _experiment(args, fn) -> int:
    cfg = _config_from_args(args)
    rep = fn(cfg)
    if cfg.output_dir:
        rep.write(cfg.output_dir)
    else:
        sys.stdout.write(rep.csv_text())
    if args.check_delta:
        bad = [r for r in rep.rows if r["max_slack"] is not None and r["delta_budgeted"] is not None
               and r["max_slack"] > r["delta_budgeted"]]
        if bad:
            print(f"check failed: {len(bad)} row(s) exceed the budgeted additive error", file=sys.stderr)
            return EXIT_CHECK
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "gen":
            g = generate(args.kind, seed=args.seed, **_kv(args.param))
            save_edge_list(g, args.out)
            return EXIT_OK
        if args.verb == "run":
            return _experiment(args, run)
        if args.verb == "compare":
            return _experiment(args, compare_baselines)
        if args.verb == "decompose":
            g = load_edge_list(args.input)
            dec = expander_decompose(g, args.psi, PrivacyBudget(args.epsilon, args.delta),
                                     NoiseSource(args.seed, noiseless=args.noiseless), OracleConfig())
            _write_json(args.out, dec.to_json())
            return EXIT_OK
        if args.verb == "audit":
            rep = audit_scalar_mechanism(NoiseSpec(args.family, args.scale, args.seed), args.sensitivity,
                                         args.trials, args.bins)
            out = rep.to_json()
            if args.out:
                _write_json(args.out, out)
            else:
                print(json.dumps(out, sort_keys=True))
            if args.expect_epsilon is not None:
                if abs(rep.epsilon_hat - args.expect_epsilon) > args.tolerance * args.expect_epsilon:
                    print(f"check failed: epsilon_hat {rep.epsilon_hat:.4f}", file=sys.stderr)
                    return EXIT_CHECK
            return EXIT_OK
    except (ConfigError, GraphInputError, BudgetError, PsiBelowFloorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - top-level report
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
