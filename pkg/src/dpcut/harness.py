"""Experiment configs, cut-error evaluation and report files.

A run executes one mechanism per seed (and per ``n`` when sweeping) and
scores the released graph against the input on a fixed cut family:
every cut when ``n <= 16``, otherwise ``cut_sample_count`` uniform random
cuts plus all singletons plus all prefixes of the degree order. The same
family is used for every mechanism given the same seed, so comparisons
are paired.

Reports are deterministic functions of (config, seed). Wall-clock times
go to a separate ``timing.json`` so the CSV and JSON stay bit-identical
across repeats.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import applications as apps
from .dense import dense_synth, laplace_baseline
from .expander import expander_decompose
from .graph import WeightedGraph, cut_weight_matrix, generate, load_edge_list
from .pipeline import PipelineConstants, dp_cut_synth, dp_sparse_pipeline, delta_budget
from .privacy import NoiseSource, PrivacyBudget
from .sparse import sparse_synth

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ErrorReport",
    "CSV_COLUMNS",
    "MECHANISMS",
    "SEED_ENV",
    "evaluation_cuts",
    "cut_errors",
    "fit_exponent",
    "run",
    "compare_baselines",
    "report_schema",
]

SEED_ENV = "DPCUT_SEED"
ALL_CUTS_MAX_N = 16
MECHANISMS = (
    "laplace_baseline", "dense", "sparse", "pipeline", "sparse_pipeline", "decompose",
    "app:max_cut", "app:max_bisection", "app:max_k_cut", "app:min_bisection",
)
COMPARE_MECHANISMS = ("laplace_baseline", "dense", "pipeline")

# Stable CSV layout; see README for column meanings.
CSV_COLUMNS = (
    "mechanism", "n", "seed", "num_cuts", "max_additive_error", "max_slack", "max_balanced_error",
    "edge_count", "negative_weights", "input_weight", "output_weight", "delta_budgeted",
    "ledger_epsilon", "ledger_delta", "parts", "inter_weight", "objective_on_synth", "objective_on_input",
)


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


@dataclass
class ExperimentConfig:
    input: dict
    mechanism: str
    epsilon: float = 2.0
    delta: float = 1e-6
    alpha: float = 0.25
    gamma: float = 0.5
    eta: float = 0.5
    k: int = 3
    seeds: list = field(default_factory=list)
    sweep_n: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    cut_sample_count: int = 10_000
    output_dir: str | None = None
    noiseless: bool = False
    psi: float | None = None
    solver: str = "local_search"
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict, env: dict | None = None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        d = dict(d)
        if not d.get("seeds"):
            env = os.environ if env is None else env
            if SEED_ENV in env:
                try:
                    d["seeds"] = [int(env[SEED_ENV])]
                except ValueError:
                    raise ConfigError(f"{SEED_ENV} must be an integer") from None
        try:
            cfg = cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path, env: dict | None = None) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(data, env)

    def validate(self) -> None:
        if self.mechanism not in MECHANISMS:
            raise ConfigError(f"unknown mechanism {self.mechanism!r}; choose from {list(MECHANISMS)}")
        if not self.seeds:
            raise ConfigError(f"seeds must be a non-empty list (or set {SEED_ENV})")
        if not all(isinstance(s, int) and s >= 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative integers")
        if not isinstance(self.input, dict) or ("path" in self.input) == ("kind" in self.input):
            raise ConfigError("input must be {'path': ...} or {'kind': generator, ...params}")
        if self.sweep_n and "kind" not in self.input:
            raise ConfigError("sweep_n needs a generator input")
        if not (self.epsilon > 0 and 0 < self.delta < 1):
            raise ConfigError("need epsilon > 0 and 0 < delta < 1")
        if self.cut_sample_count < 0:
            raise ConfigError("cut_sample_count must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            PipelineConstants.from_dict(self.constants)
        except TypeError as exc:
            raise ConfigError(f"bad constants: {exc}") from None

    @property
    def budget(self) -> PrivacyBudget:
        return PrivacyBudget(self.epsilon, self.delta)

    def to_dict(self) -> dict:
        return asdict(self)

    def reported(self) -> dict:
        """Config as recorded in reports: where and how fast it ran is left out."""
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("workers")
        return d

    def graph_for(self, seed: int, n: int | None = None) -> WeightedGraph:
        spec = dict(self.input)
        if "path" in spec:
            return load_edge_list(spec["path"])
        kind = spec.pop("kind")
        gseed = spec.pop("seed", seed)
        if n is not None:
            spec["n"] = n
        return generate(kind, seed=gseed, **spec)


# ---------------------------------------------------------------- evaluation

def evaluation_cuts(n: int, count: int, seed: int, degrees=None) -> np.ndarray:
    """Boolean ``(k, n)`` cut family used for scoring."""
    if n <= ALL_CUTS_MAX_N:
        masks = np.arange(1 << max(n - 1, 0), dtype=np.int64)
        return ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    rng = np.random.default_rng([int(seed), n, 0xC075])
    rand = rng.random((count, n)) < 0.5
    single = np.eye(n, dtype=bool)
    order = np.argsort(-(np.zeros(n) if degrees is None else np.asarray(degrees)), kind="stable")
    sweep = np.zeros((n - 1, n), dtype=bool)
    for k in range(1, n):
        sweep[k - 1, order[:k]] = True
    return np.vstack([rand, single, sweep])


def cut_errors(adj_true: np.ndarray, adj_out: np.ndarray, cuts: np.ndarray, alpha: float) -> dict:
    wt = cut_weight_matrix(adj_true, cuts)
    wo = cut_weight_matrix(adj_out, cuts)
    err = np.abs(wt - wo)
    n = cuts.shape[1]
    side = cuts.sum(axis=1)
    balanced = np.minimum(side, n - side) >= n / 4
    return {
        "num_cuts": int(cuts.shape[0]),
        "max_additive_error": float(err.max()) if err.size else 0.0,
        "max_slack": float((err - alpha * wt).max()) if err.size else 0.0,
        "max_balanced_error": float(err[balanced].max()) if balanced.any() else 0.0,
    }


def fit_exponent(ns, values) -> float | None:
    """Least-squares slope of ``log value`` on ``log n``; None unless every value is positive."""
    ns, values = np.asarray(ns, float), np.asarray(values, float)
    if ns.size < 2 or (values <= 0).any():
        return None
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


# ---------------------------------------------------------------- execution

def _execute(cfg: ExperimentConfig, mechanism: str, seed: int, n: int | None) -> dict:
    g = cfg.graph_for(seed, n)
    n = g.n
    noise = NoiseSource(seed=seed, noiseless=cfg.noiseless)
    consts = PipelineConstants.from_dict(cfg.constants)
    budget = cfg.budget
    row = {c: None for c in CSV_COLUMNS}
    row.update(mechanism=mechanism, n=n, seed=seed, input_weight=g.total_weight(), negative_weights=False)
    extra = {}
    out_adj = None
    ledger = None
    if mechanism == "laplace_baseline":
        res = laplace_baseline(g, budget.epsilon, noise)
        out_adj = res.adjacency
        row["negative_weights"] = res.has_negative
        row["edge_count"] = int(np.count_nonzero(np.triu(out_adj, 1)))
        ledger = [{"label": "laplace_pairs", "epsilon": budget.epsilon, "delta": 0.0}]
    elif mechanism == "dense":
        res = dense_synth(g, budget, noise=noise, c=consts.dense_c)
        out_adj, ledger = res.graph.adjacency(), [dict(label="dense", **budget.to_dict())]
        row["edge_count"] = res.graph.m
    elif mechanism == "sparse":
        res = sparse_synth(g, budget, noise, rounds=consts.mw_rounds, copies=consts.boost_copies,
                           restarts=consts.restarts, bound_c=consts.sparse_c)
        out_adj, ledger = res.graph.adjacency(), res.ledger.to_list()
        row["edge_count"] = res.graph.m
        extra["fallback"] = res.fallback
    elif mechanism in ("pipeline", "sparse_pipeline"):
        if mechanism == "pipeline":
            rep = dp_cut_synth(g, budget, cfg.alpha, noise, consts, psi=cfg.psi)
            out = rep.graph
        else:
            po = dp_sparse_pipeline(g, budget, cfg.gamma, noise, consts, psi=cfg.psi)
            rep, out = po.synth, po.graph
            extra["edge_cap"] = po.sparsifier.cap
        out_adj, ledger = out.adjacency(), rep.ledger.to_list()
        row.update(edge_count=out.m, delta_budgeted=rep.delta_budgeted, parts=len(rep.decomposition.parts),
                   inter_weight=rep.decomposition.inter_weight)
        extra["sparse_fallback"] = rep.sparse.fallback
    elif mechanism == "decompose":
        psi = cfg.psi if cfg.psi is not None else 1.0
        dec = expander_decompose(g, psi, budget, noise, consts.oracle, consts.dense_c)
        ledger = dec.ledger.to_list()
        row.update(parts=len(dec.parts), inter_weight=dec.inter_weight)
        extra["decomposition"] = dec.to_json()
    else:
        problem = mechanism.split(":", 1)[1]
        kw = dict(noise=noise, constants=consts, seed=seed, psi=cfg.psi)
        if problem == "max_cut":
            sol = apps.private_max_cut(g, budget, cfg.eta, cfg.solver, **kw)
        elif problem == "max_bisection":
            sol = apps.private_max_bisection(g, budget, cfg.eta, cfg.solver, **kw)
        elif problem == "max_k_cut":
            sol = apps.private_max_k_cut(g, budget, cfg.eta, cfg.k, cfg.solver, **kw)
        else:
            sol = apps.private_min_bisection(g, budget, cfg.solver, **kw)
        out_adj, ledger = sol.synth.graph.adjacency(), sol.synth.ledger.to_list()
        row.update(objective_on_synth=sol.objective_on_synth, objective_on_input=sol.objective_on_input,
                   edge_count=sol.synth.graph.m, delta_budgeted=sol.synth.delta_budgeted)
        extra["solution"] = sol.to_json()
    if out_adj is not None:
        alpha = cfg.alpha if mechanism == "pipeline" else (cfg.gamma if mechanism == "sparse_pipeline" else 0.0)
        if mechanism.startswith("app:"):
            alpha = cfg.eta / 100 if problem != "min_bisection" else 0.5
        cuts = evaluation_cuts(n, cfg.cut_sample_count, seed, g.degrees())
        row.update(cut_errors(g.adjacency(), out_adj, cuts, alpha))
        row["output_weight"] = float(np.triu(out_adj, 1).sum())
    if ledger is not None:
        row["ledger_epsilon"] = math.fsum(c["epsilon"] for c in ledger)
        row["ledger_delta"] = math.fsum(c["delta"] for c in ledger)
    if row["delta_budgeted"] is None and mechanism not in ("decompose",):
        row["delta_budgeted"] = delta_budget(n, budget, cfg.alpha if mechanism != "sparse_pipeline" else cfg.gamma / 100)
    return {"row": row, "ledger": ledger, "extra": extra}


def _job(args):
    cfg_dict, mechanism, seed, n = args
    cfg = ExperimentConfig(**cfg_dict)
    t0 = time.perf_counter()
    out = _execute(cfg, mechanism, seed, n)
    out["wall_time"] = time.perf_counter() - t0
    return out


@dataclass
class ErrorReport:
    config: dict
    rows: list
    ledgers: list
    extras: list
    summary: dict
    wall_times: list

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(CSV_COLUMNS), lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _csv_value(r[k]) for k in CSV_COLUMNS})
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "rows": self.rows,
            "ledgers": self.ledgers,
            "extras": self.extras,
            "summary": self.summary,
        }

    def json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, default=_json_default) + "\n"

    def write(self, out_dir, stem: str = "report") -> dict:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"csv": out / f"{stem}.csv", "json": out / f"{stem}.json", "timing": out / "timing.json"}
        paths["csv"].write_text(self.csv_text(), encoding="utf-8")
        paths["json"].write_text(self.json_text(), encoding="utf-8")
        timing = [{"mechanism": r["mechanism"], "n": r["n"], "seed": r["seed"], "wall_time": t}
                  for r, t in zip(self.rows, self.wall_times)]
        paths["timing"].write_text(json.dumps(timing, indent=2) + "\n", encoding="utf-8")
        return paths


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _run_jobs(cfg: ExperimentConfig, mechanisms) -> list:
    ns = cfg.sweep_n or [None]
    jobs = [(cfg.to_dict(), m, s, n) for m in mechanisms for n in ns for s in cfg.seeds]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    order = {m: i for i, m in enumerate(mechanisms)}
    results.sort(key=lambda r: (order[r["row"]["mechanism"]], r["row"]["n"], r["row"]["seed"]))
    return results


def _summarise(rows) -> dict:
    out = {}
    for mech in dict.fromkeys(r["mechanism"] for r in rows):
        mine = [r for r in rows if r["mechanism"] == mech]
        s = {"runs": len(mine)}
        errs = [r["max_additive_error"] for r in mine if r["max_additive_error"] is not None]
        if errs:
            s["max_additive_error"] = max(errs)
            s["max_slack"] = max(r["max_slack"] for r in mine)
        by_n = {}
        for r in mine:
            if r["max_slack"] is not None:
                by_n.setdefault(r["n"], []).append(r)
        if len(by_n) >= 2:
            ns = sorted(by_n)
            slack = [float(np.mean([r["max_slack"] for r in by_n[n]])) for n in ns]
            add = [float(np.mean([r["max_additive_error"] for r in by_n[n]])) for n in ns]
            s["sweep"] = {"n": ns, "mean_max_slack": slack, "mean_max_additive_error": add,
                          "slack_exponent": fit_exponent(ns, slack), "additive_exponent": fit_exponent(ns, add)}
        out[mech] = s
    return out


def run(cfg: ExperimentConfig) -> ErrorReport:
    return _report(cfg, [cfg.mechanism])


def compare_baselines(cfg: ExperimentConfig) -> ErrorReport:
    """Run the baseline, dense and composite mechanisms on identical inputs and seeds."""
    rep = _report(cfg, list(COMPARE_MECHANISMS))
    dense = {(r["n"], r["seed"]): r for r in rep.rows if r["mechanism"] == "dense"}
    pipe = [r for r in rep.rows if r["mechanism"] == "pipeline"]
    wins = [r["max_balanced_error"] <= dense[(r["n"], r["seed"])]["max_balanced_error"] for r in pipe]
    rep.summary["pipeline_beats_dense_on_balanced_cuts"] = float(np.mean(wins)) if wins else None
    table = []
    for key in sorted(dense):
        entry = {"n": key[0], "seed": key[1]}
        for r in rep.rows:
            if (r["n"], r["seed"]) == key:
                entry[r["mechanism"]] = r["max_additive_error"]
        table.append(entry)
    rep.summary["side_by_side"] = table
    return rep


def _report(cfg, mechanisms) -> ErrorReport:
    results = _run_jobs(cfg, mechanisms)
    rows = [r["row"] for r in results]
    return ErrorReport(cfg.reported(), rows, [r["ledger"] for r in results], [r["extra"] for r in results],
                       _summarise(rows), [r["wall_time"] for r in results])


def report_schema() -> dict:
    with resources.files("dpcut").joinpath("schemas/report.schema.json").open(encoding="utf-8") as fh:
        return json.load(fh)
