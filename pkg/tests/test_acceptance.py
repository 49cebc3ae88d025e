"""Desk-scale acceptance checks, one group per numbered criterion.

Each test records its outcome through ``acceptance_log.record``; the session
summary prints one PASS/FAIL line per criterion. Thresholds are the stated
ones and are asserted as is.
"""

import json
import math
import time

import numpy as np
import pytest

from dpcut.applications import max_cut, min_bisection, private_max_cut
from dpcut.cli import main
from dpcut.cutnorm import cut_norm_exact, cut_norm_heuristic
from dpcut.expander import expander_decompose
from dpcut.graph import (
    WeightedGraph,
    all_cut_weights,
    complete,
    cut_weight,
    cut_weight_matrix,
    cut_weight_pairs,
    gnp,
    graph_sparsity,
    planted_two_expanders,
)
from dpcut.harness import ExperimentConfig, evaluation_cuts, run
from dpcut.pipeline import delta_budget, dp_cut_synth, dp_sparse_pipeline
from dpcut.privacy import NoiseSource, NoiseSpec, PrivacyBudget, audit_scalar_mechanism
from dpcut.sparsify import edge_cap, effective_resistances, er_sparsify

from acceptance_log import record
from oracles import cut_norm_4n, cut_value, edge_dict, sparsity

B = PrivacyBudget(2.0, 1e-6)
LOUD = PrivacyBudget(1e5, 1e-6)


def _random_graph(rng, n, dyadic=False):
    mask = rng.random((n, n)) < rng.uniform(0.2, 0.9)
    vals = rng.integers(1, 41, (n, n)) / 8 if dyadic else rng.uniform(0.1, 5.0, (n, n))
    w = np.where(mask, vals, 0.0)
    w = np.triu(w, 1)
    return WeightedGraph(n, [(i, j, w[i, j]) for i in range(n) for j in range(i + 1, n) if w[i, j] > 0])


# -- 1 ---------------------------------------------------------------------------


def test_c1_oracle_equivalence():
    # sparsity is compared with ==, so its graphs use weights k/8 whose sums are exact in floating point
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_rel, mismatches = 0.0, 0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        g = _random_graph(rng, n)
        e = edge_dict(g)
        table = all_cut_weights(g.adjacency())
        for mask in rng.integers(0, 1 << n, 40):
            s = [i for i in range(n) if mask >> i & 1]
            ref = cut_value(e, s)
            for v in (cut_weight(g, s), cut_weight_pairs(g, s), table[mask]):
                if ref == 0:
                    worst_rel = max(worst_rel, 0.0 if abs(v) <= 1e-12 else math.inf)
                else:
                    worst_rel = max(worst_rel, abs(v - ref) / ref)
        h = _random_graph(rng, n, dyadic=True)
        mismatches += graph_sparsity(h) != sparsity(edge_dict(h), n)
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-9 and mismatches == 0 and elapsed < 60
    record(1, "cut and sparsity oracles", ok,
           f"worst rel diff {worst_rel:.1e}, sparsity mismatches {mismatches}/200, {elapsed:.1f}s")
    assert ok


# -- 2 ---------------------------------------------------------------------------


def test_c2_cut_norm():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    wrong, ratios = 0, []
    for i in range(500):
        n, m = (int(x) for x in rng.integers(1, 11, 2))
        a = rng.choice([-1.0, 1.0], (n, m)) if i % 2 else rng.standard_normal((n, m))
        exact = cut_norm_exact(a).value
        wrong += not math.isclose(exact, cut_norm_4n(a), rel_tol=1e-9, abs_tol=1e-9)
        ratios.append(cut_norm_heuristic(a, restarts=32, seed=i).value / exact if exact else 1.0)
    frac = float(np.mean(np.asarray(ratios) >= 0.56))
    elapsed = time.perf_counter() - t0
    ok = wrong == 0 and frac >= 0.99 and elapsed < 300
    record(2, "cut norm", ok, f"exact mismatches {wrong}, ratio>=0.56 on {frac:.1%}, min ratio "
           f"{min(ratios):.3f}, {elapsed:.1f}s")
    assert ok


# -- 3 ---------------------------------------------------------------------------


def test_c3_cut_norm_dominates_cut_discrepancy():
    rng = np.random.default_rng(3)
    violations = 0
    for _ in range(100):
        n = int(rng.integers(2, 13))
        a, b = _random_graph(rng, n), _random_graph(rng, n)
        diff = np.abs(all_cut_weights(a.adjacency()) - all_cut_weights(b.adjacency()))
        norm = cut_norm_exact(a.adjacency() - b.adjacency()).value
        violations += int((diff > norm * (1 + 1e-12) + 1e-9).sum())
    ok = violations == 0
    record(3, "dominance over all cuts", ok, f"{violations} violations")
    assert ok


# -- 4 ---------------------------------------------------------------------------


def test_c4_ledgers_match_budgets():
    bad = 0
    runs = 0
    for seed in range(5):
        for budget in (B, PrivacyBudget(0.7, 1e-8)):
            g = gnp(20, 0.5, seed=seed)
            totals = [dp_cut_synth(g, budget, 0.25, NoiseSource(seed=seed)).ledger.total(),
                      dp_sparse_pipeline(g, budget, 0.5, NoiseSource(seed=seed)).synth.ledger.total(),
                      expander_decompose(planted_two_expanders(16, 50, 1), 1e7, budget,
                                         NoiseSource(seed=seed)).ledger.total()]
            for t in totals:
                runs += 1
                bad += not (math.isclose(t.epsilon, budget.epsilon, rel_tol=1e-12)
                            and math.isclose(t.delta, budget.delta, rel_tol=1e-12))
    ok = bad == 0
    record(4, "ledger totals", ok, f"{bad} of {runs} runs off budget")
    assert ok


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0])
def test_c4_laplace_audit(eps):
    rep = audit_scalar_mechanism(NoiseSpec("laplace", 1 / eps, seed=int(eps * 10)), 1.0, trials=10**6)
    ok = 0.9 * eps <= rep.epsilon_hat <= 1.1 * eps
    record(4, f"audit eps={eps}", ok, f"epsilon_hat {rep.epsilon_hat:.3f}")
    assert ok


# -- 5 ---------------------------------------------------------------------------


def test_c5_decomposition_contract():
    g = planted_two_expanders(16, 50, 1)
    psi = 10.0
    exact = 0
    parts_ok = parts_total = 0
    depth_ok = True
    corpus = [(g, psi, s) for s in range(50)]
    corpus += [(planted_two_expanders(16, 5.0 + s % 7, 1.0), 3.0, 100 + s) for s in range(50)]
    for k, (h, p, seed) in enumerate(corpus):
        d = expander_decompose(h, p, LOUD, NoiseSource(seed=seed))
        if k < 50:
            exact += d.parts == [tuple(range(8)), tuple(range(8, 16))] and d.inter_weight == 1.0
        if d.schedule is not None:
            depth_ok &= d.max_depth <= d.schedule.depth_cap
        for part in d.parts:
            if 2 <= len(part) <= 16:
                parts_total += 1
                parts_ok += graph_sparsity(h.induced(part).graph) >= p
    frac = parts_ok / parts_total
    ok = exact / 50 >= 0.9 and frac >= 0.95 and depth_ok
    record(5, "planted halves", ok, f"exact halves {exact}/50, parts with sparsity>=psi {parts_ok}/{parts_total}, "
           f"depth within cap {depth_ok}")
    assert ok


# -- 6 ---------------------------------------------------------------------------


def test_c6_small_instances_sandwich():
    alpha = 0.25
    within, sandwich = 0, True
    seeds = range(20)
    for seed in seeds:
        g = gnp(12, 0.5, seed=seed)
        rep = dp_cut_synth(g, B, alpha, NoiseSource(seed=seed))
        w = all_cut_weights(g.adjacency())
        wt = all_cut_weights(rep.graph.adjacency())
        dh = float(np.max(np.abs(w - wt) - alpha * w))
        sandwich &= bool(np.all((1 - alpha) * w - dh <= wt + 1e-9) and np.all(wt <= (1 + alpha) * w + dh + 1e-9))
        within += dh <= delta_budget(12, B, alpha)
    ok = sandwich and within / len(seeds) >= 0.9
    record(6, "n=12 brute force", ok, f"sandwich holds {sandwich}, within budget {within}/{len(seeds)}")
    assert ok


def test_c6_slack_exponent():
    t0 = time.perf_counter()
    cfg = ExperimentConfig.from_dict({"input": {"kind": "gnp", "p": 0.5}, "mechanism": "pipeline",
                                      "seeds": [0, 1, 2, 3, 4], "sweep_n": [32, 64, 128, 256],
                                      "cut_sample_count": 100_000}, env={})
    sw = run(cfg).summary["pipeline"]["sweep"]
    slope = sw["slack_exponent"]
    elapsed = time.perf_counter() - t0
    ok = slope is not None and 1.0 <= slope <= 1.5 and elapsed < 1800
    slope_txt = "undefined" if slope is None else f"{slope:.2f}"
    record(6, "slack exponent in [1.0, 1.5]", ok,
           f"fitted {slope_txt} (additive-error exponent {sw['additive_exponent']:.2f}); mean max slack "
           f"{[round(v, 1) for v in sw['mean_max_slack']]} at n={sw['n']}; {elapsed:.0f}s")
    assert ok


# -- 7 ---------------------------------------------------------------------------


def test_c7_sparsifier_contract():
    g = complete(64)
    gamma = 0.3
    rng = np.random.default_rng(7)
    cuts = rng.random((100_000, 64)) < 0.5
    true = cut_weight_matrix(g.adjacency(), cuts)
    good = capped = 0
    for seed in range(20):
        out = er_sparsify(g, gamma, seed=seed)
        capped += out.edge_count <= edge_cap(64, gamma)
        got = cut_weight_matrix(out.graph.adjacency(), cuts)
        good += bool(np.all(np.abs(got - true) <= gamma * true))
    foster = float((g.edge_arrays()[2] * effective_resistances(g)).sum())
    pipe_ok = True
    for seed in range(5):
        po = dp_sparse_pipeline(gnp(32, 0.5, seed=seed), B, 0.5, NoiseSource(seed=seed))
        pipe_ok &= (po.graph.m == 0 or po.graph.min_weight() >= 0) and po.edge_count <= po.sparsifier.cap
    ok = capped == 20 and good >= 19 and abs(foster - 63) <= 1e-6 and pipe_ok
    record(7, "K64 sparsifier", ok, f"within cap {capped}/20, all cuts within (1+-gamma) {good}/20, "
           f"Foster sum {foster:.9f}, pipeline non-negative and capped {pipe_ok}")
    assert ok


# -- 8 ---------------------------------------------------------------------------


def test_c8_noiseless_optima():
    quiet = NoiseSource(noiseless=True)
    k88 = WeightedGraph(16, [(i, j, 1.0) for i in range(8) for j in range(8, 16)])
    bridged = WeightedGraph(16, [(i, j, 1.0) for i in range(8) for j in range(i + 1, 8)]
                            + [(i, j, 1.0) for i in range(8, 16) for j in range(i + 1, 16)] + [(0, 8, 1.0)])
    got = (
        private_max_cut(k88, B, 0.5, "exhaustive", quiet).objective_on_input,
        private_max_cut(complete(3), B, 0.5, "exhaustive", quiet).objective_on_input,
        min_bisection(dp_cut_synth(bridged, B, 0.5, quiet).graph, "exhaustive").objective_on_synth,
    )
    ok = got == (64, 2, 1)
    record(8, "noiseless optima", ok, f"K8,8 {got[0]}, triangle {got[1]}, bridged K8 min-bisection {got[2]}")
    assert ok


def test_c8_private_max_cut_value():
    eta = 0.5
    alpha = eta / 100
    hits = 0
    gaps = []
    for s in range(20):
        g = gnp(64, 0.5, seed=1000 + s)
        sol = private_max_cut(g, B, eta, noise=NoiseSource(seed=s), seed=s)
        ref = max_cut(g, seed=s)
        cuts = evaluation_cuts(64, 10_000, s, g.degrees())
        extra = np.zeros((2, 64), dtype=bool)
        extra[0, sol.side] = True
        extra[1, ref.side] = True
        cuts = np.vstack([cuts, extra])
        w = cut_weight_matrix(g.adjacency(), cuts)
        wt = cut_weight_matrix(sol.synth.graph.adjacency(), cuts)
        dh = float(np.max(np.abs(w - wt) - alpha * w))
        hits += sol.objective_on_input >= ref.objective_on_synth - dh
        gaps.append(ref.objective_on_synth - sol.objective_on_input)
    ok = hits / 20 >= 0.8
    record(8, "private max cut within delta-hat", ok,
           f"{hits}/20 seeds; median shortfall vs local search {np.median(gaps):.0f}")
    assert ok


# -- 9 ---------------------------------------------------------------------------


def test_c9_cli_determinism(tmp_path):
    cfgp = tmp_path / "cfg.json"
    cfgp.write_text(json.dumps({"input": {"kind": "gnp", "n": 24, "p": 0.5}, "mechanism": "pipeline",
                                "seeds": [0, 1], "sweep_n": [16, 24], "cut_sample_count": 2000}))
    graph = tmp_path / "g.txt"
    main(["gen", "planted_two_expanders", "--param", "n=16", "--param", "inner_w=50", "--out", str(graph)])
    invocations = {
        "run": lambda d: ["run", "--config", str(cfgp), "--out", str(d)],
        "run_sparse": lambda d: ["run", "--config", str(cfgp), "--mechanism", "sparse_pipeline", "--out", str(d)],
        "run_app": lambda d: ["run", "--config", str(cfgp), "--mechanism", "app:max_bisection", "--out", str(d)],
        "compare": lambda d: ["compare", "--config", str(cfgp), "--out", str(d)],
        "decompose": lambda d: ["decompose", "--input", str(graph), "--psi", "10", "--epsilon", "1e5",
                                "--delta", "1e-6", "--seed", "3", "--out", str(d / "dec.json")],
        "audit": lambda d: ["audit", "--scale", "1", "--trials", "100000", "--out", str(d / "audit.json")],
    }
    differing = []
    for name, argv in invocations.items():
        outs = []
        for rep in ("a", "b"):
            d = tmp_path / name / rep
            d.mkdir(parents=True)
            assert main(argv(d)) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "timing.json"})
        if outs[0] != outs[1] or not outs[0]:
            differing.append(name)
    ok = not differing
    record(9, "repeated CLI runs", ok, f"verbs checked {list(invocations)}; differing {differing}")
    assert ok
