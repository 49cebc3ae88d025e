import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpcut.applications import (
    k_cut_weight,
    max_bisection,
    max_cut,
    max_k_cut,
    measured_ratio,
    min_bisection,
    private_max_cut,
    private_max_k_cut,
    private_min_bisection,
    sealed,
)
from dpcut.graph import GraphInputError, PrivacyGuardError, WeightedGraph, complete, cut_weight, gnp
from dpcut.privacy import NoiseSource, PrivacyBudget

from oracles import edge_dict, k_cut_brute, max_cut_brute
from test_graph import graphs

B = PrivacyBudget(2.0, 1e-6)
QUIET = NoiseSource(noiseless=True)


def k_8_8():
    return WeightedGraph(16, [(i, j, 1.0) for i in range(8) for j in range(8, 16)])


def two_bridged_k8():
    edges = [(i, j, 1.0) for i in range(8) for j in range(i + 1, 8)]
    edges += [(i + 8, j + 8, 1.0) for i in range(8) for j in range(i + 1, 8)]
    return WeightedGraph(16, edges + [(0, 8, 1.0)])


# -- exact solvers on known instances ---------------------------------------


def test_known_optima():
    assert max_cut(k_8_8(), "exhaustive").objective_on_synth == 64
    assert max_cut(complete(3), "exhaustive").objective_on_synth == 2
    assert max_k_cut(complete(4), 3, "exhaustive").objective_on_synth == 5
    path = WeightedGraph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
    sol = max_bisection(path, "exhaustive")
    assert sol.objective_on_synth == 3 and sorted(map(sorted, sol.partition)) == [[0, 2], [1, 3]]
    assert min_bisection(two_bridged_k8(), "exhaustive").objective_on_synth == 1
    assert min_bisection(complete(16), "exhaustive").objective_on_synth == 64


def test_k_equals_n_cuts_everything():
    g = gnp(7, 0.5, seed=3)
    assert max_k_cut(g, 7, "exhaustive").objective_on_synth == pytest.approx(g.total_weight())


def test_k_above_n_refused():
    with pytest.raises(GraphInputError):
        max_k_cut(complete(3), 4)
    with pytest.raises(GraphInputError):
        private_max_k_cut(complete(3), B, 0.5, 4)


def test_unknown_solver_refused():
    with pytest.raises(GraphInputError):
        max_cut(complete(4), "sdp")
    with pytest.raises(GraphInputError):
        private_max_cut(complete(4), B, 0.5, solver="sdp")


@given(graphs(max_n=9, min_n=2))
def test_exhaustive_max_cut_matches_brute(g):
    sol = max_cut(g, "exhaustive")
    assert sol.objective_on_synth == pytest.approx(max_cut_brute(edge_dict(g), g.n), rel=1e-9, abs=1e-9)
    assert cut_weight(g, sol.side) == pytest.approx(sol.objective_on_synth, rel=1e-9, abs=1e-9)


@given(graphs(max_n=6, min_n=3), st.integers(2, 3))
@settings(max_examples=30)
def test_exhaustive_k_cut_matches_brute(g, k):
    sol = max_k_cut(g, k, "exhaustive")
    assert sol.objective_on_synth == pytest.approx(k_cut_brute(edge_dict(g), g.n, k), rel=1e-9, abs=1e-9)
    labels = np.zeros(g.n, dtype=int)
    for c, p in enumerate(sol.partition):
        labels[p] = c
    assert k_cut_weight(g, labels) == pytest.approx(sol.objective_on_synth, rel=1e-9, abs=1e-9)


@given(graphs(max_n=11, min_n=2), st.integers(0, 100))
@settings(max_examples=40)
def test_heuristics_sandwiched_by_optimum(g, seed):
    tol = 1e-9
    assert max_cut(g, seed=seed).objective_on_synth <= max_cut(g, "exhaustive").objective_on_synth + tol
    assert max_bisection(g, seed=seed).objective_on_synth <= max_bisection(g, "exhaustive").objective_on_synth + tol
    assert min_bisection(g, seed=seed).objective_on_synth >= min_bisection(g, "exhaustive").objective_on_synth - tol
    assert max_k_cut(g, 2, seed=seed).objective_on_synth <= max_k_cut(g, 2, "exhaustive").objective_on_synth + tol


@given(graphs(max_n=11, min_n=2), st.integers(0, 100))
@settings(max_examples=40)
def test_bisections_are_balanced(g, seed):
    for solve in (max_bisection, min_bisection):
        for solver in ("local_search", "exhaustive"):
            sol = solve(g, solver, seed=seed)
            a, b = map(len, sol.partition)
            assert a + b == g.n and abs(a - b) <= 1
            assert sol.padded == (g.n % 2 == 1)


def test_odd_padding_matches_even_answer():
    # the dummy vertex is isolated, so the optimum equals the best near-balanced split of the original
    g = gnp(9, 0.6, seed=4)
    sol = max_bisection(g, "exhaustive")
    best = 0.0
    for mask in range(1 << 9):
        if bin(mask).count("1") in (4, 5):
            best = max(best, cut_weight(g, [i for i in range(9) if mask >> i & 1]))
    assert sol.objective_on_synth == pytest.approx(best)


def test_local_search_reaches_optimum_on_easy_instances():
    assert max_cut(k_8_8()).objective_on_synth == 64
    assert min_bisection(two_bridged_k8()).objective_on_synth == 1
    assert measured_ratio(two_bridged_k8()) == 1.0


# -- private wrappers --------------------------------------------------------


def test_guard_blocks_reads_while_sealed():
    g = complete(5)
    with sealed(g):
        with pytest.raises(PrivacyGuardError):
            cut_weight(g, [0])
    assert cut_weight(g, [0]) == 4


def test_private_solver_never_reads_input(monkeypatch):
    import dpcut.applications as apps

    g = gnp(12, 0.5, seed=1)
    seen = []
    real = apps.max_cut

    def spy(h, *a, **k):
        seen.append(h is g)
        return real(h, *a, **k)

    monkeypatch.setattr(apps, "max_cut", spy)
    sol = private_max_cut(g, B, 0.5, noise=NoiseSource(seed=2))
    assert seen == [False]
    assert sol.objective_on_input == pytest.approx(cut_weight(g, sol.side))
    assert sol.synth.alpha == pytest.approx(0.005)


def test_private_noiseless_recovers_optimum():
    g = k_8_8()
    assert private_max_cut(g, B, 0.5, "exhaustive", QUIET).objective_on_input == 64
    sol = private_min_bisection(two_bridged_k8(), B, "exhaustive", noise=QUIET)
    assert sol.objective_on_input == 1 and sol.synth.alpha == 0.5


def test_eta_range():
    with pytest.raises(GraphInputError):
        private_max_cut(complete(4), B, 1.0)


def test_solution_dump(tmp_path):
    sol = private_max_cut(gnp(10, 0.5, seed=0), B, 0.5, noise=NoiseSource(seed=0))
    p = tmp_path / "sol.json"
    sol.dump(p)
    out = json.loads(p.read_text())
    assert out["problem"] == "max_cut" and out["budget"] == {"epsilon": 2.0, "delta": 1e-6}
    assert sorted(out["partition"][0] + out["partition"][1]) == list(range(10))
