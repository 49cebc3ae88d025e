import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpcut.graph import GraphInputError, WeightedGraph, complete, connected_components, cut_weight_matrix, gnp
from dpcut.sparsify import edge_cap, effective_resistances, er_sparsify

from oracles import resistances_networkx
from test_graph import graphs


def cycle(n):
    return WeightedGraph(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def test_cycle_resistances():
    r = effective_resistances(cycle(12))
    assert np.allclose(r, 11 / 12, rtol=1e-10)


def test_cycle_identity_when_all_kept():
    out = er_sparsify(cycle(12), 0.5, seed=0, c_s=10.0)
    assert np.all(out.probabilities == 1.0)
    assert out.graph == cycle(12)


@given(graphs(max_n=9, min_n=2))
def test_resistances_match_networkx(g):
    ref = resistances_networkx(g)
    u, v, _ = g.edge_arrays()
    got = effective_resistances(g)
    for a, b, r in zip(u, v, got):
        assert r == pytest.approx(ref[(int(a), int(b))], rel=1e-6, abs=1e-9)


@given(graphs(max_n=12, min_n=1))
def test_foster_identity(g):
    u, v, w = g.edge_arrays()
    total = float((w * effective_resistances(g)).sum())
    expect = g.n - len(connected_components(g))
    assert total == pytest.approx(expect, rel=1e-6, abs=1e-9)


def test_k64_identity_regime_and_cap():
    g = complete(64)
    out = er_sparsify(g, 0.3, seed=1)
    assert out.edge_count <= edge_cap(64, 0.3)
    assert out.graph == g


def test_sampling_regime_preserves_cuts():
    g = complete(64)
    rng = np.random.default_rng(0)
    cuts = np.vstack([rng.random((10_000, 64)) < 0.5, np.eye(64, dtype=bool)])
    true = cut_weight_matrix(g.adjacency(), cuts)
    good = 0
    for seed in range(20):
        out = er_sparsify(g, 0.3, seed=seed, c_s=0.6)
        assert np.all(out.probabilities < 1)
        assert out.probabilities.sum() <= 0.6 * 63 * math.log(64) / 0.09 + 1e-6
        assert out.edge_count <= edge_cap(64, 0.3, 0.6)
        got = cut_weight_matrix(out.graph.adjacency(), cuts)
        good += bool(np.all(np.abs(got - true) <= 0.3 * true))
    assert good >= 19


def test_unbiased_cut_weight():
    # 20 isolated vertices double the cap without adding resistance mass, so rejection never fires
    core = gnp(20, 0.5, seed=4)
    g = WeightedGraph(40, core.edges)
    side = np.zeros(40, dtype=bool)
    side[:7] = True
    true = cut_weight_matrix(g.adjacency(), side[None])[0]
    outs = [er_sparsify(g, 0.5, seed=s, c_s=0.05) for s in range(10_000)]
    assert max(outs[0].probabilities) < 1
    assert outs[0].probabilities.sum() < outs[0].cap / 2
    vals = [cut_weight_matrix(o.graph.adjacency(), side[None])[0] for o in outs]
    assert np.mean(vals) == pytest.approx(true, rel=0.02)


def test_disconnected_components_handled():
    g = WeightedGraph(8, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (4, 5, 2), (5, 6, 2)])
    out = er_sparsify(g, 0.5, seed=0)
    x = np.zeros(8, dtype=bool)
    x[:4] = True
    assert cut_weight_matrix(out.graph.adjacency(), x[None])[0] == 0


def test_gamma_range():
    for gamma in (0.0, 1.0, -0.1):
        with pytest.raises(GraphInputError):
            er_sparsify(complete(4), gamma)


def test_edge_cap_formula():
    assert edge_cap(64, 0.3, 2.0) == pytest.approx(2.0 * 64 * math.log(64) / 0.09)


@given(st.integers(0, 10_000), st.floats(0.05, 1.0))
@settings(max_examples=30)
def test_edge_cap_always_holds(seed, c_s):
    g = gnp(40, 0.6, seed=seed)
    out = er_sparsify(g, 0.4, seed=seed, c_s=c_s)
    assert out.edge_count <= out.cap
    assert out.graph.m == 0 or out.graph.min_weight() > 0
