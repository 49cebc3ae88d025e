"""How errors grow with n and epsilon, and where the constants bite.

Three measurements:

* the composite release against the per-pair baselines on gnp(n, 0.5);
* the light-edge learner's error as epsilon shrinks, with the fitted exponent;
* clamping bias of the Gaussian release on sparse inputs, against its bound.

Run with ``python demos/02_error_scaling.py``; about two minutes.
"""

# %% imports
import numpy as np

from dpcut import NoiseSource, PrivacyBudget
from dpcut.dense import dense_synth
from dpcut.graph import WeightedGraph, _popcounts, all_cut_weights, cut_weight_matrix, gnp, star
from dpcut.harness import ExperimentConfig, compare_baselines, evaluation_cuts, fit_exponent
from dpcut.sparse import sparse_synth

# %% composite vs baselines over an n-sweep
cfg = ExperimentConfig.from_dict({
    "input": {"kind": "gnp", "p": 0.5}, "mechanism": "pipeline",
    "seeds": [0, 1], "sweep_n": [32, 64, 128], "cut_sample_count": 20_000,
}, env={})
rep = compare_baselines(cfg)
for mech, s in rep.summary.items():
    if isinstance(s, dict) and "sweep" in s:
        sw = s["sweep"]
        print(f"{mech:18s} mean max error {[round(v) for v in sw['mean_max_additive_error']]}"
              f"  exponent {sw['additive_exponent']:.2f}")
print("composite beats dense on balanced cuts in", rep.summary["pipeline_beats_dense_on_balanced_cuts"], "of runs")

# %% light-edge learner vs epsilon
# The light-edge bound scales like eps^(-1/2); a Laplace-measured learner is expected nearer eps^(-1).
g = gnp(48, 0.1, seed=3)
cuts = evaluation_cuts(48, 5000, 0, g.degrees())
true = cut_weight_matrix(g.adjacency(), cuts)
eps_grid = [0.5, 1.0, 2.0, 4.0, 8.0]
errs = []
for eps in eps_grid:
    e = [np.abs(cut_weight_matrix(sparse_synth(g, PrivacyBudget(eps, 1e-6), NoiseSource(seed=s)).graph.adjacency(),
                                  cuts) - true).max() for s in range(3)]
    errs.append(float(np.mean(e)))
print("max error by epsilon", dict(zip(eps_grid, [round(x, 1) for x in errs])))
print("fitted exponent in epsilon", round(fit_exponent(eps_grid, errs), 2))

# %% clamping on sparse inputs
# Small cuts of light graphs are where clamping at zero biases the release most.
budget = PrivacyBudget(1.0, 1e-5)
sizes = np.minimum(_popcounts(12), 12 - _popcounts(12))
for name, h in [("star", star(12)), ("path", WeightedGraph(12, [(i, i + 1, 1.0) for i in range(11)])),
                ("empty", WeightedGraph(12))]:
    w = all_cut_weights(h.adjacency())
    over = []
    for seed in range(50):
        res = dense_synth(h, budget, lam=1e-3, noise=NoiseSource(seed=seed))
        d = np.abs(all_cut_weights(res.graph.adjacency()) - w)
        ok = sizes > 0
        over.append(float(np.mean(d[ok] > res.bound(1) * sizes[ok])))
    print(f"{name:6s} fraction of cuts above the dense bound: {np.mean(over):.4f}")
