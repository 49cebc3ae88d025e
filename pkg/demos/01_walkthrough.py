"""Walk through one private release on a 16-vertex graph with two dense halves.

Run with ``python demos/01_walkthrough.py``. Takes a few seconds.
"""

# %% imports
import numpy as np

from dpcut import NoiseSource, PrivacyBudget
from dpcut.expander import expander_decompose
from dpcut.graph import all_cut_weights, graph_sparsity, planted_two_expanders
from dpcut.pipeline import delta_budget, dp_cut_synth

# %% the input: two K8 halves of weight 50 joined by one unit bridge
g = planted_two_expanders(16, 50, 1)
print("vertices", g.n, "edges", g.m, "total weight", g.total_weight())
print("sparsity of each half", graph_sparsity(g.induced(range(8)).graph))

# %% decomposition alone
# A huge epsilon makes the noise floor small enough that psi = 10 is allowed,
# so the split is easy to see. Real budgets push the floor far above 10 at n = 16.
loud = PrivacyBudget(1e5, 1e-6)
dec = expander_decompose(g, 10.0, loud, NoiseSource(seed=1))
print("parts", dec.parts, "inter weight", dec.inter_weight)
print("ledger", dec.ledger.to_list())

# %% the full composite release at a realistic budget
budget = PrivacyBudget(2.0, 1e-6)
rep = dp_cut_synth(g, budget, alpha=0.25, noise=NoiseSource(seed=1))
print("psi used", round(rep.psi, 1), "parts", len(rep.decomposition.parts))
for label, b in rep.ledger.charges:
    print(f"  {label:14s} eps={b.epsilon:.4f} delta={b.delta:.2e}")

# %% score every cut by brute force
w = all_cut_weights(g.adjacency())
wt = all_cut_weights(rep.graph.adjacency())
slack = np.abs(w - wt) - 0.25 * w
print("max additive error", round(float(np.abs(w - wt).max()), 2))
print("measured slack", round(float(slack.max()), 2), "vs budgeted", round(delta_budget(16, budget, 0.25), 1))

# %% noiseless debug mode reproduces the input exactly (not private)
quiet = dp_cut_synth(g, budget, 0.25, NoiseSource(noiseless=True))
print("noiseless output equals input:", quiet.graph == g)
