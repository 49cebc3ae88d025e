"""Private max-cut, bisections and max-3-cut as post-processing.

Run with ``python demos/03_private_max_cut.py``.
"""

# %% imports
from dpcut import NoiseSource, PrivacyBudget
from dpcut.applications import (
    max_cut,
    min_bisection,
    private_max_bisection,
    private_max_cut,
    private_max_k_cut,
    private_min_bisection,
)
from dpcut.graph import gnp

budget = PrivacyBudget(2.0, 1e-6)
g = gnp(64, 0.5, seed=1000)

# %% non-private references on the input itself
print("local-search max cut on G:", max_cut(g).objective_on_synth)
print("local-search min bisection on G:", min_bisection(g).objective_on_synth)

# %% private solutions; objective_on_input is evaluated after the solver finishes
for name, sol in [
    ("max cut", private_max_cut(g, budget, eta=0.5, noise=NoiseSource(seed=0))),
    ("max bisection", private_max_bisection(g, budget, eta=0.5, noise=NoiseSource(seed=0))),
    ("max 3-cut", private_max_k_cut(g, budget, eta=0.5, k=3, noise=NoiseSource(seed=0))),
    ("min bisection", private_min_bisection(g, budget, noise=NoiseSource(seed=0))),
]:
    print(f"{name:14s} on synthetic {sol.objective_on_synth:9.1f}   on G {sol.objective_on_input:7.1f}")

# %% the synthetic graph is released once; every solver above could share it
sol = private_max_cut(g, budget, eta=0.5, noise=NoiseSource(seed=0))
print("budget spent:", sol.synth.ledger.total())
