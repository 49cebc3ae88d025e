"""Per-pair noise synthesis for graphs whose cuts are all heavy.

:func:`dense_synth` adds Gaussian noise to the weight of every vertex pair
(edges and non-edges alike) and clamps the result at zero. The unclamped
vector is the Gaussian mechanism on an L2-sensitivity-1 query, and clamping
is post-processing, so the release is ``(epsilon, delta)``-DP.

Clamping biases light pairs upwards: a pair of true weight 0 has expected
output ``sigma / sqrt(2 pi)``. The bias is largest on sparse inputs with
small cuts, and callers should measure it instead of assuming the error
bound holds there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph
from .privacy import BudgetError, NoiseSource, PrivacyBudget, gaussian_sigma_for

__all__ = [
    "DEFAULT_BOUND_CONSTANT",
    "DenseSynthResult",
    "dense_synth",
    "dense_error_bound",
    "LaplaceBaselineResult",
    "laplace_baseline",
]

DEFAULT_BOUND_CONSTANT = 4.0


def _bound(sigma: float, n: int, s: float, lam: float, c: float) -> float:
    if n < 2:
        return 0.0
    return sigma * s * math.sqrt(c * n * math.log(n) * math.log(1.0 / lam))


def dense_error_bound(n: int, s: float, budget: PrivacyBudget, lam: float,
                      c: float = DEFAULT_BOUND_CONSTANT) -> float:
    """``sigma * s * sqrt(c n ln n ln(1/lam))`` for cuts with ``s`` vertices on one side."""
    if not 0 < lam < 1:
        raise BudgetError("failure probability must lie in (0, 1)")
    return _bound(gaussian_sigma_for(budget.epsilon, budget.delta), n, s, lam, c)


@dataclass(frozen=True)
class DenseSynthResult:
    graph: WeightedGraph
    sigma: float
    lam: float
    budget_charged: PrivacyBudget
    c: float = DEFAULT_BOUND_CONSTANT

    def bound(self, s: float) -> float:
        """Additive error allowance for a cut whose smaller side has ``s`` vertices."""
        return _bound(self.sigma, self.graph.n, s, self.lam, self.c)


def dense_synth(g: WeightedGraph, budget: PrivacyBudget, lam: float = 1e-3,
                noise: NoiseSource | None = None, c: float = DEFAULT_BOUND_CONSTANT) -> DenseSynthResult:
    if budget.delta <= 0:
        raise BudgetError("dense_synth is approximate-DP and needs delta > 0")
    if not 0 < lam < 0.5:
        raise BudgetError("lambda must lie in (0, 1/2)")
    noise = noise or NoiseSource()
    sigma = 0.0 if noise.noiseless else gaussian_sigma_for(budget.epsilon, budget.delta)
    n = g.n
    iu, ju = np.triu_indices(n, 1)
    w = g.adjacency()[iu, ju] + noise.gaussian(sigma, iu.size)
    np.maximum(w, 0.0, out=w)
    keep = w > 0
    out = WeightedGraph.from_arrays(n, iu[keep], ju[keep], w[keep])
    return DenseSynthResult(out, sigma, lam, budget, c)


@dataclass(frozen=True)
class LaplaceBaselineResult:
    """Per-pair Laplace release; weights may be negative, so no WeightedGraph."""

    adjacency: np.ndarray
    scale: float
    budget_charged: PrivacyBudget

    @property
    def has_negative(self) -> bool:
        return bool((self.adjacency < 0).any())


def laplace_baseline(g: WeightedGraph, epsilon: float, noise: NoiseSource | None = None) -> LaplaceBaselineResult:
    """``Lap(1/epsilon)`` on every pair, no clamping (pure DP)."""
    if epsilon <= 0:
        raise BudgetError("epsilon must be > 0")
    noise = noise or NoiseSource()
    n = g.n
    iu, ju = np.triu_indices(n, 1)
    w = g.adjacency()[iu, ju] + noise.laplace(1.0 / epsilon, iu.size)
    a = np.zeros((n, n))
    a[iu, ju] = w
    a[ju, iu] = w
    a.setflags(write=False)
    return LaplaceBaselineResult(a, 0.0 if noise.noiseless else 1.0 / epsilon, PrivacyBudget(epsilon, 0.0))
