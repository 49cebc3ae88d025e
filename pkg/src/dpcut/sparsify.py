"""Cut sparsification by effective-resistance sampling.

Edge ``e`` survives with probability ``p_e = min(1, c_s w_e R_e ln n / gamma^2)``
and is reweighted to ``w_e / p_e``, so every cut is preserved in
expectation. Draws with more than ``cap`` edges are rejected and redrawn;
since ``sum p_e <= c_s (n - 1) ln n / gamma^2`` sits below the cap, this
rarely takes more than a couple of tries. Resistances come from a dense Laplacian pseudoinverse per
connected component, which is fine up to a few thousand vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphInputError, WeightedGraph, connected_components

__all__ = ["SparsifierOutput", "effective_resistances", "edge_cap", "er_sparsify"]

MAX_DRAWS = 1000


@dataclass(frozen=True)
class SparsifierOutput:
    graph: WeightedGraph
    gamma: float
    edge_count: int
    cap: float
    probabilities: np.ndarray


def effective_resistances(g: WeightedGraph) -> np.ndarray:
    """``R_e`` for every stored edge, in :meth:`WeightedGraph.edge_arrays` order."""
    u, v, w = g.edge_arrays()
    res = np.zeros(w.size)
    if not w.size:
        return res
    local = np.empty(g.n, dtype=np.int64)
    for comp in connected_components(g):
        if comp.size < 2:
            continue
        local[comp] = np.arange(comp.size)
        in_comp = np.isin(u, comp)
        cu, cv, cw = local[u[in_comp]], local[v[in_comp]], w[in_comp]
        lap = np.zeros((comp.size, comp.size))
        np.add.at(lap, (cu, cv), -cw)
        np.add.at(lap, (cv, cu), -cw)
        lap[np.diag_indices(comp.size)] = -lap.sum(axis=1)
        pinv = np.linalg.pinv(lap, hermitian=True)
        res[in_comp] = pinv[cu, cu] + pinv[cv, cv] - 2.0 * pinv[cu, cv]
    return res


def edge_cap(n: int, gamma: float, c_s: float = 1.0) -> float:
    return c_s * n * math.log(max(n, 2)) / gamma**2


def er_sparsify(g: WeightedGraph, gamma: float, seed=None, c_s: float = 1.0) -> SparsifierOutput:
    if not 0 < gamma < 1:
        raise GraphInputError("gamma must lie in (0, 1)")
    n = g.n
    u, v, w = g.edge_arrays()
    r = effective_resistances(g)
    p = np.minimum(1.0, c_s * w * r * math.log(max(n, 2)) / gamma**2)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cap = edge_cap(n, gamma, c_s)
    for _ in range(MAX_DRAWS):
        keep = (rng.random(w.size) < p) & (p > 0)
        if keep.sum() <= cap:
            break
    else:
        raise RuntimeError(f"no draw within the edge cap after {MAX_DRAWS} tries")
    out = WeightedGraph.from_arrays(n, u[keep], v[keep], w[keep] / p[keep])
    return SparsifierOutput(out, gamma, out.m, cap, p)
