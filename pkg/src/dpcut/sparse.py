"""Synthetic graphs for light inputs, and median boosting by cut-norm distance.

The base learner is a multiplicative-weights synthesiser over all vertex
pairs. Each round it picks a rectangle ``I x J`` where the current iterate
disagrees most with a privately noised copy of the adjacency matrix,
measures the true rectangle weight with Laplace noise, and reweights the
pairs inside the rectangle. Its additive cut error is compared against
:func:`sparse_error_bound` empirically; no bound is claimed for it.

Budget layout for one base run with ``(eps, delta)``: ``eps/2`` for the total
weight, ``(eps/4, delta)`` for the noised selection matrix, and ``eps/(4T)``
for each of the ``T`` measurements.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cutnorm import cut_norm_exact, cut_norm_heuristic, CUT_NORM_EXACT_CAP
from .graph import GraphInputError, WeightedGraph
from .privacy import BudgetError, BudgetLedger, NoiseSource, PrivacyBudget, gaussian_sigma_for

__all__ = [
    "SparseBaseResult",
    "SparseSynthResult",
    "sparse_synth_base",
    "boost_median",
    "sparse_synth",
    "sparse_error_bound",
    "default_boost_copies",
    "write_trace",
]


@dataclass
class SparseBaseResult:
    graph: WeightedGraph
    w_hat: float
    rounds: int
    ledger: BudgetLedger
    trace: list = field(default_factory=list)


@dataclass
class SparseSynthResult:
    graph: WeightedGraph
    rounds: int
    delta_hat: float
    candidates: int
    chosen: int | None
    fallback: bool
    distances: np.ndarray
    ledger: BudgetLedger


def sparse_error_bound(total_weight: float, n: int, budget: PrivacyBudget, c: float = 1.0) -> float:
    """``c * sqrt(W n ln n / eps) * ln^2(n ln n / delta)``."""
    if total_weight < 0:
        raise GraphInputError("total weight must be non-negative")
    if total_weight == 0 or n < 2:
        return 0.0
    if budget.epsilon <= 0 or budget.delta <= 0:
        raise BudgetError("sparse_error_bound needs epsilon > 0 and delta > 0")
    ln_n = math.log(n)
    return c * math.sqrt(total_weight * n * ln_n / budget.epsilon) * math.log(n * ln_n / budget.delta) ** 2


def default_boost_copies(n: int) -> int:
    return max(1, math.ceil(10 * math.log(max(n, 2))))


def _pairs_from_rectangle(n, iu, ju, rows, cols):
    r = np.zeros(n, dtype=bool)
    c = np.zeros(n, dtype=bool)
    r[list(rows)] = True
    c[list(cols)] = True
    return (r[iu] & c[ju]) | (c[iu] & r[ju])


def sparse_synth_base(g: WeightedGraph, budget: PrivacyBudget, rounds: int = 10,
                      noise: NoiseSource | None = None, restarts: int = 8,
                      learning_rate: float = 1.0, record_iterates: bool = False) -> SparseBaseResult:
    """One multiplicative-weights synthetic graph on every vertex pair.

    The per-round factor is ``exp(learning_rate * clip(err / W_hat, -1, 1))``
    on the pairs of the chosen rectangle, followed by renormalisation to
    total ``W_hat``.
    """
    if rounds < 1:
        raise GraphInputError("rounds must be >= 1")
    if budget.delta <= 0 or budget.epsilon <= 0:
        raise BudgetError("sparse_synth_base needs epsilon > 0 and delta > 0")
    noise = noise or NoiseSource()
    n = g.n
    eps, delta = budget.epsilon, budget.delta
    ledger = BudgetLedger()
    iu, ju = np.triu_indices(n, 1)
    npairs = iu.size
    true_pairs = g.adjacency()[iu, ju]

    ledger.charge("total_weight", PrivacyBudget(eps / 2, 0.0))
    w_hat = max(0.0, float(true_pairs.sum() + noise.child("total").laplace(2.0 / eps)))
    if npairs == 0 or w_hat == 0.0:
        return SparseBaseResult(WeightedGraph(n), w_hat, rounds, ledger.seal())

    ledger.charge("selection_matrix", PrivacyBudget(eps / 4, delta))
    sel_sigma = 0.0 if noise.noiseless else gaussian_sigma_for(eps / 4, delta)
    noisy_pairs = true_pairs + noise.child("selection").gaussian(sel_sigma, npairs)
    noisy = np.zeros((n, n))
    noisy[iu, ju] = noisy_pairs
    noisy += noisy.T

    lr = float(learning_rate)
    meas_eps = eps / (4 * rounds)
    x = np.full(npairs, w_hat / npairs)
    trace = []
    cur = np.zeros((n, n))
    restart_src = noise.child("restarts")
    meas_src = noise.child("measure")
    for t in range(rounds):
        cur[iu, ju] = x
        cur[ju, iu] = x
        est = cut_norm_heuristic(noisy - cur, restarts=restarts, seed=restart_src.rng(t))
        rect = _pairs_from_rectangle(n, iu, ju, est.rows, est.cols)
        ledger.charge(f"measure[{t}]", PrivacyBudget(meas_eps, 0.0))
        measured = float(true_pairs[rect].sum()) + meas_src.laplace(1.0 / meas_eps, index=t)
        err = measured - float(x[rect].sum())
        step = lr * max(-1.0, min(1.0, err / w_hat))
        x[rect] *= math.exp(step)
        x *= w_hat / x.sum()
        row = {"round": t, "selection_norm": est.value, "rows": len(est.rows), "cols": len(est.cols),
               "pairs": int(rect.sum()), "measured_error": err, "epsilon_spent": eps / 2 + eps / 4 + meas_eps * (t + 1)}
        if record_iterates:
            row["iterate"] = x.copy()
        trace.append(row)
    keep = x > 0
    out = WeightedGraph.from_arrays(n, iu[keep], ju[keep], x[keep])
    return SparseBaseResult(out, w_hat, rounds, ledger.seal(), trace)


def _distance(a, b, restarts, rng, exact):
    d = a - b
    if exact and d.shape[0] <= CUT_NORM_EXACT_CAP:
        return cut_norm_exact(d).value
    return cut_norm_heuristic(d, restarts=restarts, seed=rng).value


def boost_median(base: Callable, g: WeightedGraph, budget: PrivacyBudget, delta_threshold: float | None = None,
                 copies: int | None = None, noise: NoiseSource | None = None, restarts: int = 8,
                 exact_distances: bool = False, bound_c: float = 1.0) -> SparseSynthResult:
    """Run ``copies`` independent releases at ``budget / copies`` and keep a central one.

    ``base(g, budget, noise)`` returns a graph or a :class:`SparseBaseResult`.
    A copy ``i`` qualifies when its cut-norm distance to more than half of
    the copies (itself included) is at most ``2 * delta_threshold``; the
    first qualifying copy is returned, else an empty graph with
    ``fallback=True``. By default the threshold is
    :func:`sparse_error_bound` at the median released total weight, which
    keeps the choice a function of released data only.
    """
    noise = noise or NoiseSource()
    n = g.n
    L = default_boost_copies(n) if copies is None else int(copies)
    if L < 1:
        raise GraphInputError("need at least one copy")
    part = budget.scaled(1.0 / L)
    ledger = BudgetLedger()
    graphs, totals, rounds = [], [], 0
    for i in range(L):
        out = base(g, part, noise.child(("copy", i)))
        ledger.charge(f"copy[{i}]", part)
        if isinstance(out, SparseBaseResult):
            rounds = out.rounds
            totals.append(out.w_hat)
            out = out.graph
        else:
            totals.append(out.total_weight())
        graphs.append(out)
    if delta_threshold is None:
        delta_threshold = sparse_error_bound(float(np.median(totals)), n, part, c=bound_c)
    adjs = [h.adjacency() for h in graphs]
    dist = np.zeros((L, L))
    rng = noise.child("distances").rng()
    for i in range(L):
        for j in range(i + 1, L):
            dist[i, j] = dist[j, i] = _distance(adjs[i], adjs[j], restarts, rng, exact_distances)
    votes = (dist <= 2 * delta_threshold).sum(axis=1)
    good = np.flatnonzero(votes > L / 2)
    if good.size:
        k = int(good[0])
        return SparseSynthResult(graphs[k], rounds, delta_threshold, L, k, False, dist, ledger.seal())
    return SparseSynthResult(WeightedGraph(n), rounds, delta_threshold, L, None, True, dist, ledger.seal())


def sparse_synth(g: WeightedGraph, budget: PrivacyBudget, noise: NoiseSource | None = None, rounds: int = 10,
                 copies: int | None = None, restarts: int = 8, bound_c: float = 1.0) -> SparseSynthResult:
    """Boosted multiplicative-weights release (the composite's light-edge stage)."""

    def base(h, b, src):
        return sparse_synth_base(h, b, rounds=rounds, noise=src, restarts=restarts)

    return boost_median(base, g, budget, copies=copies, noise=noise, restarts=restarts, bound_c=bound_c)


def write_trace(trace: list, path) -> None:
    """JSON-lines dump of a base-run trace (iterates omitted)."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in trace:
            fh.write(json.dumps({k: v for k, v in row.items() if k != "iterate"}) + "\n")
