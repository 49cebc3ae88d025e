"""Cut optimisation on a released synthetic graph.

Each ``private_*`` routine synthesises once and then hands only the
synthetic graph to a non-private solver. While the solver runs, the input
graph is sealed: any read raises :class:`PrivacyGuardError`. The input is
reopened afterwards solely to fill in ``objective_on_input`` for evaluation.

Solvers are exhaustive enumeration (small n) or first-improvement local
search with seeded restarts.
"""

from __future__ import annotations

import itertools
import json
import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .graph import (
    EXACT_ORACLE_CAP,
    GraphInputError,
    OracleTooLargeError,
    WeightedGraph,
    _popcounts,
    all_cut_weights,
    cut_weight,
    mask_to_subset,
)
from .pipeline import PipelineConstants, SynthReport, dp_cut_synth
from .privacy import NoiseSource, PrivacyBudget

__all__ = [
    "CutSolution",
    "sealed",
    "k_cut_weight",
    "max_cut",
    "max_bisection",
    "min_bisection",
    "max_k_cut",
    "private_max_cut",
    "private_max_bisection",
    "private_max_k_cut",
    "private_min_bisection",
]

BISECTION_EXACT_CAP = 16
K_CUT_EXACT_LIMIT = 10**6
SOLVERS = ("local_search", "exhaustive")
_TOL = 1e-12


@dataclass
class CutSolution:
    partition: list
    objective_on_synth: float
    objective_on_input: float | None = None
    problem: str = ""
    solver: str = ""
    budget: PrivacyBudget | None = None
    seed: int | None = None
    padded: bool = False
    synth: SynthReport | None = field(default=None, repr=False, compare=False)

    @property
    def side(self) -> list:
        return self.partition[0]

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "solver": self.solver,
            "partition": [list(map(int, p)) for p in self.partition],
            "objective_on_synth": self.objective_on_synth,
            "objective_on_input": self.objective_on_input,
            "budget": None if self.budget is None else self.budget.to_dict(),
            "seed": self.seed,
            "padded": self.padded,
        }

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)


@contextmanager
def sealed(g: WeightedGraph):
    """Forbid reads of ``g`` inside the block."""
    prev = g._sealed
    g._sealed = True
    try:
        yield
    finally:
        g._sealed = prev


def k_cut_weight(g: WeightedGraph, labels) -> float:
    labels = np.asarray(labels)
    u, v, w = g.edge_arrays()
    return float(w[labels[u] != labels[v]].sum())


def _check_solver(solver):
    if solver not in SOLVERS:
        raise GraphInputError(f"unknown solver {solver!r}; choose from {SOLVERS}")


def _partition_from_side(n, side):
    s = sorted(int(i) for i in side)
    inside = set(s)
    return [s, [i for i in range(n) if i not in inside]]


# ---------------------------------------------------------------- two-sided

def _flip_search(a, x, rng):
    """First-improvement single-vertex flips from boolean side vector ``x``."""
    n = a.shape[0]
    s = np.where(x, 1.0, -1.0)
    while True:
        gain = a @ s * s  # same-side weight minus cross weight = gain of flipping
        order = rng.permutation(n)
        hits = order[gain[order] > _TOL]
        if not hits.size:
            return s > 0
        s[hits[0]] = -s[hits[0]]


def _swap_search(a, x, rng, maximise):
    """First-improvement balanced swaps; ``maximise`` selects the objective direction."""
    s = np.where(x, 1.0, -1.0)
    sign = 1.0 if maximise else -1.0
    while True:
        gain = a @ s * s
        ins, outs = np.flatnonzero(s > 0), np.flatnonzero(s < 0)
        if not ins.size or not outs.size:
            return s > 0
        delta = sign * (gain[ins][:, None] + gain[outs][None, :] + 2.0 * a[np.ix_(ins, outs)])
        pi, po = rng.permutation(ins.size), rng.permutation(outs.size)
        delta = delta[np.ix_(pi, po)]
        flat = np.flatnonzero(delta.ravel() > _TOL)
        if not flat.size:
            return s > 0
        i, j = divmod(int(flat[0]), outs.size)
        s[ins[pi[i]]], s[outs[po[j]]] = -1.0, 1.0


def _cut_value(a, x):
    return float(a[np.ix_(x, ~x)].sum()) if x.any() and (~x).any() else 0.0


def _local(a, restarts, seed, balanced, maximise):
    n = a.shape[0]
    rng = np.random.default_rng(seed)
    best, best_val = None, None
    for _ in range(max(1, restarts)):
        if balanced:
            x = np.zeros(n, dtype=bool)
            x[rng.permutation(n)[: n // 2]] = True
            x = _swap_search(a, x, rng, maximise)
        else:
            x = _flip_search(a, rng.random(n) < 0.5, rng)
        val = _cut_value(a, x)
        if best is None or (val > best_val + _TOL if maximise else val < best_val - _TOL):
            best, best_val = x, val
    return np.flatnonzero(best).tolist(), best_val


def _exhaustive(a, balanced, maximise):
    n = a.shape[0]
    cap = BISECTION_EXACT_CAP if balanced else EXACT_ORACLE_CAP
    if n > cap:
        raise OracleTooLargeError(f"exhaustive search is limited to n <= {cap}")
    vals = all_cut_weights(a)
    masks = np.arange(vals.size)
    if balanced:
        masks = masks[_popcounts(n) == n // 2]
        vals = vals[masks]
    k = int(vals.argmax() if maximise else vals.argmin())  # first index = smallest mask
    return mask_to_subset(int(masks[k]), n), float(vals[k])


def _two_sided(g, solver, seed, restarts, balanced, maximise, problem):
    _check_solver(solver)
    n = g.n
    padded = balanced and n % 2 == 1
    a = g.adjacency()
    if padded:
        a = np.pad(a, ((0, 1), (0, 1)))
    if a.shape[0] < 2:
        side, val = [], 0.0
    elif solver == "exhaustive":
        side, val = _exhaustive(a, balanced, maximise)
    else:
        side, val = _local(a, restarts, seed, balanced, maximise)
    side = [i for i in side if i < n]
    return CutSolution(_partition_from_side(n, side), val, problem=problem, solver=solver, seed=seed, padded=padded)


def max_cut(g: WeightedGraph, solver: str = "local_search", seed=0, restarts: int = 8) -> CutSolution:
    return _two_sided(g, solver, seed, restarts, False, True, "max_cut")


def max_bisection(g: WeightedGraph, solver: str = "local_search", seed=0, restarts: int = 8) -> CutSolution:
    """Balanced max cut; odd ``n`` is padded with one isolated vertex."""
    return _two_sided(g, solver, seed, restarts, True, True, "max_bisection")


def min_bisection(g: WeightedGraph, solver: str = "local_search", seed=0, restarts: int = 8) -> CutSolution:
    """Kernighan-Lin style balanced swaps, or enumeration for ``n <= 16``."""
    return _two_sided(g, solver, seed, restarts, True, False, "min_bisection")


# ---------------------------------------------------------------- k parts

def _k_exhaustive(g, k):
    n = g.n
    if k**n > K_CUT_EXACT_LIMIT:
        raise OracleTooLargeError(f"k**n = {k**n} exceeds the enumeration limit {K_CUT_EXACT_LIMIT}")
    u, v, w = g.edge_arrays()
    best, best_val = None, -1.0
    # vertex 0 is pinned to part 0 (relabelling symmetry)
    for chunk in _chunks(itertools.product(range(k), repeat=max(n - 1, 0)), 1 << 14):
        lab = np.zeros((len(chunk), n), dtype=np.int64)
        if n > 1:
            lab[:, 1:] = np.array(chunk, dtype=np.int64).reshape(len(chunk), n - 1)
        vals = ((lab[:, u] != lab[:, v]) * w).sum(axis=1)
        i = int(vals.argmax())
        if vals[i] > best_val + _TOL:
            best, best_val = lab[i].copy(), float(vals[i])
    return best, best_val


def _chunks(it, size):
    buf = []
    for item in it:
        buf.append(item)
        if len(buf) == size:
            yield buf
            buf = []
    if buf:
        yield buf


def _k_local(g, k, restarts, seed):
    n = g.n
    a = g.adjacency()
    rng = np.random.default_rng(seed)
    best, best_val = None, -1.0
    for _ in range(max(1, restarts)):
        lab = np.full(n, -1)
        load = np.zeros((n, k))  # weight from each vertex into each part so far
        for v in rng.permutation(n):
            part = int(np.argmin(load[v] + rng.random(k) * 1e-9))
            lab[v] = part
            load[:, part] += a[:, v]
        while True:
            into = a @ np.eye(k)[lab]
            gain = into[np.arange(n), lab][:, None] - into
            order = rng.permutation(n)
            movable = order[gain[order].max(axis=1) > _TOL]
            if not movable.size:
                break
            v = movable[0]
            lab[v] = int(gain[v].argmax())
        val = k_cut_weight(g, lab)
        if val > best_val + _TOL:
            best, best_val = lab, val
    return best, best_val


def max_k_cut(g: WeightedGraph, k: int, solver: str = "local_search", seed=0, restarts: int = 8) -> CutSolution:
    _check_solver(solver)
    if k < 2:
        raise GraphInputError("k must be at least 2")
    if k > g.n:
        raise GraphInputError(f"k = {k} exceeds n = {g.n}")
    lab, val = _k_exhaustive(g, k) if solver == "exhaustive" else _k_local(g, k, restarts, seed)
    parts = [np.flatnonzero(lab == c).tolist() for c in range(k)]
    return CutSolution(parts, val, problem="max_k_cut", solver=solver, seed=seed)


# ---------------------------------------------------------------- private wrappers

def _objective(g, sol):
    if sol.problem == "max_k_cut":
        lab = np.zeros(g.n, dtype=np.int64)
        for c, p in enumerate(sol.partition):
            lab[p] = c
        return k_cut_weight(g, lab)
    return cut_weight(g, sol.side)


def _private(g, budget, alpha, noise, constants, psi, solve):
    synth = dp_cut_synth(g, budget, alpha, noise, constants, psi=psi)
    with sealed(g):
        sol = solve(synth.graph)
    sol.objective_on_input = _objective(g, sol)
    sol.budget = budget
    sol.synth = synth
    return sol


def private_max_cut(g: WeightedGraph, budget: PrivacyBudget, eta: float, solver: str = "local_search",
                    noise: NoiseSource | None = None, constants: PipelineConstants = PipelineConstants(),
                    seed=0, psi: float | None = None) -> CutSolution:
    """Max cut of the synthetic graph released at ``alpha = eta / 100``."""
    _check_solver(solver)
    if not 0 < eta < 1:
        raise GraphInputError("eta must lie in (0, 1)")
    return _private(g, budget, eta / 100, noise, constants, psi, lambda h: max_cut(h, solver, seed))


def private_max_bisection(g: WeightedGraph, budget: PrivacyBudget, eta: float, solver: str = "local_search",
                          noise: NoiseSource | None = None, constants: PipelineConstants = PipelineConstants(),
                          seed=0, psi: float | None = None) -> CutSolution:
    _check_solver(solver)
    if not 0 < eta < 1:
        raise GraphInputError("eta must lie in (0, 1)")
    return _private(g, budget, eta / 100, noise, constants, psi, lambda h: max_bisection(h, solver, seed))


def private_max_k_cut(g: WeightedGraph, budget: PrivacyBudget, eta: float, k: int, solver: str = "local_search",
                      noise: NoiseSource | None = None, constants: PipelineConstants = PipelineConstants(),
                      seed=0, psi: float | None = None) -> CutSolution:
    _check_solver(solver)
    if not 0 < eta < 1:
        raise GraphInputError("eta must lie in (0, 1)")
    if k > g.n:
        raise GraphInputError(f"k = {k} exceeds n = {g.n}")
    return _private(g, budget, eta / 100, noise, constants, psi, lambda h: max_k_cut(h, k, solver, seed))


def private_min_bisection(g: WeightedGraph, budget: PrivacyBudget, solver: str = "local_search", alpha: float = 0.5,
                          noise: NoiseSource | None = None, constants: PipelineConstants = PipelineConstants(),
                          seed=0, psi: float | None = None) -> CutSolution:
    """Minimum bisection of the synthetic graph.

    The multiplicative factor here is only that of the plugged solver, so
    ``alpha`` can stay constant.
    """
    _check_solver(solver)
    return _private(g, budget, alpha, noise, constants, psi, lambda h: min_bisection(h, solver, seed))


def measured_ratio(g: WeightedGraph, seeds=range(5)) -> float:
    """Worst local-search / exhaustive min-bisection ratio over ``seeds`` (``n <= 16``)."""
    opt = min_bisection(g, "exhaustive").objective_on_synth
    worst = max(min_bisection(g, "local_search", seed=s).objective_on_synth for s in seeds)
    if opt == 0:
        return 1.0 if worst == 0 else math.inf
    return worst / opt
