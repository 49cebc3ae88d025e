"""Most-balanced sparse cuts and private expander decomposition.

``most_balanced_sparse_cut`` is the non-private bicriteria oracle: the
largest side ``S`` (``|S| <= n/2``) with ``w(S) <= psi |S|``. Up to
:data:`~dpcut.graph.EXACT_ORACLE_CAP` vertices it enumerates every subset
(approximation factors 1 and 1); above that it runs a spectral sweep whose
factors are configured constants, not guarantees.

``dp_most_balanced_sparse_cut`` runs the oracle on a noised, pruned and
capped copy of the graph. ``expander_decompose`` recurses on it level by
level with a shrinking size target and a growing sparsity target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dense import DEFAULT_BOUND_CONSTANT, dense_error_bound, dense_synth
from .graph import (
    EXACT_ORACLE_CAP,
    GraphInputError,
    WeightedGraph,
    all_cut_weights,
    connected_components,
    _popcounts,
)
from .privacy import BudgetLedger, NoiseSource, PrivacyBudget

__all__ = [
    "PsiBelowFloorError",
    "DepthCapError",
    "OracleConfig",
    "SparseCutResult",
    "ScheduleParams",
    "Decomposition",
    "most_balanced_sparse_cut",
    "dp_most_balanced_sparse_cut",
    "psi_floor",
    "build_schedule",
    "decomposition_psi_floor",
    "expander_decompose",
]


class PsiBelowFloorError(ValueError):
    def __init__(self, psi: float, floor: float):
        super().__init__(f"psi={psi:.6g} is below the noise floor {floor:.6g}")
        self.psi = psi
        self.floor = floor


class DepthCapError(RuntimeError):
    """Recursion went deeper than the schedule allows: the oracle misbehaved."""


@dataclass(frozen=True)
class OracleConfig:
    """Which oracle runs at which size, and the factors each one is credited with.

    ``d_exp_heuristic=None`` means ``4 ln^2 n``.
    """

    exact_cap: int = EXACT_ORACLE_CAP
    d_exp_heuristic: float | None = None
    d_size_heuristic: float = 2.0
    restarts: int = 8

    def mode(self, n: int) -> str:
        return "exact" if n <= self.exact_cap else "heuristic"

    def factors(self, n: int) -> tuple[float, float]:
        if self.mode(n) == "exact":
            return 1.0, 1.0
        d_exp = 4.0 * math.log(n) ** 2 if self.d_exp_heuristic is None else self.d_exp_heuristic
        return max(d_exp, 1.0), max(self.d_size_heuristic, 1.0)


@dataclass(frozen=True)
class SparseCutResult:
    subset: tuple
    psi: float
    certified: bool
    weight: float = 0.0

    @property
    def empty(self) -> bool:
        return not self.subset


def _exact_cut(g: WeightedGraph, psi: float) -> SparseCutResult:
    n = g.n
    cuts = all_cut_weights(g.adjacency())
    sizes = _popcounts(n)
    slack = 1e-12 * max(1.0, g.total_weight())
    ok = (2 * sizes <= n) & (sizes >= 1) & (cuts <= psi * sizes + slack)
    if not ok.any():
        return SparseCutResult((), psi, True, 0.0)
    best = sizes[ok].max()
    mask = int(np.flatnonzero(ok & (sizes == best))[0])
    subset = tuple(i for i in range(n) if (mask >> i) & 1)
    return SparseCutResult(subset, psi, True, float(cuts[mask]))


def _component_union(g: WeightedGraph):
    """Largest union of whole components with at most n/2 vertices."""
    comps = connected_components(g)
    if len(comps) < 2:
        return ()
    cap = g.n // 2
    # reach[s] = index of the component that first reached total s
    reach = {0: None}
    for idx, c in enumerate(comps):
        for s in sorted(reach, reverse=True):
            t = s + c.size
            if t <= cap and t not in reach:
                reach[t] = (idx, s)
    total = max(reach)
    chosen = []
    while total:
        idx, prev = reach[total]
        chosen.append(comps[idx])
        total = prev
    return tuple(sorted(int(v) for c in chosen for v in c))


def _sweep_cut(g: WeightedGraph, psi: float, restarts: int, rng) -> SparseCutResult:
    n = g.n
    a = g.adjacency()
    deg = a.sum(axis=1)
    best = _component_union(g)
    best_w = 0.0
    with np.errstate(divide="ignore"):
        dinv = np.where(deg > 0, 1.0 / np.sqrt(deg), 0.0)
    lap = np.eye(n) - dinv[:, None] * a * dinv[None, :]
    _, vecs = np.linalg.eigh(lap)
    f = vecs[:, 1] * dinv
    spread = float(f.std()) or 1.0
    scores = [f] + [f + rng.normal(0.0, 0.1 * spread, n) for _ in range(restarts)]
    for score in scores:
        for order in (np.argsort(score, kind="stable"), np.argsort(-score, kind="stable")):
            sub = a[np.ix_(order, order)]
            inner = np.tril(sub, -1).sum(axis=1)
            w = np.cumsum(deg[order]) - 2.0 * np.cumsum(inner)
            k = np.arange(1, n + 1)
            side = np.minimum(k, n - k)
            ok = (side >= 1) & (w <= psi * side * (1 + 1e-12))
            if not ok.any():
                continue
            j = int(np.flatnonzero(ok)[np.argmax(side[ok])])
            if side[j] > len(best):
                kk = j + 1
                members = order[:kk] if kk <= n - kk else order[kk:]
                best = tuple(sorted(int(v) for v in members))
                best_w = float(w[j])
    return SparseCutResult(best, psi, False, best_w)


def most_balanced_sparse_cut(g: WeightedGraph, psi: float, mode: str = "auto",
                             oracle: OracleConfig = OracleConfig(), seed=None) -> SparseCutResult:
    """Largest ``S`` with ``|S| <= n/2`` and ``w(S) <= psi |S|`` (possibly empty).

    Exact mode breaks ties by the smallest bitmask (bit ``i`` = vertex ``i``).
    """
    if not psi > 0:
        raise GraphInputError("psi must be positive")
    if g.n < 2:
        return SparseCutResult((), psi, True, 0.0)
    if mode == "auto":
        mode = oracle.mode(g.n)
    if mode == "exact":
        return _exact_cut(g, psi)
    if mode != "heuristic":
        raise GraphInputError(f"unknown oracle mode {mode!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return _sweep_cut(g, psi, oracle.restarts, rng)


def psi_floor(n: int, budget: PrivacyBudget, lam: float, d_exp: float = 1.0,
              c: float = DEFAULT_BOUND_CONSTANT) -> float:
    """Smallest sparsity target the private oracle accepts: ``10 * per-vertex dense bound * d_exp``."""
    return 10.0 * dense_error_bound(max(n, 2), 1, budget, lam, c) * d_exp


def dp_most_balanced_sparse_cut(g: WeightedGraph, psi: float, budget: PrivacyBudget, lam: float,
                                noise: NoiseSource | None = None, oracle: OracleConfig = OracleConfig(),
                                c: float = DEFAULT_BOUND_CONSTANT, check_floor: bool = True) -> SparseCutResult:
    """Private oracle call: noise the graph, prune and cap it, then cut at ``0.8 psi``.

    Pairs lighter than ``psi / (10 n)`` are dropped and heavier ones capped at
    ``psi n``, which bounds the weight ratio of the graph the oracle sees.
    """
    noise = noise or NoiseSource()
    n = g.n
    if n < 2:
        return SparseCutResult((), psi, True, 0.0)
    d_exp, _ = oracle.factors(n)
    if check_floor and not noise.noiseless:
        floor = psi_floor(n, budget, lam, d_exp, c)
        if psi < floor:
            raise PsiBelowFloorError(psi, floor)
    noisy = dense_synth(g, budget, lam, noise.child("dense"), c).graph
    u, v, w = noisy.edge_arrays()
    keep = w >= psi / (10.0 * n)
    pruned = WeightedGraph.from_arrays(n, u[keep], v[keep], np.minimum(w[keep], psi * n))
    return most_balanced_sparse_cut(pruned, 0.8 * psi, oracle=oracle, seed=noise.child("oracle").rng())


@dataclass(frozen=True)
class ScheduleParams:
    n: int
    L: int
    sigma_exp: float
    n_sigma: float
    s_bar: tuple  # s_bar[0] = n/2 + 1, ..., s_bar[L] (one past the last level)
    psi_levels: tuple  # psi_levels[i-1] for level i
    c_exp: float
    c_size: float
    depth_cap: float
    eps_prime: float
    delta_prime: float
    lam: float

    @property
    def per_call(self) -> PrivacyBudget:
        return PrivacyBudget(self.eps_prime, self.delta_prime)

    def to_json(self) -> dict:
        return {
            "n": self.n, "L": self.L, "sigma_exp": self.sigma_exp, "n_sigma": self.n_sigma,
            "s_bar": list(self.s_bar), "psi_levels": list(self.psi_levels), "c_exp": self.c_exp,
            "c_size": self.c_size, "depth_cap": self.depth_cap, "eps_prime": self.eps_prime,
            "delta_prime": self.delta_prime, "lam": self.lam,
        }


def build_schedule(n: int, psi: float, budget: PrivacyBudget, c_exp: float = 2.0, c_size: float = 1.0) -> ScheduleParams:
    """Level sizes, sparsity targets and per-call budget for ``n`` vertices.

    ``sigma = sqrt(ln c_exp / ln n)``, floored at ``1 / sqrt(ln n)`` so that
    ``n**sigma >= e`` and the level count stays finite when ``c_exp`` is small.
    """
    if n < 2:
        raise GraphInputError("schedule needs n >= 2")
    ln_n = math.log(n)
    sigma = max(math.sqrt(math.log(max(c_exp, 1.0)) / ln_n), 1.0 / math.sqrt(ln_n))
    n_sigma = n ** sigma
    s_bar = [n / 2 + 1]
    while s_bar[-1] > 1:
        s_bar.append(s_bar[-1] / n_sigma)
    L = len(s_bar)
    s_bar.append(s_bar[-1] / n_sigma)
    psi_levels = tuple(psi * c_exp ** (L - i + 1) for i in range(1, L + 1))
    cap = L * c_size * n_sigma * ln_n
    return ScheduleParams(n, L, sigma, n_sigma, tuple(s_bar), psi_levels, c_exp, c_size, cap,
                          budget.epsilon / cap, budget.delta / cap, float(n) ** -10)


def _schedule_for(n, psi, budget, oracle):
    d_exp, d_size = oracle.factors(n)
    return build_schedule(n, psi, budget, c_exp=2.0 * d_exp, c_size=d_size)


def decomposition_psi_floor(n: int, budget: PrivacyBudget, oracle: OracleConfig = OracleConfig(),
                            c: float = DEFAULT_BOUND_CONSTANT) -> float:
    """Noise floor of the oracle at the per-call budget the decomposition hands out."""
    sched = _schedule_for(n, 1.0, budget, oracle)
    d_exp, _ = oracle.factors(n)
    return psi_floor(n, sched.per_call, sched.lam, d_exp, c)


@dataclass
class Decomposition:
    parts: list  # sorted tuples of vertex ids
    inter_weight: float
    psi: float
    ledger: BudgetLedger
    schedule: ScheduleParams | None
    calls: list = field(default_factory=list)
    max_depth: int = 0

    def worst_path_budget(self) -> PrivacyBudget:
        """Budget actually spent along the deepest root-to-leaf chain of calls."""
        if self.schedule is None:
            return PrivacyBudget(0.0, 0.0)
        return self.schedule.per_call.scaled(self.max_depth)

    def labels(self, n: int) -> np.ndarray:
        lab = np.empty(n, dtype=np.int64)
        for i, p in enumerate(self.parts):
            lab[list(p)] = i
        return lab

    def to_json(self) -> dict:
        return {
            "psi": self.psi,
            "parts": [list(p) for p in self.parts],
            "inter_weight": self.inter_weight,
            "ledger": self.ledger.to_list(),
            "schedule": None if self.schedule is None else self.schedule.to_json(),
            "max_depth": self.max_depth,
            "oracle_calls": len(self.calls),
        }


def _inter_weight(g: WeightedGraph, parts) -> float:
    lab = np.empty(g.n, dtype=np.int64)
    for i, p in enumerate(parts):
        lab[list(p)] = i
    u, v, w = g.edge_arrays()
    return float(w[lab[u] != lab[v]].sum())


def expander_decompose(g: WeightedGraph, psi: float, budget: PrivacyBudget, noise: NoiseSource | None = None,
                       oracle: OracleConfig = OracleConfig(), c: float = DEFAULT_BOUND_CONSTANT,
                       accounting: str = "path") -> Decomposition:
    """Private expander decomposition of ``g`` at sparsity ``psi``.

    Every oracle call gets ``budget / depth_cap``. An edge influences at most
    one call per recursion depth, so the release costs ``budget`` in total;
    that single charge is what ``accounting="path"`` records. The debug
    mode ``accounting="tree"`` records every call instead (its total
    exceeds ``budget`` on purpose).
    """
    if accounting not in ("path", "tree"):
        raise GraphInputError("accounting must be 'path' or 'tree'")
    noise = noise or NoiseSource()
    n = g.n
    ledger = BudgetLedger()
    if n < 2:
        ledger.charge("decomposition", budget)
        return Decomposition([tuple(range(n))] if n else [], 0.0, psi, ledger.seal(), None)
    sched = _schedule_for(n, psi, budget, oracle)
    if not noise.noiseless:
        d_exp, _ = oracle.factors(n)
        floor = psi_floor(n, sched.per_call, sched.lam, d_exp, c)
        if psi < floor:
            raise PsiBelowFloorError(psi, floor)
    if accounting == "path":
        ledger.charge("decomposition", sched.per_call.scaled(sched.depth_cap))

    parts, calls = [], []
    max_depth = 0
    stack = [(np.arange(n), 1, 0, "r")]
    while stack:
        verts, level, depth, path = stack.pop()
        if verts.size == 1:
            parts.append((int(verts[0]),))
            continue
        if depth + 1 > sched.depth_cap:
            raise DepthCapError(f"recursion depth {depth + 1} exceeds cap {sched.depth_cap:.1f}")
        max_depth = max(max_depth, depth + 1)
        h = g.induced(verts).graph
        res = dp_most_balanced_sparse_cut(h, sched.psi_levels[level - 1], sched.per_call, sched.lam,
                                          noise.child(path), oracle, c, check_floor=False)
        if accounting == "tree":
            ledger.charge(f"call[{path}]", sched.per_call)
        calls.append({"path": path, "size": int(verts.size), "level": level, "depth": depth + 1,
                      "cut_size": len(res.subset)})
        if res.empty:
            parts.append(tuple(int(x) for x in verts))
            continue
        inside = np.zeros(verts.size, dtype=bool)
        inside[list(res.subset)] = True
        if len(res.subset) >= sched.s_bar[level] / sched.c_size:
            stack.append((verts[~inside], level, depth + 1, path + ".R"))
            stack.append((verts[inside], 1, depth + 1, path + ".S"))
        else:
            stack.append((verts, level + 1, depth + 1, path + ".L"))
    parts.sort()
    return Decomposition(parts, _inter_weight(g, parts), psi, ledger.seal(), sched, calls, max_depth)
