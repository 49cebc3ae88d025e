"""Weighted undirected graphs, cut oracles and edge-list I/O.

Vertices are the dense integers ``0..n-1``. A graph stores only positive
weights; an absent pair has weight zero. Graphs are immutable once built,
so they can be shared freely between workers.

Vertex subsets are accepted as any iterable of ids or as a boolean
indicator of length ``n``. The exhaustive oracles index subsets by integer
bitmask, bit ``i`` standing for vertex ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "GraphInputError",
    "EdgeListParseError",
    "OracleTooLargeError",
    "PrivacyGuardError",
    "WeightedGraph",
    "InducedSubgraph",
    "Cut",
    "indicator",
    "mask_to_subset",
    "subset_to_mask",
    "cut_weight",
    "cut_weight_pairs",
    "cut_weight_matrix",
    "all_cut_weights",
    "graph_sparsity",
    "is_neighboring",
    "connected_components",
    "generate",
    "gnp",
    "planted_two_expanders",
    "complete",
    "star",
    "d_regular_random",
    "load_edge_list",
    "save_edge_list",
    "EXACT_ORACLE_CAP",
]

#: Largest n for which the exhaustive subset oracles run.
EXACT_ORACLE_CAP = 20


class GraphInputError(ValueError):
    """Invalid graph, subset or generator parameters."""


class EdgeListParseError(GraphInputError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class OracleTooLargeError(GraphInputError):
    """Raised when an exhaustive oracle is asked about too many vertices."""


class PrivacyGuardError(RuntimeError):
    """A sealed (private) graph was read during post-processing."""


class WeightedGraph:
    """Undirected graph on ``n`` vertices with non-negative edge weights.

    ``edges`` is either a mapping ``{(u, v): w}`` or an iterable of
    ``(u, v, w)`` triples. Zero weights are dropped; negative weights,
    self-loops, out-of-range ids and repeated pairs are rejected.
    """

    __slots__ = ("n", "_u", "_v", "_w", "_adj", "_sealed")

    def __init__(self, n: int, edges: Mapping | Iterable | None = None):
        if int(n) != n or n < 0:
            raise GraphInputError(f"vertex count must be a non-negative integer, got {n!r}")
        self.n = int(n)
        self._adj = None
        self._sealed = False
        if edges is None:
            triples: list = []
        elif isinstance(edges, Mapping):
            triples = [(k[0], k[1], w) for k, w in edges.items()]
        else:
            triples = list(edges)
        if triples:
            arr = np.asarray(triples, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise GraphInputError("edges must be (u, v, w) triples")
            u, v, w = arr[:, 0], arr[:, 1], arr[:, 2]
            if np.any(u != np.round(u)) or np.any(v != np.round(v)):
                raise GraphInputError("vertex ids must be integers")
            u = u.astype(np.int64)
            v = v.astype(np.int64)
        else:
            u = v = np.zeros(0, dtype=np.int64)
            w = np.zeros(0)
        self._set_arrays(u, v, w, check_dupes=True)

    @classmethod
    def from_arrays(cls, n: int, u, v, w) -> "WeightedGraph":
        """Build from parallel endpoint/weight arrays (validated)."""
        g = cls.__new__(cls)
        g.n = int(n)
        g._adj = None
        g._sealed = False
        g._set_arrays(np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64),
                      np.asarray(w, dtype=float), check_dupes=True)
        return g

    @classmethod
    def from_adjacency(cls, adjacency) -> "WeightedGraph":
        """Build from a symmetric matrix; only the upper triangle is read."""
        a = np.asarray(adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphInputError("adjacency must be a square matrix")
        n = a.shape[0]
        iu, ju = np.triu_indices(n, 1)
        w = a[iu, ju]
        keep = w != 0
        g = cls.__new__(cls)
        g.n = n
        g._adj = None
        g._sealed = False
        g._set_arrays(iu[keep], ju[keep], w[keep], check_dupes=False)
        return g

    def _set_arrays(self, u, v, w, check_dupes):
        n = self.n
        if u.shape != v.shape or u.shape != w.shape:
            raise GraphInputError("endpoint and weight arrays differ in length")
        if u.size:
            if np.any(u == v):
                raise GraphInputError(f"self-loop at vertex {int(u[u == v][0])}")
            if u.min() < 0 or v.min() < 0 or u.max() >= n or v.max() >= n:
                raise GraphInputError(f"vertex id out of range for n={n}")
            if not np.all(np.isfinite(w)):
                raise GraphInputError("weights must be finite")
            if np.any(w < 0):
                raise GraphInputError("weights must be non-negative")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        keep = w > 0
        lo, hi, w = lo[keep], hi[keep], w[keep]
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        if check_dupes and lo.size > 1:
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if np.any(dup):
                k = int(np.flatnonzero(dup)[0])
                raise GraphInputError(f"pair ({lo[k]}, {hi[k]}) listed twice")
        for a in (lo, hi, w):
            a.setflags(write=False)
        self._u, self._v, self._w = lo, hi, w

    # -- read access -------------------------------------------------------

    def _check_open(self):
        if self._sealed:
            raise PrivacyGuardError("input graph is sealed; post-processing may only read the synthetic graph")

    @property
    def m(self) -> int:
        return int(self._w.size)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Read-only ``(u, v, w)`` arrays with ``u < v``, sorted by pair."""
        self._check_open()
        return self._u, self._v, self._w

    @property
    def edges(self) -> dict[tuple[int, int], float]:
        u, v, w = self.edge_arrays()
        return {(int(a), int(b)): float(c) for a, b, c in zip(u, v, w)}

    def weight(self, u: int, v: int) -> float:
        self._check_open()
        a, b = min(u, v), max(u, v)
        lo = np.searchsorted(self._u, a, side="left")
        hi = np.searchsorted(self._u, a, side="right")
        k = lo + np.searchsorted(self._v[lo:hi], b)
        if k < hi and self._v[k] == b:
            return float(self._w[k])
        return 0.0

    def adjacency(self) -> np.ndarray:
        """Dense symmetric weight matrix (cached, read-only)."""
        self._check_open()
        if self._adj is None:
            a = np.zeros((self.n, self.n))
            a[self._u, self._v] = self._w
            a[self._v, self._u] = self._w
            a.setflags(write=False)
            self._adj = a
        return self._adj

    def total_weight(self) -> float:
        self._check_open()
        return math.fsum(self._w.tolist())

    def degrees(self) -> np.ndarray:
        self._check_open()
        d = np.zeros(self.n)
        np.add.at(d, self._u, self._w)
        np.add.at(d, self._v, self._w)
        return d

    def induced(self, vertices: Iterable[int]) -> "InducedSubgraph":
        return InducedSubgraph.of(self, vertices)

    def min_weight(self) -> float:
        return float(self._w.min()) if self.m else 0.0

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self._u, other._u)
                and np.array_equal(self._v, other._v) and np.array_equal(self._w, other._w))

    __hash__ = None

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m}, total_weight={float(self._w.sum()):.6g})"


@dataclass(frozen=True)
class InducedSubgraph:
    """``G[V_i]`` relabelled to local ids ``0..len(vertices)-1``."""

    parent: WeightedGraph
    vertices: np.ndarray
    graph: WeightedGraph
    local_of: dict = field(repr=False)

    @classmethod
    def of(cls, parent: WeightedGraph, vertices: Iterable[int]) -> "InducedSubgraph":
        vs = np.unique(np.fromiter((int(x) for x in vertices), dtype=np.int64))
        if vs.size and (vs[0] < 0 or vs[-1] >= parent.n):
            raise GraphInputError("subset contains an out-of-range vertex")
        local = np.full(parent.n, -1, dtype=np.int64)
        local[vs] = np.arange(vs.size)
        u, v, w = parent.edge_arrays()
        keep = (local[u] >= 0) & (local[v] >= 0)
        sub = WeightedGraph.from_arrays(vs.size, local[u[keep]], local[v[keep]], w[keep])
        vs.setflags(write=False)
        return cls(parent, vs, sub, {int(x): i for i, x in enumerate(vs)})

    def to_parent(self, local_ids: Iterable[int]) -> list[int]:
        return sorted(int(self.vertices[i]) for i in local_ids)


def indicator(n: int, subset) -> np.ndarray:
    """Boolean membership vector for ``subset``."""
    if isinstance(subset, np.ndarray) and subset.dtype == bool:
        if subset.shape != (n,):
            raise GraphInputError(f"indicator must have length {n}")
        return subset
    ids = np.fromiter((int(x) for x in subset), dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= n):
        raise GraphInputError(f"vertex id out of range for n={n}")
    x = np.zeros(n, dtype=bool)
    x[ids] = True
    return x


def mask_to_subset(mask: int, n: int) -> list[int]:
    return [i for i in range(n) if (mask >> i) & 1]


def subset_to_mask(subset: Iterable[int]) -> int:
    m = 0
    for i in subset:
        m |= 1 << int(i)
    return m


def cut_weight(g: WeightedGraph, subset) -> float:
    """Total weight of edges with exactly one endpoint in ``subset``."""
    x = indicator(g.n, subset)
    u, v, w = g.edge_arrays()
    return float(w[x[u] != x[v]].sum())


def cut_weight_pairs(g: WeightedGraph, subset) -> float:
    """Same as :func:`cut_weight`, by summing the ``S x (V \\ S)`` block.

    Kept as an independent route for cross-checking the incidence scan.
    """
    x = indicator(g.n, subset)
    a = g.adjacency()
    return float(a[np.ix_(x, ~x)].sum())


def cut_weight_matrix(adjacency: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Cut values for a batch of indicator rows under a (possibly signed) matrix.

    ``subsets`` is ``(k, n)`` boolean; returns ``x A (1-x)`` per row.
    """
    x = np.asarray(subsets, dtype=float)
    return np.einsum("ij,ij->i", x @ adjacency, 1.0 - x)


def all_cut_weights(adjacency: np.ndarray) -> np.ndarray:
    """Cut value of every subset, indexed by bitmask (length ``2**n``).

    Built by adding vertices one at a time:
    ``w(S + k) = w(S) + deg(k) - 2 w(k, S)`` for ``S`` over lower vertices.
    """
    a = np.asarray(adjacency, dtype=float)
    n = a.shape[0]
    if n > EXACT_ORACLE_CAP + 2:
        raise OracleTooLargeError(f"n={n} is too large for exact oracle")
    deg = a.sum(axis=1)
    cuts = np.zeros(1 << n)
    for k in range(n):
        size = 1 << k
        sums = np.zeros(size)
        for j in range(k):
            step = 1 << j
            sums[step:2 * step] = sums[:step] + a[k, j]
        cuts[size:2 * size] = cuts[:size] + deg[k] - 2.0 * sums
    return cuts


def _popcounts(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)


def graph_sparsity(g: WeightedGraph) -> float:
    """``min_S w(S) / min(|S|, n - |S|)`` by exhaustive enumeration."""
    if g.n < 2:
        raise GraphInputError("sparsity needs at least two vertices")
    if g.n > EXACT_ORACLE_CAP:
        raise OracleTooLargeError(f"n={g.n} is too large for exact oracle")
    cuts = all_cut_weights(g.adjacency())
    sizes = _popcounts(g.n)
    ok = (sizes >= 1) & (2 * sizes <= g.n)
    return float((cuts[ok] / sizes[ok]).min())


@dataclass(frozen=True)
class Cut:
    subset: frozenset
    weight: float
    sparsity: float

    @classmethod
    def of(cls, g: WeightedGraph, subset) -> "Cut":
        s = frozenset(int(i) for i in np.flatnonzero(indicator(g.n, subset)))
        k = min(len(s), g.n - len(s))
        if k == 0:
            raise GraphInputError("sparsity is undefined for the empty or full set")
        w = cut_weight(g, s)
        return cls(s, w, w / k)


def is_neighboring(g: WeightedGraph, h: WeightedGraph, atol: float = 0.0) -> bool:
    """Edge-neighboring: weights agree except on one pair, which moves by at most 1."""
    if g.n != h.n:
        raise GraphInputError("graphs have different vertex counts")
    diff = g.adjacency() - h.adjacency()
    iu, ju = np.triu_indices(g.n, 1)
    d = np.abs(diff[iu, ju])
    changed = d > atol
    if changed.sum() > 1:
        return False
    return bool(np.all(d <= 1.0 + atol))


def connected_components(g: WeightedGraph) -> list[np.ndarray]:
    """Components of the support graph, each as a sorted id array."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components as cc

    u, v, w = g.edge_arrays()
    mat = coo_matrix((np.ones(u.size), (u, v)), shape=(g.n, g.n))
    k, labels = cc(mat, directed=False)
    return [np.flatnonzero(labels == c) for c in range(k)]


# -- generators --------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def complete(n: int, w: float = 1.0) -> WeightedGraph:
    if n < 0 or w < 0:
        raise GraphInputError("complete graph needs n >= 0 and w >= 0")
    iu, ju = np.triu_indices(n, 1)
    return WeightedGraph.from_arrays(n, iu, ju, np.full(iu.size, float(w)))


def gnp(n: int, p: float, w: float = 1.0, seed=None) -> WeightedGraph:
    """Erdos-Renyi graph with every present edge of weight ``w``."""
    if n < 0 or not 0.0 <= p <= 1.0 or w < 0:
        raise GraphInputError("gnp needs n >= 0, 0 <= p <= 1, w >= 0")
    iu, ju = np.triu_indices(n, 1)
    keep = _rng(seed).random(iu.size) < p
    return WeightedGraph.from_arrays(n, iu[keep], ju[keep], np.full(int(keep.sum()), float(w)))


def planted_two_expanders(n: int, inner_w: float = 1.0, bridge_w: float = 1.0, seed=None) -> WeightedGraph:
    """Two complete halves ``{0..n/2-1}`` and ``{n/2..n-1}`` plus one bridge.

    The bridge joins ``n/2 - 1`` and ``n/2``. ``seed`` is accepted for a
    uniform generator signature; the construction is deterministic.
    """
    if n < 4 or n % 2 or inner_w <= 0 or bridge_w <= 0:
        raise GraphInputError("planted_two_expanders needs even n >= 4 and positive weights")
    h = n // 2
    iu, ju = np.triu_indices(h, 1)
    u = np.concatenate([iu, iu + h, [h - 1]])
    v = np.concatenate([ju, ju + h, [h]])
    w = np.concatenate([np.full(2 * iu.size, float(inner_w)), [float(bridge_w)]])
    return WeightedGraph.from_arrays(n, u, v, w)


def star(n: int, w: float = 1.0) -> WeightedGraph:
    """Centre 0 joined to leaves ``1..n-1``."""
    if n < 1:
        raise GraphInputError("star needs n >= 1")
    leaves = np.arange(1, n)
    return WeightedGraph.from_arrays(n, np.zeros(n - 1, dtype=np.int64), leaves, np.full(n - 1, float(w)))


def d_regular_random(n: int, d: int, seed=None, w: float = 1.0) -> WeightedGraph:
    if d < 0 or d >= max(n, 1) or (n * d) % 2:
        raise GraphInputError("d-regular graph needs 0 <= d < n and n*d even")
    import networkx as nx

    seed_int = int(_rng(seed).integers(2**31))
    nxg = nx.random_regular_graph(d, n, seed=seed_int)
    return WeightedGraph(n, [(a, b, w) for a, b in nxg.edges()])


_GENERATORS = {
    "gnp": gnp,
    "planted_two_expanders": planted_two_expanders,
    "complete": complete,
    "star": star,
    "d_regular_random": d_regular_random,
}


def generate(kind: str, seed=None, **params) -> WeightedGraph:
    """Dispatch to a named generator; ``seed`` only reaches random ones."""
    try:
        fn = _GENERATORS[kind]
    except KeyError:
        raise GraphInputError(f"unknown generator {kind!r}; choose from {sorted(_GENERATORS)}") from None
    if kind in ("gnp", "planted_two_expanders", "d_regular_random"):
        params["seed"] = seed
    try:
        return fn(**params)
    except TypeError as exc:
        raise GraphInputError(f"bad parameters for {kind}: {exc}") from None


# -- edge-list files ----------------------------------------------------------


def load_edge_list(path) -> WeightedGraph:
    """Parse the ``n`` header + ``u v w`` lines format. ``#`` lines are comments."""
    n = None
    triples = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 1:
                    raise EdgeListParseError(lineno, "expected a vertex count header")
                try:
                    n = int(parts[0])
                except ValueError:
                    raise EdgeListParseError(lineno, f"bad vertex count {parts[0]!r}") from None
                if n < 0:
                    raise EdgeListParseError(lineno, "negative vertex count")
                continue
            if len(parts) != 3:
                raise EdgeListParseError(lineno, "expected 'u v w'")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2])
            except ValueError:
                raise EdgeListParseError(lineno, f"cannot parse {line!r}") from None
            if u == v:
                raise EdgeListParseError(lineno, f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise EdgeListParseError(lineno, f"vertex id out of range for n={n}")
            if not math.isfinite(w) or w < 0:
                raise EdgeListParseError(lineno, f"invalid weight {parts[2]}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise EdgeListParseError(lineno, f"pair {key} listed twice")
            seen.add(key)
            triples.append((u, v, w))
    if n is None:
        raise EdgeListParseError(0, "missing vertex count header")
    return WeightedGraph(n, triples)


def save_edge_list(g: WeightedGraph, path) -> None:
    u, v, w = g.edge_arrays()
    lines = [str(g.n)]
    lines += [f"{a} {b} {float(c)!r}" for a, b, c in zip(u.tolist(), v.tolist(), w.tolist())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
