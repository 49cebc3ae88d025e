"""The composite private cut synthesiser and its sparsified variant.

:func:`dp_cut_synth` splits the budget three ways: a private expander
decomposition, the boosted light-edge mechanism on the edges between
parts, and per-pair noise inside each part. Parts are disjoint, so the
per-part releases together cost a single share (an edge lies inside at
most one part).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dense import DEFAULT_BOUND_CONSTANT, dense_synth
from .expander import Decomposition, OracleConfig, decomposition_psi_floor, expander_decompose
from .graph import GraphInputError, WeightedGraph
from .privacy import BudgetError, BudgetLedger, NoiseSource, PrivacyBudget
from .sparse import SparseSynthResult, sparse_synth
from .sparsify import SparsifierOutput, er_sparsify

__all__ = [
    "PipelineConstants",
    "SynthReport",
    "PipelineOutput",
    "delta_budget",
    "pipeline_psi",
    "dp_cut_synth",
    "dp_sparse_pipeline",
]

NOISELESS_PSI = 1e-9


@dataclass(frozen=True)
class PipelineConstants:
    """Every tunable constant of the composite; ``None`` means "derive from n"."""

    dense_c: float = DEFAULT_BOUND_CONSTANT
    sparse_c: float = 1.0
    delta_c: float = 1.0
    delta_log_n_power: float = 2.0
    delta_log_delta_power: float = 2.0
    sparsifier_c: float = 1.0
    psi_boost: float | None = None  # 8 ln n
    mw_rounds: int = 10
    boost_copies: int | None = None  # ceil(10 ln n)
    restarts: int = 8
    oracle: OracleConfig = field(default_factory=OracleConfig)
    split: tuple = (1 / 3, 1 / 3, 1 / 3)

    def budgets(self, budget: PrivacyBudget) -> list[PrivacyBudget]:
        if len(self.split) != 3 or min(self.split) <= 0 or abs(sum(self.split) - 1) > 1e-12:
            raise BudgetError("split must be three positive fractions summing to 1")
        if self.split == (1 / 3, 1 / 3, 1 / 3):
            return budget.split(3)
        return [budget.scaled(f) for f in self.split]

    def to_dict(self) -> dict:
        return {
            "dense_c": self.dense_c, "sparse_c": self.sparse_c, "delta_c": self.delta_c,
            "delta_log_n_power": self.delta_log_n_power, "delta_log_delta_power": self.delta_log_delta_power,
            "sparsifier_c": self.sparsifier_c, "psi_boost": self.psi_boost, "mw_rounds": self.mw_rounds,
            "boost_copies": self.boost_copies, "restarts": self.restarts, "split": list(self.split),
            "oracle": {"exact_cap": self.oracle.exact_cap, "d_exp_heuristic": self.oracle.d_exp_heuristic,
                       "d_size_heuristic": self.oracle.d_size_heuristic, "restarts": self.oracle.restarts},
        }

    @classmethod
    def from_dict(cls, d: dict | None) -> "PipelineConstants":
        d = dict(d or {})
        oracle = OracleConfig(**d.pop("oracle", {}))
        if "split" in d:
            d["split"] = tuple(d["split"])
        return cls(oracle=oracle, **d)


def delta_budget(n: int, budget: PrivacyBudget, alpha: float, c: float = 1.0, p: float = 2.0, q: float = 2.0) -> float:
    """Additive allowance ``c n^1.25 ln^p(n) ln^q(1/delta) / (sqrt(alpha) eps)``."""
    if n < 2:
        return 0.0
    return c * n**1.25 * math.log(n) ** p * math.log(1.0 / budget.delta) ** q / (math.sqrt(alpha) * budget.epsilon)


def pipeline_psi(n: int, decomposition_budget: PrivacyBudget, alpha: float,
                 constants: PipelineConstants = PipelineConstants(), noiseless: bool = False) -> float:
    """``psi_boost * floor / alpha``.

    Without noise the floor vanishes, and a tiny ``psi`` makes the decomposition
    split only along zero-weight cuts (weights below about ``1e-8`` are
    treated as zero).
    """
    if noiseless:
        return NOISELESS_PSI
    boost = 8.0 * math.log(max(n, 2)) if constants.psi_boost is None else constants.psi_boost
    floor = decomposition_psi_floor(n, decomposition_budget, constants.oracle, constants.dense_c)
    return boost * floor / alpha


@dataclass
class SynthReport:
    graph: WeightedGraph
    delta_budgeted: float
    alpha: float
    psi: float
    decomposition: Decomposition
    sparse: SparseSynthResult
    ledger: BudgetLedger
    sparse_graph_input_weight: float = 0.0


def _check_budget(budget: PrivacyBudget):
    if budget.epsilon <= 0 or not 0 < budget.delta < 0.5:
        raise BudgetError("need epsilon > 0 and 0 < delta < 1/2")


def dp_cut_synth(g: WeightedGraph, budget: PrivacyBudget, alpha: float, noise: NoiseSource | None = None,
                 constants: PipelineConstants = PipelineConstants(), psi: float | None = None) -> SynthReport:
    """Private synthetic graph approximating every cut within ``(1 +- alpha) w + Delta``.

    ``psi`` overrides the decomposition's sparsity target (it must still
    clear the oracle's noise floor unless the source is noiseless).
    """
    if not 0 < alpha < 1:
        raise GraphInputError("alpha must lie in (0, 1)")
    _check_budget(budget)
    noise = noise or NoiseSource()
    n = g.n
    b_dec, b_sparse, b_dense = constants.budgets(budget)
    if psi is None:
        psi = pipeline_psi(n, b_dec, alpha, constants, noise.noiseless)
    ledger = BudgetLedger()

    dec = expander_decompose(g, psi, b_dec, noise.child("decompose"), constants.oracle, constants.dense_c)
    ledger.charge("decomposition", b_dec)

    lab = dec.labels(n) if n else np.zeros(0, dtype=np.int64)
    u, v, w = g.edge_arrays()
    between = lab[u] != lab[v]
    g_sparse = WeightedGraph.from_arrays(n, u[between], v[between], w[between])
    sp = sparse_synth(g_sparse, b_sparse, noise.child("sparse"), rounds=constants.mw_rounds,
                      copies=constants.boost_copies, restarts=constants.restarts, bound_c=constants.sparse_c)
    ledger.charge("sparse_edges", b_sparse)

    su, sv, sw = sp.graph.edge_arrays()
    keep = lab[su] != lab[sv]
    us, vs, ws = [su[keep]], [sv[keep]], [sw[keep]]
    lam = float(n) ** -10 if n >= 2 else 1e-3
    for idx, part in enumerate(dec.parts):
        if len(part) < 2:
            continue
        sub = g.induced(part)
        res = dense_synth(sub.graph, b_dense, lam, noise.child(("part", idx)), constants.dense_c)
        pu, pv, pw = res.graph.edge_arrays()
        us.append(sub.vertices[pu])
        vs.append(sub.vertices[pv])
        ws.append(pw)
    ledger.charge("dense_parts", b_dense)

    out = WeightedGraph.from_arrays(n, np.concatenate(us), np.concatenate(vs), np.concatenate(ws))
    dbud = delta_budget(n, budget, alpha, constants.delta_c, constants.delta_log_n_power, constants.delta_log_delta_power)
    return SynthReport(out, dbud, alpha, psi, dec, sp, ledger.seal(), float(w[between].sum()))


@dataclass
class PipelineOutput:
    sparsifier: SparsifierOutput
    synth: SynthReport

    @property
    def graph(self) -> WeightedGraph:
        return self.sparsifier.graph

    @property
    def edge_count(self) -> int:
        return self.sparsifier.edge_count


def dp_sparse_pipeline(g: WeightedGraph, budget: PrivacyBudget, gamma: float, noise: NoiseSource | None = None,
                       constants: PipelineConstants = PipelineConstants(), psi: float | None = None) -> PipelineOutput:
    """Private synthesis at ``alpha = gamma/100`` followed by sparsification at the same accuracy."""
    if not 0 < gamma < 1:
        raise GraphInputError("gamma must lie in (0, 1)")
    noise = noise or NoiseSource()
    g_prime = gamma / 100.0
    synth = dp_cut_synth(g, budget, g_prime, noise.child("synth"), constants, psi=psi)
    sp = er_sparsify(synth.graph, g_prime, seed=noise.child("sparsify").rng(), c_s=constants.sparsifier_c)
    return PipelineOutput(sp, synth)
