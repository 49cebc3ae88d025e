"""Privacy budgets, basic composition, keyed noise and a scalar DP audit."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BudgetError",
    "PrivacyBudget",
    "BudgetLedger",
    "compose",
    "gaussian_sigma_for",
    "NoiseSource",
    "NoiseSpec",
    "AuditReport",
    "audit_scalar_mechanism",
]


class BudgetError(ValueError):
    """Invalid privacy parameters."""


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise BudgetError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not 0.0 <= self.delta < 1.0:
            raise BudgetError(f"delta must lie in [0, 1), got {self.delta}")

    def split(self, k: int) -> list["PrivacyBudget"]:
        if k < 1:
            raise BudgetError("cannot split a budget into fewer than one part")
        return [PrivacyBudget(self.epsilon / k, self.delta / k) for _ in range(k)]

    def scaled(self, factor: float) -> "PrivacyBudget":
        return PrivacyBudget(self.epsilon * factor, self.delta * factor)

    def __add__(self, other: "PrivacyBudget") -> "PrivacyBudget":
        return PrivacyBudget(self.epsilon + other.epsilon, self.delta + other.delta)

    def covers(self, other: "PrivacyBudget", rtol: float = 1e-9) -> bool:
        """True when ``other`` fits inside this budget (up to float slack)."""
        return (other.epsilon <= self.epsilon * (1 + rtol) + 1e-300
                and other.delta <= self.delta * (1 + rtol) + 1e-300)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta}


def compose(budgets: Iterable[PrivacyBudget]) -> PrivacyBudget:
    """Basic composition: component-wise sum."""
    eps = []
    dlt = []
    for b in budgets:
        eps.append(b.epsilon)
        dlt.append(b.delta)
    return PrivacyBudget(math.fsum(eps), math.fsum(dlt))


@dataclass
class BudgetLedger:
    """Ordered record of ``(label, budget)`` charges."""

    charges: list = field(default_factory=list)
    sealed: bool = False

    def charge(self, label: str, budget: PrivacyBudget) -> PrivacyBudget:
        if self.sealed:
            raise BudgetError("ledger is sealed")
        self.charges.append((label, budget))
        return budget

    def extend(self, other: "BudgetLedger", prefix: str = "") -> None:
        for label, b in other.charges:
            self.charge(prefix + label, b)

    def total(self) -> PrivacyBudget:
        return compose(b for _, b in self.charges)

    def seal(self) -> "BudgetLedger":
        self.sealed = True
        return self

    def __len__(self):
        return len(self.charges)

    def to_list(self) -> list[dict]:
        return [{"label": label, **b.to_dict()} for label, b in self.charges]


def gaussian_sigma_for(epsilon: float, delta: float) -> float:
    """Classical Gaussian-mechanism scale for an L2-sensitivity-1 query."""
    if delta <= 0:
        raise BudgetError("the Gaussian mechanism needs delta > 0")
    if epsilon <= 0:
        raise BudgetError("the Gaussian mechanism needs epsilon > 0")
    return math.sqrt(2.0 * math.log(1.25 / delta)) / epsilon


def _label_key(label) -> int:
    digest = hashlib.blake2b(str(label).encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class NoiseSource:
    """Counter-based randomness keyed by ``(seed, label path, draw index)``.

    ``child(label)`` derives an independent stream for a sub-computation, so
    results do not depend on the order in which siblings run. With
    ``noiseless=True`` every privacy-noise draw is exactly zero (debugging
    only -- nothing produced this way is private); non-noise randomness
    such as restarts or sparsifier sampling still comes from :meth:`rng`.
    """

    seed: int = 0
    path: tuple = ()
    noiseless: bool = False

    def child(self, label) -> "NoiseSource":
        return NoiseSource(self.seed, self.path + (_label_key(label),), self.noiseless)

    def rng(self, index: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=self.path + (int(index),))
        return np.random.Generator(np.random.Philox(ss))

    def gaussian(self, sigma: float, size=None, index: int = 0):
        if self.noiseless or sigma == 0:
            return np.zeros(size) if size is not None else 0.0
        return self.rng(index).normal(0.0, sigma, size)

    def laplace(self, scale: float, size=None, index: int = 0):
        if self.noiseless or scale == 0:
            return np.zeros(size) if size is not None else 0.0
        return self.rng(index).laplace(0.0, scale, size)


@dataclass(frozen=True)
class NoiseSpec:
    """One additive-noise family for the scalar audit."""

    family: str
    scale: float
    seed: int = 0

    def __post_init__(self):
        if self.family not in ("laplace", "gaussian"):
            raise BudgetError(f"unknown noise family {self.family!r}")
        if not self.scale > 0:
            raise BudgetError("noise scale must be > 0")

    def sample(self, size: int, index: int = 0) -> np.ndarray:
        src = NoiseSource(self.seed).child(self.family)
        if self.family == "laplace":
            return src.laplace(self.scale, size, index=index)
        return src.gaussian(self.scale, size, index=index)


@dataclass(frozen=True)
class AuditReport:
    family: str
    sigma_or_scale: float
    trials: int
    epsilon_hat: float
    bins: int
    smoothed_bins: int

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "sigma_or_scale": self.sigma_or_scale,
            "trials": self.trials,
            "epsilon_hat": self.epsilon_hat,
            "bins": self.bins,
            "smoothed_bins": self.smoothed_bins,
        }


def audit_scalar_mechanism(noise: NoiseSpec, sensitivity: float = 1.0, trials: int = 10**6,
                           bins: int = 50, value_range: Sequence[float] | None = None,
                           tail: float = 1e-3) -> AuditReport:
    """Empirical epsilon of ``x + noise`` between inputs ``0`` and ``sensitivity``.

    Bins hold equal pooled mass, so every bin has ``~2*trials/bins`` samples
    and the log-ratio estimate has the same variance everywhere. Outputs
    outside ``value_range`` (default: the central ``1 - 2*tail`` pooled mass)
    are ignored. Bins empty on one side get add-one smoothing and are
    counted in the report.
    """
    a = noise.sample(trials, index=0)
    b = noise.sample(trials, index=1) + sensitivity
    pooled = np.concatenate([a, b])
    if value_range is None:
        lo, hi = np.quantile(pooled, [tail, 1 - tail])
    else:
        lo, hi = value_range
    inside = pooled[(pooled >= lo) & (pooled <= hi)]
    edges = np.unique(np.quantile(inside, np.linspace(0, 1, bins + 1)))
    ca, _ = np.histogram(a, edges)
    cb, _ = np.histogram(b, edges)
    empty = (ca == 0) | (cb == 0)
    ca = ca + empty
    cb = cb + empty
    ratio = np.abs(np.log(ca / cb))
    return AuditReport(noise.family, noise.scale, trials, float(ratio.max()), int(edges.size - 1), int(empty.sum()))
