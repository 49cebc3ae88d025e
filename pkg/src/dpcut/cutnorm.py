"""Cut norm ``max_{I,J} |sum_{i in I, j in J} A_ij|``: exact and local search.

For a fixed row set ``I`` the best column set is determined by the signs
of the column sums of ``A[I]``, so the exact routine only enumerates the
``2**n`` row subsets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import OracleTooLargeError

__all__ = ["CUT_NORM_EXACT_CAP", "CutNormEstimate", "cut_norm_exact", "cut_norm_heuristic", "rectangle_sum"]

CUT_NORM_EXACT_CAP = 16


@dataclass(frozen=True)
class CutNormEstimate:
    value: float
    witness: tuple  # (rows I, cols J) as sorted tuples
    exact: bool
    sign: int = 1  # sign of the witnessed sum

    @property
    def rows(self) -> tuple:
        return self.witness[0]

    @property
    def cols(self) -> tuple:
        return self.witness[1]


def rectangle_sum(a: np.ndarray, rows, cols) -> float:
    a = np.asarray(a, dtype=float)
    return float(a[np.ix_(list(rows), list(cols))].sum()) if len(rows) and len(cols) else 0.0


def cut_norm_exact(a) -> CutNormEstimate:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("cut norm needs a matrix")
    n, m = a.shape
    if n > CUT_NORM_EXACT_CAP:
        raise OracleTooLargeError(f"{n} rows is too large for the exact cut norm; use cut_norm_heuristic")
    sums = np.zeros((1, m))
    for i in range(n):
        sums = np.concatenate([sums, sums + a[i]], axis=0)
    pos = np.where(sums > 0, sums, 0.0).sum(axis=1)
    neg = np.where(sums < 0, -sums, 0.0).sum(axis=1)
    ip, ineg = int(pos.argmax()), int(neg.argmax())
    if pos[ip] >= neg[ineg]:
        mask, cols, sign = ip, np.flatnonzero(sums[ip] > 0), 1
    else:
        mask, cols, sign = ineg, np.flatnonzero(sums[ineg] < 0), -1
    rows = tuple(i for i in range(n) if (mask >> i) & 1)
    cols = tuple(int(j) for j in cols)
    if not cols:
        rows = ()
    return CutNormEstimate(abs(rectangle_sum(a, rows, cols)), (rows, cols), True, sign)


def cut_norm_heuristic(a, restarts: int = 32, seed=None, max_iter: int = 100) -> CutNormEstimate:
    """Alternating maximisation from ``restarts`` starts, for both signs.

    The first start uses all columns. The returned value is the exact sum
    over the returned witness, so it never exceeds the true cut norm.
    """
    a = np.asarray(a, dtype=float)
    n, m = a.shape
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    restarts = max(int(restarts), 1)
    best = (0.0, (), (), 1)
    for sign in (1, -1):
        b = sign * a
        cols = rng.random((restarts, m)) < 0.5
        cols[0] = True
        rows = np.zeros((restarts, n), dtype=bool)
        for _ in range(max_iter):
            new_rows = (cols.astype(float) @ b.T) > 0
            new_cols = (new_rows.astype(float) @ b) > 0
            done = np.array_equal(new_rows, rows) and np.array_equal(new_cols, cols)
            rows, cols = new_rows, new_cols
            if done:
                break
        vals = ((rows.astype(float) @ b) * cols).sum(axis=1)
        k = int(vals.argmax())
        if vals[k] > best[0]:
            best = (float(vals[k]), tuple(np.flatnonzero(rows[k]).tolist()),
                    tuple(np.flatnonzero(cols[k]).tolist()), sign)
    _, r, c, sign = best
    return CutNormEstimate(abs(rectangle_sum(a, r, c)), (r, c), False, sign)
