"""Dense two-phase simplex with Bland's rule.

Problems are stated over free or nonnegative variables with equality rows
``a.y == b`` and inequality rows ``a.y >= b``. Phase 1 decides feasibility
(infeasible when its optimum exceeds ``PHASE1_CUTOFF``); phase 2 minimises an
optional linear objective. Every reported point is re-checked against the
original rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._kernels import bland_simplex

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
PHASE1_CUTOFF = 1e-7
PIVOT_EPS = 1e-10
MAX_ITER = 200_000


class LPError(RuntimeError):
    """Malformed program or numerical breakdown of the simplex."""


@dataclass
class LPResult:
    feasible: bool
    point: np.ndarray | None = None
    objective: float | None = None
    status: str = "infeasible"
    iterations: int = 0
    phase1_value: float = 0.0


class LinearProgram:
    """Builder for a linear program over ``n_vars`` variables.

    Variables are free unless declared nonnegative. Rows may be given as dense
    sequences or as ``{index: coefficient}`` mappings.
    """

    def __init__(self, n_vars: int = 0, nonneg: Sequence[bool] | bool = False):
        self.n_vars = n_vars
        if isinstance(nonneg, bool):
            self._nonneg = [nonneg] * n_vars
        else:
            if len(nonneg) != n_vars:
                raise ValueError("nonneg mask length differs from variable count")
            self._nonneg = list(nonneg)
        self._eq: list[tuple[dict[int, float], float]] = []
        self._ge: list[tuple[dict[int, float], float]] = []
        self._objective: dict[int, float] | None = None

    def add_variables(self, count: int, nonneg: bool = False) -> np.ndarray:
        """Append ``count`` variables and return their indices."""
        start = self.n_vars
        self.n_vars += count
        self._nonneg.extend([nonneg] * count)
        return np.arange(start, start + count)

    def _row(self, coeffs) -> dict[int, float]:
        if isinstance(coeffs, Mapping):
            row = {}
            for k, v in coeffs.items():
                k = int(k)
                if not 0 <= k < self.n_vars:
                    raise LPError(f"variable index {k} out of range")
                if v != 0:
                    row[k] = row.get(k, 0.0) + float(v)
            return row
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.n_vars,):
            raise LPError(f"row has length {coeffs.shape}, expected {self.n_vars}")
        return {int(i): float(coeffs[i]) for i in np.nonzero(coeffs)[0]}

    def add_eq(self, coeffs, rhs: float) -> None:
        self._eq.append((self._row(coeffs), float(rhs)))

    def add_ge(self, coeffs, rhs: float) -> None:
        self._ge.append((self._row(coeffs), float(rhs)))

    def add_le(self, coeffs, rhs: float) -> None:
        row = self._row(coeffs)
        self._ge.append(({k: -v for k, v in row.items()}, -float(rhs)))

    def set_objective(self, coeffs) -> None:
        """Objective to minimise."""
        self._objective = self._row(coeffs)

    @property
    def nonneg(self) -> np.ndarray:
        return np.array(self._nonneg, dtype=bool)

    def _dense(self, rows) -> tuple[np.ndarray, np.ndarray]:
        A = np.zeros((len(rows), self.n_vars))
        b = np.zeros(len(rows))
        for i, (row, rhs) in enumerate(rows):
            for k, v in row.items():
                A[i, k] = v
            b[i] = rhs
        return A, b

    @property
    def A_eq(self):
        return self._dense(self._eq)[0]

    @property
    def b_eq(self):
        return self._dense(self._eq)[1]

    @property
    def A_ge(self):
        return self._dense(self._ge)[0]

    @property
    def b_ge(self):
        return self._dense(self._ge)[1]

    @property
    def objective(self) -> np.ndarray | None:
        if self._objective is None:
            return None
        c = np.zeros(self.n_vars)
        for k, v in self._objective.items():
            c[k] = v
        return c

    def violation(self, y: np.ndarray) -> float:
        """Largest constraint violation of the point ``y``."""
        worst = 0.0
        if self._eq:
            A, b = self._dense(self._eq)
            worst = max(worst, float(np.max(np.abs(A @ y - b))))
        if self._ge:
            A, b = self._dense(self._ge)
            worst = max(worst, float(np.max(b - A @ y)))
        if self.n_vars:
            neg = y[self.nonneg]
            if neg.size:
                worst = max(worst, float(-neg.min()))
        return worst


def _standard_form(lp: LinearProgram):
    nonneg = lp.nonneg
    cols = []  # (original var, sign)
    for v in range(lp.n_vars):
        cols.append((v, 1.0))
        if not nonneg[v]:
            cols.append((v, -1.0))
    n_struct = len(cols)
    A_eq, b_eq = lp._dense(lp._eq)
    A_ge, b_ge = lp._dense(lp._ge)
    m_eq, m_ge = len(b_eq), len(b_ge)
    m = m_eq + m_ge
    A = np.zeros((m, n_struct + m_ge))
    var_idx = np.array([c[0] for c in cols], dtype=int)
    sign = np.array([c[1] for c in cols])
    if m_eq:
        A[:m_eq, :n_struct] = A_eq[:, var_idx] * sign
    if m_ge:
        A[m_eq:, :n_struct] = A_ge[:, var_idx] * sign
        A[m_eq:, n_struct:] = -np.eye(m_ge)
    b = np.concatenate([b_eq, b_ge])
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    c = np.zeros(A.shape[1])
    obj = lp.objective
    if obj is not None:
        c[:n_struct] = obj[var_idx] * sign
    return A, b, c, var_idx, sign, n_struct


def _extract(T, basis, n_cols, var_idx, sign, n_vars):
    x = np.zeros(n_cols)
    for i, j in enumerate(basis):
        if j < n_cols:
            x[j] = max(T[i, -1], 0.0)
    y = np.zeros(n_vars)
    n_struct = len(var_idx)
    np.add.at(y, var_idx, sign * x[:n_struct])
    return y


def _polish(A, b, basis, n_cols, var_idx, sign, n_vars):
    cols = [j for j in basis if j < n_cols]
    x = np.zeros(n_cols)
    if cols:
        xb, *_ = np.linalg.lstsq(A[:, cols], b, rcond=None)
        x[cols] = np.maximum(xb, 0.0)
    y = np.zeros(n_vars)
    np.add.at(y, var_idx, sign * x[:len(var_idx)])
    return y


def _run(lp: LinearProgram, optimise: bool) -> LPResult:
    A, b, c, var_idx, sign, n_struct = _standard_form(lp)
    m, n = A.shape

    # phase 1: artificial identity basis
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m, dtype=np.int64)
    T = np.ascontiguousarray(T)
    status, it1 = bland_simplex(T, basis, n, PIVOT_EPS, MAX_ITER)
    if status == 1:
        raise LPError("phase 1 reported unbounded; program is malformed")
    if status == 2:
        raise LPError("phase 1 iteration limit reached")
    w = -T[m, -1]
    if w > PHASE1_CUTOFF:
        return LPResult(False, None, None, "infeasible", it1, w)

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            row = T[i, :n]
            cand = np.nonzero(np.abs(row) > 1e-9)[0]
            if cand.size == 0:
                continue
            j = int(cand[np.argmax(np.abs(row[cand]))])
            T[i] /= T[i, j]
            for r in range(m + 1):
                if r != i and T[r, j] != 0.0:
                    T[r] -= T[r, j] * T[i]
            basis[i] = j
        keep.append(i)
    T2 = np.zeros((len(keep) + 1, n + 1))
    T2[:-1, :n] = T[keep, :n]
    T2[:-1, -1] = T[keep, -1]
    basis2 = basis[keep].copy()
    iterations = it1
    result_status = "optimal"
    if optimise:
        T2[-1, :n] = c
        for i, j in enumerate(basis2):
            if c[j] != 0.0:
                T2[-1] -= c[j] * T2[i]
        T2 = np.ascontiguousarray(T2)
        status, it2 = bland_simplex(T2, basis2, n, PIVOT_EPS, MAX_ITER)
        iterations += it2
        if status == 2:
            raise LPError("phase 2 iteration limit reached")
        if status == 1:
            result_status = "unbounded"

    y = _extract(T2, basis2, n, var_idx, sign, lp.n_vars)
    if lp.violation(y) > FEAS_TOL:
        y = _polish(A, b, basis2, n, var_idx, sign, lp.n_vars)
        if lp.violation(y) > FEAS_TOL:
            raise LPError(f"simplex point violates constraints by {lp.violation(y):.3e}")
    obj = lp.objective
    value = float(obj @ y) if obj is not None else 0.0
    if result_status == "unbounded":
        value = -np.inf
    return LPResult(True, y, value, result_status, iterations, w)


def lp_feasible(lp: LinearProgram) -> LPResult:
    """Decide feasibility; the objective, if any, is ignored."""
    return _run(lp, optimise=False)


def lp_solve(lp: LinearProgram) -> LPResult:
    """Minimise the objective over the feasible set."""
    return _run(lp, optimise=True)
