"""Exact rational linear algebra on small dense matrices.

Kernels, ranks and minors decide certificate validity, so they are computed
with :class:`fractions.Fraction` rather than floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(float(v))


class ExactMatrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        data = tuple(tuple(to_fraction(v) for v in row) for row in rows)
        if data:
            widths = {len(r) for r in data}
            if len(widths) != 1:
                raise ValueError("ragged rows")
            width = widths.pop()
            if ncols is not None and ncols != width:
                raise ValueError(f"expected {ncols} columns, got {width}")
        else:
            if ncols is None:
                raise ValueError("ncols required for an empty matrix")
            width = ncols
        self.rows = data
        self.nrows = len(data)
        self.ncols = width

    @classmethod
    def coerce(cls, M) -> "ExactMatrix":
        if isinstance(M, ExactMatrix):
            return M
        arr = M
        if isinstance(M, np.ndarray):
            if M.ndim != 2:
                raise ValueError("expected a 2-D array")
            return cls(M.tolist(), ncols=M.shape[1])
        rows = [list(r) for r in arr]
        return cls(rows, ncols=len(rows[0]) if rows else None)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "ExactMatrix":
        return cls([[0] * ncols for _ in range(nrows)], ncols=ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def __eq__(self, other) -> bool:
        other = ExactMatrix.coerce(other)
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.shape, self.rows))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(v) for v in r) + "]" for r in self.rows)
        return f"ExactMatrix([{body}])"

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix([[r[j] for r in self.rows] for j in range(self.ncols)],
                           ncols=self.nrows)

    def __matmul__(self, other) -> "ExactMatrix":
        other = ExactMatrix.coerce(other)
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = other.T.rows
        return ExactMatrix(
            [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols]
             for row in self.rows],
            ncols=other.ncols,
        )

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix([[-v for v in r] for r in self.rows], ncols=self.ncols)

    def __sub__(self, other) -> "ExactMatrix":
        other = ExactMatrix.coerce(other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return ExactMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                           ncols=self.ncols)

    def __add__(self, other) -> "ExactMatrix":
        return self - (-ExactMatrix.coerce(other))

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.rows[i]

    def is_zero(self) -> bool:
        return all(v == 0 for r in self.rows for v in r)

    def to_float(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.rows], dtype=float).reshape(self.shape)

    def to_strings(self) -> list[list[str]]:
        return [[str(v) for v in r] for r in self.rows]


def rref(M) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = ExactMatrix.coerce(M)
    A = [list(r) for r in M.rows]
    pivots: list[int] = []
    r = 0
    for c in range(M.ncols):
        if r >= len(A):
            break
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M) -> int:
    return len(rref(M)[1])


def kernel_basis(M) -> list[tuple[Fraction, ...]]:
    """Basis of the right null space, one vector per free column."""
    M = ExactMatrix.coerce(M)
    R, pivots = rref(M)
    free = [c for c in range(M.ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * M.ncols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][f]
        basis.append(tuple(v))
    return basis


def left_kernel_basis(M) -> list[tuple[Fraction, ...]]:
    return kernel_basis(ExactMatrix.coerce(M).T)


def primitive_integer(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to coprime integers, first nonzero entry positive."""
    den = lcm(*(Fraction(x).denominator for x in v)) if v else 1
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    ints = [x // g for x in ints]
    first = next((x for x in ints if x), 0)
    if first < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def in_kernel(M, v: Sequence) -> bool:
    M = ExactMatrix.coerce(M)
    v = [to_fraction(x) for x in v]
    return all(sum((a * b for a, b in zip(row, v)), Fraction(0)) == 0 for row in M.rows)


def equal_kernels(M1, M2) -> bool:
    """True iff the null spaces of M1 and M2 coincide (mutual containment)."""
    M1 = ExactMatrix.coerce(M1)
    M2 = ExactMatrix.coerce(M2)
    if M1.ncols != M2.ncols:
        raise ValueError(f"column counts differ: {M1.ncols} vs {M2.ncols}")
    return all(in_kernel(M2, v) for v in kernel_basis(M1)) and \
        all(in_kernel(M1, v) for v in kernel_basis(M2))


def determinant(M) -> Fraction:
    M = ExactMatrix.coerce(M)
    if M.nrows != M.ncols:
        raise ValueError("determinant of a non-square matrix")
    A = [list(r) for r in M.rows]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        inv = 1 / A[c][c]
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] * inv
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return det


def exact_minor(M, rows: Sequence[int], cols: Sequence[int]) -> Fraction:
    """Determinant of the submatrix on the given row and column indices (0-based)."""
    M = ExactMatrix.coerce(M)
    if len(rows) != len(cols):
        raise ValueError("minor needs equally many rows and columns")
    for i in rows:
        if not 0 <= i < M.nrows:
            raise IndexError(f"row index {i} out of range")
    for j in cols:
        if not 0 <= j < M.ncols:
            raise IndexError(f"column index {j} out of range")
    if not rows:
        return Fraction(1)
    return determinant([[M.rows[i][j] for j in cols] for i in rows])


def solve_particular(A, b: Sequence) -> list[Fraction] | None:
    """One solution of A y = b, free variables set to zero; None if inconsistent."""
    A = ExactMatrix.coerce(A)
    aug = ExactMatrix([list(r) + [to_fraction(v)] for r, v in zip(A.rows, b)], ncols=A.ncols + 1)
    R, pivots = rref(aug)
    if A.ncols in pivots:
        return None
    y = [Fraction(0)] * A.ncols
    for i, pc in enumerate(pivots):
        y[pc] = R[i][-1]
    return y


def min_norm_left_solve(C, Gamma) -> ExactMatrix | None:
    """Minimum-norm B with B @ Gamma == C, row by row; None if no solution.

    Each row b is the unique solution lying in the column space of Gamma:
    b = Gamma y with (Gamma^T Gamma) y = c.
    """
    C = ExactMatrix.coerce(C)
    G = ExactMatrix.coerce(Gamma)
    if C.ncols != G.ncols:
        raise ValueError("column counts differ")
    gram = G.T @ G
    out = []
    for c in C.rows:
        y = solve_particular(gram, c)
        if y is None:
            return None
        b = [sum((g * yy for g, yy in zip(row, y)), Fraction(0)) for row in G.rows]
        bg = [sum((bi * G.rows[i][j] for i, bi in enumerate(b)), Fraction(0)) for j in range(G.ncols)]
        if bg != list(c):
            return None
        out.append(b)
    return ExactMatrix(out, ncols=G.nrows)


def independent_columns(M) -> list[int]:
    """Pivot columns of M: a maximal set of linearly independent columns."""
    return rref(M)[1]
