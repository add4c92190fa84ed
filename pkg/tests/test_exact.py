from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from crncert import exact
from crncert.exact import ExactMatrix


def int_matrices(max_rows=4, max_cols=4, lo=-3, hi=3):
    return st.integers(1, max_rows).flatmap(lambda r: st.integers(1, max_cols).flatmap(
        lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c),
                           min_size=r, max_size=r)))


def leibniz(M):
    n = len(M)
    total = 0
    for perm in permutations(range(n)):
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        prod = 1
        for i, j in enumerate(perm):
            prod *= M[i][j]
        total += (-1) ** inv * prod
    return total


def test_matrix_basics():
    A = ExactMatrix([[1, 2], [3, 4]])
    assert A.shape == (2, 2)
    assert A.T == ExactMatrix([[1, 3], [2, 4]])
    assert A @ A == ExactMatrix([[7, 10], [15, 22]])
    assert (A - A).is_zero()
    assert A[1, 0] == 3
    assert A.to_strings() == [["1", "2"], ["3", "4"]]


def test_fraction_entries_stay_exact():
    A = ExactMatrix([["1/3", "2/3"]])
    assert A[0, 0] == Fraction(1, 3)
    assert (A @ ExactMatrix([[3], [3]]))[0, 0] == 3


def test_ragged_rows_rejected():
    with pytest.raises(ValueError):
        ExactMatrix([[1, 2], [3]])


@settings(max_examples=200, deadline=None)
@given(int_matrices())
def test_rank_matches_sympy(rows):
    assert exact.rank(rows) == sympy.Matrix(rows).rank()


@settings(max_examples=200, deadline=None)
@given(int_matrices())
def test_kernel_basis_is_a_basis(rows):
    basis = exact.kernel_basis(rows)
    ncols = len(rows[0])
    assert len(basis) == ncols - exact.rank(rows)
    for v in basis:
        assert exact.in_kernel(rows, v)
    if basis:
        assert exact.rank([list(v) for v in basis]) == len(basis)


@settings(max_examples=200, deadline=None)
@given(int_matrices(max_rows=4, max_cols=4))
def test_determinant_matches_leibniz(rows):
    n = min(len(rows), len(rows[0]))
    sq = [r[:n] for r in rows[:n]]
    assert exact.determinant(sq) == leibniz(sq)


def test_exact_minor_selects_submatrix():
    M = [[1, 2, 3], [4, 5, 6], [7, 8, 10]]
    assert exact.exact_minor(M, [0, 2], [0, 2]) == 1 * 10 - 3 * 7
    assert exact.exact_minor(M, [], []) == 1


@settings(max_examples=100, deadline=None)
@given(int_matrices(), int_matrices())
def test_equal_kernels_symmetric_and_row_space_invariant(a, b):
    if len(a[0]) != len(b[0]):
        return
    assert exact.equal_kernels(a, b) == exact.equal_kernels(b, a)
    assert exact.equal_kernels(a, a + [[2 * v for v in a[0]]])


def test_primitive_integer():
    assert exact.primitive_integer([Fraction(1, 2), Fraction(-3, 4)]) == (2, -3)
    assert exact.primitive_integer([0, 0]) == (0, 0)


def test_solve_particular_and_min_norm():
    A = [[1, 1], [0, 1]]
    x = exact.solve_particular(A, [3, 1])
    assert x == [2, 1]
    assert exact.solve_particular([[1, 1], [1, 1]], [1, 2]) is None
    G = ExactMatrix([[-1, 1], [1, -1]])
    B = exact.min_norm_left_solve(ExactMatrix([[-1, 1]]), G)
    assert B == ExactMatrix([["1/2", "-1/2"]])


def test_float_roundtrip():
    rng = np.random.default_rng(0)
    M = rng.integers(-5, 6, size=(3, 4))
    assert np.array_equal(ExactMatrix(M.tolist()).to_float(), M.astype(float))
