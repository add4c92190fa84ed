import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crncert.exact import ExactMatrix
from crncert.partition import (KernelMismatch, PartitionError, PartitionTooLarge, build_partition,
                               enumerate_regions, read_partition_file, reduce_rows, region_of)


def sign_pattern_oracle(H, samples, rng):
    """Sign patterns seen on random vectors, by brute force."""
    Hf = np.asarray(H, dtype=float)
    R = rng.standard_normal((samples, Hf.shape[1]))
    V = R @ Hf.T
    V = V[(np.abs(V) > 1e-9).all(axis=1)]
    return {tuple(int(v) for v in row) for row in np.sign(V)}


def random_H(rng, max_cols=5, max_rows=6):
    nu = int(rng.integers(1, max_cols + 1))
    p = int(rng.integers(1, max_rows + 1))
    while True:
        H = rng.integers(-2, 3, size=(p, nu))
        if (H != 0).any(axis=1).all():
            return H


def test_net_rev_partition(net_rev):
    part = build_partition(net_rev.gamma_exact)
    assert part.m == 2
    assert part.signatures == ((1,), (-1,))
    assert part.full_signatures == ((1, -1), (-1, 1))
    assert part.neighbors[0][0].region == 1 and part.neighbors[0][0].row == 0


def test_identity_partition_orthants():
    part = enumerate_regions([[1, 0], [0, 1]])
    assert part.m == 4
    assert set(part.signatures) == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    assert all(len(nb) == 2 for nb in part.neighbors)


def test_three_lines_give_six_regions():
    assert enumerate_regions([[1, 0], [0, 1], [1, 1]]).m == 6


def test_reduce_rows_maps_parallel_rows():
    red = reduce_rows([[1, -1], [-2, 2], [0, 1]])
    assert red.origin == (0, 2)
    assert red.row_map == ((0, 1), (0, -1), (1, 1))
    with pytest.raises(PartitionError):
        reduce_rows([[0, 0]])


def test_kernel_mismatch(net_rev):
    with pytest.raises(KernelMismatch):
        build_partition(net_rev.gamma_exact, [[1, 0], [0, 1]])
    with pytest.raises(KernelMismatch):
        build_partition(net_rev.gamma_exact, [[1, -1, 0]])


def test_too_large():
    with pytest.raises(PartitionTooLarge):
        enumerate_regions(np.eye(5, dtype=int), max_reduced_rows=4)


def test_default_partition_skips_untouched_species():
    # a catalyst row of Gamma is zero and constrains nothing
    part = build_partition([[0, 0], [1, -1]])
    assert part.m == 2


def test_read_partition_file():
    H = read_partition_file("# H\n1 0\n0, 1/2\n")
    assert H == ExactMatrix([[1, 0], [0, "1/2"]])
    with pytest.raises(PartitionError):
        read_partition_file("# empty\n")


@pytest.mark.parametrize("seed", range(10))
def test_region_count_matches_sampling_oracle(seed):
    rng = np.random.default_rng(seed)
    H = random_H(rng, max_cols=3, max_rows=4)
    part = enumerate_regions(H.tolist())
    red = part.H_reduced_float
    assert set(part.signatures) == sign_pattern_oracle(red, 20000, rng)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_partition_properties(seed):
    rng = np.random.default_rng(seed)
    H = random_H(rng, max_cols=4, max_rows=5)
    part = enumerate_regions(H.tolist())
    m = part.m
    Ht = part.H_reduced_float
    # sign pairing and strictly interior witnesses
    for k in range(m):
        assert part.signatures[part.mirror(k)] == tuple(-v for v in part.signatures[k])
        assert (np.array(part.signatures[k]) * (Ht @ part.witnesses[k]) > 0).all()
    # full signatures expand the reduced ones through the row map
    for k in range(m):
        for row, (pos, sgn) in enumerate(part.row_map):
            assert part.full_signatures[k][row] == part.signatures[k][pos] * sgn
    # union covers everything, and a generic vector lies in exactly one interior
    for r in rng.standard_normal((50, Ht.shape[1])):
        vals = Ht @ r
        inside = [k for k in range(m) if (np.array(part.signatures[k]) * vals >= -1e-12).all()]
        assert inside and region_of(part, r) == inside[0]
        if (np.abs(vals) > 1e-9).all():
            assert len(inside) == 1
    # neighbors are exactly the Hamming-distance-1 pairs, symmetric
    for k in range(m):
        expected = {j for j in range(m)
                    if sum(a != b for a, b in zip(part.signatures[k], part.signatures[j])) == 1}
        assert {nb.region for nb in part.neighbors[k]} == expected
        for nb in part.neighbors[k]:
            assert nb.sign == part.full_signatures[k][nb.row]
    assert len(part.neighbor_pairs()) == sum(len(n) for n in part.neighbors) // 2
