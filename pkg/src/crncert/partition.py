"""Conic partitions of reaction space generated by a partitioning matrix H.

Each region is a closed cone ``{r : Sigma_k H r >= 0}`` with nonempty interior,
labelled by a sign vector over the rows of ``H`` that survive removal of
parallel duplicates. Regions come in +/- pairs and are ordered so that region
``m - 1 - k`` (0-based) is the negation of region ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import exact
from .exact import ExactMatrix
from .lp import LinearProgram, lp_feasible

MAX_REDUCED_ROWS = 24


class PartitionError(ValueError):
    """H cannot define a proper conic partition."""


class PartitionTooLarge(PartitionError):
    """Enumeration bound exceeded."""


class KernelMismatch(PartitionError):
    """ker H differs from ker Gamma."""


@dataclass(frozen=True)
class RowReduction:
    reduced: ExactMatrix
    origin: tuple[int, ...]  # original row index of each reduced row
    row_map: tuple[tuple[int, int], ...]  # original row -> (reduced row, relative sign)


def _parallel(u, v) -> Fraction | None:
    """Return t with u == t*v, or None."""
    t = None
    for a, b in zip(u, v):
        if b == 0:
            if a != 0:
                return None
            continue
        r = a / b
        if t is None:
            t = r
        elif r != t:
            return None
    return t


def reduce_rows(H) -> RowReduction:
    """Drop every row that is a scalar multiple of an earlier kept row."""
    H = ExactMatrix.coerce(H)
    if H.nrows == 0:
        raise PartitionError("H has no rows")
    kept: list[int] = []
    row_map = []
    for i, row in enumerate(H.rows):
        if all(v == 0 for v in row):
            raise PartitionError(f"row {i} of H is zero and defines no inequality")
        for pos, k in enumerate(kept):
            t = _parallel(row, H.rows[k])
            if t is not None:
                row_map.append((pos, 1 if t > 0 else -1))
                break
        else:
            row_map.append((len(kept), 1))
            kept.append(i)
    return RowReduction(ExactMatrix([H.rows[k] for k in kept], ncols=H.ncols),
                        tuple(kept), tuple(row_map))


@dataclass(frozen=True)
class Neighbor:
    region: int
    row: int  # original H row whose inequality is switched
    sign: int  # sign of that row in the region owning this entry


@dataclass(frozen=True)
class ConicPartition:
    H: ExactMatrix
    H_reduced: ExactMatrix
    origin: tuple[int, ...]
    row_map: tuple[tuple[int, int], ...]
    signatures: tuple[tuple[int, ...], ...]  # reduced sign vectors
    full_signatures: tuple[tuple[int, ...], ...]
    witnesses: tuple[np.ndarray, ...]
    neighbors: tuple[tuple[Neighbor, ...], ...]

    @cached_property
    def H_reduced_float(self) -> np.ndarray:
        return self.H_reduced.to_float()

    @property
    def m(self) -> int:
        return len(self.signatures)

    @property
    def half(self) -> int:
        return self.m // 2

    @property
    def p(self) -> int:
        return self.H.nrows

    @property
    def p_reduced(self) -> int:
        return self.H_reduced.nrows

    def sigma(self, k: int) -> np.ndarray:
        """Diagonal of the full p x p signature of region k."""
        return np.array(self.full_signatures[k], dtype=float)

    def mirror(self, k: int) -> int:
        return self.m - 1 - k

    def region_of(self, r, tol: float = 1e-12) -> int:
        return region_of(self, r, tol)

    def neighbor_pairs(self) -> list[tuple[int, int, int]]:
        """Unordered adjacent pairs (k, j, s) with k < j."""
        return [(k, nb.region, nb.row) for k, lst in enumerate(self.neighbors)
                for nb in lst if k < nb.region]


def _interior_point(Ht: np.ndarray, sigma) -> np.ndarray | None:
    lp = LinearProgram(Ht.shape[1])
    for s, row in zip(sigma, Ht):
        lp.add_ge(s * row, 1.0)
    res = lp_feasible(lp)
    return res.point if res.feasible else None


def _sign_vectors(Ht: np.ndarray):
    """Depth-first search over sign prefixes; infeasible prefixes are pruned.

    The first sign is fixed to +1; negatives are added by pairing.
    """
    p = Ht.shape[0]
    out = []
    stack = [((1,), None)]
    while stack:
        prefix, _ = stack.pop()
        point = _interior_point(Ht[:len(prefix)], prefix)
        if point is None:
            continue
        if len(prefix) == p:
            out.append((prefix, point))
            continue
        # push -1 first so +1 branches are explored (and emitted) first
        stack.append((prefix + (-1,), None))
        stack.append((prefix + (1,), None))
    return out


def enumerate_regions(H, max_reduced_rows: int = MAX_REDUCED_ROWS) -> ConicPartition:
    H = ExactMatrix.coerce(H)
    red = reduce_rows(H)
    pt = red.reduced.nrows
    if pt > max_reduced_rows:
        raise PartitionTooLarge(f"{pt} independent rows exceed the bound {max_reduced_rows}")
    Ht = red.reduced.to_float()
    first = _sign_vectors(Ht)
    sigs = [s for s, _ in first] + [tuple(-v for v in s) for s, _ in reversed(first)]
    wits = [w for _, w in first] + [-w for _, w in reversed(first)]
    full = tuple(tuple(sig[pos] * sgn for pos, sgn in red.row_map) for sig in sigs)
    index = {s: k for k, s in enumerate(sigs)}
    nbrs = []
    for k, sig in enumerate(sigs):
        lst = []
        for pos in range(pt):
            flipped = sig[:pos] + (-sig[pos],) + sig[pos + 1:]
            j = index.get(flipped)
            if j is not None:
                row = red.origin[pos]
                lst.append(Neighbor(j, row, full[k][row]))
        nbrs.append(tuple(sorted(lst, key=lambda nb: nb.region)))
    return ConicPartition(H, red.reduced, red.origin, red.row_map, tuple(sigs), full,
                          tuple(wits), tuple(nbrs))


def neighbors(part: ConicPartition) -> tuple[tuple[Neighbor, ...], ...]:
    return part.neighbors


def region_of(part: ConicPartition, r, tol: float = 1e-12) -> int:
    """Lowest-index region containing r (closed cones, relative tolerance)."""
    r = np.asarray(r, dtype=float)
    vals = part.H_reduced_float @ r
    slack = tol * max(1.0, float(np.abs(r).max(initial=0.0)))
    for k, sig in enumerate(part.signatures):
        if np.all(np.asarray(sig) * vals >= -slack):
            return k
    # numerically between regions: take the least violated one
    viol = [float(np.max(-np.asarray(sig) * vals)) for sig in part.signatures]
    return int(np.argmin(viol))


def build_partition(gamma, H=None, max_reduced_rows: int = MAX_REDUCED_ROWS) -> ConicPartition:
    """Partition for a network's Gamma, defaulting to H = Gamma; checks ker H == ker Gamma."""
    G = ExactMatrix.coerce(gamma)
    if H is None:
        # species untouched by every reaction give zero rows of Gamma; they constrain nothing
        H = ExactMatrix([row for row in G.rows if any(v != 0 for v in row)], ncols=G.ncols)
    else:
        H = ExactMatrix.coerce(H)
    if H.ncols != G.ncols:
        raise KernelMismatch(f"H has {H.ncols} columns but the network has {G.ncols} reactions")
    if not exact.equal_kernels(H, G):
        raise KernelMismatch("ker H differs from ker Gamma")
    return enumerate_regions(H, max_reduced_rows)


def read_partition_file(text: str) -> ExactMatrix:
    """Rows of H, whitespace- or comma-separated rationals; ``#`` comments allowed."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([Fraction(v) for v in line.replace(",", " ").split()])
    if not rows:
        raise PartitionError("partition file contains no rows")
    return ExactMatrix(rows)
