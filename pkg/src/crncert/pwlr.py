"""Piecewise-linear-in-rates (PWLR) Lyapunov certificates.

A certificate is a matrix ``C`` whose rows ``c_k`` (one per region pair of a
conic partition) define ``V(r) = c_k . r`` on region ``k`` and ``-c_k`` on the
mirror region. It is valid for every monotone kinetics when ``ker C = ker
Gamma`` and, for every rank-one vertex ``Gamma^l = e_j gamma_i^T`` and region
``k``, there is a multiplier ``mu >= 0`` with ``mu Sigma_k H = -c_kj gamma_i``
(Farkas: ``c_k . Gamma^l r <= 0`` throughout the region).

The convex form ``V(r) = ||C r||_inf`` instead needs Metzler ``Lambda^l`` with
zero row sums and ``Lambda^l [C; -C] = [C; -C] Gamma^l``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from . import exact
from .exact import ExactMatrix
from .lognorm import mu_1, mu_inf
from .lp import LinearProgram, lp_feasible, lp_solve
from .network import ReactionNetwork, rank_one_decomposition
from .partition import ConicPartition, build_partition

log = logging.getLogger(__name__)

MAX_LP_VARIABLES = 100_000
RESOLVE_ROUNDS = 3
DENOMINATOR_LIMIT = 10**9


class SynthesisTooLarge(ValueError):
    """The synthesis LP would exceed the variable bound."""


class InvalidCertificate(ValueError):
    pass


@dataclass(frozen=True)
class VerifyResult:
    valid: bool
    multipliers: tuple[np.ndarray, ...] = ()
    failure: str | None = None
    vertex: int | None = None  # 0-based index of the first failing vertex
    region: int | None = None

    def __bool__(self):
        return self.valid


@dataclass(frozen=True)
class ConvexResult:
    valid: bool
    metzler: tuple[np.ndarray, ...] = ()
    lambda_tilde: tuple[np.ndarray, ...] = ()
    mu: tuple[float, ...] = ()
    failure: str | None = None
    vertex: int | None = None

    def __bool__(self):
        return self.valid


@dataclass(frozen=True)
class L1Result:
    valid: bool
    lambda_tilde: tuple[np.ndarray, ...] = ()
    mu: tuple[float, ...] = ()
    vertex: int | None = None

    def __bool__(self):
        return self.valid


@dataclass(frozen=True)
class Infeasible:
    """No certificate for this partition (``kind='infeasible'``), or the LP was
    feasible but no solution found had ``ker C == ker Gamma``
    (``kind='conditional'``), or the rounded solution failed re-verification
    (``kind='numeric'``)."""

    kind: str
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True, eq=False)
class PWLRCertificate:
    net: ReactionNetwork
    partition: ConicPartition
    C: ExactMatrix
    convex: bool
    multipliers: tuple[np.ndarray, ...]
    metzler: tuple[np.ndarray, ...] | None = None
    lambda_tilde: tuple[np.ndarray, ...] | None = None
    xi: np.ndarray | None = None
    eta: dict = field(default_factory=dict)

    @cached_property
    def C_float(self) -> np.ndarray:
        return self.C.to_float()

    def row(self, k: int) -> np.ndarray:
        """c_k for any region index, using c_{m-1-k} = -c_k."""
        K = self.partition.half
        Cf = self.C_float
        return Cf[k] if k < K else -Cf[self.partition.mirror(k)]

    def mu_per_vertex(self) -> list[float]:
        return [mu_inf(L) for L in (self.lambda_tilde or ())]

    def to_dict(self) -> dict:
        part = self.partition
        d = {
            "C": self.C.to_strings(),
            "convex": self.convex,
            "partition": {
                "H": part.H.to_strings(),
                "signatures": [list(s) for s in part.full_signatures],
            },
            "multipliers": [L.tolist() for L in self.multipliers],
        }
        if self.metzler is not None:
            d["metzler"] = [L.tolist() for L in self.metzler]
            d["lambda_tilde"] = [L.tolist() for L in self.lambda_tilde]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _coerce_C(net: ReactionNetwork, C) -> ExactMatrix:
    C = ExactMatrix.coerce(C)
    if C.ncols != net.nu:
        raise ValueError(f"C has {C.ncols} columns but the network has {net.nu} reactions")
    return C


def _pivot_columns(H: ExactMatrix) -> list[int]:
    return exact.independent_columns(H)


def verify_certificate(net: ReactionNetwork, part: ConicPartition, C, strict: bool = False) -> VerifyResult:
    """Check the kernel condition and the per-vertex multiplier systems.

    With ``strict`` each multiplier must also satisfy ``1 . (lambda Sigma_k) >= 1``.
    """
    C = _coerce_C(net, C)
    if part.H.ncols != net.nu:
        raise ValueError("partition and network disagree on the number of reactions")
    if C.nrows != part.half:
        raise ValueError(f"C needs {part.half} rows for this partition, got {C.nrows}")
    if not exact.equal_kernels(C, net.gamma_exact):
        return VerifyResult(False, failure="ker C differs from ker Gamma")
    Hf = part.H.to_float()
    Cf = C.to_float()
    G = net.gamma.astype(float)
    cols = _pivot_columns(part.H)
    p = part.p
    mults = []
    for ell, v in enumerate(rank_one_decomposition(net).entries):
        i, j = v.species, v.reaction
        Lam = np.zeros((part.half, p))
        for k in range(part.half):
            ckj = Cf[k, j]
            if ckj == 0.0 and not strict:
                continue
            sig = part.sigma(k)
            M = sig[:, None] * Hf
            lp = LinearProgram(p, nonneg=True)
            for q in cols:
                lp.add_eq(M[:, q], -ckj * G[i, q])
            if strict:
                lp.add_ge(np.ones(p), 1.0)
            res = lp_feasible(lp)
            if not res.feasible:
                return VerifyResult(False, tuple(mults), f"multiplier system infeasible for vertex "
                                    f"(species {net.species[i]}, reaction {net.reactions[j]}) "
                                    f"in region {k + 1}", ell, k)
            Lam[k] = res.point * sig + 0.0  # lambda = mu Sigma_k
        mults.append(Lam)
    return VerifyResult(True, tuple(mults))


def _block_split(L: np.ndarray, K: int) -> np.ndarray:
    return L[:K, :K] - L[:K, K:]


def verify_convex(net: ReactionNetwork, C) -> ConvexResult:
    """Metzler multipliers for ``||C r||_inf``; Lambda-tilde = upper-left minus upper-right."""
    C = _coerce_C(net, C)
    if C.nrows == 0 or not exact.equal_kernels(C, net.gamma_exact):
        return ConvexResult(False, failure="ker C differs from ker Gamma")
    K = C.nrows
    Ct = np.vstack([C.to_float(), -C.to_float()])
    m = 2 * K
    metz, tilde, mus = [], [], []
    for ell, v in enumerate(rank_one_decomposition(net).entries):
        target = Ct @ v.matrix.astype(float)
        nonneg = [a != b for a in range(m) for b in range(m)]
        lp = LinearProgram(m * m, nonneg=nonneg)
        for a in range(m):
            lp.add_eq({a * m + b: 1.0 for b in range(m)}, 0.0)
            for q in range(net.nu):
                lp.add_eq({a * m + b: Ct[b, q] for b in range(m)}, target[a, q])
        res = lp_feasible(lp)
        if not res.feasible:
            return ConvexResult(False, tuple(metz), tuple(tilde), tuple(mus),
                                f"no Metzler multiplier for vertex {ell + 1}", ell)
        L = res.point.reshape(m, m)
        Lt = _block_split(L, K)
        metz.append(L)
        tilde.append(Lt)
        mus.append(mu_inf(Lt))
    return ConvexResult(True, tuple(metz), tuple(tilde), tuple(mus))


def verify_l1(net: ReactionNetwork, C) -> L1Result:
    """Is there Lambda-tilde with C Gamma^l = Lambda-tilde C and mu_1(Lambda-tilde) <= 0?"""
    C = _coerce_C(net, C)
    K = C.nrows
    Cf = C.to_float()
    tildes, mus = [], []
    for ell, v in enumerate(rank_one_decomposition(net).entries):
        target = Cf @ v.matrix.astype(float)
        if not target.any():
            Lt = np.zeros((K, K))
            tildes.append(Lt)
            mus.append(0.0)
            continue
        # variables: Lambda-tilde (free), then T >= |off-diagonal entries|
        lp = LinearProgram(K * K)
        T = lp.add_variables(K * K, nonneg=True)
        for a in range(K):
            for q in range(net.nu):
                lp.add_eq({a * K + b: Cf[b, q] for b in range(K)}, target[a, q])
        for a in range(K):
            for b in range(K):
                if a != b:
                    lp.add_ge({T[a * K + b]: 1.0, a * K + b: -1.0}, 0.0)
                    lp.add_ge({T[a * K + b]: 1.0, a * K + b: 1.0}, 0.0)
        for b in range(K):
            row = {b * K + b: 1.0}
            for a in range(K):
                if a != b:
                    row[T[a * K + b]] = 1.0
            lp.add_le(row, 0.0)
        res = lp_feasible(lp)
        if not res.feasible:
            return L1Result(False, tuple(tildes), tuple(mus), ell)
        Lt = res.point[:K * K].reshape(K, K)
        tildes.append(Lt)
        mus.append(mu_1(Lt))
    return L1Result(True, tuple(tildes), tuple(mus))


def _canonical_pairs(part: ConicPartition) -> list[tuple[int, int, int]]:
    """Neighbor pairs up to the +/- mirror symmetry."""
    seen = set()
    out = []
    for k, j, s in part.neighbor_pairs():
        mk, mj = part.mirror(j), part.mirror(k)
        key = min((k, j), (mk, mj))
        if key in seen:
            continue
        seen.add(key)
        out.append((k, j, s))
    return out


class _SynthesisLP:
    def __init__(self, net: ReactionNetwork, part: ConicPartition, convex: bool):
        self.net, self.part, self.convex = net, part, convex
        K, p, nu = part.half, part.p, net.nu
        verts = rank_one_decomposition(net).entries
        pairs = _canonical_pairs(part)
        n_vars = K * p + K * len(verts) * p + len(pairs) + K * nu
        if n_vars > MAX_LP_VARIABLES:
            raise SynthesisTooLarge(f"synthesis LP needs {n_vars} variables (bound {MAX_LP_VARIABLES})")
        Hf = part.H.to_float()
        G = net.gamma.astype(float)
        cols = _pivot_columns(part.H)
        lp = LinearProgram()
        self.xi = lp.add_variables(K * p, nonneg=True).reshape(K, p)
        M = [part.sigma(k)[:, None] * Hf for k in range(K)]
        self.M = M

        def c_coeffs(k, q, scale=1.0):
            """Coefficients of (c_region)_q in terms of xi."""
            if k >= K:
                k, scale = part.mirror(k), -scale
            return {int(self.xi[k, r]): scale * M[k][r, q] for r in range(p) if M[k][r, q] != 0.0}

        for k in range(K):
            lp.add_ge({int(x): 1.0 for x in self.xi[k]}, 1.0)
        for v in verts:
            i, j = v.species, v.reaction
            for k in range(K):
                mu = lp.add_variables(p, nonneg=True)
                for q in cols:
                    row = {int(mu[r]): M[k][r, q] for r in range(p) if M[k][r, q] != 0.0}
                    if G[i, q] != 0.0:
                        for idx, val in c_coeffs(k, j, G[i, q]).items():
                            row[idx] = row.get(idx, 0.0) + val
                    lp.add_eq(row, 0.0)
        self.eta = {}
        for k, j, s in pairs:
            e = int(lp.add_variables(1, nonneg=convex)[0])
            self.eta[(k, j)] = e
            sgn = part.full_signatures[k][s]
            for q in cols:
                row: dict[int, float] = {}
                for idx, val in c_coeffs(k, q).items():
                    row[idx] = row.get(idx, 0.0) + val
                for idx, val in c_coeffs(j, q, -1.0).items():
                    row[idx] = row.get(idx, 0.0) + val
                if Hf[s, q] != 0.0:
                    row[e] = -sgn * Hf[s, q]
                lp.add_eq(row, 0.0)
        self.t = lp.add_variables(K * nu, nonneg=True).reshape(K, nu)
        for k in range(K):
            for q in range(nu):
                cq = c_coeffs(k, q)
                lp.add_ge({int(self.t[k, q]): 1.0, **{a: -b for a, b in cq.items()}}, 0.0)
                lp.add_ge({int(self.t[k, q]): 1.0, **cq}, 0.0)
        self.lp = lp

    def solve(self, weights: np.ndarray | None = None):
        obj = np.zeros(self.lp.n_vars)
        if weights is None:
            obj[self.t.ravel()] = 1.0
        else:
            obj[self.t.ravel()] = weights[:self.t.size]
            obj[self.xi.ravel()] = weights[self.t.size:]
        self.lp.set_objective(obj)
        return lp_solve(self.lp)

    def exact_xi(self, point: np.ndarray) -> list[list[Fraction]]:
        return [[Fraction(max(float(point[x]), 0.0)).limit_denominator(DENOMINATOR_LIMIT) for x in row]
                for row in self.xi]


def _C_from_xi(part: ConicPartition, xi: list[list[Fraction]]) -> ExactMatrix:
    H = part.H
    rows = []
    for k, xk in enumerate(xi):
        sig = part.full_signatures[k]
        rows.append([sum((xk[r] * sig[r] * H.rows[r][q] for r in range(part.p)), Fraction(0))
                     for q in range(H.ncols)])
    return ExactMatrix(rows, ncols=H.ncols)


def _normalise(C: ExactMatrix, xi: list[list[Fraction]]):
    """Scale by a positive rational so C has coprime integer entries when that is cheap."""
    den = lcm(*(v.denominator for r in C.rows for v in r))
    if den > 10**6:
        return C, xi
    ints = [int(v * den) for r in C.rows for v in r]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return C, xi
    f = Fraction(den, g)
    return (ExactMatrix([[v * f for v in r] for r in C.rows], ncols=C.ncols),
            [[v * f for v in r] for r in xi])


def synthesize(net: ReactionNetwork, part: ConicPartition | None = None, convex: bool = False,
               seed: int = 0) -> PWLRCertificate | Infeasible:
    """Solve the synthesis LP over the given partition (default H = Gamma)."""
    if part is None:
        part = build_partition(net.gamma_exact)
    prob = _SynthesisLP(net, part, convex)
    res = prob.solve()
    if not res.feasible:
        return Infeasible("infeasible", "the synthesis linear program is infeasible for this partition")
    target_rank = net.rank
    xi = prob.exact_xi(res.point)
    C = _C_from_xi(part, xi)
    rng = np.random.default_rng(seed)
    rounds = 0
    while exact.rank(C) < target_rank and rounds < RESOLVE_ROUNDS:
        rounds += 1
        w = rng.uniform(0.1, 1.0, size=prob.t.size + prob.xi.size)
        extra = prob.solve(w)
        if not extra.feasible:
            break
        xi2 = prob.exact_xi(extra.point)
        xi = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(xi, xi2)]
        C = _C_from_xi(part, xi)
        log.debug("re-solve round %d: rank C = %d", rounds, exact.rank(C))
    if exact.rank(C) < target_rank:
        return Infeasible("conditional", f"LP feasible but no solution with ker C = ker Gamma "
                                         f"after {rounds} re-solve rounds")
    C, xi = _normalise(C, xi)
    ver = verify_certificate(net, part, C)
    if not ver.valid:
        return Infeasible("numeric", f"synthesized C failed re-verification: {ver.failure}")
    metz = tilde = None
    if convex:
        cv = verify_convex(net, C)
        if not cv.valid:
            return Infeasible("numeric", f"synthesized C failed convex re-verification: {cv.failure}")
        metz, tilde = cv.metzler, cv.lambda_tilde
    eta = {k: float(res.point[v]) for k, v in prob.eta.items()}
    return PWLRCertificate(net, part, C, convex, ver.multipliers, metz, tilde,
                           np.array([[float(v) for v in r] for r in xi]), eta)


def certificate_from_matrix(net: ReactionNetwork, part: ConicPartition, C, convex: bool = False) -> PWLRCertificate:
    """Wrap a user-supplied C after verifying it; raises InvalidCertificate."""
    C = _coerce_C(net, C)
    ver = verify_certificate(net, part, C)
    if not ver.valid:
        raise InvalidCertificate(ver.failure)
    metz = tilde = None
    if convex:
        cv = verify_convex(net, C)
        if not cv.valid:
            raise InvalidCertificate(cv.failure)
        metz, tilde = cv.metzler, cv.lambda_tilde
    return PWLRCertificate(net, part, C, convex, ver.multipliers, metz, tilde)


def certificate_from_dict(net: ReactionNetwork, data: dict) -> PWLRCertificate:
    H = ExactMatrix([[Fraction(v) for v in r] for r in data["partition"]["H"]])
    part = build_partition(net.gamma_exact, H)
    stored = [tuple(s) for s in data["partition"].get("signatures", [])]
    if stored and stored != list(part.full_signatures):
        raise InvalidCertificate("stored region signatures do not match the partition of H")
    C = ExactMatrix([[Fraction(v) for v in r] for r in data["C"]])
    return certificate_from_matrix(net, part, C, bool(data.get("convex", False)))


def certificate_from_json(net: ReactionNetwork, text: str) -> PWLRCertificate:
    return certificate_from_dict(net, json.loads(text))


def evaluate(cert: PWLRCertificate, r) -> float:
    """V(r): ``||C r||_inf`` for convex certificates, else ``|c_k . r|`` on r's region."""
    r = np.asarray(r, dtype=float)
    if cert.convex:
        vals = cert.C_float @ r
        return float(np.max(np.abs(vals))) if vals.size else 0.0
    k = cert.partition.region_of(r)
    return abs(float(cert.row(k) @ r))
