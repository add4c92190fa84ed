"""Species-coordinate form of a rate certificate.

Because ``ker C = ker H = ker Gamma``, every row of ``C`` and ``H`` lies in the
row space of ``Gamma`` and factors as ``C = B Gamma``, ``H = G Gamma``. The
function ``V(x) = ||B (x - x_e)||_inf`` (or its region form over cones
``{z : Sigma_k G z >= 0}``) then equals the rate certificate at any ``r`` with
``Gamma r = x - x_e``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import exact
from .exact import ExactMatrix
from .kinetics import KineticsSpec
from .lp import LinearProgram, lp_feasible
from .network import ReactionNetwork
from .pwlr import PWLRCertificate
from .simulate import Trajectory, integrate_extent

CLASS_TOL = 1e-8


class FactorizationError(ValueError):
    """C or H has a row outside the row space of Gamma."""


class ClassMismatchWarning(UserWarning):
    """x and x_e lie in different stoichiometric classes."""


@dataclass(frozen=True, eq=False)
class DualCertificate:
    B: ExactMatrix
    G: ExactMatrix
    D: ExactMatrix  # columns span ker Gamma^T
    source: PWLRCertificate

    @cached_property
    def B_float(self) -> np.ndarray:
        return self.B.to_float()

    @cached_property
    def G_float(self) -> np.ndarray:
        return self.G.to_float()

    @cached_property
    def D_float(self) -> np.ndarray:
        return self.D.to_float() if self.D.ncols else np.zeros((self.B.ncols, 0))

    def b(self, k: int) -> np.ndarray:
        part = self.source.partition
        Bf = self.B_float
        return Bf[k] if k < part.half else -Bf[part.mirror(k)]

    def gauge(self, y) -> "DualCertificate":
        """B + y D^T, another exact factor of C (y has one row per row of B)."""
        if self.D.ncols == 0:
            return self
        Y = y if isinstance(y, ExactMatrix) else ExactMatrix.coerce(np.atleast_2d(np.asarray(y, dtype=object)))
        shift = Y @ self.D.T
        return DualCertificate(self.B + shift, self.G, self.D, self.source)

    def to_dict(self) -> dict:
        return {"B": self.B.to_strings(), "G": self.G.to_strings(),
                "D": self.D.T.to_strings()}


def factor_through_gamma(cert: PWLRCertificate) -> DualCertificate:
    gamma = cert.net.gamma_exact
    B = exact.min_norm_left_solve(cert.C, gamma)
    G = exact.min_norm_left_solve(cert.partition.H, gamma)
    if B is None:
        raise FactorizationError("a row of C is not in the row space of Gamma")
    if G is None:
        raise FactorizationError("a row of H is not in the row space of Gamma")
    basis = exact.left_kernel_basis(gamma)
    if basis:
        D = ExactMatrix(basis, ncols=cert.net.n).T
    else:
        D = ExactMatrix([[] for _ in range(cert.net.n)], ncols=0)
    return DualCertificate(B, G, D, cert)


def class_offset(dc: DualCertificate, x, x_e) -> float:
    if dc.D.ncols == 0:
        return 0.0
    z = np.asarray(x, dtype=float) - np.asarray(x_e, dtype=float)
    return float(np.max(np.abs(dc.D_float.T @ z)))


def evaluate_dual(dc: DualCertificate, x, x_e, warn: bool = True) -> float:
    """``||B (x - x_e)||_inf`` (convex) or ``|b_k . (x - x_e)|`` on the containing dual region."""
    z = np.asarray(x, dtype=float) - np.asarray(x_e, dtype=float)
    if warn and class_offset(dc, x, x_e) > CLASS_TOL:
        warnings.warn("x and x_e are in different stoichiometric classes; "
                      "the value carries no decrease guarantee", ClassMismatchWarning, stacklevel=2)
    if dc.source.convex:
        vals = dc.B_float @ z
        return float(np.max(np.abs(vals))) if vals.size else 0.0
    part = dc.source.partition
    Gz = dc.G_float @ z
    slack = 1e-12 * max(1.0, float(np.abs(z).max(initial=0.0)))
    best, best_viol = 0, np.inf
    for k in range(part.m):
        viol = float(np.max(-part.sigma(k) * Gz))
        if viol <= slack:
            best = k
            break
        if viol < best_viol:
            best, best_viol = k, viol
    return abs(float(dc.b(best) @ z))


@dataclass(frozen=True)
class DualVerifyResult:
    valid: bool
    checked: int
    failure: tuple[int, int, int] | None = None  # (region, reaction, species)

    def __bool__(self):
        return self.valid


def verify_dual_direct(net: ReactionNetwork, dc: DualCertificate) -> DualVerifyResult:
    """Species-coordinate Farkas test.

    For region k, reaction j with ``c_kj != 0`` and reactant i of j, with
    ``sigma = -sign(c_kj)``, solve ``sigma e_i = lambda Sigma_k G + zeta D^T``
    for ``lambda >= 0``. Multiplying by Gamma shows this is the rate-space
    multiplier system scaled by ``1/|c_kj|``.
    """
    C = dc.B @ net.gamma_exact
    if not exact.equal_kernels(C, net.gamma_exact):
        return DualVerifyResult(False, 0, None)
    if dc.G @ net.gamma_exact != dc.source.partition.H:
        return DualVerifyResult(False, 0, None)
    part = dc.source.partition
    Gf = dc.G.to_float()
    Df = dc.D.to_float() if dc.D.ncols else np.zeros((net.n, 0))
    Cf = C.to_float()
    p, d = Gf.shape[0], Df.shape[1]
    checked = 0
    for k in range(part.half):
        M = part.sigma(k)[:, None] * Gf
        for j in range(net.nu):
            ckj = Cf[k, j]
            if ckj == 0.0:
                continue
            sigma = -np.sign(ckj)
            for i in net.reactants(j):
                lp = LinearProgram(p, nonneg=True)
                zeta = lp.add_variables(d)
                for q in range(net.n):
                    row = {r: M[r, q] for r in range(p) if M[r, q] != 0.0}
                    row.update({int(zeta[c]): Df[q, c] for c in range(d) if Df[q, c] != 0.0})
                    lp.add_eq(row, sigma if q == i else 0.0)
                checked += 1
                if not lp_feasible(lp).feasible:
                    return DualVerifyResult(False, checked, (k, j, i))
    return DualVerifyResult(True, checked)


def preimage(net: ReactionNetwork, z) -> np.ndarray:
    """Least-squares r with Gamma r = z (exact when z is in Im Gamma)."""
    return np.linalg.lstsq(net.gamma.astype(float), np.asarray(z, dtype=float), rcond=None)[0]


def extent_trajectory(net: ReactionNetwork, kin: KineticsSpec, x_e, xi0, T: float,
                      tol: float = 1e-10, t_eval=None) -> Trajectory:
    """Integrate ``xi' = R(x_e + Gamma xi)``; ``traj.x`` holds ``x_e + Gamma xi(t)``."""
    return integrate_extent(net, kin, x_e, xi0, T, tol=tol, atol=tol * 1e-2, t_eval=t_eval)
