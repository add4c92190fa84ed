"""Non-expansiveness from convex certificates, checked analytically and on trajectories.

If every ``Lambda-tilde^l`` has ``mu_inf <= 0``, the weighted semi-norm
``||C xi||_inf`` does not grow along the difference of any two extent
trajectories, so ``||B (x_a - x_b)||_inf`` does not grow for two solutions in
the same stoichiometric class, whatever the monotone kinetics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dual import CLASS_TOL, DualCertificate, factor_through_gamma
from .kinetics import KineticsSpec
from .lognorm import mu_1, mu_inf
from .network import ReactionNetwork
from .pwlr import PWLRCertificate
from .simulate import integrate, integrate_extent

__all__ = ["mu_inf", "mu_1", "LogNormReport", "certify_nonexpansive", "PairResult",
           "trajectory_pair_test", "VariationalResult", "variational_check", "empirical_rate"]

MU_TOL = 1e-12


class NotConvex(ValueError):
    pass


@dataclass(frozen=True)
class LogNormReport:
    mu_per_vertex: tuple[float, ...]
    passed: bool

    @property
    def aggregate(self) -> float:
        return max(self.mu_per_vertex) if self.mu_per_vertex else float("-inf")

    def to_dict(self) -> dict:
        return {"mu_per_vertex": list(self.mu_per_vertex), "max": self.aggregate, "pass": self.passed}


def certify_nonexpansive(cert: PWLRCertificate | None = None, lambda_tilde=None) -> LogNormReport:
    """Pass iff mu_inf(Lambda-tilde^l) <= 1e-12 for every vertex."""
    if lambda_tilde is None:
        if cert is None or not cert.convex or cert.lambda_tilde is None:
            raise NotConvex("non-expansiveness needs a convex certificate with Lambda-tilde")
        lambda_tilde = cert.lambda_tilde
    mus = tuple(mu_inf(L) for L in lambda_tilde)
    return LogNormReport(mus, all(m <= MU_TOL for m in mus))


@dataclass(frozen=True)
class PairResult:
    t: np.ndarray
    ratio: np.ndarray
    max_expansion: float

    @property
    def passed(self) -> bool:
        return self.max_expansion <= 1e-6


def _dual(cert) -> DualCertificate:
    return cert if isinstance(cert, DualCertificate) else factor_through_gamma(cert)


def trajectory_pair_test(net: ReactionNetwork, kin: KineticsSpec, cert, x0a, x0b, T: float,
                         samples: int = 257, tol: float = 1e-11) -> PairResult:
    """Ratio ``||B (x_a(t) - x_b(t))||_inf / ||B (x_a(0) - x_b(0))||_inf`` on a uniform grid."""
    dc = _dual(cert)
    x0a = np.asarray(x0a, dtype=float)
    x0b = np.asarray(x0b, dtype=float)
    if dc.D.ncols and np.max(np.abs(dc.D_float.T @ (x0a - x0b))) > CLASS_TOL:
        raise ValueError("initial states lie in different stoichiometric classes")
    B = dc.B_float
    d0 = float(np.max(np.abs(B @ (x0a - x0b)), initial=0.0))
    if d0 < 1e-12:
        raise ValueError("initial states coincide in the certificate semi-norm")
    grid = np.linspace(0.0, T, samples)
    ta = integrate(net, kin, x0a, T, tol=tol, atol=tol * 1e-2, t_eval=grid[1:])
    tb = integrate(net, kin, x0b, T, tol=tol, atol=tol * 1e-2, t_eval=grid[1:])
    diff = ta.x - tb.x
    ratio = np.max(np.abs(diff @ B.T), axis=1) / d0
    return PairResult(ta.t, ratio, float(np.max(ratio) - 1.0))


def empirical_rate(t, ratio, floor: float = 1e-7) -> float:
    """Least-squares exponential rate of a decaying ratio trace (non-rigorous)."""
    t = np.asarray(t, dtype=float)
    ratio = np.asarray(ratio, dtype=float)
    keep = (ratio > floor) & (t > 0)
    if keep.sum() < 2:
        return float("nan")
    slope = np.polyfit(t[keep], np.log(ratio[keep]), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class VariationalResult:
    t: np.ndarray
    values: np.ndarray
    max_increase: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_increase <= self.tolerance


def variational_check(net: ReactionNetwork, kin: KineticsSpec, cert: PWLRCertificate, x0, dxi0,
                      T: float, tol: float = 1e-11) -> VariationalResult:
    """Co-integrate the extent ODE from x0 (xi(0) = 0) with the tangent
    ``dxi' = R'(x) Gamma dxi`` and track ``V_F = ||C dxi||_inf``."""
    x0 = np.asarray(x0, dtype=float)
    traj = integrate_extent(net, kin, x0, np.zeros(net.nu), T, tol=tol, atol=tol * 1e-2,
                            tangents=np.asarray(dxi0, dtype=float))
    C = cert.C_float
    vals = np.array([float(np.max(np.abs(C @ w[:, 0]), initial=0.0)) for w in traj.w])
    inc = float(np.max(np.diff(vals))) if len(vals) > 1 else 0.0
    return VariationalResult(traj.t, vals, inc, 1e-6 * (1.0 + vals[0]))
