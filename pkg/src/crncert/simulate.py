"""Integration of the species ODE ``x' = Gamma R(x)`` and its extent form.

All integrations go through one generalised system

    x = x_ref + P y,     y' = Q R(x),     w' = Q (dR/dx)(x) P w,

advanced by a Dormand-Prince 5(4) pair. Steps that would leave the
nonnegative orthant are rejected and halved; the state is never clipped.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .kinetics import KineticsSpec
from .network import ReactionNetwork

log = logging.getLogger(__name__)

NEG_TOL = 1e-10
MIN_SAMPLES = 64
DEFAULT_TOL = 1e-8
MAX_STEPS = 5_000_000


class IntegrationError(RuntimeError):
    """Step-size underflow, unrecoverable negativity or step budget exhausted."""


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    x: np.ndarray  # samples x(t_i), shape (N, n)
    y: np.ndarray  # integrated coordinates (x itself, or extents)
    w: np.ndarray | None  # tangent vectors, shape (N, d, q)
    n_accepted: int
    n_rejected: int

    def __len__(self):
        return len(self.t)

    @property
    def final(self) -> np.ndarray:
        return self.x[-1]


def _initial_step(rhs0: np.ndarray, z0: np.ndarray, rtol: float, atol: float, h_max: float) -> float:
    sc = atol + rtol * np.abs(z0)
    d0 = float(np.sqrt(np.mean((z0 / sc) ** 2))) if z0.size else 0.0
    d1 = float(np.sqrt(np.mean((rhs0 / sc) ** 2))) if z0.size else 0.0
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h, h_max)


def _solve(x_ref, P, Q, kin_arrays, y0, T, rtol, atol, t_eval=None, w0=None,
           max_step=None, max_steps=MAX_STEPS) -> tuple:
    if not T > 0:
        raise ValueError("integration horizon must be positive")
    d = P.shape[1]
    q = 0 if w0 is None else w0.shape[1]
    z = np.ascontiguousarray(np.concatenate([y0, [] if w0 is None else w0.ravel()]), dtype=float)
    h_max = T / MIN_SAMPLES if max_step is None else min(max_step, T / MIN_SAMPLES)
    x0 = x_ref + P @ y0
    if (x0 < -NEG_TOL).any():
        raise ValueError("initial state is negative")
    r0 = _kernels.eval_rates(np.ascontiguousarray(np.maximum(x0, 0.0)), *kin_arrays)
    h = _initial_step(np.concatenate([Q @ r0, np.zeros(d * q)]), z, rtol, atol, h_max)
    ts = [0.0]
    zs = [z.copy()]
    n_acc = n_rej = 0
    t = 0.0
    stops = np.asarray(t_eval, dtype=float) if t_eval is not None else np.array([T])
    if t_eval is not None and (np.any(np.diff(stops) <= 0) or stops[0] < 0 or stops[-1] > T + 1e-12):
        raise ValueError("t_eval must be increasing within [0, T]")
    record_steps = t_eval is None
    cap = 256
    for stop in stops:
        if stop <= t:
            continue
        while True:
            out_t = np.empty(cap if record_steps else 0)
            out_z = np.empty((cap if record_steps else 0, z.size))
            t, h, n_rec, status, a, r = _kernels.rk45_advance(
                x_ref, P, Q, *kin_arrays, q, z, t, float(stop), h, h_max,
                rtol, atol, NEG_TOL, out_t, out_z, max_steps - n_acc - n_rej)
            n_acc += a
            n_rej += r
            if record_steps:
                ts.extend(out_t[:n_rec].tolist())
                zs.extend(out_z[:n_rec].copy())
            if status == 0:
                break
            if status == 1:
                cap = min(cap * 2, 1 << 20)
                continue
            if status == 2:
                raise IntegrationError(f"step size underflow at t={t:.6g} "
                                       "(stiffness or unrecoverable negativity)")
            raise IntegrationError(f"step budget of {max_steps} exhausted at t={t:.6g}")
        if not record_steps:
            ts.append(t)
            zs.append(z.copy())
    Z = np.array(zs)
    Y = Z[:, :d]
    X = x_ref[None, :] + Y @ P.T
    W = Z[:, d:].reshape(len(Z), d, q) if q else None
    return np.array(ts), X, Y, W, n_acc, n_rej


def _check_x(net: ReactionNetwork, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n,):
        raise ValueError(f"state must have {net.n} entries")
    if (x < 0).any():
        raise ValueError("initial concentrations must be nonnegative")
    return x


def integrate(net: ReactionNetwork, kin: KineticsSpec, x0, T: float, tol: float = DEFAULT_TOL,
              atol: float | None = None, t_eval=None, max_step: float | None = None) -> Trajectory:
    """Integrate ``x' = Gamma R(x)`` on [0, T]; local error per step is held below ``tol``.

    Without ``t_eval`` every accepted step is recorded (at least 64 samples).
    """
    x0 = _check_x(net, x0)
    G = net.gamma.astype(float)
    arrs = kin.kernel_arrays(net)
    t, X, Y, _, a, r = _solve(np.zeros(net.n), np.eye(net.n), G, arrs, x0, T, tol,
                              tol if atol is None else atol, t_eval, None, max_step)
    return Trajectory(t, X, Y, None, a, r)


def integrate_extent(net: ReactionNetwork, kin: KineticsSpec, x_ref, xi0, T: float,
                     tol: float = DEFAULT_TOL, atol: float | None = None, t_eval=None,
                     tangents=None, max_step: float | None = None) -> Trajectory:
    """Integrate ``xi' = R(x_ref + Gamma xi)``, optionally with tangents ``w' = R'(x) Gamma w``."""
    x_ref = np.asarray(x_ref, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    if xi0.shape != (net.nu,):
        raise ValueError(f"extent vector must have {net.nu} entries")
    G = net.gamma.astype(float)
    if (x_ref + G @ xi0 < -1e-9).any():
        raise ValueError("x_ref + Gamma xi0 must be nonnegative")
    w0 = None
    if tangents is not None:
        w0 = np.asarray(tangents, dtype=float)
        if w0.ndim == 1:
            w0 = w0[:, None]
    arrs = kin.kernel_arrays(net)
    t, X, Y, W, a, r = _solve(x_ref, G, np.eye(net.nu), arrs, xi0, T, tol,
                              tol if atol is None else atol, t_eval, w0, max_step)
    return Trajectory(t, X, Y, W, a, r)


def rates_along(net: ReactionNetwork, kin: KineticsSpec, X: np.ndarray) -> np.ndarray:
    arrs = kin.kernel_arrays(net)
    return np.array([_kernels.eval_rates(np.ascontiguousarray(np.maximum(x, 0.0)), *arrs) for x in X])


def invariant_report(net: ReactionNetwork, traj: Trajectory, laws=None) -> dict:
    """Most negative sample and worst relative drift of each conservation law."""
    from .exact import left_kernel_basis
    if laws is None:
        laws = [np.array([float(v) for v in w]) for w in left_kernel_basis(net.gamma_exact)]
    drift = 0.0
    for w in laws:
        vals = traj.x @ w
        drift = max(drift, float(np.max(np.abs(vals - vals[0]))) / max(1.0, abs(float(vals[0]))))
    return {"min_value": float(traj.x.min()), "conservation_drift": drift}


@dataclass(frozen=True)
class LyapunovTrace:
    values: np.ndarray
    max_increase: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_increase <= self.tolerance


def lyapunov_trace(cert, traj: Trajectory, kin: KineticsSpec, x_e=None, rel_tol: float = 1e-7) -> LyapunovTrace:
    """V along a trajectory: ``V(R(x(t)))`` for a rate certificate, or the dual
    value ``V(x(t) - x_e)`` when ``cert`` is a dual certificate."""
    from .dual import DualCertificate, evaluate_dual
    from .pwlr import evaluate

    if isinstance(cert, DualCertificate):
        if x_e is None:
            raise ValueError("dual evaluation needs the reference equilibrium x_e")
        vals = np.array([evaluate_dual(cert, x, x_e, warn=False) for x in traj.x])
    else:
        R = rates_along(cert.net, kin, traj.x)
        vals = np.array([evaluate(cert, r) for r in R])
    inc = float(np.max(np.diff(vals))) if len(vals) > 1 else 0.0
    return LyapunovTrace(vals, inc, rel_tol * (1.0 + float(vals[0])))


@dataclass(frozen=True)
class Equilibrium:
    x: np.ndarray
    residual: float
    reduced_jacobian_nonsingular: bool
    sigma_min: float
    positive: bool


def _range_basis(G: np.ndarray) -> np.ndarray:
    U, s, _ = np.linalg.svd(G, full_matrices=False)
    r = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 0.0)))
    return U[:, :r]


def _residual(net, arrs, x) -> float:
    G = net.gamma.astype(float)
    return float(np.max(np.abs(G @ _kernels.eval_rates(np.ascontiguousarray(np.maximum(x, 0.0)), *arrs))))


def reduced_jacobian(net: ReactionNetwork, kin: KineticsSpec, x) -> np.ndarray:
    """Gamma R'(x) restricted to Im Gamma, in an orthonormal basis."""
    G = net.gamma.astype(float)
    Qb = _range_basis(G)
    arrs = kin.kernel_arrays(net)
    J = _kernels.eval_jacobian(np.ascontiguousarray(np.maximum(np.asarray(x, float), 0.0)), *arrs)
    return Qb.T @ G @ J @ Qb


def _newton(net, arrs, x, Qb, iters: int = 30) -> np.ndarray:
    G = net.gamma.astype(float)
    for _ in range(iters):
        xc = np.ascontiguousarray(np.maximum(x, 0.0))
        F = Qb.T @ G @ _kernels.eval_rates(xc, *arrs)
        if np.max(np.abs(F), initial=0.0) < 1e-14:
            break
        J = Qb.T @ G @ _kernels.eval_jacobian(xc, *arrs) @ Qb
        du = np.linalg.lstsq(J, -F, rcond=None)[0]
        step = 1.0
        base = _residual(net, arrs, x)
        while step > 1e-4:
            cand = x + step * (Qb @ du)
            if cand.min() >= 0.0 and _residual(net, arrs, cand) <= base:
                break
            step *= 0.5
        else:
            break
        x = cand
    return x


def find_equilibrium(net: ReactionNetwork, kin: KineticsSpec, x0, T_max: float = 1e4,
                     stop_tol: float = 1e-9, tol: float = 1e-10) -> Equilibrium | None:
    """Integrate in doubling windows until ``||Gamma R(x)||_inf < stop_tol``.

    After each window a damped Newton iteration inside x0 + Im Gamma is tried,
    which shortcuts slow final approaches (high Hill exponents, say).
    """
    x = _check_x(net, x0).copy()
    arrs = kin.kernel_arrays(net)
    Qb = _range_basis(net.gamma.astype(float))
    T, elapsed = 1.0, 0.0
    while _residual(net, arrs, x) >= stop_tol:
        if elapsed >= T_max:
            return None
        span = min(T, T_max - elapsed)
        try:
            traj = integrate(net, kin, x, span, tol=tol, atol=tol * 1e-3)
        except IntegrationError:
            return None
        x = np.maximum(traj.final, 0.0) if traj.final.min() > -NEG_TOL else traj.final
        elapsed += span
        T *= 2.0
        polished = _newton(net, arrs, x, Qb)
        if _residual(net, arrs, polished) < stop_tol:
            x = polished
    x = _newton(net, arrs, x, Qb)
    res = _residual(net, arrs, x)
    Jr = reduced_jacobian(net, kin, x)
    smin = float(np.linalg.svd(Jr, compute_uv=False).min()) if Jr.size else 0.0
    # values at rounding level of the largest entry count as boundary zeros
    positive = bool((x > 1e-9 * max(1.0, float(x.max(initial=0.0)))).all())
    return Equilibrium(x, res, smin > 1e-8, smin, positive)


def trajectory_csv(net: ReactionNetwork, traj: Trajectory, V=None) -> str:
    buf = io.StringIO()
    header = ["t", *net.species] + (["V"] if V is not None else [])
    buf.write(",".join(header) + "\n")
    for i, t in enumerate(traj.t):
        row = [repr(float(t))] + [repr(float(v)) for v in traj.x[i]]
        if V is not None:
            row.append(repr(float(V[i])))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
