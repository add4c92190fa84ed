"""Pure-Python/numpy versions of the compiled kernels in ``_core.pyx``."""

import numpy as np

LAW_MASS_ACTION = 0
LAW_MICHAELIS_MENTEN = 1
LAW_HILL = 2

_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([
    35 / 384 - 5179 / 57600,
    0.0,
    500 / 1113 - 7571 / 16695,
    125 / 192 - 393 / 640,
    -2187 / 6784 + 92097 / 339200,
    11 / 84 - 187 / 2100,
    -1 / 40,
])


def _factor(x, a, law, km, hn):
    if x <= 0.0:
        return 0.0
    if law == LAW_MASS_ACTION:
        return x ** a
    if law == LAW_MICHAELIS_MENTEN:
        return (x / (km + x)) ** a
    u = x ** hn
    return (u / (km ** hn + u)) ** a


def _dfactor(x, a, law, km, hn):
    x = max(x, 0.0)
    if law == LAW_MASS_ACTION:
        return 1.0 if a == 1.0 else a * x ** (a - 1.0)
    if law == LAW_MICHAELIS_MENTEN:
        du = km / (km + x) ** 2
        return du if a == 1.0 else a * (x / (km + x)) ** (a - 1.0) * du
    kh = km ** hn
    u = x ** hn
    du = hn * x ** (hn - 1.0) * kh / (kh + u) ** 2
    return du if a == 1.0 else a * (u / (kh + u)) ** (a - 1.0) * du


def eval_rates(x, rptr, ridx, rcoef, law, p1, p2, p3):
    out = np.empty(len(p1))
    for j in range(len(p1)):
        v = p1[j]
        for q in range(rptr[j], rptr[j + 1]):
            v *= _factor(x[ridx[q]], rcoef[q], law[j], p2[j], p3[j])
        out[j] = v
    return out


def eval_jacobian(x, rptr, ridx, rcoef, law, p1, p2, p3):
    out = np.zeros((len(p1), len(x)))
    for j in range(len(p1)):
        lo, hi = rptr[j], rptr[j + 1]
        for q in range(lo, hi):
            v = p1[j] * _dfactor(x[ridx[q]], rcoef[q], law[j], p2[j], p3[j])
            for q2 in range(lo, hi):
                if q2 != q:
                    v *= _factor(x[ridx[q2]], rcoef[q2], law[j], p2[j], p3[j])
            out[j, ridx[q]] += v
    return out


def rk45_advance(x_ref, P, Q, rptr, ridx, rcoef, law, p1, p2, p3, q,
                 z, t, t_end, h, h_max, rtol, atol, neg_tol,
                 out_t, out_z, max_steps):
    """See ``_core.rk45_advance``; same contract, numpy arithmetic."""
    kin = (rptr, ridx, rcoef, law, p1, p2, p3)
    d = P.shape[1]

    def rhs(state):
        x = x_ref + P @ state[:d]
        dz = np.empty_like(state)
        dz[:d] = Q @ eval_rates(x, *kin)
        if q:
            w = state[d:].reshape(d, q)
            dz[d:] = (Q @ eval_jacobian(x, *kin) @ P @ w).ravel()
        return dz

    cap = out_t.shape[0]
    n_rec = n_acc = n_rej = 0
    k = [None] * 7
    k[0] = rhs(z)
    status = 0
    while True:
        if t >= t_end:
            status = 0
            break
        if cap > 0 and n_rec >= cap:
            status = 1
            break
        if n_acc + n_rej >= max_steps:
            status = 3
            break
        h = min(h, h_max)
        h_prop = h
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h < 1e-14 * max(1.0, abs(t)):
            status = 2
            break
        for s in range(1, 6):
            acc = sum(c * k[i] for i, c in enumerate(_A[s]))
            k[s] = rhs(z + h * acc)
        ynew = z + h * sum(_B[i] * k[i] for i in range(6) if _B[i] != 0.0)
        k[6] = rhs(ynew)
        e = h * sum(_E[i] * k[i] for i in range(7) if _E[i] != 0.0)
        sc = atol + rtol * np.maximum(np.abs(z), np.abs(ynew))
        err = float(np.max(np.abs(e) / sc)) if len(z) else 0.0
        x_new = x_ref + P @ ynew[:d]
        if np.any(x_new < -neg_tol):
            n_rej += 1
            h *= 0.5
            continue
        if err <= 1.0:
            t = t_end if last else t + h
            z[:] = ynew
            k[0] = k[6]
            n_acc += 1
            if cap > 0:
                out_t[n_rec] = t
                out_z[n_rec, :] = z
                n_rec += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = (h_prop if last else h) * fac
        else:
            n_rej += 1
            h *= max(0.2, 0.9 * err ** -0.2)
    return t, h, n_rec, status, n_acc, n_rej


def bland_simplex(T, basis, n_enter, eps, max_iter):
    """See ``_core.bland_simplex``."""
    m = T.shape[0] - 1
    it = 0
    while True:
        if it >= max_iter:
            return 2, it
        cand = np.nonzero(T[m, :n_enter] < -eps)[0]
        if cand.size == 0:
            return 0, it
        enter = int(cand[0])
        col = T[:m, enter]
        leave = -1
        best = 0.0
        for i in np.nonzero(col > eps)[0]:
            ratio = T[i, -1] / col[i]
            if leave < 0 or ratio < best - 1e-12:
                best, leave = ratio, i
            elif abs(ratio - best) <= 1e-12 and basis[i] < basis[leave]:
                best, leave = min(best, ratio), i
        if leave < 0:
            return 1, it
        T[leave] /= T[leave, enter]
        f = T[:, enter].copy()
        f[leave] = 0.0
        T -= np.outer(f, T[leave])
        T[np.arange(m + 1) != leave, enter] = 0.0
        basis[leave] = enter
        it += 1


def siphon_masks(in_masks, out_masks, n):
    ins = [int(v) for v in in_masks]
    outs = [int(v) for v in out_masks]
    pairs = list(zip(ins, outs))
    found = []
    for P in range(1, 1 << n):
        if all(not (a & P) or (b & P) for a, b in pairs):
            found.append(P)
    return np.array(found, dtype=np.uint64)
