# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Dormand-Prince integration, Bland simplex, siphon sweep.

Every function here has a line-for-line counterpart in ``_fallback.py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, fmax, fmin

cnp.import_array()

DEF LAW_MASS_ACTION = 0
DEF LAW_MICHAELIS_MENTEN = 1
DEF LAW_HILL = 2

# Dormand-Prince 5(4) tableau
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 35.0 / 384.0 - 5179.0 / 57600.0
cdef double E3 = 500.0 / 1113.0 - 7571.0 / 16695.0
cdef double E4 = 125.0 / 192.0 - 393.0 / 640.0
cdef double E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0
cdef double E6 = 11.0 / 84.0 - 187.0 / 2100.0
cdef double E7 = -1.0 / 40.0


cdef inline double _factor(double x, double a, long law, double km, double hn) nogil:
    cdef double u
    if x <= 0.0:
        return 0.0
    if law == LAW_MASS_ACTION:
        return pow(x, a)
    if law == LAW_MICHAELIS_MENTEN:
        return pow(x / (km + x), a)
    u = pow(x, hn)
    return pow(u / (pow(km, hn) + u), a)


cdef inline double _dfactor(double x, double a, long law, double km, double hn) nogil:
    cdef double u, kh, du
    if x < 0.0:
        x = 0.0
    if law == LAW_MASS_ACTION:
        if a == 1.0:
            return 1.0
        return a * pow(x, a - 1.0)
    if law == LAW_MICHAELIS_MENTEN:
        u = x / (km + x)
        du = km / ((km + x) * (km + x))
        if a == 1.0:
            return du
        return a * pow(u, a - 1.0) * du
    kh = pow(km, hn)
    u = pow(x, hn)
    du = hn * pow(x, hn - 1.0) * kh / ((kh + u) * (kh + u))
    if a == 1.0:
        return du
    return a * pow(u / (kh + u), a - 1.0) * du


cdef void _rates(double[::1] x, long[::1] rptr, long[::1] ridx, double[::1] rcoef,
                 long[::1] law, double[::1] p1, double[::1] p2, double[::1] p3,
                 double[::1] out) nogil:
    cdef Py_ssize_t j, q
    cdef Py_ssize_t nu = out.shape[0]
    cdef double v
    for j in range(nu):
        v = p1[j]
        for q in range(rptr[j], rptr[j + 1]):
            v *= _factor(x[ridx[q]], rcoef[q], law[j], p2[j], p3[j])
        out[j] = v


cdef void _jacobian(double[::1] x, long[::1] rptr, long[::1] ridx, double[::1] rcoef,
                    long[::1] law, double[::1] p1, double[::1] p2, double[::1] p3,
                    double[:, ::1] out) nogil:
    cdef Py_ssize_t j, q, q2, i
    cdef Py_ssize_t nu = out.shape[0]
    cdef Py_ssize_t n = out.shape[1]
    cdef double v
    for j in range(nu):
        for i in range(n):
            out[j, i] = 0.0
        for q in range(rptr[j], rptr[j + 1]):
            v = p1[j] * _dfactor(x[ridx[q]], rcoef[q], law[j], p2[j], p3[j])
            for q2 in range(rptr[j], rptr[j + 1]):
                if q2 != q:
                    v *= _factor(x[ridx[q2]], rcoef[q2], law[j], p2[j], p3[j])
            out[j, ridx[q]] += v


cdef class _System:
    """State layout z = [y (d), w (d x q row-major)]; x = x_ref + P y."""
    cdef double[::1] x_ref
    cdef double[:, ::1] P
    cdef double[:, ::1] Q
    cdef long[::1] rptr
    cdef long[::1] ridx
    cdef double[::1] rcoef
    cdef long[::1] law
    cdef double[::1] p1
    cdef double[::1] p2
    cdef double[::1] p3
    cdef Py_ssize_t n, nu, d, q
    cdef double[::1] x
    cdef double[::1] r
    cdef double[:, ::1] jac
    cdef double[:, ::1] qj
    cdef double[:, ::1] qjp

    def __init__(self, x_ref, P, Q, rptr, ridx, rcoef, law, p1, p2, p3, q):
        self.x_ref = x_ref
        self.P = P
        self.Q = Q
        self.rptr = rptr
        self.ridx = ridx
        self.rcoef = rcoef
        self.law = law
        self.p1 = p1
        self.p2 = p2
        self.p3 = p3
        self.n = P.shape[0]
        self.d = P.shape[1]
        self.nu = Q.shape[1]
        self.q = q
        self.x = np.empty(self.n)
        self.r = np.empty(self.nu)
        self.jac = np.empty((self.nu, self.n))
        self.qj = np.empty((self.d, self.n))
        self.qjp = np.empty((self.d, self.d))

    cdef void state_x(self, double[::1] z) nogil:
        cdef Py_ssize_t i, a
        cdef double v
        for i in range(self.n):
            v = self.x_ref[i]
            for a in range(self.d):
                v += self.P[i, a] * z[a]
            self.x[i] = v

    cdef void rhs(self, double[::1] z, double[::1] dz) nogil:
        cdef Py_ssize_t a, b, c, i, j
        cdef double v
        self.state_x(z)
        _rates(self.x, self.rptr, self.ridx, self.rcoef, self.law,
               self.p1, self.p2, self.p3, self.r)
        for a in range(self.d):
            v = 0.0
            for j in range(self.nu):
                v += self.Q[a, j] * self.r[j]
            dz[a] = v
        if self.q == 0:
            return
        _jacobian(self.x, self.rptr, self.ridx, self.rcoef, self.law,
                  self.p1, self.p2, self.p3, self.jac)
        for a in range(self.d):
            for i in range(self.n):
                v = 0.0
                for j in range(self.nu):
                    v += self.Q[a, j] * self.jac[j, i]
                self.qj[a, i] = v
        for a in range(self.d):
            for b in range(self.d):
                v = 0.0
                for i in range(self.n):
                    v += self.qj[a, i] * self.P[i, b]
                self.qjp[a, b] = v
        for a in range(self.d):
            for c in range(self.q):
                v = 0.0
                for b in range(self.d):
                    v += self.qjp[a, b] * z[self.d + b * self.q + c]
                dz[self.d + a * self.q + c] = v


def rk45_advance(x_ref, P, Q, rptr, ridx, rcoef, law, p1, p2, p3, Py_ssize_t q,
                 double[::1] z, double t, double t_end, double h, double h_max,
                 double rtol, double atol, double neg_tol,
                 double[::1] out_t, double[:, ::1] out_z, long max_steps):
    """Advance ``z`` in place from ``t`` toward ``t_end``.

    Returns ``(t, h_next, n_recorded, status, n_accept, n_reject)`` where status
    is 0 (reached t_end), 1 (record buffer full), 2 (step underflow),
    3 (max_steps exhausted).
    """
    cdef _System sys = _System(x_ref, P, Q, rptr, ridx, rcoef, law, p1, p2, p3, q)
    cdef Py_ssize_t D = z.shape[0]
    cdef Py_ssize_t cap = out_t.shape[0]
    cdef double[::1] k1 = np.empty(D), k2 = np.empty(D), k3 = np.empty(D)
    cdef double[::1] k4 = np.empty(D), k5 = np.empty(D), k6 = np.empty(D)
    cdef double[::1] k7 = np.empty(D), ytmp = np.empty(D), ynew = np.empty(D)
    cdef Py_ssize_t i, n_rec = 0
    cdef long n_acc = 0, n_rej = 0
    cdef double err, sc, e, hs, fac, h_prop
    cdef bint last, neg
    cdef int status = 0

    sys.rhs(z, k1)
    while True:
        if t >= t_end:
            status = 0
            break
        if n_rec >= cap and cap > 0:
            status = 1
            break
        if n_acc + n_rej >= max_steps:
            status = 3
            break
        h = fmin(h, h_max)
        h_prop = h
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h < 1e-14 * fmax(1.0, fabs(t)):
            status = 2
            break
        for i in range(D):
            ytmp[i] = z[i] + h * A21 * k1[i]
        sys.rhs(ytmp, k2)
        for i in range(D):
            ytmp[i] = z[i] + h * (A31 * k1[i] + A32 * k2[i])
        sys.rhs(ytmp, k3)
        for i in range(D):
            ytmp[i] = z[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        sys.rhs(ytmp, k4)
        for i in range(D):
            ytmp[i] = z[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        sys.rhs(ytmp, k5)
        for i in range(D):
            ytmp[i] = z[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                  + A64 * k4[i] + A65 * k5[i])
        sys.rhs(ytmp, k6)
        for i in range(D):
            ynew[i] = z[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                  + B5 * k5[i] + B6 * k6[i])
        sys.rhs(ynew, k7)
        err = 0.0
        for i in range(D):
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                     + E6 * k6[i] + E7 * k7[i])
            sc = atol + rtol * fmax(fabs(z[i]), fabs(ynew[i]))
            e = fabs(e) / sc
            if e > err:
                err = e
        # negativity: state must stay in the closed orthant up to neg_tol
        sys.state_x(ynew)
        neg = False
        for i in range(sys.n):
            if sys.x[i] < -neg_tol:
                neg = True
                break
        if neg:
            n_rej += 1
            h = 0.5 * h
            continue
        if err <= 1.0:
            t = t_end if last else t + h
            for i in range(D):
                z[i] = ynew[i]
                k1[i] = k7[i]
            n_acc += 1
            if cap > 0:
                out_t[n_rec] = t
                for i in range(D):
                    out_z[n_rec, i] = z[i]
                n_rec += 1
            if err == 0.0:
                fac = 5.0
            else:
                fac = fmin(5.0, fmax(0.2, 0.9 * pow(err, -0.2)))
            h = (h_prop if last else h) * fac
        else:
            n_rej += 1
            h = h * fmax(0.2, 0.9 * pow(err, -0.2))
    return t, h, n_rec, status, n_acc, n_rej


def eval_rates(double[::1] x, long[::1] rptr, long[::1] ridx, double[::1] rcoef,
               long[::1] law, double[::1] p1, double[::1] p2, double[::1] p3):
    out = np.empty(p1.shape[0])
    _rates(x, rptr, ridx, rcoef, law, p1, p2, p3, out)
    return out


def eval_jacobian(double[::1] x, long[::1] rptr, long[::1] ridx, double[::1] rcoef,
                  long[::1] law, double[::1] p1, double[::1] p2, double[::1] p3):
    out = np.empty((p1.shape[0], x.shape[0]))
    _jacobian(x, rptr, ridx, rcoef, law, p1, p2, p3, out)
    return out


def bland_simplex(double[:, ::1] T, long[::1] basis, Py_ssize_t n_enter,
                  double eps, long max_iter):
    """Bland-rule primal simplex on a tableau whose last row holds reduced costs.

    The last column is the right-hand side. Returns ``(status, iterations)``
    with status 0 optimal, 1 unbounded, 2 iteration limit.
    """
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t ncol = T.shape[1]
    cdef Py_ssize_t rhs = ncol - 1
    cdef Py_ssize_t i, j, c, enter, leave
    cdef long it = 0
    cdef double best, ratio, piv, f
    while True:
        if it >= max_iter:
            return 2, it
        enter = -1
        for j in range(n_enter):
            if T[m, j] < -eps:
                enter = j
                break
        if enter < 0:
            return 0, it
        leave = -1
        best = 0.0
        for i in range(m):
            if T[i, enter] > eps:
                ratio = T[i, rhs] / T[i, enter]
                if leave < 0 or ratio < best - 1e-12:
                    best = ratio
                    leave = i
                elif fabs(ratio - best) <= 1e-12 and basis[i] < basis[leave]:
                    best = fmin(best, ratio)
                    leave = i
        if leave < 0:
            return 1, it
        piv = T[leave, enter]
        for c in range(ncol):
            T[leave, c] /= piv
        for i in range(m + 1):
            if i != leave:
                f = T[i, enter]
                if f != 0.0:
                    for c in range(ncol):
                        T[i, c] -= f * T[leave, c]
                    T[i, enter] = 0.0
        basis[leave] = enter
        it += 1


def siphon_masks(cnp.uint64_t[::1] in_masks, cnp.uint64_t[::1] out_masks, int n):
    """Bitmasks of every nonempty species set closed under the siphon rule."""
    cdef cnp.uint64_t total = (<cnp.uint64_t>1) << n
    cdef cnp.uint64_t P
    cdef Py_ssize_t j, nu = in_masks.shape[0], count = 0
    cdef bint ok
    buf = np.empty(total, dtype=np.uint64)
    cdef cnp.uint64_t[::1] out = buf
    for P in range(1, total):
        ok = True
        for j in range(nu):
            if (in_masks[j] & P) != 0 and (out_masks[j] & P) == 0:
                ok = False
                break
        if ok:
            out[count] = P
            count += 1
    return buf[:count].copy()
