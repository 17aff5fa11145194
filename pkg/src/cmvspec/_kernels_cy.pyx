# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: Hessenberg reduction, shifted QR eigenvalues, inverse
iteration, and the Hermitian tridiagonal pipeline.

Same algorithms as ``cmvspec._kernels_py``; the inner loops run in C with
the GIL released, so grid evaluations can thread.
"""

import numpy as np

cimport cython
from libc.math cimport copysign, hypot, sqrt

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double cabs(double complex)
    double complex conj(double complex)
    double creal(double complex)
    double cimag(double complex)

cdef double EPS = 2.220446049250313e-16


cdef inline void _givens(double complex f, double complex g,
                         double *c, double complex *s, double complex *r) noexcept nogil:
    cdef double af, d
    cdef double complex fs
    if g == 0:
        c[0] = 1.0
        s[0] = 0
        r[0] = f
        return
    if f == 0:
        af = cabs(g)
        c[0] = 0.0
        s[0] = conj(g) / af
        r[0] = af
        return
    af = cabs(f)
    d = hypot(af, cabs(g))
    fs = f / af
    c[0] = af / d
    s[0] = fs * conj(g) / d
    r[0] = fs * d


cdef inline void _eig2(double complex h11, double complex h12,
                       double complex h21, double complex h22,
                       double complex *big, double complex *small) noexcept nogil:
    cdef double complex m = 0.5 * (h11 + h22)
    cdef double complex rad = csqrt(0.25 * (h11 - h22) * (h11 - h22) + h12 * h21)
    cdef double complex l1 = m + rad
    cdef double complex l2 = m - rad
    cdef double complex bg = l1 if cabs(l1) >= cabs(l2) else l2
    if bg == 0:
        big[0] = 0
        small[0] = 0
        return
    big[0] = bg
    small[0] = (h11 * h22 - h12 * h21) / bg


def hessenberg(a_in):
    """Householder reduction a = q h q^H with h upper Hessenberg, q unitary."""
    h_arr = np.array(a_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = h_arr.shape[0]
    q_arr = np.eye(n, dtype=np.complex128)
    if n <= 2:
        return h_arr, q_arr
    vs_arr = np.zeros((n - 2, n), dtype=np.complex128)
    betas_arr = np.zeros(n - 2, dtype=np.float64)
    wrk_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[:, ::1] h = h_arr
    cdef double complex[:, ::1] q = q_arr
    cdef double complex[:, ::1] vs = vs_arr
    cdef double[::1] betas = betas_arr
    cdef double complex[::1] wrk = wrk_arr
    cdef Py_ssize_t k, i, j
    cdef double tail, nx, beta, t
    cdef double complex alpha, sgn, acc
    with nogil:
        for k in range(n - 2):
            tail = 0.0
            for i in range(k + 2, n):
                tail = hypot(tail, cabs(h[i, k]))
            if tail == 0.0:
                betas[k] = 0.0
                continue
            alpha = h[k + 1, k]
            nx = hypot(cabs(alpha), tail)
            if alpha != 0:
                sgn = alpha / cabs(alpha)
            else:
                sgn = 1.0
            vs[k, k + 1] = alpha + sgn * nx
            for i in range(k + 2, n):
                vs[k, i] = h[i, k]
            t = 0.0
            for i in range(k + 1, n):
                t += creal(vs[k, i]) * creal(vs[k, i]) + cimag(vs[k, i]) * cimag(vs[k, i])
            beta = 2.0 / t
            betas[k] = beta
            for j in range(k + 1, n):
                wrk[j] = 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    wrk[j] = wrk[j] + conj(vs[k, i]) * h[i, j]
            for i in range(k + 1, n):
                acc = beta * vs[k, i]
                for j in range(k + 1, n):
                    h[i, j] = h[i, j] - acc * wrk[j]
            for i in range(n):
                acc = 0
                for j in range(k + 1, n):
                    acc = acc + h[i, j] * vs[k, j]
                acc = beta * acc
                for j in range(k + 1, n):
                    h[i, j] = h[i, j] - acc * conj(vs[k, j])
            h[k + 1, k] = -sgn * nx
            for i in range(k + 2, n):
                h[i, k] = 0
        for k in range(n - 3, -1, -1):
            if betas[k] == 0.0:
                continue
            beta = betas[k]
            for j in range(k + 1, n):
                wrk[j] = 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    wrk[j] = wrk[j] + conj(vs[k, i]) * q[i, j]
            for i in range(k + 1, n):
                acc = beta * vs[k, i]
                for j in range(k + 1, n):
                    q[i, j] = q[i, j] - acc * wrk[j]
    return h_arr, q_arr


def hessenberg_eigvals(h_in, long max_sweeps):
    """All eigenvalues of an upper Hessenberg matrix by implicitly shifted QR.

    Destroys ``h_in``.  Returns ``(w, converged, achieved)``.
    """
    h_arr = np.ascontiguousarray(h_in, dtype=np.complex128)
    cdef Py_ssize_t n = h_arr.shape[0]
    w_arr = np.zeros(n, dtype=np.complex128)
    if n == 0:
        return w_arr, True, 0.0
    cdef double complex[:, ::1] h = h_arr
    cdef double complex[::1] w = w_arr
    if n == 1:
        w[0] = h[0, 0]
        return w_arr, True, 0.0
    cdef double hnorm = float(np.linalg.norm(h_arr))
    cdef long sweeps = 0, stall = 0
    cdef Py_ssize_t ihi = n - 1, l = 0, k, rr, i
    cdef double complex sigma, x, y, s, r, t1, t2, l1, l2
    cdef double c, ssum
    cdef bint converged = True
    with nogil:
        while ihi >= 0:
            if ihi == 0:
                w[0] = h[0, 0]
                break
            l = ihi
            while l > 0:
                ssum = cabs(h[l - 1, l - 1]) + cabs(h[l, l])
                if ssum == 0.0:
                    ssum = hnorm
                if cabs(h[l, l - 1]) <= EPS * ssum:
                    h[l, l - 1] = 0
                    break
                l -= 1
            if l == ihi:
                w[ihi] = h[ihi, ihi]
                ihi -= 1
                stall = 0
                continue
            if l == ihi - 1:
                _eig2(h[ihi - 1, ihi - 1], h[ihi - 1, ihi],
                      h[ihi, ihi - 1], h[ihi, ihi], &l1, &l2)
                w[ihi - 1] = l1
                w[ihi] = l2
                ihi -= 2
                stall = 0
                continue
            if sweeps >= max_sweeps:
                converged = False
                break
            if stall > 0 and stall % 10 == 0:
                sigma = h[ihi, ihi] + 0.75 * (cabs(h[ihi, ihi - 1]) + cabs(h[ihi - 1, ihi - 2]))
            else:
                _eig2(h[ihi - 1, ihi - 1], h[ihi - 1, ihi],
                      h[ihi, ihi - 1], h[ihi, ihi], &l1, &l2)
                sigma = l1 if cabs(l1 - h[ihi, ihi]) <= cabs(l2 - h[ihi, ihi]) else l2
            x = h[l, l] - sigma
            y = h[l + 1, l]
            for k in range(l, ihi):
                _givens(x, y, &c, &s, &r)
                if k > l:
                    h[k, k - 1] = r
                    h[k + 1, k - 1] = 0
                for i in range(k, ihi + 1):
                    t1 = h[k, i]
                    t2 = h[k + 1, i]
                    h[k, i] = c * t1 + s * t2
                    h[k + 1, i] = -conj(s) * t1 + c * t2
                rr = k + 2
                if rr > ihi:
                    rr = ihi
                for i in range(l, rr + 1):
                    t1 = h[i, k]
                    t2 = h[i, k + 1]
                    h[i, k] = c * t1 + conj(s) * t2
                    h[i, k + 1] = -s * t1 + c * t2
                if k < ihi - 1:
                    x = h[k + 1, k]
                    y = h[k + 2, k]
            sweeps += 1
            stall += 1
    if not converged:
        ach = 0.0
        for k in range(1, ihi + 1):
            ach = max(ach, abs(complex(h_arr[k, k - 1])))
        return w_arr, False, float(ach)
    return w_arr, True, 0.0


def hessenberg_inverse_iteration(h0_in, lam_in, double tol, int variant=0):
    """Unit eigenvector of the Hessenberg matrix h0 for eigenvalue lam."""
    h0_arr = np.ascontiguousarray(h0_in, dtype=np.complex128)
    cdef Py_ssize_t n = h0_arr.shape[0]
    if n == 1:
        return np.ones(1, dtype=np.complex128)
    cdef double scale = float(np.linalg.norm(h0_arr))
    if scale == 0.0:
        scale = 1.0
    r_arr = h0_arr.copy()
    cs_arr = np.empty(n - 1, dtype=np.float64)
    sn_arr = np.empty(n - 1, dtype=np.complex128)
    if variant == 0:
        b_arr = np.ones(n, dtype=np.complex128)
    else:
        idx = np.arange(n, dtype=np.float64)
        b_arr = (1.0 + ((idx * (variant + 1)) % 5.0)) + 1j * ((idx * variant) % 3.0 - 1.0)
    b_arr /= np.linalg.norm(b_arr)
    y_arr = np.empty(n, dtype=np.complex128)
    x_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[:, ::1] r = r_arr
    cdef double[::1] cs = cs_arr
    cdef double complex[::1] sn = sn_arr
    cdef double complex[::1] b = b_arr
    cdef double complex[::1] yv = y_arr
    cdef double complex[::1] xv = x_arr
    cdef double complex lam = lam_in
    cdef double tgt = tol
    if tgt < 4.0 * EPS * scale:
        tgt = 4.0 * EPS * scale
    cdef Py_ssize_t i, j, k, it
    cdef double c, growth, tiny
    cdef double complex s, piv, t1, t2, acc
    with nogil:
        for i in range(n):
            r[i, i] = r[i, i] - lam
        for k in range(n - 1):
            _givens(r[k, k], r[k + 1, k], &c, &s, &piv)
            cs[k] = c
            sn[k] = s
            for j in range(k, n):
                t1 = r[k, j]
                t2 = r[k + 1, j]
                r[k, j] = c * t1 + s * t2
                r[k + 1, j] = -conj(s) * t1 + c * t2
            r[k + 1, k] = 0
        tiny = EPS * scale
        for k in range(n):
            if cabs(r[k, k]) < tiny:
                r[k, k] = tiny
        for it in range(3):
            for i in range(n):
                yv[i] = b[i]
            for k in range(n - 1):
                t1 = yv[k]
                t2 = yv[k + 1]
                yv[k] = cs[k] * t1 + sn[k] * t2
                yv[k + 1] = -conj(sn[k]) * t1 + cs[k] * t2
            for i in range(n - 1, -1, -1):
                acc = yv[i]
                for j in range(i + 1, n):
                    acc = acc - r[i, j] * xv[j]
                xv[i] = acc / r[i, i]
            growth = 0.0
            for i in range(n):
                growth += creal(xv[i]) * creal(xv[i]) + cimag(xv[i]) * cimag(xv[i])
            growth = sqrt(growth)
            for i in range(n):
                b[i] = xv[i] / growth
            if 1.0 / growth <= 0.25 * tgt:
                break
    return b_arr


def hermitian_tridiagonalize(g_in):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns ``(d, e, vstore, tau)`` with ``g = Q T Q^H`` and
    ``Q = H_0 H_1 ... H_{n-2}``; reflector tails live below the first
    subdiagonal of ``vstore``.
    """
    a_arr = np.array(g_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = a_arr.shape[0]
    d_arr = np.zeros(n, dtype=np.float64)
    e_arr = np.zeros(max(n - 1, 0), dtype=np.float64)
    tau_arr = np.zeros(max(n - 1, 0), dtype=np.complex128)
    p_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[:, ::1] a = a_arr
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef double complex[::1] tau = tau_arr
    cdef double complex[::1] p = p_arr
    cdef Py_ssize_t k, i, j
    cdef double xnorm, anorm, beta, vap, coef
    cdef double complex alpha, tk, denom, acc
    if n < 2:
        if n == 1:
            d[0] = creal(a[0, 0])
        return d_arr, e_arr, a_arr, tau_arr
    with nogil:
        for k in range(n - 1):
            alpha = a[k + 1, k]
            xnorm = 0.0
            for i in range(k + 2, n):
                xnorm = hypot(xnorm, cabs(a[i, k]))
            if xnorm == 0.0 and cimag(alpha) == 0.0:
                e[k] = creal(alpha)
                tau[k] = 0
                continue
            anorm = hypot(cabs(alpha), xnorm)
            beta = -copysign(anorm, creal(alpha))
            tk = (beta - alpha) / beta
            denom = alpha - beta
            a[k + 1, k] = 1.0
            for i in range(k + 2, n):
                a[i, k] = a[i, k] / denom
            for i in range(k + 1, n):
                acc = 0
                for j in range(k + 1, n):
                    acc = acc + a[i, j] * a[j, k]
                p[i] = acc
            vap = 0.0
            for i in range(k + 1, n):
                vap += creal(conj(a[i, k]) * p[i])
            coef = 0.5 * (creal(tk) * creal(tk) + cimag(tk) * cimag(tk)) * vap
            for i in range(k + 1, n):
                p[i] = tk * p[i] - coef * a[i, k]
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i, j] = a[i, j] - a[i, k] * conj(p[j]) - p[i] * conj(a[j, k])
            e[k] = beta
            tau[k] = tk
        for i in range(n):
            d[i] = creal(a[i, i])
    return d_arr, e_arr, a_arr, tau_arr


def tridiag_eigvals(d_in, e_in, long max_iter=60):
    """Eigenvalues of a real symmetric tridiagonal matrix (implicit-shift QL).

    Inputs are not modified.  Returns ``(w, converged)``.
    """
    d_arr = np.array(d_in, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = d_arr.shape[0]
    e_arr = np.zeros(n, dtype=np.float64)
    if n > 1:
        e_arr[: n - 1] = e_in
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef Py_ssize_t l, m, i
    cdef long iters
    cdef double g, r, s, c, p, f, b, dd
    cdef bint ok = True, broke
    with nogil:
        for l in range(n):
            iters = 0
            while True:
                m = l
                while m < n - 1:
                    dd = abs(d[m]) + abs(d[m + 1])
                    if abs(e[m]) <= EPS * dd:
                        break
                    m += 1
                if m == l:
                    break
                iters += 1
                if iters > max_iter:
                    ok = False
                    break
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                g = d[m] - d[l] + e[l] / (g + copysign(r, g))
                s = 1.0
                c = 1.0
                p = 0.0
                broke = False
                for i in range(m - 1, l - 1, -1):
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
                    e[i + 1] = r
                    if r == 0.0:
                        d[i + 1] -= p
                        e[m] = 0.0
                        broke = True
                        break
                    s = f / r
                    c = g / r
                    g = d[i + 1] - p
                    r = (d[i] - g) * s + 2.0 * c * b
                    p = s * r
                    d[i + 1] = g + p
                    g = c * r - b
                if not broke:
                    d[l] -= p
                    e[l] = g
                    e[m] = 0.0
            if not ok:
                break
    return d_arr, ok
