"""Pure-numpy kernels: Hessenberg reduction, shifted QR eigenvalues,
inverse iteration, and the Hermitian tridiagonal pipeline.

This is the fallback backend, selected when the compiled extension is not
available (or when ``CMVSPEC_PURE_PYTHON=1``).  Same algorithms as the
compiled backend, vectorized per reflector / rotation with numpy.
"""

from __future__ import annotations

import numpy as np

_EPS = float(np.finfo(np.float64).eps)


def _givens(f: complex, g: complex):
    """Unitary [[c, s], [-conj(s), c]] with c real mapping (f, g) to (r, 0)."""
    if g == 0.0:
        return 1.0, 0.0 + 0.0j, f
    if f == 0.0:
        ag = abs(g)
        return 0.0, np.conj(g) / ag, complex(ag)
    af = abs(f)
    d = np.hypot(af, abs(g))
    fs = f / af
    return af / d, fs * np.conj(g) / d, fs * d


def _eig2(h11, h12, h21, h22):
    """Eigenvalues of a 2x2 complex matrix, larger modulus first."""
    m = 0.5 * (h11 + h22)
    rad = np.sqrt(np.complex128(0.25 * (h11 - h22) ** 2 + h12 * h21))
    l1, l2 = m + rad, m - rad
    big = l1 if abs(l1) >= abs(l2) else l2
    if big == 0.0:
        return np.complex128(0.0), np.complex128(0.0)
    return big, (h11 * h22 - h12 * h21) / big


def hessenberg(a):
    """Householder reduction a = q h q^H with h upper Hessenberg, q unitary."""
    h = np.array(a, dtype=np.complex128, copy=True, order="C")
    n = h.shape[0]
    q = np.eye(n, dtype=np.complex128)
    if n <= 2:
        return h, q
    reflectors: list = []
    for k in range(n - 2):
        x = h[k + 1 :, k]
        tail = float(np.linalg.norm(x[1:]))
        if tail == 0.0:
            reflectors.append(None)
            continue
        alpha = x[0]
        nx = np.hypot(abs(alpha), tail)
        s = alpha / abs(alpha) if alpha != 0.0 else 1.0 + 0.0j
        v = x.copy()
        v[0] += s * nx
        beta = 2.0 / float(np.real(np.vdot(v, v)))
        h[k + 1 :, k + 1 :] -= beta * np.outer(v, np.conj(v) @ h[k + 1 :, k + 1 :])
        h[:, k + 1 :] -= beta * np.outer(h[:, k + 1 :] @ v, np.conj(v))
        h[k + 1, k] = -s * nx
        h[k + 2 :, k] = 0.0
        reflectors.append((v, beta))
    for k in range(n - 3, -1, -1):
        r = reflectors[k]
        if r is None:
            continue
        v, beta = r
        q[k + 1 :, k + 1 :] -= beta * np.outer(v, np.conj(v) @ q[k + 1 :, k + 1 :])
    return h, q


def hessenberg_eigvals(h, max_sweeps):
    """All eigenvalues of an upper Hessenberg matrix by implicitly shifted QR.

    Destroys ``h``.  Returns ``(w, converged, achieved)`` where ``achieved``
    is the largest unresolved subdiagonal modulus when the sweep budget ran
    out (0.0 on success).
    """
    h = np.asarray(h)
    n = h.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    if n == 0:
        return w, True, 0.0
    if n == 1:
        w[0] = h[0, 0]
        return w, True, 0.0
    hnorm = float(np.linalg.norm(h))
    sweeps = 0
    stall = 0
    ihi = n - 1
    while ihi >= 0:
        if ihi == 0:
            w[0] = h[0, 0]
            break
        l = ihi
        while l > 0:
            s = abs(h[l - 1, l - 1]) + abs(h[l, l])
            if s == 0.0:
                s = hnorm
            if abs(h[l, l - 1]) <= _EPS * s:
                h[l, l - 1] = 0.0
                break
            l -= 1
        if l == ihi:
            w[ihi] = h[ihi, ihi]
            ihi -= 1
            stall = 0
            continue
        if l == ihi - 1:
            w[ihi - 1], w[ihi] = _eig2(
                h[ihi - 1, ihi - 1], h[ihi - 1, ihi], h[ihi, ihi - 1], h[ihi, ihi]
            )
            ihi -= 2
            stall = 0
            continue
        if sweeps >= max_sweeps:
            ach = float(max(abs(h[k, k - 1]) for k in range(1, ihi + 1)))
            return w, False, ach
        if stall > 0 and stall % 10 == 0:
            sigma = h[ihi, ihi] + 0.75 * (abs(h[ihi, ihi - 1]) + abs(h[ihi - 1, ihi - 2]))
        else:
            l1, l2 = _eig2(
                h[ihi - 1, ihi - 1], h[ihi - 1, ihi], h[ihi, ihi - 1], h[ihi, ihi]
            )
            sigma = l1 if abs(l1 - h[ihi, ihi]) <= abs(l2 - h[ihi, ihi]) else l2
        x = h[l, l] - sigma
        y = h[l + 1, l]
        for k in range(l, ihi):
            c, s, r = _givens(x, y)
            if k > l:
                h[k, k - 1] = r
                h[k + 1, k - 1] = 0.0
            row1 = h[k, k : ihi + 1].copy()
            row2 = h[k + 1, k : ihi + 1].copy()
            h[k, k : ihi + 1] = c * row1 + s * row2
            h[k + 1, k : ihi + 1] = -np.conj(s) * row1 + c * row2
            rr = min(k + 2, ihi)
            col1 = h[l : rr + 1, k].copy()
            col2 = h[l : rr + 1, k + 1].copy()
            h[l : rr + 1, k] = c * col1 + np.conj(s) * col2
            h[l : rr + 1, k + 1] = -s * col1 + c * col2
            if k < ihi - 1:
                x = h[k + 1, k]
                y = h[k + 2, k]
        sweeps += 1
        stall += 1
    return w, True, 0.0


def hessenberg_inverse_iteration(h0, lam, tol, variant=0):
    """Unit eigenvector of the Hessenberg matrix h0 for eigenvalue lam.

    Shifted inverse iteration; the shifted matrix is factored once with
    Givens rotations (O(n^2) for Hessenberg structure) and reused.  ``tol``
    is the absolute residual target; ``variant`` selects a deterministic
    start vector for retries.
    """
    h0 = np.asarray(h0)
    n = h0.shape[0]
    if n == 1:
        return np.ones(1, dtype=np.complex128)
    scale = float(np.linalg.norm(h0)) or 1.0
    r = h0 - lam * np.eye(n, dtype=np.complex128)
    cs = np.empty(n - 1, dtype=np.float64)
    sn = np.empty(n - 1, dtype=np.complex128)
    for k in range(n - 1):
        c, s, piv = _givens(r[k, k], r[k + 1, k])
        cs[k] = c
        sn[k] = s
        row1 = r[k, k:].copy()
        row2 = r[k + 1, k:].copy()
        r[k, k:] = c * row1 + s * row2
        r[k + 1, k:] = -np.conj(s) * row1 + c * row2
        r[k + 1, k] = 0.0
    tiny = _EPS * scale
    for k in range(n):
        if abs(r[k, k]) < tiny:
            r[k, k] = tiny
    if variant == 0:
        b = np.ones(n, dtype=np.complex128)
    else:
        idx = np.arange(n, dtype=np.float64)
        b = (1.0 + ((idx * (variant + 1)) % 5.0)) + 1j * ((idx * variant) % 3.0 - 1.0)
    b /= np.linalg.norm(b)
    for _ in range(3):
        y = b.copy()
        for k in range(n - 1):
            t1, t2 = y[k], y[k + 1]
            y[k] = cs[k] * t1 + sn[k] * t2
            y[k + 1] = -np.conj(sn[k]) * t1 + cs[k] * t2
        x = np.zeros(n, dtype=np.complex128)
        for i in range(n - 1, -1, -1):
            x[i] = (y[i] - r[i, i + 1 :] @ x[i + 1 :]) / r[i, i]
        growth = float(np.linalg.norm(x))
        b = x / growth
        if 1.0 / growth <= 0.25 * max(tol, 4.0 * _EPS * scale):
            break
    return b


def hermitian_tridiagonalize(g):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns ``(d, e, vstore, tau)``: diagonal and off-diagonal of the real
    tridiagonal T, plus the Householder reflectors (tails stored below the
    first subdiagonal of ``vstore``, factors in ``tau``) with
    ``g = Q T Q^H`` and ``Q = H_0 H_1 ... H_{n-2}``.
    """
    a = np.array(g, dtype=np.complex128, copy=True, order="C")
    n = a.shape[0]
    d = np.zeros(n, dtype=np.float64)
    e = np.zeros(max(n - 1, 0), dtype=np.float64)
    tau = np.zeros(max(n - 1, 0), dtype=np.complex128)
    for k in range(n - 1):
        x = a[k + 1 :, k]
        alpha = complex(x[0])
        xnorm = float(np.linalg.norm(x[1:]))
        if xnorm == 0.0 and alpha.imag == 0.0:
            e[k] = alpha.real
            continue
        beta = -np.copysign(np.hypot(abs(alpha), xnorm), alpha.real)
        tau_k = (beta - alpha) / beta
        v = np.empty(n - 1 - k, dtype=np.complex128)
        v[0] = 1.0
        v[1:] = x[1:] / (alpha - beta)
        a2 = a[k + 1 :, k + 1 :]
        p = a2 @ v
        vap = float(np.real(np.vdot(v, p)))
        wvec = tau_k * p - (0.5 * abs(tau_k) ** 2 * vap) * v
        a2 -= np.outer(v, np.conj(wvec)) + np.outer(wvec, np.conj(v))
        e[k] = beta
        a[k + 2 :, k] = v[1:]
        tau[k] = tau_k
    d[:] = np.real(np.diag(a))
    return d, e, a, tau


def tridiag_eigvals(d_in, e_in, max_iter=60):
    """Eigenvalues of a real symmetric tridiagonal matrix (implicit-shift QL).

    Inputs are not modified.  Returns ``(w, converged)``.
    """
    d = np.array(d_in, dtype=np.float64, copy=True)
    n = d.size
    e = np.zeros(n, dtype=np.float64)
    if n > 1:
        e[: n - 1] = e_in
    for l in range(n):
        iters = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            iters += 1
            if iters > max_iter:
                return d, False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            broke = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
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
    return d, True
