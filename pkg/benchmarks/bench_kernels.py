#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the three hot stages of the dense eigensolver (Hessenberg reduction,
shifted QR eigenvalues, one inverse iteration) and the Hermitian
tridiagonalization used by smallest_singular.

Usage: python benchmarks/bench_kernels.py [--sizes 64,128,256]
"""

import argparse
import time

import numpy as np

from cmvspec import _kernels_py

try:
    from cmvspec import _kernels_cy
except ImportError:
    _kernels_cy = None


def time_backend(mod, a):
    n = a.shape[0]
    out = {}
    t0 = time.perf_counter()
    h, q = mod.hessenberg(a)
    out["hessenberg"] = time.perf_counter() - t0
    h0 = h.copy()
    t0 = time.perf_counter()
    w, ok, _ = mod.hessenberg_eigvals(h, 40 * n)
    out["qr_eigvals"] = time.perf_counter() - t0
    assert ok
    tol = 1e-8 * float(np.linalg.norm(a))
    t0 = time.perf_counter()
    mod.hessenberg_inverse_iteration(h0, w[0], tol)
    out["inverse_iter"] = time.perf_counter() - t0
    g = a.conj().T @ a
    t0 = time.perf_counter()
    d, e, _, _ = mod.hermitian_tridiagonalize(g)
    out["tridiagonalize"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    mod.tridiag_eigvals(d, e)
    out["tridiag_ql"] = time.perf_counter() - t0
    return out, np.sort_complex(w)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="64,128,256")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)
    backends = [("python", _kernels_py)]
    if _kernels_cy is not None:
        backends.append(("cython", _kernels_cy))
    else:
        print("compiled extension not available; timing fallback only")
    stages = ["hessenberg", "qr_eigvals", "inverse_iter", "tridiagonalize", "tridiag_ql"]
    for n in sizes:
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        q, _ = np.linalg.qr(x)
        results = {}
        eigs = {}
        for name, mod in backends:
            results[name], eigs[name] = time_backend(mod, q)
        print(f"\nn = {n}")
        header = f"  {'stage':<16}" + "".join(f"{name:>12}" for name, _ in backends)
        if len(backends) == 2:
            header += f"{'speedup':>10}"
        print(header)
        for stage in stages:
            row = f"  {stage:<16}"
            for name, _ in backends:
                row += f"{results[name][stage]:>11.4f}s"
            if len(backends) == 2:
                ratio = results["python"][stage] / max(results["cython"][stage], 1e-12)
                row += f"{ratio:>9.1f}x"
            print(row)
        if len(backends) == 2:
            agree = float(np.max(np.abs(eigs["python"] - eigs["cython"])))
            print(f"  eigenvalue agreement between backends: {agree:.2e}")


if __name__ == "__main__":
    main()
