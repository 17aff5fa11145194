"""Five-diagonal operators on finite windows of the integer lattice.

All builders produce compressions of the corresponding whole-line
operators: entries whose column falls outside the window are dropped, so
interior rows and columns agree exactly with the infinite matrix.  Entry
phases are accumulated in exact turn arithmetic and converted to complex
only at assembly.

Walk matrix layout, under the identification (site n, spin -) -> row 2n and
(site n, spin +) -> row 2n+1, with e_n = phase(theta + eta + n*omega):

    row 2n:   b e_n at column 2n-1,        a e_n at column 2n+2
    row 2n+1: a* e_n at column 2n-2,      -b* e_n at column 2n+1

The CMV matrix is assembled either as the product of the two block-diagonal
factors (L on even pairs, M on odd pairs) or entry-by-entry from the closed
five-diagonal form; the two builders are mutual oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Tuple, Union

import numpy as np

from .model import CoinSpec, VerblunskySource, WalkParams
from .torus import Turn, exact, phase

OFFSETS = (-2, -1, 0, 1, 2)

Window = Tuple[int, int]

__all__ = [
    "OFFSETS",
    "BandedOperator",
    "build_walk",
    "build_cmv_product",
    "build_cmv_direct",
    "build_wbeta",
    "apply",
    "interior_unitarity_residual",
    "densify",
    "operator_to_jsonable",
]


class WindowError(ValueError):
    """Window does not satisfy a builder's alignment requirements."""


@dataclass(frozen=True)
class BandedOperator:
    """Complex operator on [lo, hi) with nonzero offsets limited to -2..+2.

    ``data[r, c]`` holds the entry at row ``lo + r``, column
    ``lo + r + OFFSETS[c]``; positions whose column leaves the window are
    structurally zero.
    """

    lo: int
    hi: int
    data: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        self.data.setflags(write=False)

    @property
    def window(self) -> Window:
        return (self.lo, self.hi)

    @property
    def size(self) -> int:
        return self.hi - self.lo


class _Builder:
    def __init__(self, lo: int, hi: int):
        self.lo = lo
        self.hi = hi
        self.data = np.zeros((hi - lo, 5), dtype=np.complex128)

    def put(self, i: int, j: int, value: complex) -> None:
        if not (self.lo <= i < self.hi and self.lo <= j < self.hi):
            return
        off = j - i
        if not -2 <= off <= 2:
            raise ValueError(f"entry ({i}, {j}) outside the five-diagonal band")
        self.data[i - self.lo, off + 2] = value

    def get(self, i: int, j: int) -> complex:
        if not (self.lo <= i < self.hi and self.lo <= j < self.hi):
            return 0.0 + 0.0j
        off = j - i
        if not -2 <= off <= 2:
            return 0.0 + 0.0j
        return self.data[i - self.lo, off + 2]

    def freeze(self, provenance: str) -> BandedOperator:
        return BandedOperator(self.lo, self.hi, self.data, provenance)


def _check_window(window: Window, minimum: int = 4) -> Window:
    lo, hi = int(window[0]), int(window[1])
    if hi - lo < minimum:
        raise WindowError(f"window [{lo}, {hi}) shorter than {minimum}")
    if (hi - lo) % 2:
        raise WindowError(f"window [{lo}, {hi}) must have even length")
    return lo, hi


def build_walk(
    p: WalkParams,
    window: Window,
    coin_overrides: Optional[Mapping[int, CoinSpec]] = None,
) -> BandedOperator:
    """Electric walk matrix on a window.

    ``coin_overrides`` substitutes the coin at selected walker sites; a
    fully reflecting coin (a = 0) decouples the lattice there, which is how
    unitary walk compressions are cut.
    """
    lo, hi = _check_window(window)
    b = _Builder(lo, hi)
    t_base = exact(p.theta) + exact(p.coin.eta)
    om = exact(p.omega)
    overrides = coin_overrides or {}
    for r in range(lo, hi):
        m = r // 2 if r % 2 == 0 else (r - 1) // 2
        coin = overrides.get(m, p.coin)
        e = phase(t_base + m * om)
        if r % 2 == 0:
            b.put(r, r - 1, coin.b * e)
            b.put(r, r + 2, coin.a * e)
        else:
            b.put(r, r - 2, np.conj(coin.a) * e)
            b.put(r, r + 1, -np.conj(coin.b) * e)
    return b.freeze("walk")


def _check_cmv_window(window: Window) -> Window:
    lo, hi = _check_window(window)
    if lo % 2 or hi % 2:
        raise WindowError(
            f"window [{lo}, {hi}) must be even-aligned so block factors tile it"
        )
    return lo, hi


def build_cmv_product(src: VerblunskySource, window: Window) -> BandedOperator:
    """CMV matrix as the product of its two block-diagonal factors.

    The factors are formed on a window extended by one block on each side,
    multiplied, and restricted; within the requested window this equals the
    compression of the whole-line product exactly.
    """
    lo, hi = _check_cmv_window(window)
    elo, ehi = lo - 2, hi + 2
    lfac = _Builder(elo, ehi)
    for s in range(elo, ehi, 2):
        al = src.alpha(s)
        rh = src.rho(s)
        lfac.put(s, s, np.conj(al))
        lfac.put(s, s + 1, rh)
        lfac.put(s + 1, s, rh)
        lfac.put(s + 1, s + 1, -al)
    mfac = _Builder(elo, ehi)
    mfac.put(elo, elo, 1.0)  # stub half-blocks; never reach the restricted window
    mfac.put(ehi - 1, ehi - 1, 1.0)
    for s in range(elo + 1, ehi - 1, 2):
        al = src.alpha(s)
        rh = src.rho(s)
        mfac.put(s, s, np.conj(al))
        mfac.put(s, s + 1, rh)
        mfac.put(s + 1, s, rh)
        mfac.put(s + 1, s + 1, -al)
    out = _Builder(lo, hi)
    for i in range(lo, hi):
        for j in range(max(lo, i - 2), min(hi, i + 3)):
            acc = 0.0 + 0.0j
            for k in range(max(elo, i - 1), min(ehi, i + 2)):
                acc += lfac.get(i, k) * mfac.get(k, j)
            if acc != 0.0:
                out.put(i, j, acc)
    return out.freeze(f"cmv-product[{src.kind}]")


def build_cmv_direct(src: VerblunskySource, window: Window) -> BandedOperator:
    """CMV matrix assembled entry-by-entry from the five-diagonal display."""
    lo, hi = _check_cmv_window(window)
    out = _Builder(lo, hi)
    al = src.alpha
    rh = src.rho
    for j in range(lo // 2 - 1, hi // 2 + 1):
        r, s = 2 * j, 2 * j + 1
        out.put(r, r - 1, np.conj(al(r)) * rh(r - 1))
        out.put(r, r, -np.conj(al(r)) * al(r - 1))
        out.put(r, r + 1, np.conj(al(s)) * rh(r))
        out.put(r, r + 2, rh(s) * rh(r))
        out.put(s, r - 1, rh(r) * rh(r - 1))
        out.put(s, r, -rh(r) * al(r - 1))
        out.put(s, s, -np.conj(al(s)) * al(r))
        out.put(s, r + 2, -rh(s) * al(r))
    return out.freeze(f"cmv-direct[{src.kind}]")


BetaMap = Union[Mapping[int, Turn], Callable[[int], Turn]]


def build_wbeta(beta: BetaMap, a: complex, b: complex, window: Window) -> BandedOperator:
    """Walk-shaped matrix with independent row-pair phases beta_j.

    Row pair (2j, 2j+1) carries ``b e(beta_{j-1})`` / ``a* e(beta_{j-1})``
    on the left and ``a e(beta_j)`` / ``-b* e(beta_j)`` on the right.
    """
    lo, hi = _check_window(window)
    bfun = beta if callable(beta) else beta.__getitem__
    a = complex(a)
    b = complex(b)
    out = _Builder(lo, hi)
    for r in range(lo, hi):
        if r % 2 == 0:
            j = r // 2
            out.put(r, r - 1, b * phase(bfun(j - 1)))
            out.put(r, r + 2, a * phase(bfun(j)))
        else:
            j = (r - 1) // 2
            out.put(r, r - 2, np.conj(a) * phase(bfun(j - 1)))
            out.put(r, r + 1, -np.conj(b) * phase(bfun(j)))
    return out.freeze("wbeta")


def apply(op: BandedOperator, v) -> np.ndarray:
    """Banded matrix-vector product."""
    vec = np.asarray(v, dtype=np.complex128)
    n = op.size
    if vec.shape != (n,):
        raise ValueError(f"vector length {vec.shape} does not match window size {n}")
    out = np.zeros(n, dtype=np.complex128)
    for c, off in enumerate(OFFSETS):
        r0 = max(0, -off)
        r1 = min(n, n - off)
        if r0 < r1:
            out[r0:r1] += op.data[r0:r1, c] * vec[r0 + off : r1 + off]
    return out


def densify(op: BandedOperator) -> np.ndarray:
    """Faithful dense copy of the window."""
    n = op.size
    a = np.zeros((n, n), dtype=np.complex128)
    for c, off in enumerate(OFFSETS):
        r0 = max(0, -off)
        r1 = min(n, n - off)
        for r in range(r0, r1):
            a[r, r + off] = op.data[r, c]
    return a


def interior_unitarity_residual(op: BandedOperator) -> float:
    """Deviation from unitarity away from the window edges.

    Max modulus of (A^H A - I) and (A A^H - I) entries over rows/columns
    that exclude four sites at each edge (where truncation cuts stencils).
    """
    n = op.size
    if n < 8:
        raise ValueError(f"window size {n} too small for an interior (need >= 8)")
    a = densify(op)
    eye = np.eye(n, dtype=np.complex128)
    g1 = a.conj().T @ a - eye
    g2 = a @ a.conj().T - eye
    core = slice(4, n - 4)
    return float(
        max(np.max(np.abs(g1[core, core])), np.max(np.abs(g2[core, core])))
    )


def operator_to_jsonable(op: BandedOperator) -> dict:
    """Dump format: {window, offsets, rows} with [re, im] entry pairs."""
    rows = [
        [[float(z.real), float(z.imag)] for z in op.data[r]]
        for r in range(op.size)
    ]
    return {"window": [op.lo, op.hi], "offsets": list(OFFSETS), "rows": rows}
