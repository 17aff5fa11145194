"""Finite-volume spectral analysis: unitary compressions, eigenangles, gap
statistics, covariance checks, and Weyl-criterion certification.

Compressions cut the lattice by overriding Verblunsky coefficients to
modulus one at two odd sites (flipping the complementary modulus to zero
decouples a finite block), or for the walk by substituting fully
reflecting coins at two walker sites.  Every block is checked against the
unitarity gate before any spectral claim is made of it.

Certification forms the rectangle of (Op - z) acting on vectors supported
in a window, with rows extending over every index the band can reach, so
truncation only restricts the trial space and the smallest singular value
is a rigorous upper bound on the distance from z to the whole-line
spectrum; it can only decrease as the window grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from . import numerics
from .model import (
    CoinSpec,
    SkewParams,
    VerblunskySource,
    WalkParams,
    electric_source,
    skew_source,
)
from .operators import Window, build_cmv_direct, build_cmv_product, build_walk, densify
from .torus import Turn, exact, phase

__all__ = [
    "StructuralError",
    "EigenangleSet",
    "GapStats",
    "CertRecord",
    "decoupled_block",
    "unitary_compression",
    "walk_compression",
    "skew_compression",
    "centered_cuts",
    "eigenangles",
    "gap_stats",
    "rotation_covariance_check",
    "spectral_tau_covariance",
    "weyl_certify",
    "certify_grid",
    "omega_sweep",
    "cyclic_multiset_mismatch",
    "write_eigenangles_csv",
    "write_cert_csv",
    "write_sweep_csv",
]

BLOCK_UNITARITY_TOL = 1e-12
EIG_GATE_TOL = 1e-10
UNIMODULARITY_TOL = 1e-8


class StructuralError(RuntimeError):
    """A compression failed a structural gate (wrong cuts, non-unitary block)."""


@dataclass(frozen=True)
class EigenangleSet:
    """Sorted eigenvalue angles (turns in [0, 1)) of a finite unitary."""

    angles: np.ndarray
    size: int

    def __post_init__(self):
        self.angles.setflags(write=False)


@dataclass(frozen=True)
class GapStats:
    """Cyclic gap statistics of an eigenangle set (wrap-around included)."""

    max_gap: float
    mean_gap: float
    n: int


@dataclass(frozen=True)
class CertRecord:
    """Certified upper bound on dist(z, spectrum) from one window."""

    z_angle: float
    window_size: int
    sigma_min: float


def decoupled_block(src: VerblunskySource, cut_lo: int, cut_hi: int) -> np.ndarray:
    """Extract the block between two cut sites, verifying it is unitary.

    The source must already decouple at the cuts (modulus-one overrides);
    a block failing the unitarity gate means the cuts are misplaced.
    """
    if cut_lo % 2 == 0 or cut_hi % 2 == 0:
        raise StructuralError(f"cut sites must be odd, got ({cut_lo}, {cut_hi})")
    if cut_hi - cut_lo < 8:
        raise StructuralError(f"cuts ({cut_lo}, {cut_hi}) enclose fewer than 8 sites")
    op = build_cmv_product(src, (cut_lo - 1, cut_hi + 3))
    a = densify(op)
    i0 = cut_lo + 1 - op.lo
    i1 = cut_hi + 1 - op.lo
    u = np.ascontiguousarray(a[i0:i1, i0:i1])
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if err > BLOCK_UNITARITY_TOL:
        raise StructuralError(
            f"block [{cut_lo + 1}, {cut_hi + 1}) not unitary "
            f"(residual {err:.3e}); cut placement wrong"
        )
    return u


def unitary_compression(
    src: VerblunskySource,
    cut_lo: int,
    cut_hi: int,
    cut_alphas: Tuple[complex, complex] = (1.0, 1.0),
) -> np.ndarray:
    """Finite unitary block of the CMV matrix between two odd cut sites.

    Overrides the coefficients at both cuts to the given modulus-one
    values (default 1) and returns the enclosed (cut_hi - cut_lo)-dim
    block after the unitarity gate.
    """
    for val in cut_alphas:
        if abs(abs(complex(val)) - 1.0) > 1e-12:
            raise StructuralError(f"cut override must have modulus 1, got {val!r}")
    src2 = src.with_overrides({cut_lo: cut_alphas[0], cut_hi: cut_alphas[1]})
    return decoupled_block(src2, cut_lo, cut_hi)


def _reflecting_coin(coin: CoinSpec) -> CoinSpec:
    b = coin.b / abs(coin.b) if coin.b != 0 else 1.0
    return CoinSpec(0.0, b, coin.eta)


def walk_compression(p: WalkParams, m_lo: int, m_hi: int) -> np.ndarray:
    """Unitary walk block cut by fully reflecting coins at two walker sites.

    The block spans lattice rows [2*m_lo + 1, 2*m_hi + 1); reflecting
    coins make it invariant, so the window build is already exact.
    """
    if m_hi - m_lo < 4:
        raise StructuralError(f"reflecting cuts ({m_lo}, {m_hi}) too close")
    refl = _reflecting_coin(p.coin)
    op = build_walk(p, (2 * m_lo + 1, 2 * m_hi + 1), {m_lo: refl, m_hi: refl})
    u = densify(op)
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if err > BLOCK_UNITARITY_TOL:
        raise StructuralError(f"walk block not unitary (residual {err:.3e})")
    return u


def skew_compression(
    p: SkewParams, cut_lo: int, cut_hi: int, covariant_cuts: bool = False
) -> np.ndarray:
    """Compression of the skew CMV matrix.

    With ``covariant_cuts`` the cut overrides are ``phase((c/2) * x_{d-1})``,
    which makes the block transform exactly under shifts of the (d-1)-th
    coordinate (angles move by -tau/2); plain cuts break that covariance at
    the boundary entries.
    """
    if covariant_cuts:
        xi = exact(p.x[-2])
        cut_alphas = (
            phase(Fraction(cut_lo, 2) * xi),
            phase(Fraction(cut_hi, 2) * xi),
        )
    else:
        cut_alphas = (1.0, 1.0)
    return unitary_compression(skew_source(p), cut_lo, cut_hi, cut_alphas)


def centered_cuts(n: int) -> Tuple[int, int]:
    """Odd cut sites enclosing an n-dimensional block around the origin."""
    if n % 2 or n < 8:
        raise ValueError(f"block dimension must be even and >= 8, got {n}")
    c1 = -(n // 2) - 1
    if c1 % 2 == 0:
        c1 += 1
    return c1, c1 + n


def eigenangles(u, threads: int = 1) -> EigenangleSet:
    """Eigenvalue angles of a unitary matrix, sorted ascending in [0, 1).

    Gates on near-unitarity of the input and on unimodularity of the
    computed eigenvalues; violations raise instead of passing silently.
    """
    a = np.asarray(u, dtype=np.complex128)
    n = a.shape[0]
    gate = float(np.max(np.abs(a.conj().T @ a - np.eye(n))))
    if gate > EIG_GATE_TOL:
        raise StructuralError(f"matrix fails unitarity gate: {gate:.3e} > {EIG_GATE_TOL}")
    res = numerics.eig_all(a, threads=threads)
    offcircle = float(np.max(np.abs(np.abs(res.values) - 1.0)))
    if offcircle > UNIMODULARITY_TOL:
        raise StructuralError(f"eigenvalues off the unit circle by {offcircle:.3e}")
    angles = np.mod(np.angle(res.values) / (2.0 * math.pi), 1.0)
    angles[angles >= 1.0] -= 1.0
    angles = np.sort(angles)
    return EigenangleSet(angles, n)


def gap_stats(s: EigenangleSet) -> GapStats:
    """Max and mean cyclic gap between consecutive eigenangles."""
    if s.size < 2:
        raise ValueError("gap statistics need at least 2 angles")
    a = s.angles
    gaps = np.empty(s.size)
    gaps[:-1] = np.diff(a)
    gaps[-1] = 1.0 - a[-1] + a[0]
    return GapStats(float(gaps.max()), float(gaps.sum() / s.size), s.size)


def cyclic_multiset_mismatch(a: np.ndarray, b: np.ndarray) -> float:
    """Best max circle-distance matching two sorted angle multisets.

    Sorted circular lists match under some cyclic index rotation; all
    rotations are tried and the smallest max distance returned.
    """
    if a.shape != b.shape:
        raise ValueError("angle multisets differ in size")
    n = a.size
    best = math.inf
    for shift in range(n):
        d = np.abs(a - np.roll(b, shift))
        d = np.minimum(d, 1.0 - d)
        best = min(best, float(d.max()))
        if best == 0.0:
            break
    return best


def rotation_covariance_check(
    p: WalkParams, theta_shift: Turn, block: Union[int, Tuple[int, int]]
) -> float:
    """Finite-volume check that shifting theta rotates every eigenangle.

    Compares the eigenangles of reflecting-coin walk compressions at theta
    and at theta + theta_shift; returns the max matched distance after
    applying the predicted shift.
    """
    if isinstance(block, int):
        m_lo = -(block // 4)
        m_hi = m_lo + block // 2
    else:
        m_lo, m_hi = block
    u0 = walk_compression(p, m_lo, m_hi)
    shifted = WalkParams(p.omega, exact(p.theta) + exact(theta_shift), p.coin)
    u1 = walk_compression(shifted, m_lo, m_hi)
    a0 = eigenangles(u0).angles
    a1 = eigenangles(u1).angles
    t = float(exact(theta_shift) % 1)
    predicted = np.sort(np.mod(a0 + t, 1.0))
    return cyclic_multiset_mismatch(predicted, a1)


def spectral_tau_covariance(
    p: SkewParams, tau: Turn, cut_lo: int, cut_hi: int
) -> float:
    """Eigenangle shift check under x_{d-1} -> x_{d-1} + tau.

    Uses covariant cut phases so the shifted and unshifted blocks are
    exactly unitarily equivalent up to the predicted -tau/2 rotation.
    """
    u0 = skew_compression(p, cut_lo, cut_hi, covariant_cuts=True)
    x_shift = list(p.x)
    x_shift[-2] = exact(x_shift[-2]) + exact(tau)
    p1 = SkewParams(p.d, p.omega, tuple(x_shift), p.a, p.b)
    u1 = skew_compression(p1, cut_lo, cut_hi, covariant_cuts=True)
    a0 = eigenangles(u0).angles
    a1 = eigenangles(u1).angles
    t = float((-exact(tau) / 2) % 1)
    predicted = np.sort(np.mod(a0 + t, 1.0))
    return cyclic_multiset_mismatch(predicted, a1)


CertTarget = Union[VerblunskySource, WalkParams]


def _window_matrix(target: CertTarget, window: Window) -> np.ndarray:
    """Rectangle of the operator acting on window-supported vectors: rows
    cover every index the band reaches, columns are the window."""
    lo, hi = window
    ext = (lo - 2, hi + 2)
    if isinstance(target, WalkParams):
        op = build_walk(target, ext)
    else:
        op = build_cmv_direct(target, ext)
    return densify(op)[:, 2:-2]


def weyl_certify(target: CertTarget, z_angle: Turn, window: Window) -> CertRecord:
    """Upper bound on the distance from a circle point to the spectrum.

    Forms (Op - z) restricted to window-supported trial vectors (rows never
    truncated) and returns its smallest singular value.
    """
    lo, hi = window
    n = hi - lo
    if n < 32:
        raise ValueError(f"certification window must have >= 32 sites, got {n}")
    m = _window_matrix(target, window).copy()
    z = phase(z_angle)
    for r in range(n):
        m[r + 2, r] -= z
    sigma = numerics.smallest_singular(m)
    return CertRecord(float(exact(z_angle) % 1), n, sigma)


def certify_grid(
    target: CertTarget, grid_n: int, window: Window, threads: int = 1
) -> List[CertRecord]:
    """Certification records at grid_n equispaced circle points.

    Points may be evaluated concurrently; the output order is always the
    grid order.
    """
    if grid_n < 8:
        raise ValueError(f"certification grid needs >= 8 points, got {grid_n}")
    angles = [Fraction(k, grid_n) for k in range(grid_n)]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda t: weyl_certify(target, t, window), angles))
    return [weyl_certify(target, t, window) for t in angles]


def omega_sweep(
    template: WalkParams,
    omega_list: Sequence[Turn],
    block: Union[int, Tuple[int, int]],
    threads: int = 1,
) -> List[Tuple[Turn, EigenangleSet, GapStats]]:
    """Eigenangles and gap statistics of the electric compression per field.

    The block (cut pair) is fixed across the sweep; an empty field list
    yields an empty table.
    """
    cuts = centered_cuts(block) if isinstance(block, int) else block
    out = []
    for om in omega_list:
        p = WalkParams(om, template.theta, template.coin)
        u = unitary_compression(electric_source(p), *cuts)
        ang = eigenangles(u, threads=threads)
        out.append((om, ang, gap_stats(ang)))
    return out


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_eigenangles_csv(path, s: EigenangleSet) -> None:
    """Columns: index, angle_turns (17 significant digits, LF endings)."""
    with open(path, "w", newline="\n") as fh:
        fh.write("index,angle_turns\n")
        for i, ang in enumerate(s.angles):
            fh.write(f"{i},{_fmt(ang)}\n")


def write_cert_csv(path, records: Iterable[CertRecord]) -> None:
    """Columns: z_angle_turns, window, sigma_min."""
    with open(path, "w", newline="\n") as fh:
        fh.write("z_angle_turns,window,sigma_min\n")
        for rec in records:
            fh.write(f"{_fmt(rec.z_angle)},{rec.window_size},{_fmt(rec.sigma_min)}\n")


def write_sweep_csv(path, table) -> None:
    """Columns: omega, angle_turns; one row per (field, eigenangle) pair."""
    with open(path, "w", newline="\n") as fh:
        fh.write("omega,angle_turns\n")
        for om, angset, _ in table:
            om_f = _fmt(float(om))
            for ang in angset.angles:
                fh.write(f"{om_f},{_fmt(ang)}\n")
