"""Exact arithmetic on the torus: turns, integer binomials, skew-shift dynamics.

Angles are stored in *turns* (units of a full revolution), so the phase an
angle ``t`` denotes is ``exp(2*pi*i*t)``.  A turn is represented by a plain
``float`` or by ``fractions.Fraction``; every float is an exact binary
rational, so all torus arithmetic is done in exact rational arithmetic
internally and only converted back to float at the boundary.  This keeps
quadratically growing angle combinations (``n**2 * omega`` and friends) free
of cancellation error for any window size used here.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

Turn = Union[float, Fraction]
TorusPoint = Sequence[Turn]

__all__ = [
    "Turn",
    "TorusPoint",
    "mod1",
    "exact",
    "phase",
    "binom",
    "pascal_holds",
    "skew_step",
    "skew_step_inv",
    "skew_iterate_closed",
    "project_last",
    "psi_sequence",
    "psi_lift",
    "golden_turn",
]


def exact(t: Turn) -> Fraction:
    """Exact rational lift of a turn (floats are exact binary rationals)."""
    if isinstance(t, Fraction):
        return t
    if isinstance(t, int):
        return Fraction(t)
    return Fraction(float(t))


def _wants_float(*values: Turn) -> bool:
    return any(isinstance(v, float) for v in values)


def _emit(value: Fraction, want_float: bool) -> Turn:
    value %= 1
    return float(value) if want_float else value


def mod1(t: Turn) -> Turn:
    """Canonical representative of a turn in [0, 1)."""
    return _emit(exact(t), _wants_float(t))


def phase(t: Turn) -> complex:
    """Complex phase exp(2*pi*i*t) of a turn.

    The turn is reduced exactly mod 1 and split into a quarter-turn count
    plus a remainder in [0, 1/4); the quarter turns are applied as exact
    multiplications by i.  Quarter-turn arguments therefore map to exact
    complex units, and adding a representable quarter turn to any angle
    multiplies the result bitwise-exactly by i.
    """
    r = exact(t) % 1
    q = int(4 * r)  # 0..3
    rem = r - Fraction(q, 4)
    ang = 2.0 * math.pi * float(rem)
    re, im = math.cos(ang), math.sin(ang)
    if q == 0:
        return complex(re, im)
    if q == 1:
        return complex(-im, re)
    if q == 2:
        return complex(-re, -im)
    return complex(im, -re)


def binom(n: int, k: int) -> int:
    """Binomial coefficient C(n, k) for any integer n and k >= 0.

    For n >= 0 this is the usual coefficient (zero when 0 <= n < k).  For
    n <= -1 it is the falling-factorial extension
    ``C(n, k) = (-1)**k * C(-n + k - 1, k)``, exact in integer arithmetic.
    """
    if k < 0:
        raise ValueError(f"binom requires k >= 0, got k={k}")
    if n >= 0:
        return math.comb(n, k) if n >= k else 0
    return (-1) ** k * math.comb(-n + k - 1, k)


def pascal_holds(n: int, k: int) -> bool:
    """Check C(n, k) + C(n, k-1) == C(n+1, k) exactly (k >= 1, any integer n)."""
    if k < 1:
        raise ValueError(f"pascal_holds requires k >= 1, got k={k}")
    return binom(n, k) + binom(n, k - 1) == binom(n + 1, k)


def _check_point(x: TorusPoint) -> None:
    if len(x) < 1:
        raise ValueError("torus point needs dimension >= 1")


def skew_step(x: TorusPoint, omega: Turn) -> tuple:
    """One forward application of the skew shift.

    ``(x1, x2, ..., xd) -> (x1 + omega, x2 + x1, ..., xd + x_{d-1})``,
    every coordinate reduced mod 1.  Dimension 1 is the pure rotation.
    """
    _check_point(x)
    want = _wants_float(omega, *x)
    xs = [exact(c) for c in x]
    out = [xs[0] + exact(omega)]
    out.extend(xs[i] + xs[i - 1] for i in range(1, len(xs)))
    return tuple(_emit(c, want) for c in out)


def skew_step_inv(x: TorusPoint, omega: Turn) -> tuple:
    """Inverse of :func:`skew_step` (recovers the pre-image coordinatewise)."""
    _check_point(x)
    want = _wants_float(omega, *x)
    xs = [exact(c) for c in x]
    out = [xs[0] - exact(omega)]
    for i in range(1, len(xs)):
        out.append(xs[i] - out[i - 1])
    return tuple(_emit(c, want) for c in out)


def skew_iterate_closed(x: TorusPoint, omega: Turn, n: int) -> tuple:
    """n-th iterate of the skew shift via the binomial closed form.

    Coordinate i (1-based) of the image is
    ``x_i + sum_{k=1}^{i-1} C(n, k) x_{i-k} + C(n, i) omega``;
    n may be any integer, including negative.
    """
    _check_point(x)
    want = _wants_float(omega, *x)
    xs = [exact(c) for c in x]
    om = exact(omega)
    out = []
    for i in range(len(xs)):
        acc = xs[i]
        for k in range(1, i + 1):
            acc += binom(n, k) * xs[i - k]
        acc += binom(n, i + 1) * om
        out.append(acc)
    return tuple(_emit(c, want) for c in out)


def project_last(x: TorusPoint) -> Turn:
    """Projection onto the last coordinate."""
    _check_point(x)
    return x[-1]


def psi_lift(x: TorusPoint, omega: Turn, j: int) -> Fraction:
    """Exact unreduced real lift of the last coordinate of the j-th iterate.

    The canonical [0, 1) representatives of the coordinates are combined
    exactly without re-reduction; this fixed lift is what downstream
    half-angle constructions divide by two.
    """
    _check_point(x)
    d = len(x)
    acc = exact(x[-1])
    for k in range(1, d):
        acc += binom(j, k) * exact(x[d - 1 - k])
    acc += binom(j, d) * exact(omega)
    return acc


def psi_sequence(x: TorusPoint, omega: Turn, j_range: Iterable[int]) -> list:
    """Last-coordinate projections of the iterates T^j(x) for j in j_range."""
    want = _wants_float(omega, *x)
    return [_emit(psi_lift(x, omega, j), want) for j in j_range]


def golden_turn() -> float:
    """The inverse golden ratio (sqrt(5) - 1) / 2 as a float turn."""
    return (math.sqrt(5.0) - 1.0) / 2.0
