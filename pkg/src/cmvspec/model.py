"""Coins and Verblunsky-coefficient families.

Two families generate everything here: the electric walk on the line
(coin plus site-dependent phase ``theta + n*omega``) and the skew-shift
family on the d-torus whose even coefficients are ``b`` times the phase of
the projected skew-shift orbit.  Odd coefficients vanish in both, which is
what makes boundary cuts at odd (or even) sites possible.

Even-site coefficient angles are assembled in exact rational turn
arithmetic before conversion to complex, so ``n**2 * omega``-type phases
stay accurate for |n| far beyond any window used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from . import torus
from .torus import Turn, exact, phase

_NORM_TOL = 1e-12

__all__ = [
    "CoinSpec",
    "WalkParams",
    "SkewParams",
    "VerblunskySource",
    "coin_matrix",
    "verblunsky_electric",
    "verblunsky_skew",
    "rho",
    "theta_block",
    "electric_source",
    "skew_source",
    "custom_source",
]


@dataclass(frozen=True)
class CoinSpec:
    """2x2 coin data (a, b, eta) with |a|^2 + |b|^2 = 1."""

    a: complex
    b: complex
    eta: Turn = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"coin needs |a|^2+|b|^2 = 1, got {norm!r}")


@dataclass(frozen=True)
class WalkParams:
    """Electric walk parameters: field omega, global phase theta, coin."""

    omega: Turn
    theta: Turn
    coin: CoinSpec


@dataclass(frozen=True)
class SkewParams:
    """Skew-shift family on the d-torus, d >= 2; a, b may be complex."""

    d: int
    omega: Turn
    x: tuple
    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        if self.d < 2:
            raise ValueError(f"skew family needs d >= 2, got d={self.d}")
        if len(self.x) != self.d:
            raise ValueError(f"base point has {len(self.x)} coordinates, expected d={self.d}")
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"|a|^2+|b|^2 = 1 required, got {norm!r}")


def coin_matrix(c: CoinSpec) -> np.ndarray:
    """The coin as a 2x2 unitary: e^{2 pi i eta} [[a, b], [-b*, a*]]."""
    e = phase(c.eta)
    return np.array(
        [[e * c.a, e * c.b], [-e * np.conj(c.b), e * np.conj(c.a)]],
        dtype=np.complex128,
    )


def verblunsky_electric(p: WalkParams, n: int, conjugate: bool = False) -> complex:
    """Electric-family coefficient at site n.

    Even sites 2m carry ``|b| * phase(-((m^2 - m) omega + 2 m (theta + eta)))``;
    odd sites vanish.  ``conjugate`` flips the sign of the angle (the two
    orientation conventions in circulation; gauge tests settle which one a
    given identity needs).
    """
    if n % 2:
        return 0.0 + 0.0j
    m = n // 2
    ang = -((m * m - m) * exact(p.omega) + 2 * m * (exact(p.theta) + exact(p.coin.eta)))
    if conjugate:
        ang = -ang
    return abs(p.coin.b) * phase(ang)


def verblunsky_skew(p: SkewParams, n: int, conjugate: bool = False) -> complex:
    """Skew-family coefficient at site n: even sites 2m carry
    ``b * phase(P_d(T^m(x)))``, odd sites vanish."""
    if n % 2:
        return 0.0 + 0.0j
    ang = torus.psi_lift(p.x, p.omega, n // 2)
    if conjugate:
        ang = -ang
    return p.b * phase(ang)


def rho(alpha: complex) -> float:
    """Complementary modulus sqrt(1 - |alpha|^2) of a coefficient."""
    mod = abs(alpha)
    if mod > 1.0 + _NORM_TOL:
        raise ValueError(f"|alpha| <= 1 required, got {mod!r}")
    return math.sqrt(max(0.0, 1.0 - mod * mod))


def theta_block(alpha: complex) -> np.ndarray:
    """2x2 block [[conj(alpha), rho], [rho, -alpha]]; unitary for |alpha| <= 1."""
    r = rho(alpha)
    return np.array([[np.conj(alpha), r], [r, -alpha]], dtype=np.complex128)


@dataclass(frozen=True)
class VerblunskySource:
    """Lazy map from integer sites to Verblunsky coefficients.

    ``overrides`` replaces the model value at finitely many sites (used for
    boundary cuts, where the override has modulus one and decouples the
    matrix).  Sources are immutable; ``with_overrides`` returns a new one.
    """

    kind: str
    alpha_fn: Callable[[int], complex]
    overrides: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "overrides", dict(self.overrides))
        for site, val in self.overrides.items():
            if abs(val) > 1.0 + _NORM_TOL:
                raise ValueError(f"override at site {site} has |alpha| > 1: {val!r}")

    def alpha(self, n: int) -> complex:
        ov = self.overrides.get(n)
        return complex(ov) if ov is not None else complex(self.alpha_fn(n))

    def rho(self, n: int) -> float:
        return rho(self.alpha(n))

    def with_overrides(self, extra: Mapping[int, complex]) -> "VerblunskySource":
        merged = dict(self.overrides)
        merged.update(extra)
        return VerblunskySource(self.kind, self.alpha_fn, merged)


def electric_source(p: WalkParams, conjugate: bool = False,
                    overrides: Optional[Mapping[int, complex]] = None) -> VerblunskySource:
    """Verblunsky source for the electric family."""
    return VerblunskySource(
        "electric", lambda n: verblunsky_electric(p, n, conjugate), overrides or {}
    )


def skew_source(p: SkewParams, conjugate: bool = False,
                overrides: Optional[Mapping[int, complex]] = None) -> VerblunskySource:
    """Verblunsky source for the skew-shift family."""
    return VerblunskySource(
        "skew", lambda n: verblunsky_skew(p, n, conjugate), overrides or {}
    )


def custom_source(values: Mapping[int, complex], default: complex = 0.0) -> VerblunskySource:
    """Source backed by an explicit site -> coefficient map."""
    table = {int(k): complex(v) for k, v in values.items()}
    for site, val in table.items():
        if abs(val) > 1.0 + _NORM_TOL:
            raise ValueError(f"|alpha| <= 1 required at site {site}, got {val!r}")
    dflt = complex(default)
    return VerblunskySource("custom-list", lambda n: table.get(n, dflt))
