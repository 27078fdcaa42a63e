"""CGMY parameterization, Lévy density, characteristic function and cumulants.

The log-return process X has Lévy density

    nu(x) = C exp(-G|x|) / |x|^(1+Y)   for x < 0
    nu(x) = C exp(-M x)  /  x^(1+Y)    for x > 0

and, for Y != 1,

    E[exp(iuX(t))] = exp{ t C Gamma(-Y) [(G+iu)^Y - G^Y + (M-iu)^Y - M^Y] }.

The asset price is S(t) = S0 exp((omega + r - q) t + X(t)) where omega makes
the discounted price a martingale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

__all__ = [
    "DomainError",
    "CgmyParams",
    "MarketSpec",
    "DESIGN_I",
    "DESIGN_II",
    "gamma_neg",
    "levy_density",
    "char_fn",
    "cumulants",
    "martingale_drift",
]


class DomainError(ValueError):
    """An operation was called outside the parameter region where it is defined."""


@dataclass(frozen=True)
class CgmyParams:
    C: float
    G: float
    M: float
    Y: float

    def __post_init__(self):
        for name in ("C", "G", "M", "Y"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.C <= 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.G < 0 or self.M < 0:
            raise ValueError(f"G and M must be nonnegative, got G={self.G}, M={self.M}")
        if not 0 < self.Y < 2:
            raise ValueError(f"Y must lie in (0, 2), got {self.Y}")

    @property
    def theta(self) -> float:
        """Brownian drift of the time-changed representation, (G - M)/2."""
        return 0.5 * (self.G - self.M)

    @property
    def theta_tilde(self) -> float:
        return 0.5 * (self.G + self.M)

    @property
    def finite_variation(self) -> bool:
        return self.Y < 1


DESIGN_I = CgmyParams(C=0.1, G=2.0, M=3.5, Y=0.45)
DESIGN_II = CgmyParams(C=0.1, G=2.0, M=3.5, Y=1.01)


@dataclass(frozen=True)
class MarketSpec:
    """Market data and monitoring grid ``0 = t_0 < t_1 < ... < t_n = T``."""

    r: float
    q: float
    S0: float
    T: float
    grid: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.S0 <= 0:
            raise ValueError(f"S0 must be positive, got {self.S0}")
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        grid = tuple(float(t) for t in self.grid) if self.grid else (0.0, float(self.T))
        object.__setattr__(self, "grid", grid)
        if len(grid) < 2:
            raise ValueError("grid needs at least two points")
        if grid[0] != 0.0 or grid[-1] != self.T:
            raise ValueError(f"grid must start at 0 and end at T={self.T}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly increasing")

    @classmethod
    def uniform(cls, r: float, q: float, S0: float, T: float, n: int = 1) -> "MarketSpec":
        """Equally spaced grid with ``n`` increments (``n=13`` is weekly over a quarter)."""
        if n < 1:
            raise ValueError(f"need at least one increment, got n={n}")
        grid = tuple(T * i / n for i in range(n)) + (T,)
        return cls(r=r, q=q, S0=S0, T=T, grid=grid)

    @property
    def n_steps(self) -> int:
        return len(self.grid) - 1

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.grid)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.times)


def gamma_neg(Y: float) -> float:
    """Gamma(-Y) for Y in (0,1) U (1,2), via Gamma(2-Y) / ((-Y)(1-Y))."""
    if Y == 1.0:
        raise DomainError("Gamma(-Y) has a pole at Y = 1")
    return gamma_fn(2.0 - Y) / ((-Y) * (1.0 - Y))


def levy_density(p: CgmyParams, x):
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise DomainError("the CGMY Lévy density has a non-integrable pole at x = 0")
    ax = np.abs(x)
    rate = np.where(x < 0, p.G, p.M)
    out = p.C * np.exp(-rate * ax) / ax ** (1.0 + p.Y)
    return out if out.ndim else float(out)


def _exponent(p: CgmyParams, t: float, u):
    u = np.asarray(u, dtype=complex)
    Y = p.Y
    return t * p.C * gamma_neg(Y) * (
        (p.G + 1j * u) ** Y - p.G**Y + (p.M - 1j * u) ** Y - p.M**Y
    )


def char_fn(p: CgmyParams, t: float, u):
    """Characteristic function E[exp(iuX(t))], principal branch powers."""
    if p.Y == 1.0:
        raise DomainError("characteristic function formula excludes Y = 1")
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    out = np.exp(_exponent(p, t, u))
    return out if out.ndim else complex(out)


def cumulants(p: CgmyParams, t: float) -> tuple[float, float]:
    """Mean and variance of X(t)."""
    Y = p.Y
    if Y == 1.0:
        raise DomainError("cumulant formulas exclude Y = 1")
    if p.G == 0 or p.M == 0:
        raise DomainError("cumulants diverge when a tempering parameter is 0")
    mean = t * p.C * gamma_fn(1.0 - Y) * (p.M ** (Y - 1.0) - p.G ** (Y - 1.0))
    var = t * p.C * gamma_fn(2.0 - Y) * (p.G ** (Y - 2.0) + p.M ** (Y - 2.0))
    return float(mean), float(var)


def martingale_drift(p: CgmyParams) -> float:
    """omega = -C Gamma(-Y) [(G+1)^Y - G^Y + (M-1)^Y - M^Y]."""
    Y = p.Y
    if Y == 1.0:
        raise DomainError("drift formula excludes Y = 1")
    if p.M < 1 or (p.M == 1 and Y > 1):
        raise DomainError(f"E[S(t)] is infinite for M={p.M}, Y={Y}")
    return float(
        -p.C * gamma_neg(Y) * ((p.G + 1.0) ** Y - p.G**Y + (p.M - 1.0) ** Y - p.M**Y)
    )
