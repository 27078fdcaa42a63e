"""Exact sampling of exponentially tilted stable variates, and of CGMY increments for Y < 1.

For 0 < Y < 1 the CGMY process splits into two independent subordinators
with Lévy densities ``C exp(-Mx)/x^(1+Y)`` and ``C exp(-Gx)/x^(1+Y)``.  An
increment of the first over a step ``dt`` is distributed as
``lam^(1/Y) * S`` with ``lam = dt C Gamma(1-Y)/Y`` and ``S`` a unilateral
Y-stable variate tilted by ``exp(-M lam^(1/Y) x)``.  ``S`` is drawn with
Devroye's double-rejection algorithm, whose expected cost is bounded
uniformly over the parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import gamma as gamma_fn

from . import rngkit
from .model import CgmyParams, DomainError
from .rngkit import RngStream, SamplerError

__all__ = [
    "TiltedStableSpec",
    "zolotarev_A",
    "sample_tilted_stable",
    "sample_tilted_stable_many",
    "sample_cgmy_increment_exact",
    "sample_cgmy_increments_exact",
    "stable_intensity",
]

_JIT = dict(nogil=True, cache=True, error_model="numpy")
_INNER_CAP = 1_000_000
_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)


@dataclass(frozen=True)
class TiltedStableSpec:
    """Target ``lam^(1/Y) * S_{Y, tilt * lam^(1/Y)}``.

    The auxiliary constants of the double-rejection algorithm are derived
    properties so they can never go stale.
    """

    Y: float
    lam: float
    tilt: float

    def __post_init__(self):
        if not 0 < self.Y < 1:
            raise ValueError(f"tilted stable sampling needs 0 < Y < 1, got {self.Y}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not self.tilt >= 0:
            raise ValueError(f"tilt must be nonnegative, got {self.tilt}")

    @property
    def gamma(self) -> float:
        return self.tilt**self.Y * self.lam * self.Y * (1.0 - self.Y)

    @property
    def xi(self) -> float:
        return ((2.0 + _SQRT_HALF_PI) * math.sqrt(2.0 * self.gamma) + 1.0) / math.pi

    @property
    def psi(self) -> float:
        g = self.gamma
        return math.exp(-g * math.pi**2 / 8.0) * (2.0 + _SQRT_HALF_PI) * math.sqrt(g * math.pi) / math.pi

    @property
    def w1(self) -> float:
        g = self.gamma
        return self.xi * math.sqrt(math.pi / (2.0 * g)) if g > 0 else math.inf

    @property
    def w2(self) -> float:
        return 2.0 * self.psi * math.sqrt(math.pi)

    @property
    def w3(self) -> float:
        return self.xi * math.pi

    @property
    def b(self) -> float:
        return (1.0 - self.Y) / self.Y

    @property
    def mean(self) -> float:
        """E[X] = lam Y tilt^(Y-1); infinite when tilt = 0."""
        if self.tilt == 0:
            return math.inf
        return self.lam * self.Y * self.tilt ** (self.Y - 1.0)

    def laplace(self, s: float) -> float:
        """E[exp(-sX)] = exp(-lam [(tilt+s)^Y - tilt^Y])."""
        return math.exp(-self.lam * ((self.tilt + s) ** self.Y - self.tilt**self.Y))


def stable_intensity(p: CgmyParams, dt: float) -> float:
    """lam = dt C Gamma(1-Y)/Y for one leg of the difference representation."""
    return dt * p.C * gamma_fn(1.0 - p.Y) / p.Y


@njit(**_JIT)
def _sinc(x):
    if abs(x) < 1e-4:
        return 1.0 - x * x / 6.0
    return math.sin(x) / x


@njit(**_JIT)
def _zolotarev(u, Y):
    # sinc form keeps the u -> 0 limit exact
    if u >= math.pi:
        return math.inf
    s = _sinc(u)
    top = Y * math.log(Y * _sinc(Y * u)) + (1.0 - Y) * math.log((1.0 - Y) * _sinc((1.0 - Y) * u))
    return math.exp((top - math.log(s)) / (1.0 - Y))


@njit(**_JIT)
def _b_ratio(u, Y):
    # B(u)/B(0)
    return _sinc(u) / (_sinc(Y * u) ** Y * _sinc((1.0 - Y) * u) ** (1.0 - Y))


@njit(**_JIT)
def _tilted_stable(rng, Y, lam, tilt):
    """One draw of ``lam^(1/Y) S_{Y, tilt lam^(1/Y)}`` and the number of inner loops used."""
    pi = math.pi
    b = (1.0 - Y) / Y
    log_lam = math.log(lam)
    lam_y = tilt**Y * lam  # (tilt lam^(1/Y))^Y
    gam = lam_y * Y * (1.0 - Y)
    sg = math.sqrt(gam)
    xi = ((2.0 + _SQRT_HALF_PI) * math.sqrt(2.0 * gam) + 1.0) / pi
    psi = math.exp(-gam * pi * pi / 8.0) * (2.0 + _SQRT_HALF_PI) * math.sqrt(gam * pi) / pi
    w2 = 2.0 * psi * math.sqrt(pi)
    w3 = xi * pi
    if gam > 0.0:
        w1 = xi * math.sqrt(pi / (2.0 * gam))
        p1 = w1 / (w1 + w2)
    else:
        p1 = 1.0
    p3 = w3 / (w2 + w3)
    tilted = tilt > 0.0
    log_lam_d = math.log(tilt) + log_lam / Y if tilted else 0.0

    inner = 0
    while True:
        while True:
            inner += 1
            if inner > _INNER_CAP:
                raise SamplerError("double rejection exceeded 10^6 inner loops")
            V = rngkit.uniform(rng)
            Wp = rngkit.uniform(rng)
            if gam >= 1.0:
                if V < p1:
                    U = abs(rngkit.normal(rng)) / sg
                else:
                    U = pi * (1.0 - Wp * Wp)
            else:
                if V < p3:
                    U = pi * Wp
                else:
                    U = pi * (1.0 - Wp * Wp)
            Wt = rngkit.uniform(rng)
            if not U < pi:
                continue
            zeta = math.sqrt(_b_ratio(U, Y))
            if gam > 0.0:
                # z = phi / (phi - gam^(1/(2Y))) with phi = (sqrt(gam) + Y zeta)^(1/Y)
                z = -1.0 / math.expm1(-math.log1p(Y * zeta / sg) / Y)
            else:
                z = 1.0
            d = 0.0
            if gam >= 1.0:
                d += xi * math.exp(-0.5 * gam * U * U)
            if U > 0.0:
                d += psi / math.sqrt(pi - U)
            if gam < 1.0:
                d += xi
            log_rho = (
                math.log(pi)
                + lam_y * (1.0 / (zeta * zeta) - 1.0)
                + math.log(d)
                - math.log((1.0 + _SQRT_HALF_PI) * sg / zeta + z)
            )
            log_Z = math.log(Wt) + log_rho
            if log_Z <= 0.0:
                break

        a = _zolotarev(U, Y)
        if tilted:
            m = math.exp(Y * (math.log(b) + log_lam_d - math.log(a)))
        else:
            m = 0.0
        delta = math.sqrt(m * Y / a)
        a1 = delta * _SQRT_HALF_PI
        a2 = delta
        a3 = z / a
        s = a1 + a2 + a3
        Vp = rngkit.uniform(rng)
        Np = 0.0
        Ep = 0.0
        if Vp < a1 / s:
            Np = rngkit.normal(rng)
            X = m - delta * abs(Np)
        elif Vp < (a1 + a2) / s:
            X = m + delta * rngkit.uniform(rng)
        else:
            Ep = rngkit.exponential(rng)
            X = m + delta + Ep * a3
        E = -log_Z
        # X = 0 has probability zero; X^(-b) is undefined there
        if X <= 0.0:
            continue
        test = a * (X - m)
        if tilted:
            # lam_d (X^-b - m^-b), factored to avoid overflow for small Y
            test += math.exp(log_lam_d - b * math.log(m)) * ((m / X) ** b - 1.0)
        if X < m:
            test -= 0.5 * Np * Np
        elif X > m + delta:
            test -= Ep
        if test <= E:
            return math.exp(log_lam / Y - b * math.log(X)), inner


@njit(**_JIT)
def _tilted_stable_fill(rng, Y, lam, tilt, out, loops):
    for i in range(out.size):
        out[i], loops[i] = _tilted_stable(rng, Y, lam, tilt)


@njit(**_JIT)
def _cgmy_increment(rng, Y, lam, G, M):
    xp = _tilted_stable(rng, Y, lam, M)[0]
    xm = _tilted_stable(rng, Y, lam, G)[0]
    return xp - xm


@njit(**_JIT)
def _cgmy_increment_fill(rng, Y, lam, G, M, out):
    for i in range(out.size):
        out[i] = _cgmy_increment(rng, Y, lam, G, M)


def zolotarev_A(u: float, Y: float) -> float:
    """Zolotarev's function ``[sin(Yu)^Y sin((1-Y)u)^(1-Y) / sin(u)]^(1/(1-Y))`` on ``[0, pi]``."""
    if not 0 <= u <= math.pi:
        raise DomainError(f"Zolotarev function is defined on [0, pi], got u={u}")
    if not 0 < Y < 1:
        raise DomainError(f"need 0 < Y < 1, got {Y}")
    return float(_zolotarev(float(u), float(Y)))


def sample_tilted_stable(spec: TiltedStableSpec, s: RngStream) -> float:
    return float(_tilted_stable(s.generator, spec.Y, spec.lam, spec.tilt)[0])


def sample_tilted_stable_many(spec: TiltedStableSpec, s: RngStream, n: int, *, return_loops=False):
    """Draw ``n`` variates; optionally also return the inner-loop count of each draw."""
    out = np.empty(n)
    loops = np.empty(n, dtype=np.int64)
    _tilted_stable_fill(s.generator, spec.Y, spec.lam, spec.tilt, out, loops)
    return (out, loops) if return_loops else out


def _check_exact(p: CgmyParams):
    if not p.Y < 1:
        raise DomainError(f"exact sampler needs Y < 1 (finite variation), got Y={p.Y}")
    if not (p.G > 0 and p.M > 0):
        raise DomainError("exact sampler needs G > 0 and M > 0")


def sample_cgmy_increment_exact(p: CgmyParams, dt: float, s: RngStream) -> float:
    """X(dt) = X+(dt) - X-(dt), right leg tilted by M and left leg by G."""
    _check_exact(p)
    return float(_cgmy_increment(s.generator, p.Y, stable_intensity(p, dt), p.G, p.M))


def sample_cgmy_increments_exact(p: CgmyParams, dt: float, s: RngStream, n: int) -> np.ndarray:
    _check_exact(p)
    out = np.empty(n)
    _cgmy_increment_fill(s.generator, p.Y, stable_intensity(p, dt), p.G, p.M, out)
    return out
