"""Truncated time change of the CGMY process and its error budget.

The CGMY process is Brownian motion with drift ``theta = (G-M)/2`` run on an
independent subordinator ``T``.  For a truncation level ``L`` the increment
``T(t)`` splits into independent parts ``T_L(t) + eps_L(t)``:

* ``T_L(t)`` is a finite generalized gamma convolution with total shape
  ``tau = 2 C~ L^(Y/2) / Y``, ``C~ = t C 2^(Y/2-1) / Gamma(Y)``.  It equals
  ``gamma(tau) * D`` in law, where ``D`` is the Dirichlet mean of the scale
  variable ``R`` (see :mod:`cgmysim.dirichlet`).
* ``eps_L(t)`` is dropped.  Its second moment is at most
  ``C~^2 / ((1-Y/2)^2 L^(2-Y)) + C~ / ((2-Y/2) L^(2-Y/2))``, so choosing
  ``L = l_min(eps)`` gives ``E|eps_L(t)| <= eps``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit
from scipy import integrate, stats
from scipy.special import gamma as gamma_fn

from . import dirichlet, rngkit
from .dirichlet import SCALE_GGC, ScaleLaw, split_shapes
from .model import CgmyParams, DomainError
from .rngkit import RngStream

__all__ = [
    "Variant",
    "TcdConfig",
    "GgcIncrementSpec",
    "IncrementPlan",
    "ConvergenceError",
    "c_tilde",
    "compute_tau",
    "l_min",
    "l_for_tau",
    "error_second_moment_bound",
    "plan_increment",
    "sample_R",
    "sample_Z",
    "sample_time_change_increment",
    "sample_time_change_increments",
    "epsilon_moments",
]

_JIT = dict(nogil=True, cache=True, error_model="numpy")


class Variant(enum.IntEnum):
    CFTP = 0
    SERIES = 1


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TcdConfig:
    """Error budgets and sampler choice for time-change-decomposition sampling.

    ``eps`` bounds ``E|eps_L(t)|`` per increment, ``eps_tilde`` bounds the
    series truncation pathwise.  With ``gaussian_remainder`` the dropped term
    is replaced by a normal draw with its exact mean and variance, truncated
    at zero (diagnostic only).
    """

    eps: float = 1e-4
    eps_tilde: float = 1e-4
    L_override: float | None = None
    variant: Variant = Variant.SERIES
    gaussian_remainder: bool = False

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.eps_tilde > 0:
            raise ValueError(f"eps_tilde must be positive, got {self.eps_tilde}")
        if self.L_override is not None and not self.L_override > 0:
            raise ValueError(f"L_override must be positive, got {self.L_override}")
        object.__setattr__(self, "variant", Variant(self.variant))


def _check_tempered(p: CgmyParams):
    if not (p.G > 0 and p.M > 0):
        raise DomainError("time change decomposition needs G > 0 and M > 0")


def c_tilde(p: CgmyParams, dt: float) -> float:
    return dt * p.C * 2.0 ** (0.5 * p.Y - 1.0) / gamma_fn(p.Y)


def compute_tau(p: CgmyParams, dt: float, L: float) -> float:
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    return 2.0 * c_tilde(p, dt) * L ** (0.5 * p.Y) / p.Y


def l_for_tau(p: CgmyParams, dt: float, tau: float) -> float:
    """Truncation level at which the total shape equals ``tau``."""
    return (tau * p.Y / (2.0 * c_tilde(p, dt))) ** (2.0 / p.Y)


def error_second_moment_bound(p: CgmyParams, dt: float, L: float) -> float:
    ct = c_tilde(p, dt)
    h = 0.5 * p.Y
    return ct**2 / ((1.0 - h) ** 2 * L ** (2.0 - p.Y)) + ct / ((2.0 - h) * L ** (2.0 - h))


def l_min(p: CgmyParams, dt: float, eps: float) -> float:
    """Smallest ``L`` making both terms of the second-moment bound at most ``eps^2/2``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    ct = c_tilde(p, dt)
    h = 0.5 * p.Y
    first = (2.0 * ct**2 / (eps**2 * (1.0 - h) ** 2)) ** (1.0 / (2.0 - p.Y))
    second = (2.0 * ct / (eps**2 * (2.0 - h))) ** (1.0 / (2.0 - h))
    return max(first, second)


@dataclass(frozen=True)
class GgcIncrementSpec:
    Y: float
    L: float
    c_tilde: float
    theta: float
    theta_tilde: float
    gm_bound: float

    @classmethod
    def build(cls, p: CgmyParams, dt: float, L: float) -> "GgcIncrementSpec":
        _check_tempered(p)
        if not L > 0:
            raise ValueError(f"L must be positive, got {L}")
        return cls(p.Y, float(L), c_tilde(p, dt), p.theta, p.theta_tilde, 2.0 / (p.G * p.M))

    @property
    def tau(self) -> float:
        return 2.0 * self.c_tilde * self.L ** (0.5 * self.Y) / self.Y

    @property
    def gm(self) -> float:
        return 2.0 / self.gm_bound

    def scale_law(self, fixed_ratio=None) -> ScaleLaw:
        return ScaleLaw.ggc(self.Y, self.L, self.gm, self.theta_tilde, fixed_ratio)


@njit(**_JIT)
def _fill_z(rng, Y, L, out):
    for i in range(out.size):
        out[i] = L * math.exp(2.0 / Y * math.log(rngkit.uniform(rng)))


def sample_R(spec: GgcIncrementSpec, s: RngStream, size=None, *, mix_ratio=None):
    """Draws of the scale variable ``R``, all in ``(0, 2/(GM)]``.

    ``mix_ratio`` pins the gamma ratio ``gamma(Y/2)/gamma(1/2)`` to a constant.
    """
    out = spec.scale_law(mix_ratio).sample(s, 1 if size is None else size)
    return float(out[0]) if size is None else out


def sample_Z(spec: GgcIncrementSpec, s: RngStream, size: int) -> np.ndarray:
    """Draws of the truncated power variable with density ``(Y/2) L^(-Y/2) z^(Y/2-1)`` on ``[0, L]``."""
    out = np.empty(size)
    _fill_z(s.generator, spec.Y, spec.L, out)
    return out


@dataclass(frozen=True)
class IncrementPlan:
    """Everything the time-change kernel needs for one step size."""

    spec: GgcIncrementSpec
    parts: int
    part_shape: float
    variant: Variant
    eps_tilde: float
    remainder_mean: float = 0.0
    remainder_sd: float = 0.0

    @property
    def tau(self) -> float:
        return self.spec.tau

    @property
    def L(self) -> float:
        return self.spec.L


@lru_cache(maxsize=256)
def plan_increment(p: CgmyParams, dt: float, cfg: TcdConfig, force_parts: int | None = None) -> IncrementPlan:
    _check_tempered(p)
    L = cfg.L_override if cfg.L_override is not None else l_min(p, dt, cfg.eps)
    spec = GgcIncrementSpec.build(p, dt, L)
    if force_parts is None:
        J, tau_j = split_shapes(spec.tau)
    else:
        J, tau_j = int(force_parts), spec.tau / force_parts
    if cfg.variant == Variant.CFTP and tau_j > 1:
        raise ValueError(f"double CFTP needs part shapes <= 1, got {tau_j}")
    mu = sd = 0.0
    if cfg.gaussian_remainder:
        mu, var = epsilon_moments(p, dt, L)
        sd = math.sqrt(var)
    return IncrementPlan(spec, J, tau_j, cfg.variant, cfg.eps_tilde, mu, sd)


def plan_args(plan: IncrementPlan) -> tuple:
    """Flat argument tuple for :func:`time_change_kernel`."""
    return (
        int(plan.variant),
        plan.parts,
        plan.part_shape,
        plan.spec.scale_law().array,
        plan.spec.gm_bound,
        plan.eps_tilde,
        plan.remainder_mean,
        plan.remainder_sd,
    )


@njit(**_JIT)
def time_change_kernel(rng, variant, parts, part_shape, params, c_q, eps_tilde, rem_mu, rem_sd):
    total = 0.0
    for _ in range(parts):
        g = rngkit.gamma(rng, part_shape)
        if variant == 0:
            d = dirichlet._cftp(rng, part_shape, SCALE_GGC, params, c_q)[0]
        else:
            d = dirichlet._series(rng, part_shape, SCALE_GGC, params, c_q, eps_tilde)[0]
        total += g * d
    if rem_sd > 0.0:
        total += max(0.0, rem_mu + rem_sd * rngkit.normal(rng))
    return total


@njit(**_JIT)
def _time_change_fill(rng, variant, parts, part_shape, params, c_q, eps_tilde, rem_mu, rem_sd, out):
    for i in range(out.size):
        out[i] = time_change_kernel(rng, variant, parts, part_shape, params, c_q, eps_tilde, rem_mu, rem_sd)


def sample_time_change_increment(
    p: CgmyParams, dt: float, cfg: TcdConfig, s: RngStream, *, force_parts: int | None = None
) -> float:
    """One draw of the truncated time change ``T_L(dt)``.

    For ``tau > 1`` the shape is split into ``J = floor(tau) + 1`` equal
    parts and the result is ``sum_j gamma(tau/J)_j * D_j``.  ``force_parts``
    overrides ``J`` (test hook).
    """
    plan = plan_increment(p, float(dt), cfg, force_parts)
    return float(time_change_kernel(s.generator, *plan_args(plan)))


def sample_time_change_increments(
    p: CgmyParams, dt: float, cfg: TcdConfig, s: RngStream, n: int, *, force_parts: int | None = None
) -> np.ndarray:
    plan = plan_increment(p, float(dt), cfg, force_parts)
    out = np.empty(n)
    _time_change_fill(s.generator, *plan_args(plan), out)
    return out


def _remainder_integrands(Y: float, L: float):
    # z = L/v maps [L, inf) to (0, 1]; the v^(-Y/2) factor goes to quad's algebraic weight
    h = 0.5 * Y
    Lh = L**h

    def first(v, a):
        return Lh / (a * v + L)

    def second(v, a):
        return Lh * v / (a * v + L) ** 2

    return first, second, h


@lru_cache(maxsize=256)
def epsilon_moments(p: CgmyParams, dt: float, L: float, rtol: float = 1e-10) -> tuple[float, float]:
    """Mean and variance of the dropped remainder ``eps_L(dt)``, by nested quadrature.

    The outer expectation over the gamma ratio ``Rq ~ betaprime(Y/2, 1/2)``
    is taken on the probability scale, ``E f(Rq) = int_0^1 f(F^-1(w)) dw``.
    """
    _check_tempered(p)
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    ct = c_tilde(p, dt)
    gm = p.G * p.M
    tt2 = p.theta_tilde**2
    first, second, h = _remainder_integrands(p.Y, L)
    ratio_law = stats.betaprime(h, 0.5)

    def inner(fn, w):
        a = 0.5 * (gm + tt2 * ratio_law.ppf(w))
        val, _ = integrate.quad(fn, 0.0, 1.0, args=(a,), weight="alg", wvar=(-h, 0.0),
                                epsabs=0.0, epsrel=rtol * 0.1, limit=200)
        return val

    out = []
    for fn in (first, second):
        val, err = integrate.quad(lambda w: inner(fn, w), 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=200)
        if not (math.isfinite(val) and err <= max(1e3 * rtol * abs(val), 1e-300)):
            raise ConvergenceError(f"remainder moment quadrature reached only abs. error {err:.3g} on {val:.6g}")
        out.append(ct * val)
    return out[0], out[1]
