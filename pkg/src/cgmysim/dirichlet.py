"""Sampling Dirichlet means ``D`` solving ``D = B Q + (1 - B) D`` in law, with ``B ~ beta(1, tau)``.

Two samplers are provided:

* :func:`sample_mean_cftp` is exact.  It is a double coupling-from-the-past
  scheme that needs the beta density ``h(x) = tau (1-x)^(tau-1)`` bounded
  below on ``[0, 1]``, which holds with ``c_h = tau`` for ``tau <= 1``, and
  a scale ``0 < Q <= c_Q``.
* :func:`sample_mean_series` truncates the stick-breaking series
  ``sum_i B_i prod_{j<i}(1 - B_j) Q_i`` once the remaining stick times
  ``c_Q`` drops below ``eps_tilde``, which bounds the truncation error
  pathwise.

Scale laws are passed to the compiled kernels as ``(kind, params)`` pairs;
see :class:`ScaleLaw`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import rngkit
from .rngkit import RngStream, SamplerError

__all__ = [
    "ScaleLaw",
    "MeanFixedPointSpec",
    "split_shapes",
    "sample_mean_cftp",
    "sample_mean_cftp_many",
    "sample_mean_series",
    "sample_mean_series_many",
    "stick_residuals",
]

_JIT = dict(nogil=True, cache=True, error_model="numpy")

SCALE_CONSTANT = 0
SCALE_TWO_POINT = 1
SCALE_GGC = 2

_CFTP_CAP = 10_000_000
_SERIES_CAP = 10_000_000
_TINY_GAP = 1e-30


@njit(**_JIT)
def draw_ggc_scale(rng, Y, L, gm, tt2, fixed_ratio):
    """R = 1 / ((GM + theta_tilde^2 Rq)/2 + Z), Rq = gamma(Y/2)/gamma(1/2), Z = L U^(2/Y)."""
    if fixed_ratio < 0.0:
        ratio = rngkit.gamma(rng, 0.5 * Y) / rngkit.gamma(rng, 0.5)
    else:
        ratio = fixed_ratio
    z = L * math.exp(2.0 / Y * math.log(rngkit.uniform(rng)))
    return 1.0 / (0.5 * (gm + tt2 * ratio) + z)


@njit(**_JIT)
def draw_scale(rng, kind, params):
    if kind == SCALE_GGC:
        return draw_ggc_scale(rng, params[0], params[1], params[2], params[3], params[4])
    if kind == SCALE_TWO_POINT:
        return params[0] if rngkit.uniform(rng) < 0.5 else params[1]
    return params[0]


@njit(**_JIT)
def _fill_scale(rng, kind, params, out):
    for i in range(out.size):
        out[i] = draw_scale(rng, kind, params)


@dataclass(frozen=True)
class ScaleLaw:
    """Law of the scale variable ``Q`` together with its upper bound ``c_Q``."""

    kind: int
    params: tuple
    bound: float

    @classmethod
    def constant(cls, q0: float) -> "ScaleLaw":
        if not q0 > 0:
            raise ValueError(f"scale must be positive, got {q0}")
        return cls(SCALE_CONSTANT, (float(q0),), float(q0))

    @classmethod
    def two_point(cls, lo: float, hi: float) -> "ScaleLaw":
        """``lo`` or ``hi`` with probability 1/2 each."""
        if not 0 < lo <= hi:
            raise ValueError(f"need 0 < lo <= hi, got {lo}, {hi}")
        return cls(SCALE_TWO_POINT, (float(lo), float(hi)), float(hi))

    @classmethod
    def ggc(cls, Y: float, L: float, gm: float, theta_tilde: float, fixed_ratio=None) -> "ScaleLaw":
        """Scale variable of the truncated CGMY time change, bounded by ``2/(GM)``.

        ``fixed_ratio`` replaces the gamma ratio by a constant (test hook).
        """
        if not gm > 0:
            raise ValueError("GGC scale law needs G*M > 0")
        fr = -1.0 if fixed_ratio is None else float(fixed_ratio)
        return cls(SCALE_GGC, (float(Y), float(L), float(gm), float(theta_tilde) ** 2, fr), 2.0 / gm)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.params + (0.0,) * (5 - len(self.params)), dtype=np.float64)

    def sample(self, s: RngStream, size: int) -> np.ndarray:
        out = np.empty(size)
        _fill_scale(s.generator, self.kind, self.array, out)
        return out


@dataclass(frozen=True)
class MeanFixedPointSpec:
    tau: float
    scale: ScaleLaw

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @property
    def c_Q(self) -> float:
        return self.scale.bound

    @property
    def c_h(self) -> float:
        """Lower bound of the beta(1, tau) density on [0, 1]; only exists for tau <= 1."""
        if self.tau > 1:
            raise ValueError(f"beta(1, tau) density is not bounded below for tau={self.tau} > 1")
        return self.tau


def split_shapes(tau: float) -> tuple[int, float]:
    """Split ``tau`` into ``J = floor(tau) + 1`` equal parts, each below 1."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    J = math.floor(tau) + 1
    return J, tau / J


@njit(**_JIT)
def _series(rng, tau, kind, params, c_q, eps_tilde):
    remaining = 1.0  # 1 - sum of stick weights so far
    value = 0.0
    n = 0
    while True:
        n += 1
        if n > _SERIES_CAP:
            raise SamplerError("series sampler exceeded 10^7 terms")
        b, one_minus_b = rngkit.beta1_split(rng, tau)
        value += remaining * b * draw_scale(rng, kind, params)
        remaining *= one_minus_b
        if c_q * remaining < eps_tilde:
            return value, n, c_q * remaining


@njit(**_JIT)
def _series_fill(rng, tau, kind, params, c_q, eps_tilde, values, terms, resid):
    for i in range(values.size):
        values[i], terms[i], resid[i] = _series(rng, tau, kind, params, c_q, eps_tilde)


@njit(**_JIT)
def _transition_density(x, d, q, tau):
    # density at x of (1-B) d + B q; -1 flags a degenerate gap (point mass at d)
    gap = q - d
    if abs(gap) < _TINY_GAP:
        return -1.0
    w = (x - d) / gap
    if w < 0.0:
        if w < -1e-12:
            return 0.0
        w = 0.0
    if w >= 1.0:
        if w > 1.0 + 1e-12:
            return 0.0
        return math.inf if tau < 1.0 else tau / abs(gap)
    return math.exp(math.log(tau) + (tau - 1.0) * math.log1p(-w)) / abs(gap)


@njit(**_JIT)
def _cftp(rng, tau, kind, params, c_q):
    c_h = tau
    coal = c_h / (2.0 * c_q)
    cap = 64
    qs = np.empty(cap)
    qps = np.empty(cap)
    k = 0
    # (a) walk back until the uniform component of the minorized kernel fires
    while True:
        u = rngkit.uniform(rng)
        q = draw_scale(rng, kind, params)
        qp = draw_scale(rng, kind, params)
        if u <= abs(q - qp) * coal:
            break
        if k == cap:
            if cap >= _CFTP_CAP:
                raise SamplerError("double CFTP backward search exceeded 10^7 steps")
            cap *= 2
            qs2 = np.empty(cap)
            qps2 = np.empty(cap)
            qs2[:k] = qs[:k]
            qps2[:k] = qps[:k]
            qs = qs2
            qps = qps2
        qs[k] = q
        qps[k] = qp
        k += 1
    # (b) coalesced state is uniform between the two scales
    d = min(q, qp) + u / coal
    # (c) replay the stored steps forward from the residual kernel
    thresh = c_h / c_q
    for idx in range(k - 1, -1, -1):
        q = qs[idx]
        qp = qps[idx]
        lo = min(q, qp)
        hi = max(q, qp)
        while True:
            up = rngkit.uniform(rng)
            target = q if rngkit.uniform(rng) < 0.5 else qp
            omb = rngkit.beta1_split(rng, tau)[1]
            x = target + omb * (d - target)
            if x < lo or x > hi:
                break
            # a component whose scale equals d is a point mass at d: it has
            # no density, and a proposal drawn from it is always kept
            if abs(target - d) < _TINY_GAP:
                break
            f1 = max(_transition_density(x, d, q, tau), 0.0)
            f2 = max(_transition_density(x, d, qp, tau), 0.0)
            if up * (f1 + f2) > thresh:
                break
        d = x
    return d, k + 1


@njit(**_JIT)
def _cftp_fill(rng, tau, kind, params, c_q, values, steps):
    for i in range(values.size):
        values[i], steps[i] = _cftp(rng, tau, kind, params, c_q)


def _cftp_args(spec: MeanFixedPointSpec):
    if spec.tau > 1:
        raise ValueError(f"double CFTP needs 0 < tau <= 1, got {spec.tau}; split the shape first")
    law = spec.scale
    if law.kind == SCALE_CONSTANT or (law.kind == SCALE_TWO_POINT and law.params[0] == law.params[1]):
        raise ValueError("double CFTP needs a non-degenerate scale law; Q = Q' surely never coalesces")
    return spec.tau, spec.scale.kind, spec.scale.array, spec.c_Q


def sample_mean_cftp(spec: MeanFixedPointSpec, s: RngStream) -> float:
    """One exact draw of the Dirichlet mean by double coupling from the past."""
    return float(_cftp(s.generator, *_cftp_args(spec))[0])


def sample_mean_cftp_many(spec: MeanFixedPointSpec, s: RngStream, n: int, *, return_steps=False):
    values = np.empty(n)
    steps = np.empty(n, dtype=np.int64)
    _cftp_fill(s.generator, *_cftp_args(spec), values, steps)
    return (values, steps) if return_steps else values


def _series_args(spec: MeanFixedPointSpec, eps_tilde: float):
    if not eps_tilde > 0:
        raise ValueError(f"eps_tilde must be positive, got {eps_tilde}")
    return spec.tau, spec.scale.kind, spec.scale.array, spec.c_Q, float(eps_tilde)


def sample_mean_series(spec: MeanFixedPointSpec, eps_tilde: float, s: RngStream) -> tuple[float, int]:
    """Truncated stick-breaking draw; returns the value and the number of terms used."""
    value, n, _ = _series(s.generator, *_series_args(spec, eps_tilde))
    return float(value), int(n)


def sample_mean_series_many(spec: MeanFixedPointSpec, eps_tilde: float, s: RngStream, n: int):
    """Vector version of :func:`sample_mean_series`.

    Returns ``(values, n_terms, residuals)`` where ``residuals`` holds the
    stopping-time tail bound ``c_Q (1 - sum B~_i)`` of each draw.
    """
    values = np.empty(n)
    terms = np.empty(n, dtype=np.int64)
    resid = np.empty(n)
    _series_fill(s.generator, *_series_args(spec, eps_tilde), values, terms, resid)
    return values, terms, resid


@njit(**_JIT)
def _stick_fill(rng, tau, out):
    for i in range(out.shape[0]):
        rem = 1.0
        for j in range(out.shape[1]):
            rem *= rngkit.beta1_split(rng, tau)[1]
            out[i, j] = rem


def stick_residuals(tau: float, n_terms: int, s: RngStream, size: int) -> np.ndarray:
    """Matrix of ``1 - sum_{i<=n} B~_i`` for ``n = 1..n_terms`` (columns), one row per replication."""
    out = np.empty((size, n_terms))
    _stick_fill(s.generator, float(tau), out)
    return out
