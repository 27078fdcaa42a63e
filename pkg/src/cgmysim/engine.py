"""Sequential path sampling on a monitoring grid and Monte Carlo pricing.

Trial ``i`` of a run with seed ``seed`` draws from ``RngStream(seed, i)``
only, so sampled paths and price estimates are identical for any number of
worker threads.
"""

from __future__ import annotations

import enum
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import ggc, stable
from .ggc import TcdConfig
from .model import CgmyParams, DomainError, MarketSpec, martingale_drift
from .rngkit import RngStream, make_generator

__all__ = [
    "Method",
    "PayoffKind",
    "PayoffSpec",
    "PathSample",
    "PriceEstimate",
    "sample_path",
    "sample_increments",
    "simulate_log_paths",
    "asset_paths",
    "payoff",
    "payoff_values",
    "price",
    "price_many",
]

_JIT = dict(nogil=True, cache=True, error_model="numpy")


class Method(str, enum.Enum):
    EXACT = "exact"
    TCD = "tcd"


class PayoffKind(str, enum.Enum):
    EUROPEAN_CALL = "european"
    LOOKBACK_FLOAT_CALL = "lookback"
    BARRIER_UP_IN_CALL = "barrier"
    ASIAN_CALL = "asian"
    EUROPEAN_PUT = "european-put"
    ASIAN_PUT = "asian-put"


_STRIKELESS = {PayoffKind.LOOKBACK_FLOAT_CALL}


@dataclass(frozen=True)
class PayoffSpec:
    """Contract terms.

    The lookback payoff is ``(S(T) - max_i S(t_i))^+`` by default, which is
    identically zero because the maximum includes ``S(T)``; set
    ``lookback_min=True`` for the floating-strike form ``(S(T) - min_i S(t_i))^+``.
    """

    kind: PayoffKind
    strike: float | None = None
    barrier: float | None = None
    lookback_min: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", PayoffKind(self.kind))
        if self.kind not in _STRIKELESS and not (self.strike is not None and self.strike > 0):
            raise ValueError(f"{self.kind.value} payoff needs a positive strike")
        if self.kind is PayoffKind.BARRIER_UP_IN_CALL and not (self.barrier is not None and self.barrier > 0):
            raise ValueError("barrier payoff needs a positive barrier level")

    @property
    def path_dependent(self) -> bool:
        return self.kind not in (PayoffKind.EUROPEAN_CALL, PayoffKind.EUROPEAN_PUT)


@dataclass(frozen=True)
class PathSample:
    grid: np.ndarray
    x: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class PriceEstimate:
    mean: float
    stderr: float
    n_trials: int
    elapsed_seconds: float


@njit(**_JIT)
def _exact_path(rng, Y, G, M, lams, out):
    x = 0.0
    out[0] = 0.0
    for i in range(lams.size):
        x += stable._cgmy_increment(rng, Y, lams[i], G, M)
        out[i + 1] = x


@njit(**_JIT)
def _tcd_path(rng, theta, variant, parts, shapes, params, c_q, eps_tilde, rem_mu, rem_sd, out):
    x = 0.0
    out[0] = 0.0
    for i in range(parts.size):
        t = ggc.time_change_kernel(
            rng, variant, parts[i], shapes[i], params[i], c_q, eps_tilde, rem_mu[i], rem_sd[i]
        )
        x += theta * t + math.sqrt(t) * rng.standard_normal()
        out[i + 1] = x


def _path_runner(p: CgmyParams, increments: np.ndarray, method: Method, cfg: TcdConfig):
    """Bind per-step constants once; returns ``run(generator, out_row)``."""
    method = Method(method)
    if method is Method.EXACT:
        if not p.Y < 1:
            raise DomainError(f"exact sampler needs Y < 1, got Y={p.Y}")
        if not (p.G > 0 and p.M > 0):
            raise DomainError("exact sampler needs G > 0 and M > 0")
        lams = np.array([stable.stable_intensity(p, dt) for dt in increments])
        Y, G, M = p.Y, p.G, p.M

        def run(gen, out):
            _exact_path(gen, Y, G, M, lams, out)

        return run

    if not (p.G > 0 and p.M > 0):
        raise DomainError("time change decomposition needs G > 0 and M > 0")
    plans = [ggc.plan_increment(p, float(dt), cfg) for dt in increments]
    parts = np.array([pl.parts for pl in plans], dtype=np.int64)
    shapes = np.array([pl.part_shape for pl in plans])
    params = np.vstack([pl.spec.scale_law().array for pl in plans])
    rem_mu = np.array([pl.remainder_mean for pl in plans])
    rem_sd = np.array([pl.remainder_sd for pl in plans])
    c_q = 2.0 / (p.G * p.M)
    variant = int(cfg.variant)
    eps_tilde = float(cfg.eps_tilde)
    theta = p.theta

    def run(gen, out):
        _tcd_path(gen, theta, variant, parts, shapes, params, c_q, eps_tilde, rem_mu, rem_sd, out)

    return run


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("CGMY_SIM_THREADS", "1"))
    return max(1, int(threads))


def simulate_log_paths(
    p: CgmyParams,
    m: MarketSpec,
    method: Method,
    cfg: TcdConfig,
    n_trials: int,
    seed: int,
    threads: int | None = None,
) -> np.ndarray:
    """Log-return paths ``X(t_i)``, shape ``(n_trials, n_steps + 1)``; row ``i`` uses stream ``i``."""
    run = _path_runner(p, m.increments, method, cfg)
    out = np.empty((n_trials, m.n_steps + 1))

    def work(lo, hi):
        for i in range(lo, hi):
            run(make_generator(seed, i), out[i])

    threads = resolve_threads(threads)
    if threads == 1 or n_trials < 2 * threads:
        work(0, n_trials)
    else:
        chunk = max(64, n_trials // (8 * threads))
        bounds = [(lo, min(lo + chunk, n_trials)) for lo in range(0, n_trials, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for f in [pool.submit(work, lo, hi) for lo, hi in bounds]:
                f.result()
    return out


def asset_paths(p: CgmyParams, m: MarketSpec, x: np.ndarray) -> np.ndarray:
    omega = martingale_drift(p)
    return m.S0 * np.exp((omega + m.r - m.q) * m.times + x)


def sample_path(p: CgmyParams, m: MarketSpec, method: Method, cfg: TcdConfig, s: RngStream) -> PathSample:
    run = _path_runner(p, m.increments, method, cfg)
    x = np.empty(m.n_steps + 1)
    run(s.generator, x)
    return PathSample(grid=m.times, x=x, s=asset_paths(p, m, x))


@njit(**_JIT)
def _increment_fill(rng, theta, variant, parts, shape, params, c_q, eps_tilde, rem_mu, rem_sd, out):
    for i in range(out.size):
        t = ggc.time_change_kernel(rng, variant, parts, shape, params, c_q, eps_tilde, rem_mu, rem_sd)
        out[i] = theta * t + math.sqrt(t) * rng.standard_normal()


def sample_increments(
    p: CgmyParams, dt: float, method: Method, cfg: TcdConfig, s: RngStream, n: int
) -> np.ndarray:
    """``n`` i.i.d. increments ``X(dt)`` from a single stream."""
    if Method(method) is Method.EXACT:
        return stable.sample_cgmy_increments_exact(p, dt, s, n)
    if not (p.G > 0 and p.M > 0):
        raise DomainError("time change decomposition needs G > 0 and M > 0")
    plan = ggc.plan_increment(p, float(dt), cfg)
    out = np.empty(n)
    _increment_fill(s.generator, p.theta, *ggc.plan_args(plan), out)
    return out


def payoff_values(spec: PayoffSpec, s: np.ndarray) -> np.ndarray:
    """Undiscounted payoffs for asset paths ``s`` of shape ``(..., n_steps + 1)``."""
    s = np.asarray(s, dtype=float)
    last = s[..., -1]
    kind = spec.kind
    if kind is PayoffKind.EUROPEAN_CALL:
        return np.maximum(last - spec.strike, 0.0)
    if kind is PayoffKind.EUROPEAN_PUT:
        return np.maximum(spec.strike - last, 0.0)
    if kind is PayoffKind.ASIAN_CALL:
        return np.maximum(s.mean(axis=-1) - spec.strike, 0.0)
    if kind is PayoffKind.ASIAN_PUT:
        return np.maximum(spec.strike - s.mean(axis=-1), 0.0)
    if kind is PayoffKind.LOOKBACK_FLOAT_CALL:
        ref = s.min(axis=-1) if spec.lookback_min else s.max(axis=-1)
        return np.maximum(last - ref, 0.0)
    if kind is PayoffKind.BARRIER_UP_IN_CALL:
        hit = s.max(axis=-1) > spec.barrier
        return np.where(hit, np.maximum(last - spec.strike, 0.0), 0.0)
    raise ValueError(f"unknown payoff kind {kind!r}")


def payoff(spec: PayoffSpec, path: PathSample) -> float:
    return float(payoff_values(spec, path.s))


def _estimate(disc: np.ndarray, elapsed: float) -> PriceEstimate:
    n = disc.size
    return PriceEstimate(
        mean=float(disc.mean()),
        stderr=float(disc.std(ddof=1) / math.sqrt(n)),
        n_trials=n,
        elapsed_seconds=elapsed,
    )


def price_many(
    specs: list[PayoffSpec],
    p: CgmyParams,
    m: MarketSpec,
    method: Method,
    cfg: TcdConfig,
    n_trials: int,
    seed: int,
    threads: int | None = None,
) -> list[PriceEstimate]:
    """Price several contracts on one set of sampled paths.

    Each estimate equals what :func:`price` returns for that contract with
    the same seed; ``elapsed_seconds`` is the shared path-sampling time.
    """
    if n_trials < 2:
        raise ValueError(f"need at least 2 trials, got {n_trials}")
    t0 = time.perf_counter()
    x = simulate_log_paths(p, m, method, cfg, n_trials, seed, threads)
    elapsed = time.perf_counter() - t0
    s = asset_paths(p, m, x)
    disc = math.exp(-m.r * m.T)
    return [_estimate(disc * payoff_values(spec, s), elapsed) for spec in specs]


def price(
    spec: PayoffSpec,
    p: CgmyParams,
    m: MarketSpec,
    method: Method,
    cfg: TcdConfig,
    n_trials: int,
    seed: int,
    threads: int | None = None,
) -> PriceEstimate:
    """Monte Carlo price ``(1/I) sum_i exp(-rT) f(S^(i))``."""
    return price_many([spec], p, m, method, cfg, n_trials, seed, threads)[0]
