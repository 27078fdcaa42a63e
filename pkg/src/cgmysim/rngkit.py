"""Reproducible random streams and the base variate generators.

Every stream is a :class:`numpy.random.Generator` over the counter-based
Philox bit generator, keyed by ``SeedSequence(seed, spawn_key=(stream_id,))``.
Monte Carlo trial ``i`` always uses ``stream_id = i``, so results depend on
``(seed, configuration)`` only and never on how trials are scheduled across
threads.

The scalar primitives below are numba-compiled and take the raw
``Generator``; the samplers in the other modules call them from inside their
own compiled loops. :class:`RngStream` exposes the same primitives to Python.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

__all__ = ["RngStream", "SamplerError"]

_JIT = dict(nogil=True, cache=True, error_model="numpy")


class SamplerError(RuntimeError):
    """A sampler exceeded its iteration cap, which signals a bug or a degenerate configuration."""


@njit(**_JIT)
def uniform(rng):
    # open interval: logs and reciprocals of U appear throughout the samplers
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


@njit(**_JIT)
def normal(rng):
    return rng.standard_normal()


@njit(**_JIT)
def exponential(rng):
    return -math.log(uniform(rng))


@njit(**_JIT)
def gamma(rng, shape):
    # Marsaglia-Tsang for shape >= 1; shape < 1 via G(a) = G(a+1) * U^(1/a)
    if shape >= 1.0:
        return rng.standard_gamma(shape)
    g = rng.standard_gamma(shape + 1.0)
    return g * math.exp(math.log(uniform(rng)) / shape)


@njit(**_JIT)
def beta1_split(rng, tau):
    """Return ``(B, 1 - B)`` for ``B ~ beta(1, tau)`` by inversion, ``B = 1 - U^(1/tau)``."""
    e = math.log(uniform(rng)) / tau
    return -math.expm1(e), math.exp(e)


@njit(**_JIT)
def beta(rng, a, b):
    if a == 1.0:
        return beta1_split(rng, b)[0]
    x = gamma(rng, a)
    y = gamma(rng, b)
    return x / (x + y)


@njit(**_JIT)
def _fill_uniform(rng, out):
    for i in range(out.size):
        out[i] = uniform(rng)


@njit(**_JIT)
def _fill_normal(rng, out):
    for i in range(out.size):
        out[i] = normal(rng)


@njit(**_JIT)
def _fill_exponential(rng, out):
    for i in range(out.size):
        out[i] = exponential(rng)


@njit(**_JIT)
def _fill_gamma(rng, shape, out):
    for i in range(out.size):
        out[i] = gamma(rng, shape)


@njit(**_JIT)
def _fill_beta(rng, a, b, out):
    for i in range(out.size):
        out[i] = beta(rng, a, b)


def make_generator(seed: int, stream_id: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(ss))


class RngStream:
    """Single-owner random stream identified by ``(seed, stream_id)``.

    Every draw method returns a float when ``size`` is None and a float64
    array otherwise.
    """

    __slots__ = ("seed", "stream_id", "generator")

    def __init__(self, seed: int, stream_id: int = 0):
        if not (0 <= int(seed) < 2**64 and 0 <= int(stream_id) < 2**64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.generator = make_generator(self.seed, self.stream_id)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)

    def _draw(self, fill, size, *args):
        n = 1 if size is None else int(np.prod(size))
        out = np.empty(n)
        fill(self.generator, *args, out)
        if size is None:
            return float(out[0])
        return out.reshape(size)

    def uniform(self, size=None):
        return self._draw(_fill_uniform, size)

    def normal(self, size=None):
        return self._draw(_fill_normal, size)

    def exponential(self, size=None):
        return self._draw(_fill_exponential, size)

    def gamma(self, shape: float, size=None):
        if not shape > 0:
            raise ValueError(f"gamma shape must be positive, got {shape}")
        return self._draw(_fill_gamma, size, float(shape))

    def beta(self, a: float, b: float, size=None):
        if not (a > 0 and b > 0):
            raise ValueError(f"beta parameters must be positive, got a={a}, b={b}")
        return self._draw(_fill_beta, size, float(a), float(b))
