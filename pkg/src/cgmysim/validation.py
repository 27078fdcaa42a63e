"""Statistical self-checks of the samplers, run by ``cgmysim validate``.

Each check returns a :class:`CheckResult`; a check passes when every
comparison it makes is inside its stated tolerance (4 standard errors for
moment matches, p >= 0.01 for two-sample Kolmogorov-Smirnov tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import dirichlet, engine, ggc
from .dirichlet import MeanFixedPointSpec
from .ggc import GgcIncrementSpec, TcdConfig, Variant
from .model import CgmyParams, cumulants
from .rngkit import RngStream

KS_LEVEL = 0.01
N_SIGMA = 4.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    skipped: bool = False

    def line(self) -> str:
        tag = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"{tag} {self.name}: {self.detail}"


def sample_moments(x: np.ndarray) -> tuple[float, float, float, float]:
    """Mean, variance and their standard errors (variance s.e. from the fourth central moment)."""
    n = x.size
    mean = float(x.mean())
    c = x - mean
    var = float(c.var(ddof=1))
    m4 = float(np.mean(c**4))
    return mean, var, math.sqrt(var / n), math.sqrt(max(m4 - var**2, 0.0) / n)


def moment_check(x: np.ndarray, mean: float, var: float) -> tuple[bool, str]:
    m, v, se_m, se_v = sample_moments(x)
    zm = (m - mean) / se_m
    zv = (v - var) / se_v
    ok = abs(zm) <= N_SIGMA and abs(zv) <= N_SIGMA
    return ok, f"mean {m:.6g} vs {mean:.6g} (z={zm:+.2f}), var {v:.6g} vs {var:.6g} (z={zv:+.2f})"


def fixed_point_samples(sampler: Callable[[RngStream, int], np.ndarray], spec: MeanFixedPointSpec,
                        seed: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Draws of ``D`` and, independently, of ``B R + (1 - B) D'`` with ``B ~ beta(1, tau)``."""
    d = sampler(RngStream(seed, 0), n)
    d2 = sampler(RngStream(seed, 1), n)
    b = RngStream(seed, 2).beta(1.0, spec.tau, size=n)
    r = spec.scale.sample(RngStream(seed, 3), n)
    return d, b * r + (1.0 - b) * d2


def _design_scale(p: CgmyParams, T: float, eps: float) -> dirichlet.ScaleLaw:
    dt = T / 13
    return GgcIncrementSpec.build(p, dt, ggc.l_min(p, dt, eps)).scale_law()


def check_cumulants(p, T, cfg, seed, n=None) -> CheckResult:
    """Exact sampler (10^6 draws) when Y < 1, otherwise series time change (10^5 draws)."""
    if n is None:
        n = 1_000_000 if p.Y < 1 else 100_000
    method = engine.Method.EXACT if p.Y < 1 else engine.Method.TCD
    label = "exact" if p.Y < 1 else "tcd-app"
    cfg = TcdConfig(cfg.eps, cfg.eps_tilde, cfg.L_override, Variant.SERIES)
    parts, ok = [], True
    for k, dt in enumerate((T, T / 13)):
        x = engine.sample_increments(p, dt, method, cfg, RngStream(seed, k), n)
        good, msg = moment_check(x, *cumulants(p, dt))
        ok &= good
        parts.append(f"dt={dt:.5g}: {msg}")
    return CheckResult("cumulants", ok, f"{label}, n={n}; " + "; ".join(parts))


def check_cross_method(p, T, cfg, seed, n=10_000) -> CheckResult:
    if not p.Y < 1:
        return CheckResult("ks-cross-method", True, "exact sampler needs Y < 1", skipped=True)
    fine = TcdConfig(eps=1e-6, eps_tilde=1e-6, variant=Variant.SERIES)
    a = engine.sample_increments(p, T, engine.Method.EXACT, fine, RngStream(seed, 10), n)
    b = engine.sample_increments(p, T, engine.Method.TCD, fine, RngStream(seed, 11), n)
    pv = stats.ks_2samp(a, b).pvalue
    return CheckResult("ks-cross-method", pv >= KS_LEVEL, f"exact vs tcd-app (eps=1e-6), n={n}, p={pv:.4f}")


def check_cftp_fixed_point(p, T, cfg, seed, n=10_000) -> CheckResult:
    scale = _design_scale(p, T, cfg.eps)
    out, ok = [], True
    cases = [("cftp", 0.5), ("series", 0.5), ("series", 3.7)]
    for k, (kind, tau) in enumerate(cases):
        spec = MeanFixedPointSpec(tau, scale)
        if kind == "cftp":
            def sampler(s, m, spec=spec):
                return dirichlet.sample_mean_cftp_many(spec, s, m)
        else:
            def sampler(s, m, spec=spec):
                return dirichlet.sample_mean_series_many(spec, 1e-8, s, m)[0]
        lhs, rhs = fixed_point_samples(sampler, spec, seed * 100 + k, n)
        pv = stats.ks_2samp(lhs, rhs).pvalue
        ok &= pv >= KS_LEVEL
        out.append(f"{kind} tau={tau} p={pv:.4f}")
    return CheckResult("cftp-fixed-point", ok, f"n={n}; " + ", ".join(out))


def check_series_tail(p, T, cfg, seed, n=100_000) -> CheckResult:
    c_q = 2.0 / (p.G * p.M)
    out, ok = [], True
    for k, tau in enumerate((0.5, 2.0)):
        resid = c_q * dirichlet.stick_residuals(tau, 10, RngStream(seed, 20 + k), n)
        for terms in (1, 5, 10):
            col = resid[:, terms - 1]
            expect = c_q * (tau / (1 + tau)) ** terms
            z = (col.mean() - expect) / (col.std(ddof=1) / math.sqrt(n))
            ok &= abs(z) <= N_SIGMA
            out.append(f"tau={tau},n={terms} z={z:+.2f}")
    return CheckResult("series-tail", ok, ", ".join(out))


def check_series_bound(p, T, cfg, seed, n=100_000) -> CheckResult:
    spec = MeanFixedPointSpec(0.5, _design_scale(p, T, cfg.eps))
    _, terms, resid = dirichlet.sample_mean_series_many(spec, cfg.eps_tilde, RngStream(seed, 30), n)
    bad = int(np.sum(resid >= cfg.eps_tilde))
    return CheckResult("series-bound", bad == 0,
                       f"{bad} of {n} residuals >= eps_tilde={cfg.eps_tilde:g}, mean terms {terms.mean():.2f}")


def lmin_grid_ok(p: CgmyParams, dt: float, eps: float) -> tuple[bool, str]:
    ct = ggc.c_tilde(p, dt)
    h = 0.5 * p.Y

    def summands(L):
        return ct**2 / ((1 - h) ** 2 * L ** (2 - p.Y)), ct / ((2 - h) * L ** (2 - h))

    L = ggc.l_min(p, dt, eps)
    cap = 0.5 * eps**2
    at = summands(L)
    below = summands(0.99 * L)
    ok = all(t <= cap * (1 + 1e-12) for t in at) and any(t > cap for t in below)
    return ok, f"dt={dt:.4g} eps={eps:g} L={L:.6g}"


def check_lmin_boundary(p, T, cfg, seed) -> CheckResult:
    out, ok = [], True
    for dt in (T, T / 13):
        for eps in (1e-2, 1e-4, 1e-6):
            good, msg = lmin_grid_ok(p, dt, eps)
            ok &= good
            if not good:
                out.append(msg)
    return CheckResult("lmin-boundary", ok, "all grid points satisfy the bound" if ok else "; ".join(out))


def check_epsilon_moments(p, T, cfg, seed) -> CheckResult:
    out, ok = [], True
    h = 0.5 * p.Y
    for dt in (T, T / 13):
        for eps in (1e-2, 1e-4):
            L = ggc.l_min(p, dt, eps)
            mu, s2 = ggc.epsilon_moments(p, dt, L)
            ct = ggc.c_tilde(p, dt)
            good = (
                mu <= eps
                and mu <= ct / ((1 - h) * L ** (1 - h))
                and s2 <= ct / ((2 - h) * L ** (2 - h))
                and mu**2 + s2 <= ggc.error_second_moment_bound(p, dt, L)
            )
            ok &= good
            out.append(f"dt={dt:.4g} eps={eps:g}: mu_L/eps={mu / eps:.3g}")
    return CheckResult("epsilon-moments", ok, ", ".join(out))


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "cumulants": check_cumulants,
    "ks-cross-method": check_cross_method,
    "cftp-fixed-point": check_cftp_fixed_point,
    "series-tail": check_series_tail,
    "series-bound": check_series_bound,
    "lmin-boundary": check_lmin_boundary,
    "epsilon-moments": check_epsilon_moments,
}


def run_checks(p: CgmyParams, T: float, cfg: TcdConfig, seed: int, only=None) -> list[CheckResult]:
    names = list(CHECKS) if not only else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown check(s): {', '.join(unknown)}; choose from {', '.join(CHECKS)}")
    return [CHECKS[name](p, T, cfg, seed) for name in names]
