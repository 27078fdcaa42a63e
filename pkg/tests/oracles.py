"""Reference values computed independently of the package (mpmath / scipy quadrature)."""

import math

import mpmath as mp
import numpy as np
from scipy import integrate, stats

mp.mp.dps = 30


def log_cf_mp(C, G, M, Y, t, u):
    """log E[exp(iuX(t))] in multiprecision, Gamma(-Y) evaluated directly."""
    u = mp.mpc(u)
    return t * C * mp.gamma(-Y) * ((G + 1j * u) ** Y - mp.mpf(G) ** Y + (M - 1j * u) ** Y - mp.mpf(M) ** Y)


def levy_moment_mp(C, G, M, Y, t, k):
    """t * int x^k nu(dx), which is finite for k >= 2 (and k = 1 when Y < 1)."""
    right = mp.quad(lambda x: x**k * C * mp.e ** (-M * x) / x ** (1 + Y), [0, 1, mp.inf])
    left = mp.quad(lambda x: (-x) ** k * C * mp.e ** (-G * x) / x ** (1 + Y), [0, 1, mp.inf])
    return t * (right + left)


def fourier_european(C, G, M, Y, r, q, S0, T, K):
    """(call, put) by Gil-Pelaez inversion of the risk-neutral log-price characteristic function."""
    scale = T * C * float(mp.gamma(-Y))

    def lcf(u):
        u = np.asarray(u, dtype=complex)
        return scale * ((G + 1j * u) ** Y - G**Y + (M - 1j * u) ** Y - M**Y)

    omega_T = -lcf(-1j).real  # E[exp(X_T)] exp(omega T) = 1
    drift = (r - q) * T + omega_T  # log-price measured from log(S0)
    k = math.log(K / S0)

    def phi(u):
        return np.exp(lcf(u) + 1j * u * drift)

    phi_mi = phi(-1j).real

    # Re[exp(-iuk) f(u) / (iu)] = (Im f(u) cos(ku) - Re f(u) sin(ku)) / u
    def oscillatory_integral(f):
        top = 1.0
        while abs(f(top)) / top > 1e-16:
            top *= 2.0
        head, _ = integrate.quad(
            lambda u: ((np.exp(-1j * u * k) * f(u)) / (1j * u)).real, 0.0, 1e-2, epsabs=1e-14, limit=200
        )
        cuts = np.geomspace(1e-2, top, 30)
        total = head
        for a, b in zip(cuts, cuts[1:]):
            total += integrate.quad(lambda u: f(u).imag / u, a, b, weight="cos", wvar=k, epsabs=1e-14, limit=400)[0]
            if k != 0:
                total -= integrate.quad(lambda u: f(u).real / u, a, b, weight="sin", wvar=k, epsabs=1e-14, limit=400)[0]
        return total

    P1 = 0.5 + oscillatory_integral(lambda u: phi(u - 1j) / phi_mi) / math.pi
    P2 = 0.5 + oscillatory_integral(phi) / math.pi
    call = S0 * math.exp(-q * T) * P1 - K * math.exp(-r * T) * P2
    put = call - S0 * math.exp(-q * T) + K * math.exp(-r * T)
    return call, put


def ggc_scale_moments(C, G, M, Y, dt, L, k):
    """E[R^k] for R = 1/((GM + theta_tilde^2 Rq)/2 + Z), Rq ~ betaprime(Y/2, 1/2), Z = L U^(2/Y).

    Computed as a double integral over the density of Rq and, after the
    substitution Z = L w^(2/Y), over w uniform on (0, 1).
    """
    tt2 = (0.5 * (G + M)) ** 2
    rq = stats.betaprime(0.5 * Y, 0.5)

    def inner(x):
        a = 0.5 * (G * M + tt2 * x)
        val, _ = integrate.quad(lambda w: (a + L * w ** (2.0 / Y)) ** (-k), 0.0, 1.0,
                                epsabs=0.0, epsrel=1e-12, limit=400)
        return val

    val, _ = integrate.quad(lambda w: inner(rq.ppf(w)), 0.0, 1.0, epsabs=0.0, epsrel=1e-11, limit=400)
    return val
