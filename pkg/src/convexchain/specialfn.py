"""Zeta / polylogarithm kernel and the asymptotic coefficient functions.

Two functions of the fugacity-like parameter ell drive every asymptotic
statement downstream:

    c(ell) = ell/(1-ell) * Li2(1-ell) / (zeta(2)^(1/3) * (zeta(3) - Li3(1-ell))^(2/3))
    e(ell) = 3*((zeta(3) - Li3(1-ell))/zeta(2))^(1/3) - log(ell)*c(ell)

The 0/0 shape of c at ell = 1 is removed by evaluating ell * (Li2(w)/w) with
w = 1 - ell through the ratio series sum w^(j-1)/j^2, which is
cancellation-free for every ell > 0, so no switchover branch is needed.

Li_s(z) for real z < 1 is computed by the defining series where it converges
comfortably (|z| <= 0.98) and by the integral representation

    Li_s(z) = (1/Gamma(s)) * int_0^inf z t^(s-1) / (e^t - z) dt

elsewhere (mandatory for z <= -1, where the series diverges).  Both routes are
kept as genuinely independent implementations and must agree on the overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .tolerances import (
    POLYLOG_QUAD_TOL,
    POLYLOG_SERIES_TOL,
    ZETA_ABS_TOL,
)

__all__ = [
    "zeta",
    "zeta_prime",
    "polylog",
    "ratio_li2",
    "c_of_ell",
    "e_of_ell",
    "residue_logZ",
    "parallel_constant",
    "AsymptoticProfile",
    "ZETA2",
    "ZETA3",
    "EULER_GAMMA",
]

# Bernoulli numbers B_2, B_4, B_6, B_8 for the Euler-Maclaurin tail
_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30)


def zeta(s: float) -> float:
    """Riemann zeta for real s > 1, Euler-Maclaurin accelerated.

    With N = 50 terms and four Bernoulli corrections the truncation error is
    below ZETA_ABS_TOL for every s > 1 (the first dropped term is of order
    |B_10|/10! * s..(s+8) * N^(-s-9) < 1e-17 already at s -> 1+).
    """
    if not s > 1:
        raise ValueError(f"zeta requires s > 1, got {s}")
    N = 50
    n = np.arange(1, N, dtype=float)
    total = float(np.sum(n**-s))
    # tail integral, midpoint correction, then Bernoulli terms
    total += N ** (1.0 - s) / (s - 1.0) + 0.5 * N**-s
    poch = s  # s*(s+1)*...*(s+2j-2), built incrementally
    fact = 1.0
    power = float(N) ** (-s - 1.0)
    for j, b in enumerate(_BERNOULLI, start=1):
        fact *= (2 * j - 1) * (2 * j)
        total += b / fact * poch * power
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        power /= N * N
    return total


def zeta_prime(s: float, n_terms: int = 200_000) -> float:
    """d/ds zeta(s) for real s > 1: partial sum of -log(n)/n^s plus the
    integral tail (log N + 1/(s-1)) * N^(1-s)/(s-1) and midpoint term.

    Absolute error ~ s*log(N)/N^(s+1), i.e. far below 1e-12 at the default N
    for every s >= 2 (only s = 2 is used downstream).
    """
    if not s > 1:
        raise ValueError(f"zeta_prime requires s > 1, got {s}")
    n = np.arange(1, n_terms + 1, dtype=float)
    partial = -float(np.sum(np.log(n) * n**-s))
    N = float(n_terms)
    tail = -(math.log(N) / (s - 1.0) + 1.0 / (s - 1.0) ** 2) * N ** (1.0 - s)
    midpoint = 0.5 * math.log(N) * N**-s
    return partial + tail + midpoint


ZETA2 = zeta(2.0)
ZETA3 = zeta(3.0)
EULER_GAMMA = float(np.euler_gamma)


def _polylog_series(s: float, z: float) -> float:
    if abs(z) >= 1:
        raise ValueError("series route needs |z| < 1")
    if z == 0.0:
        return 0.0
    # tail bound: sum_{j>N} |z|^j / j^s <= |z|^(N+1) / ((N+1)^s (1-|z|))
    az = abs(z)
    N = 16
    while az ** (N + 1) / ((N + 1) ** s * (1 - az)) > POLYLOG_SERIES_TOL:
        N *= 2
        if N > 1_000_000:  # unreachable for az <= 0.98
            raise RuntimeError("series will not meet its tail bound")
    j = np.arange(1, N + 1, dtype=float)
    return float(np.sum(z**j / j**s))


def _polylog_integral(s: float, z: float) -> float:
    """(1/Gamma(s)) int_0^inf z t^(s-1)/(e^t - z) dt, valid for all real z < 1.

    For z < 0 the integrand is rewritten as -t^(s-1)/(e^t/|z| + 1) so that huge
    |z| never overflows; the upper limit log|z| + 45 leaves a tail below
    e^-45 * polynomial.  For s < 1 the t^(s-1) endpoint singularity is removed
    by substituting t = u^(1/s) on [0,1].
    """
    if z >= 1:
        raise ValueError("polylog needs z < 1")
    if z == 0.0:
        return 0.0
    gamma_s = math.gamma(s)
    if z < 0:
        L = math.log(-z)

        def smooth(t):  # integrand = t^(s-1) * smooth(t)
            return -1.0 / (math.exp(min(t - L, 700.0)) + 1.0)

    else:

        def smooth(t):
            return z / (math.exp(min(t, 700.0)) - z)

    def f(t):
        return t ** (s - 1.0) * smooth(t)

    upper = max(math.log(abs(z)) if abs(z) > 1 else 0.0, 0.0) + 45.0
    # breakpoints catch the z->1 boundary layer near t = 0 and the shoulder
    # at t ~ log|z| for large negative z
    pts = sorted({1e-6, 1e-3, 0.1, 1.0, min(upper - 1.0, max(1.0, upper - 45.0) + 1.0)})
    if s >= 1:
        val, _ = integrate.quad(f, 0.0, upper, epsabs=POLYLOG_QUAD_TOL,
                                epsrel=1e-12, limit=300, points=pts)
    else:
        # t = u^(1/s) on [0,1]: t^(s-1) dt = du/s exactly, so the endpoint
        # singularity cancels instead of being chased adaptively
        g = lambda u: smooth(u ** (1.0 / s)) / s
        head, _ = integrate.quad(g, 0.0, 1.0, epsabs=POLYLOG_QUAD_TOL,
                                 epsrel=1e-12, limit=300)
        body, _ = integrate.quad(f, 1.0, upper, epsabs=POLYLOG_QUAD_TOL,
                                 epsrel=1e-12, limit=300)
        val = head + body
    return val / gamma_s


def polylog(s: float, z: float, method: str = "auto") -> float:
    """Li_s(z) for real z < 1 and s > 0.

    method picks the route explicitly ("series" / "integral") for the
    dual-route agreement checks; "auto" uses the series for |z| <= 0.98 and
    the integral elsewhere.  s = 1 short-circuits to -log(1-z).
    """
    if not s > 0:
        raise ValueError(f"polylog requires s > 0, got {s}")
    if not z < 1:
        raise ValueError(f"polylog requires z < 1, got {z}")
    if method == "series":
        return _polylog_series(s, z)
    if method == "integral":
        return _polylog_integral(s, z)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if s == 1.0:
        return -math.log1p(-z)
    if abs(z) <= 0.98:
        return _polylog_series(s, z)
    return _polylog_integral(s, z)


def ratio_li2(w: float) -> float:
    """Li2(w)/w extended continuously by 1 at w = 0 (series sum w^(j-1)/j^2)."""
    if w == 0.0:
        return 1.0
    if abs(w) <= 0.98:
        az = abs(w)
        N = 16
        while az ** (N + 1) / ((N + 1) ** 2 * (1 - az)) > POLYLOG_SERIES_TOL * az:
            N *= 2
        j = np.arange(1, N + 1, dtype=float)
        return float(np.sum(w ** (j - 1) / j**2))
    return polylog(2.0, w) / w


def c_of_ell(ell: float) -> float:
    """Coefficient of (n1*n2)^(1/3) in the typical vertex count, as a function
    of the fugacity ell; c(1) = (zeta(2)*zeta(3)^2)^(-1/3) ~ 0.749."""
    if not ell > 0:
        raise ValueError(f"c_of_ell requires ell > 0, got {ell}")
    w = 1.0 - ell
    # ell/(1-ell)*Li2(1-ell) == ell * (Li2(w)/w), finite and smooth through ell = 1
    numerator = ell * ratio_li2(w)
    core = ZETA3 - polylog(3.0, w) if w != 0.0 else ZETA3
    return numerator / (ZETA2 ** (1.0 / 3) * core ** (2.0 / 3))


def e_of_ell(ell: float) -> float:
    """Coefficient of (n1*n2)^(1/3) in log p(n;k) along the calibrated family;
    e(1) = 3*(zeta(3)/zeta(2))^(1/3) ~ 2.702, and ell = 1 is the maximum."""
    if not ell > 0:
        raise ValueError(f"e_of_ell requires ell > 0, got {ell}")
    w = 1.0 - ell
    core = ZETA3 - polylog(3.0, w) if w != 0.0 else ZETA3
    return 3.0 * (core / ZETA2) ** (1.0 / 3) - math.log(ell) * c_of_ell(ell)


def residue_logZ(beta1: float, beta2: float, lam: float) -> float:
    """Leading term of the log partition function for the linear-energy model:
    (zeta(3) - Li3(1-lam)) / (zeta(2) * beta1 * beta2)."""
    if beta1 <= 0 or beta2 <= 0 or lam <= 0:
        raise ValueError("residue_logZ requires positive beta1, beta2, lam")
    w = 1.0 - lam
    core = ZETA3 - polylog(3.0, w) if w != 0.0 else ZETA3
    return core / (ZETA2 * beta1 * beta2)


def parallel_constant() -> float:
    """The constant C in the two-term law beta^2*(log(1/beta)/zeta(2) - C) for
    the probability that two independent endpoint draws are parallel.

    From the Laurent expansion at s = 2 of Gamma(s)*(zeta(s-1)-zeta(s))^2 /
    zeta(s) (double pole: zeta(s-1) ~ 1/(s-2) + gamma):

        C = (2*zeta(2) - 1 - euler_gamma + zeta'(2)/zeta(2)) / zeta(2)

    computed from the zeta values at runtime, never from a frozen decimal.
    """
    return (2.0 * ZETA2 - 1.0 - EULER_GAMMA + zeta_prime(2.0) / ZETA2) / ZETA2


@dataclass(frozen=True)
class AsymptoticProfile:
    """(ell, c(ell), e(ell)) bundle for table emission."""

    ell: float
    c_value: float
    e_value: float

    @classmethod
    def at(cls, ell: float) -> "AsymptoticProfile":
        return cls(ell=ell, c_value=c_of_ell(ell), e_value=e_of_ell(ell))
