"""Grand-canonical measure on multiplicity distributions.

Sites are the primitive vectors x with energy E(x) <= T (truncation).  Site
occupancies are independent; each follows the biased geometric law

    P[omega(x) = j]  propto  rho^j * lam^{1{j>0}},     rho = exp(-E(x)),

whose normalizer is Z_x = 1 + lam*rho/(1-rho).  Expected endpoint, vertex
count, the 3x3 covariance of (X1, X2, K), seeded sampling, and the
parallel-endpoint probability all live here.  Energies come in three flavors:
linear beta.x, Euclidean beta*|x|_2, and the mixed norm
beta*(|x|_1 + lam_ell*sqrt(2)*|x|_2).

Determinism contract: sampling derives one uniform per site from a counter
hash of (seed, site rank), so results are bit-identical for a given seed no
matter how the site loop is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import MultiplicityDistribution
from .specialfn import ZETA2, parallel_constant
from .tolerances import DEFAULT_TRUNCATION, PARALLEL_TRUNC_TOL

__all__ = [
    "EnergyModel",
    "GibbsParams",
    "MomentReport",
    "log_partition",
    "truncation_bound",
    "moments",
    "biased_geometric",
    "sample_omega",
    "parallel_probability",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class EnergyModel:
    """One of the three site-energy families, callable on scalars or arrays."""

    kind: str
    params: tuple[float, ...]

    @staticmethod
    def linear(beta1: float, beta2: float) -> "EnergyModel":
        if beta1 <= 0 or beta2 <= 0:
            raise ValueError("linear energy needs beta1, beta2 > 0")
        return EnergyModel("linear", (float(beta1), float(beta2)))

    @staticmethod
    def euclidean(beta: float) -> "EnergyModel":
        if beta <= 0:
            raise ValueError("euclidean energy needs beta > 0")
        return EnergyModel("euclidean", (float(beta),))

    @staticmethod
    def mixed(beta: float, lam_ell: float) -> "EnergyModel":
        if beta <= 0:
            raise ValueError("mixed energy needs beta > 0")
        if lam_ell <= -1.0 / _SQRT2:
            raise ValueError(
                f"mixed energy diverges for lam_ell <= -1/sqrt(2), got {lam_ell}"
            )
        return EnergyModel("mixed", (float(beta), float(lam_ell)))

    def __call__(self, x1, x2):
        if self.kind == "linear":
            b1, b2 = self.params
            return b1 * x1 + b2 * x2
        if self.kind == "euclidean":
            (b,) = self.params
            return b * np.hypot(x1, x2)
        b, le = self.params
        return b * ((x1 + x2) + le * _SQRT2 * np.hypot(x1, x2))

    def l1_rate_bounds(self) -> tuple[float, float]:
        """(alpha_lo, alpha_hi) with alpha_lo*|x|_1 <= E(x) <= alpha_hi*|x|_1.

        Uses |x|_1/sqrt(2) <= |x|_2 <= |x|_1 on the quadrant; for the mixed
        model the sqrt(2)*|x|_2 term therefore contributes between le*|x|_1
        and le*sqrt(2)*|x|_1 (order depending on the sign of le).
        """
        if self.kind == "linear":
            b1, b2 = self.params
            return min(b1, b2), max(b1, b2)
        if self.kind == "euclidean":
            (b,) = self.params
            return b / _SQRT2, b
        b, le = self.params
        return b * (1.0 + min(le, le * _SQRT2)), b * (1.0 + max(le, le * _SQRT2))


@dataclass(frozen=True)
class GibbsParams:
    energy: EnergyModel
    fugacity: float = 1.0
    truncation: float = DEFAULT_TRUNCATION

    def __post_init__(self):
        if self.fugacity <= 0:
            raise ValueError("fugacity must be positive")
        if self.truncation <= 0:
            raise ValueError("truncation must be positive")

    def per_site_truncation_bound(self) -> float:
        """lam * e^-T / (1 - e^-T): the omitted mass of any single site."""
        t = self.truncation
        return self.fugacity * math.exp(-t) / -math.expm1(-t)


@dataclass(frozen=True)
class MomentReport:
    EX1: float
    EX2: float
    EK: float
    covariance: np.ndarray  # 3x3, order (X1, X2, K)
    site_count: int
    truncation_bound: float


@lru_cache(maxsize=16)
def _site_arrays(energy: EnergyModel, truncation: float):
    """Primitive sites with E <= T as (x1, x2, energy) arrays, row-major in x1.

    Chunked gcd grid; the enumeration order is part of the sampling contract.
    """
    T = float(truncation)

    def top(along_x1: bool) -> int:
        hi = 1
        f = (lambda v: float(energy(v, 0))) if along_x1 else (lambda v: float(energy(0, v)))
        while f(hi) <= T:
            hi *= 2
            if hi > 1 << 26:
                raise ValueError("energy grows too slowly; site set unbounded")
        lo = hi // 2
        while lo < hi - 1:
            mid = (lo + hi) // 2
            if f(mid) <= T:
                lo = mid
            else:
                hi = mid
        return lo

    xmax, ymax = top(True), top(False)
    ys = np.arange(ymax + 1, dtype=np.int64)
    xs_parts, ys_parts, en_parts = [], [], []
    block = max(1, (1 << 22) // (ymax + 1))
    for x0 in range(0, xmax + 1, block):
        xs = np.arange(x0, min(x0 + block, xmax + 1), dtype=np.int64)
        g = np.gcd(xs[:, None], ys[None, :])
        mask = g == 1
        bx, by = np.nonzero(mask)
        x1 = xs[bx]
        x2 = ys[by]
        en = np.asarray(energy(x1.astype(float), x2.astype(float)), dtype=float)
        keep = en <= T
        xs_parts.append(x1[keep])
        ys_parts.append(x2[keep])
        en_parts.append(en[keep])
    x1 = np.concatenate(xs_parts)
    x2 = np.concatenate(ys_parts)
    en = np.concatenate(en_parts)
    for a in (x1, x2, en):
        a.setflags(write=False)
    return x1, x2, en


def truncation_bound(params: GibbsParams) -> float:
    """Rigorous upper bound on the log-partition mass lost to truncation.

    Omitted sites satisfy |x|_1 >= s0 = T/alpha_hi, and log(1+lam*rho/(1-rho))
    <= lam*rho/(1-e^-T); summing lam*e^{-alpha_lo*s}*(s+1) over s >= s0 (there
    are at most s+1 lattice points on each diagonal) gives the bound.
    """
    alpha_lo, alpha_hi = params.energy.l1_rate_bounds()
    T = params.truncation
    s0 = max(1, math.floor(T / alpha_hi))
    q = math.exp(-alpha_lo)
    # sum_{s >= s0} (s+1) q^s = q^s0 * ((s0+1)(1-q) + q) / (1-q)^2
    tail = q**s0 * ((s0 + 1) * (1 - q) + q) / (1 - q) ** 2
    return params.fugacity * tail / -math.expm1(-T)


def log_partition(params: GibbsParams) -> float:
    """Sum over truncated sites of log(1 + lam*rho/(1-rho)), rho = e^-E."""
    _, _, en = _site_arrays(params.energy, params.truncation)
    rho = np.exp(-en)
    lam = params.fugacity
    return float(np.sum(np.log1p(lam * rho / (1.0 - rho))))


@lru_cache(maxsize=2)
def _per_site_laws(params: GibbsParams):
    # cached because sampling loops hit the same params thousands of times
    x1, x2, en = _site_arrays(params.energy, params.truncation)
    rho = np.exp(-en)
    lam = params.fugacity
    denom = 1.0 - (1.0 - lam) * rho  # = (1-rho) * Z_x
    mean = lam * rho / ((1.0 - rho) * denom)
    second = lam * rho * (1.0 + rho) / ((1.0 - rho) ** 2 * denom)
    var = second - mean**2
    q = lam * rho / denom  # P[omega(x) > 0]
    for a in (rho, mean, var, q):
        a.setflags(write=False)
    return x1, x2, rho, mean, var, q


def moments(params: GibbsParams) -> MomentReport:
    """Exact truncated sums of the per-site moments; covariance of (X1,X2,K)."""
    x1, x2, _, mean, var, q = _per_site_laws(params)
    x1f = x1.astype(float)
    x2f = x2.astype(float)
    EX1 = float(np.sum(x1f * mean))
    EX2 = float(np.sum(x2f * mean))
    EK = float(np.sum(q))
    cov_k_pos = mean * (1.0 - q)  # Cov(omega, 1{omega>0}) per site
    gamma = np.empty((3, 3))
    gamma[0, 0] = np.sum(x1f * x1f * var)
    gamma[1, 1] = np.sum(x2f * x2f * var)
    gamma[0, 1] = gamma[1, 0] = np.sum(x1f * x2f * var)
    gamma[2, 2] = np.sum(q * (1.0 - q))
    gamma[0, 2] = gamma[2, 0] = np.sum(x1f * cov_k_pos)
    gamma[1, 2] = gamma[2, 1] = np.sum(x2f * cov_k_pos)
    gamma.setflags(write=False)
    return MomentReport(
        EX1=EX1,
        EX2=EX2,
        EK=EK,
        covariance=gamma,
        site_count=int(x1.size),
        truncation_bound=truncation_bound(params),
    )


def biased_geometric(rho: float, lam: float, rng: np.random.Generator) -> int:
    """One draw of the biased geometric law: P[0] = 1/Z_x, and conditionally on
    being positive the value is 1 + Geometric(1-rho)."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0,1), got {rho}")
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    u = rng.random()
    p0 = (1.0 - rho) / (1.0 - (1.0 - lam) * rho)
    if u < p0:
        return 0
    v = (u - p0) / (1.0 - p0)
    v = min(v, 1.0 - 1e-16)
    return 1 + int(math.log1p(-v) / math.log(rho))


# -- counter-based per-site uniforms (SplitMix64 finalizer) ------------------

_U64 = np.uint64
_MASK = _U64(0xFFFFFFFFFFFFFFFF)


def _mix(z):
    # SplitMix64 finalizer; relies on mod-2^64 wraparound, hence the errstate.
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
        return z ^ (z >> _U64(31))


def _site_uniforms(seed: int, n: int, stream: int = 0) -> np.ndarray:
    """Uniforms in [0,1) for site ranks 0..n-1, pure function of (seed, rank)."""
    ranks = np.arange(n, dtype=np.uint64)
    base = _U64((seed & 0xFFFFFFFFFFFFFFFF) ^ (stream * 0x9E3779B97F4A7C15 & 0xFFFFFFFFFFFFFFFF))
    with np.errstate(over="ignore"):
        z = _mix(base + _U64(0x9E3779B97F4A7C15)) + ranks * _U64(0x9E3779B97F4A7C15)
    return (_mix(z) >> _U64(11)).astype(float) * 2.0**-53


def sample_omega(params: GibbsParams, seed: int) -> MultiplicityDistribution:
    """Independent biased-geometric draw at every truncated site."""
    x1, x2, rho, _, _, q = _per_site_laws(params)
    u = _site_uniforms(seed, rho.size)
    hit = u >= 1.0 - q  # occupied iff the uniform lands in the top q-slice
    if not np.any(hit):
        return MultiplicityDistribution({})
    # conditional uniform within the occupied slice drives the tail draw
    v = (u[hit] - (1.0 - q[hit])) / q[hit]
    v = np.minimum(v, 1.0 - 1e-16)
    mult = 1 + np.floor(np.log1p(-v) / np.log(rho[hit])).astype(np.int64)
    support = {
        (int(a), int(b)): int(m)
        for a, b, m in zip(x1[hit], x2[hit], mult)
    }
    return MultiplicityDistribution(support)


def parallel_probability(beta: float, mode: str) -> float:
    """Probability that two independent one-step endpoint draws are parallel.

    exact_sum: (1-e^-beta)^4 * sum_{s>=2} phi(s) * (e^{-beta*s}/(1-e^{-beta*s}))^2
    over the strictly positive primitive directions grouped by coordinate sum s
    (there are phi(s) of them on each diagonal), truncated with error below
    PARALLEL_TRUNC_TOL.  asymptotic: beta^2*(log(1/beta)/zeta(2) - C) with C
    from parallel_constant().
    """
    if not 0.0 < beta <= 0.2:
        raise ValueError(f"beta must lie in (0, 0.2], got {beta}")
    if mode == "asymptotic":
        return beta**2 * (math.log(1.0 / beta) / ZETA2 - parallel_constant())
    if mode != "exact_sum":
        raise ValueError(f"unknown mode {mode!r}")
    if beta < 1e-4:
        raise ValueError("exact_sum refuses beta < 1e-4 (sieve length ~ 1/beta)")
    # tail: sum_{s>S} s*g(s)^2 <= sum s*e^{-2 beta s} analytically; S = 40/beta
    # leaves less than e^{-80}/beta^2-ish, far under the tolerance
    S = int(40.0 / beta) + 2
    phi = np.arange(S + 1, dtype=np.int64)
    for p in range(2, S + 1):
        if phi[p] == p:  # p prime
            phi[p::p] -= phi[p::p] // p
    s = np.arange(2, S + 1, dtype=float)
    g = np.exp(-beta * s) / -np.expm1(-beta * s)
    total = float(np.sum(phi[2:].astype(float) * g * g))
    # tail: phi(s) <= s and g(s)^2 <= e^{-2 beta s}/(1-e^{-2 beta})^2, so the
    # dropped part is under sum_{s>S} s r^s / (1-r)^2 with r = e^{-2 beta}
    r = math.exp(-2.0 * beta)
    tail = ((S + 2) * r ** (S + 1)) / (1 - r) ** 4
    if tail > PARALLEL_TRUNC_TOL * total:
        raise RuntimeError("parallel sum truncation bound violated")
    return (-math.expm1(-beta)) ** 4 * total
