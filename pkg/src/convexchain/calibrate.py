"""Moment calibration for the grand-canonical line model.

Solves E[X1] = n1, E[X2] = n2, E[K] = k for (beta1, beta2, lambda) by damped
Newton iteration on the strictly convex free energy

    f(b1, b2, g) = b1*n1 + b2*n2 + g*k + log Z(b1, b2, e^-g),

whose gradient is the moment mismatch and whose Hessian is the covariance
matrix of (X1, X2, K).  The initializer inverts the limiting vertex-density
curve c in the fugacity (one-dimensional bracketed root) and applies the
closed-form rate relations; a small-k closed form covers densities below the
bracketing grid.

The Newton loop evaluates the free energy on a site list frozen at entry
(with a safety margin on the rates) so that f is smooth; if the iterate
leaves the margin the list is rebuilt and the loop continues.  Reported
residuals always come from a fresh `moments` call at the returned parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .gibbs import EnergyModel, GibbsParams, _site_arrays, log_partition, moments
from .specialfn import ZETA2, ZETA3, c_of_ell, polylog
from .tolerances import (
    CALIB_MAX_ITER,
    CALIB_RESIDUAL_TOL,
    CALIB_TARGET_TOL,
    DEFAULT_TRUNCATION,
)

__all__ = [
    "CalibrationError",
    "CalibrationTarget",
    "CalibrationResult",
    "asymptotic_params",
    "exact_calibrate",
    "FreeEnergy",
    "predicted_log_pnk",
    "llt_supported",
]

# fugacity grid for bracketing the c-inversion; c is evaluated lazily once
_LAM_LO, _LAM_HI = 1e-8, 1e4
_GRID_POINTS = 289  # 24 per decade over 12 decades
_c_grid_cache: tuple[np.ndarray, np.ndarray] | None = None


class CalibrationError(RuntimeError):
    """Raised when no admissible parameter triple can be located."""


@dataclass(frozen=True)
class CalibrationTarget:
    n1: int
    n2: int
    k: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1 or self.k < 1:
            raise ValueError(f"target must be positive, got {self}")

    def vertex_density(self) -> float:
        """k / (n1*n2)^(1/3), the quantity the curve c parametrizes."""
        return self.k / (self.n1 * self.n2) ** (1.0 / 3)


@dataclass(frozen=True)
class CalibrationResult:
    beta1: float
    beta2: float
    fugacity: float
    residuals: tuple[float, float, float]  # relative errors on (n1, n2, k)
    iterations: int
    free_energy: float
    converged: bool

    def params(self, truncation: float = DEFAULT_TRUNCATION) -> GibbsParams:
        return GibbsParams(
            EnergyModel.linear(self.beta1, self.beta2), self.fugacity, truncation
        )


def _u_of_fugacity(lam: float) -> float:
    """(zeta(3) - Li3(1-lam)) / zeta(2): the residue core of the rate relations."""
    w = 1.0 - lam
    core = ZETA3 - polylog(3.0, w) if w != 0.0 else ZETA3
    return core / ZETA2


def _rates_from_fugacity(lam: float, n1: int, n2: int) -> tuple[float, float]:
    # n1 = U/(b1^2 b2), n2 = U/(b1 b2^2)  =>  b1 = (U n2/n1^2)^(1/3), etc.
    U = _u_of_fugacity(lam)
    beta1 = (U * n2 / n1**2) ** (1.0 / 3)
    beta2 = (U * n1 / n2**2) ** (1.0 / 3)
    return beta1, beta2


def _c_grid() -> tuple[np.ndarray, np.ndarray]:
    global _c_grid_cache
    if _c_grid_cache is None:
        lams = np.geomspace(_LAM_LO, _LAM_HI, _GRID_POINTS)
        cs = np.array([c_of_ell(l) for l in lams])
        _c_grid_cache = (lams, cs)
    return _c_grid_cache


def _small_k_triple(target: CalibrationTarget) -> tuple[float, float, float]:
    n1, n2, k = target.n1, target.n2, target.k
    return k / n1, k / n2, k**3 / (n1 * n2)


def asymptotic_params(target: CalibrationTarget) -> tuple[float, float, float]:
    """Initializer triple (beta1, beta2, lambda) from the limiting relations.

    The fugacity solves c(lambda) = k/(n1*n2)^(1/3) on a bracketed interval
    of the geometric grid [1e-8, 1e4]; densities below the grid's reach use
    the small-k closed forms instead.  Densities above the grid's reach are
    an explicit failure (the limiting family tops out at 3*pi^(-2/3)).
    """
    ell_t = target.vertex_density()
    lams, cs = _c_grid()
    if ell_t < cs[0]:
        return _small_k_triple(target)
    sign = cs - ell_t
    idx = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    if idx.size == 0:
        raise CalibrationError(
            f"no bracketing interval for vertex density {ell_t:.6g}: "
            f"c spans [{cs.min():.6g}, {cs.max():.6g}] over lambda in "
            f"[{_LAM_LO:g}, {_LAM_HI:g}]"
        )
    i = int(idx[0])
    lam = brentq(lambda l: c_of_ell(l) - ell_t, lams[i], lams[i + 1], xtol=1e-14)
    beta1, beta2 = _rates_from_fugacity(lam, target.n1, target.n2)
    return beta1, beta2, lam


class FreeEnergy:
    """f(v) = b1*n1 + b2*n2 + g*k + log Z on a frozen site list, v = (b1,b2,g).

    The site list is every primitive vector whose linear energy at the margin
    rates (a fraction of the entry rates) stays below the truncation, so f is
    smooth as long as the iterate keeps b1, b2 above the margin.
    """

    MARGIN = 0.6

    def __init__(self, target: CalibrationTarget, beta1: float, beta2: float,
                 truncation: float = DEFAULT_TRUNCATION):
        self.target = target
        self.truncation = truncation
        self.margin1 = self.MARGIN * beta1
        self.margin2 = self.MARGIN * beta2
        x1, x2, _ = _site_arrays(
            EnergyModel.linear(self.margin1, self.margin2), truncation
        )
        self._x1 = x1.astype(float)
        self._x2 = x2.astype(float)

    def in_margin(self, v: np.ndarray) -> bool:
        return v[0] >= self.margin1 and v[1] >= self.margin2

    def _laws(self, v: np.ndarray):
        # Everything is expressed through a = g + E + log(1-rho), so that the
        # occupation probability q = lam*rho/(1-rho+lam*rho) = 1/(1+e^a) stays
        # finite for arbitrarily large fugacity (a -> -inf just saturates q=1).
        en = v[0] * self._x1 + v[1] * self._x2
        rho = np.exp(-en)
        a = v[2] + en + np.log1p(-rho)
        return rho, a

    def value(self, v: np.ndarray) -> float:
        t = self.target
        _, a = self._laws(v)
        logz = float(np.sum(np.logaddexp(0.0, -a)))  # sum log(1 + e^-a)
        return v[0] * t.n1 + v[1] * t.n2 + v[2] * t.k + logz

    def gradient(self, v: np.ndarray) -> np.ndarray:
        t = self.target
        rho, a = self._laws(v)
        q = expit(-a)  # stable 1/(1+e^a)
        mean = q / (1.0 - rho)
        return np.array([
            t.n1 - float(np.sum(self._x1 * mean)),
            t.n2 - float(np.sum(self._x2 * mean)),
            t.k - float(np.sum(q)),
        ])

    def hessian(self, v: np.ndarray) -> np.ndarray:
        rho, a = self._laws(v)
        q = expit(-a)
        mean = q / (1.0 - rho)
        var = q * (1.0 + rho) / (1.0 - rho) ** 2 - mean**2
        ck = mean * (1.0 - q)
        x1, x2 = self._x1, self._x2
        H = np.empty((3, 3))
        H[0, 0] = np.sum(x1 * x1 * var)
        H[1, 1] = np.sum(x2 * x2 * var)
        H[0, 1] = H[1, 0] = np.sum(x1 * x2 * var)
        H[2, 2] = np.sum(q * (1.0 - q))
        H[0, 2] = H[2, 0] = np.sum(x1 * ck)
        H[1, 2] = H[2, 1] = np.sum(x2 * ck)
        return H


def _initializer(target: CalibrationTarget) -> tuple[float, float, float]:
    try:
        return asymptotic_params(target)
    except CalibrationError:
        # density above the limiting family's reach: start from the grid top
        # (large fugacity, saturated small sites) and let Newton finish
        beta1, beta2 = _rates_from_fugacity(_LAM_HI, target.n1, target.n2)
        return beta1, beta2, _LAM_HI


def _result_at(target: CalibrationTarget, v: np.ndarray, iterations: int,
               truncation: float) -> CalibrationResult:
    beta1, beta2, lam = float(v[0]), float(v[1]), math.exp(-float(v[2]))
    params = GibbsParams(EnergyModel.linear(beta1, beta2), lam, truncation)
    rep = moments(params)
    residuals = (
        abs(rep.EX1 - target.n1) / target.n1,
        abs(rep.EX2 - target.n2) / target.n2,
        abs(rep.EK - target.k) / target.k,
    )
    free = (beta1 * target.n1 + beta2 * target.n2
            - math.log(lam) * target.k + log_partition(params))
    return CalibrationResult(
        beta1=beta1,
        beta2=beta2,
        fugacity=lam,
        residuals=residuals,
        iterations=iterations,
        free_energy=free,
        converged=max(residuals) <= CALIB_RESIDUAL_TOL,
    )


def exact_calibrate(target: CalibrationTarget,
                    trunc: float = DEFAULT_TRUNCATION) -> CalibrationResult:
    """Damped Newton on the free energy down to machine-level moment residuals.

    Accepted steps strictly decrease f (convexity makes that always possible
    for a short enough step); the loop aims for relative residuals near 1e-11
    so symmetry properties survive, and the success contract is 1e-6.  A
    numerically singular Hessian falls back to the small-k closed forms.
    """
    b1, b2, lam = _initializer(target)
    v = np.array([b1, b2, -math.log(lam)])
    scale = np.array([target.n1, target.n2, target.k], dtype=float)

    total_iters = 0
    for _rebuild in range(4):
        fe = FreeEnergy(target, v[0], v[1], trunc)
        fval = fe.value(v)
        while total_iters < CALIB_MAX_ITER:
            g = fe.gradient(v)
            if np.max(np.abs(g) / scale) <= CALIB_TARGET_TOL:
                return _result_at(target, v, total_iters, trunc)
            H = fe.hessian(v)
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                b1, b2, lam = _small_k_triple(target)
                w = np.array([b1, b2, -math.log(lam)])
                return _result_at(target, w, total_iters, trunc)
            total_iters += 1
            t = 1.0
            while True:
                cand = v + t * step
                if cand[0] > 0 and cand[1] > 0:
                    cval = fe.value(cand)
                    if cval < fval:
                        break
                t *= 0.5
                if t < 1e-12:
                    # no descent available: already at numerical optimum
                    return _result_at(target, v, total_iters, trunc)
            v, fval = cand, cval
            if v[2] < -700.0 or max(v[0], v[1]) > 1e8:
                # f is sinking along a recession direction: the moment system
                # has no solution.  This happens when k exceeds the capacity
                # ~3*pi^(-2/3)*(n1*n2)^(1/3) of lines with endpoint near (n1,n2).
                raise CalibrationError(
                    f"free energy unbounded below for {target}: vertex density "
                    f"{target.vertex_density():.4g} exceeds the feasible capacity "
                    f"(~{3.0 * math.pi ** (-2.0 / 3):.4g} at large n); "
                    "no calibrated parameters exist"
                )
            if not fe.in_margin(v):
                break  # rates left the frozen site list's validity; rebuild
        else:
            break
    return _result_at(target, v, total_iters, trunc)


def llt_supported(target: CalibrationTarget) -> bool:
    """Whether the local-limit prefactor is meaningful for this target
    (vertex count must grow with n; tiny k voids the Gaussian regime)."""
    return target.k > math.log(max(target.n1, target.n2))


def predicted_log_pnk(target: CalibrationTarget, result: CalibrationResult,
                      with_llt: bool = True) -> float:
    """log of the predicted line count:

        log Z + beta1*n1 + beta2*n2 - k*log(lambda)
              [+ log((2*pi)^(-3/2) * sqrt(k) / (n1*n2)) when with_llt]

    The prefactor is the local-limit point mass at the calibrated center.
    """
    params = result.params()
    base = (log_partition(params) + result.beta1 * target.n1
            + result.beta2 * target.n2 - target.k * math.log(result.fugacity))
    if with_llt:
        base += math.log(
            (2.0 * math.pi) ** (-1.5) * math.sqrt(target.k) / (target.n1 * target.n2)
        )
    return base
