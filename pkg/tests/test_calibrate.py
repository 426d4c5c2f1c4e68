"""Tests for moment calibration and count prediction.

Slow pieces (full Newton solves at n=300) are shared through module-scoped
fixtures so the file stays under ~30s.
"""

import math

import numpy as np
import pytest

from convexchain.calibrate import (
    CalibrationError,
    CalibrationResult,
    CalibrationTarget,
    FreeEnergy,
    asymptotic_params,
    exact_calibrate,
    llt_supported,
    predicted_log_pnk,
)
from convexchain.gibbs import moments

# Exact log-counts, frozen from the big-integer table builder (independent
# of everything in calibrate.py): log p(n, n; k).
EXACT_LOG_P = {
    (30, 4): 13.892116, (30, 6): 18.082536, (30, 8): 19.578616,
    (60, 4): 17.956850, (60, 6): 25.032165, (60, 8): 29.825832,
}


@pytest.fixture(scope="module")
def res5():
    return exact_calibrate(CalibrationTarget(300, 300, 5))


@pytest.fixture(scope="module")
def res34():
    return exact_calibrate(CalibrationTarget(300, 300, 34))


def test_target_validation():
    with pytest.raises(ValueError):
        CalibrationTarget(0, 300, 5)
    with pytest.raises(ValueError):
        CalibrationTarget(300, 300, 0)
    with pytest.raises(ValueError):
        CalibrationTarget(300, -1, 5)
    t = CalibrationTarget(300, 300, 34)
    assert t.vertex_density() == pytest.approx(34 / (300 * 300) ** (1 / 3))


def test_asymptotic_small_k_is_closed_form():
    # Below the c-grid the closed-form triple applies verbatim.
    t = CalibrationTarget(10**6, 10**6, 20)
    b1, b2, lam = asymptotic_params(t)
    assert b1 == 20 / 10**6
    assert b2 == 20 / 10**6
    assert lam == 20**3 / 10**12


def test_asymptotic_inverts_c_in_dilute_regime():
    # k = 100 at n = 1e6 sits just above the closed-form cut; the c-curve
    # inversion must still reproduce lambda ~ k^3/(n1 n2) and beta1 ~ k/n1.
    t = CalibrationTarget(10**6, 10**6, 100)
    b1, b2, lam = asymptotic_params(t)
    assert abs(lam / 1e-6 - 1.0) < 0.20
    assert abs(b1 / 1e-4 - 1.0) < 0.01
    assert b1 == b2


def test_asymptotic_superdense_raises():
    # density 1.517 exceeds sup c = 3*pi^(-2/3) ~ 1.3986: no fugacity works.
    with pytest.raises(CalibrationError):
        asymptotic_params(CalibrationTarget(300, 300, 68))


def test_free_energy_gradient_matches_fd():
    fe = FreeEnergy(CalibrationTarget(300, 300, 34), 0.13343, 0.13343)
    h = 1e-6
    # Near the calibrated point the gradient is small (~6e-3) so FD noise
    # is at its worst; 1e-4 relative still holds.
    for v in (np.array([0.13343, 0.13343, -math.log(0.954444)]),
              np.array([0.09, 0.15, 0.4])):
        g = fe.gradient(v)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd = (fe.value(v + e) - fe.value(v - e)) / (2 * h)
            assert abs(g[i] - fd) / max(abs(fd), 1e-30) < 1e-4


def test_free_energy_hessian_matches_fd():
    fe = FreeEnergy(CalibrationTarget(300, 300, 34), 0.13343, 0.13343)
    v = np.array([0.13343, 0.13343, -math.log(0.954444)])
    H = fe.hessian(v)
    assert np.allclose(H, H.T)
    h = 2e-4
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd_row = (fe.gradient(v + e) - fe.gradient(v - e)) / (2 * h)
        rel = np.abs(H[i] - fd_row) / np.maximum(np.abs(fd_row), 1e-12)
        assert rel.max() < 1e-3


def test_small_k_calibration(res5):
    assert res5.converged
    assert max(abs(r) for r in res5.residuals) <= 1e-6
    # beta1 ~ k/n1 in the dilute regime, within 30%.
    assert abs(res5.beta1 / (5 / 300) - 1.0) < 0.30
    assert res5.fugacity < 0.05


def test_typical_density_fugacity_near_one(res34):
    assert res34.converged
    assert max(abs(r) for r in res34.residuals) <= 1e-6
    assert 0.9 <= res34.fugacity <= 1.1


def test_calibrated_params_reproduce_targets(res34):
    rep = moments(res34.params())
    assert abs(rep.EX1 / 300 - 1.0) < 1e-6
    assert abs(rep.EX2 / 300 - 1.0) < 1e-6
    assert abs(rep.EK / 34 - 1.0) < 1e-6


def test_high_density_feasible_target_converges():
    # Just below the vertex-capacity ceiling the solver still lands, via the
    # grid-top initializer (the asymptotic curve cannot bracket this density).
    res = exact_calibrate(CalibrationTarget(300, 300, 60))
    assert res.converged
    assert res.fugacity > 100.0


def test_infeasible_density_raises():
    with pytest.raises(CalibrationError, match="capacity"):
        exact_calibrate(CalibrationTarget(300, 300, 68))


def test_swap_symmetry():
    ra = exact_calibrate(CalibrationTarget(200, 500, 20))
    rb = exact_calibrate(CalibrationTarget(500, 200, 20))
    assert abs(ra.beta1 - rb.beta2) < 1e-9
    assert abs(ra.beta2 - rb.beta1) < 1e-9
    assert abs(ra.fugacity - rb.fugacity) / ra.fugacity < 1e-9


def test_square_target_is_isotropic(res34):
    assert abs(res34.beta1 - res34.beta2) < 1e-12


def test_fugacity_increases_with_k(res5, res34):
    lams = [res5.fugacity, res34.fugacity]
    for k in (48, 58):
        lams.append(exact_calibrate(CalibrationTarget(300, 300, k)).fugacity)
    assert all(a < b for a, b in zip(lams, lams[1:]))


def test_llt_supported_threshold():
    assert llt_supported(CalibrationTarget(300, 300, 15))
    assert not llt_supported(CalibrationTarget(300, 300, 5))
    assert llt_supported(CalibrationTarget(30, 30, 4))
    assert not llt_supported(CalibrationTarget(60, 60, 4))


def test_predicted_counts_match_exact_tables():
    rel = {}
    for (n, k), log_exact in EXACT_LOG_P.items():
        t = CalibrationTarget(n, n, k)
        r = exact_calibrate(t)
        assert r.converged
        p = predicted_log_pnk(t, r, with_llt=True)
        rel[(n, k)] = abs(p - log_exact) / log_exact
        # Without the lattice-point normal factor the prediction is off by
        # an O(log n) additive term; make sure the factor is load-bearing.
        p_bare = predicted_log_pnk(t, r, with_llt=False)
        assert abs(p_bare - log_exact) / log_exact > 0.25
    # Desk-scale accuracy: every case lands within 5% in log, far inside
    # the deliberately wide asymptotic bracket.
    assert max(rel.values()) < 0.05
    # The asymptotic claim: errors shrink from n=30 to n=60 in aggregate.
    r30 = [rel[(30, k)] for k in (4, 6, 8)]
    r60 = [rel[(60, k)] for k in (4, 6, 8)]
    assert max(r60) < max(r30)
    assert sum(r60) < sum(r30)
    # Per-k the trend holds wherever the errors are not already sub-percent.
    assert rel[(60, 6)] < rel[(30, 6)]
    assert rel[(60, 8)] < rel[(30, 8)]


def test_result_params_echo_calibration(res5):
    params = res5.params()
    assert params.fugacity == pytest.approx(res5.fugacity)
    ex, ey = params.energy(np.array([1]), np.array([0]))[0], 0.0
    assert ex == pytest.approx(res5.beta1)


def test_result_is_plain_record(res5):
    assert isinstance(res5, CalibrationResult)
    assert res5.iterations >= 1
    assert np.isfinite(res5.free_energy)
