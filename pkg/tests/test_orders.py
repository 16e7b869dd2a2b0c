"""Order and type estimation on synthetic curves with known limits."""

import math

import numpy as np
import pytest

from growthlab.characteristics import GrowthCurve
from growthlab.orders import order_interval, pq_order, pq_type, ratio_sequence


def curve_from_log_values(radii, log_vals, kind="T0"):
    return GrowthCurve(kind, np.asarray(radii), np.asarray(log_vals), True, None)


def radii_grid(n=40, deep=12.0):
    ks = np.linspace(0.3, deep, n)
    return 1.0 - np.exp(-ks)  # L = -log(1-r) runs linearly up to `deep`


def test_exact_power_order():
    # log T = sigma * L + log c: the [1,1] ratio is sigma + log(c)/L and the
    # intercept extrapolation recovers sigma exactly
    r = radii_grid()
    L = -np.log1p(-r)
    sigma, logc = 1.25, -3.0
    curve = curve_from_log_values(r, sigma * L + logc)
    est = pq_order(curve, 1, 1)
    assert not est.infinite
    assert est.value == pytest.approx(sigma, abs=1e-9)
    # the raw final ratio is still visibly off, showing extrapolation matters
    _, y, _ = ratio_sequence(curve, 1, 1)
    assert abs(y[-1] - sigma) > 0.2


def test_liminf_limsup_of_oscillating_ratio():
    # enough cycles must fall inside the tail window for the envelope fit;
    # with fewer than four witnessed peaks the estimator falls back to a
    # plain fit by design
    r = radii_grid(n=400, deep=25.0)
    L = -np.log1p(-r)
    sigma, amp = 2.0, 0.4
    vals = (sigma + amp * np.cos(2.5 * L)) * L
    curve = curve_from_log_values(r, vals)
    lo, hi = order_interval(curve, 1, 1)
    assert not hi.fallback_plain_fit
    assert hi.value == pytest.approx(sigma + amp, abs=0.05)
    assert lo.value == pytest.approx(sigma - amp, abs=0.05)
    assert lo.value <= hi.value


def test_liminf_clamped_to_limsup_on_regular_curve():
    r = radii_grid()
    L = -np.log1p(-r)
    rng = np.random.default_rng(3)
    vals = 1.5 * L + 0.002 * rng.standard_normal(len(L))
    curve = curve_from_log_values(r, vals)
    lo, hi = order_interval(curve, 1, 1)
    assert lo.value <= hi.value
    assert hi.value == pytest.approx(1.5, abs=0.01)


def test_two_one_order_from_doubly_exponential_curve():
    # log T = c * exp(sigma L): the [2,1] ratio is sigma + log(c)/L
    r = radii_grid(deep=6.0)  # exp(sigma * 6) stays in double range
    L = -np.log1p(-r)
    sigma, c = 1.4, 0.05
    curve = curve_from_log_values(r, c * np.exp(sigma * L))
    est = pq_order(curve, 2, 1)
    assert not est.infinite
    assert est.value == pytest.approx(sigma, abs=1e-6)
    # measured at [1,1] the same curve diverges
    est11 = pq_order(curve, 1, 1)
    assert est11.infinite
    assert est11.value == math.inf


def test_two_two_order():
    # log T = (log(1/(1-r)))^mu: the [2,2] ratio tends to mu
    r = radii_grid(n=60, deep=30.0)
    L = -np.log1p(-r)
    mu = 2.5
    curve = curve_from_log_values(r, L**mu)
    est = pq_order(curve, 2, 2)
    assert not est.infinite
    assert est.value == pytest.approx(mu, abs=0.05)


def test_max_modulus_curve_uses_extra_log_level():
    # log M = (1-r)^{-sigma} = exp(sigma L): as an M-curve its [1,1] order is
    # sigma (numerator log_2^+ M), matching the T-order of the same function
    r = radii_grid(deep=6.0)
    L = -np.log1p(-r)
    sigma = 1.5
    m_curve = curve_from_log_values(r, np.exp(sigma * L), kind="M")
    est = pq_order(m_curve, 1, 1)
    assert est.value == pytest.approx(sigma, abs=1e-6)


def test_bounded_curve_has_zero_order():
    r = radii_grid()
    curve = curve_from_log_values(r, np.full(len(r), 2.0))
    est = pq_order(curve, 1, 1)
    assert not est.infinite
    assert est.value == pytest.approx(0.0, abs=1e-9)


def test_order_noise_robustness():
    r = radii_grid(n=80, deep=14.0)
    L = -np.log1p(-r)
    rng = np.random.default_rng(11)
    vals = 0.5 * L - 1.0 + 0.01 * rng.standard_normal(len(L)) * L
    curve = curve_from_log_values(r, vals)
    est = pq_order(curve, 1, 1)
    assert est.value == pytest.approx(0.5, abs=0.03)


def test_infinite_flag_requires_sustained_rise():
    # a flat ratio with one noisy jump must not be flagged divergent
    r = radii_grid(n=30)
    L = -np.log1p(-r)
    vals = 1.0 * L
    vals[17] *= 1.3
    curve = curve_from_log_values(r, vals)
    est = pq_order(curve, 1, 1)
    assert not est.infinite


def test_type_estimate_power_family():
    # T = tau * (1/(1-r))^rho: [1,1]-type at order rho is tau
    r = radii_grid()
    L = -np.log1p(-r)
    rho, tau = 1.25, 0.35
    curve = curve_from_log_values(r, rho * L + math.log(tau))
    t = pq_type(curve, rho, 1, 1)
    assert t.value == pytest.approx(tau, rel=1e-9)


def test_type_separates_same_order_curves():
    r = radii_grid()
    L = -np.log1p(-r)
    rho = 1.25
    t_small = pq_type(curve_from_log_values(r, rho * L + math.log(0.2)), rho)
    t_big = pq_type(curve_from_log_values(r, rho * L + math.log(0.8)), rho)
    assert t_small.value < t_big.value
    assert t_big.value / t_small.value == pytest.approx(4.0, rel=1e-6)


def test_type_huge_scale_stays_in_logs():
    # [2,1]-type of log T = tau * exp(rho L): numerator log_1^+ T = tau e^{rho L}
    # reaches e^{3000}; the log-domain route must not overflow
    r = radii_grid(deep=8.0)
    L = -np.log1p(-r)
    curve = curve_from_log_values(r, 2.0 * np.exp(1.5 * L))
    t = pq_type(curve, 1.5, 2, 1)
    assert t.log_value == pytest.approx(math.log(2.0), abs=1e-6)
    assert t.value == pytest.approx(2.0, rel=1e-6)


def test_ratio_sequence_masks_shallow_radii():
    r = np.array([0.05, 0.2, 0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999])
    L = -np.log1p(-r)
    curve = curve_from_log_values(r, 2.0 * L)
    # q = 2 denominators are negative for shallow radii; those points are
    # dropped, not poisoned
    est = pq_order(curve, 2, 2, n_tail=4)
    assert np.isfinite(est.value)


def test_estimator_input_validation():
    r = radii_grid(n=3)
    curve = curve_from_log_values(r, np.zeros(3))
    with pytest.raises(ValueError):
        pq_order(curve, 1, 1)
    with pytest.raises(ValueError):
        pq_order(curve_from_log_values(radii_grid(), np.zeros(40)), 0, 1)
    with pytest.raises(ValueError):
        pq_type(curve_from_log_values(radii_grid(), np.zeros(40)), -1.0)
