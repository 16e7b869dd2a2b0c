"""Log-domain adaptive quadrature against scipy.integrate.quad oracles."""

import math

import numpy as np
import pytest
from scipy import integrate

from growthlab.quadrature import NEG_INF, log_quad, logsumexp_1d


def test_logsumexp_1d_matches_direct():
    a = np.array([-1.0, 0.5, 2.0, -30.0])
    assert logsumexp_1d(a) == pytest.approx(math.log(np.exp(a).sum()), rel=1e-14)
    assert logsumexp_1d(np.array([NEG_INF, NEG_INF])) == NEG_INF
    assert logsumexp_1d(np.array([1000.0, 999.0])) == pytest.approx(
        1000.0 + math.log1p(math.e**-1.0)
    )


def test_smooth_positive_integrand():
    # int_0^3 exp(sin x) dx, both routes in plain arithmetic
    want, _ = integrate.quad(lambda x: math.exp(math.sin(x)), 0.0, 3.0, epsabs=1e-13)
    res = log_quad(lambda x: np.sin(x), 0.0, 3.0, rel_tol=1e-11)
    assert res.converged
    assert res.value == pytest.approx(want, rel=1e-10)


def test_breakpoints_capture_narrow_spike():
    # Gaussian spike of width 1e-6 at an awkward interior point, seeded by a
    # geometric fan of panel edges the way the characteristic engine does;
    # without seeding the first panels would never sample it
    c, w = 0.3123456, 1e-6

    def log_f(x):
        return -(((x - c) / w) ** 2)

    fan = [c] + [c + s * w * 2.0**j for s in (-1, 1) for j in range(22)]
    bps = [p for p in fan if 0.0 < p < 1.0]
    res = log_quad(log_f, 0.0, 1.0, breakpoints=bps, rel_tol=1e-9)
    want = w * math.sqrt(math.pi)  # full Gaussian mass, tails are negligible
    assert res.converged
    assert res.value == pytest.approx(want, rel=1e-8)


def test_huge_scale_integrand_in_log_domain():
    # int_0^1 exp(1000 x) dx = (e^1000 - 1)/1000: value overflows doubles,
    # its log is computable exactly
    res = log_quad(lambda x: 1000.0 * x, 0.0, 1.0, rel_tol=1e-11)
    want = 1000.0 - math.log(1000.0)
    assert res.converged
    assert res.log_value == pytest.approx(want, abs=1e-9)


def test_tiny_scale_integrand_in_log_domain():
    # all mass at scale e^-5000: plain arithmetic would underflow to zero
    res = log_quad(lambda x: -5000.0 + np.cos(x), 0.0, 1.0, rel_tol=1e-11)
    want, _ = integrate.quad(lambda x: math.exp(math.cos(x)), 0.0, 1.0, epsabs=1e-13)
    assert res.converged
    assert res.log_value == pytest.approx(-5000.0 + math.log(want), rel=1e-12)


def test_zero_integrand():
    res = log_quad(lambda x: np.full_like(x, NEG_INF), 0.0, 1.0)
    assert res.converged
    assert res.log_value == NEG_INF
    assert res.value == 0.0


def test_log_singularity_at_endpoint():
    # int_0^1 log(1/x)^2 dx = 2 (integrable endpoint singularity of the log)
    def log_f(x):
        with np.errstate(divide="ignore"):
            return 2.0 * np.log(np.abs(np.log(x)))

    res = log_quad(log_f, 1e-300, 1.0, rel_tol=1e-9)
    assert res.value == pytest.approx(2.0, rel=1e-7)


def test_oscillatory_modulus():
    # int_0^{2pi} |sin(25 x)| dx = 4 * 25 * (2pi/(2pi)) ... = 100 * (2/25)?  use quad
    want, _ = integrate.quad(
        lambda x: abs(math.sin(25.0 * x)), 0.0, 2.0 * math.pi, limit=400, epsabs=1e-12
    )

    def log_f(x):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(np.sin(25.0 * x)))

    bps = [k * math.pi / 25.0 for k in range(1, 50)]
    res = log_quad(log_f, 0.0, 2.0 * math.pi, breakpoints=bps, rel_tol=1e-10)
    assert res.value == pytest.approx(want, rel=1e-9)


def test_budget_exhaustion_reports_not_converged():
    # pathological comb the budget cannot resolve
    def log_f(x):
        return -1.0e6 * np.abs(np.sin(1.0e5 * x))

    res = log_quad(log_f, 0.0, 1.0, rel_tol=1e-13, max_evals=900)
    assert not res.converged
    assert res.evals <= 900 + 15 * 64  # one generation of slack


def test_error_estimate_brackets_truth():
    res = log_quad(lambda x: np.cos(x), 0.0, 2.0, rel_tol=1e-10)
    want, _ = integrate.quad(lambda x: math.exp(math.cos(x)), 0.0, 2.0, epsabs=1e-13)
    err = math.exp(res.log_error)
    assert abs(res.value - want) <= max(err, 1e-9 * want)


def test_invalid_interval():
    from growthlab.quadrature import QuadratureError

    with pytest.raises(QuadratureError):
        log_quad(lambda x: x, 1.0, 0.0)
