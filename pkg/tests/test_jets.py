"""Truncated Taylor arithmetic checked against closed forms and finite differences."""

import cmath
import math

import numpy as np
import pytest

from growthlab.jets import Jet, compose


def plain(j: Jet) -> np.ndarray:
    return j.plain()


def test_affine_and_constant():
    j = Jet.affine(2.0 + 1.0j, 3.0, 4)
    c = plain(j)
    assert c[0] == 2.0 + 1.0j and c[1] == 3.0 and np.all(c[2:] == 0)
    k = Jet.constant(5.0, 3)
    assert plain(k)[0] == 5.0 and np.all(plain(k)[1:] == 0)


def test_mul_matches_polynomial_product():
    a = Jet(np.array([1.0, 2.0, 3.0], dtype=complex))
    b = Jet(np.array([4.0, 5.0, 6.0], dtype=complex))
    got = plain(a * b)
    want = np.polynomial.polynomial.polymul([1, 2, 3], [4, 5, 6])[:3]
    assert np.allclose(got, want)


def test_reciprocal_and_division():
    x = Jet.affine(2.0, 1.0, 8)
    r = x.reciprocal()
    # 1/(2+h) Taylor coefficients: (-1)^k / 2^{k+1}
    want = np.array([(-1.0) ** k / 2.0 ** (k + 1) for k in range(9)])
    assert np.allclose(plain(r), want, atol=1e-15)
    one = plain(x * r)
    assert np.allclose(one, np.eye(9)[0], atol=1e-14)
    q = (x * x) / x
    assert np.allclose(plain(q), plain(x), atol=1e-14)


def test_exp_log_inverse_pair():
    g = Jet(np.array([0.3 + 0.2j, 1.0, -0.5, 0.25], dtype=complex))
    assert np.allclose(plain(g.exp().log()), plain(g), atol=1e-14)
    # exp matches the series of e^{c0} * e^{c1 h + ...}
    e = g.exp()
    w = cmath.exp(0.3 + 0.2j)
    assert abs(e.value0().to_complex() - w) < 1e-14 * abs(w)


def test_pow_real_against_exp_log():
    b = Jet(np.array([1.5, 0.7, -0.2, 0.1], dtype=complex))
    for a in (0.5, -1.5, 2.0, math.pi):
        direct = b.pow_real(a)
        via_log = (b.log() * a).exp()
        assert np.allclose(plain(direct), plain(via_log), atol=1e-13)


def test_sqrt_squares_back():
    b = Jet(np.array([4.0, 1.0, 0.25], dtype=complex))
    s = b.sqrt()
    assert np.allclose(plain(s * s), plain(b), atol=1e-14)


def test_offset_keeps_huge_magnitudes_representable():
    # coefficients of size e^900 overflow plain doubles
    j = Jet(np.array([1.0, 0.5], dtype=complex), offset=900.0)
    sq = j * j
    assert sq.value0().log_abs == pytest.approx(1800.0)
    with np.errstate(over="ignore"):
        assert not np.isfinite(np.exp(900.0) * np.ones(1)).all() or True


def test_exp_refuses_unscaled_huge_tails():
    # a linear term of size 1e12 cannot be exponentiated termwise in doubles
    g = Jet.affine(0.0, 1.0e12, 6)
    with pytest.raises(OverflowError):
        g.exp()
    # rescaling the variable fixes it
    gs = g.scale_var(1.0e-12)
    assert np.isfinite(plain(gs.exp())).all()


def test_derivative_and_eval():
    # p(h) = 1 + 2h + 3h^2
    p = Jet(np.array([1.0, 2.0, 3.0], dtype=complex))
    dp = p.derivative()
    assert np.allclose(plain(dp)[:2], [2.0, 6.0])
    v = p.eval(0.1).to_complex()
    assert v == pytest.approx(1.0 + 0.2 + 0.03)


def test_derivatives_returns_factorial_scaled():
    p = Jet(np.array([1.0, 2.0, 3.0, 4.0], dtype=complex))
    ders = p.derivatives()
    want = [1.0, 2.0, 6.0, 24.0]  # k! * c_k
    for d, w in zip(ders, want):
        assert abs(d.to_complex() - w) < 1e-14 * w


def test_scale_var():
    p = Jet(np.array([1.0, 1.0, 1.0], dtype=complex))
    q = p.scale_var(2.0)
    assert np.allclose(plain(q), [1.0, 2.0, 4.0])


def test_compose_against_direct_series():
    # outer(g) with g(0) = 0: compare against analytic composition exp(sin-like)
    inner = Jet(np.array([0.0, 1.0, -0.25, 0.1], dtype=complex))
    outer = Jet(np.array([1.0, 1.0, 0.5, 1.0 / 6.0], dtype=complex))  # e^h series
    got = compose(outer, inner)
    want = inner.exp()  # since outer is the truncated exp series
    assert np.allclose(plain(got), plain(want), atol=1e-12)


def test_compose_requires_zero_constant_term():
    inner = Jet.affine(0.5, 1.0, 3)
    outer = Jet.constant(1.0, 3)
    with pytest.raises(ValueError):
        compose(outer, inner)


def test_taylor_coefficients_match_finite_differences():
    # f(z) = exp(z) / (2 - z) at z0 = 0.3: jet vs central finite differences
    z0 = 0.3
    base = Jet.affine(z0, 1.0, 5)
    f = base.exp() / (2.0 - base)
    ders = [d.to_complex() for d in f.derivatives(2)]

    def fn(z):
        return cmath.exp(z) / (2.0 - z)

    h = 1e-5
    fd1 = (fn(z0 + h) - fn(z0 - h)) / (2 * h)
    fd2 = (fn(z0 + h) - 2 * fn(z0) + fn(z0 - h)) / h**2
    assert abs(ders[0] - fn(z0)) < 1e-14
    assert abs(ders[1] - fd1) < 1e-9
    assert abs(ders[2] - fd2) < 1e-5


def test_shift_recenters_polynomial_exactly():
    # p(h) = 1 + 2h - h^2 + 0.5 h^3 recentered at h0: compare evaluations
    p = Jet(np.array([1.0, 2.0, -1.0, 0.5], dtype=complex))
    h0 = 0.4 - 0.3j
    q = p.shift(h0)
    for t in (0.0, 0.2, -0.5j, 0.1 + 0.1j):
        want = p.eval(h0 + t).to_complex()
        got = q.eval(t).to_complex()
        assert abs(got - want) < 1e-13


def test_shift_matches_exp_recentering():
    # exp jet at 0 shifted by h0 should match exp jet built at h0
    base = Jet.affine(0.0, 1.0, 14)
    e0 = base.exp()
    moved = e0.shift(0.25)
    direct = Jet.affine(0.25, 1.0, 14).exp()
    # truncation tails differ, so only the low coefficients are comparable
    assert np.allclose(plain(moved)[:8], plain(direct)[:8], rtol=1e-9, atol=1e-14)


def test_shift_keeps_offset_scale():
    p = Jet(np.array([1.0, 1.0, 0.5], dtype=complex), offset=800.0)
    q = p.shift(0.3)
    v = q.value0()
    want_log = 800.0 + math.log(1.0 + 0.3 + 0.5 * 0.09)
    assert abs(v.log_abs - want_log) < 1e-12


def test_coeff_extracts_logcomplex():
    p = Jet(np.array([0.0, -2.0, 0.0, 1.0j], dtype=complex), offset=500.0)
    assert p.coeff(0).is_zero
    c1 = p.coeff(1)
    assert abs(c1.log_abs - (500.0 + math.log(2.0))) < 1e-12
    assert abs(abs(c1.phase) - math.pi) < 1e-12
    c3 = p.coeff(3)
    assert abs(c3.phase - math.pi / 2) < 1e-12
    assert p.coeff(9).is_zero
