"""Function-zoo members against direct evaluation and finite differences."""

import cmath
import math

import numpy as np
import pytest

from growthlab.conformal import map_to_sector
from growthlab.functions import (
    ConstantMap,
    ExpLinearMap,
    Exp2Map,
    IdentityMap,
    PlainMap,
    PolynomialMap,
    PowerExpMap,
    PowerSumMap,
    RatioDerivMap,
    SectorComposedMap,
    cauchy_riemann_residual,
)
from growthlab.sectors import Sector

SAMPLES = [0.3 + 0.1j, -0.5 + 0.4j, 0.05 - 0.7j, 0.85j, -0.2 - 0.2j]


def direct_value(fmap, z):
    v = fmap.value(complex(z))
    return cmath.exp(complex(v.log_abs, v.phase))


@pytest.mark.parametrize(
    "fmap,fn",
    [
        (PolynomialMap([1.0, -2.0, 0.5j]), lambda z: 1.0 - 2.0 * z + 0.5j * z * z),
        (IdentityMap(), lambda z: z),
        (ExpLinearMap(2.0 - 1.0j), lambda z: cmath.exp((2.0 - 1.0j) * z)),
        (
            PowerExpMap(c=0.3, sigma=1.5, direction=0.7),
            lambda z: cmath.exp(0.3 * (1.0 - z * cmath.exp(-0.7j)) ** -1.5),
        ),
        (
            PowerSumMap([(1.0, 2.0), (-0.5, 0.5)], direction=0.2),
            lambda z: (1.0 - z * cmath.exp(-0.2j)) ** -2.0
            - 0.5 * (1.0 - z * cmath.exp(-0.2j)) ** -0.5,
        ),
        (
            Exp2Map(c=0.4, sigma=0.8),
            lambda z: cmath.exp(0.4 * cmath.exp((1.0 - z) ** -0.8)),
        ),
    ],
)
def test_values_match_direct_formulas(fmap, fn):
    for z in SAMPLES:
        want = fn(z)
        got = direct_value(fmap, z)
        assert abs(got - want) < 1e-12 * max(1.0, abs(want))


@pytest.mark.parametrize(
    "fmap",
    [
        PolynomialMap([1.0, -2.0, 0.5j]),
        ExpLinearMap(2.0 - 1.0j),
        PowerExpMap(c=0.3, sigma=1.5, direction=0.7),
        PowerSumMap([(1.0, 2.0), (-0.5, 0.5)], direction=0.2),
    ],
)
def test_log_deriv_matches_finite_differences(fmap):
    h = 1e-6
    for z in SAMPLES:
        f0 = direct_value(fmap, z)
        fp = direct_value(fmap, z + h)
        fm = direct_value(fmap, z - h)
        fd = (fp - fm) / (2.0 * h) / f0
        got = complex(fmap.log_deriv(np.array([z]))[0])
        assert abs(got - fd) < 1e-5 * max(1.0, abs(fd))


def test_log_sph_is_spherical_derivative():
    fmap = PolynomialMap([0.0, 1.0, 1.0])  # z + z^2
    for z in SAMPLES:
        p = z + z * z
        dp = 1.0 + 2.0 * z
        want = math.log(abs(dp) / (1.0 + abs(p) ** 2))
        got = float(fmap.log_sph(np.array([z]))[0])
        assert got == pytest.approx(want, rel=1e-12)


def test_log_sph_stays_finite_at_huge_modulus():
    # near the singular direction |f| overflows any plain representation;
    # the log spherical derivative must remain a finite float
    fmap = PowerExpMap(c=1.0, sigma=2.0)
    z = np.array([0.9999])
    v = float(fmap.log_sph(z)[0])
    assert np.isfinite(v)
    # |f| = exp(1e8): sph ~ |f'|/|f|^2 is astronomically small
    assert v < -1e7


def test_analyticity_probe():
    maps = [
        PolynomialMap([1.0, 1.0, 0.5]),
        ExpLinearMap(1.5),
        PowerExpMap(c=0.5, sigma=1.2, direction=1.1),
        PowerSumMap([(1.0, 1.0), (2.0, 3.0)], direction=2.0),
    ]
    for fmap in maps:
        for z in (0.2 + 0.3j, -0.4 + 0.1j):
            assert cauchy_riemann_residual(fmap, z) < 1e-6


def test_constant_map_degenerates():
    c = ConstantMap(3.0 + 4.0j)
    z = np.array([0.5, -0.2j])
    assert np.allclose(c.log_abs(z), math.log(5.0))
    assert np.all(c.log_sph(z) == -np.inf)


def test_exp_linear_jet_and_ratios():
    lam = 1.7 - 0.3j
    fmap = ExpLinearMap(lam)
    z0 = 0.4 + 0.2j
    ratios = fmap.deriv_ratios(z0, 3)
    for j, r in enumerate(ratios):
        assert abs(r.to_complex() - lam**j) < 1e-10 * abs(lam) ** j
    jet = fmap.jet(z0, 4)
    ders = jet.derivatives(4)
    f0 = cmath.exp(lam * z0)
    for j, d in enumerate(ders):
        want = f0 * lam**j
        assert abs(d.to_complex() - want) < 1e-12 * abs(want)


def test_power_exp_jet_matches_closed_form_derivative():
    fmap = PowerExpMap(c=0.4, sigma=1.3, direction=0.5)
    z0 = 0.3 - 0.25j
    jet = fmap.jet(z0, 3)
    d1 = jet.derivatives(1)[1].to_complex()
    want = direct_value(fmap, z0) * complex(fmap.log_deriv(np.array([z0]))[0])
    assert abs(d1 - want) < 1e-11 * abs(want)


def test_power_exp_crossing_hints_sit_on_unimodular_band():
    # at the hint angles the exponent has vanishing real part, so |f| = 1
    fmap = PowerExpMap(c=1.0, sigma=1.5, direction=math.pi / 2)
    rho = 1.0 - 2.0**-10
    for th in fmap.angular_hints(rho):
        if abs(th - math.pi / 2) < 1e-12:
            continue  # the singular direction itself is not a crossing
        z = rho * cmath.exp(1j * th)
        L = float(fmap.log_abs(np.array([z]))[0])
        w = 1.0 - z * cmath.exp(-1j * math.pi / 2)
        # |log|f|| << its local scale |c| |w|^-sigma
        assert abs(L) < 1e-6 * abs(w) ** -1.5


def test_power_exp_scaled_jet_keeps_coefficients_tame():
    # close to the singularity the raw Taylor coefficients blow up; the
    # scale parameter renormalizes the step to the singular distance
    fmap = PowerExpMap(c=1.0, sigma=1.0)
    z0 = 0.995
    scale = fmap.singular_radius(z0) * 0.5
    lj = fmap.log_jet(z0, 12, scale=scale)
    mags = np.abs(lj.plain())
    assert mags[0] > 100.0  # the value itself is huge
    assert np.all(mags[1:] < 10.0 * mags[0])  # the tail does not explode


def test_sector_composed_matches_pointwise_composition():
    sec = Sector(0.0, math.pi)
    base = PowerExpMap(c=0.2, sigma=1.1, direction=math.pi / 2)
    comp = SectorComposedMap(base, sec)
    us = np.array([0.3 + 0.1j, -0.4 - 0.2j, 0.6j])
    zs = map_to_sector(sec, us)
    assert np.allclose(comp.log_abs(us), base.log_abs(zs))
    # chain rule for the log derivative checked by finite differences
    h = 1e-6
    for u in us:
        want = (
            complex(comp.log_deriv(np.array([u]))[0])
        )
        zp = map_to_sector(sec, u + h)
        zm = map_to_sector(sec, u - h)
        num = (base.log_abs(np.array([zp])) + 1j * base.phase(np.array([zp]))) - (
            base.log_abs(np.array([zm])) + 1j * base.phase(np.array([zm]))
        )
        fd = complex(num[0]) / (2.0 * h)
        assert abs(want - fd) < 1e-5 * max(1.0, abs(fd))


def test_sector_composed_jet_consistency():
    sec = Sector(0.3, 2.1)
    base = PolynomialMap([0.5, 1.0, -0.25])
    comp = SectorComposedMap(base, sec)
    u0 = 0.2 - 0.3j
    lj = comp.log_jet(u0, 2)
    d1 = (lj.derivative()).eval(0.0).to_complex()
    fd = complex(comp.log_deriv(np.array([u0]))[0])
    # log_jet derivative at 0 is d/du log f(z(u))
    assert abs(d1 - fd) < 1e-9 * max(1.0, abs(fd))


def test_ratio_deriv_map_of_exponential():
    fmap = ExpLinearMap(2.0)
    ratio = RatioDerivMap(fmap, 2)
    z = np.array([0.3 + 0.1j, -0.2j])
    assert np.allclose(ratio.log_abs(z), math.log(4.0))


def test_plain_map_sin():
    fmap = PlainMap([np.sin, np.cos, lambda z: -np.sin(z)], name="sin")
    z = np.array([0.7 + 0.2j])
    want = cmath.sin(0.7 + 0.2j)
    assert float(fmap.log_abs(z)[0]) == pytest.approx(math.log(abs(want)), rel=1e-12)
    r = fmap.deriv_ratios(0.7 + 0.2j, 2)
    assert abs(r[2].to_complex() + 1.0) < 1e-12  # sin'' / sin = -1
    jet = fmap.jet(0.7 + 0.2j, 2)
    assert abs(jet.value0().to_complex() - want) < 1e-12


def test_exp2_log_abs_saturates_not_overflows():
    fmap = Exp2Map(c=1.0, sigma=1.0)
    z = np.array([0.999])
    v = float(fmap.log_abs(z)[0])
    assert np.isfinite(v)
    assert v > 1e100  # log|f| itself is enormous, the double holds it


def test_singular_radius():
    fmap = PowerExpMap(c=1.0, sigma=1.0, direction=math.pi / 3)
    z0 = 0.5 * cmath.exp(1j * math.pi / 3)
    assert fmap.singular_radius(z0) == pytest.approx(0.5)
    assert PolynomialMap([1.0, 1.0]).singular_radius(0.9) == math.inf
