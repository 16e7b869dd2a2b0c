"""Conformal equivalence between a sector of the unit disc and the disc.

The sector {alpha < arg z < beta, 0 < |z| < 1} with bisector theta_0 and half
opening delta maps onto the unit disc by

    u(z) = (w^2 + 2w - 1) / (w^2 - 2w - 1),   w = (z e^{-i theta_0})^{pi/(2 delta)},

with inverse

    z(u) = e^{i theta_0} * chi(u)^{2 delta / pi},
    chi(u) = (-(1+u) + sqrt(2(1+u^2))) / (1-u).

Branches are taken relative to the bisector: z in the sector puts w in the
right half-plane, where principal powers are single-valued, and chi likewise
lands in the right half-plane for |u| < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jets import Jet
from .sectors import Sector


def _require_mappable(sector: Sector):
    if sector.is_full_disc:
        raise ValueError("the full disc has no sector-to-disc map; use a proper sector")


def map_to_disc(sector: Sector, z):
    """Forward map u(z); accepts scalars or arrays of sector points."""
    _require_mappable(sector)
    p = math.pi / (2.0 * sector.half_opening)
    w = np.asarray(z, dtype=complex) * np.exp(-1j * sector.bisector)
    wp = np.exp(p * np.log(w))
    u = (wp * wp + 2.0 * wp - 1.0) / (wp * wp - 2.0 * wp - 1.0)
    if np.isscalar(z) or np.ndim(z) == 0:
        return complex(u)
    return u


def map_to_sector(sector: Sector, u):
    """Inverse map z(u); accepts scalars or arrays of disc points."""
    _require_mappable(sector)
    q = 2.0 * sector.half_opening / math.pi
    uu = np.asarray(u, dtype=complex)
    chi = (-(1.0 + uu) + np.sqrt(2.0 * (1.0 + uu * uu))) / (1.0 - uu)
    z = np.exp(1j * sector.bisector) * np.exp(q * np.log(chi))
    if np.isscalar(u) or np.ndim(u) == 0:
        return complex(z)
    return z


@dataclass
class MapJet:
    """Taylor data of the inverse map at a disc point u0.

    z_jet: series of z(u0 + h); v_jet: series of V(u0 + h) = 1 / z'(u0 + h).
    Both carry at least the requested order.
    """

    sector: Sector
    u0: complex
    z_jet: Jet
    v_jet: Jet

    @property
    def z0(self) -> complex:
        return complex(self.z_jet.coeffs[0] * math.exp(self.z_jet.offset))

    @property
    def z_prime(self) -> complex:
        return complex(self.z_jet.coeffs[1] * math.exp(self.z_jet.offset))

    def v_derivatives(self, upto: int) -> list[complex]:
        """V, V', ..., V^(upto) at u0 as plain complex values."""
        return [lc.to_complex() for lc in self.v_jet.derivatives(upto)]


def map_jet(sector: Sector, u0: complex, order: int) -> MapJet:
    """Jets of z(u) and V(u) = 1/z'(u) about an interior disc point u0."""
    _require_mappable(sector)
    if abs(u0) >= 1.0:
        raise ValueError("u0 must lie inside the unit disc")
    n = order + 1
    q = 2.0 * sector.half_opening / math.pi
    uj = Jet.affine(u0, 1.0, n)
    s = (2.0 * (1.0 + uj * uj)).sqrt()
    chi = (-(1.0 + uj) + s) / (1.0 - uj)
    zj = chi.pow_real(q) * np.exp(1j * sector.bisector)
    vj = zj.derivative().reciprocal()
    return MapJet(sector, complex(u0), zj.truncate(order), vj.truncate(order))


def shrink_constant(sector: Sector, epsilon: float) -> float:
    """Disc-shrink factor b(sector, epsilon) of the reverse radius inclusion."""
    _require_mappable(sector)
    delta = sector.half_opening
    if not (0.0 < epsilon < delta):
        raise ValueError(f"epsilon must lie in (0, {delta})")
    b = epsilon / (2.0 ** (math.pi / (2.0 * delta) + 1.0) * delta)
    if not (0.0 < b < 1.0):
        raise AssertionError(f"shrink constant out of range: {b}")
    return b


@dataclass
class InclusionReport:
    sector: Sector
    epsilon: float
    r: float
    rho: float
    forward_checked: int
    forward_violations: int
    forward_max_excess: float
    reverse_checked: int
    reverse_violations: int
    reverse_max_excess: float
    small_z_checked: int
    small_z_max_abs_u: float

    @property
    def ok(self) -> bool:
        return self.forward_violations == 0 and self.reverse_violations == 0


def check_inclusions(
    sector: Sector,
    epsilon: float,
    r: float = 0.9,
    rho: float = 0.9,
    n_angular: int = 48,
    n_radial: int = 24,
) -> InclusionReport:
    """Sampled verification of both inclusion directions.

    Forward: z in the epsilon-shrunk sector with 1/2 < |z| < r implies
    |u(z)| < 1 - b(1-r). Reverse: |u| < rho implies z(u) in the sector with
    |z| < 1 - (delta/(8 pi))(1-rho). Points with |z| <= 1/2 are outside the
    forward claim; they are sampled separately and only reported.
    """
    _require_mappable(sector)
    b = shrink_constant(sector, epsilon)
    delta = sector.half_opening
    inner = sector.shrink(epsilon)

    margin = 1e-9
    thetas = inner.alpha + (inner.span) * _interior_grid(n_angular)
    radii_fwd = 0.5 + (r - 0.5) * _interior_grid(n_radial)
    zz = radii_fwd[:, None] * np.exp(1j * thetas[None, :])
    uu = map_to_disc(sector, zz.ravel())
    bound_fwd = 1.0 - b * (1.0 - r)
    excess_fwd = np.abs(uu) - bound_fwd
    fwd_viol = int(np.sum(excess_fwd >= margin))

    radii_rev = rho * _interior_grid(n_radial)
    angles_rev = 2.0 * math.pi * _interior_grid(n_angular)
    uu_rev = radii_rev[:, None] * np.exp(1j * angles_rev[None, :])
    zz_rev = map_to_sector(sector, uu_rev.ravel())
    bound_rev = 1.0 - (delta / (8.0 * math.pi)) * (1.0 - rho)
    excess_rev = np.abs(zz_rev) - bound_rev
    args_rel = np.mod(np.angle(zz_rev) - sector.alpha, 2.0 * math.pi)
    angle_ok = (args_rel > -margin) & (args_rel < sector.span + margin)
    rev_viol = int(np.sum((excess_rev >= margin) | ~angle_ok))

    radii_small = 0.5 * _interior_grid(n_radial)
    zz_small = radii_small[:, None] * np.exp(1j * thetas[None, :])
    uu_small = map_to_disc(sector, zz_small.ravel())

    return InclusionReport(
        sector=sector,
        epsilon=epsilon,
        r=r,
        rho=rho,
        forward_checked=uu.size,
        forward_violations=fwd_viol,
        forward_max_excess=float(np.max(excess_fwd)),
        reverse_checked=zz_rev.size,
        reverse_violations=rev_viol,
        reverse_max_excess=float(np.max(excess_rev)),
        small_z_checked=uu_small.size,
        small_z_max_abs_u=float(np.max(np.abs(uu_small))),
    )


def _interior_grid(n: int) -> np.ndarray:
    """n points strictly inside (0, 1), midpoint-style."""
    return (np.arange(n) + 0.5) / n
