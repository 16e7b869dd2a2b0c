"""Analytic functions on the disc exposed through a growth-safe contract.

Implementations provide vectorized log-modulus, phase, and logarithmic
derivative on arrays of points, plus local Taylor data (jets of log f).
Everything a characteristic integral needs is available without ever
materializing |f| itself, so families with log|f| up to ~1e300 evaluate
exactly like bounded ones.

The spherical-derivative log uses the identity
    |f'| / (1 + |f|^2) = |f'/f| / (e^L + e^{-L}),    L = log|f|,
which is stable for all magnitudes away from zeros of f; classes whose
functions have zeros override log_sph with a direct stable form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .conformal import map_jet, map_to_disc, map_to_sector
from .jets import Jet, compose
from .logscale import NEG_INF, LogComplex
from .sectors import Sector


@dataclass
class FunctionValue:
    log_abs: float
    phase: float
    log_deriv: complex

    @property
    def is_zero(self) -> bool:
        return self.log_abs == NEG_INF

    def as_log_complex(self) -> LogComplex:
        return LogComplex(self.log_abs, self.phase)


class AnalyticMap:
    """Contract for growth probes of an analytic function on the unit disc."""

    name = "analytic"

    # -- vectorized primitives (arrays in, arrays out) -------------------

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def phase(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_deriv(self, z: np.ndarray) -> np.ndarray:
        """f'/f as plain complex; may overflow for doubly exponential growth."""
        raise NotImplementedError

    def log_sph(self, z: np.ndarray) -> np.ndarray:
        """log of the spherical derivative |f'| / (1 + |f|^2)."""
        z = np.asarray(z, dtype=complex)
        L = self.log_abs(z)
        D = self.log_deriv(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(np.abs(D)) - np.logaddexp(L, -L)
        return out

    def value(self, z: complex) -> FunctionValue:
        arr = np.array([z], dtype=complex)
        return FunctionValue(
            float(self.log_abs(arr)[0]),
            float(self.phase(arr)[0]),
            complex(self.log_deriv(arr)[0]),
        )

    # -- local Taylor data ------------------------------------------------

    def log_jet(self, z0: complex, order: int, scale: complex = 1.0) -> Jet:
        """Series of log f(z0 + scale*h) in h (principal imaginary part)."""
        raise NotImplementedError

    def jet(self, z0: complex, order: int, scale: complex = 1.0) -> Jet:
        return self.log_jet(z0, order, scale).exp()

    def deriv_ratios(self, z0: complex, upto: int) -> list[LogComplex]:
        """f^(j)(z0) / f(z0) for j = 0..upto, via an auto-scaled log-jet."""
        lj = self.log_jet(z0, upto, 1.0)
        lam = 1.0
        if upto >= 1:
            c1 = abs(lj.coeffs[1]) * math.exp(min(lj.offset, 700.0))
            if c1 > 1.0:
                lam = 1.0 / c1
        ej = lj.scale_var(lam).exp()
        ders = ej.derivatives(upto)
        base = ders[0]
        out = []
        for j, d in enumerate(ders):
            r = d / base
            out.append(LogComplex(r.log_abs - j * math.log(lam), r.phase))
        return out

    # -- structure hints ---------------------------------------------------

    def angular_hints(self, radius: float) -> list[float]:
        """Directions near which the modulus has boundary-driven structure."""
        return []

    def hint_inner_scale(self, radius: float) -> float:
        """Width of the finest angular feature near a hint at this radius."""
        return max(1.0 - radius, 1e-14)

    def winding_scale(self, radius: float) -> float:
        """Crude bound for |Im log f| on the circle (sets quadrature seeding)."""
        return 1.0

    def singular_radius(self, z0: complex) -> float:
        """Distance from z0 to the nearest singularity of the function."""
        return math.inf


def cauchy_riemann_residual(fmap: AnalyticMap, z: complex, h: float = 1e-5) -> float:
    """Relative disagreement of the two FD quotients of log f (analyticity probe)."""

    def logf(p: complex) -> complex:
        v = fmap.value(p)
        return complex(v.log_abs, v.phase)

    dx = (logf(z + h) - logf(z - h)) / (2 * h)
    dy = (logf(z + 1j * h) - logf(z - 1j * h)) / (2j * h)
    scale = max(abs(dx), abs(dy), 1.0)
    return abs(dx - dy) / scale


# ---------------------------------------------------------------------------
# elementary members of the zoo


class ConstantMap(AnalyticMap):
    def __init__(self, c: complex):
        self.c = complex(c)
        self.name = f"const({c})"

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        v = NEG_INF if self.c == 0 else math.log(abs(self.c))
        return np.full(z.shape, v)

    def phase(self, z):
        z = np.asarray(z, dtype=complex)
        return np.full(z.shape, cmath.phase(self.c) if self.c != 0 else 0.0)

    def log_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape, dtype=complex)

    def log_sph(self, z):
        z = np.asarray(z, dtype=complex)
        return np.full(z.shape, NEG_INF)

    def log_jet(self, z0, order, scale=1.0):
        if self.c == 0:
            raise ZeroDivisionError("log of the zero function")
        return Jet.constant(cmath.log(self.c), order)

    def jet(self, z0, order, scale=1.0):
        return Jet.constant(self.c, order)


class PolynomialMap(AnalyticMap):
    """p(z) with coefficients in ascending order."""

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=complex)
        if self.coeffs.size == 0 or not np.any(self.coeffs):
            raise ValueError("zero polynomial")
        self.dcoeffs = self.coeffs[1:] * np.arange(1, len(self.coeffs))
        self.name = f"poly(deg {len(self.coeffs) - 1})"

    def _eval(self, z, c):
        acc = np.zeros_like(z)
        for ck in c[::-1]:
            acc = acc * z + ck
        return acc

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self._eval(z, self.coeffs)))

    def phase(self, z):
        z = np.asarray(z, dtype=complex)
        return np.angle(self._eval(z, self.coeffs))

    def log_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        if self.dcoeffs.size == 0:
            return np.zeros(z.shape, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._eval(z, self.dcoeffs) / self._eval(z, self.coeffs)

    def log_sph(self, z):
        z = np.asarray(z, dtype=complex)
        p = self._eval(z, self.coeffs)
        if self.dcoeffs.size == 0:
            return np.full(z.shape, NEG_INF)
        dp = self._eval(z, self.dcoeffs)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(dp)) - np.log1p(np.abs(p) ** 2)

    def log_jet(self, z0, order, scale=1.0):
        return self.jet(z0, order, scale).log()

    def jet(self, z0, order, scale=1.0):
        zj = Jet.affine(z0, scale, order)
        acc = Jet.constant(0j, order)
        for ck in self.coeffs[::-1]:
            acc = acc * zj + ck
        return acc

    def singular_radius(self, z0):
        return math.inf


class IdentityMap(PolynomialMap):
    def __init__(self):
        super().__init__([0.0, 1.0])
        self.name = "identity"


class ExpLinearMap(AnalyticMap):
    """exp(lam * z)."""

    def __init__(self, lam: complex = 1.0):
        self.lam = complex(lam)
        self.name = f"exp({lam}*z)"

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.lam * z).real

    def phase(self, z):
        z = np.asarray(z, dtype=complex)
        return np.angle(np.exp(1j * np.imag(self.lam * z)))

    def log_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        return np.full(z.shape, self.lam, dtype=complex)

    def log_jet(self, z0, order, scale=1.0):
        return Jet.affine(self.lam * z0, self.lam * scale, order)

    def winding_scale(self, radius):
        return abs(self.lam) * radius


class PowerExpMap(AnalyticMap):
    """a * exp(c * (1 - z e^{-i dir})^{-sigma}).

    The singular direction is z = e^{i dir} on the unit circle; for z in the
    disc the base 1 - z e^{-i dir} stays in the right half-plane, so the
    principal branch of the power is single-valued.
    """

    def __init__(self, c: complex = 1.0, sigma: float = 1.0,
                 direction: float = 0.0, prefactor: complex = 1.0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.c = complex(c)
        self.sigma = float(sigma)
        self.direction = float(direction)
        self.prefactor = complex(prefactor)
        self.name = f"power_exp(c={c}, sigma={sigma})"
        self._rot = cmath.exp(-1j * self.direction)
        self._log_pref = cmath.log(self.prefactor)

    def _g(self, z):
        w = 1.0 - z * self._rot
        return self.c * np.exp(-self.sigma * np.log(w))

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        return self._g(z).real + self._log_pref.real

    def phase(self, z):
        z = np.asarray(z, dtype=complex)
        return np.angle(np.exp(1j * (self._g(z).imag + self._log_pref.imag)))

    def log_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        w = 1.0 - z * self._rot
        return self.c * self.sigma * self._rot * np.exp(-(self.sigma + 1.0) * np.log(w))

    def log_jet(self, z0, order, scale=1.0):
        w = Jet.affine(1.0 - z0 * self._rot, -scale * self._rot, order)
        return w.pow_real(-self.sigma) * self.c + self._log_pref

    def angular_hints(self, radius):
        # The spherical derivative peaks along the circle where
        # Re(c w^{-sigma}) = 0, w = 1 - rho e^{i phi}: there |f| ~ 1 while
        # |f'/f| is near its maximum.  Those angles solve
        # arg w = a_k with cos(arg c - sigma a_k) = 0, and for each a_k the
        # phi roots of arg(1 - rho e^{i phi}) = a_k satisfy
        # sin(a_k - phi) = sin(a_k) / rho.
        hints = [self.direction]
        rho = min(max(radius, 0.0), 1.0 - 1e-12)
        argc = cmath.phase(self.c)
        k = 0
        while True:
            done = True
            for half in (0.5 + k, -0.5 - k):
                a = (argc - half * math.pi) / self.sigma
                if abs(a) >= math.pi / 2:
                    continue
                done = False
                s = math.sin(a) / rho
                if abs(s) > 1.0:
                    continue
                t = math.asin(s)
                x2 = math.pi - t if t > -a else -math.pi - t
                for x in (t, x2):
                    phi = a - x
                    hints.append(self.direction + math.atan2(math.sin(phi), math.cos(phi)))
            if done:
                break
            k += 1
        return hints

    def hint_inner_scale(self, radius):
        eps = max(1.0 - radius, 1e-14)
        width = eps ** (self.sigma + 1.0) / (self.sigma * max(abs(self.c), 1e-6))
        return max(min(width, eps), 1e-14)

    def winding_scale(self, radius):
        return abs(self.c) * (1.0 - radius) ** (-self.sigma)

    def singular_radius(self, z0):
        return abs(z0 - cmath.exp(1j * self.direction))


class PowerSumMap(AnalyticMap):
    """a * sum_i c_i (1 - z e^{-i dir})^{-p_i} (rational-power combination)."""

    def __init__(self, terms, direction: float = 0.0, prefactor: complex = 1.0):
        self.terms = [(complex(c), float(p)) for c, p in terms]
        if not self.terms:
            raise ValueError("empty term list")
        self.direction = float(direction)
        self.prefactor = complex(prefactor)
        self.pmax = max(p for _, p in self.terms)
        self._rot = cmath.exp(-1j * self.direction)
        self.name = f"power_sum({len(self.terms)} terms, pmax={self.pmax})"

    def _parts(self, z):
        """w, numerator sum_i c_i w^{pmax - p_i} (all exponents >= 0)."""
        w = 1.0 - z * self._rot
        num = np.zeros_like(w)
        for c, p in self.terms:
            num = num + c * np.exp((self.pmax - p) * np.log(w))
        return w, num

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        w, num = self._parts(z)
        with np.errstate(divide="ignore"):
            return (
                math.log(abs(self.prefactor))
                - self.pmax * np.log(np.abs(w))
                + np.log(np.abs(num))
            )

    def phase(self, z):
        z = np.asarray(z, dtype=complex)
        w, num = self._parts(z)
        ph = cmath.phase(self.prefactor) - self.pmax * np.angle(w) + np.angle(num)
        return np.angle(np.exp(1j * ph))

    def log_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        w, num = self._parts(z)
        dnum = np.zeros_like(w)
        for c, p in self.terms:
            dnum = dnum + c * p * np.exp((self.pmax - p) * np.log(w))
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._rot * dnum / (w * num)

    def jet(self, z0, order, scale=1.0):
        w = Jet.affine(1.0 - z0 * self._rot, -scale * self._rot, order)
        acc = None
        for c, p in self.terms:
            t = w.pow_real(-p) * c
            acc = t if acc is None else acc + t
        return acc * self.prefactor

    def log_jet(self, z0, order, scale=1.0):
        return self.jet(z0, order, scale).log()

    def angular_hints(self, radius):
        return [self.direction]

    def winding_scale(self, radius):
        # arg of w^{-pmax} swings by about pmax*pi near the singular direction
        return self.pmax + 2.0

    def singular_radius(self, z0):
        return abs(z0 - cmath.exp(1j * self.direction))


class Exp2Map(AnalyticMap):
    """a * exp(c * exp((1 - z e^{-i dir})^{-sigma})), doubly exponential growth."""

    def __init__(self, c: complex = 1.0, sigma: float = 1.0,
                 direction: float = 0.0, prefactor: complex = 1.0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.c = complex(c)
        self.sigma = float(sigma)
        self.direction = float(direction)
        self.prefactor = complex(prefactor)
        self._rot = cmath.exp(-1j * self.direction)
        self._log_c = cmath.log(self.c)
        self._log_pref = cmath.log(self.prefactor)
        self.name = f"exp2(c={c}, sigma={sigma})"

    def _x(self, z):
        """Inner power X = (1 - z e^{-i dir})^{-sigma}."""
        w = 1.0 - z * self._rot
        return np.exp(-self.sigma * np.log(w))

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        x = self._x(z)
        # log f = log a + c e^X; |c e^X| = exp(log|c| + Re X)
        mag = np.exp(np.minimum(self._log_c.real + x.real, 709.0))
        ang = self._log_c.imag + x.imag
        return self._log_pref.real + mag * np.cos(ang)

    def phase(self, z):
        z = np.asarray(z, dtype=complex)
        x = self._x(z)
        mag = np.exp(np.minimum(self._log_c.real + x.real, 709.0))
        ang = self._log_c.imag + x.imag
        return np.angle(np.exp(1j * (self._log_pref.imag + mag * np.sin(ang))))

    def log_deriv(self, z):
        """May overflow; quadrature uses log_sph which stays in logs."""
        z = np.asarray(z, dtype=complex)
        w = 1.0 - z * self._rot
        x = self._x(z)
        with np.errstate(over="ignore"):
            return self.c * self.sigma * self._rot * np.exp(x) * np.exp(
                -(self.sigma + 1.0) * np.log(w)
            )

    def log_sph(self, z):
        z = np.asarray(z, dtype=complex)
        w = 1.0 - z * self._rot
        x = self._x(z)
        log_d = (
            self._log_c.real
            + math.log(self.sigma)
            + x.real
            - (self.sigma + 1.0) * np.log(np.abs(w))
        )
        L = self.log_abs(z)
        return log_d - np.logaddexp(L, -L)

    def log_jet(self, z0, order, scale=1.0):
        w = Jet.affine(1.0 - z0 * self._rot, -scale * self._rot, order)
        xj = w.pow_real(-self.sigma)
        return xj.exp() * self.c + self._log_pref

    def angular_hints(self, radius):
        return [self.direction]

    def winding_scale(self, radius):
        x = (1.0 - radius) ** (-self.sigma)
        if x > 34.0:
            return 1e15
        return abs(self.c) * math.exp(x)

    def singular_radius(self, z0):
        return abs(z0 - cmath.exp(1j * self.direction))


class SectorComposedMap(AnalyticMap):
    """f(z(u)): a sector function pulled back to the disc by the inverse map."""

    def __init__(self, fmap: AnalyticMap, sector: Sector):
        self.fmap = fmap
        self.sector = sector
        self.name = f"{fmap.name} o sector_map"
        self._hint_dirs = self._compute_hints()

    def _compute_hints(self) -> list[float]:
        dirs = [0.0, math.pi]  # vertex and edge images degenerate at u = +-1
        for th in self.fmap.angular_hints(0.99):
            if self.sector.angle_inside(th):
                ustar = map_to_disc(self.sector, (1.0 - 1e-9) * cmath.exp(1j * th))
                dirs.append(cmath.phase(ustar))
        return dirs

    def log_abs(self, u):
        u = np.asarray(u, dtype=complex)
        return self.fmap.log_abs(map_to_sector(self.sector, u))

    def phase(self, u):
        u = np.asarray(u, dtype=complex)
        return self.fmap.phase(map_to_sector(self.sector, u))

    def _z_and_deriv(self, u):
        uu = np.asarray(u, dtype=complex)
        s = np.sqrt(2.0 * (1.0 + uu * uu))
        chi = (-(1.0 + uu) + s) / (1.0 - uu)
        # chi = N/D, N = -(1+u)+s, D = 1-u, N' = -1 + 2u/s
        dchi = (-1.0 + 2.0 * uu / s) / (1.0 - uu) + (-(1.0 + uu) + s) / (1.0 - uu) ** 2
        q = 2.0 * self.sector.half_opening / math.pi
        z = np.exp(1j * self.sector.bisector) * np.exp(q * np.log(chi))
        dz = z * q * dchi / chi
        return z, dz

    def log_deriv(self, u):
        z, dz = self._z_and_deriv(u)
        return self.fmap.log_deriv(z) * dz

    def log_sph(self, u):
        u = np.asarray(u, dtype=complex)
        z, dz = self._z_and_deriv(u)
        # sph(f o z) = sph_f(z) * |z'(u)|
        return self.fmap.log_sph(z) + np.log(np.abs(dz))

    def log_jet(self, u0, order, scale=1.0):
        mj = map_jet(self.sector, complex(u0), order)
        z0 = mj.z0
        inner = Jet(mj.z_jet.plain(), 0.0)
        tail = Jet(np.concatenate(([0j], inner.coeffs[1:])), 0.0).scale_var(scale)
        outer = self.fmap.log_jet(z0, order, 1.0)
        return compose(outer, tail)

    def angular_hints(self, radius):
        return list(self._hint_dirs)

    def winding_scale(self, radius):
        zmax = 1.0 - (self.sector.half_opening / (8.0 * math.pi)) * (1.0 - radius)
        return self.fmap.winding_scale(zmax)

    def singular_radius(self, u0):
        d = 1.0 - abs(u0)
        for th in self._hint_dirs:
            d = min(d, abs(u0 - cmath.exp(1j * th)))
        return d


class RatioDerivMap(AnalyticMap):
    """f^(k)/f of a base map; supports only modulus evaluation."""

    def __init__(self, fmap: AnalyticMap, k: int):
        self.fmap = fmap
        self.k = int(k)
        self.name = f"deriv_ratio({fmap.name}, {k})"

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape)
        flat = z.ravel()
        res = out.ravel()
        for i, p in enumerate(flat):
            res[i] = self.fmap.deriv_ratios(complex(p), self.k)[self.k].log_abs
        return out

    def angular_hints(self, radius):
        return self.fmap.angular_hints(radius)

    def winding_scale(self, radius):
        return self.fmap.winding_scale(radius)


class PlainMap(AnalyticMap):
    """Wraps closed-form callables; for bounded comparison solutions."""

    def __init__(self, derivs, name: str = "plain", hints=(), winding=4.0):
        # derivs: list of vectorized callables [f, f', f'', ...]
        self.derivs = list(derivs)
        self.name = name
        self._hints = list(hints)
        self._winding = float(winding)

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.derivs[0](z)))

    def phase(self, z):
        z = np.asarray(z, dtype=complex)
        return np.angle(self.derivs[0](z))

    def log_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.derivs[1](z) / self.derivs[0](z)

    def log_sph(self, z):
        z = np.asarray(z, dtype=complex)
        f = self.derivs[0](z)
        df = self.derivs[1](z)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(df)) - np.log1p(np.abs(f) ** 2)

    def deriv_ratios(self, z0, upto):
        if upto < len(self.derivs):
            f0 = complex(self.derivs[0](np.array([z0]))[0])
            out = []
            for j in range(upto + 1):
                fj = complex(self.derivs[j](np.array([z0]))[0])
                out.append(LogComplex.from_complex(fj / f0))
            return out
        return super().deriv_ratios(z0, upto)

    def log_jet(self, z0, order, scale=1.0):
        if order < len(self.derivs):
            c = []
            fact = 1.0
            for j in range(order + 1):
                if j:
                    fact *= j
                c.append(complex(self.derivs[j](np.array([z0]))[0]) * scale**j / fact)
            return Jet(np.array(c)).log()
        raise NotImplementedError("not enough derivative callables")

    def jet(self, z0, order, scale=1.0):
        if order < len(self.derivs):
            c = []
            fact = 1.0
            for j in range(order + 1):
                if j:
                    fact *= j
                c.append(complex(self.derivs[j](np.array([z0]))[0]) * scale**j / fact)
            return Jet(np.array(c))
        raise NotImplementedError("not enough derivative callables")

    def angular_hints(self, radius):
        return list(self._hints)

    def winding_scale(self, radius):
        return self._winding
