"""Growth characteristics on sectors: max modulus, Nevanlinna T, and the
spherical-area characteristics S and T_0.

For an analytic f and a sector Omega,

    S(t, Omega, f)   = (1/pi) * integral over Omega(t) of sph(f)^2 dA,
    T_0(r, Omega, f) = integral_0^r S(t)/t dt,

with sph(f) = |f'| / (1 + |f|^2). Fubini reduces T_0 to a single radial
integral against the kernel log(r/rho):

    T_0(r) = (1/pi) * integral_0^r g(rho) * rho * log(r/rho) drho,
    g(rho) = integral over the sector angles of sph(f)(rho e^{i th})^2 dth,

so the expensive angular integrals g(rho) are shared between S, T_0, and all
curve radii through a cache keyed by rho. Radial panels follow a fixed
geometric master grid in 1 - rho, which keeps Gauss-Kronrod nodes identical
across curve radii and makes the cache effective.

All values are handled and stored as natural logs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .functions import AnalyticMap, RatioDerivMap
from .quadrature import NEG_INF, log_quad
from .sectors import GrowthClass, Sector

LOG_PI = math.log(math.pi)
LOG_2PI = math.log(2.0 * math.pi)

# radial master grid: breakpoints 1 - 2^{-i/4}; i=2 gives 0.2929, so the
# plain panel [0, 0.2929] plus the geometric tail covers (0, 1)
_MASTER_I_STEP = 0.25

DEFAULT_GRID_START = 4
DEFAULT_GRID_STOP = 60


def default_radius_grid(i_start: int = DEFAULT_GRID_START,
                        i_stop: int = DEFAULT_GRID_STOP,
                        step: int = 1) -> np.ndarray:
    """Geometric radius grid r_i = 1 - 2^{-i/4}."""
    ii = np.arange(i_start, i_stop + 1, step)
    return 1.0 - np.power(2.0, -ii / 4.0)


@dataclass
class GrowthCurve:
    """Characteristic values along a radius grid, stored as natural logs."""

    kind: str  # "T0" | "T" | "M" | "S" | synthetic kinds in tests
    radii: np.ndarray
    values: np.ndarray
    log_scale: bool = True
    sector: Sector | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.radii.shape != self.values.shape:
            raise ValueError("radii and values must have matching shapes")
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("radii must be strictly increasing")

    def monotone_violation(self) -> float:
        """Largest decrease between consecutive values (0 when nondecreasing)."""
        if len(self.values) < 2:
            return 0.0
        with np.errstate(invalid="ignore"):
            d = np.diff(self.values)
        d = d[np.isfinite(d)]
        if d.size == 0:
            return 0.0
        return float(max(0.0, -np.min(d)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "value", "log_scale", "kind"])
            flag = 1 if self.log_scale else 0
            for r, v in zip(self.radii, self.values):
                w.writerow([f"{r:.17g}", f"{v:.17g}", flag, self.kind])

    @staticmethod
    def from_csv(path, sector: Sector | None = None) -> "GrowthCurve":
        rs, vs, flags, kinds = [], [], [], []
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd)
            if header[:2] != ["r", "value"]:
                raise ValueError(f"unexpected CSV header: {header}")
            for row in rd:
                rs.append(float(row[0]))
                vs.append(float(row[1]))
                flags.append(int(row[2]) if len(row) > 2 else 1)
                kinds.append(row[3] if len(row) > 3 else "")
        if flags and not all(f == flags[0] for f in flags):
            raise ValueError("mixed log_scale flags in curve CSV")
        return GrowthCurve(kinds[0] if kinds else "", np.array(rs), np.array(vs),
                           bool(flags[0]) if flags else True, sector)


class CurveInvariantError(Exception):
    pass


class CharacteristicEngine:
    """Evaluates S, T_0, T, and max-modulus for one (function, sector) pair."""

    def __init__(
        self,
        fmap: AnalyticMap,
        sector: Sector,
        *,
        rel_tol: float = 1e-7,
        angular_cap: int = 1 << 16,
        radial_cap: int = 1 << 12,
        seed_panels: int | None = None,
    ):
        self.fmap = fmap
        self.sector = sector
        self.rel_tol = rel_tol
        self.angular_cap = angular_cap
        self.radial_cap = radial_cap
        self.seed_panels = seed_panels
        self._g_cache: dict[float, float] = {}
        self.unconverged_angular = 0
        self.unconverged_radial = 0

    # -- angular structure -------------------------------------------------

    def _angular_breakpoints(self, rho: float, lo: float, hi: float) -> list[float]:
        """Seed panel edges: geometric fans around hints plus uniform panels."""
        pts: set[float] = set()
        span = hi - lo
        for th in self.fmap.angular_hints(rho):
            th = lo + math.fmod(th - lo, 2.0 * math.pi)
            if th < lo:
                th += 2.0 * math.pi
            for center in (th, th - 2.0 * math.pi, th + 2.0 * math.pi):
                if lo - span * 0.05 <= center <= hi + span * 0.05:
                    d = max(min(self.fmap.hint_inner_scale(rho), 1.0 - rho), 1e-14)
                    while d < span:
                        for s in (-1.0, 1.0):
                            p = center + s * d
                            if lo < p < hi:
                                pts.add(p)
                        d *= 2.0
                    if lo < center < hi:
                        pts.add(center)
        w = self.fmap.winding_scale(rho)
        if self.seed_panels is not None:
            n_uniform = self.seed_panels
        else:
            n_uniform = int(min(max(2.0 * w, 8.0), 1024.0))
        for k in range(1, n_uniform):
            pts.add(lo + span * k / n_uniform)
        return sorted(pts)

    def log_angular_sph2(self, rho: float) -> float:
        """log of integral over sector angles of sph(f)^2 at radius rho."""
        key = float(rho)
        hit = self._g_cache.get(key)
        if hit is not None:
            return hit
        lo, hi = self.sector.alpha, self.sector.beta

        def integrand(theta: np.ndarray) -> np.ndarray:
            z = rho * np.exp(1j * theta)
            return 2.0 * self.fmap.log_sph(z)

        res = log_quad(
            integrand, lo, hi,
            breakpoints=self._angular_breakpoints(rho, lo, hi),
            rel_tol=self.rel_tol, max_evals=self.angular_cap,
        )
        if not res.converged:
            self.unconverged_angular += 1
        self._g_cache[key] = res.log_value
        return res.log_value

    # -- radial reductions ---------------------------------------------------

    def _radial_breakpoints(self, r: float) -> list[float]:
        pts = [r * 0.5] if r < 0.3 else [0.29289321881345254]  # 1 - 2^{-1/2}
        i = 2.0
        while True:
            i += 1.0
            p = 1.0 - 2.0 ** (-i * _MASTER_I_STEP)
            if p >= r:
                break
            pts.append(p)
        return pts

    def spherical_area(self, t: float) -> float:
        """log S(t); S(t) = (1/pi) int_0^t g(rho) rho drho."""
        self._check_radius(t)

        def integrand(rho: np.ndarray) -> np.ndarray:
            out = np.empty_like(rho)
            for i, p in enumerate(rho):
                out[i] = self.log_angular_sph2(float(p)) + math.log(p)
            return out

        res = log_quad(
            integrand, 0.0, t,
            breakpoints=self._radial_breakpoints(t),
            rel_tol=self.rel_tol, max_evals=self.radial_cap,
        )
        if not res.converged:
            self.unconverged_radial += 1
        return res.log_value - LOG_PI

    def shimizu_t0(self, r: float) -> float:
        """log T_0(r); T_0(r) = (1/pi) int_0^r g(rho) rho log(r/rho) drho."""
        self._check_radius(r)

        def integrand(rho: np.ndarray) -> np.ndarray:
            out = np.empty_like(rho)
            for i, p in enumerate(rho):
                kernel = math.log(r / p)
                if kernel <= 0.0:
                    out[i] = NEG_INF
                    continue
                out[i] = (
                    self.log_angular_sph2(float(p))
                    + math.log(p)
                    + math.log(kernel)
                )
            return out

        res = log_quad(
            integrand, 0.0, r,
            breakpoints=self._radial_breakpoints(r),
            rel_tol=self.rel_tol, max_evals=self.radial_cap,
        )
        if not res.converged:
            self.unconverged_radial += 1
        return res.log_value - LOG_PI

    # -- circle integrals -----------------------------------------------------

    def nevanlinna_t(self, r: float) -> float:
        """log T(r); T(r) = (1/2pi) int_0^{2pi} log^+ |f(r e^{i th})| dth.

        Defined on the full circle regardless of the engine's sector (the
        proximity form for analytic functions, no counting term).
        """
        self._check_radius(r)
        lo, hi = 0.0, 2.0 * math.pi

        def integrand(theta: np.ndarray) -> np.ndarray:
            z = r * np.exp(1j * theta)
            L = self.fmap.log_abs(z)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(L > 0.0, np.log(np.maximum(L, 1e-300)), NEG_INF)
            return out

        res = log_quad(
            integrand, lo, hi,
            breakpoints=self._angular_breakpoints(r, lo, hi),
            rel_tol=self.rel_tol, max_evals=self.angular_cap,
        )
        if not res.converged:
            self.unconverged_angular += 1
        return res.log_value - LOG_2PI

    def proximity_derivative_ratio(self, r: float, k: int) -> float:
        """log m(r, f^(k)/f), the proximity function of the ratio."""
        self._check_radius(r)
        ratio = RatioDerivMap(self.fmap, k)
        lo, hi = 0.0, 2.0 * math.pi

        def integrand(theta: np.ndarray) -> np.ndarray:
            z = r * np.exp(1j * theta)
            L = ratio.log_abs(z)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(L > 0.0, np.log(np.maximum(L, 1e-300)), NEG_INF)

        res = log_quad(
            integrand, lo, hi,
            breakpoints=self._angular_breakpoints(r, lo, hi),
            rel_tol=max(self.rel_tol, 1e-6), max_evals=4096,
        )
        return res.log_value - LOG_2PI

    def max_modulus(self, r: float, restrict_sector: bool = False):
        """(log M, argmax theta) on the circle |z| = r (or the sector arc)."""
        self._check_radius(r)
        if restrict_sector and not self.sector.is_full_disc:
            lo, hi = self.sector.alpha, self.sector.beta
        else:
            lo, hi = 0.0, 2.0 * math.pi
        w = self.fmap.winding_scale(r)
        n = int(min(max(8.0 * w, 64.0), 4096.0))
        grid = np.linspace(lo, hi, n, endpoint=False)
        extra = [
            th for th in self._angular_breakpoints(r, lo, hi)
        ]
        thetas = np.unique(np.concatenate([grid, np.array(extra)])) if extra else grid
        L = self.fmap.log_abs(r * np.exp(1j * thetas))
        order = np.argsort(L)[::-1]
        best_val, best_th = -math.inf, thetas[order[0]]
        seen = []
        for idx in order[:6]:
            th = thetas[idx]
            if any(abs(th - s) < (hi - lo) / n * 1.5 for s in seen):
                continue
            seen.append(th)
            i = int(np.searchsorted(thetas, th))
            a = thetas[i - 1] if i > 0 else th - (hi - lo) / n
            b = thetas[i + 1] if i + 1 < len(thetas) else th + (hi - lo) / n
            va, vb = self._golden_max(r, a, b)
            if va > best_val:
                best_val, best_th = va, vb
        return best_val, best_th

    def _golden_max(self, r: float, a: float, b: float):
        phi = (math.sqrt(5.0) - 1.0) / 2.0

        def f(th):
            return float(self.fmap.log_abs(np.array([r * np.exp(1j * th)]))[0])

        x1 = b - phi * (b - a)
        x2 = a + phi * (b - a)
        f1, f2 = f(x1), f(x2)
        for _ in range(70):
            if f1 < f2:
                a, x1, f1 = x1, x2, f2
                x2 = a + phi * (b - a)
                f2 = f(x2)
            else:
                b, x2, f2 = x2, x1, f1
                x1 = b - phi * (b - a)
                f1 = f(x1)
        th = 0.5 * (a + b)
        return f(th), th

    @staticmethod
    def _check_radius(r: float):
        if not (0.0 < r < 1.0):
            raise ValueError(f"radius must lie in (0, 1), got {r}")


_KIND_BUILDERS = {
    "T0": lambda eng, r: eng.shimizu_t0(r),
    "S": lambda eng, r: eng.spherical_area(r),
    "T": lambda eng, r: eng.nevanlinna_t(r),
    "M": lambda eng, r: eng.max_modulus(r)[0],
}


def build_curve(
    fmap: AnalyticMap,
    sector: Sector,
    kind: str,
    radii,
    *,
    rel_tol: float = 1e-7,
    angular_cap: int = 1 << 16,
    radial_cap: int = 1 << 12,
    seed_panels: int | None = None,
    monotone_slack: float = 1e-3,
    engine: CharacteristicEngine | None = None,
) -> GrowthCurve:
    """Characteristic curve of the given kind along increasing radii.

    Values are natural logs of the characteristic. The T_0, S, T, and M
    characteristics are nondecreasing in r; a decrease beyond monotone_slack
    (in log units) aborts, smaller wiggles are quadrature noise and recorded.
    """
    if kind not in _KIND_BUILDERS:
        raise ValueError(f"unknown curve kind {kind!r}")
    eng = engine or CharacteristicEngine(
        fmap, sector, rel_tol=rel_tol,
        angular_cap=angular_cap, radial_cap=radial_cap,
        seed_panels=seed_panels,
    )
    radii = np.asarray(radii, dtype=float)
    vals = np.array([_KIND_BUILDERS[kind](eng, float(r)) for r in radii])
    curve = GrowthCurve(kind, radii, vals, True, sector,
                        meta={"function": fmap.name,
                              "unconverged_angular": eng.unconverged_angular,
                              "unconverged_radial": eng.unconverged_radial})
    bad = curve.monotone_violation()
    if bad > monotone_slack:
        raise CurveInvariantError(
            f"{kind} curve of {fmap.name} decreases by {bad:.3g} in log units"
        )
    curve.meta["monotone_violation"] = bad
    return curve


def classify_growth(curve: GrowthCurve) -> tuple[GrowthClass, dict]:
    """Bounded / non-admissible / admissible heuristic on a T-type curve.

    Bounded: plain value varies by under 1% over the last decade of 1 - r.
    Admissible: value / log(1/(1-r)) grows at least 8x over the last three
    decades of 1 - r, monotonically up to small dips. Otherwise
    non-admissible. The three-decade window matters: a characteristic of
    order rho in 1/(1-r) gains only about rho * 6.9 - log-correction in the
    log ratio across it, so narrower windows would misread small orders.
    """
    v = curve.values if curve.log_scale else _safe_log(curve.values)
    r = curve.radii
    keep = r >= 0.3
    v, r = v[keep], r[keep]
    if len(r) < 8:
        raise ValueError("classification needs at least 8 samples with r >= 0.3")
    if np.max(r) < 1.0 - 1e-3 + 1e-12:
        raise ValueError("classification needs samples reaching r >= 1 - 1e-3")

    diag: dict = {}
    if not np.any(np.isfinite(v)):
        return GrowthClass.BOUNDED, {"reason": "identically zero"}

    tail = (1.0 - r) <= 10.0 * (1.0 - r[-1])
    vt = v[tail]
    vt_f = vt[np.isfinite(vt)]
    if vt_f.size >= 2:
        swing = float(np.max(vt_f) - np.min(vt_f))
    else:
        swing = 0.0
    diag["tail_log_swing"] = swing
    if swing < math.log(1.01) and np.all(np.isfinite(vt)):
        return GrowthClass.BOUNDED, diag

    window = ((1.0 - r) <= 1000.0 * (1.0 - r[-1])) & (r >= 0.5)
    L = -np.log1p(-r[window])
    w = v[window] - np.log(L)
    w_f = w[np.isfinite(w)]
    if w_f.size < 4:
        return GrowthClass.NON_ADMISSIBLE, diag
    growth = float(w_f[-1] - w_f[0])
    run_max = np.maximum.accumulate(w_f)
    dips = float(np.max(run_max - w_f))
    diag["ratio_growth_log"] = growth
    diag["ratio_max_dip"] = dips
    if growth >= math.log(8.0) and dips <= max(0.25, 0.15 * growth):
        return GrowthClass.ADMISSIBLE, diag
    return GrowthClass.NON_ADMISSIBLE, diag


def _safe_log(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(x, 0.0))
