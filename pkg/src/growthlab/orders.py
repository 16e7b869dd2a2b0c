"""[p, q]-order and type estimation from characteristic curves.

The [p, q]-order of a growth curve is the limsup (or liminf) of
log_p^+(value) / log_q(1/(1-r)) as r -> 1. On a finite radius grid the raw
ratio at the deepest sample is a poor estimate: for every closed-form family
in the zoo the ratio approaches its limit like sigma + c / log_q(1/(1-r)), so
the estimator extrapolates. It fits the tail of the running-extrema envelope
linearly against x = 1/log_q(1/(1-r)) and reports the intercept, which is
exact for the sigma + c/x model.

Max-modulus curves measure the same order with the numerator one log level
deeper (log_{p+1}^+ M against log_q); the estimator applies the bump when the
curve kind is "M".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .characteristics import GrowthCurve
from .sectors import iterated_log_plus_from_log, scale_log

# tail-window and robustness knobs
TAIL_FRACTION = 0.5
TAIL_MIN_POINTS = 6
ENVELOPE_MIN_POINTS = 4
DEN_FLOOR = 0.1
INFINITE_SLOPE_PER_DECADE = 0.5
INFINITE_MIN_RISE = 0.3


@dataclass
class OrderEstimate:
    p: int
    q: int
    mode: str  # "limsup" | "liminf"
    value: float
    infinite: bool
    window: tuple[float, float]
    n_points: int
    slope: float
    fallback_plain_fit: bool
    radii: np.ndarray = field(repr=False)
    ratios: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "mode": self.mode,
            "value": self.value,
            "infinite_flag": self.infinite,
            "window": list(self.window),
            "n_points": self.n_points,
            "slope": self.slope,
            "fallback_plain_fit": self.fallback_plain_fit,
            "ratios": [
                {"r": float(r), "ratio": float(y)}
                for r, y in zip(self.radii, self.ratios)
            ],
        }


@dataclass
class TypeEstimate:
    p: int
    q: int
    rho: float
    log_value: float
    value: float
    window: tuple[float, float]
    n_points: int


def ratio_sequence(curve: GrowthCurve, p: int, q: int):
    """(radii, ratios, denominators) of the [p, q] ratio along the curve.

    Curves are stored as natural logs of the characteristic, so the first
    log^+ iterate is taken directly from the stored value (overflow-immune).
    """
    if p < 1 or q < 1:
        raise ValueError("orders are defined for p >= 1, q >= 1")
    p_eff = p + 1 if curve.kind == "M" else p
    v = curve.values if curve.log_scale else _log_or_neg_inf(curve.values)
    num = np.array([iterated_log_plus_from_log(p_eff, x) for x in v])
    den = np.array([scale_log(q, r) for r in curve.radii])
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), np.nan)
    return curve.radii, y, den


def pq_order(
    curve: GrowthCurve,
    p: int,
    q: int,
    mode: str = "limsup",
    n_tail: int | None = None,
) -> OrderEstimate:
    """Extrapolated [p, q]-order of the curve, limsup or liminf flavour."""
    if mode not in ("limsup", "liminf"):
        raise ValueError("mode must be 'limsup' or 'liminf'")
    radii, y, den = ratio_sequence(curve, p, q)
    usable = np.isfinite(y) & (den > DEN_FLOOR)
    r_u, y_u, den_u = radii[usable], y[usable], den[usable]
    if len(r_u) < ENVELOPE_MIN_POINTS:
        raise ValueError(
            f"need at least {ENVELOPE_MIN_POINTS} usable samples, got {len(r_u)}"
        )

    if n_tail is None:
        n_tail = max(TAIL_MIN_POINTS, int(len(r_u) * TAIL_FRACTION))
    n_tail = min(n_tail, len(r_u))

    # envelope of oscillation witnesses: local maxima for limsup, local
    # minima for liminf. A monotone ratio sequence has no interior extrema;
    # the estimator then falls back to fitting every tail point, which is the
    # correct thing for regular curves (their limsup and liminf agree).
    env_full = _local_extrema_mask(y_u, mode)
    r_t, y_t, den_t = r_u[-n_tail:], y_u[-n_tail:], den_u[-n_tail:]
    env = env_full[-n_tail:]
    fallback = int(env.sum()) < ENVELOPE_MIN_POINTS
    pick = np.ones_like(env) if fallback else env

    x = 1.0 / den_t[pick]
    yy = y_t[pick]
    a, b = _line_fit(x, yy)

    # divergence probe: ratio trend against decades of approach to the circle
    decades = np.log10(1.0 / (1.0 - r_t))
    slope_dec, rise = _trend(decades, y_t)
    increasing_steps = np.mean(np.diff(y_t) > 0.0) if len(y_t) > 1 else 0.0
    infinite = bool(
        mode == "limsup"
        and slope_dec > INFINITE_SLOPE_PER_DECADE
        and rise > INFINITE_MIN_RISE
        and increasing_steps >= 0.7
    )

    value = math.inf if infinite else float(a)
    return OrderEstimate(
        p=p,
        q=q,
        mode=mode,
        value=value,
        infinite=infinite,
        window=(float(r_t[0]), float(r_t[-1])),
        n_points=int(pick.sum()),
        slope=float(b),
        fallback_plain_fit=fallback,
        radii=r_t,
        ratios=y_t,
    )


def order_interval(
    curve: GrowthCurve, p: int, q: int, n_tail: int | None = None
) -> tuple[OrderEstimate, OrderEstimate]:
    """(liminf, limsup) order pair; the lower one is clamped to the upper.

    The clamp keeps fit noise from inverting the defining inequality
    liminf <= limsup on nearly-regular curves where both fits land within
    noise of each other.
    """
    hi = pq_order(curve, p, q, mode="limsup", n_tail=n_tail)
    lo = pq_order(curve, p, q, mode="liminf", n_tail=n_tail)
    if not hi.infinite and lo.value > hi.value:
        lo.value = hi.value
    if hi.infinite:
        lo.infinite = lo.infinite and hi.infinite
    return lo, hi


def pq_type(
    curve: GrowthCurve,
    rho: float,
    p: int = 1,
    q: int = 1,
    n_tail: int | None = None,
) -> TypeEstimate:
    """[p, q]-type at order rho: tail median of log_{p-1}^+(value) scaled by
    the rho-th power of log_{q-1}(1/(1-r)), computed in logs throughout."""
    if p < 1 or q < 1:
        raise ValueError("type is defined for p >= 1, q >= 1")
    if not (0.0 < rho < math.inf):
        raise ValueError("type needs a finite positive order")
    v = curve.values if curve.log_scale else _log_or_neg_inf(curve.values)
    log_num = np.empty_like(v)
    for i, x in enumerate(v):
        if p == 1:
            log_num[i] = x  # log_0^+ of the value is the value itself
        else:
            t = iterated_log_plus_from_log(p - 1, x)
            log_num[i] = math.log(t) if t > 0.0 else -math.inf
    log_den_base = np.empty_like(v)
    for i, r in enumerate(curve.radii):
        if q == 1:
            log_den_base[i] = -math.log1p(-r)  # log of 1/(1-r)
        else:
            s = scale_log(q - 1, r)
            log_den_base[i] = math.log(s) if s > 0.0 else math.nan
    log_t = log_num - rho * log_den_base

    usable = np.isfinite(log_t)
    lt = log_t[usable]
    rr = curve.radii[usable]
    if len(lt) < ENVELOPE_MIN_POINTS:
        raise ValueError("too few usable samples for a type estimate")
    if n_tail is None:
        n_tail = max(TAIL_MIN_POINTS, int(len(lt) * TAIL_FRACTION))
    n_tail = min(n_tail, len(lt))
    tail = lt[-n_tail:]
    log_value = float(np.median(tail))
    return TypeEstimate(
        p=p,
        q=q,
        rho=rho,
        log_value=log_value,
        value=float(math.exp(log_value)) if log_value < 700.0 else math.inf,
        window=(float(rr[-n_tail]), float(rr[-1])),
        n_points=n_tail,
    )


def _local_extrema_mask(y: np.ndarray, mode: str) -> np.ndarray:
    """Interior local maxima (limsup) or minima (liminf), plus a trailing
    point that is still heading toward the extreme."""
    n = len(y)
    mask = np.zeros(n, dtype=bool)
    if n < 3:
        return mask
    if mode == "limsup":
        mask[1:-1] = (y[1:-1] >= y[:-2]) & (y[1:-1] >= y[2:])
        if y[-1] >= y[-2]:
            mask[-1] = True
    else:
        mask[1:-1] = (y[1:-1] <= y[:-2]) & (y[1:-1] <= y[2:])
        if y[-1] <= y[-2]:
            mask[-1] = True
    return mask


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares a + b x; degenerate spreads collapse to the mean."""
    if len(x) == 1 or float(np.ptp(x)) < 1e-12:
        return float(np.mean(y)), 0.0
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(coef[1])


def _trend(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    a, b = _line_fit(x, y)
    return b, float(y[-1] - y[0])


def _log_or_neg_inf(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(np.asarray(x, dtype=float), 0.0))
