"""Sectors of the unit disc and the iterated-log scale used for growth orders.

A sector is the set {z : 0 < |z| < 1, alpha < arg z < beta}. Angles are kept
as given (beta may exceed 2*pi when the sector straddles the positive real
axis); membership tests reduce arguments modulo 2*pi into [alpha, alpha+2*pi).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


class GrowthClass(enum.Enum):
    BOUNDED = "bounded"
    NON_ADMISSIBLE = "non_admissible"
    ADMISSIBLE = "admissible"


@dataclass(frozen=True)
class Sector:
    """Angular sector of the unit disc, alpha < arg z < beta.

    Requires 0 < beta - alpha <= 2*pi. The full span 2*pi is the degenerate
    case standing in for the whole punctured disc; characteristic integrals
    accept it, the conformal map does not.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        span = self.beta - self.alpha
        if not (0.0 < span <= TWO_PI + 1e-12):
            raise ValueError(f"sector span must lie in (0, 2*pi], got {span}")

    @property
    def span(self) -> float:
        return self.beta - self.alpha

    @property
    def bisector(self) -> float:
        """Central direction theta_0 = (alpha + beta) / 2."""
        return 0.5 * (self.alpha + self.beta)

    @property
    def half_opening(self) -> float:
        """Half opening delta = (beta - alpha) / 2."""
        return 0.5 * (self.beta - self.alpha)

    @property
    def is_full_disc(self) -> bool:
        return self.span >= TWO_PI - 1e-12

    def shrink(self, epsilon: float) -> "Sector":
        """Sub-sector (alpha + eps, beta - eps); requires 0 < eps < half opening."""
        if not (0.0 < epsilon < self.half_opening):
            raise ValueError(
                f"epsilon must lie in (0, {self.half_opening}), got {epsilon}"
            )
        return Sector(self.alpha + epsilon, self.beta - epsilon)

    def contains(self, z: complex, radius: float = 1.0) -> bool:
        """Membership of z in the sector truncated to |z| < radius."""
        r = abs(z)
        if not (0.0 < r < radius):
            return False
        if self.is_full_disc:
            return True
        theta = math.atan2(z.imag, z.real)
        rel = (theta - self.alpha) % TWO_PI
        return 0.0 < rel < self.span

    def angle_inside(self, theta: float) -> bool:
        if self.is_full_disc:
            return True
        rel = (theta - self.alpha) % TWO_PI
        return 0.0 < rel < self.span


def log_plus(x: float) -> float:
    """log^+ x = max(0, log x); zero for x <= 1 (including x <= 0)."""
    if x <= 1.0:
        return 0.0
    return math.log(x)


def iterated_log_plus(p: int, x: float) -> float:
    """log_p^+ x: p-fold iterate of log^+, with log_0^+ x = max(0, x).

    The p = 0 convention truncates at zero so the value is usable as an
    argument to further log^+ iterations and as a numerator in ratios.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    v = max(0.0, x)
    for _ in range(p):
        v = log_plus(v)
    return v


def iterated_exp(p: int, x: float) -> float:
    """exp_p x: p-fold iterate of exp, with exp_0 x = x. Returns inf on overflow."""
    if p < 0:
        raise ValueError("p must be >= 0")
    v = x
    for _ in range(p):
        if v > 709.0:
            return math.inf
        v = math.exp(v)
    return v


def iterated_log_plus_from_log(p: int, log_x: float) -> float:
    """log_p^+ of a value given by its natural log; p >= 1.

    Equivalent to iterated_log_plus(p, exp(log_x)) but immune to overflow of
    the plain value. log_x = -inf (value 0) gives 0.
    """
    if p < 1:
        raise ValueError("p must be >= 1 when starting from a log")
    v = max(0.0, log_x)
    for _ in range(p - 1):
        v = log_plus(v)
    return v


def scale_log(q: int, r: float) -> float:
    """Denominator scale log_q(1/(1-r)) of the order definitions; q >= 1.

    q = 1 is the plain log; higher q iterates log without the positive-part
    truncation (radii of interest make the inner values > 1 anyway), with a
    floor at tiny positive values to keep ratios well defined near r = 0.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if not (0.0 <= r < 1.0):
        raise ValueError(f"radius must lie in [0, 1), got {r}")
    v = -math.log1p(-r)
    for _ in range(q - 1):
        v = math.log(max(v, 1e-300))
    return v
