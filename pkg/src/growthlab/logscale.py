"""Extended-range complex scalars stored as (log magnitude, phase).

Characteristic values here routinely exceed double range (modulus like
exp((1-r)^-2) near r = 1), so every quantity that can blow up is carried as
its natural log. LogComplex is the scalar form: value = exp(log_abs + i*phase)
with log_abs = -inf representing zero.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

NEG_INF = float("-inf")
MAX_EXP = 700.0


def log1p_exp(x: float) -> float:
    """log(1 + e^x), stable for both signs of x."""
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def log_add(a: float, b: float) -> float:
    """log(e^a + e^b)."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def log_sub(a: float, b: float) -> float:
    """log(e^a - e^b), requires a >= b; returns -inf on exact cancellation."""
    if b == NEG_INF:
        return a
    if b > a:
        raise ValueError("log_sub requires a >= b")
    d = b - a
    if d >= 0.0:
        return NEG_INF
    return a + math.log1p(-math.exp(d))


@dataclass(frozen=True)
class LogComplex:
    """Complex number exp(log_abs) * exp(i*phase); log_abs = -inf is zero."""

    log_abs: float
    phase: float = 0.0

    @staticmethod
    def zero() -> "LogComplex":
        return LogComplex(NEG_INF, 0.0)

    @staticmethod
    def one() -> "LogComplex":
        return LogComplex(0.0, 0.0)

    @staticmethod
    def from_complex(z: complex) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return LogComplex(NEG_INF, 0.0)
        return LogComplex(math.log(abs(z)), cmath.phase(z))

    @property
    def is_zero(self) -> bool:
        return self.log_abs == NEG_INF

    def to_complex(self) -> complex:
        """Plain complex value; overflows to inf-magnitude past double range."""
        if self.is_zero:
            return 0j
        if self.log_abs > MAX_EXP:
            m = math.inf
        else:
            m = math.exp(self.log_abs)
        return complex(m * math.cos(self.phase), m * math.sin(self.phase))

    def __mul__(self, other: "LogComplex | complex | float") -> "LogComplex":
        o = _coerce(other)
        if self.is_zero or o.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_abs + o.log_abs, _wrap(self.phase + o.phase))

    __rmul__ = __mul__

    def __truediv__(self, other: "LogComplex | complex | float") -> "LogComplex":
        o = _coerce(other)
        if o.is_zero:
            raise ZeroDivisionError("division by LogComplex zero")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_abs - o.log_abs, _wrap(self.phase - o.phase))

    def __neg__(self) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.log_abs, _wrap(self.phase + math.pi))

    def __add__(self, other: "LogComplex | complex | float") -> "LogComplex":
        o = _coerce(other)
        if self.is_zero:
            return o
        if o.is_zero:
            return self
        hi, lo = (self, o) if self.log_abs >= o.log_abs else (o, self)
        # |lo/hi| <= 1, so the correction factor is a plain complex near 1
        ratio = cmath.exp(complex(lo.log_abs - hi.log_abs, lo.phase - hi.phase))
        s = 1.0 + ratio
        if s == 0:
            return LogComplex.zero()
        return LogComplex(hi.log_abs + math.log(abs(s)), _wrap(hi.phase + cmath.phase(s)))

    def __sub__(self, other: "LogComplex | complex | float") -> "LogComplex":
        return self.__add__(-_coerce(other))

    def pow_real(self, c: float) -> "LogComplex":
        """Principal power: exp(c * (log_abs + i*phase))."""
        if self.is_zero:
            if c <= 0:
                raise ZeroDivisionError("0 to a nonpositive power")
            return LogComplex.zero()
        return LogComplex(c * self.log_abs, _wrap(c * self.phase))

    def conj(self) -> "LogComplex":
        return LogComplex(self.log_abs, -self.phase)


def _coerce(x) -> LogComplex:
    if isinstance(x, LogComplex):
        return x
    return LogComplex.from_complex(complex(x))


def _wrap(phi: float) -> float:
    """Reduce a phase to (-pi, pi]."""
    if -math.pi < phi <= math.pi:
        return phi
    return math.atan2(math.sin(phi), math.cos(phi))


def log_complex_sum(terms) -> LogComplex:
    """Sum of LogComplex terms, aligned to the dominant magnitude."""
    terms = [t for t in terms if not t.is_zero]
    if not terms:
        return LogComplex.zero()
    top = max(t.log_abs for t in terms)
    acc = 0j
    for t in terms:
        acc += cmath.exp(complex(t.log_abs - top, t.phase))
    if acc == 0:
        return LogComplex.zero()
    return LogComplex(top + math.log(abs(acc)), cmath.phase(acc))
