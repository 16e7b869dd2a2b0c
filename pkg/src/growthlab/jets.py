"""Truncated complex Taylor series with an explicit magnitude offset.

A Jet holds coefficients c[0..order] and a real offset m, representing
    sum_n c[n] h^n    scaled by    exp(m),
h being the local expansion variable. The offset lets series of functions
whose values overflow double range (log-modulus up to ~1e300) stay
representable: coefficients are kept near unit scale and the magnitude lives
in m. Arithmetic follows standard power-series recurrences; pow/exp/log use
the differential-equation recurrences (Miller's method for powers).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .logscale import NEG_INF, LogComplex

_NORMALIZE_THRESHOLD = 1e100


class Jet:
    __slots__ = ("coeffs", "offset")

    def __init__(self, coeffs, offset: float = 0.0):
        self.coeffs = np.asarray(coeffs, dtype=np.complex128)
        self.offset = float(offset)

    # -- constructors --------------------------------------------------

    @staticmethod
    def constant(value: complex, order: int, offset: float = 0.0) -> "Jet":
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = value
        return Jet(c, offset)

    @staticmethod
    def affine(c0: complex, c1: complex, order: int) -> "Jet":
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = c0
        if order >= 1:
            c[1] = c1
        return Jet(c)

    # -- basic queries --------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def value0(self) -> LogComplex:
        """Value at h = 0 as a LogComplex."""
        c0 = self.coeffs[0]
        if c0 == 0:
            return LogComplex.zero()
        return LogComplex(math.log(abs(c0)) + self.offset, cmath.phase(c0))

    def plain(self) -> np.ndarray:
        """Coefficients with the offset folded in; may overflow to inf."""
        return self.coeffs * math.exp(self.offset) if self.offset != 0.0 else self.coeffs.copy()

    def coeff(self, i: int) -> LogComplex:
        """i-th Taylor coefficient as a LogComplex (offset folded in)."""
        c = self.coeffs[i] if i <= self.order else 0j
        if c == 0:
            return LogComplex.zero()
        return LogComplex(math.log(abs(c)) + self.offset, cmath.phase(c))

    def normalized(self) -> "Jet":
        m = float(np.max(np.abs(self.coeffs)))
        if m == 0.0 or 1e-50 < m < 1e50:
            return self
        lm = math.log(m)
        return Jet(self.coeffs * math.exp(-lm), self.offset + lm)

    def truncate(self, order: int) -> "Jet":
        return Jet(self.coeffs[: order + 1], self.offset)

    # -- ring operations -------------------------------------------------

    def _aligned(self, other: "Jet"):
        d = other.offset - self.offset
        if d >= 0:
            return self.coeffs * math.exp(-d) if d > 0 else self.coeffs, other.coeffs, other.offset
        return self.coeffs, other.coeffs * math.exp(d), self.offset

    def __add__(self, other) -> "Jet":
        o = _as_jet(other, self.order)
        n = min(self.order, o.order)
        a, b, off = self._aligned(o)
        return Jet(a[: n + 1] + b[: n + 1], off)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        o = _as_jet(other, self.order)
        n = min(self.order, o.order)
        a, b, off = self._aligned(o)
        return Jet(a[: n + 1] - b[: n + 1], off)

    def __rsub__(self, other) -> "Jet":
        return _as_jet(other, self.order).__sub__(self)

    def __neg__(self) -> "Jet":
        return Jet(-self.coeffs, self.offset)

    def __mul__(self, other) -> "Jet":
        if isinstance(other, (int, float, complex)):
            return Jet(self.coeffs * other, self.offset)
        n = min(self.order, other.order)
        c = np.convolve(self.coeffs[: n + 1], other.coeffs[: n + 1])[: n + 1]
        return Jet(c, self.offset + other.offset).normalized()

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        b = self.coeffs
        if b[0] == 0:
            raise ZeroDivisionError("reciprocal of a jet with zero constant term")
        n = self.order
        r = np.zeros(n + 1, dtype=np.complex128)
        r[0] = 1.0 / b[0]
        for m in range(1, n + 1):
            r[m] = -r[0] * np.dot(b[1 : m + 1], r[m - 1 :: -1][: m])
        return Jet(r, -self.offset).normalized()

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, (int, float, complex)):
            return Jet(self.coeffs / other, self.offset)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return _as_jet(other, self.order) * self.reciprocal()

    # -- transcendental operations ----------------------------------------

    def pow_real(self, a: float) -> "Jet":
        """Principal branch of self**a (a real), by Miller's recurrence."""
        b = self.coeffs
        if b[0] == 0:
            raise ZeroDivisionError("pow of a jet with zero constant term")
        n = self.order
        g = np.zeros(n + 1, dtype=np.complex128)
        g[0] = cmath.exp(a * cmath.log(b[0]))
        for m in range(1, n + 1):
            k = np.arange(1, m + 1)
            w = (a * k - (m - k)) * b[1 : m + 1]
            g[m] = np.dot(w, g[m - 1 :: -1][: m]) / (m * b[0])
        return Jet(g, a * self.offset).normalized()

    def sqrt(self) -> "Jet":
        return self.pow_real(0.5)

    def exp(self) -> "Jet":
        """exp(self); the result offset absorbs the real part of the value.

        Requires the plain value at h = 0 (log-magnitude of self below ~700);
        beyond that the *result's* log-modulus would overflow double range.
        """
        if self.coeffs[0] != 0 and math.log(abs(self.coeffs[0])) + self.offset > 700.0:
            raise OverflowError("exp argument exceeds double log-range")
        scale = math.exp(self.offset) if self.offset != 0.0 else 1.0
        t = self.coeffs * scale
        if self.order >= 1 and float(np.max(np.abs(t[1:]))) > 1e8:
            raise OverflowError("exp tail too large; rescale the variable first")
        g0 = complex(t[0])
        n = self.order
        e = np.zeros(n + 1, dtype=np.complex128)
        e[0] = cmath.exp(1j * g0.imag)
        k = np.arange(n + 1)
        kt = k * t
        for m in range(1, n + 1):
            e[m] = np.dot(kt[1 : m + 1], e[m - 1 :: -1][: m]) / m
        return Jet(e, g0.real).normalized()

    def log(self) -> "Jet":
        """Principal log of the constant term plus the series log of the tail."""
        b = self.coeffs
        if b[0] == 0:
            raise ZeroDivisionError("log of a jet with zero constant term")
        n = self.order
        u = b / b[0]
        ell = np.zeros(n + 1, dtype=np.complex128)
        ell[0] = cmath.log(b[0]) + self.offset
        for m in range(1, n + 1):
            acc = u[m]
            if m > 1:
                k = np.arange(1, m)
                acc -= np.dot(k * ell[1:m], u[m - 1 : 0 : -1]) / m
            ell[m] = acc
        return Jet(ell)

    # -- calculus ----------------------------------------------------------

    def derivative(self) -> "Jet":
        if self.order == 0:
            return Jet(np.zeros(1, dtype=np.complex128), self.offset)
        n = np.arange(1, self.order + 1)
        return Jet(self.coeffs[1:] * n, self.offset)

    def scale_var(self, lam: complex) -> "Jet":
        """Reparametrize h -> lam*h' (series in the new variable h')."""
        p = lam ** np.arange(self.order + 1)
        return Jet(self.coeffs * p, self.offset).normalized()

    def shift(self, h0: complex) -> "Jet":
        """Re-center the expansion at h0: series in h' = h - h0.

        Accurate only while |h0| stays within the series' convergence
        behaviour; Horner form keeps the binomial sums stable.
        """
        n = self.order
        out = np.zeros(n + 1, dtype=np.complex128)
        out[0] = self.coeffs[n]
        for m in range(n - 1, -1, -1):
            hi = min(n - m, n)
            out[1 : hi + 1] = out[1 : hi + 1] * h0 + out[0:hi]
            out[0] = out[0] * h0 + self.coeffs[m]
        return Jet(out, self.offset).normalized()

    def eval(self, h: complex) -> LogComplex:
        """Horner evaluation; returns the value as LogComplex."""
        acc = 0j
        for c in self.coeffs[::-1]:
            acc = acc * h + c
        if acc == 0:
            return LogComplex.zero()
        return LogComplex(math.log(abs(acc)) + self.offset, cmath.phase(acc))

    def derivatives(self, upto: int | None = None) -> list[LogComplex]:
        """Derivative values j! * c[j] at h = 0 as LogComplex, j = 0..upto."""
        upto = self.order if upto is None else min(upto, self.order)
        out = []
        fact = 1.0
        for j in range(upto + 1):
            if j > 0:
                fact *= j
            c = self.coeffs[j]
            if c == 0:
                out.append(LogComplex.zero())
            else:
                out.append(
                    LogComplex(math.log(abs(c)) + math.log(fact) + self.offset, cmath.phase(c))
                )
        return out


def _as_jet(x, order: int) -> Jet:
    if isinstance(x, Jet):
        return x
    return Jet.constant(complex(x), order)


def compose(outer: Jet, inner: Jet) -> Jet:
    """outer(inner(h)) for an inner jet with zero constant term.

    outer is a series in w - w0 where w0 was the expansion point used to
    build it; inner must be the series of w(h) - w0 (constant term 0).
    """
    if inner.coeffs[0] != 0:
        raise ValueError("compose requires inner constant term 0")
    n = min(outer.order, inner.order)
    inner = inner.truncate(n)
    acc = Jet.constant(0j, n)
    for c in outer.coeffs[n::-1]:
        acc = (acc * inner) + c
    return Jet(acc.coeffs, acc.offset + outer.offset).normalized()
