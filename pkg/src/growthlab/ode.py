"""Linear ODE marching along disc rays, plus sector-to-disc conjugation.

The equation is monic of order k >= 2,

    f^(k) + A_{k-1} f^(k-1) + ... + A_1 f' + A_0 f = 0,

with AnalyticMap coefficients. Solutions of interest grow toward the unit
circle far past double range, so the marcher alternates between two local
representations:

  * direct mode keeps the step-scaled Taylor coefficients of f itself, with
    one shared magnitude offset;
  * ratio mode, entered once log|f| crosses SWITCH_UP, keeps the derivative
    ratios w_j = f^(j)/f and integrates d(log f) alongside. The recurrence
    for the step-scaled ratios W_j = s^j w_j is polynomial and stays near
    unit size no matter how large f is.

Every candidate step must pass three gates before acceptance: the series
tail at the step endpoint falls below tail_target relative to the leading
coefficients, the equation residual at the half step formed with freshly
evaluated coefficient values (not the jets the recurrence consumed) stays
under residual_target of the largest term, and the endpoint derivative
ratios satisfy the same residual bound. A failed gate shrinks the step and
retries, so the step size adapts to the local frequency automatically.

The conjugation half rewrites an equation posed on a sector in the disc
variable of the sector map. chain_rule_table carries the Faa di Bruno
triangle as integer-weighted monomials in V = 1/z'(u) and its derivatives;
transform_to_disc assembles the disc-side coefficients B_j from it.
"""

from __future__ import annotations

import bisect
import cmath
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .conformal import map_jet
from .functions import AnalyticMap
from .jets import Jet, compose
from .logscale import NEG_INF, LogComplex, log1p_exp, log_complex_sum
from .sectors import Sector

SERIES_ORDER = 20
TAIL_TARGET = 1e-12
RESIDUAL_TARGET = 1e-9
NODE_RESIDUAL_FACTOR = 20.0
SWITCH_UP = 50.0
SWITCH_DOWN = 20.0
MAX_STEP = 0.1
BOUNDARY_FRACTION = 0.25
SINGULAR_FRACTION = 0.5
FREQ_SAFETY = 0.25
SHRINK = 0.35
MAX_RETRIES = 14
MAX_STEPS = 100_000
TABLE_CAP = 12
DEFAULT_SEED_RADIUS = 0.1


class OdeError(RuntimeError):
    pass


class _StepReject(Exception):
    pass


# ---------------------------------------------------------------------------
# equations


@dataclass(frozen=True)
class LinearOde:
    """Monic equation f^(k) + A_{k-1} f^(k-1) + ... + A_0 f = 0.

    coefficients holds A_0 .. A_{k-1} in ascending derivative order. domain,
    when given, restricts the rays the solver accepts to that sector.
    """

    coefficients: tuple
    domain: Sector | None = None

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if len(self.coefficients) < 2:
            raise ValueError("equation order k must be at least 2")
        for a in self.coefficients:
            if not isinstance(a, AnalyticMap):
                raise TypeError("coefficients must be AnalyticMap instances")

    @property
    def k(self) -> int:
        return len(self.coefficients)

    def singular_distance(self, z0: complex) -> float:
        return min(a.singular_radius(z0) for a in self.coefficients)

    def ray_allowed(self, theta: float) -> bool:
        return self.domain is None or self.domain.angle_inside(theta)


# ---------------------------------------------------------------------------
# step-scaled coefficient data shared by both marching modes


def _falling_tables(k: int, order: int) -> list[np.ndarray]:
    """fall[n][j] = j!/(j-n)! for j = 0..order (zero where j < n)."""
    tables = []
    j = np.arange(order + 1, dtype=float)
    for n in range(k + 1):
        with np.errstate(invalid="ignore"):
            t = np.exp(_lgamma_vec(j + 1.0) - _lgamma_vec(j - n + 1.0))
        t[: n] = 0.0
        tables.append(t)
    return tables


def _lgamma_vec(x: np.ndarray) -> np.ndarray:
    out = np.full(x.shape, math.inf)
    ok = x > 0
    out[ok] = np.vectorize(math.lgamma)(x[ok]) if np.any(ok) else out[ok]
    return out


def _scaled_coefficient_arrays(ode, z0: complex, sigma: float, theta: float,
                               order: int) -> list[np.ndarray]:
    """t_n[i] = s^{k-n} * (i-th jet coefficient of A_n at z0, step-scaled).

    s = sigma * e^{i theta}. The frequency cap keeps every magnitude near or
    below unit size; anything that still escapes rejects the step.
    """
    k = ode.k
    s_c = sigma * cmath.exp(1j * theta)
    lsig = math.log(sigma)
    out = []
    for n, a_map in enumerate(ode.coefficients):
        jet = a_map.jet(z0, order, s_c)
        mag = jet.offset + (k - n) * lsig
        if mag > 60.0:
            raise _StepReject("coefficient magnitude escapes the scaled frame")
        if mag < -320.0:
            out.append(np.zeros(order + 1, dtype=complex))
            continue
        factor = cmath.exp(complex(mag, (k - n) * theta))
        arr = np.asarray(jet.coeffs, dtype=complex) * factor
        if arr.size < order + 1:
            arr = np.pad(arr, (0, order + 1 - arr.size))
        out.append(arr[: order + 1])
    return out


def _fresh_scaled_values(ode, z: complex, sigma: float, theta: float) -> list[complex]:
    """s^{k-n} A_n(z) from direct evaluation, for residual cross-checks."""
    k = ode.k
    lsig = math.log(sigma)
    vals = []
    for n, a_map in enumerate(ode.coefficients):
        v = a_map.value(z)
        mag = v.log_abs + (k - n) * lsig
        if mag > 60.0:
            raise _StepReject("coefficient magnitude escapes at the half step")
        vals.append(0j if mag < -320.0 else cmath.exp(complex(mag, v.phase + (k - n) * theta)))
    return vals


# ---------------------------------------------------------------------------
# ray state and records


@dataclass
class _NodeState:
    t: float
    mode: str
    log_abs: float
    phase: float
    derivs: list | None = None          # direct mode: LogComplex f^(j), j = 0..k-1
    ratios: list | None = None          # ratio mode: LogComplex w_j, j = 1..k-1


@dataclass
class RaySample:
    """Accepted node: position, log f, and the derivative-ratio jet."""

    r: float
    log_abs: float
    phase: float
    ratios: list | None                 # LogComplex w_j = f^(j)/f, j = 1..k; None at a zero of f


@dataclass
class RaySegment:
    t0: float
    t1: float
    sigma: float
    mode: str
    coeffs: np.ndarray                  # direct: scaled Taylor; ratio: log-f increments
    aux: np.ndarray | None              # ratio: W_1 series
    offset: float
    base_log_abs: float
    base_phase: float


@dataclass
class RayValue:
    t: float
    log_abs: float
    phase: float
    dlog_abs: float                     # log|f'|
    dphase: float

    def log_deriv(self) -> complex:
        """f'/f, saturated near the double-precision rim."""
        d = self.dlog_abs - self.log_abs
        if d == NEG_INF or math.isnan(d):
            return 0j
        return cmath.exp(complex(min(d, 700.0), self.dphase - self.phase))

    def log_sph(self) -> float:
        """log of |f'| / (1 + |f|^2)."""
        if self.dlog_abs == NEG_INF:
            return NEG_INF
        return self.dlog_abs - log1p_exp(2.0 * self.log_abs)


@dataclass
class RaySolution:
    """March record along z = t e^{i theta}, queryable at any reached t."""

    theta: float
    k: int
    r_start: float
    segments: list = field(default_factory=list)
    samples: list = field(default_factory=list)
    state: _NodeState | None = None
    meta: dict = field(default_factory=dict)
    _starts: list = field(default_factory=list)

    @property
    def reached(self) -> float:
        return self.state.t if self.state is not None else self.r_start

    def value_at(self, t: float) -> RayValue:
        if t > self.reached * (1.0 + 1e-12) + 1e-15:
            raise OdeError(
                f"ray {self.theta:.6f} marched to t={self.reached:.12g}, asked for {t:.12g}"
            )
        if not self.segments or t < self.segments[0].t0:
            # inside the seed radius the solution is frozen at its seed value
            first = self.samples[0]
            return RayValue(t, first.log_abs, first.phase, NEG_INF, 0.0)
        idx = bisect.bisect_right(self._starts, t) - 1
        idx = min(max(idx, 0), len(self.segments) - 1)
        seg = self.segments[idx]
        return _segment_value(seg, self.theta, t)


def _segment_value(seg: RaySegment, theta: float, t: float) -> RayValue:
    h = (t - seg.t0) / seg.sigma
    h = min(max(h, 0.0), 1.0 + 1e-9)
    poly = np.polynomial.polynomial.polyval
    if seg.mode == "direct":
        v = poly(h, seg.coeffs)
        dv = poly(h, seg.coeffs[1:] * np.arange(1, seg.coeffs.size))
        log_abs = (math.log(abs(v)) + seg.offset) if v != 0 else NEG_INF
        phase = cmath.phase(v)
        if dv == 0:
            return RayValue(t, log_abs, phase, NEG_INF, 0.0)
        dlog = math.log(abs(dv)) + seg.offset - math.log(seg.sigma)
        return RayValue(t, log_abs, phase, dlog, _wrap(cmath.phase(dv) - theta))
    lam = poly(h, seg.coeffs)
    log_abs = seg.base_log_abs + lam.real
    phase = _wrap(seg.base_phase + lam.imag)
    w1 = poly(h, seg.aux)
    if w1 == 0:
        return RayValue(t, log_abs, phase, NEG_INF, 0.0)
    dlog = log_abs + math.log(abs(w1)) - math.log(seg.sigma)
    return RayValue(t, log_abs, phase, dlog, _wrap(phase + cmath.phase(w1) - theta))


def _wrap(x: float) -> float:
    return math.atan2(math.sin(x), math.cos(x))


# ---------------------------------------------------------------------------
# the two step kernels


def _direct_series(tn: list[np.ndarray], c_init: np.ndarray, k: int,
                   order: int, fall: list[np.ndarray]) -> tuple[np.ndarray, list[np.ndarray]]:
    """Scaled Taylor recurrence for f itself; returns coefficients and the
    derivative rows e_n[l] = c[l+n] * (l+n)!/l! used for evaluation."""
    c = np.zeros(order + 1, dtype=complex)
    c[:k] = c_init
    rows = [np.zeros(order + 1, dtype=complex) for _ in range(k + 1)]
    for n in range(k + 1):
        upto = min(order - n, k - 1 - n)
        for l in range(upto + 1):
            rows[n][l] = c[l + n] * fall[n][l + n]
    for m in range(order + 1 - k):
        acc = 0j
        for n in range(k):
            acc += np.dot(tn[n][: m + 1], rows[n][m::-1])
        c[m + k] = -acc * math.exp(math.lgamma(m + 1) - math.lgamma(m + k + 1))
        for n in range(k + 1):
            l = m + k - n
            if 0 <= l <= order - n:
                rows[n][l] = c[m + k] * fall[n][m + k]
    return c, rows


def _direct_step(ode, st: _NodeState, theta: float, sigma: float, order: int,
                 tail_target: float, residual_target: float,
                 fall: list[np.ndarray]):
    k = ode.k
    z0 = st.t * cmath.exp(1j * theta)
    tn = _scaled_coefficient_arrays(ode, z0, sigma, theta, order)
    lsig = math.log(sigma)

    # common offset keeps the scaled frame near unit size
    offset = st.log_abs
    if offset == NEG_INF:
        cand = [d.log_abs + j * lsig for j, d in enumerate(st.derivs) if not d.is_zero]
        offset = max(cand) if cand else 0.0
    c_init = np.zeros(k, dtype=complex)
    for j, d in enumerate(st.derivs):
        if d.is_zero:
            continue
        mag = d.log_abs + j * lsig - math.lgamma(j + 1) - offset
        if mag > 60.0:
            raise _StepReject("derivative spread escapes the scaled frame")
        c_init[j] = cmath.exp(complex(mag, d.phase + j * theta))

    c, rows = _direct_series(tn, c_init, k, order, fall)

    head = float(np.max(np.abs(c)))
    tail = float(np.max(np.abs(c[-3:])))
    if head > 0.0 and tail > tail_target * head:
        raise _StepReject("series tail above target")

    # half-step residual against freshly evaluated coefficients
    poly = np.polynomial.polynomial.polyval
    z_mid = z0 + 0.5 * sigma * cmath.exp(1j * theta)
    fresh = _fresh_scaled_values(ode, z_mid, sigma, theta)
    terms = [poly(0.5, rows[k])]
    terms += [fresh[n] * poly(0.5, rows[n]) for n in range(k)]
    _check_residual(terms, residual_target, "half-step residual above target")

    # endpoint state
    ends = [complex(np.sum(rows[n])) for n in range(k + 1)]
    new_derivs = []
    for j in range(k):
        v = ends[j]
        if v == 0:
            new_derivs.append(LogComplex.zero())
        else:
            new_derivs.append(
                LogComplex(math.log(abs(v)) + offset - j * lsig, _wrap(cmath.phase(v) - j * theta))
            )
    t1 = st.t + sigma
    new_state = _NodeState(t1, "direct", new_derivs[0].log_abs, new_derivs[0].phase,
                           derivs=new_derivs)
    ratios = None
    if ends[0] != 0 and abs(ends[0]) > 1e-10 * max(head, 1e-300):
        ratios = []
        for j in range(1, k + 1):
            rv = ends[j] / ends[0]
            if rv == 0:
                ratios.append(LogComplex.zero())
            else:
                ratios.append(
                    LogComplex(math.log(abs(rv)) - j * lsig, _wrap(cmath.phase(rv) - j * theta))
                )
        _node_residual_gate(ode, t1, theta, sigma, ratios, residual_target)
    seg = RaySegment(st.t, t1, sigma, "direct", c, None, offset, st.log_abs, st.phase)
    return seg, new_state, RaySample(t1, new_state.log_abs, new_state.phase, ratios)


def _ratio_series(tn: list[np.ndarray], w0: list[complex], k: int,
                  order: int) -> np.ndarray:
    """Scaled ratio recurrence; returns rows W[j], j = 0..k."""
    W = np.zeros((k + 1, order + 1), dtype=complex)
    W[0, 0] = 1.0
    for j in range(1, k):
        W[j, 0] = w0[j - 1]
    for m in range(order + 1):
        acc = tn[0][m]
        for n in range(1, k):
            acc += np.dot(tn[n][: m + 1], W[n, m::-1])
        W[k, m] = -acc
        if m == order:
            break
        for j in range(1, k):
            conv = np.dot(W[j, : m + 1], W[1, m::-1])
            W[j, m + 1] = (W[j + 1, m] - conv) / (m + 1)
    return W


def _ratio_step(ode, st: _NodeState, theta: float, sigma: float, order: int,
                tail_target: float, residual_target: float):
    k = ode.k
    z0 = st.t * cmath.exp(1j * theta)
    tn = _scaled_coefficient_arrays(ode, z0, sigma, theta, order)
    lsig = math.log(sigma)

    w0 = []
    for j, w in enumerate(st.ratios, start=1):
        if w.is_zero:
            w0.append(0j)
            continue
        mag = w.log_abs + j * lsig
        if mag > 60.0:
            raise _StepReject("ratio state escapes the scaled frame")
        w0.append(0j if mag < -320.0 else cmath.exp(complex(mag, w.phase + j * theta)))

    W = _ratio_series(tn, w0, k, order)

    head = max(float(np.max(np.abs(W[1:k] if k > 1 else W[k:k + 1]))), 1.0)
    tail = float(np.max(np.abs(W[1:, -3:])))
    if tail > tail_target * head:
        raise _StepReject("series tail above target")

    poly = np.polynomial.polynomial.polyval
    z_mid = z0 + 0.5 * sigma * cmath.exp(1j * theta)
    fresh = _fresh_scaled_values(ode, z_mid, sigma, theta)
    terms = [poly(0.5, W[k]), fresh[0]]
    terms += [fresh[n] * poly(0.5, W[n]) for n in range(1, k)]
    _check_residual(terms, residual_target, "half-step residual above target")

    lam = np.zeros(order + 2, dtype=complex)
    lam[1:] = W[1] / np.arange(1, order + 2)
    dlog = complex(poly(1.0, lam))
    t1 = st.t + sigma
    new_log = st.log_abs + dlog.real
    new_phase = _wrap(st.phase + dlog.imag)
    ends = [complex(poly(1.0, W[j])) for j in range(k + 1)]
    new_ratios = []
    for j in range(1, k):
        v = ends[j]
        if v == 0:
            new_ratios.append(LogComplex.zero())
        else:
            new_ratios.append(
                LogComplex(math.log(abs(v)) - j * lsig, _wrap(cmath.phase(v) - j * theta))
            )
    sample_ratios = list(new_ratios)
    vk = ends[k]
    sample_ratios.append(
        LogComplex.zero() if vk == 0 else
        LogComplex(math.log(abs(vk)) - k * lsig, _wrap(cmath.phase(vk) - k * theta))
    )
    _node_residual_gate(ode, t1, theta, sigma, sample_ratios, residual_target)
    new_state = _NodeState(t1, "ratio", new_log, new_phase, ratios=new_ratios)
    seg = RaySegment(st.t, t1, sigma, "ratio", lam, W[1].copy(), 0.0, st.log_abs, st.phase)
    return seg, new_state, RaySample(t1, new_log, new_phase, sample_ratios)


def _check_residual(terms: list[complex], target: float, reason: str):
    scale = max(abs(x) for x in terms)
    if scale == 0.0:
        return
    if abs(sum(terms)) > target * scale:
        raise _StepReject(reason)


def _node_residual_gate(ode, t: float, theta: float, sigma: float, ratios,
                        residual_target: float):
    z = t * cmath.exp(1j * theta)
    res = residual(ode, z, ratios)
    if res > NODE_RESIDUAL_FACTOR * residual_target:
        raise _StepReject("endpoint residual above target")


def residual(ode, z: complex, ratios) -> float:
    """Relative equation residual |sum of terms| / max|term| at z.

    ratios supplies w_j = f^(j)/f for j = 1..k as LogComplex or complex;
    the w_0 = 1 term carries A_0. Computed fully in log scale, so ratio
    magnitudes far beyond double range are fine.
    """
    k = ode.k
    ws = [w if isinstance(w, LogComplex) else LogComplex.from_complex(complex(w))
          for w in ratios]
    if len(ws) != k:
        raise ValueError(f"need w_1..w_{k}, got {len(ws)} entries")
    terms = [ws[k - 1]]
    for n, a_map in enumerate(ode.coefficients):
        v = a_map.value(z)
        a = LogComplex(v.log_abs, v.phase)
        if a.is_zero:
            continue
        terms.append(a if n == 0 else a * ws[n - 1])
    scale = max(t.log_abs for t in terms)
    if scale == NEG_INF:
        return 0.0
    total = log_complex_sum(terms)
    return math.exp(total.log_abs - scale) if total.log_abs != NEG_INF else 0.0


# ---------------------------------------------------------------------------
# the marcher


def _step_cap(ode, z0: complex, t: float, max_step: float) -> float:
    s = min(max_step, BOUNDARY_FRACTION * max(1.0 - t, 1e-15))
    d = ode.singular_distance(z0)
    if math.isfinite(d):
        s = min(s, SINGULAR_FRACTION * d)
    k = ode.k
    arr = np.array([z0], dtype=complex)
    for n, a_map in enumerate(ode.coefficients):
        la = float(a_map.log_abs(arr)[0])
        if la > 0.0:
            s = min(s, FREQ_SAFETY * math.exp(-la / (k - n)))
    return s


def _switch_state(st: _NodeState, k: int, up: float, down: float) -> _NodeState:
    if st.mode == "direct" and st.log_abs >= up:
        f0 = st.derivs[0]
        ratios = [st.derivs[j] / f0 for j in range(1, k)]
        return _NodeState(st.t, "ratio", st.log_abs, st.phase, ratios=ratios)
    if st.mode == "ratio" and st.log_abs < down:
        f0 = LogComplex(st.log_abs, st.phase)
        derivs = [f0] + [w * f0 for w in st.ratios]
        return _NodeState(st.t, "direct", st.log_abs, st.phase, derivs=derivs)
    return st


def solve_ray(ode, direction: float, r_start: float, r_end: float, init,
              *, series_order: int = SERIES_ORDER, tail_target: float = TAIL_TARGET,
              residual_target: float = RESIDUAL_TARGET, max_step: float = MAX_STEP,
              switch_up: float = SWITCH_UP, switch_down: float = SWITCH_DOWN,
              max_steps: int = MAX_STEPS, stop_on_budget: bool = False,
              resume: RaySolution | None = None) -> RaySolution:
    """March f along z = t e^{i direction} from r_start to r_end.

    init gives f(z_start), f'(z_start), ..., f^(k-1)(z_start). Pass resume
    to extend an earlier solution in place; init is then ignored.
    """
    k = ode.k
    if not 0.0 <= r_start < 1.0 or not r_start <= r_end < 1.0:
        raise ValueError("need 0 <= r_start <= r_end < 1")
    if not ode.ray_allowed(direction):
        raise OdeError(f"direction {direction:.6f} leaves the coefficient domain")

    if resume is not None:
        sol = resume
    else:
        vals = [complex(v) for v in init]
        if len(vals) != k:
            raise ValueError(f"init must carry {k} values, got {len(vals)}")
        derivs = [LogComplex.from_complex(v) for v in vals]
        st = _NodeState(r_start, "direct", derivs[0].log_abs, derivs[0].phase, derivs=derivs)
        sol = RaySolution(direction, k, r_start, state=st,
                          meta={"series_order": series_order, "tail_target": tail_target,
                                "residual_target": residual_target,
                                "node_residual_target": NODE_RESIDUAL_FACTOR * residual_target,
                                "steps": 0, "retries": 0, "switches": 0})
        f0 = sol.state.derivs[0]
        ratios0 = None
        if not f0.is_zero:
            ratios0 = [d / f0 for d in derivs[1:]]
            wk = residual_closing_ratio(ode, r_start * cmath.exp(1j * direction), ratios0)
            ratios0 = ratios0 + [wk]
        sol.samples.append(RaySample(r_start, f0.log_abs, f0.phase, ratios0))

    fall = _falling_tables(k, series_order)
    st = sol.state
    while st.t < r_end - 1e-15 and (r_end - st.t) > 1e-14 * max(1.0, r_end):
        if sol.meta["steps"] >= max_steps:
            if stop_on_budget:
                break
            raise OdeError(f"step budget exhausted at t={st.t:.10g} on ray {direction:.6f}")
        switched = _switch_state(st, k, switch_up, switch_down)
        if switched is not st:
            sol.meta["switches"] += 1
            st = switched
            sol.state = st
        z0 = st.t * cmath.exp(1j * direction)
        sigma = min(_step_cap(ode, z0, st.t, max_step), r_end - st.t)
        accepted = None
        for _ in range(MAX_RETRIES):
            try:
                if st.mode == "direct":
                    accepted = _direct_step(ode, st, direction, sigma, series_order,
                                            tail_target, residual_target, fall)
                else:
                    accepted = _ratio_step(ode, st, direction, sigma, series_order,
                                           tail_target, residual_target)
                break
            except _StepReject:
                sol.meta["retries"] += 1
                sigma *= SHRINK
                if sigma < 1e-16 * max(1.0, st.t):
                    raise OdeError(
                        f"step size underflow at t={st.t:.10g} on ray {direction:.6f}"
                    ) from None
        if accepted is None:
            raise OdeError(f"no acceptable step at t={st.t:.10g} on ray {direction:.6f}")
        seg, st, sample = accepted
        sol.segments.append(seg)
        sol._starts.append(seg.t0)
        sol.samples.append(sample)
        sol.state = st
        sol.meta["steps"] += 1
    return sol


def residual_closing_ratio(ode, z: complex, ratios) -> LogComplex:
    """w_k implied by the equation from w_1..w_{k-1} at z."""
    terms = []
    for n, a_map in enumerate(ode.coefficients):
        v = a_map.value(z)
        a = LogComplex(v.log_abs, v.phase)
        if a.is_zero:
            continue
        terms.append(a if n == 0 else a * ratios[n - 1])
    if not terms:
        return LogComplex.zero()
    return -log_complex_sum(terms)


def radius_for_budget(ode, direction: float, init, *, r_start: float = 0.0,
                      r_cap: float = 0.999999, budget_steps: int = 2000,
                      **options) -> float:
    """Radius reachable along the ray within a step budget (march probe)."""
    sol = solve_ray(ode, direction, r_start, r_cap, init,
                    max_steps=budget_steps, stop_on_budget=True, **options)
    return sol.reached


# ---------------------------------------------------------------------------
# solutions as AnalyticMap


class OdeSolutionMap(AnalyticMap):
    """Growth probe backed by fresh per-ray integration with caching.

    Every requested point is answered by marching along its exact ray from
    the seed; no angular or radial interpolation happens. Rays are cached by
    direction and extended in place when deeper radii are requested, so
    repeated queries return bit-identical values. init is either k seed
    values or a callable z -> k values evaluated at the seed point of each
    ray. Queries inside the seed radius freeze f at its seed value; their
    spherical-derivative mass is treated as zero, which only matters for
    characteristic radii below seed_radius.
    """

    def __init__(self, ode, init=None, *, seed_radius: float = DEFAULT_SEED_RADIUS,
                 hint_source: AnalyticMap | None = None, prewarm_rays: int = 0,
                 name: str = "ode-solution", **solver_options):
        self.ode = ode
        self.k = ode.k
        self.init = init if init is not None else (1.0,) + (0.0,) * (ode.k - 1)
        self.seed_radius = float(seed_radius)
        self.hint_source = hint_source if hint_source is not None else ode.coefficients[0]
        self.solver_options = solver_options
        self.name = name
        self._rays: dict[float, RaySolution] = {}
        self._lock = threading.Lock()
        if prewarm_rays > 0:
            lo, hi = 0.0, 2.0 * math.pi
            if ode.domain is not None:
                lo, hi = ode.domain.alpha, ode.domain.beta
                thetas = lo + (hi - lo) * (np.arange(prewarm_rays) + 0.5) / prewarm_rays
            else:
                thetas = lo + (hi - lo) * np.arange(prewarm_rays) / prewarm_rays
            warm_r = min(max(self.seed_radius + 0.1, 0.3), 0.9)
            for th in thetas:
                self.ray(float(th), warm_r)

    def _seed_values(self, theta: float):
        if callable(self.init):
            return self.init(self.seed_radius * cmath.exp(1j * theta))
        return self.init

    def ray(self, theta: float, t: float) -> RaySolution:
        key = round(theta % (2.0 * math.pi), 12)
        with self._lock:
            sol = self._rays.get(key)
        if sol is None:
            sol = solve_ray(self.ode, theta, self.seed_radius, max(t, self.seed_radius),
                            self._seed_values(theta), **self.solver_options)
            with self._lock:
                sol = self._rays.setdefault(key, sol)
        elif sol.reached < t:
            solve_ray(self.ode, theta, self.seed_radius, t, None,
                      resume=sol, **self.solver_options)
        return sol

    def value_at(self, z: complex) -> RayValue:
        t = abs(z)
        if t >= 1.0:
            raise ValueError("the solution lives on the open unit disc")
        theta = cmath.phase(z) if t > 0 else 0.0
        return self.ray(theta, t).value_at(t)

    # -- AnalyticMap contract ------------------------------------------------

    def _gather(self, z, attr):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex if attr == "log_deriv" else float)
        for i, p in enumerate(flat):
            v = self.value_at(complex(p))
            out[i] = getattr(v, attr) if attr != "log_deriv" else v.log_deriv()
        return out.reshape(z.shape)

    def log_abs(self, z):
        return self._gather(z, "log_abs")

    def phase(self, z):
        return self._gather(z, "phase")

    def log_deriv(self, z):
        return self._gather(z, "log_deriv")

    def log_sph(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=float)
        for i, p in enumerate(flat):
            out[i] = self.value_at(complex(p)).log_sph()
        return out.reshape(z.shape)

    def angular_hints(self, radius):
        return self.hint_source.angular_hints(radius)

    def hint_inner_scale(self, radius):
        return self.hint_source.hint_inner_scale(radius)

    def winding_scale(self, radius):
        return self.hint_source.winding_scale(radius)

    def singular_radius(self, z0):
        return self.ode.singular_distance(z0)

    def budget_radius(self, probe_thetas, *, budget_steps: int = 2000,
                      r_cap: float = 0.999999) -> float:
        """Deepest radius every probe ray reaches within the step budget."""
        reach = []
        for th in probe_thetas:
            reach.append(radius_for_budget(
                self.ode, float(th), self._seed_values(float(th)),
                r_start=self.seed_radius, r_cap=r_cap, budget_steps=budget_steps,
                **self.solver_options))
        return min(reach)


def solution_as_analytic_map(ode, init=None, **kwargs) -> OdeSolutionMap:
    """AnalyticMap view of the solution family seeded on every ray."""
    return OdeSolutionMap(ode, init, **kwargs)


# ---------------------------------------------------------------------------
# sector-to-disc conjugation


def _mono_derivative(mono: tuple, weight: int, out: dict):
    for i in range(len(mono)):
        lifted = list(mono)
        lifted[i] += 1
        key = tuple(sorted(lifted))
        out[key] = out.get(key, 0) + weight


def _mono_times_v(mono: tuple) -> tuple:
    return tuple(sorted((0,) + mono))


class ChainRuleTable:
    """Triangle alpha[n][j] with f^(n)(z(u)) = sum_j alpha[n][j](u) g^(j)(u).

    Entries are integer-weighted monomials in V = 1/z'(u) and derivatives,
    built from alpha[1][1] = V by alpha[n][j] = V (d/du alpha[n-1][j]
    + alpha[n-1][j-1]). Evaluation binds the sector's inverse-map jets.
    """

    def __init__(self, sector: Sector, order: int):
        if not 1 <= order <= TABLE_CAP:
            raise ValueError(f"table order must lie in 1..{TABLE_CAP}, got {order}")
        self.sector = sector
        self.order = order
        mono: list[list[dict]] = [[{} for _ in range(order + 1)] for _ in range(order + 1)]
        mono[0][0] = {(): 1}
        for n in range(1, order + 1):
            for j in range(1, n + 1):
                acc: dict = {}
                for m, w in mono[n - 1][j].items():
                    _mono_derivative(m, w, acc)
                for m, w in mono[n - 1][j - 1].items():
                    acc[m] = acc.get(m, 0) + w
                mono[n][j] = {_mono_times_v(m): w for m, w in acc.items() if w != 0}
        self.monomials = mono

    def max_v_derivative(self) -> int:
        return max(1, self.order - 1)

    def value(self, n: int, j: int, u: complex, vders: list[complex] | None = None) -> complex:
        if vders is None:
            vders = map_jet(self.sector, u, self.order).v_derivatives(self.max_v_derivative())
        acc = 0j
        for m, w in self.monomials[n][j].items():
            term = complex(w)
            for a in m:
                term *= vders[a]
            acc += term
        return acc

    def value_jet(self, n: int, j: int, v_jet: Jet, order: int) -> Jet:
        """Series of alpha[n][j](u0 + h) from the V-series at u0."""
        der_jets = [v_jet.truncate(order)]
        for _ in range(self.max_v_derivative()):
            der_jets.append(der_jets[-1].derivative() if der_jets[-1].order >= 1
                            else Jet.constant(0j, order))
        # rebuild each derivative from the original to keep full order
        der_jets = []
        cur = v_jet
        for _ in range(self.max_v_derivative() + 1):
            der_jets.append(cur.truncate(min(order, cur.order)))
            cur = cur.derivative()
        acc = Jet.constant(0j, order)
        for m, w in self.monomials[n][j].items():
            term = Jet.constant(complex(w), order)
            for a in m:
                term = term * der_jets[a].truncate(order)
            acc = acc + term
        return acc

    def entry_map(self, n: int, j: int) -> "ChainRuleEntryMap":
        return ChainRuleEntryMap(self, n, j)


class ChainRuleEntryMap(AnalyticMap):
    """alpha[n][j] of a sector's table as a disc-variable growth probe."""

    def __init__(self, table: ChainRuleTable, n: int, j: int):
        self.table = table
        self.n = n
        self.j = j
        self.name = f"chain-rule[{n}][{j}]"

    def _values(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i, p in enumerate(flat):
            out[i] = self.table.value(self.n, self.j, complex(p))
        return out.reshape(z.shape)

    def log_abs(self, z):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self._values(z)))

    def phase(self, z):
        return np.angle(self._values(z))

    def log_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        h = 1e-7
        v0 = self._values(z)
        dv = (self._values(z + h) - self._values(z - h)) / (2.0 * h)
        with np.errstate(divide="ignore", invalid="ignore"):
            return dv / v0


def chain_rule_table(sector: Sector, ell: int) -> ChainRuleTable:
    return ChainRuleTable(sector, ell)


def _b_values(base: LinearOde, table: ChainRuleTable, u: complex) -> list[LogComplex]:
    """B_0..B_{k-1} at u, assembled in log scale."""
    k = base.k
    mj = map_jet(table.sector, u, max(k, 2))
    vders = mj.v_derivatives(table.max_v_derivative())
    z0 = mj.z0
    a_vals = []
    for a_map in base.coefficients:
        v = a_map.value(z0)
        a_vals.append(LogComplex(v.log_abs, v.phase))
    alpha = [[LogComplex.from_complex(table.value(n, j, u, vders)) for j in range(n + 1)]
             for n in range(k + 1)]
    lead = alpha[k][k]
    out = []
    for j in range(k):
        terms = []
        if j >= 1:
            terms.append(alpha[k][j])
        for n in range(max(j, 0), k):
            if j > n or a_vals[n].is_zero or (j > 0 and alpha[n][j].is_zero):
                continue
            terms.append(a_vals[n] if j == 0 and n == 0 else a_vals[n] * alpha[n][j])
        out.append(log_complex_sum(terms) / lead if terms else LogComplex.zero())
    return out


class TransformedCoefficientMap(AnalyticMap):
    """Disc-side coefficient B_j of a conjugated equation."""

    def __init__(self, base: LinearOde, table: ChainRuleTable, j: int):
        self.base = base
        self.table = table
        self.j = j
        self.name = f"transformed-B{j}"

    def _value_lc(self, u: complex) -> LogComplex:
        return _b_values(self.base, self.table, u)[self.j]

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=float)
        for i, p in enumerate(flat):
            out[i] = self._value_lc(complex(p)).log_abs
        return out.reshape(z.shape)

    def phase(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=float)
        for i, p in enumerate(flat):
            out[i] = self._value_lc(complex(p)).phase
        return out.reshape(z.shape)

    def log_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        h = 1e-7
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i, p in enumerate(flat):
            jp = self.jet(complex(p), 1, min(h, 0.5 * (1.0 - abs(p))))
            ders = jp.derivatives(1)
            out[i] = (ders[1] / ders[0]).to_complex() if not ders[0].is_zero else 0j
        return out.reshape(z.shape)

    def jet(self, z0, order, scale=1.0) -> Jet:
        k = self.base.k
        table = self.table
        mj = map_jet(table.sector, z0, order + k)
        zc = mj.z_jet.plain()
        z_at = complex(zc[0])
        inner = Jet(np.concatenate([[0j], zc[1: order + 1]]))
        alpha_jets = {}
        for n in range(k + 1):
            for j in range(n + 1):
                alpha_jets[(n, j)] = table.value_jet(n, j, mj.v_jet, order)
        lead = alpha_jets[(k, k)]
        acc = Jet.constant(0j, order)
        if self.j >= 1:
            acc = acc + alpha_jets[(k, self.j)]
        for n in range(self.j, k):
            a_outer = self.base.coefficients[n].jet(z_at, order, 1.0)
            a_comp = compose(a_outer, inner)
            term = a_comp if (self.j == 0 and n == 0) else a_comp * alpha_jets[(n, self.j)]
            acc = acc + term
        out = acc / lead
        if scale != 1.0:
            out = out.scale_var(scale)
        return out

    def log_jet(self, z0, order, scale=1.0) -> Jet:
        return self.jet(z0, order, scale).log()

    def singular_radius(self, z0):
        # the inverse sector map is singular at u = 1 and u = -1
        return min(abs(1.0 - z0), abs(1.0 + z0))


@dataclass(frozen=True)
class TransformedOde:
    """Conjugated equation g^(k) + B_{k-1} g^(k-1) + ... + B_0 g = 0 on the disc."""

    source: LinearOde
    sector: Sector
    table: ChainRuleTable
    coefficients: tuple

    @property
    def k(self) -> int:
        return len(self.coefficients)

    @property
    def domain(self):
        return None

    def singular_distance(self, z0: complex) -> float:
        return min(abs(1.0 - z0), abs(1.0 + z0))

    def ray_allowed(self, theta: float) -> bool:
        return True

    def coefficient_values(self, u: complex) -> list[LogComplex]:
        return _b_values(self.source, self.table, u)


def transform_to_disc(ode: LinearOde, sector: Sector) -> TransformedOde:
    table = ChainRuleTable(sector, ode.k)
    coeffs = tuple(TransformedCoefficientMap(ode, table, j) for j in range(ode.k))
    return TransformedOde(ode, sector, table, coeffs)


def conjugation_residual(tode: TransformedOde, fmap: AnalyticMap, u: complex) -> float:
    """Relative residual of g(u) = f(z(u)) in the conjugated equation.

    fmap must solve the source equation on the sector; the residual is
    |g^(k) + sum B_j g^(j)| over the largest term, all in log scale.
    """
    k = tode.k
    mj = map_jet(tode.sector, u, k)
    z0 = mj.z0
    fj = fmap.jet(z0, k, 1.0)
    zc = mj.z_jet.plain()
    inner = Jet(np.concatenate([[0j], zc[1: k + 1]]))
    gd = compose(fj, inner).derivatives(k)
    b_vals = tode.coefficient_values(u)
    terms = [gd[k]]
    for j in range(k):
        if b_vals[j].is_zero or gd[j].is_zero:
            continue
        terms.append(b_vals[j] * gd[j])
    scale = max(t.log_abs for t in terms)
    if scale == NEG_INF:
        return 0.0
    total = log_complex_sum(terms)
    return math.exp(total.log_abs - scale) if total.log_abs != NEG_INF else 0.0
