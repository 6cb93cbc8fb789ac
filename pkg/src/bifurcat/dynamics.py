"""Trajectories, limit cycles and Floquet exponents for the planar model.

The integrator is Dormand-Prince 5(4) with its free 4th-order continuous
extension.  Section crossings are located on the dense output and the
crossing state is then recomputed by one fresh step from the start of the
accepted step, so event states carry full step accuracy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .equilibria import endemic_point, fixed_points
from .model import ModelParams, State, dfe, reduced2d_jac, reduced2d_rhs, vector_field

CYCLE_TOL = 1e-10
PLOT_TOL = 1e-8
NONNEG_CLIP = -1e-12
HOMOCLINIC_FRACTION = 1e-2

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension coefficients
_D = np.array([-12715105075 / 11282082432, 0, 87487479700 / 32700410799,
               -10690763975 / 1880347072, 701980252875 / 199316789632,
               -1453857185 / 822651844, 69997945 / 29380423])


class StepSizeUnderflow(ArithmeticError):
    def __init__(self, t: float, y: np.ndarray):
        super().__init__(f"step size underflow at t={t!r}, state={np.asarray(y).tolist()}")
        self.t = t
        self.state = np.asarray(y)


class NoCycleDetected(ArithmeticError):
    pass


class Escaped(NoCycleDetected):
    def __init__(self, t: float, y: np.ndarray):
        super().__init__(f"no cycle detected: orbit escaped at t={t!r}")
        self.t = t
        self.state = np.asarray(y)


class NewtonStagnation(ArithmeticError):
    def __init__(self, msg: str, history: List[float]):
        super().__init__(f"{msg}; residual history {history}")
        self.history = history


def _step(fun, t, y, h, f0):
    k = [f0]
    for j in range(1, 7):
        yj = y + h * sum(a * kk for a, kk in zip(_A[j], k))
        k.append(fun(t + _C[j] * h, yj))
    y1 = y + h * sum(b * kk for b, kk in zip(_B[:6], k[:6]))
    err = h * sum(e * kk for e, kk in zip(_E, k))
    return y1, err, k


def _dense_coeffs(y0, y1, h, k):
    ydiff = y1 - y0
    bspl = h * k[0] - ydiff
    r5 = h * sum(d * kk for d, kk in zip(_D, k))
    return (y0, ydiff, bspl, ydiff - h * k[6] - bspl, r5)


def _dense_eval(coeffs, theta):
    r1, r2, r3, r4, r5 = coeffs
    th1 = 1.0 - theta
    return r1 + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)))


@dataclass
class Segment:
    t0: float
    h: float
    coeffs: tuple

    def __call__(self, t):
        return _dense_eval(self.coeffs, (t - self.t0) / self.h)


@dataclass
class Event:
    t: float
    y: np.ndarray


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    params: ModelParams
    tolerances: Tuple[float, float]
    segments: List[Segment] = field(default_factory=list, repr=False)
    events: List[Event] = field(default_factory=list)
    reverse: bool = False
    clipped: int = 0

    def __len__(self):
        return len(self.times)

    def state(self, k: int) -> State:
        x = self.states[k]
        return State(float(x[0]), float(x[1]), float(x[2]) if len(x) > 2 else 0.0)

    def __call__(self, t: float) -> np.ndarray:
        """Dense-output interpolation."""
        if not self.times[0] <= t <= self.times[-1]:
            raise ValueError("time outside the integrated span")
        k = int(np.searchsorted([s.t0 for s in self.segments], t, side="right")) - 1
        k = min(max(k, 0), len(self.segments) - 1)
        return self.segments[k](t)


def dopri5(fun: Callable, t0: float, y0, t1: float, atol: float = 1e-10, rtol: float = 1e-10,
           event: Optional[Callable] = None, max_events: Optional[int] = None,
           n_clip: int = 0, max_steps: int = 2_000_000, dense: bool = True,
           bound: float = math.inf):
    """Adaptive Dormand-Prince integration of y' = fun(t, y) on [t0, t1].

    ``event`` supplies ``g(y)``, ``dg(y, f)`` and ``accept(y)``; accepted sign
    changes of g are recorded, stopping after ``max_events``.  The first
    ``n_clip`` components are kept nonnegative and must stay below ``bound``.
    Returns (ts, ys, segments, events, n_clipped).
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    f0 = fun(t, y)
    # initial step, Hairer's heuristic
    sc = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h, abs(t1 - t0))
    ts, ys, segs, events = [t], [y.copy()], [], []
    clipped = 0
    steps = 0
    while t < t1:
        if steps >= max_steps:
            raise StepSizeUnderflow(t, y)
        steps += 1
        if t + h > t1:
            h = t1 - t
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepSizeUnderflow(t, y)
        y1, err, k = _step(fun, t, y, h, f0)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y1))
        en = np.sqrt(np.mean((err / sc) ** 2))
        if not np.isfinite(en):
            h *= 0.2
            continue
        if en > 1.0:
            h *= max(0.2, 0.9 * en ** -0.2)
            continue
        if n_clip and np.max(np.abs(y1[:n_clip])) > bound:
            raise Escaped(t + h, y1)
        f1 = k[6]
        if n_clip and np.any(y1[:n_clip] < 0):
            if np.any(y1[:n_clip] < NONNEG_CLIP):
                warnings.warn(f"state component below {NONNEG_CLIP} clipped at t={t + h}")
            y1[:n_clip] = np.maximum(y1[:n_clip], 0.0)
            clipped += 1
            f1 = fun(t + h, y1)
        seg = Segment(t, h, _dense_coeffs(y, y1, h, k))
        stop = False
        if event is not None:
            g0, g1 = event.g(y), event.g(y1)
            if g0 * g1 < 0 or (g1 == 0 and g0 != 0):
                tc = optimize.brentq(lambda tt: event.g(seg(tt)), t, t + h, xtol=1e-12) \
                    if g1 != 0 else t + h
                if tc > t0 and event.accept(seg(tc)):
                    # refine the crossing state by a fresh step from t
                    yc = _step(fun, t, y, tc - t, f0)[0] if tc > t else y.copy()
                    for _ in range(3):
                        gv = event.g(yc)
                        dg = event.dg(yc, fun(tc, yc))
                        if dg == 0:
                            break
                        dt = -gv / dg
                        if abs(dt) > h:
                            break
                        tc += dt
                        yc = _step(fun, t, y, tc - t, f0)[0]
                        if abs(dt) < 1e-15 * max(1.0, tc):
                            break
                    events.append(Event(tc, yc))
                    if max_events is not None and len(events) >= max_events:
                        stop = True
                        t1 = tc
        if dense:
            segs.append(seg)
        fac = min(10.0, max(0.2, 0.9 * max(en, 1e-10) ** -0.2))
        if stop:
            ts.append(tc)
            ys.append(events[-1].y.copy())
            break
        t, y, f0 = t + h, y1, f1
        ts.append(t)
        ys.append(y.copy())
        h *= fac
    return np.array(ts), np.array(ys), segs, events, clipped


class _SectionEvent:
    """Crossings of i = i_c on the side where the forward field has s' < 0."""

    def __init__(self, p: ModelParams, i_c: float):
        pf = p.as_float()
        self.i_c = i_c
        q = 1 + pf.xi * i_c
        self.s_null = pf.b / (pf.mu + pf.beta * i_c / q)
        # orbits beyond ten times the DFE level are treated as escaping
        self.bound = 10 * pf.b / pf.mu

    def g(self, y):
        return y[1] - self.i_c

    def dg(self, y, f):
        return f[1]

    def accept(self, y):
        return y[0] > self.s_null


def _rhs(p: ModelParams, variant: str, reverse: bool):
    sign = -1.0 if reverse else 1.0
    if variant == "reduced2d":
        f = reduced2d_rhs(p)
        return lambda t, y: sign * f(y)
    pf = p.as_float()
    return lambda t, y: sign * np.array(vector_field(pf, y, variant), dtype=float)


def integrate(p: ModelParams, x0, t_span, tol=PLOT_TOL, variant: str = "reduced2d",
              reverse: bool = False, dense: bool = True) -> Trajectory:
    """Integrate from ``x0`` over ``t_span``; ``reverse`` flips the field."""
    if isinstance(x0, State):
        x0 = x0.as_array(variant)
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 < 0):
        raise ValueError("initial state outside nonnegative octant")
    atol, rtol = (tol, tol) if np.isscalar(tol) else tol
    if not (atol > 0 and rtol > 0):
        raise ValueError("tolerances must be positive")
    t0, t1 = (0.0, float(t_span)) if np.isscalar(t_span) else map(float, t_span)
    ts, ys, segs, _, clipped = dopri5(_rhs(p, variant, reverse), t0, x0, t1, atol, rtol,
                                      n_clip=len(x0), dense=dense)
    return Trajectory(ts, ys, p, (atol, rtol), segs, [], reverse, clipped)


# -- cycles ------------------------------------------------------------------------------

@dataclass
class LimitCycle:
    anchor: State
    period: float
    samples: np.ndarray
    floquet_exponents: Tuple[complex, complex]
    multipliers: Tuple[complex, complex]
    stability: str
    residual: float
    abel_relerr: float
    section_i: float
    reverse_time: bool = False
    almost_homoclinic: bool = False
    min_dfe_distance: float = math.inf
    notes: List[str] = field(default_factory=list)

    @property
    def nontrivial_exponent(self) -> complex:
        return self.floquet_exponents[1]

    def to_json(self) -> dict:
        return {
            "anchor": [self.anchor.s, self.anchor.i],
            "period": self.period,
            "floquet_exponents": [[z.real, z.imag] for z in self.floquet_exponents],
            "multipliers": [[z.real, z.imag] for z in self.multipliers],
            "stability": self.stability,
            "return_residual": self.residual,
            "abel_relative_error": self.abel_relerr,
            "section_i": self.section_i,
            "reverse_time": self.reverse_time,
            "almost_homoclinic": self.almost_homoclinic,
            "samples": self.samples.tolist(),
        }


def _return(p, s, section: _SectionEvent, tol, reverse, t_max, n=1):
    """n-th return of (s, i_c) to the section: (events, ts, ys)."""
    fun = _rhs(p, "reduced2d", reverse)
    ts, ys, _, events, _ = dopri5(fun, 0.0, [s, section.i_c], t_max, tol, tol, event=section, bound=section.bound,
                                  max_events=n, n_clip=2, dense=False)
    return events, ts, ys


def _period_guess(p: ModelParams) -> float:
    try:
        J = reduced2d_jac(p)(np.array(endemic_point(p, "E2")))
        ev = np.linalg.eigvals(J)
        im = abs(ev[0].imag)
        if im > 1e-8:
            return 2 * math.pi / im
    except (ValueError, ArithmeticError):
        pass
    return 50.0


def find_limit_cycle(p: ModelParams, guess: Optional[State] = None, section_i: Optional[float] = None,
                     reverse: bool = False, tol: float = CYCLE_TOL, transient: int = 3,
                     max_newton: int = 40, t_max: Optional[float] = None,
                     neutral_amplitude: float = 1e-2) -> LimitCycle:
    """Fixed point of the Poincare return map on {i = i_c}.

    ``guess`` defaults to a point right of E2 on its i-level.  In reverse
    time the field is negated so repelling cycles become attracting.
    If the return map contracts by less than 1e-3 per turn toward E2 (a
    Hopf-degenerate focus) the orbit through ``neutral_amplitude`` times
    s_E2 is reported with stability 'neutral/boundary'.
    """
    pf = p.as_float()
    try:
        s2, i2 = endemic_point(pf, "E2")
    except (ValueError, ArithmeticError):
        s2 = i2 = None
    if guess is None:
        if s2 is None:
            raise NoCycleDetected("no cycle detected: no interior focus to circle")
        guess = State(s2 * (1 + 0.1), i2)
    i_c = float(section_i) if section_i is not None else float(guess.i)
    section = _SectionEvent(pf, i_c)
    scale = max(1.0, abs(guess.s))
    T0 = _period_guess(pf)
    if t_max is None:
        t_max = 20 * T0
    # transient: let the flow approach the attractor on the section
    events, _, _ = _transient_from(pf, guess, section, tol, reverse, t_max * transient, transient)
    if len(events) < transient:
        raise NoCycleDetected(f"no cycle detected: {len(events)} section crossings")
    s = float(events[-1].y[0])

    def F(sv):
        ev, _, _ = _return(pf, sv, section, tol, reverse, t_max)
        if not ev:
            raise NoCycleDetected("no cycle detected: orbit left the section")
        return ev[0].y[0] - sv, ev[0].t

    near_focus = (lambda sv: abs(sv - s2) < 1e-6 * scale) if s2 is not None and i_c == i2 else (lambda sv: False)
    try:
        s, Fs, T = _newton(F, s, scale, section.s_null, max_newton, near_focus,
                           lambda sv, slope: s2 is not None and abs(sv - s2) < 0.5 * scale
                           and _is_focus_contraction(pf, s2, i2, i_c, slope))
        neutral = False
        notes = []
    except _Neutral:
        neutral = True
        floor = s2 + neutral_amplitude * s2
        root = _bracket_cycle(F, s2, 0.5)
        if root is not None:
            # a genuine cycle is a sign change of P(s) - s
            s = root
            Fs, T = F(s)
            neutral = False
            notes = ["cycle around a Hopf-degenerate focus, found by bracketing"]
        else:
            s = floor
            Fs, T = F(s)
            notes = ["Hopf-degenerate focus: orbit at floor amplitude"]
    anchor = State(float(s), i_c)
    return _finish(pf, anchor, T, abs(Fs), tol, reverse, i_c, neutral, notes)


class _Neutral(Exception):
    pass


def _bracket_cycle(F, s2, max_fraction, n=30, noise=1e-7):
    """First sign change of F on amplitudes s2 * 10^[-4, log10(max_fraction)].

    Values below ``noise * s2`` are integration noise and never bracket.
    """
    prev = None
    for amp in np.logspace(-4, math.log10(max_fraction), n):
        sv = s2 * (1 + amp)
        try:
            fv = F(sv)[0]
        except (NoCycleDetected, StepSizeUnderflow):
            return None
        if abs(fv) < noise * s2:
            continue
        if prev is not None and prev[1] * fv < 0:
            return optimize.brentq(lambda x: F(x)[0], prev[0], sv, xtol=1e-10 * s2)
        prev = (sv, fv)
    return None


def _newton(F, s, scale, s_min, max_newton, near_focus, neutral_test):
    """Damped Newton on F(s) = P(s) - s with a finite-difference slope."""
    Fs, T = F(s)
    hist = [abs(Fs)]
    for _ in range(max_newton):
        if abs(Fs) < 1e-7 * scale:
            break
        h = 1e-6 * scale
        Fh, _ = F(s + h)
        slope = (Fh - Fs) / h
        if neutral_test is not None and slope > -1e-3 and neutral_test(s, slope):
            raise _Neutral()
        if slope == 0:
            raise NewtonStagnation("zero return-map slope", hist)
        step = -Fs / slope
        lam = 1.0
        while lam > 1e-3:
            sn = s + lam * step
            if sn > s_min:
                try:
                    Fn, Tn = F(sn)
                except (NoCycleDetected, StepSizeUnderflow):
                    Fn = math.inf
                if abs(Fn) < abs(Fs):
                    break
            lam /= 2
        else:
            raise NewtonStagnation("damped Newton made no progress", hist)
        s, Fs, T = sn, Fn, Tn
        hist.append(abs(Fs))
        if near_focus(s):
            raise NoCycleDetected("no cycle detected: return map converges to the equilibrium")
    else:
        raise NewtonStagnation("Newton iteration limit", hist)
    return s, Fs, T


def _is_focus_contraction(pf, s2, i2, i_c, slope) -> bool:
    """Return-map slope matches the linear focus contraction exp(Tr/2 * T)."""
    J = reduced2d_jac(pf)(np.array([s2, i2]))
    ev = np.linalg.eigvals(J)
    if abs(ev[0].imag) < 1e-12 or i_c != i2:
        return False
    m = math.exp(ev[0].real * 2 * math.pi / abs(ev[0].imag))
    return abs(m - 1) < 1e-3 and abs((1 + slope) - m) < 1e-3


def _transient_from(pf, guess, section, tol, reverse, t_max, n):
    fun = _rhs(pf, "reduced2d", reverse)
    ts, ys, _, events, _ = dopri5(fun, 0.0, [guess.s, guess.i], t_max, tol, tol, event=section, bound=section.bound,
                                  max_events=n, n_clip=2, dense=False)
    return events, ts, ys


def _finish(pf, anchor: State, T: float, residual: float, tol, reverse, i_c, neutral, notes) -> LimitCycle:
    mono = monodromy(pf, anchor, T, tol)
    mults = _multipliers(mono)
    exps = _exponents(mults, T)
    order = sorted(range(2), key=lambda k: abs(exps[k]))
    exps = tuple(exps[k] for k in order)
    mults = tuple(complex(mults[k]) for k in order)
    prod = float(np.real(mults[0] * mults[1]))
    abel = abs(prod - math.exp(mono.int_trace)) / abs(math.exp(mono.int_trace))
    re = exps[1].real
    if neutral or abs(re) < 1e-4:
        stability = "neutral/boundary"
    else:
        stability = "attracting" if re < 0 else "repelling"
    traj = integrate(pf, [anchor.s, anchor.i], (0.0, T), tol)
    samples = traj.states
    e0 = dfe(pf)
    d = np.hypot(samples[:, 0] - e0.s, samples[:, 1] - e0.i)
    dmin = float(d.min())
    return LimitCycle(anchor, float(T), samples, exps, mults, stability, float(residual), float(abel),
                      i_c, reverse, dmin < HOMOCLINIC_FRACTION * e0.s, dmin, notes)


def _exponents(mults, T):
    out = []
    for m in mults:
        z = complex(m)
        out.append(complex(np.log(z)) / T if z != 0 else complex(-math.inf))
    return out


@dataclass(frozen=True)
class Monodromy:
    """M = Q R over one period; ``log_det`` is accumulated from the R factors."""

    matrix: np.ndarray
    det_sign: float
    log_det: float
    int_trace: float

    @property
    def det(self) -> float:
        return self.det_sign * math.exp(self.log_det)


def _multipliers(mono: Monodromy):
    """Eigenvalues of M; for a real pair the far-from-one multiplier is det/trivial,
    which avoids the cancellation in det of a matrix with large entries."""
    ev = np.linalg.eigvals(mono.matrix)
    if np.all(np.abs(ev.imag) == 0):
        k = int(np.argmin(np.abs(ev - 1.0)))
        trivial = float(ev[k].real)
        other = mono.det / trivial
        return [trivial, other] if k == 0 else [other, trivial]
    return list(ev)


def monodromy(p: ModelParams, anchor: State, period: float, tol: float = CYCLE_TOL,
              segments: int = 64) -> Monodromy:
    """Variational matrix over one period from ``anchor``.

    The fundamental matrix is re-orthonormalised after each of ``segments``
    pieces so its determinant is a product of R diagonals.
    """
    pf = p.as_float()
    f = reduced2d_rhs(pf)
    J = reduced2d_jac(pf)

    def aug(t, y):
        x = y[:2]
        Jx = J(x)
        Y = y[2:6].reshape(2, 2)
        return np.concatenate([f(x), (Jx @ Y).ravel(), [Jx[0, 0] + Jx[1, 1]]])

    x = np.array([anchor.s, anchor.i], dtype=float)
    Q = np.eye(2)
    R = np.eye(2)
    log_det, sign, int_tr = 0.0, 1.0, 0.0
    edges = np.linspace(0.0, period, segments + 1)
    for t0, t1 in zip(edges[:-1], edges[1:]):
        y0 = np.concatenate([x, Q.ravel(), [0.0]])
        try:
            _, ys, _, _, _ = dopri5(aug, t0, y0, t1, tol, tol, n_clip=2, dense=False)
        except StepSizeUnderflow as exc:
            raise ArithmeticError(f"monodromy integration failed: {exc}") from exc
        x = ys[-1][:2]
        int_tr += float(ys[-1][6])
        Q, Rk = np.linalg.qr(ys[-1][2:6].reshape(2, 2))
        d = np.diag(Rk)
        log_det += float(np.sum(np.log(np.abs(d))))
        sign *= float(np.prod(np.sign(d)))
        R = Rk @ R
    sign *= float(np.sign(np.linalg.det(Q)))
    return Monodromy(Q @ R, sign, log_det, int_tr)


def floquet_exponents(p: ModelParams, cycle: LimitCycle, tol: float = CYCLE_TOL) -> Tuple[complex, complex]:
    """Exponents log(mu)/T of the monodromy matrix, trivial one first."""
    exps = _exponents(_multipliers(monodromy(p, cycle.anchor, cycle.period, tol)), cycle.period)
    exps.sort(key=abs)
    return tuple(exps)


# -- phase portraits ---------------------------------------------------------------------

@dataclass
class PhasePortrait:
    trajectories: List[Optional[Trajectory]]
    errors: List[Optional[str]]
    fixed_points: list


def phase_portrait(p: ModelParams, seeds: Sequence, t_span, tol: float = PLOT_TOL) -> PhasePortrait:
    trajs, errs = [], []
    for seed in seeds:
        try:
            trajs.append(integrate(p, seed, t_span, tol))
            errs.append(None)
        except (ArithmeticError, ValueError) as exc:
            trajs.append(None)
            errs.append(str(exc))
    return PhasePortrait(trajs, errs, fixed_points(p))
