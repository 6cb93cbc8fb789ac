"""Two-parameter (omega, alpha) map of the planar model.

Regions are told apart by the signs of four quantities:

    Delta = B^2 - 4AC,  R0 - 1,  Tr J(E2),  B

Each is normalised to a scale-free value before comparing against ``tol``
so one tolerance serves the whole plane.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage, optimize

from .equilibria import eliminated_variety, endemic_poly, jacobian_numerators, _reduce_s
from .exactalg.poly import RationalPoly, as_rational
from .exactalg.resultant import sylvester_resultant
from .exactalg.sturm import cauchy_bound, sturm_real_roots
from .model import ModelParams, derived

REGIONS = ("I", "II", "III", "IV", "V", "VI", "VIa")
CURVES = ("R0=1", "Delta=0", "TrE2=0", "B=0")

# Table of sign patterns (Delta, R0-1, Tr E2, B); None means "either sign"
TABLE = {
    "I": ("+", "-", "+", "-"),
    "II": ("+", "+", "+", None),
    "III": ("+", "+", "-", None),
    "IV": ("+", "-", "+", "+"),
    "V": ("-", "-", "+", None),
    "VI": ("+", "-", "-", "-"),
    "VIa": ("+", "-", "-", "-"),
}

DEFAULT_TOL = 1e-9
MERGED_DISC = 1e-12


@dataclass(frozen=True)
class RegionLabel:
    name: str
    signs: Tuple[str, str, str, str]

    @property
    def is_region(self) -> bool:
        return self.name in REGIONS

    @property
    def trace_defined(self) -> bool:
        return self.signs[2] != "undef"


@dataclass
class CurvePolyline:
    kind: str
    points: List[Tuple[float, float]]
    resolution: float
    residuals: List[float] = field(default_factory=list)

    def as_array(self) -> np.ndarray:
        return np.array([[float(w), float(a)] for w, a in self.points]).reshape(-1, 2)


@dataclass(frozen=True)
class CornerPoint:
    name: str
    omega: float
    alpha: float
    defining_equations: Tuple[str, str]
    residuals: Tuple[float, float]
    exact: Optional[Tuple[Fraction, Fraction]] = None
    extra: Dict[str, object] = field(default_factory=dict)


# -- pointwise invariants ------------------------------------------------------------

@dataclass(frozen=True)
class _Base:
    b: float
    mu: float
    beta: float
    xi: float
    v_i: float
    v_s: float
    eta0: float


def _base(p: ModelParams) -> _Base:
    pf = p.as_float()
    d = derived(pf)
    return _Base(pf.b, pf.mu, pf.beta, pf.xi, d.v_i, d.v_s, d.eta0)


def quadratic_coeffs(c: _Base, w, a):
    A = c.v_s * c.v_i + 0 * w
    B = c.v_i * c.v_s * w + c.v_s * a - c.mu * c.eta0
    C = c.mu * a - c.mu * c.eta0 * w
    return A, B, C


def _trace_at(c: _Base, w, a, i):
    q = 1 + c.xi * i
    s = c.b * q / (c.mu + c.v_s * i)
    j11 = -c.beta * i / q - c.mu
    j22 = c.beta * s / q ** 2 - a * w / (w + i) ** 2 - c.v_i
    return j11 + j22, np.abs(j11) + np.abs(j22)


def invariants(p: ModelParams, w, a):
    """Normalised (Delta, R0-1, Tr E2, B) and an E2-exists mask, vectorised."""
    c = _base(p)
    w = np.asarray(w, dtype=float)
    a = np.asarray(a, dtype=float)
    A, B, C = quadratic_coeffs(c, w, a)
    disc = B * B - 4 * A * C
    # term magnitudes of B and C stay positive at H, where B = C = 0
    b_scale = np.abs(c.v_i * c.v_s * w + c.v_s * a) + abs(c.mu * c.eta0)
    c_scale = np.abs(c.mu * a) + np.abs(c.mu * c.eta0 * w)
    n_disc = disc / (b_scale * b_scale + 4 * A * c_scale)
    r0m1 = c.beta * c.b / (c.mu * (c.v_i + a / w)) - 1
    n_b = B / b_scale
    sq = np.sqrt(np.maximum(disc, 0.0))
    # i2 = (-B + sq) / 2A, written without cancellation
    with np.errstate(divide="ignore", invalid="ignore"):
        i2 = np.where(B <= 0, (-B + sq) / (2 * A), (2 * C) / (-B - sq))
    # round-off can push a double root to slightly negative disc
    exists = (n_disc >= -MERGED_DISC) & (i2 > 0)
    ii = np.where(exists, i2, 1.0)
    tr, scale = _trace_at(c, w, a, ii)
    n_tr = np.where(exists, tr / scale, np.nan)
    return n_disc, r0m1, n_tr, n_b, exists


def _sign(x, tol):
    return np.where(np.abs(x) <= tol, "0", np.where(x > 0, "+", "-"))


def classify_arrays(p: ModelParams, w, a, tol: float = DEFAULT_TOL, split_vi: bool = True):
    """Region/boundary names for arrays of (omega, alpha)."""
    n_disc, r0m1, n_tr, n_b, exists = invariants(p, w, a)
    zd = np.abs(n_disc) <= tol
    zr = np.abs(r0m1) <= tol
    zt = exists & (np.abs(np.nan_to_num(n_tr, nan=1.0)) <= tol)
    out = np.full(np.shape(n_disc), "", dtype=object)
    d_pos, r_pos, t_pos, b_pos = n_disc > 0, r0m1 > 0, np.nan_to_num(n_tr, nan=1.0) > 0, n_b > 0
    region = np.where(
        ~d_pos, "V",
        np.where(r_pos, np.where(t_pos, "II", "III"),
                 np.where(b_pos, "IV", np.where(t_pos, "I", "VI"))))
    if split_vi:
        w_b1 = b1_omega(p)
        region = np.where((region == "VI") & (np.asarray(w) > w_b1), "VIa", region)
    out[...] = region
    w_bt = bt_omega(p)
    corner_b = np.where(np.asarray(w) < w_bt, "corner:B1", "corner:B2")
    out = np.where(zt, "boundary:TrE2=0", out)
    out = np.where(zr, "boundary:R0=1", out)
    out = np.where(zd, "boundary:Delta=0", out)
    out = np.where(zr & zt, corner_b, out)
    out = np.where(zd & zt, "corner:BT", out)
    out = np.where(zd & zr, "corner:H", out)
    return out, (n_disc, r0m1, n_tr, n_b, exists)


def classify_region(p: ModelParams, omega, alpha, tol: float = DEFAULT_TOL) -> RegionLabel:
    """Label of one (omega, alpha) point.

    VI and VIa share a sign row; pointwise, VIa is the part of that
    pattern lying to the right of B1 on the omega axis.  :func:`build_map`
    additionally checks this against connected components of the raster.
    """
    w, a = (float(as_rational(v)) if isinstance(v, str) else float(v) for v in (omega, alpha))
    if not w > 0:
        raise ValueError("omega must be positive")
    if a < 0:
        raise ValueError("alpha must be nonnegative")
    names, (n_disc, r0m1, n_tr, n_b, exists) = classify_arrays(p, np.array([w]), np.array([a]), tol)
    tr_sign = str(_sign(n_tr, tol)[0]) if bool(exists[0]) else "undef"
    signs = (str(_sign(n_disc, tol)[0]), str(_sign(r0m1, tol)[0]), tr_sign, str(_sign(n_b, tol)[0]))
    name = str(names[0])
    if name in REGIONS:
        expected = TABLE[name]
        for k, (got, want) in enumerate(zip(signs, expected)):
            if want is None or (k == 2 and got == "undef"):
                continue
            if got != want:
                raise ValueError(f"unclassified sign pattern {signs} at ({w}, {a})")
    return RegionLabel(name, signs)


# -- exact helpers for the corner points ---------------------------------------------

def _plane_trace_poly(p: ModelParams) -> Tuple[RationalPoly, RationalPoly]:
    """(p(i), reduced trace numerator) in variables (i, w, a)."""
    variables = ("s", "i", "w", "a")
    tr, _ = jacobian_numerators(p, variables)
    target = _reduce_s(p, tr, variables, "alpha").with_variables(("i", "w", "a"))
    quad = endemic_poly(p, ("i", "w", "a"))
    return quad, target


def b_point_polynomial(p: ModelParams) -> Tuple[RationalPoly, RationalPoly]:
    """Resultant in omega of p(i) and the trace numerator on alpha = eta0 omega.

    Returns (full resultant, cubic cofactor after removing the omega and
    (v_s omega - mu) factors).
    """
    if not p.exact:
        raise ValueError("B points need exact parameters")
    d = derived(p)
    quad, target = _plane_trace_poly(p)
    w = RationalPoly.var("w", ("i", "w"))
    on_line = {"a": d.eta0 * w}
    res = sylvester_resultant(quad.subs(on_line), target.subs(on_line), "i").with_variables(("w",))
    if res.is_zero():
        raise ArithmeticError("B-point resultant vanishes identically")
    w1 = RationalPoly.var("w")
    rest = res
    for f in (w1, d.v_s * w1 - p.mu):
        while not rest.is_constant() and f.divides(rest):
            rest = rest.divexact(f)
    return res, rest.monic()


def solve_H(p: ModelParams) -> CornerPoint:
    """Closed-form corner where both interior points meet the DFE."""
    if not p.exact:
        p = p.as_exact()
    d = derived(p)
    if d.eta0 <= 0:
        raise ValueError("no H point (disease-free regime)")
    w = p.mu ** 2 * d.eta0 / (p.beta * p.b * d.v_s)
    a = d.eta0 * w
    q = p.with_treatment(w, a)
    from .model import endemic_quadratic, r0
    eq = endemic_quadratic(q)
    res = (eq.Delta, r0(q) - 1)
    if res != (0, 0):
        raise ArithmeticError(f"H residuals not exactly zero: {res}")
    # both interior roots collapse onto i = 0: Tr there is -mu
    from .model import jacobian, dfe
    J = jacobian(q, dfe(q))
    tr = J[0, 0] + J[1, 1]
    if tr != -p.mu:
        raise ArithmeticError(f"trace at H is {tr}, expected -mu")
    return CornerPoint("H", float(w), float(a), ("R0=1", "Delta=0"), (0.0, 0.0), (w, a),
                       {"trace": float(tr)})


def solve_B_points(p: ModelParams, range=None, tol=Fraction(1, 10**14)) -> List[CornerPoint]:
    """Intersections of R0 = 1 with Tr J(E2) = 0 via the resultant cubic.

    Each real root of the cubic is lifted to alpha = eta0 omega; the roots of
    the endemic quadratic there are 0 and -B/A, and the point is kept only
    when the zero trace sits on E2 (the larger one).
    """
    if not p.exact:
        p = p.as_exact()
    d = derived(p)
    full, cubic = b_point_polynomial(p)
    if cubic.degree("w") < 1:
        raise ArithmeticError(f"degenerate B-point resultant: {full.to_str()}")
    if range is None:
        range = (Fraction(0), cauchy_bound(cubic.univariate_coeffs()))
    roots = sturm_real_roots(cubic, range, tol)
    c = _base(p)
    kept, rejected = [], []
    for root in roots:
        w = float(root)
        a = float(d.eta0) * w
        A, B, C = quadratic_coeffs(c, w, a)
        i_other = -B / A
        i2 = max(0.0, i_other)
        i1 = min(0.0, i_other)
        t2, s2 = _trace_at(c, w, a, i2)
        t1, s1 = _trace_at(c, w, a, i1)
        info = {"root_interval": (root.low, root.high), "trace_E2": float(t2), "trace_E1": float(t1)}
        if abs(t2 / s2) <= abs(t1 / s1) and i2 > 0:
            kept.append((w, a, float(t2), info))
        else:
            rejected.append((w, a, info))
    out = []
    for k, (w, a, t2, info) in enumerate(sorted(kept)):
        info["rejected"] = [(rw, ra) for rw, ra, _ in rejected]
        out.append(CornerPoint(f"B{k + 1}", w, a, ("R0=1", "TrE2=0"), (abs(a - float(d.eta0) * w), abs(t2)),
                               None, info))
    return out


def merged_trace(c: _Base, w, a):
    """Tr J at i* = -B / 2A (the double root on Delta = 0)."""
    A, B, C = quadratic_coeffs(c, w, a)
    return _trace_at(c, w, a, -B / (2 * A))[0]


def _bt_residual(c: _Base, x):
    w, a = x
    A, B, C = quadratic_coeffs(c, w, a)
    return np.array([B * B - 4 * A * C, merged_trace(c, w, a)])


def bt_seed(p: ModelParams, window=(0.05, 14.0, 0.0, 14.0), step: float = 0.05):
    """First grid cell (ordered by omega, then alpha) where both Delta and
    the merged trace change sign with i* > 0."""
    c = _base(p)
    ws = np.arange(window[0], window[1] + step / 2, step)
    As = np.arange(window[2], window[3] + step / 2, step)
    W, Al = np.meshgrid(ws, As, indexing="ij")
    A, B, C = quadratic_coeffs(c, W, Al)
    D = B * B - 4 * A * C
    istar = -B / (2 * A)
    G = _trace_at(c, W, Al, np.where(istar > 0, istar, 1.0))[0]

    def changes(F):
        s = np.sign(F)
        return (s[:-1, :-1] != s[1:, :-1]) | (s[:-1, :-1] != s[:-1, 1:]) | (s[:-1, :-1] != s[1:, 1:])

    ok = changes(D) & changes(G) & (istar[:-1, :-1] > 0) & (istar[1:, 1:] > 0)
    idx = np.argwhere(ok)
    if len(idx) == 0:
        raise ArithmeticError("no sign-change cell for the BT seed")
    k, m = idx[0]
    return (ws[k] + step / 2, As[m] + step / 2)


class NewtonDivergence(ArithmeticError):
    def __init__(self, msg, iterates):
        super().__init__(msg)
        self.iterates = iterates


def solve_BT(p: ModelParams, seed=None, maxiter: int = 100) -> CornerPoint:
    """Newton on (Delta, Tr J(i*)) = 0, i* = -B/2A."""
    c = _base(p)
    if seed is None:
        seed = bt_seed(p)
    x = np.array(seed, dtype=float)
    iterates = [tuple(x)]
    for _ in range(maxiter):
        F = _bt_residual(c, x)
        h = 1e-7 * np.maximum(1.0, np.abs(x))
        J = np.empty((2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = h[k]
            J[:, k] = (_bt_residual(c, x + e) - _bt_residual(c, x - e)) / (2 * h[k])
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise NewtonDivergence("singular Jacobian in BT Newton", iterates)
        lam = 1.0
        while lam > 1e-4:
            xn = x + lam * dx
            if xn[0] > 0 and np.linalg.norm(_bt_residual(c, xn)) < np.linalg.norm(F) * (1 - 1e-4 * lam) + 1e-300:
                break
            lam /= 2
        x = x + lam * dx
        iterates.append(tuple(x))
        res = np.abs(_bt_residual(c, x))
        if np.all(res < 1e-12) or np.linalg.norm(dx) < 1e-14 * np.linalg.norm(x):
            break
    else:
        raise NewtonDivergence(f"BT Newton did not converge in {maxiter} iterations", iterates)
    res = np.abs(_bt_residual(c, x))
    if not np.all(res < 1e-10):
        raise NewtonDivergence(f"BT residuals {res} above 1e-10", iterates)
    w, a = float(x[0]), float(x[1])
    A, B, C = quadratic_coeffs(c, w, a)
    i = -B / (2 * A)
    s = c.b * (1 + c.xi * i) / (c.mu + c.v_s * i)
    return CornerPoint("BT", w, a, ("Delta=0", "TrE2=0"), (float(res[0]), float(res[1])), None,
                       {"merged": (float(s), float(i)), "iterations": len(iterates) - 1})


@lru_cache(maxsize=16)
def _corner_cache(p: ModelParams):
    return {"B": solve_B_points(p), "BT": solve_BT(p)}


def b1_omega(p: ModelParams) -> float:
    try:
        return _corner_cache(p.as_exact() if not p.exact else p)["B"][0].omega
    except Exception:
        return math.inf


def bt_omega(p: ModelParams) -> float:
    try:
        return _corner_cache(p.as_exact() if not p.exact else p)["BT"].omega
    except Exception:
        return math.inf


# -- curves -----------------------------------------------------------------------------

def _omega_grid(omega_range, n):
    lo, hi = omega_range
    if not (hi > lo > 0 or (hi > lo and lo == 0)):
        raise ValueError("omega range must be positive and increasing")
    return lo, hi, [lo + (hi - lo) * k / (n - 1) for k in range(n)] if n > 1 else [lo]


def _delta_poly_alpha(c: _Base, w):
    """Delta as a quadratic in alpha at fixed omega: coefficients (a2, a1, a0)."""
    vs, vi, mu, bb = c.v_s, c.v_i, c.mu, c.beta * c.b
    k = w * vs * vi - mu * vi - bb
    return vs * vs, 2 * vs * k, (w * vs * vi - mu * vi + bb) ** 2


@lru_cache(maxsize=16)
def trace_variety(p: ModelParams):
    return eliminated_variety(p if p.exact else p.as_exact(), "traceG", method="resultant")


def trace_curve(p: ModelParams, kind: str, omega_range=(0.01, 14.0), n_samples: int = 400,
                alpha_max: float = 1e3) -> CurvePolyline:
    if kind not in CURVES:
        raise ValueError(f"unknown curve {kind!r}")
    d = derived(p)
    c = _base(p)
    if kind in ("R0=1", "B=0") and p.exact:
        lo, hi = as_rational(omega_range[0]), as_rational(omega_range[1])
    else:
        lo, hi = float(omega_range[0]), float(omega_range[1])
    if not hi > lo or lo < 0:
        raise ValueError("omega range must be nonnegative and increasing")
    step = (hi - lo) / (n_samples - 1) if n_samples > 1 else 0
    omegas = [lo + k * step for k in range(n_samples)]
    points, resid = [], []
    if kind == "R0=1":
        for w in omegas:
            if w > 0:
                points.append((w, d.eta0 * w))
                resid.append(0.0)
    elif kind == "B=0":
        for w in omegas:
            a = p.mu * d.eta0 / d.v_s - d.v_i * w
            if w > 0 and a >= 0:
                points.append((w, a))
                resid.append(0.0)
    elif kind == "Delta=0":
        for w in omegas:
            w = float(w)
            if w <= 0:
                continue
            a2, a1, a0 = _delta_poly_alpha(c, w)
            disc = a1 * a1 - 4 * a2 * a0
            if disc < 0:
                continue
            for sgn in (-1, 1):
                a = (-a1 + sgn * math.sqrt(disc)) / (2 * a2)
                for _ in range(3):
                    f = (a2 * a + a1) * a + a0
                    g = 2 * a2 * a + a1
                    if g == 0:
                        break
                    a -= f / g
                if a >= 0 and a <= alpha_max:
                    scale = abs(a2) * a * a + abs(a1) * a + abs(a0)
                    points.append((w, a))
                    resid.append(abs((a2 * a + a1) * a + a0) / max(scale, 1e-300))
    else:
        var = trace_variety(p)
        poly = var.poly
        for w in omegas:
            w = float(w)
            if w <= 0:
                continue
            coeffs = _alpha_coeffs(poly, w)
            if not np.any(coeffs):
                continue
            for rt in np.roots(np.trim_zeros(coeffs, "f")):
                if abs(rt.imag) > 1e-6 * max(1.0, abs(rt.real)) or rt.real <= 0 or rt.real > alpha_max:
                    continue
                a = _polish_trace(p, c, w, rt.real)
                if a is None:
                    continue
                points.append((w, a))
                tr, scale = _trace_e2(c, w, a)
                resid.append(abs(tr))
        order = sorted(range(len(points)), key=lambda k: points[k])
        points = [points[k] for k in order]
        resid = [resid[k] for k in order]
    return CurvePolyline(kind, points, float(step), resid)


def _alpha_coeffs(poly: RationalPoly, w: float) -> np.ndarray:
    deg = poly.degree("a")
    coeffs = np.zeros(deg + 1)
    for mono, coef in poly.terms.items():
        kw, ka = mono
        coeffs[deg - ka] += float(coef) * w ** kw
    return coeffs


def _trace_e2(c: _Base, w, a):
    A, B, C = quadratic_coeffs(c, w, a)
    disc = B * B - 4 * A * C
    if disc < 0:
        return math.nan, math.nan
    sq = math.sqrt(disc)
    i2 = (-B + sq) / (2 * A) if B <= 0 else (2 * C) / (-B - sq)
    if not i2 > 0:
        return math.nan, math.nan
    return _trace_at(c, w, a, i2)


def _polish_trace(p, c: _Base, w: float, a0: float) -> Optional[float]:
    """Refine a trG root in alpha onto Tr J(E2) = 0; None if it is not an E2 zero."""
    tr, scale = _trace_e2(c, w, a0)
    if not np.isfinite(tr) or abs(tr) > 1e-5 * max(scale, 1e-12):
        return None
    f = lambda a: _trace_e2(c, w, a)[0]
    h = 1e-6 * max(1.0, a0)
    for _ in range(8):
        lo, hi = a0 - h, a0 + h
        flo, fhi = f(lo), f(hi)
        if np.isfinite(flo) and np.isfinite(fhi) and flo * fhi <= 0:
            return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        h /= 10
    return a0


# -- the map ---------------------------------------------------------------------------------

@dataclass
class AtlasMap:
    window: Tuple[float, float, float, float]
    resolution: Tuple[int, int]
    omegas: np.ndarray
    alphas: np.ndarray
    labels: np.ndarray
    curves: Dict[str, CurvePolyline]
    corners: Dict[str, CornerPoint]
    components: Dict[str, int]

    def counts(self) -> Dict[str, int]:
        names, cnt = np.unique(self.labels.astype(str), return_counts=True)
        return dict(zip(names.tolist(), cnt.tolist()))

    def region_names(self) -> set:
        return {n for n in self.counts() if n in REGIONS}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BIFURCAT_THREADS", "1")))
    except ValueError:
        return 1


def corner_points(p: ModelParams) -> Dict[str, CornerPoint]:
    out = {"H": solve_H(p)}
    for b in solve_B_points(p):
        out[b.name] = b
    out["BT"] = solve_BT(p)
    return out


def build_map(p: ModelParams, window=(0.0, 14.0, 0.0, 14.0), resolution=(400, 400),
              tol: float = DEFAULT_TOL, curves: bool = True, curve_samples: int = 400) -> AtlasMap:
    """Label a cell-centred raster of the window.

    The VI sign row is split into connected components; every component
    whose cells lie right of B1 is VIa, the rest VI.  The pointwise rule
    of :func:`classify_region` must agree with this split.
    """
    w0, w1, a0, a1 = (float(x) for x in window)
    if not (w1 > w0 >= 0 and a1 > a0 >= 0):
        raise ValueError("window must lie in the positive quadrant")
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    nw, na = resolution
    omegas = w0 + (np.arange(nw) + 0.5) * (w1 - w0) / nw
    alphas = a0 + (np.arange(na) + 0.5) * (a1 - a0) / na
    W, Al = np.meshgrid(omegas, alphas, indexing="ij")
    nthreads = _threads()
    if nthreads > 1:
        chunks = np.array_split(np.arange(nw), nthreads)
        with ThreadPoolExecutor(nthreads) as ex:
            parts = list(ex.map(lambda idx: classify_arrays(p, W[idx], Al[idx], tol, split_vi=False)[0], chunks))
        labels = np.concatenate(parts, axis=0)
    else:
        labels = classify_arrays(p, W, Al, tol, split_vi=False)[0]
    labels = np.asarray(labels, dtype=object)
    vi = labels == "VI"
    comp, ncomp = ndimage.label(vi, structure=np.ones((3, 3), dtype=int))
    w_b1 = b1_omega(p)
    n_vi = n_via = 0
    for k in range(1, ncomp + 1):
        mask = comp == k
        if np.all(W[mask] > w_b1):
            labels[mask] = "VIa"
            n_via += 1
        else:
            n_vi += 1
    # pointwise rule must give the same split
    pointwise = classify_arrays(p, W, Al, tol)[0]
    mismatch = int(np.sum((labels == "VIa") != (pointwise == "VIa")))
    corners = corner_points(p) if curves else {}
    polylines = {}
    if curves:
        rng = (max(w0, 1e-6), w1)
        for kind in CURVES:
            polylines[kind] = trace_curve(p, kind, rng, curve_samples)
    return AtlasMap((w0, w1, a0, a1), (nw, na), omegas, alphas, labels, polylines, corners,
                    {"VI": n_vi, "VIa": n_via, "pointwise_mismatch": mismatch})


# -- named points -------------------------------------------------------------------------

# Reported omega of the sample points on R0 = 1 and on Tr J(E2) = 0
R_OMEGAS = {"R1": "4.62051", "R2": "6.258", "R3": "7.652"}
T_POINTS = {"T1": ("6", "5.00625"), "T2": ("2.93233", "3.69658")}
Q_POINTS = {
    "Q_I": ("2.156", "3.468"),
    "Q_II": ("51/8", "43/8"),
    "Q_III": ("6", "5/32"),
    "Q_IV": ("11.75", "11.75"),
    "Q_V": ("6", "6"),
    "Q_VI": ("0.078125", "0.15625"),
    "Q_VIa": ("502/67", "41102/6131"),
}


@dataclass
class NamedPoint:
    name: str
    omega: float
    alpha: float
    description: str
    residuals: Dict[str, float]
    status: str = "ok"

    def to_json(self) -> dict:
        return {"name": self.name, "omega": self.omega, "alpha": self.alpha,
                "description": self.description, "residuals": self.residuals, "status": self.status}


def r_points(p: ModelParams) -> Dict[str, Tuple[Fraction, Fraction]]:
    """Samples on R0 = 1, exact in rational mode."""
    d = derived(p if p.exact else p.as_exact())
    return {k: (as_rational(w), d.eta0 * as_rational(w)) for k, w in R_OMEGAS.items()}


def t_point(p: ModelParams, name: str) -> Tuple[float, float]:
    """Sample on Tr J(E2) = 0 at the reported omega, alpha polished by brentq."""
    w, a = (float(as_rational(x)) for x in T_POINTS[name])
    c = _base(p)
    f = lambda al: _trace_e2(c, w, al)[0]
    h = 1e-3
    return w, optimize.brentq(f, a - h, a + h, xtol=1e-15)


def named_points(p: ModelParams) -> List[NamedPoint]:
    """Named corner and sample points ordered by omega, then interior points."""
    rows: List[NamedPoint] = []
    d = derived(p if p.exact else p.as_exact())
    eta0 = float(d.eta0)

    def attempt(name, fn):
        try:
            fn()
        except (ArithmeticError, ValueError) as exc:
            rows.append(NamedPoint(name, math.nan, math.nan, f"failed: {exc}", {}, "failed"))

    def corners():
        pts = corner_points(p)
        desc = {"H": "R0=1 meets Delta=0", "BT": "Delta=0 meets TrE2=0",
                "B1": "R0=1 meets TrE2=0", "B2": "R0=1 meets TrE2=0"}
        for k, c in pts.items():
            eqs = dict(zip(c.defining_equations, c.residuals))
            rows.append(NamedPoint(k, c.omega, c.alpha, desc[k], eqs))

    attempt("corners", corners)
    for k, (w, a) in r_points(p).items():
        rows.append(NamedPoint(k, float(w), float(a), "sample on R0=1", {"R0=1": float(a - d.eta0 * w)}))
    for k in T_POINTS:
        def one(k=k):
            w, a = t_point(p, k)
            tr = _trace_e2(_base(p), w, a)[0]
            rows.append(NamedPoint(k, w, a, "sample on TrE2=0", {"TrE2=0": abs(tr)}))
        attempt(k, one)
    boundary = sorted(rows, key=lambda r: (r.omega, r.name))
    interior = []
    for k, (w, a) in Q_POINTS.items():
        wf, af = float(as_rational(w)), float(as_rational(a))
        lab = classify_region(p, wf, af)
        interior.append(NamedPoint(k, wf, af, f"interior point of region {lab.name}", {}))
    return boundary + interior
