"""Equilibria of the planar model, their stability, and the eliminated
trace/determinant varieties in the (omega, alpha) plane."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .exactalg.groebner import DEFAULT_BUDGET, elimination_ideal, groebner_lex
from .exactalg.poly import RationalPoly
from .exactalg.resultant import sylvester_resultant
from .model import (ModelParams, State, derived, dfe, endemic_quadratic, jacobian, r0,
                    s_of_i)

NONNEG_TOL = 1e-12
DEGENERATE_TOL = 1e-9
MERGE_TOL = 1e-10


@dataclass(frozen=True)
class FixedPointReport:
    label: str
    coords: State
    eigenvalues: Tuple[complex, complex]
    det: float
    trace: float
    classification: str
    flags: Tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "coords": [float(self.coords.s), float(self.coords.i)],
            "eigenvalues": [{"re": float(z.real), "im": float(z.imag)} for z in self.eigenvalues],
            "det": float(self.det),
            "trace": float(self.trace),
            "classification": self.classification,
            "flags": list(self.flags),
        }


def classify_2x2(trace: float, det: float, scale: float = 1.0, tol: float = 1e-9) -> str:
    """Stability class from the invariants of a real 2x2 matrix."""
    eps = tol * max(scale, 1e-300)
    if det < -eps * scale:
        return "saddle"
    if abs(det) <= eps * scale or abs(trace) <= eps:
        return "center/degenerate"
    disc = trace * trace - 4 * det
    kind = "node" if disc >= 0 else "spiral"
    return ("stable " if trace < 0 else "unstable ") + kind


def eigen_2x2(trace: float, det: float) -> Tuple[complex, complex]:
    root = cmath.sqrt(trace * trace / 4 - det)
    return (trace / 2 + root, trace / 2 - root)


def _report(p: ModelParams, label: str, s: float, i: float, flags=()) -> FixedPointReport:
    J = jacobian(p.as_float(), (s, max(i, 0.0)))
    tr = float(J[0, 0] + J[1, 1])
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    scale = float(np.abs(J).max()) ** 2
    if label == "E0":
        # triangular at the DFE: report the diagonal in its natural order
        ev = (complex(J[0, 0]), complex(J[1, 1]))
    else:
        ev = eigen_2x2(tr, det)
    return FixedPointReport(label, State(s, i), ev, det, tr,
                            classify_2x2(tr, det, scale=max(scale, 1e-30) ** 0.5), tuple(flags))


def fixed_points(p: ModelParams) -> List[FixedPointReport]:
    """E0 plus every nonnegative interior root of the endemic quadratic."""
    pf = p.as_float()
    out = [_report(p, "E0", float(dfe(pf).s), 0.0)]
    q = endemic_quadratic(p)
    A, B, C = float(q.A), float(q.B), float(q.C)
    delta = float(q.Delta)
    scale = B * B + 4 * abs(A * C)
    if scale == 0 or delta < -MERGE_TOL * scale:
        return out
    if abs(delta) <= MERGE_TOL * scale:
        i = -B / (2 * A)
        if i > -NONNEG_TOL:
            flags = ("boundary-degenerate",) if i < DEGENERATE_TOL else ()
            out.append(_report(p, "merged", float(s_of_i(pf, max(i, 0.0))), i, flags))
        return out
    i1, i2 = q.roots()
    for label, i in (("E1", i1), ("E2", i2)):
        if i > -NONNEG_TOL:
            flags = ("boundary-degenerate",) if i < DEGENERATE_TOL else ()
            out.append(_report(p, label, float(s_of_i(pf, max(i, 0.0))), float(i), flags))
    return out


def endemic_point(p: ModelParams, which: str) -> Tuple[float, float]:
    """(s, i) of E1 or E2; raises when the point is absent or not positive."""
    if which not in ("E1", "E2"):
        raise ValueError("which must be 'E1' or 'E2'")
    q = endemic_quadratic(p)
    delta = float(q.Delta)
    scale = float(q.B) ** 2 + 4 * abs(float(q.A) * float(q.C))
    if delta < -MERGE_TOL * scale:
        raise ValueError(f"{which} does not exist (Delta < 0)")
    if delta < 0:
        i = -float(q.B) / (2 * float(q.A))
    else:
        i1, i2 = q.roots()
        i = i1 if which == "E1" else i2
    if i <= 0:
        raise ValueError(f"{which} does not exist (i = {i:g} <= 0)")
    return float(s_of_i(p.as_float(), i)), float(i)


def psi(p: ModelParams, i):
    """Psi(i) = v_s v_i (i + omega)^2 + alpha (omega v_s - mu)."""
    d = derived(p)
    return d.v_s * d.v_i * (i + p.omega) ** 2 + p.eta * p.omega * (p.omega * d.v_s - p.mu)


def det_from_psi(p: ModelParams, i):
    return i * psi(p, i) / ((1 + p.xi * i) * (i + p.omega) ** 2)


@dataclass(frozen=True)
class SaddleVerdict:
    det_e1: float
    det_e2: float

    @property
    def holds(self) -> bool:
        return self.det_e1 < 0 < self.det_e2


def saddle_check(p: ModelParams) -> SaddleVerdict:
    q = endemic_quadratic(p)
    if float(q.Delta) <= 0:
        raise ValueError("no interior equilibria")
    i1, i2 = q.roots()
    if not (i1 > 0 and i2 > 0):
        raise ValueError("no interior equilibria")
    dets = []
    for i in (i1, i2):
        J = jacobian(p.as_float(), (float(s_of_i(p.as_float(), i)), float(i)))
        dets.append(float(np.linalg.det(J)))
    return SaddleVerdict(*dets)


def trace_at_endemic(p: ModelParams, which: str = "E2") -> float:
    """Tr J at E1/E2 with s taken from the i-nullcline.

    s = (1 + xi i)(eta omega + v_i i + v_i omega) / (beta (i + omega))
    """
    _, i = endemic_point(p, which)
    pf = p.as_float()
    d = derived(pf)
    w, eta = pf.omega, pf.eta
    s = (1 + pf.xi * i) * (eta * w + d.v_i * i + d.v_i * w) / (pf.beta * (i + w))
    J = jacobian(pf, (s, i))
    return float(J[0, 0] + J[1, 1])


def trace_at_root(p: ModelParams, i: float) -> float:
    """Tr J on the s-nullcline at infection level i (any sign)."""
    pf = p.as_float()
    d = derived(pf)
    q = 1 + pf.xi * i
    s = pf.b * q / (pf.mu + d.v_s * i)
    sat = pf.eta * pf.omega ** 2 / (pf.omega + i) ** 2
    return -pf.beta * i / q - pf.mu + pf.beta * s / q ** 2 - sat - d.v_i


# -- eliminated varieties -----------------------------------------------------------

PLANE_VARS = ("w", "a")


@dataclass
class EliminatedVariety:
    kind: str
    poly: RationalPoly
    factors: List[Tuple[str, RationalPoly, int]]
    method: str
    symbols: Tuple[str, str] = PLANE_VARS
    unit: Fraction = Fraction(1)

    def evaluate(self, omega: float, second: float) -> float:
        return self.poly.evaluate_float({self.symbols[0]: omega, self.symbols[1]: second})

    def normalized(self, omega: float, second: float) -> float:
        """Value divided by the sum of absolute term values (scale-free)."""
        vals = {self.symbols[0]: omega, self.symbols[1]: second}
        return self.poly.evaluate_float(vals) / self.poly.abs_evaluate_float(vals)

    def factor(self, name: str) -> RationalPoly:
        for n, f, _ in self.factors:
            if n == name:
                return f
        raise KeyError(name)


def _plane_symbols(p: ModelParams, variables: Sequence[str], second: str):
    """(w, alpha-expression) as polynomials; alpha = eta * w in the eta chart."""
    w = RationalPoly.var("w", variables)
    if second == "alpha":
        return w, RationalPoly.var("a", variables)
    return w, RationalPoly.var("e", variables) * w


def stationarity_polys(p: ModelParams, variables: Sequence[str], second: str = "alpha"):
    """Numerators of s' and i'/i with omega, alpha symbolic."""
    s, i = RationalPoly.var("s", variables), RationalPoly.var("i", variables)
    w, a = _plane_symbols(p, variables, second)
    d = derived(p)
    q = 1 + p.xi * i
    e1 = (p.b - p.mu * s) * q - p.beta * s * i
    e2 = p.beta * s * (w + i) - a * q - d.v_i * q * (w + i)
    return e1, e2


def jacobian_numerators(p: ModelParams, variables: Sequence[str], second: str = "alpha"):
    """Trace and determinant of J times (1 + xi i)^2 (w + i)^2 (resp. its square)."""
    s, i = RationalPoly.var("s", variables), RationalPoly.var("i", variables)
    w, a = _plane_symbols(p, variables, second)
    d = derived(p)
    q = 1 + p.xi * i
    j11 = (-p.beta * i * q - p.mu * q ** 2) * (w + i) ** 2
    j12 = -p.beta * s * (w + i) ** 2
    j21 = p.beta * i * q * (w + i) ** 2
    j22 = -a * w * q ** 2 + p.beta * s * (w + i) ** 2 - d.v_i * q ** 2 * (w + i) ** 2
    return j11 + j22, j11 * j22 - j12 * j21


def _reduce_s(p: ModelParams, f: RationalPoly, variables, second) -> RationalPoly:
    """Rewrite f without s using beta s (w + i) = (1 + xi i)(alpha + v_i (w + i)).

    f differs from the result by a multiple of the i-equation, so both
    generate the same ideal together with it.  Powers of the vector-field
    denominators (1 + xi i) and (w + i) are then divided out.
    """
    i = RationalPoly.var("i", variables)
    w, a = _plane_symbols(p, variables, second)
    d = derived(p)
    coeffs = f.coefficients_in("s")
    if max(coeffs) > 1:
        raise ArithmeticError("expected f linear in s")
    zero = RationalPoly.constant(0, variables)
    c1 = coeffs.get(1, zero).divexact(p.beta * (w + i))
    g = coeffs.get(0, zero) + c1 * (1 + p.xi * i) * (a + d.v_i * (w + i))
    for den in (1 + p.xi * i, w + i):
        while den.divides(g):
            g = g.divexact(den)
    return g


def endemic_poly(p: ModelParams, variables=("i", "w", "a"), second: str = "alpha") -> RationalPoly:
    """The endemic quadratic in i with omega, alpha symbolic (s eliminated)."""
    e1, e2 = stationarity_polys(p, ("s",) + tuple(variables), second)
    res = sylvester_resultant(e1, e2, "s")
    i = RationalPoly.var("i", res.variables)
    res = res.divexact(1 + p.xi * i)
    return res.with_variables(tuple(variables))


def _candidate_factors(p: ModelParams, variables, second) -> List[Tuple[str, RationalPoly]]:
    w, a = _plane_symbols(p, variables, second)
    d = derived(p)
    alpha_sym = RationalPoly.var("a" if second == "alpha" else "e", variables)
    cands = [("omega", w), ("alpha" if second == "alpha" else "eta", alpha_sym)]
    # R0 = 1 line: alpha = eta0 * omega
    if second == "alpha":
        cands.append(("R0-1", a - d.eta0 * w))
    else:
        cands.append(("R0-1", alpha_sym - d.eta0))
    A = d.v_s * d.v_i
    B = (d.v_i + 0) * d.v_s * w + d.v_s * a - p.mu * d.eta0
    C = p.mu * a - p.mu * d.eta0 * w
    cands.append(("Delta", B * B - 4 * A * C))
    cands.append(("omega*v_s-mu", d.v_s * w - p.mu))
    if second == "eta":
        F1, F2 = tr3_factor_polys(p, variables)
        cands.append(("tr3-F1", F1))
        cands.append(("tr3-F2", F2))
    out = []
    for name, f in cands:
        f = f.with_variables(tuple(variables)).drop_unused()
        if not f.is_constant():
            out.append((name, f.with_variables(tuple(variables)).primitive()))
    return out


def _normalize_sign(f: RationalPoly) -> RationalPoly:
    f = f.primitive()
    return -f if f.leading_term()[1] < 0 else f


def factor_by_candidates(poly: RationalPoly, candidates) -> Tuple[List[Tuple[str, RationalPoly, int]], Fraction]:
    """Trial division by known factors; the leftover is reported as 'cofactor'."""
    rest = poly
    found = []
    for name, f in candidates:
        k = 0
        while not rest.is_constant() and f.divides(rest):
            rest = rest.divexact(f)
            k += 1
        if k:
            found.append((name, _normalize_sign(f), k))
    unit = Fraction(1)
    if rest.is_constant():
        unit = rest.constant_value()
    else:
        prim = _normalize_sign(rest)
        unit = rest.leading_term()[1] / prim.leading_term()[1]
        found.append(("cofactor", prim, 1))
    return found, unit


def eliminated_variety(p: ModelParams, kind: str = "traceG", method: str = "groebner",
                       second: str = "alpha", budget: int = DEFAULT_BUDGET) -> EliminatedVariety:
    """trG / detG: eliminate (s, i) from the fixed-point system plus Tr J or det J.

    ``second`` picks the chart: 'alpha' for (omega, alpha), 'eta' for (omega, eta).
    The Groebner route saturates by (1 + xi i) through an extra variable t,
    since (s, i) = (0, -1/xi) solves the stationarity equations for every
    parameter value.  The resultant route eliminates s from the
    stationarity equations, then i against the reduced trace/determinant.
    """
    if kind not in ("traceG", "detG"):
        raise ValueError("kind must be 'traceG' or 'detG'")
    if method not in ("groebner", "resultant"):
        raise ValueError("method must be 'groebner' or 'resultant'")
    if second not in ("alpha", "eta"):
        raise ValueError("second must be 'alpha' or 'eta'")
    if not p.exact:
        raise ValueError("eliminated varieties need exact parameters")
    sym = "a" if second == "alpha" else "e"
    plane = ("w", sym)
    variables = ("t", "s", "i") + plane
    e1, e2 = stationarity_polys(p, variables, second)
    tr, det = jacobian_numerators(p, variables, second)
    target = _reduce_s(p, tr if kind == "traceG" else det, variables, second)
    if method == "groebner":
        t, i = RationalPoly.var("t", variables), RationalPoly.var("i", variables)
        sat = t * (1 + p.xi * i) - 1
        basis = groebner_lex([e1, e2, target, sat], variables, budget=budget)
        elim = elimination_ideal(basis, ("t", "s", "i"))
        if not elim:
            raise ArithmeticError("elimination ideal is zero")
        poly = elim[0]
        for g in elim[1:]:
            if g.total_degree() < poly.total_degree():
                poly = g
    else:
        pv = ("i",) + plane
        quad = endemic_poly(p, pv, second)
        poly = sylvester_resultant(quad, target.with_variables(("t", "s") + pv).with_variables(pv), "i")
    poly = poly.with_variables(plane)
    if poly.is_zero():
        raise ArithmeticError("eliminant vanished identically")
    poly = _normalize_sign(poly)
    factors, unit = factor_by_candidates(poly, _candidate_factors(p, plane, second))
    return EliminatedVariety(kind, poly, factors, method, plane, unit)


def product_object(p: ModelParams, kind: str = "traceG") -> float:
    """Product over both interior roots of Tr J (or det J), complex roots allowed."""
    q = endemic_quadratic(p)
    A, B, C = float(q.A), float(q.B), float(q.C)
    sq = cmath.sqrt(B * B - 4 * A * C)
    vals = []
    for i in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
        vals.append(_tr_det_complex(p.as_float(), i)[0 if kind == "traceG" else 1])
    return (vals[0] * vals[1]).real


def _tr_det_complex(pf: ModelParams, i: complex):
    d = derived(pf)
    qx = 1 + pf.xi * i
    s = pf.b * qx / (pf.mu + d.v_s * i)
    j11 = -pf.beta * i / qx - pf.mu
    j12 = -pf.beta * s / qx ** 2
    j21 = pf.beta * i / qx
    j22 = pf.beta * s / qx ** 2 - pf.eta * pf.omega ** 2 / (pf.omega + i) ** 2 - d.v_i
    return j11 + j22, j11 * j22 - j12 * j21


def observed_ratio(variety: EliminatedVariety, p: ModelParams, points) -> List[float]:
    """variety / product-over-interior-points at sample points of the plane."""
    out = []
    for w, x in points:
        alpha = x if variety.symbols[1] == "a" else x * w
        q = p.with_treatment(w, alpha)
        out.append(variety.evaluate(float(w), float(x)) / product_object(q, variety.kind))
    return out


# -- tr3 factors ------------------------------------------------------------------

def tr3_factor_polys(p: ModelParams, variables=("w", "e")) -> Tuple[RationalPoly, RationalPoly]:
    """The two displayed trace factors in (omega, eta), denominators cleared."""
    w = RationalPoly.var("w", variables)
    e = RationalPoly.var("e", variables)
    g, dl, mu, beta, xi = p.gamma, p.delta, p.mu, p.beta, p.xi
    K = 2 * mu * (g + dl + e) + (g + dl) * (g + dl + e) + mu ** 2
    F1 = w * (g + dl + e + mu) * (beta * e + xi * K) - (g + dl + mu) * K
    F2 = (xi * w ** 2 * (beta + mu * xi) ** 2 * (g + dl + e + mu)
          - w * (beta + mu * xi) * (beta * e + mu * xi * (2 * g + 2 * dl + e + 2 * mu))
          + mu ** 2 * xi * (g + dl + mu))
    return F1, F2


@dataclass(frozen=True)
class Tr3Residuals:
    omega: float
    eta: float
    residuals: Dict[str, float]
    tol: float

    @property
    def vanishing(self) -> List[str]:
        return [k for k, v in self.residuals.items() if abs(v) < self.tol]


def tr3_factor_check(p: ModelParams, cubic: RationalPoly | None = None, tol: float = 1e-6) -> Tr3Residuals:
    """Normalised values of the trace factors at the treatment point of ``p``.

    ``cubic`` is the remaining factor recovered from our own elimination in
    the (omega, eta) chart (see :func:`tr3_cubic`).
    """
    F1, F2 = tr3_factor_polys(p)
    w, e = float(p.omega), float(p.eta)
    vals = {"w": w, "e": e}
    res = {}
    for name, f in (("F1", F1), ("F2", F2)) + ((("cubic", cubic),) if cubic is not None else ()):
        res[name] = f.evaluate_float(vals) / f.abs_evaluate_float(vals)
    return Tr3Residuals(w, e, res, tol)


def tr3_cubic(p: ModelParams, method: str = "resultant") -> RationalPoly:
    """Cofactor of trG in the (omega, eta) chart once known factors are removed."""
    var = eliminated_variety(p, "traceG", method=method, second="eta")
    rest = [f for n, f, _ in var.factors if n == "cofactor"]
    if not rest:
        raise ArithmeticError("trG has no cofactor")
    return rest[0]
