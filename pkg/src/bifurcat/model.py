"""SIR model with saturated incidence and saturated treatment.

State (s, i, r); general right-hand side

    s' = b - s (gamma_s + mu + beta i / (1 + xi i)) + i_s i + gamma_r r
    i' = i (beta s / (1 + xi i) - eta omega / (omega + i) - v_i)
    r' = gamma_s s + i_r i + eta omega i / (omega + i) - (mu + gamma_r) r

with v_i = gamma + mu + delta and gamma = i_s + i_r.  The reduced model sets
gamma_r = gamma_s = i_s = 0, after which r decouples and (s, i) is a
planar system.

Parameters are stored exactly (``Fraction``); ``as_float()`` gives the
binary64 view used by the integrators.  Every function here works in both
modes and returns values of the same kind as its inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, Tuple, Union

import numpy as np

from .exactalg.groebner import groebner_lex, elimination_ideal
from .exactalg.poly import RationalPoly, as_rational

Number = Union[Fraction, float]

VARIANTS = ("general", "reduced3d", "reduced2d")

PARAM_ORDER = ("b", "mu", "beta", "gamma", "delta", "xi", "eta", "omega",
               "gamma_r", "gamma_s", "i_s", "i_r")

DEFAULT_PARAMS = Path(__file__).with_name("params") / "zhoufan_corrected.json"


def _is_exact(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


@dataclass(frozen=True)
class ModelParams:
    """The twelve rates of the general model.

    ``gamma`` must equal ``i_s + i_r``.  Use :meth:`reduced` for the planar
    model and :meth:`with_treatment` to move in the (omega, alpha) plane.
    """

    b: Number
    mu: Number
    beta: Number
    gamma: Number
    delta: Number
    xi: Number
    eta: Number = Fraction(0)
    omega: Number = Fraction(0)
    gamma_r: Number = Fraction(0)
    gamma_s: Number = Fraction(0)
    i_s: Number = Fraction(0)
    i_r: Number | None = None

    def __post_init__(self):
        if self.i_r is None:
            object.__setattr__(self, "i_r", self.gamma - self.i_s)
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, int) and not isinstance(v, bool):
                object.__setattr__(self, f.name, Fraction(v))
                v = Fraction(v)
            if v < 0:
                raise ValueError(f"parameter {f.name} must be nonnegative, got {v}")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.b > 0:
            raise ValueError("b must be positive")
        if self.eta > 0 and not self.omega > 0:
            raise ValueError("omega must be positive when eta > 0")
        mismatch = self.gamma - (self.i_s + self.i_r)
        if (mismatch != 0) if self.exact else abs(mismatch) > 1e-12 * max(1.0, abs(float(self.gamma))):
            raise ValueError("gamma must equal i_s + i_r")

    # -- constructors ------------------------------------------------------------

    @classmethod
    def reduced(cls, b, mu, beta, gamma, delta, xi, eta=0, omega=0) -> "ModelParams":
        """Planar model: gamma_r = gamma_s = i_s = 0 and gamma = i_r."""
        vals = [as_rational(v) for v in (b, mu, beta, gamma, delta, xi, eta, omega)]
        b, mu, beta, gamma, delta, xi, eta, omega = vals
        return cls(b, mu, beta, gamma, delta, xi, eta, omega,
                   Fraction(0), Fraction(0), Fraction(0), gamma)

    @classmethod
    def base(cls) -> "ModelParams":
        """The shipped corrected base set (treatment switched off)."""
        return load_params(DEFAULT_PARAMS)

    def with_treatment(self, omega, alpha) -> "ModelParams":
        """Set (omega, alpha) with eta = alpha / omega."""
        if self.exact:
            omega, alpha = as_rational(omega), as_rational(alpha)
        else:
            omega, alpha = float(omega), float(alpha)
        if omega <= 0:
            if alpha > 0:
                raise ValueError("eta is undefined for omega = 0 and alpha > 0")
            raise ValueError("treatment capacity omega must be positive")
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        return replace(self, omega=omega, eta=alpha / omega)

    # -- views -------------------------------------------------------------------

    @property
    def exact(self) -> bool:
        return all(_is_exact(getattr(self, f.name)) for f in fields(self))

    @property
    def is_reduced(self) -> bool:
        return self.gamma_r == 0 and self.gamma_s == 0 and self.i_s == 0

    @property
    def alpha(self) -> Number:
        return self.eta * self.omega

    def as_float(self) -> "ModelParams":
        return replace(self, **{f.name: float(getattr(self, f.name)) for f in fields(self)})

    def as_exact(self) -> "ModelParams":
        return replace(self, **{f.name: as_rational(getattr(self, f.name)) for f in fields(self)})

    def to_dict(self) -> Dict[str, str]:
        if not self.exact:
            raise ValueError("only exact parameters serialize")
        return {k: str(getattr(self, k)) for k in PARAM_ORDER}

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ModelParams":
        unknown = set(data) - set(PARAM_ORDER)
        if unknown:
            raise ValueError(f"unknown parameter(s): {sorted(unknown)}")
        vals = {k: as_rational(v) for k, v in data.items()}
        for key in ("b", "mu", "beta", "delta", "xi"):
            if key not in vals:
                raise ValueError(f"missing parameter {key!r}")
        if "gamma" not in vals:
            if "i_r" not in vals:
                raise ValueError("missing parameter 'gamma'")
            vals["gamma"] = vals.get("i_s", Fraction(0)) + vals["i_r"]
        return cls(**vals)


def load_params(path) -> ModelParams:
    with open(path) as fh:
        return ModelParams.from_dict(json.load(fh))


def dump_params(p: ModelParams, path=None) -> str:
    text = json.dumps(p.to_dict(), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


@dataclass(frozen=True)
class DerivedRates:
    v_i: Number
    v_s: Number
    V_i: Number
    eta0: Number
    alpha: Number

    @classmethod
    def of(cls, p: ModelParams) -> "DerivedRates":
        v_i = p.gamma + p.mu + p.delta
        if not v_i > 0:
            raise ValueError("v_i must be positive")
        return cls(v_i=v_i, v_s=p.beta + p.xi * p.mu, V_i=v_i + p.eta,
                   eta0=eta_critical(p), alpha=p.eta * p.omega)


def derived(p: ModelParams) -> DerivedRates:
    return DerivedRates.of(p)


@dataclass(frozen=True)
class State:
    s: Number
    i: Number
    r: Number = 0

    def as_array(self, variant: str = "reduced2d") -> np.ndarray:
        if variant == "reduced2d":
            return np.array([float(self.s), float(self.i)])
        return np.array([float(self.s), float(self.i), float(self.r)])


# -- right-hand side and Jacobian ------------------------------------------------

def _unpack(x, variant):
    if isinstance(x, State):
        s, i, r = x.s, x.i, x.r
    else:
        x = list(x)
        s, i = x[0], x[1]
        r = x[2] if len(x) > 2 else 0
    if s < 0 or i < 0 or r < 0:
        raise ValueError("state outside nonnegative octant")
    return s, i, r


def _check_variant(p: ModelParams, variant: str):
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant != "general" and not p.is_reduced:
        raise ValueError("reduced variants need gamma_r = gamma_s = i_s = 0")


def _treatment(p: ModelParams, i):
    # eta*omega*i/(omega+i), zero when there is no treatment
    if p.eta == 0:
        return 0 * i
    return p.eta * p.omega * i / (p.omega + i)


def vector_field(p: ModelParams, x, variant: str = "reduced2d") -> Tuple:
    _check_variant(p, variant)
    s, i, r = _unpack(x, variant)
    v_i = p.gamma + p.mu + p.delta
    force = p.beta * i / (1 + p.xi * i)
    ds = p.b - s * (p.gamma_s + p.mu + force) + p.i_s * i + p.gamma_r * r
    di = s * force - _treatment(p, i) - v_i * i
    if variant == "reduced2d":
        return (ds, di)
    dr = p.gamma_s * s + p.i_r * i + _treatment(p, i) - (p.mu + p.gamma_r) * r
    return (ds, di, dr)


def jacobian(p: ModelParams, x, variant: str = "reduced2d") -> np.ndarray:
    """Analytic Jacobian (valid at every state, not only at equilibria)."""
    _check_variant(p, variant)
    s, i, r = _unpack(x, variant)
    v_i = p.gamma + p.mu + p.delta
    q = 1 + p.xi * i
    sat = p.eta * p.omega ** 2 / (p.omega + i) ** 2 if p.eta != 0 else 0 * i
    j11 = -(p.gamma_s + p.mu + p.beta * i / q)
    j12 = -p.beta * s / q ** 2 + p.i_s
    j21 = p.beta * i / q
    j22 = p.beta * s / q ** 2 - sat - v_i
    exact = p.exact and all(_is_exact(v) for v in (s, i, r))
    dtype = object if exact else float
    if variant == "reduced2d":
        return np.array([[j11, j12], [j21, j22]], dtype=dtype)
    rows = [[j11, j12, p.gamma_r],
            [j21, j22, 0 * i],
            [p.gamma_s, p.i_r + sat, -(p.mu + p.gamma_r)]]
    return np.array(rows, dtype=dtype)


# -- disease-free equilibrium and threshold ----------------------------------------

def dfe(p: ModelParams) -> State:
    m = p.mu + p.gamma_r + p.gamma_s
    s = p.b * (p.mu + p.gamma_r) / (p.mu * m)
    r = p.b * p.gamma_s / (p.mu * m)
    return State(s, 0 * s, r)


def r0(p: ModelParams) -> Number:
    v_i = p.gamma + p.mu + p.delta
    return dfe(p).s * p.beta / (v_i + p.eta)


def eta_critical(p: ModelParams) -> Number:
    """Treatment rate at which r0 equals one (negative if r0 < 1 untreated)."""
    return dfe(p).s * p.beta - (p.gamma + p.mu + p.delta)


def dfe_eigenvalues(p: ModelParams) -> Tuple:
    """Eigenvalues of the general 3x3 Jacobian at the DFE.

    The (s, r) block decouples from the i row: -mu, -(mu + gamma_r + gamma_s)
    and the infection eigenvalue s_dfe*beta - v_i - eta.
    """
    v_i = p.gamma + p.mu + p.delta
    return (-p.mu, -(p.mu + p.gamma_r + p.gamma_s), dfe(p).s * p.beta - v_i - p.eta)


# -- endemic equilibria ------------------------------------------------------------------

@dataclass(frozen=True)
class EndemicQuadratic:
    """Coefficients of A i^2 + B i + C = 0 for the interior equilibria."""

    A: Number
    B: Number
    C: Number

    @property
    def Delta(self) -> Number:
        return self.B * self.B - 4 * self.A * self.C

    def roots(self) -> Tuple[complex, complex]:
        """(i1, i2) with i1 <= i2 when real."""
        A, B, C = float(self.A), float(self.B), float(self.C)
        d = float(self.Delta)
        if d >= 0:
            sq = np.sqrt(d)
            # cancellation-free pair
            q = -0.5 * (B + np.copysign(sq, B)) if B != 0 else -0.5 * sq
            if q == 0:
                return (0.0, 0.0)
            r1, r2 = q / A, C / q
            return (min(r1, r2), max(r1, r2))
        sq = 1j * np.sqrt(-d)
        return ((-B - sq) / (2 * A), (-B + sq) / (2 * A))


def endemic_quadratic(p: ModelParams) -> EndemicQuadratic:
    d = derived(p)
    A = d.v_s * d.v_i
    B = d.V_i * d.v_s * p.omega - p.mu * d.eta0
    C = p.omega * p.mu * d.V_i * (1 - r0(p))
    return EndemicQuadratic(A, B, C)


def discriminant_expansion(p: ModelParams) -> Number:
    """Delta written out as a quadratic in alpha."""
    d = derived(p)
    a, w, vs, vi = p.eta * p.omega, p.omega, d.v_s, d.v_i
    return (a ** 2 * vs ** 2 + 2 * a * vs * (w * vs * vi - p.mu * vi - p.beta * p.b)
            + (w * vs * vi - p.mu * vi + p.beta * p.b) ** 2)


def s_of_i(p: ModelParams, i):
    """s on the s-nullcline, b (1 + xi i) / (mu + v_s i)."""
    return p.b * (1 + p.xi * i) / (p.mu + (p.beta + p.xi * p.mu) * i)


# -- scalarization of the general model ---------------------------------------------------

@dataclass(frozen=True)
class Scalarization:
    """Univariate eliminant in i of the general fixed-point system.

    ``factors`` is (i, linear, quadratic) with ``poly == unit * prod``;
    ``s_map`` and ``r_map`` are (numerator, denominator) pairs in i.
    """

    poly: RationalPoly
    factors: Tuple[RationalPoly, RationalPoly, RationalPoly]
    unit: Fraction
    s_map: Tuple[RationalPoly, RationalPoly]
    r_map: Tuple[RationalPoly, RationalPoly]

    def s(self, i):
        return self.s_map[0].evaluate({"i": i}) / self.s_map[1].evaluate({"i": i})

    def r(self, i):
        return self.r_map[0].evaluate({"i": i}) / self.r_map[1].evaluate({"i": i})


def fixed_point_numerators(p: ModelParams, variables=("r", "s", "i")):
    """Numerators of (s', i', r') with denominators (1 + xi i), (omega + i) cleared."""
    r, s, i = (RationalPoly.var(v, variables) for v in ("r", "s", "i"))
    v_i = p.gamma + p.mu + p.delta
    q = 1 + p.xi * i
    w = p.omega + i
    f1 = (p.b - s * (p.gamma_s + p.mu) + p.i_s * i + p.gamma_r * r) * q - p.beta * s * i
    f2 = i * (p.beta * s * w - p.eta * p.omega * q - v_i * q * w)
    f3 = (p.gamma_s * s + p.i_r * i - (p.mu + p.gamma_r) * r) * w + p.eta * p.omega * i
    return f1, f2, f3


def scalarize_general(p: ModelParams, budget: int | None = None) -> Scalarization:
    """Eliminate (r, s) from the fixed-point system by a lex Groebner basis."""
    if not p.exact:
        raise ValueError("scalarization needs exact parameters")
    order = ("r", "s", "i")
    system = fixed_point_numerators(p, order)
    kw = {} if budget is None else {"budget": budget}
    basis = groebner_lex(list(system), order, **kw)
    uni = elimination_ideal(basis, ("r", "s"))
    if len(uni) != 1:
        raise ArithmeticError(f"expected one eliminant in i, got {len(uni)}")
    poly = uni[0].with_variables(("i",))
    i = RationalPoly.var("i")
    rest = poly
    if not i.divides(rest):
        raise ArithmeticError("i = 0 is not a root of the eliminant")
    rest = rest.divexact(i)
    # linear factor: the (1 + xi i) and (omega + i) denominators are the candidates
    linear = None
    for cand in (1 + p.xi * i, p.omega + i):
        if cand.degree("i") == 1 and cand.divides(rest):
            linear = cand.monic()
            break
    if linear is None:
        raise ArithmeticError("no linear factor with negative root found")
    quad = rest.divexact(linear)
    if quad.degree("i") != 2:
        raise ArithmeticError(f"cofactor has degree {quad.degree('i')}, expected 2")
    lead = quad.univariate_coeffs()[0]
    quad = quad / lead
    unit = poly.univariate_coeffs()[0]
    s_map, r_map = _solve_s_r(p)
    return Scalarization(poly, (i, linear, quad), unit, s_map, r_map)


def _solve_s_r(p: ModelParams):
    """Solve the s and r stationarity equations (linear in s, r) by Cramer."""
    i = RationalPoly.var("i")
    q = 1 + p.xi * i
    w = p.omega + i
    # a11 s + a12 r = c1 ; a21 s + a22 r = c2
    a11 = (p.gamma_s + p.mu) * q + p.beta * i
    a12 = -p.gamma_r * q
    c1 = (p.b + p.i_s * i) * q
    a21 = p.gamma_s * w
    a22 = -(p.mu + p.gamma_r) * w
    c2 = -(p.i_r * i * w + p.eta * p.omega * i)
    det = a11 * a22 - a12 * a21
    s_num = c1 * a22 - a12 * c2
    r_num = a11 * c2 - c1 * a21
    return (s_num, det), (r_num, det)


# -- float fast paths for the integrators ------------------------------------------------

def reduced2d_rhs(p: ModelParams) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised float right-hand side f(x) for the planar model."""
    pf = p.as_float()
    b, mu, beta, xi = pf.b, pf.mu, pf.beta, pf.xi
    v_i = pf.gamma + pf.mu + pf.delta
    alpha, omega = pf.eta * pf.omega, pf.omega

    def f(x):
        s, i = x[0], x[1]
        force = beta * i / (1.0 + xi * i)
        treat = alpha * i / (omega + i) if alpha else 0.0 * i
        return np.array([b - s * (mu + force), s * force - treat - v_i * i])

    return f


def reduced2d_jac(p: ModelParams) -> Callable[[np.ndarray], np.ndarray]:
    pf = p.as_float()
    mu, beta, xi = pf.mu, pf.beta, pf.xi
    v_i = pf.gamma + pf.mu + pf.delta
    alpha, omega = pf.eta * pf.omega, pf.omega

    def J(x):
        s, i = x[0], x[1]
        q = 1.0 + xi * i
        sat = alpha * omega / (omega + i) ** 2 if alpha else 0.0
        return np.array([[-beta * i / q - mu, -beta * s / q ** 2],
                         [beta * i / q, beta * s / q ** 2 - sat - v_i]])

    return J
