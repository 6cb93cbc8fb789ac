import json
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from bifurcat.model import (
    ModelParams,
    State,
    derived,
    dfe,
    dfe_eigenvalues,
    discriminant_expansion,
    dump_params,
    endemic_quadratic,
    eta_critical,
    fixed_point_numerators,
    jacobian,
    load_params,
    r0,
    reduced2d_jac,
    reduced2d_rhs,
    s_of_i,
    scalarize_general,
    vector_field,
)

F = Fraction
omegas = st.fractions(min_value=F(1, 10), max_value=14, max_denominator=50)
alphas = st.fractions(min_value=0, max_value=14, max_denominator=50)


# -- parameters --------------------------------------------------------------------------------

def test_base_values(base):
    assert (base.b, base.mu, base.beta, base.gamma, base.delta, base.xi) == (
        16, F(3, 25), F(1, 100), F(3, 25), F(1, 5), F(1, 1000))
    d = derived(base)
    assert d.v_i == F(11, 25)
    assert d.v_s == F(253, 25000)
    assert d.eta0 == F(67, 75)
    assert base.is_reduced and base.exact


def test_params_roundtrip(base, tmp_path):
    path = tmp_path / "p.json"
    dump_params(base, path)
    assert load_params(path) == base
    assert json.loads(path.read_text())["mu"] == "3/25"


def test_decimal_and_fraction_literals_agree():
    a = ModelParams.from_dict({"b": "16", "mu": "0.12", "beta": "0.01", "gamma": "0.12",
                               "delta": "0.2", "xi": "0.001"})
    b = ModelParams.from_dict({"b": 16, "mu": "3/25", "beta": "1/100", "gamma": "3/25",
                               "delta": "1/5", "xi": "1/1000"})
    assert a == b


@pytest.mark.parametrize("data, msg", [
    ({"b": "16", "mu": "0", "beta": "1", "gamma": "1", "delta": "1", "xi": "0"}, "mu"),
    ({"b": "16", "mu": "1", "beta": "-1", "gamma": "1", "delta": "1", "xi": "0"}, "beta"),
    ({"b": "16", "mu": "1", "beta": "1", "delta": "1", "xi": "0"}, "gamma"),
    ({"b": "16", "mu": "1", "beta": "1", "gamma": "1", "delta": "1", "xi": "0", "zeta": "1"},
     "unknown"),
    ({"b": "16", "mu": "1", "beta": "1", "gamma": "1", "delta": "1", "xi": "0",
      "i_s": "1/2", "i_r": "1/4"}, "gamma"),
])
def test_params_validation(data, msg):
    with pytest.raises(ValueError, match=msg):
        ModelParams.from_dict(data)


def test_treatment_validation(base):
    with pytest.raises(ValueError, match="omega"):
        base.with_treatment(0, 1)
    with pytest.raises(ValueError, match="alpha"):
        base.with_treatment(1, -1)
    q = base.with_treatment("51/8", "43/8")
    assert q.eta == F(43, 51) and q.alpha == F(43, 8)


# -- vector field and Jacobian ----------------------------------------------------------------

def test_vector_field_at_dfe_vanishes(base):
    x = dfe(base)
    assert x == State(F(400, 3), 0, 0)
    assert vector_field(base, x) == (0, 0)
    assert vector_field(base, x, "general") == (0, 0, 0)


def test_vector_field_example(q_ii):
    # hand evaluation at (s, i) = (100, 10)
    ds, di = vector_field(q_ii, (F(100), F(10)))
    force = F(1, 100) * 10 / (1 + F(10, 1000))
    assert ds == 16 - 100 * (F(3, 25) + force)
    assert di == 100 * force - F(43, 8) * 10 / (F(51, 8) + 10) - F(11, 25) * 10


def test_negative_state_rejected(base):
    with pytest.raises(ValueError, match="nonnegative"):
        vector_field(base, (-1.0, 1.0))


def test_reduced_variants_need_reduced_params(base):
    g = ModelParams(**{**base.__dict__, "gamma_r": F(1, 50)})
    with pytest.raises(ValueError, match="reduced"):
        vector_field(g, (1, 1, 1), "reduced3d")
    with pytest.raises(ValueError, match="variant"):
        vector_field(base, (1, 1), "planar")


def test_general_model_reduces(base):
    q = base.with_treatment(6, 5)
    x = (F(70), F(20), F(5))
    full = vector_field(q, x, "general")
    assert full[:2] == vector_field(q, x[:2])
    assert full == vector_field(q, x, "reduced3d")


@given(omegas, alphas, st.floats(1, 150), st.floats(0.05, 60))
def test_jacobian_matches_finite_differences(w, a, s, i):
    p = ModelParams.base().with_treatment(w, a).as_float()
    J = jacobian(p, (s, i))
    h = 1e-6
    num = np.empty((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        hi = np.array(vector_field(p, np.array([s, i]) + e))
        lo = np.array(vector_field(p, np.array([s, i]) - e))
        num[:, k] = (hi - lo) / (2 * h)
    assert np.allclose(J, num, rtol=1e-5, atol=1e-6)
    assert np.allclose(reduced2d_jac(p)(np.array([s, i])), J, rtol=1e-13, atol=1e-15)
    assert np.allclose(reduced2d_rhs(p)(np.array([s, i])), vector_field(p, (s, i)), rtol=1e-13,
                       atol=1e-12)


def test_exact_jacobian_is_exact(q_ii):
    J = jacobian(q_ii, (F(100), F(10)))
    assert J.dtype == object and all(isinstance(v, F) for v in J.ravel())


# -- threshold quantities ------------------------------------------------------------------------

def test_r0_and_eta_critical(base):
    assert r0(base) == F(100, 33)
    assert eta_critical(base) == F(67, 75)
    assert r0(base.with_treatment(1, eta_critical(base))) == 1


@given(omegas, alphas)
def test_r0_below_one_iff_dfe_stable(w, a):
    p = ModelParams.base().with_treatment(w, a)
    lam = dfe_eigenvalues(p)
    assert lam[0] == -F(3, 25)
    assert (r0(p) < 1) == (lam[2] < 0)
    assert (r0(p) == 1) == (lam[2] == 0)


def test_dfe_eigenvalue_example(q_ii):
    lam = [float(v) for v in dfe_eigenvalues(q_ii)]
    assert lam[0] == pytest.approx(-0.12) and lam[2] == pytest.approx(0.0501961, abs=1e-7)


# -- endemic quadratic -------------------------------------------------------------------------------

def _sympy_endemic_poly(p):
    s, i = sp.symbols("s i")
    R = lambda v: sp.Rational(v.numerator, v.denominator)
    b, mu, beta, xi = map(R, (p.b, p.mu, p.beta, p.xi))
    vi = R(p.gamma + p.mu + p.delta)
    a, w = R(p.alpha), R(p.omega)
    eq1 = sp.numer(sp.together(b - s * mu - beta * s * i / (1 + xi * i)))
    eq2 = sp.numer(sp.together(beta * s / (1 + xi * i) - a / (w + i) - vi))
    sol = sp.solve(eq1, s)[0]
    full = sp.Poly(sp.numer(sp.together(eq2.subs(s, sol))), i)
    quo, rem = sp.div(full, sp.Poly(1 + xi * i, i))
    assert rem.is_zero
    return quo


@pytest.mark.parametrize("w, a", [("51/8", "43/8"), ("6", "5"), ("2010/253", "8978/1265"),
                                  ("1", "1/2"), ("12", "1")])
def test_endemic_quadratic_matches_sympy_elimination(base, w, a):
    p = base.with_treatment(w, a)
    e = endemic_quadratic(p)
    ref = _sympy_endemic_poly(p).monic().all_coeffs()
    ours = [e.A / e.A, e.B / e.A, e.C / e.A]
    assert [sp.Rational(c.numerator, c.denominator) for c in ours] == ref


def test_endemic_roots_at_q_ii(q_ii):
    i1, i2 = endemic_quadratic(q_ii).roots()
    assert i1 < 0 < i2
    assert i2 == pytest.approx(6.759611833163378, rel=1e-14)


@given(omegas, alphas)
def test_discriminant_closed_form(w, a):
    p = ModelParams.base().with_treatment(w, a)
    assert endemic_quadratic(p).Delta == discriminant_expansion(p)


@given(omegas)
def test_on_r0_line_c_vanishes_and_roots_are_zero_and_minus_b_over_a(w):
    p = ModelParams.base()
    q = p.with_treatment(w, eta_critical(p) * w)
    e = endemic_quadratic(q)
    assert e.C == 0
    lo, hi = sorted(e.roots(), key=lambda z: z.real)
    assert abs(min(abs(lo), abs(hi))) < 1e-12
    assert float(-e.B / e.A) in (pytest.approx(lo), pytest.approx(hi))


def test_double_root_at_h(base):
    q = base.with_treatment(F(2010, 253), F(8978, 1265))
    e = endemic_quadratic(q)
    assert e.Delta == 0 and e.C == 0 and e.B == 0


@given(omegas, alphas, st.floats(0, 500))
def test_s_nullcline(w, a, i):
    p = ModelParams.base().with_treatment(w, a).as_float()
    s = s_of_i(p, i)
    assert s > 0
    assert vector_field(p, (s, i))[0] == pytest.approx(0, abs=1e-9)


# -- scalarization -------------------------------------------------------------------------------

def test_scalarization_reduced_matches_quadratic(q_ii):
    sc = scalarize_general(q_ii)
    i, lin, quad = sc.factors
    assert sc.poly == sc.unit * i * lin * quad
    assert lin.to_str() == "1/1*i + 1000/1"
    e = endemic_quadratic(q_ii)
    assert quad.univariate_coeffs() == [1, e.B / e.A, e.C / e.A]


def test_scalarization_general_model(base):
    g = ModelParams(**{**base.__dict__, "gamma_r": F(1, 50), "gamma_s": F(1, 40),
                       "i_s": F(1, 25), "i_r": F(2, 25)}).with_treatment(6, 5)
    sc = scalarize_general(g)
    _, _, quad = sc.factors
    f1, f2, f3 = fixed_point_numerators(g)
    roots = np.roots([float(c) for c in quad.univariate_coeffs()])
    for root in roots[np.abs(roots.imag) < 1e-12].real:
        s, r = float(sc.s(F(root))), float(sc.r(F(root)))
        vals = [f.evaluate_float({"r": r, "s": s, "i": root}) for f in (f1, f2, f3)]
        assert np.allclose(vals, 0, atol=1e-7)
    # exact residual check at the trivial root
    assert f1.evaluate({"r": sc.r(0), "s": sc.s(0), "i": 0}) == 0


def test_scalarization_needs_exact(base):
    with pytest.raises(ValueError, match="exact"):
        scalarize_general(base.as_float())
