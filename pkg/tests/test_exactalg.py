from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from sympy.polys.subresultants_qq_zz import sylvester
from hypothesis import given, strategies as st

from bifurcat.atlas import b_point_polynomial
from bifurcat.exactalg import (
    BudgetExceeded,
    EliminationError,
    RationalPoly,
    as_rational,
    elimination_ideal,
    groebner_lex,
    is_groebner,
    poly_arith,
    reduce_poly,
    sturm_real_roots,
    sylvester_resultant,
)
from bifurcat.exactalg.sturm import count_roots, squarefree_part, sturm_chain

X = RationalPoly.var("x")
Y = RationalPoly.var("y", ("x", "y"))
XY = RationalPoly.var("x", ("x", "y"))

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def upoly(coeffs, var="x"):
    """Polynomial from coefficients, highest power first."""
    out = RationalPoly.constant(0, (var,))
    v = RationalPoly.var(var)
    for c in coeffs:
        out = out * v + c
    return out


def to_sympy(p: RationalPoly):
    syms = sp.symbols(p.variables)
    expr = 0
    for mono, c in p.terms.items():
        term = sp.Rational(c.numerator, c.denominator)
        for s, e in zip(syms, mono):
            term *= s ** e
        expr += term
    return sp.expand(expr), syms


# -- rationals and arithmetic ------------------------------------------------------------

def test_decimal_literals_are_read_digit_by_digit():
    assert as_rational("0.12") == Fraction(12, 100)
    assert as_rational("12/100") == Fraction(3, 25)
    assert as_rational(0.1) == Fraction(1, 10)
    with pytest.raises(ValueError):
        as_rational("abc")


def test_difference_of_squares():
    assert poly_arith(X + 1, X - 1, "mul") == X ** 2 - 1


def test_add_constant():
    assert poly_arith(X ** 2 - 1, RationalPoly.constant(1, ("x",)), "add") == X ** 2


def test_variable_universe_is_unioned():
    z = RationalPoly.var("z")
    out = poly_arith(X, z, "add")
    assert set(out.variables) == {"x", "z"}


def test_canonical_text_roundtrip():
    p = Fraction(3, 2) * XY ** 2 * Y - Y + 5
    text = p.to_str()
    assert text == "3/2*x^2*y - 1/1*y + 5/1"
    assert RationalPoly.parse(text, ("x", "y")) == p


@given(st.lists(small, min_size=1, max_size=5), st.lists(small, min_size=1, max_size=5))
def test_product_matches_sympy(a, b):
    p, q = upoly(a), upoly(b)
    ps, _ = to_sympy(p)
    qs, _ = to_sympy(q)
    prod, _ = to_sympy(p * q)
    assert sp.expand(ps * qs - prod) == 0


# -- resultants ------------------------------------------------------------------------------

def test_resultant_examples():
    assert sylvester_resultant(X ** 2 + 1, X - 2, "x").constant_value() == 5
    assert sylvester_resultant(X ** 2 - 1, X - 1, "x").is_zero()


def test_nothing_to_eliminate():
    with pytest.raises(EliminationError, match="nothing to eliminate"):
        sylvester_resultant(RationalPoly.constant(3, ("x",)), X - 1, "x")


@given(st.lists(small, min_size=2, max_size=6).filter(lambda c: c[0] != 0), small)
def test_resultant_with_linear_factor_sign_convention(coeffs, a):
    p = upoly(coeffs)
    res = sylvester_resultant(p, X - a, "x").constant_value()
    deg = p.degree("x")
    assert res == (-1) ** deg * p.evaluate({"x": a})


@given(st.lists(small, min_size=2, max_size=4).filter(lambda c: c[0] != 0),
       st.lists(small, min_size=2, max_size=4).filter(lambda c: c[0] != 0))
def test_resultant_matches_sympy(a, b):
    p, q = upoly(a), upoly(b)
    ours = sylvester_resultant(p, q, "x").constant_value()
    x = sp.Symbol("x")
    # sympy's resultant() differs from the Sylvester determinant by (-1)**(deg p * deg q)
    theirs = sylvester(to_sympy(p)[0], to_sympy(q)[0], x).det()
    assert sp.Rational(ours.numerator, ours.denominator) == theirs


def test_resultant_multivariate_matches_sympy():
    p = XY ** 2 * Y + 3 * XY - Y ** 2 + 1
    q = 2 * XY ** 3 - XY * Y + Fraction(1, 3)
    ours = sylvester_resultant(p, q, "x")
    x, y = sp.symbols("x y")
    theirs = sylvester(to_sympy(p)[0], to_sympy(q)[0], x).det()
    assert sp.expand(to_sympy(ours)[0] - theirs) == 0


@given(st.lists(st.integers(-4, 4), min_size=2, max_size=3),
       st.lists(st.integers(-4, 4), min_size=1, max_size=2), st.booleans())
def test_resultant_vanishes_iff_common_root(p_roots, q_roots, share):
    if share:
        q_roots = q_roots + [p_roots[0]]
    p = RationalPoly.constant(1, ("x",))
    for r in p_roots:
        p = p * (X - r)
    q = RationalPoly.constant(1, ("x",))
    for r in q_roots:
        q = q * (X - r)
    res = sylvester_resultant(p, q, "x").constant_value()
    common = bool(set(np.round(np.roots([float(c) for c in p.univariate_coeffs()]).real).astype(int))
                  & set(q_roots))
    assert (res == 0) == common


# -- Sturm ----------------------------------------------------------------------------------

def test_sqrt2():
    roots = sturm_real_roots(X ** 2 - 2, (0, 2), Fraction(1, 10**6))
    assert len(roots) == 1
    r = roots[0]
    assert r.low < Fraction(14142136, 10**7) and r.high > Fraction(14142135, 10**7)
    assert r.width <= Fraction(1, 10**6)


def test_repeated_root_uses_squarefree_part():
    p = (X - 1) ** 2 * (X - 3)
    roots = sturm_real_roots(p, (0, 5))
    assert [round(float(r), 9) for r in roots] == [1.0, 3.0]
    assert [r.multiplicity_hint for r in roots] == [2, 1]


def test_zero_polynomial_rejected():
    with pytest.raises(ValueError):
        sturm_real_roots(RationalPoly.constant(0, ("x",)))


@given(st.lists(st.integers(-40, 40), min_size=3, max_size=4, unique=True), st.integers(1, 3))
def test_count_matches_brute_force_scan(int_roots, lead):
    roots = [Fraction(r, 10) for r in int_roots]
    p = RationalPoly.constant(lead, ("x",))
    for r in roots:
        p = p * (X - r)
    tol = Fraction(1, 100)
    found = sturm_real_roots(p, (-5, 5), tol)
    # scan on a grid offset from the roots at spacing tol/10
    grid = np.arange(-5 + 1e-4, 5, float(tol) / 10)
    vals = np.polyval([float(c) for c in p.univariate_coeffs()], grid)
    changes = int(np.sum(np.sign(vals[:-1]) != np.sign(vals[1:])))
    assert len(found) == changes == len(roots)
    for iv in found:
        assert iv.width <= tol
        assert any(iv.low < r <= iv.high for r in roots)


def test_sturm_count_equals_chain_difference():
    p = (X - 1) * (X + 2) * (X - Fraction(1, 3))
    chain = sturm_chain(squarefree_part(p.univariate_coeffs()))
    assert count_roots(chain, Fraction(-3), Fraction(2)) == 3
    assert count_roots(chain, Fraction(0), Fraction(2)) == 2


def test_b_point_cubic_roots(base):
    _, cubic = b_point_polynomial(base)
    assert cubic.degree("w") == 3
    in_20 = sturm_real_roots(cubic, (0, 20), Fraction(1, 10**4))
    in_50 = sturm_real_roots(cubic, (0, 50), Fraction(1, 10**4))
    # the third root sits near 42.45, outside (0, 20]
    assert [round(float(r), 3) for r in in_20] == [5.157, 7.36]
    assert len(in_50) == 3
    assert abs(float(in_50[2]) - 42.4504) < 1e-3


# -- Groebner ---------------------------------------------------------------------------------

def test_groebner_trivial():
    basis = groebner_lex([XY - 1, Y - XY], ("x", "y"))
    assert Y - 1 in basis
    assert elimination_ideal(basis, ("x",)) == [Y - 1]


def _random_system(draw_coeffs):
    x, y, z = (RationalPoly.var(v, ("x", "y", "z")) for v in "xyz")
    monos = [x * y, y * z, x, y, z, x ** 2, RationalPoly.constant(1, ("x", "y", "z"))]
    polys = []
    for row in draw_coeffs:
        f = RationalPoly.constant(0, ("x", "y", "z"))
        for c, m in zip(row, monos):
            f = f + c * m
        polys.append(f)
    return polys


@given(st.lists(st.lists(st.integers(-3, 3), min_size=7, max_size=7), min_size=2, max_size=3))
def test_groebner_output_is_groebner_and_matches_sympy(rows):
    system = [f for f in _random_system(rows) if not f.is_zero()]
    if not system:
        return
    basis = groebner_lex(system, ("x", "y", "z"))
    assert is_groebner(basis)
    for f in system:
        assert reduce_poly(f, basis).is_zero()
    x, y, z = sp.symbols("x y z")
    G = sp.groebner([to_sympy(f.with_variables(("x", "y", "z")))[0] for f in system], x, y, z, order="lex")
    ours = sorted(sp.srepr(sp.expand(to_sympy(g.with_variables(("x", "y", "z")))[0])) for g in basis)
    theirs = sorted(sp.srepr(sp.expand(g / sp.Poly(g, x, y, z).LC(order="lex"))) for g in G.exprs)
    assert ours == theirs


def test_groebner_is_deterministic():
    sys_ = _random_system([[1, 2, 0, -1, 3, 1, 2], [0, 1, 1, 2, -1, 0, 1]])
    a = [g.to_str() for g in groebner_lex(sys_, ("x", "y", "z"))]
    b = [g.to_str() for g in groebner_lex(sys_, ("x", "y", "z"))]
    assert a == b


def test_budget_refusal():
    sys_ = _random_system([[1, 2, 0, -1, 3, 1, 2], [0, 1, 1, 2, -1, 0, 1], [2, 0, 1, 1, 0, -1, 3]])
    with pytest.raises(BudgetExceeded, match="elimination budget exceeded"):
        groebner_lex(sys_, ("x", "y", "z"), budget=5)


def test_order_must_cover_variables():
    with pytest.raises(ValueError):
        groebner_lex([XY - Y], ("x",))


def test_numpy_floats_are_accepted():
    assert as_rational(np.float64(0.12)) == Fraction(3, 25)
