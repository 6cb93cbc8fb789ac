"""Exact polynomial algebra over the rationals."""

from .poly import RationalPoly, Rational, as_rational, poly_arith, variables_union
from .resultant import EliminationError, sylvester_matrix, sylvester_resultant, bareiss_determinant
from .sturm import RootInterval, sturm_real_roots, squarefree_decomposition
from .groebner import (BudgetExceeded, DEFAULT_BUDGET, groebner_lex, elimination_ideal,
                       is_groebner, reduce_poly)

__all__ = [
    "RationalPoly", "Rational", "as_rational", "poly_arith", "variables_union",
    "EliminationError", "sylvester_matrix", "sylvester_resultant", "bareiss_determinant",
    "RootInterval", "sturm_real_roots", "squarefree_decomposition",
    "BudgetExceeded", "DEFAULT_BUDGET", "groebner_lex", "elimination_ideal",
    "is_groebner", "reduce_poly",
]
