"""Sylvester resultants over Q[other variables].

Convention: the Sylvester matrix carries ``deg_x(q)`` shifted rows of
``p``'s coefficients on top, then ``deg_x(p)`` rows of ``q``, each row in
descending powers of ``x``.  With this layout

    res_x(p, q) = lc(p)**deg(q) * prod(q(r) for r in roots(p))

so for a monic linear ``q = x - a`` the value is ``(-1)**deg(p) * p(a)``.
"""

from __future__ import annotations

from typing import List

from .poly import RationalPoly, variables_union


class EliminationError(ValueError):
    """Raised when a requested elimination is impossible or refused."""


def sylvester_matrix(p: RationalPoly, q: RationalPoly, eliminate: str) -> List[List[RationalPoly]]:
    variables = variables_union([p, q])
    p = p.with_variables(variables)
    q = q.with_variables(variables)
    m, n = p.degree(eliminate), q.degree(eliminate)
    if m <= 0 or n <= 0:
        raise EliminationError(f"nothing to eliminate: degrees in {eliminate!r} are {m}, {n}")
    zero = RationalPoly.constant(0, variables)
    cp = p.coefficients_in(eliminate)
    cq = q.coefficients_in(eliminate)
    prow = [cp.get(m - k, zero) for k in range(m + 1)]
    qrow = [cq.get(n - k, zero) for k in range(n + 1)]
    size = m + n
    rows = []
    for k in range(n):
        rows.append([zero] * k + prow + [zero] * (size - m - 1 - k))
    for k in range(m):
        rows.append([zero] * k + qrow + [zero] * (size - n - 1 - k))
    return rows


def bareiss_determinant(matrix: List[List[RationalPoly]]) -> RationalPoly:
    """Fraction-free Gaussian elimination; every division is exact."""
    a = [list(row) for row in matrix]
    size = len(a)
    if size == 0:
        raise ValueError("empty matrix")
    variables = variables_union(x for row in a for x in row)
    a = [[x.with_variables(variables) for x in row] for row in a]
    sign = 1
    prev = RationalPoly.constant(1, variables)
    for k in range(size - 1):
        if a[k][k].is_zero():
            swap = next((r for r in range(k + 1, size) if not a[r][k].is_zero()), None)
            if swap is None:
                return RationalPoly.constant(0, variables)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for r in range(k + 1, size):
            for c in range(k + 1, size):
                num = pivot * a[r][c] - a[r][k] * a[k][c]
                a[r][c] = num if prev.is_constant() and prev.constant_value() == 1 else num.divexact(prev)
            a[r][k] = RationalPoly.constant(0, variables)
        prev = pivot
    det = a[size - 1][size - 1]
    return det if sign > 0 else -det


def sylvester_resultant(p: RationalPoly, q: RationalPoly, eliminate: str) -> RationalPoly:
    """Resultant of ``p`` and ``q`` with respect to ``eliminate``.

    The result is a polynomial in the remaining variables that vanishes
    exactly where ``p`` and ``q`` share a root in ``eliminate``.
    """
    det = bareiss_determinant(sylvester_matrix(p, q, eliminate))
    rest = tuple(v for v in det.variables if v != eliminate)
    return det.with_variables(rest)
