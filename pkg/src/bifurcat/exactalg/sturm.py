"""Real root isolation for univariate rational polynomials.

Everything here works on dense coefficient lists (highest degree first)
of :class:`fractions.Fraction`; :func:`sturm_real_roots` is the
:class:`~bifurcat.exactalg.poly.RationalPoly` entry point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from .poly import RationalPoly, as_rational

Coeffs = List[Fraction]


@dataclass(frozen=True)
class RootInterval:
    """Half-open interval ``(low, high]`` holding exactly one distinct root."""

    low: Fraction
    high: Fraction
    multiplicity_hint: int = 1

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError("RootInterval needs low < high")
        if self.multiplicity_hint < 1:
            raise ValueError("multiplicity must be positive")

    @property
    def width(self) -> Fraction:
        return self.high - self.low

    def midpoint(self) -> Fraction:
        return (self.low + self.high) / 2

    def __float__(self) -> float:
        return float(self.midpoint())


# -- dense univariate helpers ----------------------------------------------

def _strip(a: Sequence[Fraction]) -> Coeffs:
    k = 0
    while k < len(a) - 1 and a[k] == 0:
        k += 1
    return list(a[k:])


def _is_zero(a: Sequence[Fraction]) -> bool:
    return all(c == 0 for c in a)


def horner(a: Sequence[Fraction], x) -> Fraction:
    acc = 0
    for c in a:
        acc = acc * x + c
    return acc


def derivative(a: Sequence[Fraction]) -> Coeffs:
    d = len(a) - 1
    if d <= 0:
        return [Fraction(0)]
    return [c * (d - k) for k, c in enumerate(a[:-1])]


def poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> Tuple[Coeffs, Coeffs]:
    a = _strip(a)
    b = _strip(b)
    if _is_zero(b):
        raise ZeroDivisionError("division by zero polynomial")
    if len(a) < len(b):
        return [Fraction(0)], a
    rem = list(a)
    quot = [Fraction(0)] * (len(a) - len(b) + 1)
    lead = b[0]
    for k in range(len(quot)):
        q = rem[k] / lead
        quot[k] = q
        if q:
            for j, c in enumerate(b):
                rem[k + j] -= q * c
    r = _strip(rem[len(quot):]) if len(b) > 1 else [Fraction(0)]
    return quot, r


def poly_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> Coeffs:
    a = _strip(a)
    b = _strip(b)
    while not _is_zero(b):
        _, r = poly_divmod(a, b)
        a, b = b, r
    if _is_zero(a):
        return [Fraction(0)]
    return [c / a[0] for c in a]


def squarefree_part(a: Sequence[Fraction]) -> Coeffs:
    a = _strip(a)
    g = poly_gcd(a, derivative(a))
    q, _ = poly_divmod(a, g)
    return [c / q[0] for c in q]


def squarefree_decomposition(a: Sequence[Fraction]) -> List[Tuple[Coeffs, int]]:
    """Yun's algorithm: ``a = lc * prod(f_k ** k)`` with squarefree, coprime ``f_k``."""
    a = _strip(a)
    if len(a) <= 1:
        return []
    out = []
    da = derivative(a)
    g = poly_gcd(a, da)
    w, _ = poly_divmod(a, g)
    y, _ = poly_divmod(da, g)
    k = 1
    while len(_strip(w)) > 1:
        z = poly_sub(y, derivative(w))
        h = poly_gcd(w, z)
        if len(h) > 1:
            out.append(([c / h[0] for c in h], k))
        w, _ = poly_divmod(w, h)
        y, _ = poly_divmod(z, h)
        k += 1
    return out


def poly_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Coeffs:
    n = max(len(a), len(b))
    a = [Fraction(0)] * (n - len(a)) + list(a)
    b = [Fraction(0)] * (n - len(b)) + list(b)
    return _strip([x - y for x, y in zip(a, b)])


def sturm_chain(a: Sequence[Fraction]) -> List[Coeffs]:
    chain = [_strip(a), derivative(_strip(a))]
    while not _is_zero(chain[-1]) and len(chain[-1]) > 1:
        _, r = poly_divmod(chain[-2], chain[-1])
        if _is_zero(r):
            break
        chain.append([-c for c in r])
    return chain


def sign_variations(chain: Sequence[Sequence[Fraction]], x) -> int:
    signs = []
    for p in chain:
        v = horner(p, x)
        if v:
            signs.append(v > 0)
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def count_roots(chain: Sequence[Sequence[Fraction]], low, high) -> int:
    """Distinct real roots in ``(low, high]`` of the chain's squarefree head."""
    return sign_variations(chain, low) - sign_variations(chain, high)


def cauchy_bound(a: Sequence[Fraction]) -> Fraction:
    a = _strip(a)
    lead = abs(a[0])
    return 1 + max((abs(c) / lead for c in a[1:]), default=Fraction(0))


# -- isolation ---------------------------------------------------------------

def _refine(f: Coeffs, low: Fraction, high: Fraction, tol: Fraction) -> Tuple[Fraction, Fraction]:
    """Shrink ``(low, high]`` around its single simple root of squarefree ``f``."""
    f_high = horner(f, high)
    if f_high == 0:
        return max(low, high - tol), high
    while high - low > tol:
        mid = (low + high) / 2
        f_mid = horner(f, mid)
        if f_mid == 0:
            return max(low, mid - tol / 2), mid
        if (f_mid > 0) != (f_high > 0):
            low = mid
        else:
            high, f_high = mid, f_mid
    return low, high


def isolate(f: Sequence[Fraction], low: Fraction, high: Fraction, tol: Fraction) -> List[Tuple[Fraction, Fraction]]:
    f = squarefree_part(f)
    if len(f) <= 1:
        return []
    chain = sturm_chain(f)
    out = []
    stack = [(low, high)]
    while stack:
        lo, hi = stack.pop()
        n = count_roots(chain, lo, hi)
        if n == 0:
            continue
        if n == 1:
            out.append(_refine(f, lo, hi, tol))
            continue
        mid = (lo + hi) / 2
        stack.append((mid, hi))
        stack.append((lo, mid))
    out.sort()
    return out


def sturm_real_roots(p: RationalPoly, range: Tuple[object, object] | None = None,
                     tol: object = Fraction(1, 10**12)) -> List[RootInterval]:
    """All distinct real roots of univariate ``p`` in ``(low, high]``.

    Roots are isolated on the squarefree part (repeated roots would break
    Sturm counting) and refined by bisection to width ``<= tol``.  The
    multiplicity comes from the squarefree decomposition of ``p``.
    """
    if p.is_zero():
        raise ValueError("zero polynomial has no isolated roots")
    coeffs = p.univariate_coeffs()
    tol = as_rational(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if range is None:
        bound = cauchy_bound(coeffs)
        low, high = -bound, bound
    else:
        low, high = as_rational(range[0]), as_rational(range[1])
        if not low < high:
            raise ValueError("empty range")
    intervals = isolate(coeffs, low, high, tol)
    factors = squarefree_decomposition(coeffs)
    roots = []
    for lo, hi in intervals:
        mult = 1
        for f, k in factors:
            if count_roots(sturm_chain(f), lo, hi) == 1:
                mult = k
                break
        roots.append(RootInterval(lo, hi, mult))
    return roots
