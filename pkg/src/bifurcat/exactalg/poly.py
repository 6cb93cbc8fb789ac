"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial is a map from exponent vectors to :class:`fractions.Fraction`
coefficients over an ordered tuple of variable names.  The term order is
lexicographic in that variable order (first variable is the most
significant), which is also the order used by the Groebner engine.

Values are treated as immutable: every operation returns a new polynomial.
"""

from __future__ import annotations

import re
from decimal import Decimal
from fractions import Fraction
from math import gcd
from numbers import Rational as _RationalABC
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

Monomial = Tuple[int, ...]
Rational = Fraction

_DECIMAL_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def as_rational(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Strings may be ``p/q`` or decimal literals; decimals are read digit by
    digit (``"0.12"`` is ``12/100``, never the nearest binary double).
    Floats go through their shortest ``repr``, so ``0.12`` also maps to
    ``3/25``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, _RationalABC):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"cannot convert {value!r} to a rational")
        return Fraction(Decimal(repr(float(value))))
    if isinstance(value, str):
        text = value.strip().replace(" ", "")
        if "/" in text:
            num, den = text.split("/", 1)
            return as_rational(num) / as_rational(den)
        if _DECIMAL_RE.match(text):
            return Fraction(Decimal(text))
        raise ValueError(f"not a rational literal: {value!r}")
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


class RationalPoly:
    """Multivariate polynomial over Q in a fixed variable order."""

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Monomial, object] | None = None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables}")
        n = len(variables)
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            for mono, coeff in terms.items():
                mono = tuple(mono)
                if len(mono) != n:
                    raise ValueError(f"exponent vector {mono} does not match {n} variables")
                if any(e < 0 for e in mono):
                    raise ValueError("negative exponents are not polynomial")
                c = as_rational(coeff)
                if c:
                    clean[mono] = clean.get(mono, Fraction(0)) + c
                    if not clean[mono]:
                        del clean[mono]
        self.variables = variables
        self.terms = clean
        self._hash = None

    # -- construction ---------------------------------------------------

    @classmethod
    def _raw(cls, variables: Tuple[str, ...], terms: Dict[Monomial, Fraction]) -> "RationalPoly":
        # trusted fast path: terms already clean
        obj = cls.__new__(cls)
        obj.variables = variables
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, value, variables: Sequence[str] = ()) -> "RationalPoly":
        variables = tuple(variables)
        c = as_rational(value)
        return cls._raw(variables, {(0,) * len(variables): c} if c else {})

    @classmethod
    def var(cls, name: str, variables: Sequence[str] | None = None) -> "RationalPoly":
        variables = tuple(variables) if variables is not None else (name,)
        if name not in variables:
            raise ValueError(f"{name!r} not among {variables}")
        mono = tuple(1 if v == name else 0 for v in variables)
        return cls._raw(variables, {mono: Fraction(1)})

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, var: str) -> "RationalPoly":
        """Univariate polynomial from coefficients, highest degree first."""
        d = len(coeffs) - 1
        terms = {}
        for k, c in enumerate(coeffs):
            c = as_rational(c)
            if c:
                terms[(d - k,)] = c
        return cls._raw((var,), terms)

    # -- variable bookkeeping ------------------------------------------

    def with_variables(self, variables: Sequence[str]) -> "RationalPoly":
        """Re-express over ``variables`` (a superset of the used variables)."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        index = {v: k for k, v in enumerate(variables)}
        used = self.used_variables()
        missing = [v for v in used if v not in index]
        if missing:
            raise ValueError(f"variables {missing} are used but not in {variables}")
        pos = [index.get(v) for v in self.variables]
        n = len(variables)
        terms = {}
        for mono, c in self.terms.items():
            new = [0] * n
            for k, e in enumerate(mono):
                if e:
                    new[pos[k]] = e
            terms[tuple(new)] = c
        return RationalPoly._raw(variables, terms)

    def used_variables(self) -> Tuple[str, ...]:
        used = [False] * len(self.variables)
        for mono in self.terms:
            for k, e in enumerate(mono):
                if e:
                    used[k] = True
        return tuple(v for v, u in zip(self.variables, used) if u)

    def drop_unused(self) -> "RationalPoly":
        return self.with_variables(self.used_variables())

    @staticmethod
    def _union(a: Tuple[str, ...], b: Tuple[str, ...]) -> Tuple[str, ...]:
        if a == b:
            return a
        return a + tuple(v for v in b if v not in a)

    def _align(self, other: "RationalPoly"):
        variables = self._union(self.variables, other.variables)
        return self.with_variables(variables), other.with_variables(variables)

    def _coerce(self, other) -> "RationalPoly":
        if isinstance(other, RationalPoly):
            return other
        return RationalPoly.constant(other, self.variables)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self._align(other)
        terms = dict(a.terms)
        for mono, c in b.terms.items():
            s = terms.get(mono, 0) + c
            if s:
                terms[mono] = s
            else:
                terms.pop(mono, None)
        return RationalPoly._raw(a.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly._raw(self.variables, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RationalPoly):
            c = as_rational(other)
            if not c:
                return RationalPoly._raw(self.variables, {})
            return RationalPoly._raw(self.variables, {m: v * c for m, v in self.terms.items()})
        a, b = self._align(other)
        terms: Dict[Monomial, Fraction] = {}
        for ma, ca in a.terms.items():
            for mb, cb in b.terms.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                terms[m] = terms.get(m, 0) + ca * cb
        return RationalPoly._raw(a.variables, {m: c for m, c in terms.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        result = RationalPoly.constant(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, RationalPoly):
            if other.is_constant():
                return self * (1 / other.constant_value())
            return self.divexact(other)
        return self * (1 / as_rational(other))

    # -- comparison -----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, RationalPoly):
            try:
                other = RationalPoly.constant(other, self.variables)
            except (TypeError, ValueError):
                return NotImplemented
        a, b = self._align(other)
        return a.terms == b.terms

    def __hash__(self):
        if self._hash is None:
            p = self.drop_unused()
            order = sorted(p.variables)
            p = p.with_variables(order)
            self._hash = hash((p.variables, frozenset(p.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- inspection -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def nterms(self) -> int:
        return len(self.terms)

    def sorted_terms(self):
        """Terms in descending lex order of the variable order."""
        return sorted(self.terms.items(), key=lambda t: t[0], reverse=True)

    def leading_term(self) -> Tuple[Monomial, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        mono = max(self.terms)
        return mono, self.terms[mono]

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def degree(self, var: str) -> int:
        """Degree in ``var``; -1 for the zero polynomial, 0 if absent."""
        if not self.terms:
            return -1
        if var not in self.variables:
            return 0
        k = self.variables.index(var)
        return max(m[k] for m in self.terms)

    def coefficients_in(self, var: str) -> Dict[int, "RationalPoly"]:
        """Split into ``{power: coefficient}`` with coefficients free of ``var``.

        The coefficients keep the full variable tuple (with ``var`` at
        exponent zero) so they combine freely with ``self``.
        """
        if var not in self.variables:
            return {0: self} if self.terms else {}
        k = self.variables.index(var)
        out: Dict[int, Dict[Monomial, Fraction]] = {}
        for mono, c in self.terms.items():
            e = mono[k]
            rest = mono[:k] + (0,) + mono[k + 1:]
            out.setdefault(e, {})[rest] = c
        return {e: RationalPoly._raw(self.variables, t) for e, t in out.items()}

    def univariate_coeffs(self, var: str | None = None) -> list:
        """Dense rational coefficients (highest first) of a univariate poly."""
        used = self.used_variables()
        if var is None:
            if len(used) > 1:
                raise ValueError(f"not univariate: uses {used}")
            var = used[0] if used else (self.variables[0] if self.variables else "x")
        elif any(v != var for v in used):
            raise ValueError(f"not univariate in {var!r}: uses {used}")
        if not self.terms:
            return [Fraction(0)]
        d = self.degree(var)
        k = self.variables.index(var) if var in self.variables else None
        coeffs = [Fraction(0)] * (d + 1)
        for mono, c in self.terms.items():
            e = mono[k] if k is not None else 0
            coeffs[d - e] = c
        return coeffs

    # -- calculus and evaluation ---------------------------------------

    def diff(self, var: str) -> "RationalPoly":
        if var not in self.variables:
            return RationalPoly._raw(self.variables, {})
        k = self.variables.index(var)
        terms = {}
        for mono, c in self.terms.items():
            e = mono[k]
            if e:
                terms[mono[:k] + (e - 1,) + mono[k + 1:]] = c * e
        return RationalPoly._raw(self.variables, terms)

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at a full point.  Exact if all values are rational."""
        missing = [v for v in self.used_variables() if v not in values]
        if missing:
            raise ValueError(f"no value for {missing}")
        vals = [values.get(v, 0) for v in self.variables]
        total = 0
        for mono, c in self.terms.items():
            t = c
            for x, e in zip(vals, mono):
                if e:
                    t = t * x ** e
            total = total + t
        return total

    def evaluate_float(self, values: Mapping[str, float]) -> float:
        vals = [float(values.get(v, 0.0)) for v in self.variables]
        total = 0.0
        for mono, c in self.terms.items():
            t = float(c)
            for x, e in zip(vals, mono):
                if e:
                    t *= x ** e
            total += t
        return total

    def abs_evaluate_float(self, values: Mapping[str, float]) -> float:
        """Sum of |term| at a point; the natural scale for a residual."""
        vals = [float(values.get(v, 0.0)) for v in self.variables]
        total = 0.0
        for mono, c in self.terms.items():
            t = abs(float(c))
            for x, e in zip(vals, mono):
                if e:
                    t *= abs(x) ** e
            total += t
        return total

    def subs(self, values: Mapping[str, object]) -> "RationalPoly":
        """Substitute rationals or polynomials for some variables."""
        result = RationalPoly._raw(self.variables, {})
        idx = [(k, v) for k, v in enumerate(self.variables) if v in values]
        if not idx:
            return self
        cache: Dict[Tuple[int, int], object] = {}

        def power(k, e):
            key = (k, e)
            if key not in cache:
                val = values[self.variables[k]]
                if isinstance(val, RationalPoly):
                    cache[key] = val ** e
                else:
                    cache[key] = as_rational(val) ** e
            return cache[key]

        for mono, c in self.terms.items():
            rest = list(mono)
            factor: object = c
            for k, _ in idx:
                e = mono[k]
                rest[k] = 0
                if e:
                    factor = factor * power(k, e)
            base = RationalPoly._raw(self.variables, {tuple(rest): Fraction(1)})
            result = result + base * factor
        return result

    # -- division ---------------------------------------------------------

    def divmod_lead(self, divisor: "RationalPoly"):
        """Multivariate division by one divisor in lex order.

        Returns ``(quotient, remainder)`` with no term of the remainder
        divisible by the leading monomial of ``divisor``.
        """
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        a, b = self._align(divisor)
        lm, lc = b.leading_term()
        rem = dict(a.terms)
        quot: Dict[Monomial, Fraction] = {}
        out: Dict[Monomial, Fraction] = {}
        bterms = list(b.terms.items())
        while rem:
            mono = max(rem)
            c = rem[mono]
            if all(x >= y for x, y in zip(mono, lm)):
                shift = tuple(x - y for x, y in zip(mono, lm))
                q = c / lc
                quot[shift] = quot.get(shift, 0) + q
                for mb, cb in bterms:
                    m = tuple(x + y for x, y in zip(mb, shift))
                    v = rem.get(m, 0) - q * cb
                    if v:
                        rem[m] = v
                    else:
                        rem.pop(m, None)
            else:
                out[mono] = c
                del rem[mono]
        return (RationalPoly._raw(a.variables, {m: c for m, c in quot.items() if c}),
                RationalPoly._raw(a.variables, out))

    def divexact(self, divisor: "RationalPoly") -> "RationalPoly":
        q, r = self.divmod_lead(divisor)
        if not r.is_zero():
            raise ArithmeticError("polynomial division is not exact")
        return q

    def divides(self, other: "RationalPoly") -> bool:
        """True if ``self`` divides ``other`` exactly."""
        return other.divmod_lead(self)[1].is_zero()

    # -- normalisation --------------------------------------------------

    def content(self) -> Fraction:
        """Positive rational c with self/c integral and primitive."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def primitive(self) -> "RationalPoly":
        """Integer, content-free, positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading_term()[1] < 0:
            c = -c
        return RationalPoly._raw(self.variables, {m: v / c for m, v in self.terms.items()})

    def monic(self) -> "RationalPoly":
        if not self.terms:
            return self
        lc = self.leading_term()[1]
        return RationalPoly._raw(self.variables, {m: v / lc for m, v in self.terms.items()})

    # -- text form --------------------------------------------------------

    def to_str(self) -> str:
        """Canonical text: descending lex terms, coefficients as ``num/den``."""
        if not self.terms:
            return "0"
        parts = []
        for k, (mono, c) in enumerate(self.sorted_terms()):
            sign = "-" if c < 0 else "+"
            c = abs(c)
            factors = [f"{c.numerator}/{c.denominator}"]
            for v, e in zip(self.variables, mono):
                if e == 1:
                    factors.append(v)
                elif e:
                    factors.append(f"{v}^{e}")
            body = "*".join(factors)
            if k == 0:
                parts.append(("-" if sign == "-" else "") + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"RationalPoly({self.variables!r}, {self.to_str()!r})"

    @classmethod
    def parse(cls, text: str, variables: Sequence[str] | None = None) -> "RationalPoly":
        """Parse the canonical text form (and plain hand-written variants).

        Accepts sums of products of rational/decimal literals and
        ``name`` or ``name^k`` factors, e.g. ``3/2*x^2*y - 1*y + 5/1``.
        """
        src = text.replace(" ", "")
        if not src:
            raise ValueError("empty polynomial text")
        # a sign right after "<digit>e" belongs to a decimal exponent
        chunks = re.findall(r"[+-]?(?:\d[eE][+-]|[^+-])+", src)
        if "".join(chunks) != src:
            raise ValueError(f"cannot parse polynomial {text!r}")
        raw_terms = []
        names = []
        for chunk in chunks:
            sign = Fraction(1)
            if chunk[0] in "+-":
                if chunk[0] == "-":
                    sign = Fraction(-1)
                chunk = chunk[1:]
            coeff = sign
            powers: Dict[str, int] = {}
            for factor in chunk.split("*"):
                if not factor:
                    raise ValueError(f"empty factor in {text!r}")
                m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^(\d+))?", factor)
                if m:
                    name = m.group(1)
                    powers[name] = powers.get(name, 0) + int(m.group(2) or 1)
                    if name not in names:
                        names.append(name)
                else:
                    coeff *= as_rational(factor)
            raw_terms.append((coeff, powers))
        if variables is None:
            variables = tuple(names)
        else:
            variables = tuple(variables)
            extra = [n for n in names if n not in variables]
            if extra:
                raise ValueError(f"unknown variables {extra}")
        poly = cls._raw(variables, {})
        for coeff, powers in raw_terms:
            mono = tuple(powers.get(v, 0) for v in variables)
            poly = poly + cls._raw(variables, {mono: coeff} if coeff else {})
        return poly


def poly_arith(a: RationalPoly, b: RationalPoly, op: str) -> RationalPoly:
    """Exact ``a op b`` for ``op`` in {"add", "sub", "mul"}; variables are unioned."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def variables_union(polys: Iterable[RationalPoly]) -> Tuple[str, ...]:
    out: Tuple[str, ...] = ()
    for p in polys:
        out = RationalPoly._union(out, p.variables)
    return out


Number = Union[int, Fraction]
