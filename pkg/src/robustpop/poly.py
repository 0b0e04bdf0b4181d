"""Exact sparse multivariate polynomials over the rationals.

Coefficients are :class:`fractions.Fraction` everywhere in this module; floats
only appear when a caller asks for them.  Monomials are exponent tuples and the
global monomial order is graded lexicographic (see :func:`grlex_key`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Sequence

Monomial = tuple[int, ...]

__all__ = [
    "Monomial",
    "MonomialBasis",
    "Polynomial",
    "PolynomialParseError",
    "basis",
    "even_square_perturbation",
    "grlex_key",
    "l1_perturbation_orthant",
    "parse_polynomial",
    "poly_eval",
    "to_fraction",
]


class PolynomialParseError(ValueError):
    """Raised for malformed polynomial text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def to_fraction(value) -> Fraction:
    """Convert a number or a decimal string to an exact Fraction.

    Floats are converted exactly (binary value); pass strings such as ``"1e-8"``
    to get the decimal rational.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite coefficient {value!r}")
        return Fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def grlex_key(alpha: Sequence[int]) -> tuple:
    """Sort key of the graded lexicographic order: degree first, then x1 > x2 > ..."""
    return (sum(alpha), tuple(-a for a in alpha))


def _monomials_of_degree(n: int, deg: int) -> Iterator[Monomial]:
    if n == 1:
        yield (deg,)
        return
    for first in range(deg, -1, -1):
        for rest in _monomials_of_degree(n - 1, deg - first):
            yield (first,) + rest


@dataclass(frozen=True)
class MonomialBasis:
    """All exponent vectors of ``n`` variables with total degree at most ``d``."""

    n: int
    d: int
    monomials: tuple[Monomial, ...] = field(repr=False)

    @cached_property
    def index(self) -> dict[Monomial, int]:
        return {alpha: i for i, alpha in enumerate(self.monomials)}

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self.monomials)

    def __getitem__(self, i: int) -> Monomial:
        return self.monomials[i]

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self.index

    def evaluate(self, x: Sequence) -> list:
        """Monomial vector v(x) in basis order."""
        return [_monomial_value(alpha, x) for alpha in self.monomials]


def basis(n: int, d: int) -> MonomialBasis:
    """Graded-lex ordered basis of the monomials of degree <= d in n variables."""
    if n < 1 or d < 0:
        raise ValueError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    mons = tuple(
        alpha for deg in range(d + 1) for alpha in _monomials_of_degree(n, deg)
    )
    return MonomialBasis(n, d, mons)


def _monomial_value(alpha: Sequence[int], x: Sequence):
    out = 1
    for xi, a in zip(x, alpha):
        if a:
            out = out * xi**a
    return out


class Polynomial:
    """Immutable sparse polynomial with exact rational coefficients.

    >>> x, y = Polynomial.variables(2)
    >>> p = x**2 * y**2 * (x**2 + y**2 - 1) + Fraction(1, 27)
    >>> p(0, 0)
    Fraction(1, 27)
    """

    __slots__ = ("_n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Sequence[int], object] | None = None):
        if n < 1:
            raise ValueError("a polynomial needs at least one variable")
        clean: dict[Monomial, Fraction] = {}
        for alpha, coeff in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n:
                raise ValueError(f"exponent {alpha} does not have length {n}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = to_fraction(coeff)
            if c:
                clean[alpha] = clean.get(alpha, Fraction(0)) + c
                if not clean[alpha]:
                    del clean[alpha]
        self._n = n
        self._terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, n: int, c) -> Polynomial:
        return cls(n, {(0,) * n: c})

    @classmethod
    def zero(cls, n: int) -> Polynomial:
        return cls(n)

    @classmethod
    def monomial(cls, alpha: Sequence[int], c=1) -> Polynomial:
        return cls(len(alpha), {tuple(alpha): c})

    @classmethod
    def variables(cls, n: int) -> tuple[Polynomial, ...]:
        return tuple(
            cls.monomial(tuple(int(i == k) for i in range(n))) for k in range(n)
        )

    @classmethod
    def from_coefficients(cls, coeffs: Sequence) -> Polynomial:
        """Univariate polynomial from ascending coefficients."""
        return cls(1, {(k,): c for k, c in enumerate(coeffs)})

    # -- basic properties -------------------------------------------------
    @property
    def n(self) -> int:
        return self._n

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        return max((sum(a) for a in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, alpha: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(alpha), Fraction(0))

    def support(self) -> list[Monomial]:
        return sorted(self._terms, key=grlex_key)

    def coefficients(self) -> list[Fraction]:
        """Ascending coefficient list of a univariate polynomial."""
        self._require_univariate()
        out = [Fraction(0)] * (self.degree + 1)
        for (k,), c in self._terms.items():
            out[k] = c
        return out

    def _require_univariate(self):
        if self._n != 1:
            raise ValueError(f"expected a univariate polynomial, got n={self._n}")

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other._n != self._n:
                raise ValueError(f"variable count mismatch: {self._n} vs {other._n}")
            return other
        return Polynomial.constant(self._n, to_fraction(other))

    def __add__(self, other) -> Polynomial:
        other = self._coerce(other)
        terms = dict(self._terms)
        for alpha, c in other._terms.items():
            terms[alpha] = terms.get(alpha, 0) + c
        return Polynomial(self._n, terms)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(self._n, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other) -> Polynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Polynomial:
        return self._coerce(other) - self

    def __mul__(self, other) -> Polynomial:
        if not isinstance(other, Polynomial):
            c = to_fraction(other)
            return Polynomial(self._n, {a: c * v for a, v in self._terms.items()})
        other = self._coerce(other)
        terms: dict[Monomial, Fraction] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                key = tuple(i + j for i, j in zip(a, b))
                terms[key] = terms.get(key, 0) + ca * cb
        return Polynomial(self._n, terms)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Polynomial:
        return self * (1 / to_fraction(other))

    def __pow__(self, k: int) -> Polynomial:
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial.constant(self._n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self._n == other._n and self._terms == other._terms
        try:
            return self == self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._n, frozenset(self._terms.items())))
        return self._hash

    # -- evaluation & calculus -------------------------------------------
    def __call__(self, *x):
        if len(x) == 1 and isinstance(x[0], (list, tuple)):
            x = tuple(x[0])
        return poly_eval(self, x)

    def derivative(self, var: int = 0) -> Polynomial:
        terms = {}
        for alpha, c in self._terms.items():
            if alpha[var]:
                beta = list(alpha)
                beta[var] -= 1
                terms[tuple(beta)] = c * alpha[var]
        return Polynomial(self._n, terms)

    def riesz(self, y: Mapping[Monomial, object]):
        """Riesz functional L_y(p) = sum_alpha p_alpha y_alpha."""
        total = 0
        for alpha, c in self._terms.items():
            total = total + c * y[alpha]
        return total

    def max_abs_coefficient(self) -> Fraction:
        return max((abs(c) for c in self._terms.values()), default=Fraction(0))

    # -- text format ------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for alpha in self.support():
            c = self._terms[alpha]
            lines.append(f"{c.numerator}/{c.denominator} " + " ".join(map(str, alpha)))
        return "\n".join(lines) + ("\n" if lines else "")

    def __repr__(self) -> str:
        if not self._terms:
            return f"Polynomial({self._n}, 0)"
        names = [f"x{i + 1}" for i in range(self._n)] if self._n > 1 else ["x"]
        parts = []
        for alpha in self.support():
            mono = "*".join(
                f"{v}^{a}" if a > 1 else v for v, a in zip(names, alpha) if a
            )
            c = self._terms[alpha]
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def poly_eval(p: Polynomial, x: Sequence):
    """Evaluate p at x; exact when the coordinates are rationals."""
    if len(x) != p.n:
        raise ValueError(f"point has dimension {len(x)}, polynomial has {p.n} variables")
    x = [to_fraction(v) if isinstance(v, (int, str)) else v for v in x]
    total = Fraction(0) if all(isinstance(v, Rational) for v in x) else 0.0
    for alpha, c in p.items():
        total = total + c * _monomial_value(alpha, x)
    return total


def parse_polynomial(text: str | Iterable[str], n: int | None = None) -> Polynomial:
    """Parse the line-oriented term format ``coeff e1 ... en``.

    ``coeff`` is an integer, a ratio ``p/q`` or a decimal literal. Blank lines
    and ``#`` comments are ignored. Line numbers in errors are 1-based.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    terms: dict[Monomial, Fraction] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            coeff = to_fraction(fields[0])
        except (ValueError, ZeroDivisionError) as exc:
            raise PolynomialParseError(f"bad coefficient {fields[0]!r}", lineno) from exc
        try:
            alpha = tuple(int(e) for e in fields[1:])
        except ValueError as exc:
            raise PolynomialParseError(f"bad exponent in {line!r}", lineno) from exc
        if n is None:
            n = len(alpha)
        if len(alpha) != n or n == 0:
            raise PolynomialParseError(
                f"expected {n} exponents, got {len(alpha)} in {line!r}", lineno
            )
        if any(a < 0 for a in alpha):
            raise PolynomialParseError(f"negative exponent in {line!r}", lineno)
        terms[alpha] = terms.get(alpha, Fraction(0)) + coeff
    if n is None:
        raise PolynomialParseError("no terms and no variable count given")
    return Polynomial(n, terms)


def half_degree(g: Polynomial) -> int:
    """d_l = ceil(deg g / 2), with 0 for constants."""
    return max(0, math.ceil(g.degree / 2))


def even_square_perturbation(
    p: Polynomial, g: Sequence[Polynomial], j: int, theta
) -> Polynomial:
    """p + theta * sum_l g_l * sum_{|beta| <= j - d_l} x^(2 beta), with g_0 = 1 implied."""
    theta = to_fraction(theta)
    n = p.n
    gs = [Polynomial.constant(n, 1)] + list(g)
    for gl in gs:
        if gl.degree > 2 * j:
            raise ValueError(f"constraint degree {gl.degree} exceeds 2j = {2 * j}")
    if p.degree > 2 * j:
        raise ValueError(f"objective degree {p.degree} exceeds 2j = {2 * j}")
    if not theta:
        return p
    out = p
    for gl in gs:
        squares = Polynomial(
            n, {tuple(2 * a for a in beta): 1 for beta in basis(n, j - half_degree(gl))}
        )
        out = out + theta * (squares * gl)
    return out


def l1_perturbation_orthant(p: Polynomial, j: int, eps) -> Polynomial:
    """p + eps * sum_{k=0}^{2j} x^k, i.e. p + eps * sum |x^k| restricted to x >= 0."""
    if p.n != 1:
        raise ValueError("l1_perturbation_orthant is defined for univariate polynomials")
    eps = to_fraction(eps)
    return p + Polynomial.from_coefficients([eps] * (2 * j + 1))
