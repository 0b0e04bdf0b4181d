"""Certified real-root isolation for univariate rational polynomials.

Sturm sequences give exact root counts on half-open intervals; bisection
splits at the simplest dyadic rational inside the current interval, so
isolating intervals land on a dyadic grid (the same grid a Descartes/Vincent
style isolator produces).  Everything is exact ``Fraction`` arithmetic, which
is what makes coefficients like 1e-30 usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .poly import Polynomial, to_fraction

__all__ = [
    "LocalExtremum",
    "RootIsolation",
    "isolate_real_roots",
    "local_minima",
    "sign_variations",
    "sturm_sequence",
]

Coeffs = list  # ascending Fraction coefficients, no trailing zeros


def _trim(c: Coeffs) -> Coeffs:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _horner(c: Coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for a in reversed(c):
        acc = acc * x + a
    return acc


def _derivative(c: Coeffs) -> Coeffs:
    return _trim([k * c[k] for k in range(1, len(c))])


def _divmod(a: Coeffs, b: Coeffs) -> tuple[Coeffs, Coeffs]:
    a = list(a)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    lead = b[-1]
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        factor = a[-1] / lead
        q[shift] = factor
        for i, bi in enumerate(b):
            a[i + shift] -= factor * bi
        a = _trim(a)
    return _trim(q), a


def _normalize(c: Coeffs) -> Coeffs:
    """Scale by a positive rational so the coefficients are coprime integers."""
    if not c:
        return c
    den = math.lcm(*(x.denominator for x in c))
    ints = [int(x * den) for x in c]
    g = math.gcd(*ints)
    return [Fraction(v // g) for v in ints]


def _gcd(a: Coeffs, b: Coeffs) -> Coeffs:
    while b:
        _, r = _divmod(a, b)
        a, b = b, _normalize(r)
    return _normalize(a)


def sturm_sequence(p: Polynomial) -> list[Coeffs]:
    """Sturm chain of the square-free part of p (each member scaled positively)."""
    c = _normalize(_trim(p.coefficients()))
    if not c:
        raise ValueError("the zero polynomial has no Sturm sequence")
    dc = _derivative(c)
    if dc:
        g = _gcd(c, dc)
        if len(g) > 1:
            c, _ = _divmod(c, g)
            c = _normalize(c)
    chain = [c]
    nxt = _normalize(_derivative(c))
    while nxt:
        chain.append(nxt)
        _, r = _divmod(chain[-2], chain[-1])
        nxt = _normalize([-x for x in r])
    return chain


def sign_variations(chain: Sequence[Coeffs], x: Fraction) -> int:
    signs = []
    for c in chain:
        v = _horner(c, x)
        if v:
            signs.append(v > 0)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _split_point(a: Fraction, b: Fraction) -> Fraction:
    """Dyadic rational with the smallest denominator strictly inside (a, b),
    closest to the midpoint (ties go down)."""
    mid = (a + b) / 2
    k = 0
    while True:
        scale = 2**k
        lo = math.floor(a * scale) + 1
        hi = math.ceil(b * scale) - 1
        if lo <= hi:
            m = min(max(math.floor(mid * scale), lo), hi)
            if m + 1 <= hi and abs(Fraction(m + 1, scale) - mid) < abs(Fraction(m, scale) - mid):
                m += 1
            return Fraction(m, scale)
        k += 1


@dataclass(frozen=True)
class RootIsolation:
    """Disjoint isolating intervals, each holding exactly one distinct real root.

    Intervals are ``(lo, hi]`` with ``lo < hi``, or ``[r, r]`` for a root that
    was hit exactly by a split point.
    """

    polynomial: Polynomial
    lo: Fraction
    hi: Fraction
    intervals: tuple[tuple[Fraction, Fraction], ...]
    width: Fraction | None

    def __len__(self) -> int:
        return len(self.intervals)

    def midpoints(self) -> list[Fraction]:
        return [(a + b) / 2 for a, b in self.intervals]

    def refine(self, width) -> RootIsolation:
        return isolate_real_roots(self.polynomial, self.lo, self.hi, width=width)


def _count(chain, a: Fraction, b: Fraction) -> int:
    """Distinct roots in (a, b]."""
    return sign_variations(chain, a) - sign_variations(chain, b)


def isolate_real_roots(p: Polynomial, lo=0, hi=200, width=Fraction(1, 10**6)) -> RootIsolation:
    """Isolate every distinct real root of p in [lo, hi].

    Each returned interval contains exactly one root (Sturm certified) and has
    width at most ``width`` (pass ``None`` to stop as soon as roots are isolated).
    """
    if p.n != 1:
        raise ValueError("root isolation needs a univariate polynomial")
    if p.is_zero():
        raise ValueError("the zero polynomial has infinitely many roots")
    lo, hi = to_fraction(lo), to_fraction(hi)
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    width = None if width is None else to_fraction(width)
    chain = sturm_sequence(p)
    sqfree = chain[0]
    found: list[tuple[Fraction, Fraction]] = []
    if _horner(sqfree, lo) == 0:
        found.append((lo, lo))
    stack = [(lo, hi)] if lo < hi else []
    while stack:
        a, b = stack.pop()
        k = _count(chain, a, b)
        if k == 0:
            continue
        if _horner(sqfree, b) == 0 and k == 1:
            found.append((b, b))
            continue
        if k == 1 and (width is None or b - a <= width):
            found.append((a, b))
            continue
        m = _split_point(a, b)
        # (a, m] and (m, b]; a root exactly at m is reported by the left half
        stack.append((m, b))
        stack.append((a, m))
    found.sort()
    return RootIsolation(p, lo, hi, tuple(found), width)


@dataclass(frozen=True)
class LocalExtremum:
    """A local minimum of a univariate polynomial located via its derivative."""

    interval: tuple[Fraction, Fraction]
    value_lo: Fraction
    value_hi: Fraction

    @property
    def estimate(self) -> Fraction:
        a, b = self.interval
        return (a + b) / 2


def local_minima(p: Polynomial, lo=0, hi=200, width=Fraction(1, 10**6)) -> list[LocalExtremum]:
    """Local minimizers of p in (lo, hi) from the exact derivative's roots.

    A critical point is a minimum when p' is negative just left and positive
    just right of it; the isolating interval endpoints serve as those flanking
    samples (they contain no other critical point).
    """
    dp = p.derivative()
    if dp.is_zero():
        return []
    iso = isolate_real_roots(dp, lo, hi, width=width)
    out = []
    for a, b in iso.intervals:
        left, right = a, b
        if a == b:
            # exact hit: probe at a tiny offset that cannot cross another root
            gap = _min_gap(iso.intervals, a) / 4
            left, right = a - gap, a + gap
        if dp(left) < 0 < dp(right):
            out.append(LocalExtremum((a, b), p(a), p(b)))
    return out


def _min_gap(intervals, r) -> Fraction:
    gaps = [abs(r - e) for iv in intervals for e in iv if e != r]
    return min(gaps, default=Fraction(1, 2**20)) or Fraction(1, 2**20)
