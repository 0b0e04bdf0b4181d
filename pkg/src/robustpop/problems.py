"""Builtin test problems, generated with exact rational coefficients."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

from .poly import Polynomial, l1_perturbation_orthant, to_fraction
from .realroots import local_minima

__all__ = ["BUILTINS", "PerturbedMinimum", "motzkin", "perturbed_minima", "univariate"]


def motzkin() -> Polynomial:
    """1/27 + x1^2 x2^2 (x1^2 + x2^2 - 1): nonnegative, not SOS, zeros at (+-1/sqrt3, +-1/sqrt3)."""
    x1, x2 = Polynomial.variables(2)
    return Fraction(1, 27) + x1**2 * x2**2 * (x1**2 + x2**2 - 1)


def univariate(gamma=0) -> Polynomial:
    """(x - 100)^2 ((x - 1)^2 + gamma / 99^2); global minimum 0 at x = 100, f(1) = gamma."""
    gamma = to_fraction(gamma)
    (x,) = Polynomial.variables(1)
    return (x - 100) ** 2 * ((x - 1) ** 2 + gamma / 99**2)


BUILTINS = {"motzkin": motzkin, "univariate": univariate}


@dataclass(frozen=True)
class PerturbedMinimum:
    """One local minimum of f + eps * sum_k x^k on [lo, hi].

    ``interval`` is the certified isolating interval of the derivative root at
    the coarse width; ``endpoint`` is whichever of its ends has the larger
    perturbed value (that is the coordinate a realroot-style tool prints), and
    ``value`` is the perturbed polynomial there.  ``refined`` / ``refined_value``
    come from a second isolation at ``fine_width``.
    """

    interval: tuple[Fraction, Fraction]
    endpoint: Fraction
    value: Fraction
    refined: Fraction
    refined_value: Fraction

    def to_dict(self) -> dict:
        d = asdict(self)
        d["interval"] = [float(v) for v in self.interval]
        for k in ("endpoint", "value", "refined", "refined_value"):
            d[k] = float(d[k])
        return d


def perturbed_minima(gamma, eps, order: int = 5, *, lo=0, hi=200,
                     width=Fraction(1, 256), fine_width=Fraction(1, 10**6)) -> list[PerturbedMinimum]:
    """Local minima of the l1-perturbed univariate problem, isolated exactly."""
    ft = l1_perturbation_orthant(univariate(gamma), order, eps)
    coarse = local_minima(ft, lo, hi, width=width)
    fine = local_minima(ft, lo, hi, width=fine_width)
    out = []
    for m in coarse:
        a, b = m.interval
        end = a if m.value_lo >= m.value_hi else b
        near = min(fine, key=lambda r: abs(r.estimate - m.estimate))
        out.append(PerturbedMinimum((a, b), end, ft(end), near.estimate, ft(near.estimate)))
    return out
