"""Small polynomial problems shared by the solver and duality tests."""

from fractions import Fraction

from robustpop.poly import Polynomial
from robustpop.relax import MomentProblem

x, = Polynomial.variables(1)
x1, x2 = Polynomial.variables(2)


def toy_suite(eps=Fraction(1, 100), eta=Fraction(1, 100)):
    """Ten (name, MomentProblem) pairs with n <= 2 and order <= 2."""
    F = Fraction
    specs = [
        ("square", x * x, (), 1, None),
        ("shifted-square-ball", (x - 1) ** 2, (), 2, F(4)),
        ("double-well", x**4 - x**2, (), 2, None),
        ("interval-linear", x, (x, 1 - x), 1, None),
        ("quartic-interval", (x * x - F(1, 4)) ** 2, (1 - x * x,), 2, None),
        ("quadratic-form", x1**2 + x2**2 - x1 * x2, (), 1, None),
        ("bilinear-ball", x1 * x2, (), 2, F(2)),
        ("concave-disc", -x1**2 - x2**2 + x1, (1 - x1**2 - x2**2,), 1, None),
        ("quartic-2d", x1**4 + x2**4 - x1 * x2, (), 2, None),
        ("rosen-like", (1 - x1) ** 2 + (x2 - x1**2) ** 2, (), 2, F(9)),
    ]
    return [
        (name, MomentProblem(f, constraints=g, order=j, ball_N=N, eps=eps, eta=eta))
        for name, f, g, j, N in specs
    ]
