"""The two-player reading of an inexact relaxation.

A solver that satisfies the SOS equations only up to ``eps`` (or the cones only
up to ``-eta I``) behaves as an adversary who may move the objective inside a
coefficient ball before the relaxation is solved.  Here we build that
adversary's best reply and the robust objectives it induces; the value checks
compare the max-min and min-max sides numerically.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

from .poly import Polynomial, basis, to_fraction
from .relax import (
    Formulation,
    MomentProblem,
    MomentSequence,
    SdpInstance,
    box_relaxed_dual,
    build_canonical_robust,
    build_noise_dual,
    build_noise_penalized,
    build_nominal,
    build_priority_psd,
    build_priority_trace,
    moment_sequence_from_solution,
    perturbed_objective,
    with_objective,
)
from .sdpsolve import SolverConfig, SolverResult, Status, solve

__all__ = [
    "GameReport",
    "WorstCasePolynomial",
    "noise_duality_check",
    "robust_objective_eps",
    "robust_objective_eta",
    "trace_equivalence_check",
    "verify_minimax",
    "worst_case_polynomial",
]


def _sign(v) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class WorstCasePolynomial:
    """f~ with f~_a = f_a + s_a * eps, s_a = sign(y_a) over every monomial of the basis."""

    base: Polynomial
    eps: Fraction
    signs: dict
    polynomial: Polynomial

    def riesz_gain(self, y: MomentSequence):
        """L_y(f~) - L_y(f); equals eps * ||y||_1 for the generating y."""
        ys = y.as_dict()
        return self.polynomial.riesz(ys) - self.base.riesz(ys)


def worst_case_polynomial(f: Polynomial, y: MomentSequence, eps) -> WorstCasePolynomial:
    """The maximizer of L_y over the box ||f~ - f||_inf <= eps (sign(0) taken as 0).

    Every monomial indexed by ``y`` is perturbed, including those where f has
    a zero coefficient.
    """
    eps = to_fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if f.n != y.basis.n:
        raise ValueError("polynomial and moment sequence have different variable counts")
    if f.degree > y.basis.d:
        raise ValueError(f"deg f = {f.degree} exceeds the moment degree {y.basis.d}")
    signs = {alpha: _sign(v) for alpha, v in zip(y.basis, y.values)}
    shift = Polynomial(f.n, {alpha: s * eps for alpha, s in signs.items() if s})
    return WorstCasePolynomial(f, eps, signs, f + shift)


def _point(mp: MomentProblem, x: Sequence) -> tuple[Fraction, ...]:
    if len(x) != mp.n:
        raise ValueError(f"point has {len(x)} coordinates, problem has {mp.n} variables")
    return tuple(to_fraction(v) for v in x)


def robust_objective_eta(mp: MomentProblem, x: Sequence) -> Fraction:
    """f(x) + eta * sum_l g_l(x) sum_{|b| <= j - d_l} x^(2b), exactly."""
    x = _point(mp, x)
    return perturbed_objective(mp, mp.eta)(*x)


def robust_objective_eps(mp: MomentProblem, x: Sequence) -> Fraction:
    """f(x) + eps * sum_{|a| <= 2j} |x^a|, exactly."""
    x = _point(mp, x)
    total = Fraction(0)
    if mp.eps:
        for alpha in basis(mp.n, 2 * mp.order):
            term = Fraction(1)
            for xi, a in zip(x, alpha):
                term *= xi**a
            total += abs(term)
    return mp.objective(*x) + mp.eps * total


# ---------------------------------------------------------------------------
# value checks


@dataclass
class GameReport:
    tag: str
    value_penalized: float
    value_maxmin: float
    value_grid: float | None
    tolerance: float
    statuses: dict = field(default_factory=dict)
    discrepancy: float = math.nan
    grid_excess: float | None = None
    passed: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _value(res: SolverResult) -> float:
    return res.value


def _ok(res: SolverResult) -> bool:
    return res.status is Status.OPTIMAL


def _finish(tag, a: SolverResult, b: SolverResult, grid: float | None, cfg: SolverConfig,
            extra_status: dict | None = None) -> GameReport:
    va, vb = _value(a), _value(b)
    tol = 10 * cfg.epsilon_star * (1 + abs(va))
    statuses = {"penalized": a.status.value, "maxmin": b.status.value}
    statuses.update(extra_status or {})
    report = GameReport(str(tag.value if isinstance(tag, Formulation) else tag), va, vb, grid, tol, statuses)
    report.discrepancy = abs(va - vb)
    ok = _ok(a) and _ok(b) and report.discrepancy <= tol
    if grid is not None:
        report.grid_excess = grid - va
        ok = ok and grid <= va + tol
    report.passed = ok
    return report


def trace_equivalence_check(mp: MomentProblem, cfg: SolverConfig | None = None) -> GameReport:
    """Trace-penalized moment value vs the SOS value of the even-square-perturbed f."""
    cfg = cfg or SolverConfig()
    a = solve(build_priority_trace(mp), cfg)
    shifted = mp.replace(objective=perturbed_objective(mp, mp.eta), eps=0, eta=0)
    b = solve(build_nominal(shifted)[1], cfg)
    return _finish(Formulation.PRIORITY_TRACE, a, b, None, cfg)


def noise_duality_check(mp: MomentProblem, cfg: SolverConfig | None = None) -> GameReport:
    """(eps, eta) noise SOS program vs its doubly penalized moment dual."""
    cfg = cfg or SolverConfig()
    a = solve(build_noise_penalized(mp), cfg)
    b = solve(build_noise_dual(mp), cfg)
    return _finish(Formulation.NOISE_DUAL, a, b, None, cfg)


def _corner_grid(sdp: SdpInstance, eps: Fraction, cfg: SolverConfig, max_corners: int, seed: int):
    """max over sampled corners c~ of the box around c of inf {c~.y : F(y) >= 0}."""
    m = sdp.m
    c = [to_fraction(v) for v in sdp.c]
    if 2**m <= max_corners:
        corners = itertools.product((-1, 1), repeat=m)
    else:
        rng = random.Random(seed)
        corners = (tuple(rng.choice((-1, 1)) for _ in range(m)) for _ in range(max_corners))
    best, statuses = -math.inf, set()
    for signs in corners:
        res = solve(with_objective(sdp, [ci + s * eps for ci, s in zip(c, signs)]), cfg)
        statuses.add(res.status.value)
        if res.status is Status.OPTIMAL:
            best = max(best, res.value)
    return best, sorted(statuses)


def verify_minimax(problem, tag: Formulation, cfg: SolverConfig | None = None, *,
                   eps=None, max_corners: int = 64, seed: int = 0) -> GameReport:
    """Compare the penalized (min-max) value with the coefficient-box (max-min) value.

    ``problem`` is a :class:`MomentProblem` for PRIORITY_TRACE / PRIORITY_PSD
    and an :class:`SdpInstance` in moment form (with ``eps``) for CANONICAL.
    A third, one-sided check samples the adversary's choices directly: a
    theta grid, the sign-rule polynomial, or corners of the cost box.
    """
    cfg = cfg or SolverConfig()
    tag = Formulation(tag)
    if tag is Formulation.PRIORITY_TRACE:
        mp = problem
        a = solve(build_priority_trace(mp), cfg)
        b = solve(build_noise_dual(mp.replace(eps=0)), cfg)
        grid = -math.inf
        for theta in (-mp.eta, 0, mp.eta):
            shifted = mp.replace(objective=perturbed_objective(mp, theta), eps=0, eta=0)
            r = solve(build_nominal(shifted)[0], cfg)
            if r.status is Status.OPTIMAL:
                grid = max(grid, r.value)
        return _finish(tag, a, b, None if grid == -math.inf else grid, cfg)
    if tag is Formulation.PRIORITY_PSD:
        mp = problem
        moment_side, box_side = build_priority_psd(mp)
        a = solve(moment_side, cfg)
        b = solve(box_side, cfg)
        grid, extra = None, {}
        if a.status is Status.OPTIMAL:
            y = moment_sequence_from_solution(moment_side, a.y, mp.n, mp.order)
            wc = worst_case_polynomial(mp.objective, y, mp.eps)
            r = solve(build_nominal(mp.replace(objective=wc.polynomial, eps=0))[0], cfg)
            extra["sign_rule"] = r.status.value
            if r.status is Status.OPTIMAL:
                grid = r.value
        return _finish(tag, a, b, grid, cfg, extra)
    if tag in (Formulation.CANONICAL, Formulation.CANONICAL_ROBUST):
        sdp = problem
        if eps is None:
            eps = Fraction(sdp.param_dict.get("eps", "0"))
        eps = to_fraction(eps)
        a = solve(build_canonical_robust(sdp, eps), cfg)
        b = solve(box_relaxed_dual(sdp, eps), cfg)
        grid, statuses = _corner_grid(sdp, eps, cfg, max_corners, seed)
        return _finish(Formulation.CANONICAL, a, b, None if grid == -math.inf else grid, cfg,
                       {"corners": ",".join(statuses)})
    raise ValueError(f"no minimax check for formulation {tag.value}")
