import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustpop.poly import Polynomial, basis, even_square_perturbation
from robustpop.relax import (
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
    lambda_cap,
    localizing_system,
    moment_sequence_from_solution,
    sos_certificate,
    with_objective,
)
from robustpop.problems import motzkin

(x,) = Polynomial.variables(1)
x1, x2 = Polynomial.variables(2)


def brute_localizing(g, y, rows):
    """Entry (b, c) is L_y(g * x^(b + c)), computed term by term."""
    out = []
    for beta in rows:
        row = []
        for gamma in rows:
            total = Fraction(0)
            for delta, coeff in g.items():
                alpha = tuple(a + b + d for a, b, d in zip(beta, gamma, delta))
                total += coeff * y[alpha]
            row.append(total)
        out.append(row)
    return out


def random_moments(n, d, rng):
    return {a: Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for a in basis(n, d)}


def test_hankel_example():
    sys_ = localizing_system(MomentProblem(x * x, order=1))
    y = {(0,): 1, (1,): 2, (2,): 5}
    assert sys_.matrix(0, y) == [[1, 2], [2, 5]]


def test_localizing_one_minus_x_squared():
    mp = MomentProblem(x, constraints=[1 - x * x], order=2)
    sys_ = localizing_system(mp)
    y = {(k,): Fraction(k + 1, 3) ** 2 for k in range(5)}
    M = sys_.matrix(1, y)
    for b in range(2):
        for c in range(2):
            assert M[b][c] == y[(b + c,)] - y[(b + c + 2,)]


def test_assembly_matches_brute_force_ball():
    rng = random.Random(3)
    mp = MomentProblem(x1, constraints=[1 - x1**2 - x2**2], order=3)
    sys_ = localizing_system(mp)
    for _ in range(5):
        y = random_moments(2, 6, rng)
        for ell, g in enumerate(mp.localizers):
            assert sys_.matrix(ell, y) == brute_localizing(g, y, sys_.row_bases[ell].monomials)


def test_ball_constraint_is_appended():
    mp = MomentProblem(x1, order=1, ball_N=4)
    assert mp.g[-1] == 4 - x1**2 - x2**2
    assert localizing_system(mp).sides == (3, 1)


def test_problem_validation():
    with pytest.raises(ValueError):
        MomentProblem(x**4, order=1)
    with pytest.raises(ValueError):
        MomentProblem(x, constraints=[x**3], order=1)
    with pytest.raises(ValueError):
        MomentProblem(x, order=1, eps=-1)
    with pytest.raises(ValueError):
        MomentProblem(x, constraints=[x1], order=1)


def test_nominal_sizes_motzkin():
    mom, coef = build_nominal(MomentProblem(motzkin(), order=8))
    assert mom.block_sizes == (45,)
    assert mom.m == 152
    assert coef.m == 153
    assert coef.block_sizes[0] == 45
    assert mom.tag is Formulation.NOMINAL_PRIMAL and coef.tag is Formulation.NOMINAL_DUAL


def test_priority_psd_adds_diagonal_blocks():
    mom, coef = build_priority_psd(MomentProblem(motzkin(), order=8, eps="1e-8"))
    assert mom.block_sizes == (45, -2 * 152)
    assert coef.block_sizes[-1] < 0
    assert Fraction(mom.param_dict["eps"]) == Fraction(1, 10**8)


def test_zero_noise_reduces_to_nominal():
    mp = MomentProblem(x1**2 + x2**4, order=2, ball_N=3)
    mom, coef = build_nominal(mp)
    nd = build_noise_dual(mp)
    assert nd.c == coef.c and nd.F == coef.F and nd.block_sizes == coef.block_sizes
    pt = build_priority_trace(mp)
    assert pt.c == mom.c and pt.offset == mom.offset
    psd_m, psd_c = build_priority_psd(mp)
    assert psd_m.c == mom.c and psd_c.c == coef.c


def eval_moment_objective(sdp, yd):
    """c.y + offset at a moment vector (split variables set to |y_a|)."""
    total = Fraction(sdp.offset)
    for lab, ci in zip(sdp.labels, sdp.c):
        prefix, _, rest = lab.partition(":")
        alpha = tuple(int(a) for a in rest.split(","))
        v = yd[alpha]
        total += ci * (v if prefix == "y" else abs(v))
    return total


def test_trace_objective_identity():
    rng = random.Random(5)
    mp = MomentProblem(x1**3 - x2, constraints=[1 - x1**2], order=2, eta=Fraction(1, 7))
    sdp = build_priority_trace(mp)
    fp = even_square_perturbation(mp.objective, mp.g, 2, mp.eta)
    for _ in range(10):
        y = random_moments(2, 4, rng)
        y[(0, 0)] = Fraction(1)
        assert eval_moment_objective(sdp, y) == fp.riesz(y)


def test_trace_example_value_at_origin():
    sdp = build_priority_trace(MomentProblem(Polynomial.zero(1), order=1, eta=1))
    dirac0 = {(0,): 1, (1,): 0, (2,): 0}
    # eta * trace M_1(y) = y0 + y2, which is 1 at the Dirac measure of 0
    assert eval_moment_objective(sdp, dirac0) == 1


def test_l1_objective_identity():
    mp = MomentProblem(x * x - x, order=1, eps=Fraction(1, 3))
    sdp = build_priority_psd(mp)[0]
    y = {(0,): 1, (1,): Fraction(-2), (2,): Fraction(5)}
    assert eval_moment_objective(sdp, y) == 5 + 2 + Fraction(1, 3) * (1 + 2 + 5)


def test_lambda_cap_is_above_a_dirac_value():
    mp = MomentProblem(x * x + 1, order=1)
    assert lambda_cap(mp, mp.objective, 0, 0) == 3
    assert lambda_cap(MomentProblem(x, constraints=[x - 10, -x - 10], order=1), x, 0, 0) is None


def test_coefficient_encoding_without_a_known_point_splits_lambda():
    mp = MomentProblem(x, constraints=[x - 10, -x - 10], order=1)
    coef = build_nominal(mp)[1]
    assert coef.offset == 0 and coef.block_sizes[-1] == -2


def test_canonical_robust_and_box_dual_shapes():
    sdp = build_nominal(MomentProblem(x * x, order=1))[0]
    rob = build_canonical_robust(sdp, Fraction(1, 2))
    assert rob.m == 2 * sdp.m and rob.block_sizes[-1] == -2 * sdp.m
    box = box_relaxed_dual(sdp, Fraction(1, 2))
    assert box.c[0] == sdp.c[0] - Fraction(1, 2)
    assert build_canonical_robust(sdp, 0).c == sdp.c


def test_with_objective_checks_length():
    sdp = build_nominal(MomentProblem(x * x, order=1))[0]
    assert with_objective(sdp, [3, 4]).c == (3, 4)
    with pytest.raises(ValueError):
        with_objective(sdp, [1])


def test_sdp_instance_validation():
    with pytest.raises(ValueError):
        SdpInstance((2,), (1,), ({},))
    with pytest.raises(ValueError):
        SdpInstance((2,), (1,), ({}, {(0, 1, 0): 1}))
    with pytest.raises(ValueError):
        SdpInstance((-2,), (1,), ({}, {(0, 0, 1): 1}))


def test_moment_sequence_round_trip_from_solution():
    mp = MomentProblem(x1**2 + x2**2, order=1)
    coef = build_nominal(mp)[1]
    vals = [2.0, 1.0, -1.0, 3.0, 0.5, 4.0]  # y_0 = 2 gets normalized away
    y = moment_sequence_from_solution(coef, vals, 2, 1)
    assert y[(0, 0)] == 1.0 and y[(1, 0)] == 0.5 and y[(0, 2)] == 2.0


def test_from_points_matches_direct_moments():
    y = MomentSequence.from_points([(Fraction(1, 2),), (2,)], [Fraction(1, 4), Fraction(3, 4)], 1, 2)
    assert y[(3,)] == Fraction(1, 4) * Fraction(1, 8) + Fraction(3, 4) * 8
    assert y.l1_norm() > 0


def test_sos_certificate_of_x_squared():
    mp = MomentProblem(x * x, order=1)
    cert = sos_certificate(mp, 0.0, [[[0.0, 0.0], [0.0, 1.0]]])
    assert cert.max_residual == 0.0
    assert cert.valid(1e-12, 0.0)
    bad = sos_certificate(mp, 1.0, [[[0.0, 0.0], [0.0, 1.0]]])
    assert bad.max_residual == 1.0 and not bad.valid(1e-3, 0.0)


@st.composite
def problems(draw):
    n = draw(st.integers(1, 2))
    j = draw(st.integers(1, 3))
    xs = Polynomial.variables(n)
    coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=5)
    gs = []
    for _ in range(draw(st.integers(0, 2))):
        mons = draw(st.lists(st.sampled_from(basis(n, 2).monomials), min_size=1, max_size=3, unique=True))
        gs.append(Polynomial(n, {m: draw(coeffs) for m in mons}))
    return MomentProblem(xs[0], constraints=gs, order=j)


@settings(max_examples=25, deadline=None)
@given(problems(), st.integers(0, 10**6))
def test_assembly_oracle_property(mp, seed):
    rng = random.Random(seed)
    sys_ = localizing_system(mp)
    y = random_moments(mp.n, 2 * mp.order, rng)
    for ell, g in enumerate(mp.localizers):
        assert sys_.matrix(ell, y) == brute_localizing(g, y, sys_.row_bases[ell].monomials)


@settings(max_examples=25, deadline=None)
@given(problems(), st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=4), min_size=2, max_size=2))
def test_dirac_localizing_matrices_are_rank_one_scaled(mp, pt):
    pt = tuple(pt[: mp.n])
    y = MomentSequence.from_points([pt], [1], mp.n, mp.order).as_dict()
    sys_ = localizing_system(mp)
    for ell, g in enumerate(mp.localizers):
        rows = sys_.row_bases[ell]
        v = rows.evaluate(pt)
        gx = g(*pt)
        M = sys_.matrix(ell, y)
        assert all(M[r][c] == gx * v[r] * v[c] for r in range(len(v)) for c in range(len(v)))
