"""Moment/SOS relaxations and their noise-model variants as block SDPs.

All instances use the SDPA pair

    (moment side)       min  c.y + offset   s.t.  sum_i y_i F_i - F_0 >= 0
    (coefficient side)  max  <F_0, X> + offset  s.t.  <F_i, X> = c_i,  X >= 0

Two encodings of a polynomial problem are produced:

* the *moment* encoding keeps y_0 = 1 eliminated and has one variable per
  nonzero monomial (plus split variables u_a >= |y_a| for l1 terms);
* the *coefficient* encoding has one equality per monomial of degree <= 2j,
  with lambda written as a difference of two nonnegative scalars and the
  coefficient box |f~_a - f_a| <= eps carried by slack pairs t_a + s_a = 1.

Both describe the same primal-dual pair; they are assembled independently so
that one can be checked against the other.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .poly import (
    Monomial,
    MonomialBasis,
    Polynomial,
    basis,
    even_square_perturbation,
    _monomial_value,
    half_degree,
    to_fraction,
)

__all__ = [
    "Formulation",
    "LocalizingSystem",
    "MomentProblem",
    "MomentSequence",
    "SdpInstance",
    "SosCertificate",
    "box_relaxed_dual",
    "build_canonical_robust",
    "build_noise_dual",
    "build_noise_penalized",
    "build_nominal",
    "build_priority_psd",
    "build_priority_trace",
    "lambda_cap",
    "localizing_system",
    "moment_sequence_from_solution",
    "sos_certificate",
    "with_objective",
]


class Formulation(str, enum.Enum):
    NOMINAL_PRIMAL = "NOMINAL_PRIMAL"
    NOMINAL_DUAL = "NOMINAL_DUAL"
    NOISE_DUAL = "NOISE_DUAL"
    PRIORITY_TRACE = "PRIORITY_TRACE"
    PRIORITY_PSD = "PRIORITY_PSD"
    CANONICAL_ROBUST = "CANONICAL_ROBUST"
    CANONICAL = "CANONICAL"


@dataclass(frozen=True)
class MomentProblem:
    """min f(x) over {g_l(x) >= 0}, relaxed at order j, with noise radii eps/eta."""

    objective: Polynomial
    constraints: tuple[Polynomial, ...] = ()
    order: int = 1
    ball_N: Fraction | None = None
    eps: Fraction = Fraction(0)
    eta: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "eps", to_fraction(self.eps))
        object.__setattr__(self, "eta", to_fraction(self.eta))
        if self.ball_N is not None:
            object.__setattr__(self, "ball_N", to_fraction(self.ball_N))
        if self.eps < 0 or self.eta < 0:
            raise ValueError("noise radii must be nonnegative")
        j = self.order
        if j < 0:
            raise ValueError("relaxation order must be nonnegative")
        for g in self.constraints:
            if g.n != self.n:
                raise ValueError("constraint and objective variable counts differ")
        if self.objective.degree > 2 * j:
            raise ValueError(
                f"deg f = {self.objective.degree} exceeds 2j = {2 * j}"
            )
        for g in self.g:
            if g.degree > 2 * j:
                raise ValueError(f"constraint degree {g.degree} exceeds 2j = {2 * j}")

    @property
    def n(self) -> int:
        return self.objective.n

    @property
    def g(self) -> tuple[Polynomial, ...]:
        """Constraint list g_1..g_m, with the ball constraint appended if N is set."""
        gs = list(self.constraints)
        if self.ball_N is not None:
            ball = Polynomial.constant(self.n, self.ball_N)
            for xi in Polynomial.variables(self.n):
                ball = ball - xi * xi
            gs.append(ball)
        return tuple(gs)

    @property
    def localizers(self) -> tuple[Polynomial, ...]:
        """g_0 = 1 followed by g_1..g_m."""
        return (Polynomial.constant(self.n, 1),) + self.g

    @property
    def half_degrees(self) -> tuple[int, ...]:
        return tuple(half_degree(g) for g in self.localizers)

    @property
    def moment_basis(self) -> MonomialBasis:
        return basis(self.n, 2 * self.order)

    def replace(self, **changes) -> MomentProblem:
        fields_ = dict(
            objective=self.objective,
            constraints=self.constraints,
            order=self.order,
            ball_N=self.ball_N,
            eps=self.eps,
            eta=self.eta,
        )
        fields_.update(changes)
        return MomentProblem(**fields_)


@dataclass(frozen=True)
class LocalizingSystem:
    """Coefficient matrices C^l_a with M_{j-d_l}(g_l y) = sum_a C^l_a y_a.

    ``matrices[l][a]`` maps (row, col), row <= col, to the exact entry.
    """

    problem: MomentProblem
    row_bases: tuple[MonomialBasis, ...]
    matrices: tuple[dict[Monomial, dict[tuple[int, int], Fraction]], ...]

    @property
    def sides(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.row_bases)

    def matrix(self, ell: int, y: Mapping[Monomial, object]) -> list[list]:
        """Assemble sum_a C^l_a y_a (exact when y is rational)."""
        s = self.sides[ell]
        out = [[0] * s for _ in range(s)]
        for alpha, entries in self.matrices[ell].items():
            ya = y[alpha]
            for (r, c), v in entries.items():
                out[r][c] = out[r][c] + v * ya
                if r != c:
                    out[c][r] = out[c][r] + v * ya
        return out

    @cached_property
    def traces(self) -> tuple[dict[Monomial, Fraction], ...]:
        """tr(C^l_a) per block; these are the coefficients of g_l * sum x^(2 beta)."""
        out = []
        for mats in self.matrices:
            tr = {}
            for alpha, entries in mats.items():
                t = sum((v for (r, c), v in entries.items() if r == c), Fraction(0))
                if t:
                    tr[alpha] = t
            out.append(tr)
        return tuple(out)


def localizing_system(mp: MomentProblem) -> LocalizingSystem:
    n, j = mp.n, mp.order
    bases, mats = [], []
    for g, d in zip(mp.localizers, mp.half_degrees):
        if j - d < 0:
            raise ValueError(f"order {j} is too small for a constraint of degree {g.degree}")
        rows = basis(n, j - d)
        entries: dict[Monomial, dict[tuple[int, int], Fraction]] = {}
        mons = rows.monomials
        for r, beta in enumerate(mons):
            for c in range(r, len(mons)):
                gamma = mons[c]
                bg = tuple(a + b for a, b in zip(beta, gamma))
                for delta, coeff in g.items():
                    alpha = tuple(a + b for a, b in zip(bg, delta))
                    slot = entries.setdefault(alpha, {})
                    slot[(r, c)] = slot.get((r, c), Fraction(0)) + coeff
        bases.append(rows)
        mats.append(entries)
    return LocalizingSystem(mp, tuple(bases), tuple(mats))


# ---------------------------------------------------------------------------
# SDP instances


Entry = tuple[int, int, int]  # (block, row, col), row <= col, zero-based


@dataclass(frozen=True)
class SdpInstance:
    """Block-diagonal SDP in SDPA form.

    ``block_sizes`` are signed (negative means a diagonal/LP block).
    ``F[i]`` maps (block, row, col) with row <= col to a value; F[0] is the
    constant matrix. Values may be Fractions (assembled) or floats (imported).
    """

    block_sizes: tuple[int, ...]
    c: tuple
    F: tuple[dict[Entry, object], ...]
    offset: object = Fraction(0)
    tag: Formulation | None = None
    params: tuple[tuple[str, str], ...] = ()
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.F) != len(self.c) + 1:
            raise ValueError("need one constraint matrix per variable plus F_0")
        if any(b == 0 for b in self.block_sizes):
            raise ValueError("block sizes must be nonzero")
        if self.labels and len(self.labels) != len(self.c):
            raise ValueError("labels must match the number of variables")
        for i, mat in enumerate(self.F):
            for (b, r, cc) in mat:
                if not 0 <= b < len(self.block_sizes):
                    raise ValueError(f"F_{i}: block {b + 1} out of range")
                size = abs(self.block_sizes[b])
                if not (0 <= r <= cc < size):
                    raise ValueError(f"F_{i}: entry ({r + 1},{cc + 1}) invalid in block {b + 1}")
                if self.block_sizes[b] < 0 and r != cc:
                    raise ValueError(f"F_{i}: off-diagonal entry in diagonal block {b + 1}")

    @property
    def m(self) -> int:
        return len(self.c)

    @property
    def param_dict(self) -> dict[str, str]:
        return dict(self.params)

    def label_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def same_as(self, other: SdpInstance, rel: float = 0.0) -> bool:
        """Numerical equality of all data (compared as doubles), metadata included."""
        if (
            self.block_sizes != other.block_sizes
            or self.m != other.m
            or self.tag != other.tag
            or self.param_dict != other.param_dict
            or tuple(self.labels) != tuple(other.labels)
        ):
            return False

        def close(a, b):
            a, b = float(a), float(b)
            return a == b or abs(a - b) <= rel * max(abs(a), abs(b))

        if not close(self.offset, other.offset):
            return False
        if not all(close(a, b) for a, b in zip(self.c, other.c)):
            return False
        for fa, fb in zip(self.F, other.F):
            keys = set(fa) | set(fb)
            if not all(close(fa.get(k, 0), fb.get(k, 0)) for k in keys):
                return False
        return True


def _params(**kw) -> tuple[tuple[str, str], ...]:
    return tuple((k, str(v)) for k, v in kw.items())


def _label(prefix: str, alpha: Sequence[int]) -> str:
    return f"{prefix}:" + ",".join(map(str, alpha))


def parse_label(label: str) -> tuple[str, Monomial]:
    prefix, _, rest = label.partition(":")
    return prefix, tuple(int(a) for a in rest.split(",")) if rest else ()


def _moment_encoding(mp: MomentProblem, f: Polynomial, eps, eta, tag) -> SdpInstance:
    """min L_y(f) + eta sum_l tr M(g_l y) + eps ||y||_1, y_0 = 1, M(g_l y) >= 0."""
    eps, eta = to_fraction(eps), to_fraction(eta)
    system = localizing_system(mp)
    mons = [a for a in mp.moment_basis if any(a)]
    zero = (0,) * mp.n
    nblk = len(system.sides)
    with_l1 = eps > 0
    block_sizes = list(system.sides) + ([-2 * len(mons)] if with_l1 else [])
    lp = nblk

    def trace_weight(alpha):
        return sum((tr.get(alpha, 0) for tr in system.traces), Fraction(0))

    c, F, labels = [], [{}], []
    for ell, mats in enumerate(system.matrices):
        for (r, cc), v in mats.get(zero, {}).items():
            F[0][(ell, r, cc)] = -v
    for k, alpha in enumerate(mons):
        mat: dict[Entry, object] = {}
        for ell, mats in enumerate(system.matrices):
            for (r, cc), v in mats.get(alpha, {}).items():
                mat[(ell, r, cc)] = v
        if with_l1:
            mat[(lp, 2 * k, 2 * k)] = Fraction(-1)
            mat[(lp, 2 * k + 1, 2 * k + 1)] = Fraction(1)
        c.append(f.coefficient(alpha) + eta * trace_weight(alpha))
        F.append(mat)
        labels.append(_label("y", alpha))
    if with_l1:
        for k, alpha in enumerate(mons):
            F.append({(lp, 2 * k, 2 * k): Fraction(1), (lp, 2 * k + 1, 2 * k + 1): Fraction(1)})
            c.append(eps)
            labels.append(_label("u", alpha))
    offset = f.coefficient(zero) + eta * trace_weight(zero) + eps
    return SdpInstance(
        tuple(block_sizes), tuple(c), tuple(F), offset, tag,
        _params(eps=eps, eta=eta, form="moment", order=mp.order), tuple(labels),
    )


def _feasible_point(mp: MomentProblem):
    """Some rational point of K, searched on a small deterministic grid (or None)."""
    n = mp.n
    radius = min(Fraction(2), mp.ball_N) if mp.ball_N is not None else Fraction(2)
    steps = [Fraction(0)] + [s * radius * k / 4 for k in range(1, 5) for s in (1, -1)]
    candidates = [(0,) * n]
    for k in range(1, len(steps)):
        for i in range(n):
            x = [Fraction(0)] * n
            x[i] = steps[k]
            candidates.append(tuple(x))
        candidates.append(tuple([steps[k]] * n))
    for x in candidates:
        if all(g(*x) >= 0 for g in mp.g):
            return x
    return None


def lambda_cap(mp: MomentProblem, f: Polynomial, eps, eta) -> Fraction | None:
    """An upper bound strictly above the coefficient program's optimum.

    Weak duality bounds lambda by the penalized moment objective at any
    moment-feasible y; the Dirac measure of a point of K is one.  Returns
    None when no point of K is found.
    """
    x = _feasible_point(mp)
    if x is None:
        return None
    eps, eta = to_fraction(eps), to_fraction(eta)
    value = f(*x)
    if eta:
        value += eta * sum(
            (g(*x) * sum(_monomial_value(beta, x) ** 2 for beta in basis(mp.n, mp.order - d))
             for g, d in zip(mp.localizers, mp.half_degrees)),
            Fraction(0),
        )
    if eps:
        value += eps * sum(abs(_monomial_value(a, x)) for a in mp.moment_basis)
    return value + 1 + abs(value)


def _coefficient_encoding(mp: MomentProblem, f: Polynomial, eps, eta, tag) -> SdpInstance:
    """max lambda s.t. |sum_l <C^l_a, X_l> + lambda 1_{a=0} - f_a| <= eps, X_l >= -eta I.

    X_l = Z_l - eta I with Z_l >= 0.  lambda is written U - w with w >= 0 and
    U from :func:`lambda_cap`, which keeps the moment side strictly feasible;
    without a known point of K it falls back to lambda = lambda+ - lambda-.
    """
    eps, eta = to_fraction(eps), to_fraction(eta)
    system = localizing_system(mp)
    mons = list(mp.moment_basis)
    N = len(mons)
    nblk = len(system.sides)
    with_box = eps > 0
    lp = nblk
    cap = lambda_cap(mp, f, eps, eta)
    nlam = 1 if cap is not None else 2
    block_sizes = list(system.sides) + [-(nlam + (2 * N if with_box else 0))]

    if cap is not None:
        F0 = {(lp, 0, 0): Fraction(-1)}
        offset = cap
    else:
        F0 = {(lp, 0, 0): Fraction(1), (lp, 1, 1): Fraction(-1)}
        offset = Fraction(0)
    c, F, labels = [], [F0], []
    for k, alpha in enumerate(mons):
        mat: dict[Entry, object] = {}
        for ell, mats in enumerate(system.matrices):
            for (r, cc), v in mats.get(alpha, {}).items():
                mat[(ell, r, cc)] = v
        shift = sum((tr.get(alpha, 0) for tr in system.traces), Fraction(0))
        rhs = f.coefficient(alpha) - eps + eta * shift
        if not any(alpha):
            if cap is not None:
                mat[(lp, 0, 0)] = Fraction(-1)
                rhs -= cap
            else:
                mat[(lp, 0, 0)] = Fraction(1)
                mat[(lp, 1, 1)] = Fraction(-1)
        if with_box:
            mat[(lp, nlam + k, nlam + k)] = -2 * eps
        c.append(rhs)
        F.append(mat)
        labels.append(_label("y", alpha))
    if with_box:
        for k, alpha in enumerate(mons):
            F.append({(lp, nlam + k, nlam + k): Fraction(1), (lp, nlam + N + k, nlam + N + k): Fraction(1)})
            c.append(Fraction(1))
            labels.append(_label("z", alpha))
    params = _params(eps=eps, eta=eta, form="coefficient", order=mp.order)
    if cap is not None:
        params += (("lambda_cap", str(cap)),)
    return SdpInstance(
        tuple(block_sizes), tuple(c), tuple(F), offset, tag, params, tuple(labels),
    )


def build_nominal(mp: MomentProblem) -> tuple[SdpInstance, SdpInstance]:
    """Moment relaxation (primal) and SOS program (dual) for the nominal f."""
    f = mp.objective
    return (
        _moment_encoding(mp, f, 0, 0, Formulation.NOMINAL_PRIMAL),
        _coefficient_encoding(mp, f, 0, 0, Formulation.NOMINAL_DUAL),
    )


def build_noise_dual(mp: MomentProblem) -> SdpInstance:
    """SOS program with eps-boxed coefficient equations and eta-shifted cones."""
    return _coefficient_encoding(mp, mp.objective, mp.eps, mp.eta, Formulation.NOISE_DUAL)


def build_noise_penalized(mp: MomentProblem) -> SdpInstance:
    """Moment program with both the trace and the l1 penalty (for duality checks)."""
    return _moment_encoding(mp, mp.objective, mp.eps, mp.eta, Formulation.NOISE_DUAL)


def build_priority_trace(mp: MomentProblem) -> SdpInstance:
    """Moment program penalized by eta * sum_l trace M(g_l y)."""
    return _moment_encoding(mp, mp.objective, 0, mp.eta, Formulation.PRIORITY_TRACE)


def build_priority_psd(mp: MomentProblem) -> tuple[SdpInstance, SdpInstance]:
    """(l1-penalized moment program, coefficient-box SOS program)."""
    return (
        _moment_encoding(mp, mp.objective, mp.eps, 0, Formulation.PRIORITY_PSD),
        _coefficient_encoding(mp, mp.objective, mp.eps, 0, Formulation.PRIORITY_PSD),
    )


def with_objective(sdp: SdpInstance, c: Sequence, offset=None) -> SdpInstance:
    """Same constraints, new cost vector."""
    if len(c) != sdp.m:
        raise ValueError("cost vector has the wrong length")
    return SdpInstance(
        sdp.block_sizes, tuple(c), sdp.F,
        sdp.offset if offset is None else offset, sdp.tag, sdp.params, sdp.labels,
    )


def build_canonical_robust(sdp: SdpInstance, eps) -> SdpInstance:
    """inf c.y + eps ||y||_1 s.t. F(y) >= 0, via u_i >= |y_i| in a new LP block."""
    eps = to_fraction(eps)
    m = sdp.m
    if eps == 0:
        return SdpInstance(
            sdp.block_sizes, sdp.c, sdp.F, sdp.offset, Formulation.CANONICAL_ROBUST,
            _params(eps=eps, form="moment"), sdp.labels,
        )
    lp = len(sdp.block_sizes)
    F = [dict(sdp.F[0])]
    for i in range(m):
        mat = dict(sdp.F[i + 1])
        mat[(lp, 2 * i, 2 * i)] = Fraction(-1)
        mat[(lp, 2 * i + 1, 2 * i + 1)] = Fraction(1)
        F.append(mat)
    for i in range(m):
        F.append({(lp, 2 * i, 2 * i): Fraction(1), (lp, 2 * i + 1, 2 * i + 1): Fraction(1)})
    labels = tuple(sdp.labels) or tuple(f"y{i + 1}" for i in range(m))
    labels = labels + tuple(f"u:{lab}" for lab in labels)
    return SdpInstance(
        sdp.block_sizes + (-2 * m,), tuple(sdp.c) + (eps,) * m, tuple(F), sdp.offset,
        Formulation.CANONICAL_ROBUST, _params(eps=eps, form="moment"), labels,
    )


def box_relaxed_dual(sdp: SdpInstance, eps) -> SdpInstance:
    """sup <F_0, X> s.t. |<F_i, X> - c_i| <= eps, X >= 0 (as an SDPA instance).

    The box is written <F_i, X> - 2 eps t_i = c_i - eps with t_i + s_i = 1.
    """
    eps = to_fraction(eps)
    m = sdp.m
    if eps == 0:
        return SdpInstance(
            sdp.block_sizes, sdp.c, sdp.F, sdp.offset, Formulation.CANONICAL_ROBUST,
            _params(eps=eps, form="coefficient"), sdp.labels,
        )
    lp = len(sdp.block_sizes)
    F = [dict(sdp.F[0])]
    c = []
    for i in range(m):
        mat = dict(sdp.F[i + 1])
        mat[(lp, i, i)] = -2 * eps
        F.append(mat)
        ci = sdp.c[i]
        c.append(ci - float(eps) if isinstance(ci, float) else to_fraction(ci) - eps)
    for i in range(m):
        F.append({(lp, i, i): Fraction(1), (lp, m + i, m + i): Fraction(1)})
        c.append(Fraction(1))
    labels = tuple(sdp.labels) or tuple(f"y{i + 1}" for i in range(m))
    labels = labels + tuple(f"z:{lab}" for lab in labels)
    return SdpInstance(
        sdp.block_sizes + (-2 * m,), tuple(c), tuple(F), sdp.offset,
        Formulation.CANONICAL_ROBUST, _params(eps=eps, form="coefficient"), labels,
    )


# ---------------------------------------------------------------------------
# solutions


@dataclass(frozen=True)
class MomentSequence:
    """Pseudo-moments y_a indexed by basis(n, 2j)."""

    basis: MonomialBasis
    values: tuple
    normalized: bool = True

    def __post_init__(self):
        if len(self.values) != len(self.basis):
            raise ValueError("moment vector does not match its basis")

    def __getitem__(self, alpha) -> object:
        return self.values[self.basis.index[tuple(alpha)]]

    def as_dict(self) -> dict[Monomial, object]:
        return dict(zip(self.basis.monomials, self.values))

    @property
    def order(self) -> int:
        return self.basis.d // 2

    def l1_norm(self):
        return sum(abs(v) for v in self.values)

    @classmethod
    def from_points(cls, points, weights, n: int, order: int) -> MomentSequence:
        """Moments of the atomic measure sum_k w_k delta_{x_k}."""
        B = basis(n, 2 * order)
        vals = []
        for alpha in B:
            total = 0
            for x, w in zip(points, weights):
                term = w
                for xi, a in zip(x, alpha):
                    term = term * xi**a
                total = total + term
            vals.append(total)
        return cls(B, tuple(vals))


def moment_sequence_from_solution(sdp: SdpInstance, y: Sequence, n: int, order: int) -> MomentSequence:
    """Read the y_a variables of a moment/coefficient encoding back into a sequence.

    y_0 defaults to 1 when it was eliminated; the sequence is rescaled so that
    y_0 = 1 when it was a variable.
    """
    B = basis(n, 2 * order)
    vals = {alpha: None for alpha in B}
    vals[(0,) * n] = 1.0
    for lab, v in zip(sdp.labels, y):
        if not lab.startswith("y:"):
            continue
        _, alpha = parse_label(lab)
        if alpha in vals:
            vals[alpha] = float(v)
    missing = [a for a, v in vals.items() if v is None]
    if missing:
        raise ValueError(f"solution lacks moments for {missing[:3]}...")
    y0 = vals[(0,) * n]
    if y0 and y0 != 1.0:
        vals = {a: v / y0 for a, v in vals.items()}
    return MomentSequence(B, tuple(vals[a] for a in B))


@dataclass(frozen=True)
class SosCertificate:
    """lambda, Gram matrices and the residual r = f - lambda - sum_l sigma_l g_l."""

    lam: float
    grams: tuple
    residual: dict[Monomial, float] = field(repr=False)
    max_residual: float = 0.0
    min_eigenvalues: tuple[float, ...] = ()

    def valid(self, eps_star: float, eta_star: float) -> bool:
        return self.max_residual <= eps_star and min(self.min_eigenvalues, default=0.0) >= -eta_star


def sos_certificate(mp: MomentProblem, lam: float, grams: Sequence, f: Polynomial | None = None) -> SosCertificate:
    """Residual coefficients of f - lambda - sum_l <C^l_a, X_l> over all a."""
    import numpy as np

    f = mp.objective if f is None else f
    system = localizing_system(mp)
    grams = tuple(np.asarray(G, dtype=float) for G in grams)
    residual = {}
    for alpha in mp.moment_basis:
        acc = float(f.coefficient(alpha)) - (lam if not any(alpha) else 0.0)
        for ell, mats in enumerate(system.matrices):
            G = grams[ell]
            for (r, c), v in mats.get(alpha, {}).items():
                acc -= float(v) * (G[r, c] if r == c else 2 * G[r, c])
        residual[alpha] = acc
    eigs = tuple(float(np.linalg.eigvalsh(G).min()) if G.size else 0.0 for G in grams)
    return SosCertificate(
        float(lam), grams, residual, max((abs(v) for v in residual.values()), default=0.0), eigs
    )


def perturbed_objective(mp: MomentProblem, theta) -> Polynomial:
    """f + theta * sum_l g_l sum_{|b| <= j - d_l} x^(2b) for this problem."""
    return even_square_perturbation(mp.objective, mp.g, mp.order, theta)
