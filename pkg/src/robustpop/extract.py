"""Recovering minimizers from a (pseudo-)moment sequence.

The moment matrix of an r-atomic measure factors as V V^T with r columns.
Bringing V to column echelon form exposes r "basis" monomials; multiplying
them by each variable lands on rows of V that define multiplication matrices
N_i whose common eigenvectors are the atoms.  A random combination of the
N_i is brought to real Schur form and each atom coordinate is read off as a
quadratic form q_k^T N_i q_k on the Schur vectors.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .poly import basis
from .relax import Formulation, MomentProblem, MomentSequence
from .robust import robust_objective_eps, robust_objective_eta

__all__ = [
    "ExtractionConfig",
    "ExtractionResult",
    "PointCertificate",
    "RankOneReport",
    "certify_point",
    "extract_minimizers",
    "moment_matrix",
    "numerical_rank",
    "rank_one_equivalence_check",
]


@dataclass(frozen=True)
class ExtractionConfig:
    rank_tol: float = 1e-3
    pivot_tol: float = 1e-6
    feas_tol: float = 1e-4

    def __post_init__(self):
        for name in ("rank_tol", "pivot_tol", "feas_tol"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


@dataclass
class PointCertificate:
    point: tuple[float, ...]
    objective: float
    constraints: tuple[float, ...]
    gap: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExtractionResult:
    """Moment-matrix ranks with the flatness verdict, plus recovered atoms and their diagnostics."""

    ranks: tuple[int, ...]
    flat: bool
    order_used: int
    points: list[tuple[float, ...]] = field(default_factory=list)
    weights: list[float] = field(default_factory=list)
    reconstruction_error: float = math.nan
    certificates: list[PointCertificate] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return self.ranks[self.order_used] if self.ranks else 0

    @property
    def trusted(self) -> bool:
        return self.flat and not self.flags

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rank"] = self.rank
        return out


def moment_matrix(y: MomentSequence, t: int) -> np.ndarray:
    """M_t(y) as a float array, rows in graded-lex order."""
    rows = basis(y.basis.n, t).monomials
    if 2 * t > y.basis.d:
        raise ValueError(f"order {t} needs moments of degree {2 * t}, have {y.basis.d}")
    idx = y.basis.index
    vals = [float(v) for v in y.values]
    s = len(rows)
    M = np.empty((s, s))
    for r, beta in enumerate(rows):
        for c in range(r, s):
            gamma = rows[c]
            M[r, c] = M[c, r] = vals[idx[tuple(a + b for a, b in zip(beta, gamma))]]
    return M


def numerical_rank(M: np.ndarray, rank_tol: float) -> int:
    """Number of singular values above rank_tol times the largest one."""
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rank_tol * sv[0]))


def _column_echelon(V: np.ndarray, pivot_tol: float) -> tuple[np.ndarray, list[int]]:
    """Reduced column echelon form of V (rows in monomial order) and its pivot rows."""
    U = V.copy()
    rows, cols = U.shape
    scale = max(np.abs(U).max(), 1e-300)
    pivots: list[int] = []
    col = 0
    for r in range(rows):
        if col == cols:
            break
        j = col + int(np.argmax(np.abs(U[r, col:])))
        if abs(U[r, j]) <= pivot_tol * scale:
            U[r, col:] = 0.0
            continue
        U[:, [col, j]] = U[:, [j, col]]
        U[:, col] /= U[r, col]
        for k in range(cols):
            if k != col:
                U[:, k] -= U[r, k] * U[:, col]
        pivots.append(r)
        col += 1
    return U[:, :col], pivots


def _atom_matrix(points, n: int, t: int) -> np.ndarray:
    rows = basis(n, t).monomials
    vs = [np.array([np.prod([xi**a for xi, a in zip(x, alpha)]) for alpha in rows]) for x in points]
    return np.column_stack([np.outer(v, v).ravel() for v in vs])


def _weights(points, y: MomentSequence, t: int, j: int) -> tuple[np.ndarray, float]:
    """Least-squares weights from M_t(y), and the max entry error they leave in M_j(y)."""
    n = y.basis.n
    w, *_ = np.linalg.lstsq(_atom_matrix(points, n, t), moment_matrix(y, t).ravel(), rcond=None)
    err = float(np.max(np.abs(_atom_matrix(points, n, j) @ w - moment_matrix(y, j).ravel())))
    return w, err


def extract_minimizers(
    y: MomentSequence,
    mp: MomentProblem,
    cfg: ExtractionConfig | None = None,
    *,
    seed: int = 0,
    bound: float | None = None,
) -> ExtractionResult:
    """Atoms of the measure behind ``y`` (when the moment matrices allow it).

    When no order is flat the points are still computed from the largest
    order that supports multiplication matrices, and ``NOT_FLAT`` is flagged.
    With ``bound`` each point is certified against it.
    """
    cfg = cfg or ExtractionConfig()
    n, j = mp.n, mp.order
    if y.basis.d < 2 * j:
        raise ValueError("moment sequence is shorter than the relaxation order")
    dv = max(1, max(mp.half_degrees))
    ranks = tuple(numerical_rank(moment_matrix(y, t), cfg.rank_tol) for t in range(j + 1))
    flat_t = next((t for t in range(dv, j + 1) if ranks[t] == ranks[t - dv]), None)
    flags: list[str] = []
    t = flat_t if flat_t is not None else j
    if flat_t is None:
        flags.append("NOT_FLAT")
    result = ExtractionResult(ranks, flat_t is not None, t, flags=flags)
    r = ranks[t]
    if r == 0:
        flags.append("ILL_CONDITIONED")
        return result

    M = moment_matrix(y, t)
    U_, s_, _ = np.linalg.svd(0.5 * (M + M.T))
    V = U_[:, :r] * np.sqrt(s_[:r])
    U, pivots = _column_echelon(V, cfg.pivot_tol)
    rows = basis(n, t).monomials
    index = {alpha: k for k, alpha in enumerate(rows)}
    if len(pivots) != r:
        flags.append("ILL_CONDITIONED")
        return result
    base = [rows[p] for p in pivots]
    N = []
    for i in range(n):
        Ni = np.empty((r, r))
        for k, w in enumerate(base):
            shifted = tuple(a + (1 if v == i else 0) for v, a in enumerate(w))
            if shifted not in index:
                flags.append("ILL_CONDITIONED")
                return result
            Ni[k] = U[index[shifted]]
        N.append(Ni)

    rng = np.random.default_rng(seed)
    lam = rng.random(n)
    lam /= lam.sum()
    _, Q = sla.schur(sum(l * Ni for l, Ni in zip(lam, N)), output="real")
    pts = sorted(tuple(float(Q[:, k] @ Ni @ Q[:, k]) for Ni in N) for k in range(r))
    result.points = pts
    w, err = _weights(pts, y, t, j)
    result.weights = [float(v) for v in w]
    result.reconstruction_error = err
    if bound is not None:
        result.certificates = [certify_point(x, mp, bound, cfg) for x in pts]
    return result


def certify_point(x: Sequence[float], mp: MomentProblem, bound: float, cfg: ExtractionConfig | None = None) -> PointCertificate:
    """f(x), each g_l(x) and f(x) - bound; passes when x is (nearly) feasible and above the bound."""
    cfg = cfg or ExtractionConfig()
    if len(x) != mp.n:
        raise ValueError(f"point has {len(x)} coordinates, problem has {mp.n} variables")
    xs = tuple(float(v) for v in x)
    fx = float(mp.objective(*xs))
    gs = tuple(float(g(*xs)) for g in mp.g)
    gap = fx - float(bound)
    passed = all(v >= -cfg.feas_tol for v in gs) and gap >= -cfg.feas_tol
    return PointCertificate(xs, fx, gs, gap, passed)


@dataclass
class RankOneReport:
    status: str  # PASS, FAIL or NOT_RANK_ONE
    rank: int
    point: tuple[float, ...] | None = None
    robust_value: float | None = None
    solve_value: float | None = None
    discrepancy: float | None = None
    tolerance: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def rank_one_equivalence_check(
    y: MomentSequence,
    mp: MomentProblem,
    tag: Formulation,
    value: float,
    epsilon_star: float,
    cfg: ExtractionConfig | None = None,
) -> RankOneReport:
    """When M_j(y) has rank one, its atom x* must attain the penalized value.

    The atom is read off the first-order moments; the robust objective at x*
    (trace form for PRIORITY_TRACE, l1 form for PRIORITY_PSD) is compared with
    the value returned by the solve.
    """
    cfg = cfg or ExtractionConfig()
    tag = Formulation(tag)
    if tag not in (Formulation.PRIORITY_TRACE, Formulation.PRIORITY_PSD):
        raise ValueError("rank-one check applies to PRIORITY_TRACE or PRIORITY_PSD solutions")
    rank = numerical_rank(moment_matrix(y, mp.order), cfg.rank_tol)
    if rank != 1:
        return RankOneReport("NOT_RANK_ONE", rank)
    n = mp.n
    x = tuple(float(y[tuple(int(i == k) for i in range(n))]) for k in range(n))
    robust = robust_objective_eta if tag is Formulation.PRIORITY_TRACE else robust_objective_eps
    rv = float(robust(mp, x))
    tol = 10 * epsilon_star * (1 + abs(value))
    disc = abs(rv - value)
    return RankOneReport("PASS" if disc <= tol else "FAIL", 1, x, rv, float(value), disc, tol)
