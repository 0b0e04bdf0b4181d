"""Primal-dual path-following interior-point method for block SDPs.

Solves the SDPA pair held by :class:`~robustpop.relax.SdpInstance`::

    (P)  min  c.y + offset        s.t.  S = sum_i y_i F_i - F_0 >= 0
    (D)  max  <F_0, X> + offset   s.t.  <F_i, X> = c_i,  X >= 0

from the infeasible start y = 0, X = S = lambda_star * I, using the HKM
search direction and a dense Cholesky-factored Schur complement.  Parameter
names follow SDPA (epsilonStar, lambdaStar, betaStar, betaBar).
"""

from __future__ import annotations

import enum
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as sla

from .relax import SdpInstance

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "SolverResult",
    "Status",
    "achieved_noise_level",
    "residuals",
    "solve",
]


class Status(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    PRIMAL_INFEASIBLE_SUSPECTED = "PRIMAL_INFEASIBLE_SUSPECTED"
    DUAL_INFEASIBLE_SUSPECTED = "DUAL_INFEASIBLE_SUSPECTED"
    MAX_ITER = "MAX_ITER"
    NUMERICAL_FAILURE = "NUMERICAL_FAILURE"


@dataclass(frozen=True)
class SolverConfig:
    epsilon_star: float = 1e-7
    lambda_star: float = 1e2
    beta_bar: float = 0.2
    beta_star: float = 0.1
    max_iter: int = 200
    step_fraction: float = 0.9
    verbose: bool = False

    def __post_init__(self):
        for name in ("epsilon_star", "lambda_star", "beta_bar", "beta_star", "step_fraction"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.epsilon_star < 1:
            raise ValueError("epsilon_star must be < 1")
        if not (self.step_fraction < 1 and self.beta_star < 1 and self.beta_bar < 1):
            raise ValueError("step_fraction, beta_star and beta_bar must be < 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


class IterationRecord(NamedTuple):
    iteration: int
    r_p: float
    r_d: float
    gap: float
    step_primal: float
    step_dual: float
    primal: float
    dual: float
    mu: float
    norm_y: float
    norm_X: float

    @property
    def step(self) -> float:
        return min(self.step_primal, self.step_dual)


@dataclass
class SolverResult:
    """Outcome of :func:`solve`.

    ``r_p`` is the relative violation of the equalities <F_i, X> = c_i,
    ``r_d`` the relative violation of S = sum y_i F_i - F_0 (the moment side),
    ``gap`` = |primal - dual| / (1 + |primal| + |dual|).
    """

    status: Status
    primal_value: float
    dual_value: float
    y: np.ndarray
    X: list[np.ndarray]
    S: list[np.ndarray]
    r_p: float
    r_d: float
    gap: float
    iterations: int
    history: list[IterationRecord] = field(default_factory=list, repr=False)
    instance: SdpInstance | None = field(default=None, repr=False)

    @property
    def value(self) -> float:
        return 0.5 * (self.primal_value + self.dual_value)


# ---------------------------------------------------------------------------
# dense compiled form


class _Block:
    __slots__ = ("diag", "size", "F", "active")

    def __init__(self, diag: bool, size: int, F: np.ndarray):
        self.diag = diag
        self.size = size
        self.F = F  # (m+1, s) if diag else (m+1, s, s)
        flat = F[1:].reshape(F.shape[0] - 1, -1)
        self.active = np.flatnonzero(np.any(flat != 0, axis=1))


def _compile(sdp: SdpInstance) -> tuple[np.ndarray, list[_Block], float]:
    m = sdp.m
    blocks = []
    for b, s in enumerate(sdp.block_sizes):
        size = abs(s)
        if s < 0:
            blocks.append(np.zeros((m + 1, size)))
        else:
            blocks.append(np.zeros((m + 1, size, size)))
    for i, mat in enumerate(sdp.F):
        for (b, r, c), v in mat.items():
            v = float(v)
            arr = blocks[b]
            if arr.ndim == 2:
                arr[i, r] = v
            else:
                arr[i, r, c] = v
                arr[i, c, r] = v
    out = [_Block(arr.ndim == 2, arr.shape[1], arr) for arr in blocks]
    return np.array([float(v) for v in sdp.c]), out, float(sdp.offset)


def _apply(block: _Block, y: np.ndarray) -> np.ndarray:
    """sum_i y_i F_i - F_0 for one block."""
    F = block.F
    if block.diag:
        return y @ F[1:] - F[0]
    return np.tensordot(y, F[1:], axes=1) - F[0]


def _inner(block: _Block, M: np.ndarray) -> np.ndarray:
    """(<F_i, M>)_{i=1..m} for one block."""
    F = block.F[1:]
    if block.diag:
        return F @ M
    return F.reshape(F.shape[0], -1) @ M.reshape(-1)


def _max_step(block: _Block, V: np.ndarray, dV: np.ndarray) -> float:
    if block.diag:
        neg = dV < 0
        if not np.any(neg):
            return math.inf
        return float(np.min(-V[neg] / dV[neg]))
    L = np.linalg.cholesky(V)
    W = sla.solve_triangular(L, dV, lower=True)
    W = sla.solve_triangular(L, W.T, lower=True).T
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))[0]
    return math.inf if lam >= 0 else float(-1.0 / lam)


def _min_eig(block: _Block, V: np.ndarray) -> float:
    if V.size == 0:
        return 0.0
    if block.diag:
        return float(V.min())
    return float(np.linalg.eigvalsh(0.5 * (V + V.T))[0])


class _Iterate:
    def __init__(self, y, X, S):
        self.y, self.X, self.S = y, X, S


def _measures(c, blocks, offset, it: _Iterate, scale_c: float, scale_F0: float):
    P = [_apply(b, it.y) - S for b, S in zip(blocks, it.S)]
    AX = sum((_inner(b, X) for b, X in zip(blocks, it.X)), np.zeros_like(c))
    d = c - AX
    pobj = float(c @ it.y) + offset
    dobj = float(sum(np.sum(b.F[0] * X) for b, X in zip(blocks, it.X))) + offset
    p_feas = max((float(np.max(np.abs(p))) for p in P if p.size), default=0.0) / scale_F0
    d_feas = (float(np.max(np.abs(d))) if d.size else 0.0) / scale_c
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    nvar = sum(b.size for b in blocks)
    mu = sum(float(np.sum(X * S)) for X, S in zip(it.X, it.S)) / max(nvar, 1)
    return P, d, pobj, dobj, p_feas, d_feas, gap, mu


def _ray_certificate(c, blocks, y, tol) -> bool:
    """Is y/||y|| an improving direction of (P) with sum y_i F_i >= -tol?"""
    ny = np.linalg.norm(y)
    if ny == 0:
        return False
    d = y / ny
    if float(c @ d) > -tol * (1 + np.linalg.norm(c)):
        return False
    for b in blocks:
        M = d @ b.F[1:] if b.diag else np.tensordot(d, b.F[1:], axes=1)
        if M.size and _min_eig(b, M) < -tol * (1 + np.abs(b.F[1:]).max()):
            return False
    return True


def solve(sdp: SdpInstance, cfg: SolverConfig | None = None) -> SolverResult:
    """Run the interior-point method; never raises on numerical trouble."""
    cfg = cfg or SolverConfig()
    c, blocks, offset = _compile(sdp)
    m = len(c)
    lam0 = cfg.lambda_star
    it = _Iterate(
        np.zeros(m),
        [np.full(b.size, lam0) if b.diag else lam0 * np.eye(b.size) for b in blocks],
        [np.full(b.size, lam0) if b.diag else lam0 * np.eye(b.size) for b in blocks],
    )
    scale_c = 1.0 + (float(np.max(np.abs(c))) if m else 0.0)
    scale_F0 = 1.0 + max((float(np.max(np.abs(b.F[0]))) for b in blocks if b.F[0].size), default=0.0)
    history: list[IterationRecord] = []
    status = Status.MAX_ITER
    eps = cfg.epsilon_star
    stall = 0
    k = 0
    best_merit, best = math.inf, None

    def record(status_):
        P, d, pobj, dobj, p_feas, d_feas, gap, mu = _measures(c, blocks, offset, it, scale_c, scale_F0)
        return SolverResult(
            status_, pobj, dobj, it.y.copy(), [X.copy() for X in it.X], [S.copy() for S in it.S],
            d_feas, p_feas, gap, k, history, sdp,
        )

    for k in range(cfg.max_iter + 1):
        P, d, pobj, dobj, p_feas, d_feas, gap, mu = _measures(c, blocks, offset, it, scale_c, scale_F0)
        if not all(map(math.isfinite, (pobj, dobj, p_feas, d_feas, mu))):
            status = Status.NUMERICAL_FAILURE
            break
        if p_feas <= eps and d_feas <= eps and gap <= eps:
            status = Status.OPTIMAL
            break
        # divergence of an objective while the matching side stays feasible
        if p_feas <= eps and pobj < -1.0 / eps:
            status = Status.DUAL_INFEASIBLE_SUSPECTED
            break
        if d_feas <= eps and dobj > 1.0 / eps:
            status = Status.PRIMAL_INFEASIBLE_SUSPECTED
            break
        runaway = _runaway(history, eps)
        if runaway is not None:
            status = runaway
            break
        merit = max(p_feas, d_feas, gap)
        if merit < best_merit:
            best_merit = merit
            best = (k, it.y.copy(), [X.copy() for X in it.X], [S.copy() for S in it.S])
        elif best_merit < math.sqrt(eps) and merit > 1e3 * best_merit:
            # accuracy is being lost faster than it is gained; stop here
            status = Status.NUMERICAL_FAILURE
            break
        if k == cfg.max_iter:
            break

        feasible = p_feas <= eps and d_feas <= eps
        sigma = cfg.beta_star if feasible else cfg.beta_bar
        if history and history[-1].step < 0.2:
            # the last step was blocked by the cone boundary: recentre harder
            sigma = max(sigma, 0.5 if history[-1].step > 1e-3 else 0.9)
        try:
            dy, dX, dS = _direction(c, blocks, it, P, sigma * mu)
        except (np.linalg.LinAlgError, FloatingPointError, ValueError):
            # one retry with stronger centering before giving up
            try:
                dy, dX, dS = _direction(c, blocks, it, P, max(cfg.beta_bar, 0.5) * mu, robust=True)
            except (np.linalg.LinAlgError, FloatingPointError, ValueError):
                status = Status.NUMERICAL_FAILURE
                break
        if not (np.all(np.isfinite(dy)) and all(np.all(np.isfinite(v)) for v in dX + dS)):
            status = Status.NUMERICAL_FAILURE
            break
        try:
            ap = min([_max_step(b, S, D) for b, S, D in zip(blocks, it.S, dS)] + [math.inf])
            ad = min([_max_step(b, X, D) for b, X, D in zip(blocks, it.X, dX)] + [math.inf])
        except np.linalg.LinAlgError:
            status = Status.NUMERICAL_FAILURE
            break
        ap = min(1.0, cfg.step_fraction * ap)
        ad = min(1.0, cfg.step_fraction * ad)
        history.append(IterationRecord(
            k, d_feas, p_feas, gap, ap, ad, pobj, dobj, mu,
            float(np.linalg.norm(it.y)), math.sqrt(sum(float(np.sum(X * X)) for X in it.X)),
        ))
        if cfg.verbose:
            print(f"{k} {d_feas:.3e} {p_feas:.3e} {gap:.3e} {min(ap, ad):.3e}", file=sys.stderr)
        it.y = it.y + ap * dy
        it.S = [S + ap * D for S, D in zip(it.S, dS)]
        it.X = [X + ad * D for X, D in zip(it.X, dX)]
        if max(ap, ad) < 1e-10:
            stall += 1
            if stall >= 3:
                status = Status.NUMERICAL_FAILURE
                break
        else:
            stall = 0

    if status in (Status.MAX_ITER, Status.NUMERICAL_FAILURE) and best is not None:
        # report the most accurate iterate seen rather than the last one
        _, it.y, it.X, it.S = best
    result = record(status)
    if status in (Status.MAX_ITER, Status.NUMERICAL_FAILURE):
        result.status = _classify_failure(c, blocks, result, cfg)
    log.debug("solve %s after %d iterations: p=%g d=%g", result.status, result.iterations,
              result.primal_value, result.dual_value)
    return result


_WINDOW = 40
_RUNAWAY_NORM = 1e4


def _trend(values: Sequence[float], sign: int) -> bool:
    """Mostly monotone (90% of the steps) and monotone end to end."""
    steps = [sign * (b - a) >= 0 for a, b in zip(values, values[1:])]
    return sign * (values[-1] - values[0]) > 0 and sum(steps) >= 0.9 * len(steps)


def _runaway(history: Sequence[IterationRecord], eps: float) -> Status | None:
    """Spot iterates that stay feasible on one side but run off to infinity.

    On a problem with a bounded optimal set the central path is bounded, so a
    side whose iterates stay feasible while their norm keeps growing and their
    objective keeps improving, with the duality gap no longer closing, points
    to an unbounded objective there (an infeasible, possibly only weakly
    infeasible, opposite side).  Decisions use the last ``_WINDOW`` iterations.
    """
    if len(history) < _WINDOW:
        return None
    win = history[-_WINDOW:]
    first, last = win[0], win[-1]
    stagnant = last.gap > 0.5 * first.gap and last.gap > math.sqrt(eps)
    if not stagnant:
        return None
    if (
        all(r.r_d <= eps for r in win)
        and last.norm_y > max(_RUNAWAY_NORM, 1.5 * first.norm_y)
        and _trend([r.norm_y for r in win], 1)
        and _trend([r.primal for r in win], -1)
    ):
        return Status.DUAL_INFEASIBLE_SUSPECTED
    if (
        all(r.r_p <= eps for r in win)
        and last.norm_X > max(_RUNAWAY_NORM, 1.5 * first.norm_X)
        and _trend([r.norm_X for r in win], 1)
        and _trend([r.dual for r in win], 1)
    ):
        return Status.PRIMAL_INFEASIBLE_SUSPECTED
    return None


def _classify_failure(c, blocks, res: SolverResult, cfg: SolverConfig) -> Status:
    """A stalled run whose moment iterate is an (approximate) improving ray."""
    tol = math.sqrt(cfg.epsilon_star)
    if res.r_d <= tol and np.linalg.norm(res.y) > 1.0 / tol and _ray_certificate(c, blocks, res.y, tol):
        return Status.DUAL_INFEASIBLE_SUSPECTED
    return res.status


def _direction(c, blocks, it: _Iterate, P, target, robust=False):
    m = len(c)
    B = np.zeros((m, m))
    rhs = -c.copy()
    Sinv = []
    for b, X, S, Pb in zip(blocks, it.X, it.S, P):
        act = b.active
        if b.diag:
            si = 1.0 / S
            Sinv.append(si)
            Fa = b.F[1:][act]
            B[np.ix_(act, act)] += (Fa * (X * si)) @ Fa.T
            rhs += _inner(b, target * si - X * Pb * si)
        else:
            L = sla.cho_factor(S, lower=True)
            si = sla.cho_solve(L, np.eye(b.size))
            si = 0.5 * (si + si.T)
            Sinv.append(si)
            if act.size:
                Fa = b.F[1:][act]
                G = np.matmul(np.matmul(X, Fa), si)
                Bb = Fa.reshape(act.size, -1) @ np.transpose(G, (0, 2, 1)).reshape(act.size, -1).T
                B[np.ix_(act, act)] += 0.5 * (Bb + Bb.T)
            rhs += _inner(b, target * si - X @ Pb @ si)
    if robust:
        def lin(v):
            return np.linalg.lstsq(B, v, rcond=None)[0]
    else:
        factor = sla.cho_factor(B, lower=True)

        def lin(v):
            return sla.cho_solve(factor, v)

    def recover(dy):
        dX, dS = [], []
        for b, X, Pb, si in zip(blocks, it.X, P, Sinv):
            D = _apply(b, dy) + b.F[0] + Pb  # sum dy_i F_i + P
            dS.append(D)
            if b.diag:
                dX.append(target * si - X - X * D * si)
            else:
                T = X @ D @ si
                dX.append(target * si - X - 0.5 * (T + T.T))
        return dX, dS

    def violation(dX):
        return sum((_inner(b, X + D) for b, X, D in zip(blocks, it.X, dX)), np.zeros_like(c)) - c

    dy = lin(rhs)
    dX, dS = recover(dy)
    # iterative refinement against the equalities actually reached by X + dX
    err = violation(dX)
    for _ in range(2):
        if not err.size:
            break
        trial = dy + lin(err)
        tX, tS = recover(trial)
        terr = violation(tX)
        if not np.max(np.abs(terr)) < 0.5 * np.max(np.abs(err)):
            break
        dy, dX, dS, err = trial, tX, tS, terr
    return dy, dX, dS


# ---------------------------------------------------------------------------
# residual reporting


def residuals(sdp: SdpInstance, point) -> tuple[float, float, float]:
    """(r_p, r_d, gap) of a point (y, X) in absolute terms.

    r_p: largest violation of <F_i, X> = c_i;
    r_d: most negative eigenvalue (as a positive number) over X and
         sum y_i F_i - F_0, 0 if both are PSD;
    gap: |primal - dual| / (1 + |primal| + |dual|).
    """
    y, X = point
    c, blocks, offset = _compile(sdp)
    y = np.asarray(y, dtype=float)
    if y.shape != (len(c),) or len(X) != len(blocks):
        raise ValueError("point dimensions do not match the instance")
    X = [np.asarray(Xb, dtype=float) for Xb in X]
    for b, Xb in zip(blocks, X):
        want = (b.size,) if b.diag else (b.size, b.size)
        if Xb.shape != want:
            raise ValueError(f"block shape {Xb.shape} != {want}")
    AX = sum((_inner(b, Xb) for b, Xb in zip(blocks, X)), np.zeros_like(c))
    r_p = float(np.max(np.abs(AX - c))) if len(c) else 0.0
    neg = 0.0
    for b, Xb in zip(blocks, X):
        neg = max(neg, -_min_eig(b, Xb), -_min_eig(b, _apply(b, y)))
    pobj = float(c @ y) + offset
    dobj = float(sum(np.sum(b.F[0] * Xb) for b, Xb in zip(blocks, X))) + offset
    return r_p, neg, abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))


def achieved_noise_level(res: SolverResult, sdp: SdpInstance | None = None) -> tuple[float, float]:
    """Smallest (eps, eta) for which the returned X is feasible in the boxed/shifted model."""
    sdp = sdp or res.instance
    if sdp is None:
        raise ValueError("result carries no instance")
    c, blocks, _ = _compile(sdp)
    AX = sum((_inner(b, Xb) for b, Xb in zip(blocks, res.X)), np.zeros_like(c))
    eps = float(np.max(np.abs(AX - c))) if len(c) else 0.0
    eta = max([0.0] + [-_min_eig(b, Xb) for b, Xb in zip(blocks, res.X)])
    return eps, eta


def block_matrices(res: SolverResult) -> Sequence[np.ndarray]:
    return res.X
