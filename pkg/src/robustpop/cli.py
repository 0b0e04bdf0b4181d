"""Command-line front end: ``robustpop relax | solve | reproduce | rerun``.

Every run is described by a :class:`RunManifest`.  Reports are JSON lines,
one record per pipeline stage, each carrying the schema version; the first
record of a run echoes its manifest so the run can be repeated with
``robustpop rerun``.  Timings live under a separate ``timing`` key so that two
reports of the same manifest compare equal once it is dropped.

Every option can also be given through the environment, e.g.
``ROBUSTPOP_SOLVE_EPSILON_STAR=1e-9``.
"""

from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterator

import click
import numpy as np

from .extract import ExtractionConfig, extract_minimizers, rank_one_equivalence_check
from .poly import PolynomialParseError, even_square_perturbation, parse_polynomial, to_fraction
from .problems import BUILTINS, motzkin, perturbed_minima, univariate
from .relax import (
    Formulation,
    MomentProblem,
    SdpInstance,
    build_canonical_robust,
    build_noise_dual,
    build_nominal,
    build_priority_psd,
    build_priority_trace,
    moment_sequence_from_solution,
)
from .sdpa import dumps_sdpa
from .sdpsolve import SolverConfig, Status, achieved_noise_level, solve

SCHEMA = "robustpop.report/1"

FORMULATIONS = {
    "nominal-primal": Formulation.NOMINAL_PRIMAL,
    "nominal-dual": Formulation.NOMINAL_DUAL,
    "noise-dual": Formulation.NOISE_DUAL,
    "priority-trace": Formulation.PRIORITY_TRACE,
    "priority-psd": Formulation.PRIORITY_PSD,
    "canonical-robust": Formulation.CANONICAL_ROBUST,
}


class StageError(click.ClickException):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"[{stage}] {exc}")
        self.stage = stage


# ---------------------------------------------------------------------------
# problems and manifests


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to repeat a run.  Radii are kept as exact strings."""

    problem: str
    formulation: str = "nominal-primal"
    order: int | None = None
    eps: str | None = None
    eta: str | None = None
    gamma: str = "0"
    epsilon_star: float = SolverConfig.epsilon_star
    lambda_star: float = SolverConfig.lambda_star
    beta_bar: float = SolverConfig.beta_bar
    max_iter: int = SolverConfig.max_iter
    rank_tol: float = ExtractionConfig.rank_tol
    seed: int = 0
    out: str | None = None
    label: str = ""

    def solver_config(self, verbose: bool = False) -> SolverConfig:
        return SolverConfig(
            epsilon_star=self.epsilon_star, lambda_star=self.lambda_star,
            beta_bar=self.beta_bar, max_iter=self.max_iter, verbose=verbose,
        )

    def extraction_config(self) -> ExtractionConfig:
        return ExtractionConfig(rank_tol=self.rank_tol)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunManifest:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown manifest fields: {sorted(unknown)}")
        return cls(**d)


def _term_lines(value, where: str) -> list[str]:
    if isinstance(value, str):
        return value.splitlines()
    if isinstance(value, list) and all(isinstance(t, str) for t in value):
        return value
    raise ValueError(f"{where}: expected a list of term strings or a text block")


def load_problem_file(path: str | Path) -> dict:
    """Read a JSON problem description into polynomial objects.

    Returns a dict with ``objective``, ``constraints``, ``order``, ``ball_N``,
    ``eps`` and ``eta`` (the last four possibly None).
    """
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict) or "objective" not in data:
        raise ValueError(f"{path}: expected an object with an 'objective' field")
    variables = data.get("variables")
    if isinstance(variables, list):
        n = len(variables)
    elif isinstance(variables, int):
        n = variables
    elif variables is None:
        n = None
    else:
        raise ValueError(f"{path}: 'variables' must be a count or a list of names")

    def parse(value, where):
        try:
            return parse_polynomial(_term_lines(value, where), n)
        except PolynomialParseError as exc:
            raise ValueError(f"{path}: {where}: {exc}") from exc

    objective = parse(data["objective"], "objective")
    n = objective.n
    constraints = tuple(
        parse(g, f"constraints[{k}]") for k, g in enumerate(data.get("constraints") or [])
    )
    noise = data.get("noise") or {}
    ball = data.get("ball_N")
    return {
        "objective": objective,
        "constraints": constraints,
        "order": data.get("order"),
        "ball_N": None if ball is None else to_fraction(str(ball)),
        "eps": noise.get("epsilon"),
        "eta": noise.get("eta"),
    }


def resolve_problem(man: RunManifest) -> MomentProblem:
    if man.problem in BUILTINS:
        f = univariate(to_fraction(man.gamma)) if man.problem == "univariate" else BUILTINS[man.problem]()
        data = {"objective": f, "constraints": (), "order": None, "ball_N": None, "eps": None, "eta": None}
    else:
        data = load_problem_file(man.problem)
    order = man.order if man.order is not None else data["order"]
    if order is None:
        order = max(1, math.ceil(data["objective"].degree / 2))
    eps = man.eps if man.eps is not None else data["eps"]
    eta = man.eta if man.eta is not None else data["eta"]
    return MomentProblem(
        data["objective"], data["constraints"], int(order), data["ball_N"],
        to_fraction(str(eps)) if eps is not None else 0,
        to_fraction(str(eta)) if eta is not None else 0,
    )


def build_instance(mp: MomentProblem, formulation: str) -> SdpInstance:
    """The SDP solved for a formulation name (penalized forms use the moment side)."""
    tag = FORMULATIONS[formulation]
    if tag is Formulation.NOMINAL_PRIMAL:
        return build_nominal(mp)[0]
    if tag is Formulation.NOMINAL_DUAL:
        return build_nominal(mp)[1]
    if tag is Formulation.NOISE_DUAL:
        return build_noise_dual(mp)
    if tag is Formulation.PRIORITY_TRACE:
        return build_priority_trace(mp)
    if tag is Formulation.PRIORITY_PSD:
        return build_priority_psd(mp)[0]
    return build_canonical_robust(build_nominal(mp)[0], mp.eps)


# ---------------------------------------------------------------------------
# report records


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (Status, Formulation)):
        return obj.value
    return obj


def record(stage: str, run: str, **payload) -> dict:
    return _clean({"schema": SCHEMA, "run": run, "stage": stage, **payload})


def dumps_record(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, allow_nan=False)


def _stage(name: str):
    """Decorator-free helper: ``with _stage("solve"):`` relabels errors."""

    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, et, exc, tb):
            if exc is not None and not isinstance(exc, click.ClickException) and isinstance(exc, Exception):
                raise StageError(name, exc) from exc
            return False

    return _Ctx()


def run_solve(man: RunManifest, verbose: bool = False) -> Iterator[dict]:
    """relax -> solve -> extract -> certify (and the rank-one check when it applies)."""
    t0 = time.perf_counter()
    with _stage("relax"):
        mp = resolve_problem(man)
        sdp = build_instance(mp, man.formulation)
    run = man.label or f"{Path(man.problem).stem}-{man.formulation}-j{mp.order}"
    yield record("manifest", run, command="solve", manifest=man.to_dict())
    t1 = time.perf_counter()
    yield record(
        "relax", run, formulation=sdp.tag, order=mp.order, n=mp.n, eps=mp.eps, eta=mp.eta,
        block_sizes=list(sdp.block_sizes), m=sdp.m, timing={"seconds": t1 - t0},
    )
    with _stage("solve"):
        res = solve(sdp, man.solver_config(verbose))
        eps_hat, eta_hat = achieved_noise_level(res, sdp)
    t2 = time.perf_counter()
    yield record(
        "solve", run, status=res.status, primal_value=res.primal_value, dual_value=res.dual_value,
        bound=res.dual_value, r_p=res.r_p, r_d=res.r_d, gap=res.gap, iterations=res.iterations,
        achieved_noise={"eps": eps_hat, "eta": eta_hat}, timing={"seconds": t2 - t1},
    )
    if res.status is not Status.OPTIMAL:
        return
    with _stage("extract"):
        y = moment_sequence_from_solution(sdp, res.y, mp.n, mp.order)
        ext = extract_minimizers(y, mp, man.extraction_config(), seed=man.seed, bound=res.dual_value)
    t3 = time.perf_counter()
    certs = ext.certificates
    yield record(
        "extract", run, **ext.to_dict(), trusted=ext.trusted,
        certified=bool(certs) and all(c.passed for c in certs), timing={"seconds": t3 - t2},
    )
    tag = FORMULATIONS[man.formulation]
    if tag in (Formulation.PRIORITY_TRACE, Formulation.PRIORITY_PSD):
        with _stage("rank_one"):
            rep = rank_one_equivalence_check(y, mp, tag, res.value, man.epsilon_star, man.extraction_config())
        yield record("rank_one", run, **rep.to_dict())


def _write(records, out: str | None) -> list[dict]:
    recs = []
    stream = open(out, "w") if out else sys.stdout
    try:
        for rec in records:
            recs.append(rec)
            stream.write(dumps_record(rec) + "\n")
            stream.flush()
    finally:
        if out:
            stream.close()
    return recs


# ---------------------------------------------------------------------------
# reproduction bundles

MOTZKIN_EPS = "1e-8"


def reproduce_motzkin(base: RunManifest, verbose: bool = False) -> Iterator[dict]:
    """Nominal order 3 (divergent), priority-psd order 8, and the perturbed nominal order 8."""
    yield from run_solve(replace(base, problem="motzkin", formulation="nominal-dual", order=3,
                                 eps=None, eta=None, label="motzkin-nominal-j3"), verbose)
    yield from run_solve(replace(base, problem="motzkin", formulation="priority-psd", order=8,
                                 eps=MOTZKIN_EPS, eta=None, label="motzkin-priority-psd-j8"), verbose)
    # the even-square perturbation is materialized as a problem of its own
    run = "motzkin-perturbed-nominal-j8"
    t0 = time.perf_counter()
    fp = even_square_perturbation(motzkin(), [], 8, Fraction(MOTZKIN_EPS))
    mp = MomentProblem(fp, order=8)
    sdp = build_nominal(mp)[1]
    res = solve(sdp, base.solver_config(verbose))
    yield record("manifest", run, command="reproduce", manifest=replace(
        base, problem="motzkin", formulation="nominal-dual", order=8, label=run).to_dict(),
        perturbation={"kind": "even-square", "theta": MOTZKIN_EPS})
    yield record("solve", run, status=res.status, primal_value=res.primal_value,
                 dual_value=res.dual_value, bound=res.dual_value, r_p=res.r_p, r_d=res.r_d,
                 gap=res.gap, iterations=res.iterations, timing={"seconds": time.perf_counter() - t0})
    if res.status is Status.OPTIMAL:
        y = moment_sequence_from_solution(sdp, res.y, 2, 8)
        ext = extract_minimizers(y, mp, base.extraction_config(), seed=base.seed, bound=res.dual_value)
        yield record("extract", run, **ext.to_dict(), trusted=ext.trusted)


UNIVARIATE_GAMMAS = ("0", "1/1000")
UNIVARIATE_EPS = ("1e-7", "1e-30")


def reproduce_univariate(base: RunManifest, verbose: bool = False) -> Iterator[dict]:
    """Exact minima table of the perturbed univariate problem, then double-precision solves."""
    for gamma in UNIVARIATE_GAMMAS:
        for eps in UNIVARIATE_EPS:
            t0 = time.perf_counter()
            mins = perturbed_minima(Fraction(gamma), Fraction(eps), order=5)
            yield record(
                "exact_minima", f"univariate-g{gamma}-e{eps}", gamma=gamma, eps=eps, order=5,
                minima=[m.to_dict() for m in mins],
                digits=[{"x": f"{float(m.endpoint):.4g}", "value": f"{float(m.value):.4g}"} for m in mins],
                timing={"seconds": time.perf_counter() - t0},
            )
    for gamma in UNIVARIATE_GAMMAS:
        for j in range(2, 6):
            yield from run_solve(replace(
                base, problem="univariate", gamma=gamma, formulation="priority-psd", order=j,
                eps=UNIVARIATE_EPS[0], eta=None, label=f"univariate-g{gamma}-psd-j{j}"), verbose)


# ---------------------------------------------------------------------------
# click wiring


def _check_radius(ctx, param, value):
    if value is None:
        return None
    try:
        r = to_fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"not a number: {value!r}") from exc
    if r < 0:
        raise click.BadParameter("must be nonnegative")
    return value


def _solver_options(f):
    opts = [
        click.option("--epsilon-star", type=click.FloatRange(0, 1, min_open=True, max_open=True),
                     default=SolverConfig.epsilon_star, show_default=True, help="Solver stopping tolerance."),
        click.option("--lambda-star", type=click.FloatRange(0, min_open=True),
                     default=SolverConfig.lambda_star, show_default=True, help="Initial point scale."),
        click.option("--beta-bar", type=click.FloatRange(0, 1, min_open=True, max_open=True),
                     default=SolverConfig.beta_bar, show_default=True, help="Centering parameter while infeasible."),
        click.option("--max-iter", type=click.IntRange(1), default=SolverConfig.max_iter, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True, help="Seed for extraction."),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report file (default stdout)."),
        click.option("-v", "--verbose", is_flag=True, help="Print the solver trace to stderr."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _problem_options(f):
    opts = [
        click.argument("problem"),
        click.option("--order", type=click.IntRange(0), default=None, help="Relaxation order j."),
        click.option("--eps", callback=_check_radius, default=None, help="Coefficient noise radius."),
        click.option("--eta", callback=_check_radius, default=None, help="Cone noise radius."),
        click.option("--gamma", default="0", show_default=True, help="Parameter of the univariate builtin."),
        click.option("--formulation", type=click.Choice(list(FORMULATIONS)), default="nominal-primal",
                     show_default=True),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


@click.group(context_settings={"help_option_names": ["-h", "--help"], "show_default": True})
@click.version_option(package_name="artifact", message="%(version)s")
def main():
    """Moment-SOS relaxations with noise models, solved by a built-in interior-point method.

    PROBLEM is a JSON problem file or one of the builtins: motzkin, univariate.
    """


@main.command()
@_problem_options
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="SDPA file (default stdout).")
def relax(problem, order, eps, eta, gamma, formulation, out):
    """Write the SDPA sparse file of a formulation."""
    man = RunManifest(problem=problem, formulation=formulation, order=order, eps=eps, eta=eta, gamma=gamma)
    with _stage("relax"):
        sdp = build_instance(resolve_problem(man), formulation)
        text = dumps_sdpa(sdp)
    if out is None:
        click.echo(text, nl=False)
        return
    Path(out).write_text(text)
    click.echo(dumps_record(record(
        "relax", man.label or formulation, manifest=man.to_dict(), formulation=sdp.tag,
        block_sizes=list(sdp.block_sizes), m=sdp.m, file=out,
    )))


@main.command("solve")
@_problem_options
@_solver_options
def solve_cmd(problem, order, eps, eta, gamma, formulation, epsilon_star, lambda_star, beta_bar,
              max_iter, seed, out, verbose):
    """Solve a relaxation, then extract and certify its minimizers."""
    man = RunManifest(problem=problem, formulation=formulation, order=order, eps=eps, eta=eta,
                      gamma=gamma, epsilon_star=epsilon_star, lambda_star=lambda_star,
                      beta_bar=beta_bar, max_iter=max_iter, seed=seed, out=out)
    _write(run_solve(man, verbose), out)


@main.command()
@click.argument("name", type=click.Choice(["motzkin", "univariate"]))
@_solver_options
def reproduce(name, epsilon_star, lambda_star, beta_bar, max_iter, seed, out, verbose):
    """Run the Motzkin or univariate experiment bundle."""
    base = RunManifest(problem=name, epsilon_star=epsilon_star, lambda_star=lambda_star,
                       beta_bar=beta_bar, max_iter=max_iter, seed=seed, out=out)
    bundle = reproduce_motzkin if name == "motzkin" else reproduce_univariate
    _write(bundle(base, verbose), out)


@main.command()
@click.argument("report", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def rerun(report, out):
    """Repeat the first solve run echoed in REPORT."""
    for line in Path(report).read_text().splitlines():
        rec = json.loads(line)
        if rec.get("stage") == "manifest" and rec.get("command") == "solve":
            if rec.get("schema") != SCHEMA:
                raise click.ClickException(f"unsupported report schema {rec.get('schema')!r}")
            man = replace(RunManifest.from_dict(rec["manifest"]), out=out)
            _write(run_solve(man), out)
            return
    raise click.ClickException("no solve manifest found in the report")


def cli_main() -> None:
    main(auto_envvar_prefix="ROBUSTPOP")


if __name__ == "__main__":
    cli_main()
