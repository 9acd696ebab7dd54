"""Command line front end: ``rcd gen | solve | oracle | gm``.

Exit codes: 0 success, 1 invalid input, 2 resource cap (solver cap status
or oracle grid too large).
"""

from __future__ import annotations

import csv
import json
import sys
import time
from typing import Optional

import click
import numpy as np

from .analysis import GradConfig, GridOracleConfig, grid_argmin_defect, gradient_descent_D2
from .cover import Ball
from .exceptions import CapacityError, SoundRangingError
from .geometry import NormSpec
from .instances import example1, example2, random_unique_layout, sample_in_ball
from .io import dump_json, load_problem, result_to_dict, save_problem
from .problem import DefectKind, GroundTruth, SRProblem, defect_values, forward_simulate
from .solver import NoisyConfig, SolverConfig, Status, noisy_solve, rcd_solve

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 1, 2


def _vector(text: str, name: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(";", ",").split(",") if v.strip()])
    except ValueError:
        raise click.BadParameter(f"cannot parse {text!r} as comma-separated numbers", param_hint=name)


def _points(text: str, m: int) -> np.ndarray:
    rows = [r for r in text.split(";") if r.strip()]
    pts = np.array([_vector(r, "--sensors") for r in rows])
    if pts.ndim != 2 or pts.shape[1] != m:
        raise click.BadParameter(f"expected ';'-separated points of dimension {m}", param_hint="--sensors")
    return pts


def _say(ctx: click.Context, msg: str) -> None:
    if not ctx.obj.get("quiet"):
        click.echo(msg)


@click.group()
@click.option("--threads", type=click.IntRange(min=1), default=1, envvar="RCD_THREADS",
              show_default=True, help="Worker threads for defect evaluation (env RCD_THREADS).")
@click.option("--quiet", is_flag=True, help="Suppress informational output.")
@click.pass_context
def cli(ctx, threads, quiet):
    """Locate a sound source from arrival times by refining covers."""
    ctx.ensure_object(dict)
    ctx.obj.update(threads=threads, quiet=quiet)


@cli.command()
@click.option("--dimension", "-m", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--p", "p", default="2", show_default=True, help="Norm exponent, number >= 1 or 'inf'.")
@click.option("--layout", type=click.Choice(["unique", "custom"]), default="unique", show_default=True)
@click.option("--sensors", default=None, help="Custom layout: 'x1,y1;x2,y2;...'.")
@click.option("--source", default=None, help="Source point 'x,y,...' (default: random in the ball).")
@click.option("--t0", type=float, default=0.0, show_default=True, help="Emission time.")
@click.option("--center", default=None, help="Initial ball center (default: origin).")
@click.option("--radius", type=float, default=1.0, show_default=True, help="Initial ball radius.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--preset", type=click.Choice(["example1", "example2"]), default=None,
              help="Published five-sensor instances (Euclidean plane, source at the origin).")
@click.option("--blind", is_flag=True, help="Omit the ground truth from the file.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
@click.pass_context
def gen(ctx, dimension, p, layout, sensors, source, t0, center, radius, seed, preset, blind, out_path):
    """Write a problem file with times simulated from a known source."""
    if preset is not None:
        inst = example1() if preset == "example1" else example2()
        problem, truth = inst.problem, inst.truth
    else:
        norm = NormSpec(p, dimension)
        m = dimension
        c0 = np.zeros(m) if center is None else _vector(center, "--center")
        ball = Ball(c0, radius)
        rng = np.random.default_rng(seed)
        if layout == "custom":
            if sensors is None:
                raise click.BadParameter("--layout custom needs --sensors", param_hint="--sensors")
            S = _points(sensors, m)
        else:
            S = random_unique_layout(rng, m, c0, radius, norm)
        s = sample_in_ball(rng, ball, norm)[0] if source is None else _vector(source, "--source")
        truth = GroundTruth(s, t0)
        problem = SRProblem(S, forward_simulate(truth, S, norm), norm, ball)
    save_problem(out_path, problem, None if blind else truth)
    _say(ctx, f"wrote {out_path}: m={problem.m}, n={problem.n} sensors, p={problem.norm.p_label}")


@cli.command()
@click.argument("problem_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--delta", type=float, default=1e-3, show_default=True, help="Target precision.")
@click.option("--defect", type=click.Choice(["D", "D1", "D2", "DI"]), default="D", show_default=True)
@click.option("--gamma", type=float, default=None, help="Noise bound; > 0 switches to the noisy solver.")
@click.option("--max-level", type=click.IntRange(min=1), default=60, show_default=True)
@click.option("--ball-cap", type=click.IntRange(min=1), default=10**7, show_default=True)
@click.option("--no-timing", is_flag=True, help="Write wall_time_s as null (byte-stable output).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
@click.pass_context
def solve(ctx, problem_path, delta, defect, gamma, max_level, ball_cap, no_timing, out_path):
    """Approximate the source of a problem file to within DELTA."""
    pf = load_problem(problem_path)
    cfg = SolverConfig(delta=delta, defect_kind=DefectKind.parse(defect), max_level=max_level,
                       ball_cap=ball_cap, threads=ctx.obj["threads"])
    start = time.perf_counter()
    if gamma is not None and gamma > 0:
        result = noisy_solve(pf.problem, NoisyConfig(gamma=gamma, base=cfg))
        solver = "noisy"
    else:
        result = rcd_solve(pf.problem, cfg)
        solver = "rcd"
    elapsed = time.perf_counter() - start
    doc = result_to_dict(result, solver=solver, defect=cfg.defect_kind.value,
                         gamma=gamma if solver == "noisy" else None, truth=pf.truth,
                         norm=pf.problem.norm, wall_time=None if no_timing else elapsed)
    dump_json(doc, out_path)
    msg = f"{result.status.value} at level {result.halt_level}: approx={list(map(float, result.approx))}"
    if doc["truth_distance"] is not None:
        msg += f", distance to truth {doc['truth_distance']:.3g}"
    _say(ctx, msg)
    ctx.exit(EXIT_OK if result.status is Status.CONVERGED else EXIT_CAP)


@cli.command()
@click.argument("problem_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--step", type=float, required=True, help="Grid spacing.")
@click.option("--bounds-center", default=None, help="Search ball center (default: initial ball).")
@click.option("--bounds-radius", type=float, default=None, help="Search ball radius (default: initial ball).")
@click.option("--defect", type=click.Choice(["D", "D1", "D2", "DI"]), default="D", show_default=True)
@click.pass_context
def oracle(ctx, problem_path, step, bounds_center, bounds_radius, defect):
    """Brute-force grid minimum of the defect."""
    pf = load_problem(problem_path)
    problem = pf.problem
    base = problem.initial_ball
    if base is None and (bounds_center is None or bounds_radius is None):
        raise click.BadParameter("problem has no initial ball; give --bounds-center and --bounds-radius")
    c = _vector(bounds_center, "--bounds-center") if bounds_center is not None else base.center
    r = bounds_radius if bounds_radius is not None else base.radius
    if problem.n == 1:
        click.echo("warning: a single sensor makes the defect identically zero", err=True)
    res = grid_argmin_defect(problem, defect, GridOracleConfig(step, Ball(c, r), threads=ctx.obj["threads"]))
    report = {"argmin": [float(v) for v in res.point], "value": res.value, "evaluated": res.evaluated}
    if pf.truth is not None:
        report["truth_distance"] = float(problem.norm.row_norms((res.point - pf.truth.source)[None, :])[0])
    click.echo(json.dumps(report))


@cli.command()
@click.argument("problem_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--start", default=None, help="Start point 'x,y,...'.")
@click.option("--start-sensor", type=click.IntRange(min=1), default=None, help="Start at sensor i (1-based).")
@click.option("--max-iter", type=click.IntRange(min=0), default=100_000, show_default=True)
@click.option("--profile-points", type=click.IntRange(min=2), default=101, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False, writable=True),
              help="CSV file for the D2 profile along start -> endpoint.")
@click.pass_context
def gm(ctx, problem_path, start, start_sensor, max_iter, profile_points, out_path):
    """Steepest descent on the variance defect D2."""
    pf = load_problem(problem_path)
    problem = pf.problem
    if (start is None) == (start_sensor is None):
        raise click.BadParameter("give exactly one of --start and --start-sensor")
    if start_sensor is not None:
        if start_sensor > problem.n:
            raise click.BadParameter(f"there are only {problem.n} sensors", param_hint="--start-sensor")
        x0 = problem.sensors[start_sensor - 1]
    else:
        x0 = _vector(start, "--start")
    res = gradient_descent_D2(problem, GradConfig(start=x0, max_iter=max_iter))
    report = {
        "start": [float(v) for v in x0],
        "endpoint": [float(v) for v in res.point],
        "D2": res.value,
        "iterations": res.iterations,
        "converged": res.converged,
    }
    if pf.truth is not None:
        report["truth_distance"] = float(problem.norm.row_norms((res.point - pf.truth.source)[None, :])[0])
    if out_path is not None:
        s = np.linspace(0.0, 1.0, profile_points)
        X = x0 + s[:, None] * (res.point - x0)
        vals = defect_values(problem, DefectKind.D2, X)
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["s"] + [f"x{j + 1}" for j in range(problem.m)] + ["D2"])
            for si, xi, vi in zip(s, X, vals):
                w.writerow([repr(float(si))] + [repr(float(v)) for v in xi] + [repr(float(vi))])
        report["profile"] = out_path
    click.echo(json.dumps(report))


def main(argv: Optional[list] = None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="rcd", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_INVALID
    except click.Abort:
        return EXIT_INVALID
    except CapacityError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_CAP
    except (SoundRangingError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
