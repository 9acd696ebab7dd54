"""JSON problem and result files.

Problem file (``"kind": "sr-problem"``)::

    {
      "format": 1,
      "kind": "sr-problem",
      "dimension": 2,
      "norm_p": 2.0,                 # number >= 1, or the string "inf"
      "sensors": [[8.0, 6.0], ...],  # n rows of length `dimension`
      "times": [10.0, ...],          # n arrival times
      "initial_ball": {"center": [0.0, 0.0], "radius": 32.0},
      "ground_truth": {"source": [0.0, 0.0], "t0": 0.0}    # optional
    }

Result file (``"kind": "sr-result"``)::

    {
      "format": 1,
      "kind": "sr-result",
      "solver": "rcd" | "noisy",
      "status": "converged" | "level-cap" | "ball-cap",
      "approx": [...], "emission_time": ..., "delta": ...,
      "defect": "D", "gamma": null | number,
      "final_diameter": ..., "halt_level": k,
      "levels": [{"k": 0, "radius": ..., "count": ..., "min_defect": ..., "max_defect": ...}, ...],
      "truth_distance": null | number,
      "wall_time_s": null | number
    }

Floats are written with ``repr`` precision, so reading a file back gives
bit-identical values.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from .cover import Ball
from .exceptions import InvalidInputError
from .geometry import NormSpec
from .problem import GroundTruth, SRProblem
from .solver import SolveResult

FORMAT_VERSION = 1

__all__ = [
    "FORMAT_VERSION",
    "ProblemFile",
    "problem_to_dict",
    "problem_from_dict",
    "result_to_dict",
    "load_problem",
    "save_problem",
    "dump_json",
]


@dataclass(frozen=True)
class ProblemFile:
    problem: SRProblem
    truth: Optional[GroundTruth] = None


def _p_out(p: float):
    return "inf" if math.isinf(p) else float(p)


def _floats(a) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).reshape(-1)]


def problem_to_dict(problem: SRProblem, truth: Optional[GroundTruth] = None) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "format": FORMAT_VERSION,
        "kind": "sr-problem",
        "dimension": problem.m,
        "norm_p": _p_out(problem.norm.p),
        "sensors": [_floats(r) for r in problem.sensors],
        "times": _floats(problem.times),
    }
    if problem.initial_ball is not None:
        out["initial_ball"] = {
            "center": _floats(problem.initial_ball.center),
            "radius": float(problem.initial_ball.radius),
        }
    if truth is not None:
        out["ground_truth"] = {"source": _floats(truth.source), "t0": float(truth.emission_time)}
    return out


def _require(d: Dict[str, Any], key: str):
    if key not in d:
        raise InvalidInputError(f"problem file is missing the field {key!r}")
    return d[key]


def problem_from_dict(d: Dict[str, Any]) -> ProblemFile:
    if not isinstance(d, dict):
        raise InvalidInputError("problem file must hold a JSON object")
    if d.get("format") != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported problem file format {d.get('format')!r}")
    if d.get("kind", "sr-problem") != "sr-problem":
        raise InvalidInputError(f"expected an sr-problem file, got kind {d.get('kind')!r}")
    try:
        m = int(_require(d, "dimension"))
        norm = NormSpec(_require(d, "norm_p"), m)
        sensors = np.array(_require(d, "sensors"), dtype=float).reshape(-1, m)
        ball = None
        if d.get("initial_ball") is not None:
            ball = Ball(d["initial_ball"]["center"], d["initial_ball"]["radius"])
        problem = SRProblem(sensors, _require(d, "times"), norm, ball)
        truth = None
        if d.get("ground_truth") is not None:
            truth = GroundTruth(d["ground_truth"]["source"], d["ground_truth"].get("t0", 0.0))
            if truth.source.shape[0] != m:
                raise InvalidInputError("ground-truth source has the wrong dimension")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"malformed problem file: {exc}") from exc
    return ProblemFile(problem, truth)


def result_to_dict(
    result: SolveResult,
    *,
    solver: str = "rcd",
    defect: str = "D",
    gamma: Optional[float] = None,
    truth: Optional[GroundTruth] = None,
    norm: Optional[NormSpec] = None,
    wall_time: Optional[float] = None,
) -> Dict[str, Any]:
    dist = None
    if truth is not None and norm is not None:
        dist = float(norm.row_norms((result.approx - truth.source)[None, :])[0])
    return {
        "format": FORMAT_VERSION,
        "kind": "sr-result",
        "solver": solver,
        "status": result.status.value,
        "approx": _floats(result.approx),
        "emission_time": float(result.emission_time),
        "delta": float(result.delta),
        "defect": defect,
        "gamma": None if gamma is None else float(gamma),
        "final_diameter": float(result.diameter),
        "halt_level": int(result.halt_level),
        "levels": [
            {
                "k": s.level,
                "radius": s.radius,
                "count": s.count,
                "min_defect": s.min_defect,
                "max_defect": s.max_defect,
            }
            for s in result.levels
        ],
        "truth_distance": dist,
        "wall_time_s": None if wall_time is None else float(wall_time),
    }


def dump_json(obj: Dict[str, Any], path: os.PathLike | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def save_problem(path, problem: SRProblem, truth: Optional[GroundTruth] = None) -> None:
    dump_json(problem_to_dict(problem, truth), path)


def load_problem(path) -> ProblemFile:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not valid JSON ({exc})") from exc
    return problem_from_dict(data)
