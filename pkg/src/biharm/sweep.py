"""One-parameter sweeps over catalog families with root refinement."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import bisect

from .biharmonic import Tolerances, biharmonic_residual, classify
from .catalog import ExampleSpec, InvalidExample, make_example
from .hypersurface import DEFAULT_ORDER, evaluate, sample_points

SWEEP_COLUMNS = ("param", "H", "A_norm_sq", "Scal", "normal_res", "tangent_res_norm", "verdict")
TARGETS = ("normal_res", "H")


def num_threads() -> int:
    """Worker count from ``BIHARM_NUM_THREADS`` (0 or unset means automatic)."""
    raw = os.environ.get("BIHARM_NUM_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("BIHARM_NUM_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass
class SweepRow:
    param: float
    H: float
    A_norm_sq: float
    Scal: float
    normal_res: float
    tangent_res_norm: float
    verdict: str

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in SWEEP_COLUMNS}


@dataclass
class SweepResult:
    param: str
    target: str
    rows: list[SweepRow]
    brackets: list[tuple[float, float]] = field(default_factory=list)
    roots: list[float] = field(default_factory=list)


def _with_param(spec: ExampleSpec, name: str, value: float) -> ExampleSpec:
    return replace(spec, params={**spec.params, name: float(value)})


class _Probe:
    """Evaluates one parameter value on a fixed sample design."""

    def __init__(self, spec, param, samples, seed, order, tol):
        self.spec, self.param = spec, param
        self.samples, self.seed, self.order, self.tol = samples, seed, order, tol

    def evaluation(self, value: float):
        im = make_example(_with_param(self.spec, self.param, value), self.order)
        return evaluate(im, sample_points(im, self.samples, self.seed))

    def row(self, value: float) -> SweepRow:
        ev = self.evaluation(value)
        res = biharmonic_residual(ev)
        verdict = classify(ev, tolerances=self.tol).verdict
        return SweepRow(
            float(value),
            float(np.mean(ev.fundamental.H)),
            float(np.mean(ev.fundamental.A_norm_sq)),
            float(np.mean(ev.intrinsic.scal)),
            float(np.mean(res.normal_res)),
            float(np.max(res.tangent_norm)),
            verdict,
        )

    def target(self, value: float, which: str) -> float:
        ev = self.evaluation(value)
        if which == "H":
            return float(np.mean(ev.fundamental.H))
        return float(np.mean(biharmonic_residual(ev).normal_res))


def sweep(
    spec: ExampleSpec,
    param: str,
    lo: float,
    hi: float,
    steps: int,
    refine: bool = False,
    target: str = "normal_res",
    samples: int = 50,
    seed: int = 42,
    order: int = DEFAULT_ORDER,
    tolerances: Tolerances = Tolerances(),
    xtol: float = 1e-12,
) -> SweepResult:
    """Tabulate invariants on ``linspace(lo, hi, steps)`` and bracket sign
    changes of ``target`` (the mean normal residual, or the mean ``H``).

    With ``refine`` each bracket is narrowed by bisection to ``xtol``.
    """
    if not lo < hi:
        raise InvalidExample("sweep requires lo < hi")
    if steps < 2:
        raise InvalidExample("sweep requires at least 2 steps")
    if target not in TARGETS:
        raise InvalidExample(f"unknown sweep target {target!r}")
    probe = _Probe(spec, param, samples, seed, order, tolerances)
    grid = np.linspace(lo, hi, steps)
    workers = min(num_threads(), steps)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(probe.row, grid))
    else:
        rows = [probe.row(v) for v in grid]

    vals = np.array([r.H if target == "H" else r.normal_res for r in rows])
    brackets, roots = [], []
    for i in range(steps - 1):
        a, b = grid[i], grid[i + 1]
        if vals[i] == 0.0:
            brackets.append((float(a), float(a)))
        elif vals[i] * vals[i + 1] < 0:
            brackets.append((float(a), float(b)))
    if vals[-1] == 0.0:
        brackets.append((float(grid[-1]), float(grid[-1])))
    if refine:
        for a, b in brackets:
            if a == b:
                roots.append(a)
            else:
                roots.append(float(bisect(probe.target, a, b, args=(target,), xtol=xtol)))
    return SweepResult(param, target, rows, brackets, roots)
