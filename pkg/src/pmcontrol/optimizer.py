"""Bounded Nelder-Mead and the multi-start harness around it.

Multi-start runs work in the unit box: each start maps its free coordinates
to ``[0, 1]`` so that the simplex size and the termination diameter are
comparable across amplitudes (rad/s), frequencies (rad/s) and phases (rad).
"""

from __future__ import annotations

import csv
import json
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import __version__
from .basis import ControlField, Family, as_family, parameter_bounds, randomized_mask
from .dynamics import task_rng
from .objective import FieldObjective, ObjectiveSpec

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5
XTOL = 1e-9
INITIAL_STEP = 0.25
EVALS_PER_PARAM = 200


@dataclass
class RunRecord:
    start: np.ndarray
    best_x: np.ndarray
    best_value: float
    n_f: int
    trace: list = dc_field(default_factory=list)
    converged: bool = False
    index: int = 0


class _BudgetExhausted(Exception):
    pass


class _Counted:
    def __init__(self, f, budget):
        self.f = f
        self.budget = budget
        self.n_f = 0
        self.best_value = np.inf
        self.best_x = None
        self.trace = []

    def __call__(self, x):
        if self.n_f >= self.budget:
            raise _BudgetExhausted
        value = float(self.f(x))
        self.n_f += 1
        if value < self.best_value:
            self.best_value = value
            self.best_x = np.array(x, dtype=float)
            self.trace.append((self.n_f, value))
        return value


def nelder_mead(f, x0, bounds, budget, xtol=XTOL, initial_step=INITIAL_STEP) -> RunRecord:
    """Minimize ``f`` inside a box with the standard simplex method.

    Trial points (reflection, expansion, contraction) are clipped to the box.
    Stops after ``budget`` evaluations or once every vertex lies within
    ``xtol`` (max-norm) of the best one. ``initial_step`` is the edge of the
    starting simplex as a fraction of each coordinate's box width.
    """
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != lo.shape or np.any(lo > hi):
        raise ValueError("bounds must match x0 and satisfy lo <= hi")
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise ValueError("starting point lies outside the bounds")
    if budget < 1:
        raise ValueError("budget must be at least 1")

    def clip(x):
        return np.minimum(np.maximum(x, lo), hi)

    fc = _Counted(f, budget)
    n = x0.size
    converged = False
    try:
        sim = [x0.copy()]
        fsim = [fc(x0)]
        for i in range(n):
            v = x0.copy()
            step = initial_step * (hi[i] - lo[i])
            v[i] = v[i] + step if v[i] + step <= hi[i] else v[i] - step
            sim.append(clip(v))
            fsim.append(fc(sim[-1]))
        sim = np.array(sim)
        fsim = np.array(fsim)
        while True:
            order = np.argsort(fsim, kind="stable")
            sim, fsim = sim[order], fsim[order]
            if np.max(np.abs(sim[1:] - sim[0])) < xtol:
                converged = True
                break
            xbar = sim[:-1].mean(axis=0)
            worst = sim[-1]
            xr = clip(xbar + REFLECT * (xbar - worst))
            fr = fc(xr)
            if fr < fsim[0]:
                xe = clip(xbar + REFLECT * EXPAND * (xbar - worst))
                fe = fc(xe)
                if fe < fr:
                    sim[-1], fsim[-1] = xe, fe
                else:
                    sim[-1], fsim[-1] = xr, fr
                continue
            if fr < fsim[-2]:
                sim[-1], fsim[-1] = xr, fr
                continue
            if fr < fsim[-1]:
                xc = clip(xbar + CONTRACT * REFLECT * (xbar - worst))
                fcv = fc(xc)
                if fcv <= fr:
                    sim[-1], fsim[-1] = xc, fcv
                    continue
            else:
                xcc = xbar - CONTRACT * (xbar - worst)
                fcc = fc(xcc)
                if fcc < fsim[-1]:
                    sim[-1], fsim[-1] = xcc, fcc
                    continue
            for j in range(1, n + 1):
                sim[j] = sim[0] + SHRINK * (sim[j] - sim[0])
                fsim[j] = fc(sim[j])
    except _BudgetExhausted:
        pass
    return RunRecord(x0, fc.best_x, fc.best_value, fc.n_f, fc.trace, converged)


def random_start(bounds, seed):
    """Uniform point in the box; ``seed`` may be an int or a Generator."""
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    rng = seed if isinstance(seed, np.random.Generator) else task_rng(seed)
    return lo + (hi - lo) * rng.random(lo.shape)


# -- multi-start -------------------------------------------------------------

@dataclass
class OptimizationSpec:
    objective: ObjectiveSpec
    family: Family
    N: int
    n_starts: int = 120
    budget: int | None = None
    seed: int = 0
    randomize_freqs: bool = False
    bounds: tuple | None = None
    xtol: float = XTOL
    initial_step: float = INITIAL_STEP
    workers: int = 1

    def __post_init__(self):
        self.family = as_family(self.family)
        if self.bounds is None:
            self.bounds = parameter_bounds(self.family, self.N, self.objective.constraints)
        lo, hi = (np.asarray(b, dtype=float) for b in self.bounds)
        if lo.size != self.n_params or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("bounds must be finite and match the parameter count")
        self.bounds = (lo, hi)
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")
        if self.budget is None:
            self.budget = EVALS_PER_PARAM * int(np.count_nonzero(self.free_mask))
        if self.budget < 1:
            raise ValueError("budget must be at least 1")

    @property
    def n_params(self) -> int:
        return self.N * self.family.block

    @property
    def free_mask(self):
        if self.randomize_freqs:
            return ~randomized_mask(self.family, self.N)
        return np.ones(self.n_params, dtype=bool)

    def template(self) -> ControlField:
        return ControlField(self.family, self.N, np.zeros(self.n_params), self.objective.T)

    def echo(self) -> dict:
        return {
            "family": self.family.value,
            "N": self.N,
            "n_params": self.n_params,
            "objective": self.objective.kind,
            "n_starts": self.n_starts,
            "budget": self.budget,
            "seed": self.seed,
            "randomize_freqs": self.randomize_freqs,
            "xtol": self.xtol,
            "initial_step": self.initial_step,
            "bounds_lo": self.bounds[0].tolist(),
            "bounds_hi": self.bounds[1].tolist(),
        }


class _UnitBoxObjective:
    def __init__(self, f, x_fixed, free, lo, hi):
        self.f, self.x_fixed, self.free = f, x_fixed, free
        self.lo, self.width = lo[free], (hi - lo)[free]

    def to_x(self, u):
        x = self.x_fixed.copy()
        x[self.free] = self.lo + self.width * np.asarray(u)
        return x

    def __call__(self, u):
        return self.f(self.to_x(u))


def run_start(spec: OptimizationSpec, index: int) -> RunRecord:
    """One Nelder-Mead run from the start drawn for (spec.seed, index)."""
    lo, hi = spec.bounds
    x0 = random_start(spec.bounds, task_rng(spec.seed, index))
    free = spec.free_mask
    f = FieldObjective(spec.objective, spec.template())
    wrapped = _UnitBoxObjective(f, x0, free, lo, hi)
    width = (hi - lo)[free]
    u0 = np.divide(x0[free] - lo[free], width, out=np.zeros(width.shape), where=width > 0)
    rec = nelder_mead(wrapped, u0, (np.zeros_like(u0), np.ones_like(u0)), spec.budget,
                      spec.xtol, spec.initial_step)
    return RunRecord(x0, wrapped.to_x(rec.best_x), rec.best_value, rec.n_f, rec.trace,
                     rec.converged, index)


def _run_start_job(args):
    return run_start(*args)


@dataclass
class RunSet:
    spec: OptimizationSpec
    runs: list

    @property
    def best(self) -> RunRecord:
        return self.runs[0]

    @property
    def best_field(self) -> ControlField:
        return self.spec.template().with_params(self.best.best_x)

    @property
    def values(self):
        return np.array([r.best_value for r in self.runs])

    @property
    def mean_nf(self) -> float:
        return float(np.mean([r.n_f for r in self.runs]))

    def fraction_within(self, tol) -> float:
        """Share of runs whose minimized value is within ``tol`` of the best run."""
        return float(np.mean(self.values - self.best.best_value <= tol))

    def rank_rows(self):
        return [(rank + 1, r.index, 1.0 - r.best_value, r.best_value, r.n_f)
                for rank, r in enumerate(self.runs)]

    def trace_rows(self):
        rows = []
        for rank, r in enumerate(self.runs):
            rows.extend((rank + 1, r.index, nf, v) for nf, v in r.trace)
        return rows

    def manifest(self) -> dict:
        return {
            "spec": self.spec.echo(),
            "runs": [
                {
                    "index": r.index,
                    "start": r.start.tolist(),
                    "best_params": r.best_x.tolist(),
                    "best_value": r.best_value,
                    "n_f": r.n_f,
                    "converged": r.converged,
                }
                for r in self.runs
            ],
            "summary": {"best_value": self.best.best_value, "mean_nf": self.mean_nf},
            "environment": environment_stamp(),
        }


def environment_stamp() -> dict:
    import scipy

    return {
        "pmcontrol": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
    }


def multi_start(spec: OptimizationSpec) -> RunSet:
    """Run every start and rank the records by (best value, start index)."""
    jobs = [(spec, i) for i in range(spec.n_starts)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            runs = list(pool.map(_run_start_job, jobs))
    else:
        runs = [run_start(spec, i) for i in range(spec.n_starts)]
    runs.sort(key=lambda r: (r.best_value, r.index))
    return RunSet(spec, runs)


def write_runset(runset: RunSet, directory, prefix="") -> dict:
    """Write runs JSON, ranked-run CSV and trace CSV; returns {kind: path}."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "runs_json": directory / f"{prefix}runs.json",
        "ranked_csv": directory / f"{prefix}ranked_runs.csv",
        "trace_csv": directory / f"{prefix}trace.csv",
    }
    paths["runs_json"].write_text(json.dumps(runset.manifest(), indent=2) + "\n", encoding="utf-8")
    write_csv(paths["ranked_csv"], ["rank", "start_index", "objective", "infidelity", "n_f"],
              runset.rank_rows())
    write_csv(paths["trace_csv"], ["rank", "start_index", "n_f", "best_value"], runset.trace_rows())
    return paths


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
