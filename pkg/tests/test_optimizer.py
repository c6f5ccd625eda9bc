import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmcontrol import objective, optimizer
from pmcontrol.basis import ConstraintSet
from pmcontrol.dynamics import EnsembleModel, task_rng
from pmcontrol.optimizer import OptimizationSpec

MHZ = 2 * math.pi * 1e6
T = 100e-9
CONS = ConstraintSet.for_horizon(T, 10 * MHZ)


def quadratic(x):
    return float(np.sum((np.asarray(x) - 0.3) ** 2))


def test_convex_quadratic_converges():
    rng = np.random.default_rng(0)
    x0 = rng.uniform(-1, 1, 3)
    rec = optimizer.nelder_mead(quadratic, x0, ([-1] * 3, [1] * 3), budget=600)
    assert rec.best_value < 1e-8
    assert rec.n_f <= 600


def test_budget_is_exact_upper_bound():
    rec = optimizer.nelder_mead(quadratic, [0.9, -0.9, 0.5], ([-1] * 3, [1] * 3), budget=10)
    assert rec.n_f == 10
    assert not rec.converged


def test_clipping_keeps_iterates_in_box():
    seen = []

    def f(x):
        seen.append(float(x[0]))
        return float(x[0])

    rec = optimizer.nelder_mead(f, [0.7], ([0.0], [1.0]), budget=200)
    assert abs(rec.best_x[0]) < 1e-6
    assert min(seen) >= 0.0


def test_start_outside_bounds_raises():
    with pytest.raises(ValueError):
        optimizer.nelder_mead(quadratic, [2.0], ([0.0], [1.0]), budget=10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 80))
def test_trace_monotone_and_budget_respected(seed, budget):
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-1, 1, 2)

    def f(x):
        return float(np.sum(np.sin(3 * (x - shift)) ** 2 + 0.1 * x * x))

    rec = optimizer.nelder_mead(f, rng.uniform(-2, 2, 2), ([-2, -2], [2, 2]), budget)
    values = [v for _, v in rec.trace]
    assert rec.n_f <= budget
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert rec.trace[-1][1] == rec.best_value


def test_random_start_examples():
    lo, hi = np.array([0.0, 2.0, -1.0]), np.array([1.0, 2.0, 1.0])
    x = optimizer.random_start((lo, hi), 3)
    assert x[1] == 2.0
    assert np.array_equal(x, optimizer.random_start((lo, hi), 3))
    rng = np.random.default_rng(9)
    pts = np.array([optimizer.random_start((lo, hi), rng) for _ in range(10_000)])
    assert np.all(pts >= lo) and np.all(pts <= hi)


def _pm_spec(**kw):
    spec = objective.state_spec(EnsembleModel.from_fwhm(10 * MHZ), T, CONS)
    return OptimizationSpec(spec, "pm", 1, **kw)


def test_default_budget_is_200_per_free_parameter():
    assert _pm_spec(n_starts=1).budget == 600
    sfb = OptimizationSpec(objective.state_spec(EnsembleModel.from_fwhm(10 * MHZ), T, CONS),
                           "sfb_p2", 5, n_starts=1)
    assert sfb.budget == 4000
    assert _pm_spec(n_starts=1, randomize_freqs=True).budget == 400


def test_single_start_reduces_to_nelder_mead():
    spec = _pm_spec(n_starts=1, budget=60, seed=4)
    runset = optimizer.multi_start(spec)
    again = optimizer.run_start(spec, 0)
    assert runset.best.best_value == again.best_value
    assert np.array_equal(runset.best.best_x, again.best_x)
    assert runset.best.n_f <= 60


def test_multi_start_is_deterministic_and_ranked():
    spec = _pm_spec(n_starts=4, budget=40, seed=2)
    a = optimizer.multi_start(spec)
    b = optimizer.multi_start(spec)
    assert [r.best_value for r in a.runs] == [r.best_value for r in b.runs]
    keys = [(r.best_value, r.index) for r in a.runs]
    assert keys == sorted(keys)
    assert a.mean_nf == pytest.approx(np.mean([r.n_f for r in a.runs]))


def test_multi_start_worker_count_does_not_change_results():
    spec = _pm_spec(n_starts=3, budget=30, seed=5)
    serial = optimizer.multi_start(spec)
    spec.workers = 2
    parallel = optimizer.multi_start(spec)
    for r, s in zip(serial.runs, parallel.runs):
        assert r.best_value == s.best_value and np.array_equal(r.best_x, s.best_x)


def test_randomized_variant_freezes_frequencies():
    spec = _pm_spec(n_starts=3, budget=50, seed=1, randomize_freqs=True)
    for run in optimizer.multi_start(spec).runs:
        assert run.best_x[2] == run.start[2]


def test_quadratic_multistart_all_reach_optimum():
    # unimodal landscape: every start finds the same minimum
    lo, hi = np.full(3, -1.0), np.full(3, 1.0)
    values = []
    for i in range(20):
        x0 = optimizer.random_start((lo, hi), task_rng(0, i))
        values.append(optimizer.nelder_mead(quadratic, x0, (lo, hi), 600).best_value)
    assert max(values) - min(values) < 1e-6


def test_write_runset(tmp_path):
    spec = _pm_spec(n_starts=2, budget=20, seed=0)
    paths = optimizer.write_runset(optimizer.multi_start(spec), tmp_path)
    doc = json.loads(paths["runs_json"].read_text())
    assert doc["spec"]["budget"] == 20 and len(doc["runs"]) == 2
    rows = list(csv.reader(paths["ranked_csv"].open()))
    assert rows[0] == ["rank", "start_index", "objective", "infidelity", "n_f"]
    assert len(rows) == 3
    assert b"\r\n" not in paths["trace_csv"].read_bytes()


def test_spec_validation():
    with pytest.raises(ValueError):
        _pm_spec(n_starts=0)
    with pytest.raises(ValueError):
        _pm_spec(budget=0)
    with pytest.raises(ValueError):
        _pm_spec(bounds=(np.zeros(2), np.ones(2)))
