import itertools
import math

import numpy as np
import pytest

from mmreg.errors import DegeneratePeakError
from mmreg.evaluate import (
    ALGORITHM_NAMES,
    accuracy_sweep,
    error_statistics,
    make_registrar,
    time_registration,
)
from mmreg.grid import Displacement, Grid

from oracles import hand_population_stats


def test_zero_errors():
    stats = error_statistics(np.zeros((5, 2)))
    assert stats["std_err_px"] == 0 and stats["mean_abs_err_px"] == 0 and stats["max_err_px"] == 0


def test_symmetric_errors():
    e = 0.3
    stats = error_statistics(np.array([[e, 0.0], [-e, 0.0]]))
    assert stats["mean_abs_err_px"] == pytest.approx(e)
    assert stats["mean_err_x_px"] == pytest.approx(0.0)


def test_hand_computed_statistics():
    errs = np.array([[0.1, 0.0], [0.0, 0.2], [0.3, 0.0]])
    stats = error_statistics(errs)
    mean, std = hand_population_stats([0.1, 0.2, 0.3])
    assert stats["mean_abs_err_px"] == pytest.approx(0.2, abs=1e-15)
    assert stats["std_err_px"] == pytest.approx(math.sqrt(1 / 150), abs=1e-15)
    assert stats["std_err_px"] == pytest.approx(std, abs=1e-15)
    assert stats["mean_abs_err_px"] == pytest.approx(mean, abs=1e-15)
    assert stats["max_err_px"] == pytest.approx(0.3)


def test_statistics_permutation_invariant():
    r = np.random.default_rng(0)
    errs = r.normal(size=(7, 2))
    base = error_statistics(errs)
    for perm in itertools.islice(itertools.permutations(range(7)), 20):
        stats = error_statistics(errs[list(perm)])
        for key, value in base.items():
            assert stats[key] == pytest.approx(value, rel=1e-12)


def test_empty_statistics_are_nan():
    assert all(math.isnan(v) for v in error_statistics(np.empty((0, 2))).values())


def test_make_registrar_names():
    for name in ALGORITHM_NAMES:
        assert callable(make_registrar(name))
    with pytest.raises(ValueError):
        make_registrar("keren")


def _oracle_estimator(truth_by_id):
    def fn(ref, target):
        return truth_by_id[id(target)]
    return fn


def test_sweep_perfect_estimator():
    pairs = [(Grid(np.eye(4)), Grid(np.eye(4) * (i + 1)), Displacement(0.1 * i, -0.1 * i)) for i in range(4)]
    lookup = {id(b): t for _, b, t in pairs}
    res = accuracy_sweep(pairs, {"exact": _oracle_estimator(lookup)}, [None])
    assert len(res) == 1
    r = res[0]
    assert (r.algorithm, r.psnr_db, r.n, r.failures) == ("exact", None, 4, 0)
    assert r.std_err_px == 0 and r.mean_abs_err_px == 0


def test_sweep_counts_failures_separately(dataset1):
    calls = {"n": 0}

    def flaky(ref, target):
        calls["n"] += 1
        if calls["n"] % 2:
            raise DegeneratePeakError("flat")
        return Displacement(0.0, 0.0)

    res = accuracy_sweep(dataset1[:6], {"flaky": flaky}, [None])
    assert res[0].n == 3 and res[0].failures == 3
    assert math.isfinite(res[0].std_err_px)


def test_sweep_grid_and_order(dataset1):
    res = accuracy_sweep(dataset1[:3], ["centroid", "phase-slope"], [10.0, 40.0], seed=1)
    assert [(r.algorithm, r.psnr_db) for r in res] == [
        ("centroid", 10.0), ("phase-slope", 10.0), ("centroid", 40.0), ("phase-slope", 40.0)
    ]
    assert all(r.n == 3 and r.mean_time_us > 0 for r in res)


def _strip_timing(results):
    return [{k: v for k, v in vars(r).items() if k != "mean_time_us"} for r in results]


def test_sweep_reproducible_and_worker_independent(dataset1):
    a = accuracy_sweep(dataset1[:8], ["centroid"], [12.0, 30.0], seed=5)
    b = accuracy_sweep(dataset1[:8], ["centroid"], [12.0, 30.0], seed=5, workers=3)
    c = accuracy_sweep(dataset1[:8], ["centroid"], [12.0, 30.0], seed=6)
    assert _strip_timing(a) == _strip_timing(b)
    assert _strip_timing(a) != _strip_timing(c)


def test_sweep_noise_independent_of_level_order(dataset1):
    a = accuracy_sweep(dataset1[:4], ["centroid"], [20.0, 30.0], seed=2)
    b = accuracy_sweep(dataset1[:4], ["centroid"], [30.0, 20.0], seed=2)
    assert _strip_timing(a) == _strip_timing(list(reversed(b)))


def test_sweep_rejects_empty(dataset1):
    with pytest.raises(ValueError):
        accuracy_sweep([], ["centroid"], [None])
    with pytest.raises(ValueError):
        accuracy_sweep(dataset1[:1], [], [None])


def test_time_single_rep(dataset1):
    ref, target, _ = dataset1[0]
    t = time_registration(make_registrar("centroid"), ref, target, warmup=0, reps=1)
    assert t > 0
    with pytest.raises(ValueError):
        time_registration(make_registrar("centroid"), ref, target, reps=0)


def test_time_reps_one_returns_the_measurement(monkeypatch):
    import mmreg.evaluate as ev

    ticks = iter([1000, 251000])
    monkeypatch.setattr(ev.time, "perf_counter_ns", lambda: next(ticks))
    assert time_registration(lambda a, b: None, None, None, warmup=0, reps=1) == 250.0
