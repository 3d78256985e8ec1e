"""Accuracy sweeps over PSNR levels and wall-clock timing of registrars."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .baselines import PhaseSlopeConfig, UpsampleConfig, register_phase_slope, register_upsampled_dft
from .centroid import CentroidConfig, register
from .datagen import NoiseSpec, add_noise_psnr, derive_seed
from .errors import DegeneratePeakError
from .grid import Displacement, Grid

__all__ = [
    "ALGORITHM_NAMES",
    "Registrar",
    "SweepResult",
    "make_registrar",
    "error_statistics",
    "accuracy_sweep",
    "time_registration",
]

Registrar = Callable[[Grid, Grid], Displacement]
Pair = tuple[Grid, Grid, Displacement]

ALGORITHM_NAMES = ("centroid", "upsampled-dft", "phase-slope")

# noise-seed roles within one trial
_REF, _TARGET = 0, 1


def make_registrar(name: str, *, radius: float = 3.0, kappa: int = 100, rho: float = 0.6) -> Registrar:
    """Bind an algorithm name to its configuration."""
    if name == "centroid":
        cfg = CentroidConfig(radius=radius)
        return lambda a, b: register(a, b, cfg)
    if name == "upsampled-dft":
        ucfg = UpsampleConfig(kappa=kappa)
        return lambda a, b: register_upsampled_dft(a, b, ucfg)
    if name == "phase-slope":
        pcfg = PhaseSlopeConfig(rho=rho)
        return lambda a, b: register_phase_slope(a, b, pcfg)
    raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHM_NAMES)}")


@dataclass(frozen=True)
class SweepResult:
    """Accuracy statistics for one (algorithm, PSNR) cell.

    ``n`` counts successful trials; ``failures`` counts degenerate-peak errors,
    which are excluded from every statistic. Standard deviations are population
    values over the error magnitudes (``std_err_px``) or per axis.
    """

    algorithm: str
    psnr_db: float | None
    n: int
    failures: int
    std_err_px: float
    mean_abs_err_px: float
    max_err_px: float
    mean_time_us: float
    std_err_x_px: float = math.nan
    std_err_y_px: float = math.nan
    mean_err_x_px: float = math.nan
    mean_err_y_px: float = math.nan


def error_statistics(errors: np.ndarray) -> dict[str, float]:
    """Population statistics of an ``(n, 2)`` array of ``estimate - truth``."""
    e = np.asarray(errors, dtype=np.float64).reshape(-1, 2)
    if e.shape[0] == 0:
        keys = ("std_err_px", "mean_abs_err_px", "max_err_px",
                "std_err_x_px", "std_err_y_px", "mean_err_x_px", "mean_err_y_px")
        return dict.fromkeys(keys, math.nan)
    mag = np.hypot(e[:, 0], e[:, 1])
    return {
        "std_err_px": float(np.std(mag)),
        "mean_abs_err_px": float(np.mean(mag)),
        "max_err_px": float(np.max(mag)),
        "std_err_x_px": float(np.std(e[:, 0])),
        "std_err_y_px": float(np.std(e[:, 1])),
        "mean_err_x_px": float(np.mean(e[:, 0])),
        "mean_err_y_px": float(np.mean(e[:, 1])),
    }


def _noisy_pair(pair: Pair, psnr_db: float | None, seed: int, trial: int) -> Pair:
    if psnr_db is None:
        return pair
    ref, target, truth = pair
    # SeedSequence entropy must be non-negative
    key = int(round(psnr_db * 1000)) & (2**63 - 1)
    ref = add_noise_psnr(ref, NoiseSpec(psnr_db, derive_seed(seed, key, trial, _REF)))
    target = add_noise_psnr(target, NoiseSpec(psnr_db, derive_seed(seed, key, trial, _TARGET)))
    return ref, target, truth


def _run_trial(args):
    pair, psnr_db, seed, trial, registrars = args
    ref, target, truth = _noisy_pair(pair, psnr_db, seed, trial)
    out = {}
    for name, fn in registrars.items():
        t0 = time.perf_counter_ns()
        try:
            est = fn(ref, target)
        except DegeneratePeakError:
            est = None
        out[name] = (est, time.perf_counter_ns() - t0)
    return truth, out


def _resolve(algorithms) -> dict[str, Registrar]:
    if isinstance(algorithms, Mapping):
        return dict(algorithms)
    resolved = {}
    for item in algorithms:
        if isinstance(item, str):
            resolved[item] = make_registrar(item)
        else:
            name, fn = item
            resolved[name] = fn
    return resolved


def accuracy_sweep(
    dataset: Sequence[Pair],
    algorithms: Mapping[str, Registrar] | Sequence,
    psnr_levels: Sequence[float | None],
    seed: int = 0,
    workers: int = 1,
) -> list[SweepResult]:
    """Register every pair at every noise level with every algorithm.

    Noise for trial ``i`` at level ``p`` uses ``derive_seed(seed, round(1000*p), i, role)``
    with role 0 for the reference and 1 for the target, so every algorithm sees
    the same noisy images and results do not depend on list order. ``None`` in
    ``psnr_levels`` means noise-free.

    Args:
        dataset: ``(reference, target, truth)`` triples.
        algorithms: name -> registrar mapping, or names accepted by
            :func:`make_registrar` (default parameters).
        psnr_levels: PSNR values in dB.
        seed: base noise seed.
        workers: threads used to run trials; results are identical for any value.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    registrars = _resolve(algorithms)
    if not registrars:
        raise ValueError("no algorithms given")

    results = []
    for psnr_db in psnr_levels:
        jobs = [(pair, psnr_db, seed, i, registrars) for i, pair in enumerate(dataset)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                trials = list(pool.map(_run_trial, jobs))
        else:
            trials = [_run_trial(job) for job in jobs]
        for name in registrars:
            errors, times, failures = [], [], 0
            for truth, out in trials:
                est, ns = out[name]
                times.append(ns)
                if est is None:
                    failures += 1
                else:
                    errors.append((est.dx - truth.dx, est.dy - truth.dy))
            stats = error_statistics(np.array(errors))
            results.append(SweepResult(
                algorithm=name,
                psnr_db=psnr_db,
                n=len(errors),
                failures=failures,
                mean_time_us=float(np.mean(times)) / 1e3,
                **stats,
            ))
    return results


def time_registration(algorithm: Registrar, ref: Grid, target: Grid, warmup: int = 3, reps: int = 20) -> float:
    """Median wall time of one call in microseconds, measured sequentially."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    for _ in range(max(0, warmup)):
        algorithm(ref, target)
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        algorithm(ref, target)
        samples.append(time.perf_counter_ns() - t0)
    return float(np.median(samples)) / 1e3
