"""Comparison registrars: upsampled-DFT peak search and phase-plane fitting.

Both share the coarse FFT cross-correlation stage with :func:`mmreg.register`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import windows

from .errors import RankDeficientError
from .grid import Displacement, Grid, GridLike, to_signed_lag
from .spectral import CorrelationSurface, check_pair, cross_power, get_plan, locate_peak

__all__ = ["UpsampleConfig", "PhaseSlopeConfig", "register_upsampled_dft", "register_phase_slope"]


@dataclass(frozen=True)
class UpsampleConfig:
    """``kappa``: upsampling factor (result lies on a 1/kappa grid).
    ``half_window``: half-width in pixels of the refined region around the coarse peak.
    """

    kappa: int = 100
    half_window: float = 1.5

    def __post_init__(self):
        if int(self.kappa) != self.kappa or self.kappa < 2:
            raise ValueError(f"kappa must be an integer >= 2, got {self.kappa}")
        if not self.half_window > 0:
            raise ValueError("half_window must be positive")


@dataclass(frozen=True)
class PhaseSlopeConfig:
    """Phase-plane fit settings.

    Attributes:
        rho: radius of the retained low-frequency disc as a fraction of Nyquist.
        weighted: weight each frequency by its cross-power magnitude. Weak bins
            carry mostly frame-edge leakage and noise; unweighted fits on
            non-periodic images are biased toward zero shift.
        tukey_alpha: if set, taper both images with a separable Tukey window of
            this shape parameter first. Suppresses edge leakage further but makes
            the estimate depend on where content sits in the frame.
        min_relative_power: bins below this fraction of the peak magnitude are dropped.
    """

    rho: float = 0.6
    weighted: bool = True
    tukey_alpha: float | None = None
    min_relative_power: float = 1e-12

    def __post_init__(self):
        if not 0 < self.rho <= math.sqrt(2):
            raise ValueError(f"rho must lie in (0, sqrt(2)], got {self.rho}")
        if self.tukey_alpha is not None and not 0 <= self.tukey_alpha <= 1:
            raise ValueError("tukey_alpha must lie in [0, 1]")


def _coarse(power: np.ndarray) -> tuple[int, int]:
    surface = np.fft.ifft2(power).real
    peak = locate_peak(CorrelationSurface(Grid(surface)))
    h, w = power.shape
    return to_signed_lag(peak, w, h)


def register_upsampled_dft(
    reference: GridLike, target: GridLike, cfg: UpsampleConfig | None = None
) -> Displacement:
    """Argmax of the cross-correlation resampled on a 1/kappa grid near the coarse peak.

    The fine surface is evaluated directly from the cross-power spectrum by two
    small matrix-multiply DFTs, so only ``(2m+1)**2`` lags are computed with
    ``m = ceil(half_window * kappa)``.
    """
    cfg = cfg or UpsampleConfig()
    a, b = check_pair(reference, target)
    plan = get_plan(a.height, a.width)
    power = cross_power(a, b)
    cx, cy = _coarse(power)

    m = math.ceil(cfg.half_window * cfg.kappa)
    steps = np.arange(-m, m + 1)
    lag_x = cx + steps / cfg.kappa
    lag_y = cy + steps / cfg.kappa
    kern_y = np.exp((2j * np.pi / a.height) * np.outer(lag_y, plan.fy))
    kern_x = np.exp((2j * np.pi / a.width) * np.outer(plan.fx, lag_x))
    fine = (kern_y @ power @ kern_x).real

    iy, ix = divmod(int(np.argmax(fine)), fine.shape[1])
    return Displacement(cx + steps[ix] / cfg.kappa, cy + steps[iy] / cfg.kappa)


def register_phase_slope(
    reference: GridLike, target: GridLike, cfg: PhaseSlopeConfig | None = None
) -> Displacement:
    """Least-squares plane through the cross-power phase over a low-frequency disc.

    A shift ``(dx, dy)`` gives phase ``-2*pi*(fx*dx/W + fy*dy/H)``. The integer
    part found by the coarse stage is removed first, which keeps the residual
    phase inside ``(-pi, pi]`` on the disc and so unwraps it.

    Raises:
        RankDeficientError: fewer than two independent frequencies survive.
    """
    cfg = cfg or PhaseSlopeConfig()
    a, b = check_pair(reference, target)
    plan = get_plan(a.height, a.width)
    if cfg.tukey_alpha is not None:
        win = np.outer(windows.tukey(a.height, cfg.tukey_alpha), windows.tukey(a.width, cfg.tukey_alpha))
        a, b = Grid(a.values * win), Grid(b.values * win)
    power = cross_power(a, b)
    cx, cy = _coarse(power)

    ux = plan.fx[np.newaxis, :] / (a.width / 2)
    uy = plan.fy[:, np.newaxis] / (a.height / 2)
    disc = (ux * ux + uy * uy <= cfg.rho * cfg.rho)
    disc[0, 0] = False
    disc &= np.abs(power) > cfg.min_relative_power * np.abs(power).max()

    fy, fx = np.nonzero(disc)
    kx = plan.fx[fx]
    ky = plan.fy[fy]
    residual = power[fy, fx] * np.exp(2j * np.pi * (kx * cx / a.width + ky * cy / a.height))
    phase = np.angle(residual)
    weight = np.abs(residual) if cfg.weighted else np.ones(phase.size)

    design = np.column_stack([-2 * np.pi * kx / a.width, -2 * np.pi * ky / a.height])
    sol, _, rank, _ = np.linalg.lstsq(design * weight[:, np.newaxis], phase * weight, rcond=None)
    if rank < 2:
        raise RankDeficientError(
            f"phase-plane fit is rank deficient ({fx.size} usable frequencies)"
        )
    return Displacement(cx + sol[0], cy + sol[1])
