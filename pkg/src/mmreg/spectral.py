"""Circular cross-correlation through the FFT and integer peak location."""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import ConstantImageError, DimensionMismatchError
from .grid import Grid, GridLike, WrapIndex, as_grid

__all__ = [
    "FFTPlan",
    "CorrelationSurface",
    "get_plan",
    "cross_power",
    "cross_correlate",
    "locate_peak",
    "check_pair",
]

# max |imag| / max |real| tolerated before the inverse transform is declared non-real
IMAG_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class FFTPlan:
    """Per-size transform state: signed integer frequency indices along each axis.

    ``fy`` and ``fx`` run over ``0, 1, ..., -2, -1`` in FFT storage order, so the
    phase ramp of a shift ``s`` is ``exp(-2j*pi*(fx*sx/width + fy*sy/height))``.
    """

    height: int
    width: int
    fy: np.ndarray
    fx: np.ndarray

    @classmethod
    def build(cls, height: int, width: int) -> FFTPlan:
        fy = np.fft.fftfreq(height, 1.0 / height)
        fx = np.fft.fftfreq(width, 1.0 / width)
        fy.setflags(write=False)
        fx.setflags(write=False)
        return cls(height, width, fy, fx)

    def forward(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fft2(values)

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(spectrum)


_PLANS: dict[tuple[int, int], FFTPlan] = {}
_PLANS_LOCK = threading.Lock()


def get_plan(height: int, width: int) -> FFTPlan:
    """Return the cached plan for an image size, building it on first use."""
    key = (int(height), int(width))
    plan = _PLANS.get(key)
    if plan is None:
        with _PLANS_LOCK:
            plan = _PLANS.get(key)
            if plan is None:
                plan = _PLANS[key] = FFTPlan.build(*key)
    return plan


@dataclass(frozen=True, eq=False)
class CorrelationSurface:
    """Correlation values indexed by wrapped lag, ``grid.values[iy, ix]``."""

    grid: Grid

    @property
    def values(self) -> np.ndarray:
        return self.grid.values

    @property
    def source_width(self) -> int:
        return self.grid.width

    @property
    def source_height(self) -> int:
        return self.grid.height


def check_pair(a: GridLike, b: GridLike) -> tuple[Grid, Grid]:
    """Coerce both inputs to grids and reject mismatched or constant images."""
    a, b = as_grid(a), as_grid(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"image sizes differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    for name, g in (("reference", a), ("target", b)):
        if np.ptp(g.values) == 0:
            raise ConstantImageError(
                f"{name} image is constant; its correlation surface is flat"
            )
    return a, b


def _canonical_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Rolling both images so the first maximum of ``a`` lands on the origin keeps
    # the correlation mathematically unchanged and makes its rounding identical
    # for any joint circular shift of the inputs (given a unique maximum).
    iy, ix = divmod(int(np.argmax(a)), a.shape[1])
    return np.roll(a, (-iy, -ix), axis=(0, 1)), np.roll(b, (-iy, -ix), axis=(0, 1))


def cross_power(a: Grid, b: Grid) -> np.ndarray:
    """``conj(FFT(a)) * FFT(b)`` for two validated grids of equal size."""
    plan = get_plan(a.height, a.width)
    av, bv = _canonical_pair(a.values, b.values)
    return np.conj(plan.forward(av)) * plan.forward(bv)


def _real_part(z: np.ndarray) -> np.ndarray:
    re = z.real
    scale = np.max(np.abs(re))
    if np.max(np.abs(z.imag)) > IMAG_TOLERANCE * scale:
        raise ArithmeticError("inverse transform of a real cross-power left a large imaginary part")
    return re


def cross_correlate(a: GridLike, b: GridLike) -> CorrelationSurface:
    """Circular cross-correlation ``s(l) = sum_x a(x) * b(x + l)``.

    Computed as ``IFFT(conj(FFT(a)) * FFT(b))``. The inverse transform carries the
    usual ``1/N`` factor, which cancels the ``N`` of the forward pair, so values
    equal the spatial double sum with unit scale.

    Raises:
        DimensionMismatchError: the images differ in size.
        ConstantImageError: either image is constant.
    """
    a, b = check_pair(a, b)
    plan = get_plan(a.height, a.width)
    surface = _real_part(plan.inverse(cross_power(a, b)))
    return CorrelationSurface(Grid(surface))


def locate_peak(s: CorrelationSurface) -> WrapIndex:
    """Index of the global maximum; ties go to the smallest ``iy``, then ``ix``."""
    flat = int(np.argmax(s.values))
    iy, ix = divmod(flat, s.source_width)
    return WrapIndex(ix, iy)
