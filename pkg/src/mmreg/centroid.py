"""Subpixel registration by the Modified Moment centroid of the correlation peak.

Stage one takes the integer argmax of the circular cross-correlation. Stage two
sets a threshold ``b`` to the minimum of the surface inside a small circle around
that peak, keeps ``I - b`` for cells above ``b`` and zero elsewhere, and
returns the first moment of what survives. The surviving cells are the peak
itself: 8-connected to the maximum and within a few radii of it. Lags are read
in a frame centred on the integer peak, so no image is ever resampled.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .errors import DegeneratePeakError
from .grid import Displacement, GridLike, WrapIndex, to_signed_lag
from .spectral import CorrelationSurface, cross_correlate, locate_peak

__all__ = [
    "CentroidConfig",
    "circle_offsets",
    "threshold_from_circle",
    "peak_region",
    "modified_moment_centroid",
    "register",
]

_EIGHT = np.ones((3, 3), dtype=bool)

# peak-to-threshold contrast below this fraction of the peak magnitude is rounding noise
FLAT_RTOL = 1e-10


@dataclass(frozen=True)
class CentroidConfig:
    """Parameters of the centroid stage.

    Attributes:
        radius: circle radius in pixels used to pick the threshold.
        min_pixels_above_threshold: fewest contributing cells accepted before
            the peak is declared degenerate.
        region_radius: cells farther than this from the peak never contribute.
            ``None`` means ``2 * radius``, reduced if needed so the disc does not
            overlap itself on small surfaces.
        clip_to_circle: if True, only cells inside the threshold circle
            contribute. The default keeps every above-threshold cell 8-connected
            to the peak within ``region_radius``; a fixed small window drags the
            estimate toward the integer peak on broad correlation peaks.
    """

    radius: float = 3.0
    min_pixels_above_threshold: int = 3
    region_radius: float | None = None
    clip_to_circle: bool = False

    def __post_init__(self):
        if not self.radius >= 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if int(self.min_pixels_above_threshold) < 1:
            raise ValueError("min_pixels_above_threshold must be a positive integer")
        if self.region_radius is not None and not self.region_radius >= self.radius:
            raise ValueError("region_radius must be at least radius")

    def check_fits(self, width: int, height: int) -> None:
        if not self.radius < min(width, height) / 2:
            raise ValueError(
                f"radius {self.radius} must be below half the smaller image side ({width}x{height})"
            )

    def effective_region_radius(self, width: int, height: int) -> float:
        wanted = 2.0 * self.radius if self.region_radius is None else self.region_radius
        # largest integer reach that keeps offsets distinct on the torus
        limit = (min(width, height) - 1) // 2
        return max(self.radius, min(wanted, limit))


@lru_cache(maxsize=32)
def circle_offsets(radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Integer ``(ox, oy)`` with ``ox**2 + oy**2 <= radius**2``, row-major order."""
    r = int(np.floor(radius))
    o = np.arange(-r, r + 1)
    oy, ox = np.meshgrid(o, o, indexing="ij")
    inside = ox * ox + oy * oy <= radius * radius
    ox, oy = ox[inside], oy[inside]
    ox.setflags(write=False)
    oy.setflags(write=False)
    return ox, oy


def _circle_values(s: CorrelationSurface, peak: WrapIndex, cfg: CentroidConfig):
    w, h = s.source_width, s.source_height
    cfg.check_fits(w, h)
    ox, oy = circle_offsets(cfg.radius)
    vals = s.values[(peak.iy + oy) % h, (peak.ix + ox) % w]
    return ox, oy, vals


def threshold_from_circle(s: CorrelationSurface, peak: WrapIndex, cfg: CentroidConfig | None = None) -> float:
    """Minimum surface value over cells within ``cfg.radius`` of the peak on the torus."""
    cfg = cfg or CentroidConfig()
    _, _, vals = _circle_values(s, peak, cfg)
    return float(vals.min())


def peak_region(values: np.ndarray, peak: WrapIndex, b: float, reach: float
                ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cells above ``b``, within ``reach`` of ``peak`` and 8-connected to it.

    Returns ``(ox, oy, v)``: offsets from the peak and the surface values there.
    """
    h, w = values.shape
    r = int(np.floor(reach))
    o = np.arange(-r, r + 1)
    win = values[np.ix_((peak.iy + o) % h, (peak.ix + o) % w)]
    oy, ox = np.meshgrid(o, o, indexing="ij")
    mask = (win > b) & (ox * ox + oy * oy <= reach * reach)
    labels, _ = ndimage.label(mask, structure=_EIGHT)
    centre = labels[r, r]
    if centre == 0:
        empty = np.empty(0, dtype=int)
        return empty, empty, np.empty(0)
    keep = labels == centre
    return ox[keep], oy[keep], win[keep]


def modified_moment_centroid(
    s: CorrelationSurface, peak: WrapIndex, cfg: CentroidConfig | None = None
) -> Displacement:
    """Subpixel peak position as threshold-subtracted first moment plus the peak's signed lag.

    Cells equal to the threshold get zero weight, so the circle minimum never
    contributes.

    Raises:
        DegeneratePeakError: fewer than ``cfg.min_pixels_above_threshold`` cells
            lie strictly above the threshold.
    """
    cfg = cfg or CentroidConfig()
    ox, oy, vals = _circle_values(s, peak, cfg)
    b = vals.min()
    top = s.values[peak.iy, peak.ix]
    if top - b <= FLAT_RTOL * max(abs(top), abs(b)):
        raise DegeneratePeakError(
            f"flat correlation surface: peak {top:.6g} does not rise above the circle minimum {b:.6g}"
        )
    if cfg.clip_to_circle:
        keep = vals > b
        ox, oy, vals = ox[keep], oy[keep], vals[keep]
    else:
        reach = cfg.effective_region_radius(s.source_width, s.source_height)
        ox, oy, vals = peak_region(s.values, peak, b, reach)
    if vals.size < cfg.min_pixels_above_threshold:
        raise DegeneratePeakError(
            f"flat correlation surface: {vals.size} cell(s) above the circle-minimum "
            f"threshold, need at least {cfg.min_pixels_above_threshold}"
        )
    weights = vals - b
    total = weights.sum()
    lx, ly = to_signed_lag(peak, s.source_width, s.source_height)
    return Displacement(lx + (weights @ ox) / total, ly + (weights @ oy) / total)


def register(reference: GridLike, target: GridLike, cfg: CentroidConfig | None = None) -> Displacement:
    """Estimate the shift that carries ``reference`` content onto ``target``.

    >>> import numpy as np
from scipy import ndimage
    >>> from mmreg.grid import circular_shift
    >>> g = np.random.default_rng(0).random((32, 32))
    >>> d = register(g, circular_shift(g, 4, -7))
    >>> round(d.dx, 6), round(d.dy, 6)
    (4.0, -7.0)
    """
    surface = cross_correlate(reference, target)
    return modified_moment_centroid(surface, locate_peak(surface), cfg)
