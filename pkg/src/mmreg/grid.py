"""Dense 2-D grids, displacements and wrap-around lag indices.

A :class:`Grid` stores intensities as a read-only ``(height, width)`` float64
array, so ``values[y, x]`` is the cell at column ``x`` and row ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence, Union

import numpy as np

from .errors import GridError

__all__ = [
    "Grid",
    "Displacement",
    "WrapIndex",
    "GridLike",
    "make_grid",
    "as_grid",
    "circular_shift",
    "to_signed_lag",
    "from_signed_lag",
]


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable rectangle of finite real values, row-major (y outer, x inner)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise GridError(f"grid data must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise GridError("grid values must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def at(self, x: int, y: int) -> float:
        return float(self.values[y, x])

    def ravel(self) -> list[float]:
        """Cell values in row-major order, the layout accepted by :func:`make_grid`."""
        return self.values.ravel().tolist()

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"Grid(width={self.width}, height={self.height})"


GridLike = Union[Grid, np.ndarray]


def as_grid(obj: GridLike) -> Grid:
    """Return ``obj`` unchanged if it is a Grid, otherwise wrap a 2-D array."""
    return obj if isinstance(obj, Grid) else Grid(obj)


def make_grid(width: int, height: int, values: Sequence[float]) -> Grid:
    """Build a grid from a flat row-major sequence of ``width * height`` values."""
    if int(width) < 1 or int(height) < 1:
        raise GridError(f"width and height must be positive, got {width}x{height}")
    flat = np.asarray(values, dtype=np.float64).ravel()
    if flat.size != width * height:
        raise GridError(f"expected {width * height} values for a {width}x{height} grid, got {flat.size}")
    return Grid(flat.reshape(height, width))


def circular_shift(g: GridLike, sx: int, sy: int) -> Grid:
    """Move content by ``(+sx, +sy)`` with wrap-around.

    ``out(x, y) = g((x - sx) mod width, (y - sy) mod height)``.
    """
    g = as_grid(g)
    return Grid(np.roll(g.values, (int(sy), int(sx)), axis=(0, 1)))


@dataclass(frozen=True)
class Displacement:
    """Subpixel shift in pixels; positive means target content moved toward +x / +y."""

    dx: float
    dy: float

    def __post_init__(self):
        if not (math.isfinite(self.dx) and math.isfinite(self.dy)):
            raise GridError(f"displacement components must be finite, got ({self.dx}, {self.dy})")
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "dy", float(self.dy))

    def __iter__(self) -> Iterator[float]:
        yield self.dx
        yield self.dy

    def __neg__(self) -> Displacement:
        return Displacement(-self.dx, -self.dy)

    def __add__(self, other: Displacement) -> Displacement:
        return Displacement(self.dx + other.dx, self.dy + other.dy)

    def __sub__(self, other: Displacement) -> Displacement:
        return Displacement(self.dx - other.dx, self.dy - other.dy)

    @property
    def magnitude(self) -> float:
        return math.hypot(self.dx, self.dy)


class WrapIndex(NamedTuple):
    """Integer lag on a correlation surface, 0 <= ix < width, 0 <= iy < height."""

    ix: int
    iy: int


def _wrap(i: int, n: int) -> int:
    return i if 2 * i <= n else i - n


def to_signed_lag(w: WrapIndex, width: int, height: int) -> tuple[int, int]:
    """Map a wrapped lag to its signed value in ``(-n/2, n/2]`` on each axis.

    The exact half lag (``n/2`` for even ``n``) stays positive.
    """
    ix, iy = int(w[0]), int(w[1])
    if not (0 <= ix < width and 0 <= iy < height):
        raise GridError(f"lag index ({ix}, {iy}) outside [0, {width}) x [0, {height})")
    return _wrap(ix, width), _wrap(iy, height)


def from_signed_lag(lx: int, ly: int, width: int, height: int) -> WrapIndex:
    """Inverse of :func:`to_signed_lag`."""
    return WrapIndex(int(lx) % width, int(ly) % height)
